//! Offline benchmarks: the fluid throttling optimum, the deterministic LP
//! (bid-shading) optimum, the hindsight knapsack, and exact combinatorics for
//! the two-price lower-bound instance.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::distributions::{interim_curves, DiscreteDistribution};
use crate::error::{Error, Result};
use crate::model::Trajectory;

const SPEND_TOL: f64 = 1e-12;

/// Solution of the fractional knapsack both LP benchmarks reduce to.
#[derive(Debug, Clone)]
struct Knapsack {
    fractions: Vec<f64>,
    value: f64,
    spend: f64,
    /// Item whose ratio sets the threshold (the last one touched).
    marginal: Option<usize>,
    /// Item taken with a fraction strictly between 0 and 1.
    fractional: Option<usize>,
    all_in: bool,
}

/// `items[i] = (reward, weight)`, both already scaled by probability mass.
fn fractional_knapsack(items: &[(f64, f64)], capacity: f64) -> Knapsack {
    let total_weight: f64 = items.iter().map(|i| i.1).sum();
    if total_weight <= capacity + SPEND_TOL {
        return Knapsack {
            fractions: vec![1.0; items.len()],
            value: items.iter().map(|i| i.0).sum(),
            spend: total_weight,
            marginal: None,
            fractional: None,
            all_in: true,
        };
    }
    let mut fractions = vec![0.0; items.len()];
    let (mut value, mut spend) = (0.0, 0.0);
    let mut order = Vec::new();
    for (i, &(r, w)) in items.iter().enumerate() {
        if r > 0.0 && w == 0.0 {
            fractions[i] = 1.0;
            value += r;
        } else if r > 0.0 {
            order.push(i);
        }
    }
    order.sort_by(|&a, &b| {
        let (ra, wa) = items[a];
        let (rb, wb) = items[b];
        (rb / wb)
            .total_cmp(&(ra / wa))
            .then(rb.total_cmp(&ra))
            .then(a.cmp(&b))
    });
    let mut marginal = None;
    let mut fractional = None;
    for i in order {
        let remaining = capacity - spend;
        if remaining <= 0.0 {
            break;
        }
        let (r, w) = items[i];
        marginal = Some(i);
        if w <= remaining {
            fractions[i] = 1.0;
            value += r;
            spend += w;
        } else {
            let f = remaining / w;
            fractions[i] = f;
            value += f * r;
            spend = capacity;
            fractional = Some(i);
            break;
        }
    }
    Knapsack {
        fractions,
        value,
        spend,
        marginal,
        fractional,
        all_in: false,
    }
}

/// Best static participation policy against i.i.d. values and prices.
#[derive(Debug, Clone, PartialEq)]
pub struct FluidSolution {
    pub per_round_value: f64,
    /// `(value atom, participation probability)` for every atom of F.
    pub policy: Vec<(f64, f64)>,
    /// Values with `r(v) > threshold * c(v)` are always entered, values below
    /// it never. Zero when participating everywhere is affordable.
    pub threshold_ratio: f64,
    /// Whether expected spend equals the budget rate.
    pub binding: bool,
    pub expected_spend: f64,
}

pub fn fluid_opt(values: &DiscreteDistribution, prices: &DiscreteDistribution, rho: f64) -> FluidSolution {
    let curves = interim_curves(prices);
    let atoms = values.atoms();
    let items: Vec<(f64, f64)> = atoms
        .iter()
        .map(|&(v, f)| (f * curves.reward(v), f * curves.cost(v)))
        .collect();
    let k = fractional_knapsack(&items, rho);
    let threshold_ratio = k
        .marginal
        .map(|i| items[i].0 / items[i].1)
        .unwrap_or(0.0);
    FluidSolution {
        per_round_value: k.value,
        policy: atoms.iter().map(|a| a.0).zip(k.fractions).collect(),
        threshold_ratio,
        binding: k.spend >= rho - SPEND_TOL,
        expected_spend: k.spend,
    }
}

/// Best bid-dependent (shading) policy: one acceptance probability per
/// `(value, price)` pair.
#[derive(Debug, Clone, PartialEq)]
pub struct DlpSolution {
    pub per_round_value: f64,
    /// `lambda` such that pairs with `v > (1 + lambda) p` are accepted.
    pub shading_threshold: f64,
    /// The `(v, p)` pair accepted with a fractional probability, if any.
    pub fractional_pair: Option<(f64, f64)>,
    /// `((v, p), probability)` for every winning pair.
    pub acceptance: Vec<((f64, f64), f64)>,
    pub binding: bool,
    pub expected_spend: f64,
}

pub fn dlp_opt(values: &DiscreteDistribution, prices: &DiscreteDistribution, rho: f64) -> DlpSolution {
    let mut pairs = Vec::new();
    let mut items = Vec::new();
    for &(v, f) in values.atoms() {
        for &(p, g) in prices.atoms() {
            if v >= p {
                pairs.push((v, p));
                items.push((f * g * (v - p), f * g * p));
            }
        }
    }
    let k = fractional_knapsack(&items, rho);
    let shading_threshold = k
        .marginal
        .map(|i| (pairs[i].0 - pairs[i].1) / pairs[i].1)
        .unwrap_or(0.0);
    DlpSolution {
        per_round_value: k.value,
        shading_threshold,
        fractional_pair: k.fractional.map(|i| pairs[i]),
        acceptance: pairs.into_iter().zip(k.fractions).collect(),
        binding: !k.all_in || k.spend >= rho - SPEND_TOL,
        expected_spend: k.spend,
    }
}

/// Best selection of rounds in hindsight under the total budget.
#[derive(Debug, Clone, PartialEq)]
pub struct HindsightResult {
    pub value: f64,
    pub selection: Vec<bool>,
    /// True when `value` is certified optimal.
    pub exact: bool,
    /// Equals `value` when exact; otherwise the fractional relaxation.
    pub upper_bound: f64,
}

/// Largest DP table (rounds x budget cells) attempted before falling back to
/// the greedy bracket.
const DP_CELL_LIMIT: usize = 400_000_000;

/// Grid assumed when the caller does not pass one.
pub const DEFAULT_GRID: f64 = 1.0 / 120.0;

/// 0/1 knapsack over rounds: reward `(v - p)^+`, cost `p` when `v >= p`.
///
/// Solvers, in order: everything fits; at most two distinct positive costs
/// (exact enumeration of per-class counts); grid-aligned costs (exact DP);
/// otherwise a greedy lower bound with the fractional upper bound.
pub fn hindsight_opt(values: &[f64], prices: &[f64], budget: f64, grid: Option<f64>) -> Result<HindsightResult> {
    if values.len() != prices.len() {
        return Err(Error::InvalidArgument(format!(
            "{} values but {} prices",
            values.len(),
            prices.len()
        )));
    }
    if budget.is_nan() || budget < 0.0 {
        return Err(Error::InvalidArgument(format!("budget {budget} must be non-negative")));
    }
    let n = values.len();
    let mut selection = vec![false; n];
    let mut base = 0.0;
    // (round, reward, cost) for rounds worth paying for
    let mut items = Vec::new();
    for t in 0..n {
        let (v, p) = (values[t], prices[t]);
        if v > p {
            if p == 0.0 {
                selection[t] = true;
                base += v;
            } else {
                items.push((t, v - p, p));
            }
        }
    }
    let tol = 1e-9 * budget.max(1.0);
    let total_cost: f64 = items.iter().map(|i| i.2).sum();
    if total_cost <= budget + tol {
        for &(t, r, _) in &items {
            selection[t] = true;
            base += r;
        }
        return Ok(exact(base, selection));
    }

    let mut classes: BTreeMap<u64, Vec<(usize, f64)>> = BTreeMap::new();
    for &(t, r, c) in &items {
        classes.entry(c.to_bits()).or_default().push((t, r));
    }
    if classes.len() <= 2 {
        let mut cls: Vec<(f64, Vec<(usize, f64)>)> = classes
            .into_iter()
            .map(|(bits, mut v)| {
                v.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
                (f64::from_bits(bits), v)
            })
            .collect();
        if cls.len() == 1 {
            cls.push((1.0, Vec::new()));
        }
        let prefix = |v: &[(usize, f64)]| {
            let mut acc = vec![0.0];
            for &(_, r) in v {
                acc.push(acc.last().unwrap() + r);
            }
            acc
        };
        let (ca, a) = (&cls[0].0, &cls[0].1);
        let (cb, b) = (&cls[1].0, &cls[1].1);
        let (pa, pb) = (prefix(a), prefix(b));
        let mut best = (f64::NEG_INFINITY, 0, 0);
        for (ka, &pa_k) in pa.iter().enumerate() {
            let spent = ka as f64 * ca;
            if spent > budget + tol {
                break;
            }
            let kb = (((budget - spent + tol) / cb).floor().max(0.0) as usize).min(b.len());
            let val = pa_k + pb[kb];
            if val > best.0 {
                best = (val, ka, kb);
            }
        }
        for &(t, _) in a.iter().take(best.1).chain(b.iter().take(best.2)) {
            selection[t] = true;
        }
        return Ok(exact(base + best.0, selection));
    }

    let g = grid.unwrap_or(DEFAULT_GRID);
    let units: Option<Vec<usize>> = items
        .iter()
        .map(|&(_, _, c)| {
            let k = (c / g).round();
            ((c / g - k).abs() <= 1e-7).then_some(k as usize)
        })
        .collect();
    if let Some(units) = units {
        let cap = ((budget / g) + 1e-7).floor() as usize;
        if items.len().saturating_mul(cap + 1) <= DP_CELL_LIMIT {
            let (val, chosen) = knapsack_dp(&items, &units, cap);
            for i in chosen {
                selection[items[i].0] = true;
            }
            return Ok(exact(base + val, selection));
        }
    }

    // Greedy by ratio for the lower bound, fractional relaxation above it.
    let mut order: Vec<usize> = (0..items.len()).collect();
    order.sort_by(|&x, &y| {
        let (_, rx, cx) = items[x];
        let (_, ry, cy) = items[y];
        (ry / cy).total_cmp(&(rx / cx)).then(ry.total_cmp(&rx)).then(x.cmp(&y))
    });
    let (mut spent, mut greedy) = (0.0, 0.0);
    let (mut frac_spent, mut upper) = (0.0, 0.0);
    let mut frac_open = true;
    for &i in &order {
        let (t, r, c) = items[i];
        if spent + c <= budget {
            spent += c;
            greedy += r;
            selection[t] = true;
        }
        if frac_open {
            if frac_spent + c <= budget {
                frac_spent += c;
                upper += r;
            } else {
                upper += r * (budget - frac_spent) / c;
                frac_open = false;
            }
        }
    }
    Ok(HindsightResult {
        value: base + greedy,
        selection,
        exact: false,
        upper_bound: base + upper,
    })
}

fn exact(value: f64, selection: Vec<bool>) -> HindsightResult {
    HindsightResult {
        value,
        selection,
        exact: true,
        upper_bound: value,
    }
}

/// Classic 0/1 knapsack over integer weights, with a bit table for
/// reconstructing the chosen items.
fn knapsack_dp(items: &[(usize, f64, f64)], units: &[usize], cap: usize) -> (f64, Vec<usize>) {
    let width = cap + 1;
    let mut best = vec![0.0f64; width];
    let mut took = vec![0u64; (items.len() * width).div_ceil(64)];
    for (i, (&(_, r, _), &w)) in items.iter().zip(units).enumerate() {
        if w > cap {
            continue;
        }
        for c in (w..=cap).rev() {
            let cand = best[c - w] + r;
            if cand > best[c] {
                best[c] = cand;
                let bit = i * width + c;
                took[bit / 64] |= 1 << (bit % 64);
            }
        }
    }
    let mut chosen = Vec::new();
    let mut c = cap;
    for i in (0..items.len()).rev() {
        let bit = i * width + c;
        if took[bit / 64] >> (bit % 64) & 1 == 1 {
            chosen.push(i);
            c -= units[i];
        }
    }
    (best[cap], chosen)
}

/// `T * opt_per_round - total_reward`
pub fn regret(trajectory: &Trajectory, opt_per_round: f64) -> f64 {
    trajectory.horizon() as f64 * opt_per_round - trajectory.total_reward
}

// ---------------------------------------------------------------------------
// Exact combinatorics for the two-price instance

fn check_multiple_of_four(t: usize) -> Result<()> {
    if t == 0 || !t.is_multiple_of(4) {
        return Err(Error::InvalidArgument(format!(
            "horizon {t} must be a positive multiple of 4"
        )));
    }
    Ok(())
}

/// Upper bound on the revenue any budget-feasible decision sequence earns on
/// the two-price instance when `s` of the `t` prices are 1/3:
/// `(s + t)/3` if `2s >= t`, else `(2s + floor((3t - 2s)/4)) / 3`.
pub fn thm1_revenue_bound(s: usize, t: usize) -> Result<BigRational> {
    check_multiple_of_four(t)?;
    if s > t {
        return Err(Error::InvalidArgument(format!("s = {s} exceeds t = {t}")));
    }
    let thirds = if 2 * s >= t {
        s + t
    } else {
        2 * s + (3 * t - 2 * s) / 4
    };
    Ok(BigRational::new(thirds.into(), 3.into()))
}

pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// Exact regret lower bound on the two-price instance.
#[derive(Debug, Clone, PartialEq)]
pub struct Thm1Bound {
    /// `sum_{t=1}^{T/4} (T - 4(t-1)) C(T+1, 2t-1)`
    pub sum: BigUint,
    /// `2^{T-1} + (T/2) C(T, T/2)`
    pub closed_form: BigUint,
    /// `sum / (12 * 2^T)`
    pub value: BigRational,
    pub approx: f64,
}

pub fn thm1_regret_lower_bound(t: usize) -> Result<Thm1Bound> {
    check_multiple_of_four(t)?;
    let n = t as u64;
    let mut sum = BigUint::zero();
    for i in 1..=n / 4 {
        sum += BigUint::from(n - 4 * (i - 1)) * binomial(n + 1, 2 * i - 1);
    }
    let closed_form = (BigUint::one() << (t - 1)) + BigUint::from(n / 2) * binomial(n, n / 2);
    let denom = BigUint::from(12u32) << t;
    let g = sum.gcd(&denom);
    let value = BigRational::new((&sum / &g).into(), (&denom / &g).into());
    let approx = value.to_f64().unwrap_or(f64::NAN);
    Ok(Thm1Bound {
        sum,
        closed_form,
        value,
        approx,
    })
}
