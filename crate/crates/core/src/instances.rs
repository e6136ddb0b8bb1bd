//! Problem instances: value and price sources, hard-instance generators and a
//! plain-text instance format.

use std::borrow::Cow;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::distributions::{parse_atom, DiscreteDistribution};
use crate::error::{Error, Result};
use crate::model::InfoMode;

/// Denominator of the grid random instances are snapped to.
pub const GRID_DENOMINATOR: u32 = 120;

/// How the value sequence is produced.
#[derive(Debug, Clone, PartialEq)]
pub enum ValueSource {
    /// The same value every round.
    Constant(f64),
    /// An explicit sequence of length `T`.
    Fixed(Vec<f64>),
    /// Independent draws from a distribution.
    Iid(DiscreteDistribution),
    /// One of several fixed sequences, chosen once per episode with the given
    /// weights.
    Mixture(Vec<(f64, Vec<f64>)>),
}

/// How competing prices are produced.
#[derive(Debug, Clone, PartialEq)]
pub enum PriceSource {
    Constant(f64),
    Fixed(Vec<f64>),
    /// Independent draws; one draw per round regardless of the bidder.
    Iid(DiscreteDistribution),
    /// An adaptive adversary that answers the bidder's current decision.
    Decision { if_entered: f64, if_skipped: f64 },
}

impl ValueSource {
    /// Realizes the value sequence for one episode.
    pub fn realize<R: Rng + ?Sized>(&self, horizon: usize, rng: &mut R) -> Result<Cow<'_, [f64]>> {
        match self {
            ValueSource::Constant(v) => Ok(Cow::Owned(vec![*v; horizon])),
            ValueSource::Fixed(vs) => {
                check_len("value", vs.len(), horizon)?;
                Ok(Cow::Borrowed(vs))
            }
            ValueSource::Iid(f) => Ok(Cow::Owned((0..horizon).map(|_| f.sample(rng)).collect())),
            ValueSource::Mixture(components) => {
                let u: f64 = rng.gen();
                let mut acc = 0.0;
                let mut chosen = &components[components.len() - 1].1;
                for (w, vs) in components {
                    acc += w;
                    if u < acc {
                        chosen = vs;
                        break;
                    }
                }
                check_len("value", chosen.len(), horizon)?;
                Ok(Cow::Borrowed(chosen))
            }
        }
    }

    fn all_values(&self) -> Box<dyn Iterator<Item = f64> + '_> {
        match self {
            ValueSource::Constant(v) => Box::new(std::iter::once(*v)),
            ValueSource::Fixed(vs) => Box::new(vs.iter().copied()),
            ValueSource::Iid(f) => Box::new(f.atoms().iter().map(|a| a.0)),
            ValueSource::Mixture(c) => Box::new(c.iter().flat_map(|(_, vs)| vs.iter().copied())),
        }
    }
}

fn check_len(what: &str, len: usize, horizon: usize) -> Result<()> {
    if len == horizon {
        Ok(())
    } else {
        Err(Error::InvalidInstance(format!(
            "{what} sequence has length {len}, horizon is {horizon}"
        )))
    }
}

/// Per-episode price generator built from a [`PriceSource`].
pub struct PriceProcess<'a> {
    source: &'a PriceSource,
    round: usize,
}

impl PriceProcess<'_> {
    /// Price for the next round. `entered` is the bidder's decision for this
    /// round; only the adaptive source looks at it.
    pub fn next_price<R: Rng + ?Sized>(&mut self, rng: &mut R, entered: bool) -> Result<f64> {
        let t = self.round;
        self.round += 1;
        Ok(match self.source {
            PriceSource::Constant(p) => *p,
            PriceSource::Fixed(ps) => *ps.get(t).ok_or_else(|| {
                Error::InvalidInstance(format!("price sequence exhausted at round {}", t + 1))
            })?,
            PriceSource::Iid(g) => g.sample(rng),
            PriceSource::Decision {
                if_entered,
                if_skipped,
            } => {
                if entered {
                    *if_entered
                } else {
                    *if_skipped
                }
            }
        })
    }
}

impl PriceSource {
    pub fn process(&self) -> PriceProcess<'_> {
        PriceProcess {
            source: self,
            round: 0,
        }
    }

    fn all_prices(&self) -> Vec<f64> {
        match self {
            PriceSource::Constant(p) => vec![*p],
            PriceSource::Fixed(ps) => ps.clone(),
            PriceSource::Iid(g) => g.atoms().iter().map(|a| a.0).collect(),
            PriceSource::Decision {
                if_entered,
                if_skipped,
            } => vec![*if_entered, *if_skipped],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub name: String,
    pub horizon: usize,
    pub budget_rate: f64,
    pub value_ceiling: f64,
    /// Default feedback model for runs that do not override it.
    pub info_mode: InfoMode,
    pub values: ValueSource,
    pub prices: PriceSource,
}

impl Instance {
    pub fn budget(&self) -> f64 {
        self.budget_rate * self.horizon as f64
    }

    /// The value and price distributions, when both are i.i.d.
    pub fn iid_pair(&self) -> Option<(&DiscreteDistribution, &DiscreteDistribution)> {
        match (&self.values, &self.prices) {
            (ValueSource::Iid(f), PriceSource::Iid(g)) => Some((f, g)),
            _ => None,
        }
    }

    /// Same instance at another horizon. Only sources that do not store a
    /// sequence can be resized.
    pub fn with_horizon(&self, horizon: usize) -> Result<Self> {
        if horizon == self.horizon {
            return Ok(self.clone());
        }
        let resizable = matches!(self.values, ValueSource::Constant(_) | ValueSource::Iid(_))
            && !matches!(self.prices, PriceSource::Fixed(_));
        if !resizable {
            return Err(Error::InvalidInstance(format!(
                "instance `{}` stores explicit sequences and cannot change horizon",
                self.name
            )));
        }
        let out = Self {
            horizon,
            ..self.clone()
        };
        out.validate()?;
        Ok(out)
    }

    pub fn validate(&self) -> Result<()> {
        let vmax = self.value_ceiling;
        if !(vmax.is_finite() && vmax > 0.0) {
            return Err(Error::InvalidInstance(format!("value ceiling {vmax} must be positive")));
        }
        if !(self.budget_rate > 0.0 && self.budget_rate <= vmax) {
            return Err(Error::InvalidInstance(format!(
                "budget rate {} must lie in (0, {vmax}]",
                self.budget_rate
            )));
        }
        if self.horizon == 0 {
            return Err(Error::InvalidInstance("horizon must be >= 1".into()));
        }
        let in_range = |x: f64| x.is_finite() && (0.0..=vmax).contains(&x);
        if let Some(v) = self.values.all_values().find(|&v| !in_range(v)) {
            return Err(Error::InvalidInstance(format!("value {v} outside [0, {vmax}]")));
        }
        if let Some(p) = self.prices.all_prices().into_iter().find(|&p| !in_range(p)) {
            return Err(Error::InvalidInstance(format!("price {p} outside [0, {vmax}]")));
        }
        match &self.values {
            ValueSource::Fixed(vs) => check_len("value", vs.len(), self.horizon)?,
            ValueSource::Iid(f) if f.ceiling() > vmax => {
                return Err(Error::InvalidInstance("value distribution ceiling exceeds vmax".into()))
            }
            ValueSource::Mixture(c) => {
                if c.is_empty() {
                    return Err(Error::InvalidInstance("empty mixture".into()));
                }
                if c.iter().any(|(w, _)| w.is_nan() || *w < 0.0) {
                    return Err(Error::InvalidInstance("negative mixture weight".into()));
                }
                let total: f64 = c.iter().map(|(w, _)| w).sum();
                if (total - 1.0).abs() > 1e-12 {
                    return Err(Error::InvalidInstance(format!(
                        "mixture weights sum to {total}, not 1"
                    )));
                }
                for (_, vs) in c {
                    check_len("mixture component", vs.len(), self.horizon)?;
                }
            }
            _ => {}
        }
        if let PriceSource::Fixed(ps) = &self.prices {
            check_len("price", ps.len(), self.horizon)?;
        }
        Ok(())
    }

    /// Serializes to the text format read by [`Instance::from_text`].
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "name {}", self.name);
        let _ = writeln!(out, "horizon {}", self.horizon);
        let _ = writeln!(out, "rho {}", self.budget_rate);
        let _ = writeln!(out, "vmax {}", self.value_ceiling);
        let _ = writeln!(out, "mode {}", self.info_mode);
        match &self.values {
            ValueSource::Constant(v) => {
                let _ = writeln!(out, "values constant {v}");
            }
            ValueSource::Fixed(vs) => {
                out.push_str("values fixed\n");
                write_seq(&mut out, vs);
                out.push_str("end\n");
            }
            ValueSource::Iid(f) => {
                out.push_str("values iid\n");
                out.push_str(&f.to_text());
                out.push_str("end\n");
            }
            ValueSource::Mixture(c) => {
                out.push_str("values mixture\n");
                for (w, vs) in c {
                    let _ = writeln!(out, "component {w}");
                    write_seq(&mut out, vs);
                }
                out.push_str("end\n");
            }
        }
        match &self.prices {
            PriceSource::Constant(p) => {
                let _ = writeln!(out, "prices constant {p}");
            }
            PriceSource::Fixed(ps) => {
                out.push_str("prices fixed\n");
                write_seq(&mut out, ps);
                out.push_str("end\n");
            }
            PriceSource::Iid(g) => {
                out.push_str("prices iid\n");
                out.push_str(&g.to_text());
                out.push_str("end\n");
            }
            PriceSource::Decision {
                if_entered,
                if_skipped,
            } => {
                let _ = writeln!(out, "prices decision {if_entered} {if_skipped}");
            }
        }
        out
    }

    /// Parses the line-oriented instance format:
    ///
    /// ```text
    /// name thm1
    /// horizon 64
    /// rho 0.5
    /// vmax 1
    /// mode full            # optional, defaults to full
    /// values constant 1    # or: values iid / fixed / mixture ... end
    /// prices iid
    /// 0.3333333333333333 0.5
    /// 0.6666666666666666 0.5
    /// end
    /// ```
    ///
    /// Mixture blocks list `component <weight>` followed by that component's
    /// values, one per line. Adaptive prices are written
    /// `prices decision <if_entered> <if_skipped>`.
    pub fn from_text(text: &str) -> Result<Self> {
        let lines: Vec<(usize, &str)> = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty())
            .collect();
        let mut name = None;
        let mut horizon = None;
        let mut rho = None;
        let mut vmax = None;
        let mut mode = InfoMode::Full;
        let mut values_block: Option<SourceBlock<'_>> = None;
        let mut prices_block: Option<SourceBlock<'_>> = None;

        let mut i = 0;
        while i < lines.len() {
            let (lineno, line) = lines[i];
            let (key, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
            let rest = rest.trim();
            match key {
                "name" => name = Some(rest.to_string()),
                "horizon" => horizon = Some(parse_num::<usize>(rest, lineno)?),
                "rho" => rho = Some(parse_num::<f64>(rest, lineno)?),
                "vmax" => vmax = Some(parse_num::<f64>(rest, lineno)?),
                "mode" => {
                    mode = rest.parse().map_err(|_| Error::Parse {
                        line: lineno,
                        msg: format!("unknown mode `{rest}`"),
                    })?
                }
                "values" | "prices" => {
                    let kind = rest.split_whitespace().next().unwrap_or("");
                    let mut body = Vec::new();
                    if matches!(kind, "iid" | "fixed" | "mixture") {
                        i += 1;
                        loop {
                            let Some(&(ln, l)) = lines.get(i) else {
                                return Err(Error::Parse {
                                    line: lineno,
                                    msg: format!("`{key} {kind}` block is missing `end`"),
                                });
                            };
                            if l == "end" {
                                break;
                            }
                            body.push((ln, l));
                            i += 1;
                        }
                    }
                    let slot = if key == "values" {
                        &mut values_block
                    } else {
                        &mut prices_block
                    };
                    if slot.is_some() {
                        return Err(Error::Parse {
                            line: lineno,
                            msg: format!("duplicate `{key}` section"),
                        });
                    }
                    *slot = Some((lineno, rest.to_string(), body));
                }
                other => {
                    return Err(Error::Parse {
                        line: lineno,
                        msg: format!("unknown key `{other}`"),
                    })
                }
            }
            i += 1;
        }

        let missing = |what: &str| Error::Parse {
            line: 0,
            msg: format!("missing `{what}`"),
        };
        let horizon = horizon.ok_or_else(|| missing("horizon"))?;
        let budget_rate = rho.ok_or_else(|| missing("rho"))?;
        let value_ceiling = vmax.ok_or_else(|| missing("vmax"))?;
        let (vl, vhead, vbody) = values_block.ok_or_else(|| missing("values"))?;
        let (pl, phead, pbody) = prices_block.ok_or_else(|| missing("prices"))?;

        let values = match vhead.split_whitespace().collect::<Vec<_>>().as_slice() {
            ["constant", v] => ValueSource::Constant(parse_num(v, vl)?),
            ["fixed"] => ValueSource::Fixed(parse_seq(&vbody)?),
            ["iid"] => ValueSource::Iid(parse_dist(&vbody, value_ceiling)?),
            ["mixture"] => {
                let mut comps: Vec<(f64, Vec<f64>)> = Vec::new();
                for &(ln, l) in &vbody {
                    if let Some(w) = l.strip_prefix("component") {
                        comps.push((parse_num(w.trim(), ln)?, Vec::new()));
                    } else {
                        let comp = comps.last_mut().ok_or_else(|| Error::Parse {
                            line: ln,
                            msg: "value before the first `component`".into(),
                        })?;
                        comp.1.push(parse_num(l, ln)?);
                    }
                }
                ValueSource::Mixture(comps)
            }
            _ => {
                return Err(Error::Parse {
                    line: vl,
                    msg: format!("unknown value source `{vhead}`"),
                })
            }
        };
        let prices = match phead.split_whitespace().collect::<Vec<_>>().as_slice() {
            ["constant", p] => PriceSource::Constant(parse_num(p, pl)?),
            ["fixed"] => PriceSource::Fixed(parse_seq(&pbody)?),
            ["iid"] => PriceSource::Iid(parse_dist(&pbody, value_ceiling)?),
            ["decision", a, b] => PriceSource::Decision {
                if_entered: parse_num(a, pl)?,
                if_skipped: parse_num(b, pl)?,
            },
            _ => {
                return Err(Error::Parse {
                    line: pl,
                    msg: format!("unknown price source `{phead}`"),
                })
            }
        };
        let inst = Instance {
            name: name.unwrap_or_else(|| "unnamed".into()),
            horizon,
            budget_rate,
            value_ceiling,
            info_mode: mode,
            values,
            prices,
        };
        inst.validate()?;
        Ok(inst)
    }
}

/// A `values` or `prices` block: header line number, kind, and body lines.
type SourceBlock<'a> = (usize, String, Vec<(usize, &'a str)>);

fn write_seq(out: &mut String, xs: &[f64]) {
    for x in xs {
        let _ = writeln!(out, "{x}");
    }
}

fn parse_num<T: std::str::FromStr>(s: &str, line: usize) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    s.trim().parse::<T>().map_err(|e| Error::Parse {
        line,
        msg: format!("`{s}`: {e}"),
    })
}

fn parse_seq(body: &[(usize, &str)]) -> Result<Vec<f64>> {
    body.iter().map(|&(ln, l)| parse_num(l, ln)).collect()
}

fn parse_dist(body: &[(usize, &str)], ceiling: f64) -> Result<DiscreteDistribution> {
    let atoms = body
        .iter()
        .map(|&(ln, l)| parse_atom(l, ln))
        .collect::<Result<Vec<_>>>()?;
    DiscreteDistribution::new(atoms, ceiling)
}

// ---------------------------------------------------------------------------
// Generators

/// Truthful value 1 against prices uniform on {1/3, 2/3}, budget rate 1/2.
/// The horizon must be a multiple of 4.
pub fn make_thm1_instance(horizon: usize) -> Result<Instance> {
    if horizon == 0 || !horizon.is_multiple_of(4) {
        return Err(Error::InvalidArgument(format!(
            "horizon {horizon} must be a positive multiple of 4"
        )));
    }
    Ok(Instance {
        name: "thm1".into(),
        horizon,
        budget_rate: 0.5,
        value_ceiling: 1.0,
        info_mode: InfoMode::Full,
        values: ValueSource::Iid(DiscreteDistribution::point_mass(1.0, 1.0)?),
        prices: PriceSource::Iid(DiscreteDistribution::uniform(&[1.0 / 3.0, 2.0 / 3.0], 1.0)?),
    })
}

/// Parameters of the adversarial value mixture, exposed for inspection.
#[derive(Debug, Clone, PartialEq)]
pub struct Thm2Layout {
    pub batches: usize,
    pub batch_len: usize,
    pub epsilon: f64,
    pub price: f64,
    /// Batch values `v_1 < ... < v_m`.
    pub levels: Vec<f64>,
    /// Mixture weights `q_1, ..., q_m`.
    pub weights: Vec<f64>,
}

pub fn thm2_layout(rho: f64, vmax: f64, delta: f64, horizon: usize) -> Result<Thm2Layout> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidArgument(format!("delta {delta} must lie in (0, 1)")));
    }
    if !(vmax > 0.0 && rho > 0.0 && rho <= vmax) {
        return Err(Error::InvalidArgument(format!("need 0 < rho <= vmax, got rho={rho}, vmax={vmax}")));
    }
    if (horizon as f64) < vmax / rho {
        return Err(Error::InvalidArgument(format!(
            "horizon {horizon} is below vmax/rho = {}",
            vmax / rho
        )));
    }
    let m = (vmax / rho).ceil() as usize + 1;
    let eps = delta / (4.0 - 2.0 * delta);
    let price = vmax / (1.0 + eps);
    let batch_len = horizon / m;
    if price * batch_len as f64 > rho * horizon as f64 {
        return Err(Error::InvalidInstance(format!(
            "one batch at price {price} costs more than the budget {}",
            rho * horizon as f64
        )));
    }
    let levels = (1..=m)
        .map(|j| (price * (1.0 + eps.powi((m + 1 - j) as i32))).min(vmax))
        .collect();
    let weights = (1..=m)
        .map(|i| {
            if i == 1 {
                eps.powi((m - 1) as i32)
            } else {
                eps.powi((m - i) as i32) - eps.powi((m - i + 1) as i32)
            }
        })
        .collect();
    Ok(Thm2Layout {
        batches: m,
        batch_len,
        epsilon: eps,
        price,
        levels,
        weights,
    })
}

/// Fixed price `vmax/(1+eps)` and a mixture of `m` value sequences. Sequence
/// `i` climbs through batch values `v_1, ..., v_{m+1-i}` and then sits at the
/// price (zero surplus) for the rest of the horizon.
pub fn make_thm2_instance(rho: f64, vmax: f64, delta: f64, horizon: usize) -> Result<Instance> {
    let layout = thm2_layout(rho, vmax, delta, horizon)?;
    let m = layout.batches;
    let components = (1..=m)
        .map(|i| {
            let mut seq = vec![layout.price; horizon];
            for j in 0..(m + 1 - i) {
                seq[j * layout.batch_len..(j + 1) * layout.batch_len].fill(layout.levels[j]);
            }
            (layout.weights[i - 1], seq)
        })
        .collect();
    let inst = Instance {
        name: "thm2".into(),
        horizon,
        budget_rate: rho,
        value_ceiling: vmax,
        info_mode: InfoMode::Full,
        values: ValueSource::Mixture(components),
        prices: PriceSource::Constant(layout.price),
    };
    inst.validate()?;
    Ok(inst)
}

/// Value 2/3 every round, budget rate 1/3, and a price that answers entry
/// with `2/3 - eps` and abstention with `eps`, where `eps = mu / (3 mu + 6)`.
pub fn make_thm3_adversary(mu: f64, horizon: usize) -> Result<Instance> {
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(Error::InvalidArgument(format!("mu {mu} must be positive")));
    }
    let eps = mu / (3.0 * mu + 6.0);
    let inst = Instance {
        name: "thm3".into(),
        horizon,
        budget_rate: 1.0 / 3.0,
        value_ceiling: 1.0,
        info_mode: InfoMode::Full,
        values: ValueSource::Constant(2.0 / 3.0),
        prices: PriceSource::Decision {
            if_entered: 2.0 / 3.0 - eps,
            if_skipped: eps,
        },
    };
    inst.validate()?;
    Ok(inst)
}

/// Values uniform on {0.4, 1.0}, prices uniform on {0.3, 0.9}, budget rate
/// 0.15. Shading beats throttling here by 0.10 per round.
pub fn make_gap_instance(horizon: usize) -> Result<Instance> {
    let inst = Instance {
        name: "gap".into(),
        horizon,
        budget_rate: 0.15,
        value_ceiling: 1.0,
        info_mode: InfoMode::Full,
        values: ValueSource::Iid(DiscreteDistribution::uniform(&[0.4, 1.0], 1.0)?),
        prices: PriceSource::Iid(DiscreteDistribution::uniform(&[0.3, 0.9], 1.0)?),
    };
    inst.validate()?;
    Ok(inst)
}

/// Same values as [`make_gap_instance`] against the single price 0.3 and
/// budget rate 0.10. With one price, shading and throttling coincide.
pub fn make_singleton_instance(horizon: usize) -> Result<Instance> {
    let inst = Instance {
        name: "singleton".into(),
        horizon,
        budget_rate: 0.10,
        value_ceiling: 1.0,
        info_mode: InfoMode::Full,
        values: ValueSource::Iid(DiscreteDistribution::uniform(&[0.4, 1.0], 1.0)?),
        prices: PriceSource::Iid(DiscreteDistribution::point_mass(0.3, 1.0)?),
    };
    inst.validate()?;
    Ok(inst)
}

/// Random i.i.d. instance with `vmax = 1`: distinct atoms drawn from the grid
/// `k / 120`, weights uniform and normalized.
pub fn make_random_instance(
    seed: u64,
    value_support: usize,
    price_support: usize,
    rho: f64,
    horizon: usize,
) -> Result<Instance> {
    if value_support == 0 || price_support == 0 {
        return Err(Error::InvalidArgument("support sizes must be >= 1".into()));
    }
    let n = GRID_DENOMINATOR as usize;
    if value_support > n + 1 || price_support > n + 1 {
        return Err(Error::InvalidArgument(format!("support sizes must be <= {}", n + 1)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = |k: usize| -> Result<DiscreteDistribution> {
        let idx = rand::seq::index::sample(&mut rng, n + 1, k);
        let raw: Vec<f64> = (0..k).map(|_| rng.gen_range(0.05..1.0)).collect();
        let total: f64 = raw.iter().sum();
        let mut weights: Vec<f64> = raw.iter().map(|w| w / total).collect();
        let head: f64 = weights[..k - 1].iter().sum();
        weights[k - 1] = 1.0 - head;
        DiscreteDistribution::new(
            idx.iter()
                .map(|i| i as f64 / n as f64)
                .zip(weights),
            1.0,
        )
    };
    let f = draw(value_support)?;
    let g = draw(price_support)?;
    let inst = Instance {
        name: format!("random-{seed}"),
        horizon,
        budget_rate: rho,
        value_ceiling: 1.0,
        info_mode: InfoMode::Full,
        values: ValueSource::Iid(f),
        prices: PriceSource::Iid(g),
    };
    inst.validate()?;
    Ok(inst)
}

/// Builds a named generator: `thm1`, `thm2`, `thm3`, `gap`, `singleton` or
/// `random`. Missing parameters take the defaults used throughout the tests.
pub fn make_named_instance(
    kind: &str,
    horizon: usize,
    param: &dyn Fn(&str) -> Option<f64>,
) -> Result<Instance> {
    match kind {
        "thm1" => make_thm1_instance(horizon),
        "thm2" => make_thm2_instance(
            param("rho").unwrap_or(0.5),
            param("vmax").unwrap_or(1.0),
            param("delta").unwrap_or(0.5),
            horizon,
        ),
        "thm3" => make_thm3_adversary(param("mu").unwrap_or(1.0), horizon),
        "gap" => make_gap_instance(horizon),
        "singleton" => make_singleton_instance(horizon),
        "random" => make_random_instance(
            param("seed").unwrap_or(0.0) as u64,
            param("value_support").unwrap_or(3.0) as usize,
            param("price_support").unwrap_or(3.0) as usize,
            param("rho").unwrap_or(0.25),
            horizon,
        ),
        other => Err(Error::InvalidArgument(format!("unknown instance kind `{other}`"))),
    }
}
