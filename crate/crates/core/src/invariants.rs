//! Path-wise checks on recorded OGD-CB trajectories.

use crate::model::{InfoMode, Trajectory};

const TOL: f64 = 1e-9;

/// Guaranteed entering rate under partial feedback:
/// `min{(rho/vmax)^2 / 2, (sqrt 2 / 4) (rho/vmax)}`.
pub fn entering_constant(rho: f64, vmax: f64) -> f64 {
    let r = rho / vmax;
    (0.5 * r * r).min(std::f64::consts::SQRT_2 / 4.0 * r)
}

/// Number of observed prices before each round, `|I_t|` for `t = 1..=T`.
pub fn observed_counts(trajectory: &Trajectory, mode: InfoMode) -> Vec<usize> {
    let mut seen = 0;
    trajectory
        .rounds
        .iter()
        .map(|r| {
            let before = seen;
            if mode == InfoMode::Full || r.decision {
                seen += 1;
            }
            before
        })
        .collect()
}

/// `min_{2 <= t <= T0} |I_t| / (t - 1)` over the rounds the strategy was
/// active in. `None` when fewer than two rounds were active.
pub fn min_entering_ratio(trajectory: &Trajectory, mode: InfoMode) -> Option<f64> {
    let counts = observed_counts(trajectory, mode);
    (2..=trajectory.active_rounds())
        .map(|t| counts[t - 1] as f64 / (t - 1) as f64)
        .min_by(f64::total_cmp)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub check: &'static str,
    pub round: usize,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct OgdReport {
    pub violations: Vec<Violation>,
    /// Slack of the path-wise OGD inequality at `lambda = 0` and at
    /// `lambda = vmax/rho - 1`; both must be non-negative.
    pub ogd_slack: [f64; 2],
    pub min_entering_ratio: Option<f64>,
}

impl OgdReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks an OGD-CB trajectory against four properties:
///
/// * every dual iterate lies in `[0, vmax/rho - 1]`;
/// * total spend never exceeds `rho * T`;
/// * under partial feedback `|I_t| >= C_e (t - 1)` for every active `t >= 2`;
/// * `sum lambda_t g_t >= lambda sum g_t - (D^2 / eta_{T0} + vmax^2 sum eta_t)`
///   over `t = 2..=T0`, with `g_t = x_t c~_t - rho` and `D = vmax/rho - 1`,
///   at both ends of the dual range.
pub fn check_ogd_trajectory(trajectory: &Trajectory, rho: f64, vmax: f64, mode: InfoMode) -> OgdReport {
    let mut violations = Vec::new();
    let cap = vmax / rho - 1.0;

    for (i, &lam) in trajectory.dual_path.iter().enumerate() {
        if !(lam >= -TOL && lam <= cap + TOL) {
            violations.push(Violation {
                check: "dual-range",
                round: i + 1,
                detail: format!("lambda = {lam} outside [0, {cap}]"),
            });
        }
    }

    if trajectory.total_cost > trajectory.budget + TOL {
        violations.push(Violation {
            check: "budget",
            round: trajectory.horizon(),
            detail: format!("spent {} of {}", trajectory.total_cost, trajectory.budget),
        });
    }

    let t0 = trajectory.active_rounds();
    if mode == InfoMode::Partial {
        let ce = entering_constant(rho, vmax);
        let counts = observed_counts(trajectory, mode);
        for t in 2..=t0 {
            if (counts[t - 1] as f64) < ce * (t - 1) as f64 - TOL {
                violations.push(Violation {
                    check: "entering-frequency",
                    round: t,
                    detail: format!("|I_t| = {} < {ce} * {}", counts[t - 1], t - 1),
                });
                break;
            }
        }
    }

    let (mut weighted, mut plain, mut eta_sum) = (0.0, 0.0, 0.0);
    let mut last_eta = None;
    for t in 2..=t0 {
        let Some(rec) = trajectory.estimates[t - 1] else {
            continue;
        };
        let x = if trajectory.rounds[t - 1].decision { 1.0 } else { 0.0 };
        let g = x * rec.cost_estimate - rho;
        weighted += rec.lambda * g;
        plain += g;
        eta_sum += rec.step_size;
        last_eta = Some(rec.step_size);
    }
    let mut ogd_slack = [0.0; 2];
    if let Some(eta) = last_eta {
        let penalty = cap * cap / eta + vmax * vmax * eta_sum;
        for (slot, lam) in ogd_slack.iter_mut().zip([0.0, cap]) {
            *slot = weighted - (lam * plain - penalty);
            if *slot < -TOL {
                violations.push(Violation {
                    check: "ogd-inequality",
                    round: t0,
                    detail: format!("slack {slot} at lambda = {lam}"),
                });
            }
        }
    }

    OgdReport {
        violations,
        ogd_slack,
        min_entering_ratio: min_entering_ratio(trajectory, mode),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn entering_constant_branches() {
        assert!((entering_constant(0.5, 1.0) - 0.125).abs() < 1e-15);
        assert!((entering_constant(1.0, 1.0) - std::f64::consts::SQRT_2 / 4.0).abs() < 1e-15);
    }
}
