//! Summary statistics, log-log slope fits and competitive-ratio cells.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Mean and standard error of the mean (zero for a single sample).
pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    /// 95% residual-bootstrap interval for the slope.
    pub ci: (f64, f64),
    /// Points dropped because their regret was not positive.
    pub excluded: usize,
    pub points_used: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum FitError {
    TooFewPoints { usable: usize, excluded: usize },
}

impl std::fmt::Display for FitError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FitError::TooFewPoints { usable, excluded } => write!(
                f,
                "need at least 4 positive points for a slope fit, have {usable} ({excluded} excluded)"
            ),
        }
    }
}

impl std::error::Error for FitError {}

fn ols(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

pub const BOOTSTRAP_RESAMPLES: usize = 1000;

/// Least squares of `ln regret` on `ln T` with a residual-bootstrap interval.
pub fn fit_slope(points: &[(f64, f64)], seed: u64) -> Result<SlopeFit, FitError> {
    let usable: Vec<(f64, f64)> = points
        .iter()
        .copied()
        .filter(|&(t, r)| t > 0.0 && r > 0.0 && r.is_finite())
        .collect();
    let excluded = points.len() - usable.len();
    if usable.len() < 4 {
        return Err(FitError::TooFewPoints {
            usable: usable.len(),
            excluded,
        });
    }
    let x: Vec<f64> = usable.iter().map(|p| p.0.ln()).collect();
    let y: Vec<f64> = usable.iter().map(|p| p.1.ln()).collect();
    let (slope, intercept) = ols(&x, &y);
    let fitted: Vec<f64> = x.iter().map(|xi| intercept + slope * xi).collect();
    let resid: Vec<f64> = y.iter().zip(&fitted).map(|(a, b)| a - b).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut slopes: Vec<f64> = (0..BOOTSTRAP_RESAMPLES)
        .map(|_| {
            let ys: Vec<f64> = fitted
                .iter()
                .map(|f| f + resid[rng.gen_range(0..resid.len())])
                .collect();
            ols(&x, &ys).0
        })
        .collect();
    slopes.sort_by(f64::total_cmp);
    let pick = |q: f64| slopes[((q * (slopes.len() - 1) as f64).round() as usize).min(slopes.len() - 1)];
    Ok(SlopeFit {
        slope,
        intercept,
        ci: (pick(0.025), pick(0.975)),
        excluded,
        points_used: usable.len(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RatioStats {
    /// Mean of `R / R^H` over episodes with `R^H > 0`.
    pub mean_ratio: Option<f64>,
    /// Episodes skipped in the ratio because `R^H = 0`.
    pub zero_hindsight: usize,
    /// Mean of `(R - mu R^H) / T` over all episodes.
    pub mean_gap: f64,
    pub se_gap: f64,
}

pub fn competitive_ratio_cell(rewards: &[f64], hindsight: &[f64], horizon: usize, mu: f64) -> RatioStats {
    assert_eq!(rewards.len(), hindsight.len(), "paired samples required");
    let ratios: Vec<f64> = rewards
        .iter()
        .zip(hindsight)
        .filter(|(_, &h)| h > 0.0)
        .map(|(r, h)| r / h)
        .collect();
    let gaps: Vec<f64> = rewards
        .iter()
        .zip(hindsight)
        .map(|(r, h)| (r - mu * h) / horizon as f64)
        .collect();
    let (mean_gap, se_gap) = mean_se(&gaps);
    RatioStats {
        mean_ratio: (!ratios.is_empty()).then(|| mean_se(&ratios).0),
        zero_hindsight: rewards.len() - ratios.len(),
        mean_gap,
        se_gap,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn horizons() -> Vec<f64> {
        (10..=16).map(|k| (1u64 << k) as f64).collect()
    }

    #[test]
    fn exact_power_laws() {
        let sqrt: Vec<(f64, f64)> = horizons().into_iter().map(|t| (t, t.sqrt())).collect();
        let fit = fit_slope(&sqrt, 1).unwrap();
        assert!((fit.slope - 0.5).abs() < 1e-9);
        assert!((fit.ci.0 - 0.5).abs() < 1e-9 && (fit.ci.1 - 0.5).abs() < 1e-9);
        let lin: Vec<(f64, f64)> = horizons().into_iter().map(|t| (t, t)).collect();
        assert!((fit_slope(&lin, 1).unwrap().slope - 1.0).abs() < 1e-9);
    }

    #[test]
    fn sqrt_t_log_t_slope() {
        let pts: Vec<(f64, f64)> = horizons().into_iter().map(|t| (t, (t * t.ln()).sqrt())).collect();
        let fit = fit_slope(&pts, 1).unwrap();
        assert!((0.52..=0.58).contains(&fit.slope), "{}", fit.slope);
        assert!(fit.ci.0 <= fit.slope && fit.slope <= fit.ci.1);
    }

    #[test]
    fn nonpositive_points_are_excluded() {
        let mut pts: Vec<(f64, f64)> = horizons().into_iter().map(|t| (t, t.sqrt())).collect();
        pts[0].1 = 0.0;
        pts[1].1 = -3.0;
        let fit = fit_slope(&pts, 1).unwrap();
        assert_eq!((fit.excluded, fit.points_used), (2, 5));
        pts[2].1 = 0.0;
        pts[3].1 = 0.0;
        assert!(matches!(fit_slope(&pts, 1), Err(FitError::TooFewPoints { usable: 3, excluded: 4 })));
    }

    #[test]
    fn ratio_cell() {
        let r = [2.0, 3.0, 0.0];
        let s = competitive_ratio_cell(&r, &r, 10, 0.5);
        assert_eq!(s.mean_ratio, Some(1.0));
        assert_eq!(s.zero_hindsight, 1);
        assert!((s.mean_gap - 0.5 * (5.0 / 3.0) / 10.0).abs() < 1e-15);
    }

    #[test]
    fn mean_se_basics() {
        let (m, se) = mean_se(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        assert!((se - (5.0f64 / 3.0 / 4.0).sqrt()).abs() < 1e-15);
        assert_eq!(mean_se(&[7.0]), (7.0, 0.0));
    }
}
