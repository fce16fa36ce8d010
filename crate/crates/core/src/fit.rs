//! Log-linear fitting helpers.
//!
//! Rates are fitted by ordinary least squares; constants are then chosen as
//! the smallest value that dominates every sample, so the resulting bound is
//! an upper envelope rather than a central fit.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub samples: usize,
}

/// Ordinary least squares `y ≈ slope·x + intercept`. Needs two distinct abscissae.
pub fn fit_line(points: &[(f64, f64)]) -> Option<LinearFit> {
    let pts: Vec<(f64, f64)> = points.iter().copied().filter(|(x, y)| x.is_finite() && y.is_finite()).collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    Some(LinearFit { slope, intercept: my - slope * mx, samples: pts.len() })
}

/// Smallest `log C` with `y ≤ log C + slope·x` for every sample.
pub fn envelope_log_constant(points: &[(f64, f64)], slope: f64) -> f64 {
    points
        .iter()
        .filter(|(x, y)| x.is_finite() && y.is_finite())
        .map(|(x, y)| y - slope * x)
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Exponential upper envelope `value(t) ≤ C·e^{rate·t}` for `t ≥ 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpEnvelope {
    pub rate: f64,
    pub constant: f64,
}

/// Fits `(t, log value)` samples with a nonnegative rate taken from the
/// least-squares slope over the upper half of the `t` range (the asymptotic
/// regime), then lifts the constant until every sample is dominated. The
/// constant is never below one, since every caller has `value(0) = 1`.
pub fn exp_envelope(log_samples: &[(f64, f64)]) -> ExpEnvelope {
    let t_max = log_samples.iter().map(|p| p.0).fold(0.0, f64::max);
    let tail: Vec<(f64, f64)> = log_samples.iter().copied().filter(|p| p.0 >= t_max / 2.0).collect();
    let rate = fit_line(&tail).map(|f| f.slope).unwrap_or(0.0).max(0.0);
    let log_c = envelope_log_constant(log_samples, rate).max(0.0);
    ExpEnvelope { rate, constant: log_c.exp() }
}

/// Keeps the largest `y` per distinct `x`, sorted by `x`.
pub fn max_per_abscissa(points: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut sorted: Vec<(f64, f64)> = points.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out: Vec<(f64, f64)> = Vec::new();
    for (x, y) in sorted {
        match out.last_mut() {
            Some(last) if last.0 == x => last.1 = last.1.max(y),
            _ => out.push((x, y)),
        }
    }
    out
}

/// Upper envelope `value ≤ constant·distance^exponent` of positive samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLaw {
    pub exponent: f64,
    pub constant: f64,
    pub samples: usize,
}

/// Log-log least-squares exponent with the constant lifted to dominate every
/// sample. Samples with a nonpositive coordinate are dropped.
pub fn power_law_envelope(points: &[(f64, f64)]) -> Option<PowerLaw> {
    let logs: Vec<(f64, f64)> = points.iter().filter(|(d, v)| *d > 0.0 && *v > 0.0).map(|(d, v)| (d.ln(), v.ln())).collect();
    let fit = fit_line(&logs)?;
    let constant = envelope_log_constant(&logs, fit.slope).exp();
    Some(PowerLaw { exponent: fit.slope, constant, samples: fit.samples })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line_is_recovered() {
        let pts: Vec<(f64, f64)> = (0..10).map(|i| (i as f64, 2.0 - 0.5 * i as f64)).collect();
        let f = fit_line(&pts).unwrap();
        assert!((f.slope + 0.5).abs() < 1e-12);
        assert!((f.intercept - 2.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_inputs_have_no_fit() {
        assert!(fit_line(&[(1.0, 1.0)]).is_none());
        assert!(fit_line(&[(1.0, 1.0), (1.0, 2.0)]).is_none());
    }

    #[test]
    fn envelope_dominates_every_sample() {
        let pts: Vec<(f64, f64)> = (0..20).map(|i| (i as f64, 0.1 * i as f64 + ((i % 3) as f64) * 0.2)).collect();
        let env = exp_envelope(&pts);
        for (t, y) in pts {
            assert!(y <= env.constant.ln() + env.rate * t + 1e-12);
        }
    }

    #[test]
    fn decaying_samples_give_zero_rate() {
        let pts: Vec<(f64, f64)> = (0..10).map(|i| (i as f64, -(i as f64))).collect();
        let env = exp_envelope(&pts);
        assert_eq!(env.rate, 0.0);
        assert_eq!(env.constant, 1.0);
    }

    #[test]
    fn power_law_is_recovered() {
        let pts: Vec<(f64, f64)> = (1..12).map(|n| {
            let d = 0.5f64.powi(n);
            (d, 3.0 * d.powf(0.7))
        }).collect();
        let p = power_law_envelope(&pts).unwrap();
        assert!((p.exponent - 0.7).abs() < 1e-12);
        assert!((p.constant - 3.0).abs() < 1e-10);
        assert!(power_law_envelope(&[(0.1, 0.0), (0.2, 0.0)]).is_none());
    }
}
