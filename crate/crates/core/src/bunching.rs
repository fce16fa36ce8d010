//! Fiber-bunching certification and adapted norms.
//!
//! A cocycle is fiber-bunched when the normalized distortion
//! `‖α^{−n}(A^n(x))‖·‖α^{−n}(A^n(x)⁻¹)‖` grows at most like `C_θ e^{θ|n|}`,
//! the automorphism grows like `C_ρ e^{ρ|n|}`, and `kρ + 2θ < νλ` with
//! `k = 5` (or `k = 7` for the conjugated variant).

use serde::{Deserialize, Serialize};

use crate::cocycle::TwistedCocycle;
use crate::dynamics::HyperbolicSystem;
use crate::error::{Error, Result};
use crate::fit::{exp_envelope, max_per_abscissa};
use crate::linalg::{self, Matrix, Vector};
use crate::twisting::GrowthCertificate;

/// Relative tail allowed when truncating the adapted-norm series.
pub const SERIES_TAIL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strictness {
    FiveTwo,
    SevenTwo,
}

impl Strictness {
    pub fn coefficient(self) -> f64 {
        match self {
            Strictness::FiveTwo => 5.0,
            Strictness::SevenTwo => 7.0,
        }
    }
}

/// Upper envelope `cond(α^{−n}(A^n(x))) ≤ c_theta·e^{theta|n|}` over a sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThetaEstimate {
    pub theta: f64,
    pub c_theta: f64,
    pub n_max: usize,
    pub points: usize,
}

impl ThetaEstimate {
    pub fn exact(theta: f64, c_theta: f64) -> Self {
        ThetaEstimate { theta, c_theta, n_max: 0, points: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiberBunchingReport {
    pub theta: f64,
    pub c_theta: f64,
    pub rho: f64,
    pub c_rho: f64,
    pub nu: f64,
    pub lambda: f64,
    pub strictness: Strictness,
    /// `νλ − kρ − 2θ`.
    pub margin: f64,
    /// Half the margin when positive, zero otherwise.
    pub delta: f64,
    /// `margin − δ`, what remains after spending δ.
    pub slack: f64,
    pub growth_certified: bool,
    pub satisfied: bool,
    pub n_max: usize,
    pub sample_points: usize,
}

impl FiberBunchingReport {
    /// Certified per-step ratio `e^{5ρ+2θ+δ−νλ}` of holonomy increments.
    pub fn holonomy_rate(&self) -> f64 {
        5.0 * self.rho + 2.0 * self.theta + self.delta - self.nu * self.lambda
    }

    pub fn require_satisfied(&self) -> Result<&Self> {
        if !self.growth_certified {
            return Err(Error::NotCertifiable("automorphism growth constants are empirical".into()));
        }
        if !self.satisfied {
            return Err(Error::NotFiberBunched { margin: self.margin });
        }
        Ok(self)
    }
}

/// Fits `θ` from the normalized distortion over `|n| ≤ n_max` at every
/// sample point, taking the largest value per `|n|`.
pub fn estimate_theta<S: HyperbolicSystem>(c: &TwistedCocycle<S>, sample: &[S::Point], n_max: usize) -> Result<ThetaEstimate> {
    if sample.is_empty() {
        return Err(Error::ConfigInvalid("theta estimation needs at least one point".into()));
    }
    if n_max < 8 {
        return Err(Error::ConfigInvalid(format!("theta estimation needs n_max ≥ 8, got {n_max}")));
    }
    let d = c.dim();
    let mut samples = Vec::with_capacity(sample.len() * (2 * n_max + 1));
    for x in sample {
        let (mut y, mut u) = (linalg::identity(d), linalg::identity(d));
        samples.push((0.0, 0.0));
        for n in 0..n_max {
            y = c.stable_factor(x, n)? * y;
            u = c.unstable_factor(x, n)? * u;
            let t = (n + 1) as f64;
            samples.push((t, linalg::condition(&y).ln()));
            samples.push((t, linalg::condition(&u).ln()));
        }
    }
    let env = exp_envelope(&max_per_abscissa(&samples));
    Ok(ThetaEstimate { theta: env.rate, c_theta: env.constant, n_max, points: sample.len() })
}

/// Combines distortion, automorphism growth and Hölder data into a verdict.
pub fn certify(theta: &ThetaEstimate, growth: &GrowthCertificate, nu: f64, lambda: f64, strictness: Strictness) -> FiberBunchingReport {
    let margin = nu * lambda - strictness.coefficient() * growth.rho - 2.0 * theta.theta;
    let satisfied = margin > 0.0 && growth.certifiable;
    let delta = if margin > 0.0 { margin / 2.0 } else { 0.0 };
    FiberBunchingReport {
        theta: theta.theta,
        c_theta: theta.c_theta,
        rho: growth.rho,
        c_rho: growth.c_growth.max(growth.c_lip),
        nu,
        lambda,
        strictness,
        margin,
        delta,
        slack: margin - delta,
        growth_certified: growth.certifiable,
        satisfied,
        n_max: theta.n_max.max(growth.n_max),
        sample_points: theta.points,
    }
}

/// Convenience wrapper: `θ` from `sample`, growth certificate supplied.
pub fn assess<S: HyperbolicSystem>(
    c: &TwistedCocycle<S>,
    sample: &[S::Point],
    n_max: usize,
    growth: &GrowthCertificate,
    strictness: Strictness,
) -> Result<FiberBunchingReport> {
    let theta = estimate_theta(c, sample, n_max)?;
    Ok(certify(&theta, growth, c.holder().nu, c.base().lambda(), strictness))
}

/// Gram representation of the norms `‖·‖_k`, `0 ≤ k ≤ depth`, along the
/// forward orbit of an anchor.
#[derive(Debug, Clone)]
pub struct AdaptedNormFamily {
    pub anchor: String,
    pub depth: usize,
    pub cutoff: usize,
    pub theta: f64,
    pub delta: f64,
    pub rho: f64,
    /// `2θ + δ`.
    pub exponent: f64,
    /// `‖v‖_k ≤ sandwich_constant·e^{2ρk}‖v‖`.
    pub sandwich_constant: f64,
    pub tail_bounds: Vec<f64>,
    pub grams: Vec<Matrix>,
    factors: Vec<Matrix>,
    pub reference: Vec<Vector>,
    /// `L_k = α^{−k}(A(f^{k−1}x))` for `k ≥ 1`; index 0 is unused.
    pub steps: Vec<Matrix>,
}

/// Relative tail of the series after `|m| ≤ cutoff`, at index `k`.
pub fn series_tail(report: &FiberBunchingReport, k: usize, cutoff: usize) -> f64 {
    let delta = report.delta;
    2.0 * report.c_rho.powi(4) * report.c_theta.powi(2) * (4.0 * report.rho * k as f64).exp() * (-delta * (cutoff + 1) as f64).exp()
        / (1.0 - (-delta).exp())
}

/// Smallest cutoff whose tail at `k = depth` is below [`SERIES_TAIL`].
pub fn required_cutoff(report: &FiberBunchingReport, depth: usize) -> Option<usize> {
    if report.delta <= 0.0 {
        return None;
    }
    (0..100_000).find(|&m| series_tail(report, depth, m) <= SERIES_TAIL)
}

impl AdaptedNormFamily {
    /// Builds `‖v‖_k² = Σ_{|m| ≤ M} ‖T_{k,m}v‖² / (‖T_{k,m}u_k‖² e^{(2θ+δ)|m|})`
    /// with `T_{k,m} = α^{−m−k}(A^m(f^k x))`.
    pub fn build<S: HyperbolicSystem>(
        c: &TwistedCocycle<S>,
        x: &S::Point,
        depth: usize,
        report: &FiberBunchingReport,
        cutoff: Option<usize>,
    ) -> Result<Self> {
        report.require_satisfied()?;
        let cutoff = match cutoff {
            Some(m) => m,
            None => required_cutoff(report, depth).ok_or(Error::NotFiberBunched { margin: report.margin })?,
        };
        let tail_bounds: Vec<f64> = (0..=depth).map(|k| series_tail(report, k, cutoff)).collect();
        if let Some(&tail) = tail_bounds.iter().find(|&&t| t > SERIES_TAIL) {
            return Err(Error::TailTooLarge { tail, cutoff });
        }
        let d = c.dim();
        let sys = c.base();
        let alpha = c.alpha();
        let exponent = 2.0 * report.theta + report.delta;

        let mut steps = vec![linalg::identity(d)];
        let mut reference = vec![Vector::from_fn(d, |i, _| if i == 0 { 1.0 } else { 0.0 })];
        for k in 1..=depth {
            let l = c.stable_factor(x, k - 1)?;
            let u = &l * &reference[k - 1];
            reference.push(&u / u.norm());
            steps.push(l);
        }

        let mut grams = Vec::with_capacity(depth + 1);
        let mut factors = Vec::with_capacity(depth + 1);
        let m_max = cutoff as i64;
        for k in 0..=depth {
            let ki = k as i64;
            let fk = sys.iterate(x, ki);
            let u = &reference[k];
            let mut g = Matrix::zeros(d, d);
            let mut add = |t: &Matrix, m: i64| {
                let tu = (t * u).norm_squared();
                g += t.transpose() * t / (tu * (exponent * m.unsigned_abs() as f64).exp());
            };
            // m = 0: T = α^{−k}(I) = I.
            let mut t = linalg::identity(d);
            add(&t, 0);
            for m in 1..=m_max {
                t = alpha.apply(-m - ki, &c.generator(&sys.iterate(&fk, m - 1))?)? * t;
                add(&t, m);
            }
            let mut t = linalg::identity(d);
            for j in 0..m_max {
                // T_{k,−j−1} = α^{j−k}(A(f^{k−j−1}x)⁻¹)·T_{k,−j}.
                let a = linalg::invert(&c.generator(&sys.iterate(&fk, -j - 1))?)?;
                t = alpha.apply(j - ki, &a)? * t;
                add(&t, -j - 1);
            }
            let r = linalg::gram_factor(&g).ok_or_else(|| Error::SolveFailure(format!("Gram matrix {k} is not positive definite")))?;
            grams.push(g);
            factors.push(r);
        }
        let sandwich_constant =
            report.c_rho.powi(2) * report.c_theta * (1.0 / (report.delta / 2.0).tanh()).sqrt();
        Ok(AdaptedNormFamily {
            anchor: sys.describe(x),
            depth,
            cutoff,
            theta: report.theta,
            delta: report.delta,
            rho: report.rho,
            exponent,
            sandwich_constant,
            tail_bounds,
            grams,
            factors,
            reference,
            steps,
        })
    }

    /// `‖v‖_k`.
    pub fn norm(&self, k: usize, v: &Vector) -> f64 {
        (&self.factors[k] * v).norm()
    }

    /// `C·e^{2ρk}`.
    pub fn sandwich_bound(&self, k: usize) -> f64 {
        self.sandwich_constant * (2.0 * self.rho * k as f64).exp()
    }

    /// `‖L_k‖_{k−1→k}·‖L_k⁻¹‖_{k→k−1}`, the condition number of
    /// `R_k·L_k·R_{k−1}⁻¹` with `G_k = R_kᵀR_k`.
    pub fn knorm_step_check(&self, k: usize) -> Result<f64> {
        if k == 0 || k > self.depth {
            return Err(Error::ConfigInvalid(format!("step index {k} outside 1..={}", self.depth)));
        }
        let prev = linalg::invert(&self.factors[k - 1])?;
        Ok(linalg::condition(&(&self.factors[k] * &self.steps[k] * prev)))
    }

    /// `e^{2θ+δ}`.
    pub fn step_bound(&self) -> f64 {
        self.exponent.exp()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PairKind {
    /// `y ∈ W^s_ε(x)`.
    LocalStable,
    /// `d(f^j x, f^j y) ≤ constant·e^{−γj}·d(x, y)` for the checked range.
    Contracting { gamma: f64, constant: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StableGrowthCheck {
    /// `max_n ‖α^{−n}(A^n(y))‖·‖α^{−n}(A^n(x)⁻¹)‖·e^{−(4ρ+2θ+δ)n}`.
    pub constant: f64,
    pub worst_n: usize,
    pub values: Vec<f64>,
}

/// Normalized mixed product along a stable (or contracting) pair.
pub fn stable_growth_check<S: HyperbolicSystem>(
    c: &TwistedCocycle<S>,
    x: &S::Point,
    y: &S::Point,
    n_max: usize,
    report: &FiberBunchingReport,
    kind: PairKind,
) -> Result<StableGrowthCheck> {
    let sys = c.base();
    match kind {
        PairKind::LocalStable => {
            if sys.stable_entry(x, y, 0) != Some(0) {
                return Err(Error::NotStablePair { side: "stable" });
            }
        }
        PairKind::Contracting { gamma, constant } => {
            let slack = report.nu * gamma - 4.0 * report.rho - report.delta;
            if slack <= 0.0 {
                return Err(Error::NotFiberBunched { margin: slack });
            }
            let d0 = sys.distance(x, y);
            for j in 0..=n_max {
                let dj = sys.distance(&sys.iterate(x, j as i64), &sys.iterate(y, j as i64));
                if dj > constant * (-gamma * j as f64).exp() * d0 * (1.0 + 1e-9) {
                    return Err(Error::NotStablePair { side: "contracting" });
                }
            }
        }
    }
    let rate = 4.0 * report.rho + 2.0 * report.theta + report.delta;
    let d = c.dim();
    let (mut yx, mut yy) = (linalg::identity(d), linalg::identity(d));
    let mut values = vec![1.0];
    for n in 0..n_max {
        yx = c.stable_factor(x, n)? * yx;
        yy = c.stable_factor(y, n)? * yy;
        let prod = linalg::op_norm(&yy) * linalg::op_norm(&linalg::invert(&yx)?);
        values.push(prod * (-rate * (n + 1) as f64).exp());
    }
    let (worst_n, constant) = values.iter().copied().enumerate().fold((0, 0.0), |acc, (i, v)| if v > acc.1 { (i, v) } else { acc });
    Ok(StableGrowthCheck { constant, worst_n, values })
}
