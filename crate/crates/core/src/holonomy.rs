//! Stable and unstable holonomies
//! `H^s_{yz} = lim α^{−n}(A^n(z)⁻¹A^n(y))` and
//! `H^u_{yz} = lim α^n(A^{−n}(z)⁻¹A^{−n}(y))`.
//!
//! Partial limits are accumulated through their increments
//! `S_{n+1} − S_n = Z_{n+1}⁻¹(F_n(y) − F_n(z))Y_n`, where `F_n` is the one-step
//! factor of the normalized products, so that identical factors contribute an
//! exact zero.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bunching::FiberBunchingReport;
use crate::cocycle::TwistedCocycle;
use crate::dynamics::HyperbolicSystem;
use crate::error::{Error, Result};
use crate::fit::{fit_line, power_law_envelope, PowerLaw};
use crate::linalg::{self, Matrix};

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_N_MAX: usize = 200;

/// Steps past the entry into the local set before the geometric stopping
/// rule is consulted, for generators without a locality radius.
const WARMUP: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Stable,
    Unstable,
}

impl Side {
    pub fn as_str(self) -> &'static str {
        match self {
            Side::Stable => "stable",
            Side::Unstable => "unstable",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HolonomyResult {
    pub side: Side,
    #[serde(with = "crate::linalg::row_major")]
    pub matrix: Matrix,
    /// `series_tail + roundoff`.
    pub tail_bound: f64,
    /// Geometric bound on the increments beyond `steps`; below the solver
    /// tolerance on success.
    pub series_tail: f64,
    /// First-order floating-point error of the accumulated sum.
    pub roundoff: f64,
    /// One past the index of the last nonzero increment.
    pub depth: usize,
    /// Increments actually computed.
    pub steps: usize,
    /// Iterates needed to bring the pair into the local set.
    pub entry: usize,
    /// Ratio used for the tail (at least the certified one).
    pub ratio: f64,
}

/// Residual of a holonomy identity against the bound it must respect.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub residual: f64,
    pub bound: f64,
}

impl IdentityCheck {
    pub fn holds(&self) -> bool {
        self.residual <= self.bound
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HolderProfile {
    /// `(d(y, z), ‖H_{yz} − I‖)`.
    pub points: Vec<(f64, f64)>,
    pub fit: Option<PowerLaw>,
}

/// Holonomy engine for a fiber-bunched cocycle.
#[derive(Debug, Clone)]
pub struct HolonomySolver<S: HyperbolicSystem> {
    cocycle: TwistedCocycle<S>,
    report: FiberBunchingReport,
    q_cert: f64,
    tol: f64,
    n_max: usize,
}

struct Walk {
    sum: Matrix,
    increments: Vec<f64>,
    roundoff: f64,
    entry: usize,
}

impl<S: HyperbolicSystem> HolonomySolver<S> {
    pub fn new(cocycle: TwistedCocycle<S>, report: FiberBunchingReport) -> Result<Self> {
        report.require_satisfied()?;
        let q_cert = report.holonomy_rate().exp();
        Ok(HolonomySolver { cocycle, report, q_cert, tol: DEFAULT_TOL, n_max: DEFAULT_N_MAX })
    }

    pub fn with_limits(mut self, tol: f64, n_max: usize) -> Result<Self> {
        if !(tol > 0.0) || n_max == 0 {
            return Err(Error::ConfigInvalid(format!("holonomy limits need tol > 0 and n_max > 0, got {tol:e}, {n_max}")));
        }
        self.tol = tol;
        self.n_max = n_max;
        Ok(self)
    }

    pub fn cocycle(&self) -> &TwistedCocycle<S> {
        &self.cocycle
    }

    pub fn report(&self) -> &FiberBunchingReport {
        &self.report
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    /// `e^{5ρ+2θ+δ−νλ}`.
    pub fn certified_ratio(&self) -> f64 {
        self.q_cert
    }

    pub fn stable(&self, y: &S::Point, z: &S::Point) -> Result<HolonomyResult> {
        self.compute(Side::Stable, y, z)
    }

    pub fn unstable(&self, y: &S::Point, z: &S::Point) -> Result<HolonomyResult> {
        self.compute(Side::Unstable, y, z)
    }

    fn entry(&self, side: Side, y: &S::Point, z: &S::Point) -> Result<usize> {
        let sys = self.cocycle.base();
        let entry = match side {
            Side::Stable => sys.stable_entry(y, z, self.n_max),
            Side::Unstable => sys.unstable_entry(y, z, self.n_max),
        };
        entry.ok_or(Error::NotStablePair { side: side.as_str() })
    }

    fn factor(&self, side: Side, x: &S::Point, n: usize) -> Result<Matrix> {
        match side {
            Side::Stable => self.cocycle.stable_factor(x, n),
            Side::Unstable => self.cocycle.unstable_factor(x, n),
        }
    }

    /// Runs the increment recursion, calling `stop` after each step with the
    /// step index and the walk so far.
    fn walk(&self, side: Side, y: &S::Point, z: &S::Point, limit: usize, mut stop: impl FnMut(usize, &Walk) -> bool) -> Result<Walk> {
        let entry = self.entry(side, y, z)?;
        let d = self.cocycle.dim();
        let eps = f64::EPSILON;
        let mut w = Walk { sum: linalg::identity(d), increments: Vec::new(), roundoff: 0.0, entry };
        let mut prod_y = linalg::identity(d);
        let mut inv_z = linalg::identity(d);
        for n in 0..limit {
            let fy = self.factor(side, y, n)?;
            let fz = self.factor(side, z, n)?;
            let next_inv_z = &inv_z * linalg::invert(&fz)?;
            if fy == fz {
                w.increments.push(0.0);
            } else {
                let inc = &next_inv_z * (&fy - &fz) * &prod_y;
                w.sum += &inc;
                w.roundoff +=
                    4.0 * d as f64 * eps * next_inv_z.norm() * (fy.norm() + fz.norm()) * prod_y.norm() + eps * w.sum.norm();
                w.increments.push(inc.norm());
            }
            prod_y = fy * prod_y;
            inv_z = next_inv_z;
            if stop(n, &w) {
                break;
            }
        }
        Ok(w)
    }

    /// Truncated holonomy whose series tail is below the solver tolerance.
    /// Accumulated roundoff is reported on top and can exceed it when the
    /// normalized products grow.
    pub fn compute(&self, side: Side, y: &S::Point, z: &S::Point) -> Result<HolonomyResult> {
        let d = self.cocycle.dim();
        if self.cocycle.base().same_point(y, z) {
            return Ok(HolonomyResult {
                side,
                matrix: linalg::identity(d),
                tail_bound: 0.0,
                series_tail: 0.0,
                roundoff: 0.0,
                depth: 0,
                steps: 0,
                entry: 0,
                ratio: self.q_cert,
            });
        }
        let radius = self.cocycle.field().locality_radius();
        let q_cert = self.q_cert;
        let tol = self.tol;
        let mut verdict = (f64::INFINITY, q_cert, false);
        let w = self.walk(side, y, z, self.n_max, |n, w| {
            let check_from = w.entry + radius.unwrap_or(WARMUP);
            if n < check_from {
                return false;
            }
            let inc = w.increments[n];
            if radius.is_some() && inc == 0.0 {
                // Exact telescoping: every later factor pair is identical.
                verdict = (0.0, 0.0, true);
                return true;
            }
            let q_emp = empirical_ratio(&w.increments);
            let q = q_emp.max(q_cert);
            let series = if q < 1.0 { inc * q / (1.0 - q) } else { f64::INFINITY };
            verdict = (series, q, series <= tol);
            verdict.2
        })?;
        let (series, ratio, done) = verdict;
        if !done {
            return Err(Error::NoConvergence {
                steps: w.increments.len(),
                tail: series,
                ratio: empirical_ratio(&w.increments),
            });
        }
        let depth = w.increments.iter().rposition(|&v| v > 0.0).map_or(0, |i| i + 1);
        Ok(HolonomyResult {
            side,
            matrix: w.sum,
            tail_bound: series + w.roundoff,
            series_tail: series,
            roundoff: w.roundoff,
            depth,
            steps: w.increments.len(),
            entry: w.entry,
            ratio,
        })
    }

    /// `‖S_{n+1} − S_n‖` for `n < n_max`, with no stopping rule.
    pub fn convergence_profile(&self, side: Side, y: &S::Point, z: &S::Point, n_max: usize) -> Result<Vec<f64>> {
        Ok(self.walk(side, y, z, n_max, |_, _| false)?.increments)
    }

    /// Pairs are processed concurrently; results keep the input order.
    pub fn batch(&self, side: Side, pairs: &[(S::Point, S::Point)]) -> Vec<Result<HolonomyResult>> {
        pairs.par_iter().map(|(y, z)| self.compute(side, y, z)).collect()
    }

    /// `H_{yz}` against `H_{xz}·H_{yx}` for three points on a common leaf.
    pub fn composition_check(&self, side: Side, x: &S::Point, y: &S::Point, z: &S::Point) -> Result<IdentityCheck> {
        let yz = self.compute(side, y, z)?;
        let xz = self.compute(side, x, z)?;
        let yx = self.compute(side, y, x)?;
        let residual = (&yz.matrix - &xz.matrix * &yx.matrix).norm();
        let tails = yz.tail_bound
            + xz.tail_bound * yx.matrix.norm()
            + yx.tail_bound * xz.matrix.norm()
            + xz.tail_bound * yx.tail_bound;
        let d = self.cocycle.dim() as f64;
        let product_roundoff = 2.0 * d * f64::EPSILON * xz.matrix.norm() * yx.matrix.norm();
        Ok(IdentityCheck { residual, bound: 5.0 * (tails + product_roundoff) })
    }

    /// `H_{f^m y, f^m z}` against `A^m(z)·α^m(H_{yz})·A^m(y)⁻¹`.
    pub fn equivariance_check(&self, side: Side, y: &S::Point, z: &S::Point, m: i64) -> Result<IdentityCheck> {
        let sys = self.cocycle.base();
        let (ym, zm) = (sys.iterate(y, m), sys.iterate(z, m));
        let h = self.compute(side, y, z)?;
        let hm = self.compute(side, &ym, &zm)?;
        let az = self.cocycle.evaluate(z, m)?;
        let ay_inv = linalg::invert(&self.cocycle.evaluate(y, m)?)?;
        let pushed = &az * self.cocycle.alpha().apply(m, &h.matrix)? * &ay_inv;
        let residual = (&hm.matrix - &pushed).norm();
        let growth = self.report.c_rho * (self.report.rho * m.unsigned_abs() as f64).exp();
        let scale = az.norm() * growth * ay_inv.norm();
        let d = self.cocycle.dim() as f64;
        let product_roundoff = 4.0 * d * (m.unsigned_abs() as f64 + 2.0) * f64::EPSILON * scale * h.matrix.norm();
        Ok(IdentityCheck { residual, bound: 5.0 * (hm.tail_bound + scale * h.tail_bound + product_roundoff) })
    }

    /// `H_{yz}·H_{zy}` against the identity.
    pub fn symmetry_check(&self, side: Side, y: &S::Point, z: &S::Point) -> Result<IdentityCheck> {
        let yz = self.compute(side, y, z)?;
        let zy = self.compute(side, z, y)?;
        let residual = (&yz.matrix * &zy.matrix - linalg::identity(self.cocycle.dim())).norm();
        let bound = 2.0 * (yz.tail_bound * zy.matrix.norm() + zy.tail_bound * yz.matrix.norm())
            + 2.0 * self.cocycle.dim() as f64 * f64::EPSILON * yz.matrix.norm() * zy.matrix.norm();
        Ok(IdentityCheck { residual, bound })
    }

    /// `‖H_{yz} − I‖` against `d(y, z)` with a power-law envelope.
    pub fn holder_profile(&self, side: Side, pairs: &[(S::Point, S::Point)]) -> Result<HolderProfile> {
        let sys = self.cocycle.base();
        let d = self.cocycle.dim();
        let points = self
            .batch(side, pairs)
            .into_iter()
            .zip(pairs)
            .map(|(h, (y, z))| Ok((sys.distance(y, z), (h?.matrix - linalg::identity(d)).norm())))
            .collect::<Result<Vec<_>>>()?;
        let fit = power_law_envelope(&points);
        Ok(HolderProfile { points, fit })
    }
}

/// Largest ratio among the last three consecutive increments; infinite when
/// an increment follows a zero one.
fn empirical_ratio(incs: &[f64]) -> f64 {
    let n = incs.len();
    if n < 2 {
        return f64::INFINITY;
    }
    (n.saturating_sub(3).max(1)..n)
        .map(|i| match (incs[i - 1], incs[i]) {
            (_, 0.0) => 0.0,
            (0.0, _) => f64::INFINITY,
            (a, b) => b / a,
        })
        .fold(0.0, f64::max)
}

/// Least-squares slope of `ln ‖S_{n+1} − S_n‖` against `n` over the
/// increments above `floor`, skipping the first `skip` steps.
pub fn decay_exponent(profile: &[f64], skip: usize, floor: f64) -> Option<f64> {
    let pts: Vec<(f64, f64)> =
        profile.iter().enumerate().skip(skip).filter(|(_, &v)| v > floor).map(|(n, &v)| (n as f64, v.ln())).collect();
    fit_line(&pts).map(|f| f.slope)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bunching::{assess, Strictness};
    use crate::cocycle::{ConstantField, LocallyConstant, MatrixField, SymbolicSeries, TorusSmooth};
    use crate::dynamics::{SftSystem, SymbolicPoint, TorusSystem};
    use crate::twisting::{Automorphism, GrowthCertificate};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::sync::Arc;

    fn ln2() -> f64 {
        std::f64::consts::LN_2
    }

    fn pt(s: &str) -> SymbolicPoint {
        s.parse().unwrap()
    }

    fn solver(field: Arc<dyn MatrixField<SftSystem>>, alpha: Automorphism) -> HolonomySolver<SftSystem> {
        let sys = Arc::new(SftSystem::full_shift(2, ln2()).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let g = if alpha.is_linear() && *alpha.spec() == crate::twisting::AutomorphismSpec::Identity {
            GrowthCertificate::trivial(40)
        } else {
            alpha.certify_growth(40, 10, &mut rng).unwrap()
        };
        let c = TwistedCocycle::new(sys.clone(), field, Arc::new(alpha)).unwrap();
        let sample: Vec<SymbolicPoint> = (0..12).map(|_| sys.random_point(&mut rng, 20)).collect();
        let rep = assess(&c, &sample, 30, &g, Strictness::FiveTwo).unwrap();
        HolonomySolver::new(c, rep).unwrap()
    }

    fn radius_one(seed: u64, alpha: Automorphism) -> HolonomySolver<SftSystem> {
        let sys = SftSystem::full_shift(2, ln2()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        solver(Arc::new(LocallyConstant::random(&sys, 1, 2, 0.1, &mut rng)), alpha)
    }

    #[test]
    fn identity_is_exact() {
        let s = radius_one(1, Automorphism::identity(2));
        let y = pt("(01)1.10(0)");
        let h = s.stable(&y, &y).unwrap();
        assert_eq!(h.matrix, linalg::identity(2));
        assert_eq!((h.depth, h.tail_bound), (0, 0.0));
    }

    #[test]
    fn constant_generator_gives_identity() {
        let a0 = Matrix::from_row_slice(2, 2, &[1.05, 0.1, 0.0, 0.97]);
        let l = Matrix::from_row_slice(2, 2, &[1.02, 0.0, 0.0, 1.0 / 1.02]);
        let s = solver(Arc::new(ConstantField::new(a0).unwrap()), Automorphism::inner(&l).unwrap());
        let (y, z) = (pt("(1)0.1(0)"), pt("(0)1.1(0)"));
        let h = s.stable(&y, &z).unwrap();
        assert_eq!(h.matrix, linalg::identity(2));
        let h = s.unstable(&pt("(1)0.1(0)"), &pt("(1)0.0(1)")).unwrap();
        assert_eq!(h.matrix, linalg::identity(2));
        assert!(s.convergence_profile(Side::Stable, &y, &z, 10).unwrap().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn radius_one_stable_closed_form() {
        let l = Matrix::from_row_slice(2, 2, &[1.01, 0.03, 0.0, 1.0 / 1.01]);
        for alpha in [Automorphism::identity(2), Automorphism::inner(&l).unwrap()] {
            let s = radius_one(5, alpha);
            let c = s.cocycle();
            let (y, z) = (pt("(10)1.01(1)"), pt("(0)0.01(1)"));
            let h = s.stable(&y, &z).unwrap();
            let oracle = c.alpha().apply(-1, &(linalg::invert(&c.generator(&z).unwrap()).unwrap() * c.generator(&y).unwrap())).unwrap();
            assert!((&h.matrix - &oracle).norm() < 1e-12);
            assert_eq!(h.depth, 1);
            // Direct products stabilize at n = 1.
            for n in 1..=10 {
                let direct = c
                    .alpha()
                    .apply(-n, &(linalg::invert(&c.evaluate(&z, n).unwrap()).unwrap() * c.evaluate(&y, n).unwrap()))
                    .unwrap();
                assert!((&direct - &oracle).norm() < 1e-12, "n = {n}");
            }
        }
    }

    #[test]
    fn radius_one_unstable_brute_force() {
        let s = radius_one(6, Automorphism::identity(2));
        let c = s.cocycle();
        // Agreement on i ≤ 0 cancels every backward factor.
        let h = s.unstable(&pt("(1)0.1(0)"), &pt("(1)0.1(1)")).unwrap();
        assert_eq!(h.matrix, linalg::identity(2));
        // Agreement on i ≤ −1 only: H = A(f⁻¹z)·A(f⁻¹y)⁻¹.
        let (y, z) = (pt("(1)0.1(0)"), pt("(1)0.0(1)"));
        let h = s.unstable(&y, &z).unwrap();
        let sys = c.base();
        let closed = c.generator(&sys.iterate(&z, -1)).unwrap() * linalg::invert(&c.generator(&sys.iterate(&y, -1)).unwrap()).unwrap();
        assert!((&h.matrix - &closed).norm() < 1e-12);
        for n in 1..=10 {
            let direct = linalg::invert(&c.evaluate(&z, -n).unwrap()).unwrap() * c.evaluate(&y, -n).unwrap();
            assert!((&c.alpha().apply(n, &direct).unwrap() - &closed).norm() < 1e-12);
        }
    }

    #[test]
    fn locally_constant_profiles_vanish_past_radius() {
        let sys = SftSystem::full_shift(2, ln2()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for r in 0..4 {
            let s = solver(Arc::new(LocallyConstant::random(&sys, r, 2, 0.1, &mut rng)), Automorphism::identity(2));
            let y = sys.random_point(&mut rng, 10);
            let z = SymbolicPoint::splice(&sys.random_point(&mut rng, 10), &y, 0);
            let prof = s.convergence_profile(Side::Stable, &y, &z, 20).unwrap();
            assert!(prof[r..].iter().all(|&v| v == 0.0), "r = {r}: {prof:?}");
            assert!(s.stable(&y, &z).unwrap().depth <= r);
        }
    }

    #[test]
    fn non_stable_pairs_are_rejected() {
        let s = radius_one(2, Automorphism::identity(2));
        let err = s.stable(&pt("(0)0.0(0)"), &pt("(0)0.0(1)")).unwrap_err();
        assert_eq!(err, Error::NotStablePair { side: "stable" });
    }

    #[test]
    fn global_stable_pairs_converge() {
        let s = radius_one(4, Automorphism::identity(2));
        let (y, z) = (pt("(0)0.0110(0)"), pt("(1)0.1001(0)"));
        let h = s.stable(&y, &z).unwrap();
        assert_eq!(h.entry, 4);
        let c = s.cocycle();
        let direct = linalg::invert(&c.evaluate(&z, 8).unwrap()).unwrap() * c.evaluate(&y, 8).unwrap();
        assert!((&h.matrix - &direct).norm() < 1e-12);
        assert!(s.symmetry_check(Side::Stable, &y, &z).unwrap().holds());
    }

    #[test]
    fn series_holonomy_properties() {
        let sys = Arc::new(SftSystem::full_shift(2, ln2()).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let field = SymbolicSeries::random(&sys, linalg::identity(2), 0.5, 40, 0.05, Some(0), &mut rng).unwrap();
        let l = Matrix::from_row_slice(2, 2, &[1.01, 0.0, 0.0, 1.0 / 1.01]);
        let s = solver(Arc::new(field), Automorphism::inner(&l).unwrap());
        for _ in 0..10 {
            let x = sys.random_point(&mut rng, 12);
            let y = SymbolicPoint::splice(&sys.random_point(&mut rng, 12), &x, -rng.random_range(1..6));
            let z = SymbolicPoint::splice(&sys.random_point(&mut rng, 12), &x, -rng.random_range(1..6));
            let comp = s.composition_check(Side::Stable, &x, &y, &z).unwrap();
            assert!(comp.holds(), "{comp:?}");
            for m in -5..=5 {
                let eq = s.equivariance_check(Side::Stable, &y, &z, m).unwrap();
                assert!(eq.holds(), "m = {m}: {eq:?}");
            }
            let yu = SymbolicPoint::splice(&x, &sys.random_point(&mut rng, 12), rng.random_range(1..6));
            assert!(s.symmetry_check(Side::Unstable, &x, &yu).unwrap().holds());
        }
    }

    #[test]
    fn series_holder_slope() {
        let sys = Arc::new(SftSystem::full_shift(2, ln2()).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let field = SymbolicSeries::random(&sys, linalg::identity(2), 0.6, 40, 0.05, Some(0), &mut rng).unwrap();
        let nu = field.holder(&sys).nu;
        let s = solver(Arc::new(field), Automorphism::identity(2));
        let x = sys.random_point(&mut rng, 20);
        let pairs: Vec<_> = (1..=12)
            .map(|n| {
                let mut y = x.clone();
                let flip = 1 - x.symbol(-n);
                y = SymbolicPoint::splice(&SymbolicPoint::constant(flip), &y, -n + 1);
                (x.clone(), y)
            })
            .collect();
        let prof = s.holder_profile(Side::Stable, &pairs).unwrap();
        let fit = prof.fit.unwrap();
        assert!(fit.exponent >= nu - 0.1, "{fit:?} vs ν = {nu}");
    }

    #[test]
    fn torus_holonomy_converges_geometrically() {
        let sys = Arc::new(TorusSystem::cat_map());
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let field = TorusSmooth::random(2, 0.05, false, &mut rng).unwrap();
        let c = TwistedCocycle::new(sys.clone(), Arc::new(field), Arc::new(Automorphism::identity(2))).unwrap();
        let sample: Vec<_> = (0..10).map(|_| sys.random_point(&mut rng)).collect();
        let rep = assess(&c, &sample, 30, &GrowthCertificate::trivial(30), Strictness::FiveTwo).unwrap();
        let s = HolonomySolver::new(c, rep.clone()).unwrap();
        let anchor = sys.random_point(&mut rng).rational().unwrap();
        let (y, z) = (sys.leaf_point(anchor, 0.0, 0.0), sys.leaf_point(anchor, 0.02, 0.0));
        let h = s.stable(&y, &z).unwrap();
        assert!(h.tail_bound <= 1e-10 && h.series_tail > 0.0);
        let prof = s.convergence_profile(Side::Stable, &y, &z, 30).unwrap();
        let slope = decay_exponent(&prof, 2, 1e-14).unwrap();
        assert!(slope <= rep.holonomy_rate() + 0.05, "{slope} vs {}", rep.holonomy_rate());
        assert!(s.composition_check(Side::Stable, &y, &z, &sys.leaf_point(anchor, -0.01, 0.0)).unwrap().holds());
        let (yu, zu) = (sys.leaf_point(anchor, 0.0, 0.0), sys.leaf_point(anchor, 0.0, -0.015));
        assert!(s.symmetry_check(Side::Unstable, &yu, &zu).unwrap().holds());
    }
}
