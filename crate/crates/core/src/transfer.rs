//! Transfer maps `P(y) = H^{s,A}_{xy}·H^{s,B}_{yx}` on the homoclinic class
//! of a fixed point `x`, with the checks that certify
//! `A^n(y) = P(f^n y)·B^n(y)·α^n(P(y))⁻¹`.

use std::sync::RwLock;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cocycle::TwistedCocycle;
use crate::dynamics::{HyperbolicSystem, SftSystem, SymbolicPoint};
use crate::error::{Error, Result};
use crate::fit::{fit_line, max_per_abscissa, power_law_envelope, PowerLaw};
use crate::holonomy::{HolonomyResult, HolonomySolver};
use crate::linalg::{self, Matrix};

/// Consecutive increments that must fall below the extension threshold;
/// one is not enough since consecutive truncations can coincide.
const SETTLE_WINDOWS: usize = 3;

/// Minimum number of cached pairs for a Hölder fit.
pub const MIN_HOLDER_PAIRS: usize = 30;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferValue {
    #[serde(with = "crate::linalg::row_major")]
    pub matrix: Matrix,
    pub tail_bound: f64,
}

#[derive(Debug, Clone)]
struct CachedValue<P> {
    point: P,
    value: TransferValue,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodicRow {
    pub n: usize,
    pub points: usize,
    /// Largest `‖A^n(p) − B^n(p)‖ / ‖A^n(p)‖` over `Fix(f^n)`.
    pub worst_residual: f64,
    pub worst_point: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodicWitness {
    pub point: String,
    pub n: usize,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodicDataReport {
    pub n_max: usize,
    pub tol: f64,
    pub rows: Vec<PeriodicRow>,
    pub matched: bool,
    /// First `(p, n)` in enumeration order whose residual exceeds `tol`.
    pub witness: Option<PeriodicWitness>,
}

/// Exhaustive comparison of `A^n(p)` and `B^n(p)` over every `p ∈ Fix(f^n)`,
/// `1 ≤ n ≤ n_max`.
pub fn periodic_check<S: HyperbolicSystem>(
    a: &TwistedCocycle<S>,
    b: &TwistedCocycle<S>,
    n_max: usize,
    tol: f64,
) -> Result<PeriodicDataReport> {
    let sys = a.base();
    let mut rows = Vec::with_capacity(n_max);
    let mut witness = None;
    for n in 1..=n_max {
        let points = sys.periodic_points(n)?;
        let residuals = points
            .par_iter()
            .map(|p| Ok(linalg::relative_difference(&a.evaluate(p, n as i64)?, &b.evaluate(p, n as i64)?)))
            .collect::<Result<Vec<f64>>>()?;
        if witness.is_none() {
            if let Some(i) = residuals.iter().position(|&r| !(r <= tol)) {
                witness = Some(PeriodicWitness { point: sys.describe(&points[i]), n, residual: residuals[i] });
            }
        }
        let worst = residuals.iter().copied().enumerate().fold(None, |acc: Option<(usize, f64)>, (i, r)| match acc {
            Some((_, best)) if !(r > best) => acc,
            _ => Some((i, r)),
        });
        rows.push(PeriodicRow {
            n,
            points: points.len(),
            worst_residual: worst.map_or(0.0, |w| w.1),
            worst_point: worst.map(|w| sys.describe(&points[w.0])),
        });
    }
    Ok(PeriodicDataReport { n_max, tol, rows, matched: witness.is_none(), witness })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuDiscrepancy {
    /// `‖H^{s,A}_{xy}H^{s,B}_{yx} − H^{u,A}_{xy}H^{u,B}_{yx}‖`.
    pub discrepancy: f64,
    /// Tail bounds of the four holonomies propagated through the products.
    pub combined_tails: f64,
    pub stable: TransferValue,
    pub unstable: TransferValue,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtensionStep {
    pub window: u64,
    /// `d(y, y_N)`.
    pub distance: f64,
    /// `‖P(y_N) − P(y_{N_prev})‖`; zero for the first window.
    pub increment: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Extension {
    pub value: TransferValue,
    pub steps: Vec<ExtensionStep>,
    /// Log-log slope of the increments against `d(y, y_N)`.
    pub slope: Option<f64>,
    /// Whether periodic data were checked to match before extending.
    pub certified: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HolderFit {
    /// `C_P`; zero when every difference vanishes.
    pub constant: f64,
    /// Infinite when every difference vanishes.
    pub exponent: f64,
    pub pairs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SerializedSample {
    pub point: String,
    #[serde(flatten)]
    pub value: TransferValue,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SerializedTransfer {
    pub anchor: String,
    pub samples: Vec<SerializedSample>,
}

/// `P` built from holonomies of two fiber-bunched cocycles over one base.
#[derive(Debug)]
pub struct TransferMap<S: HyperbolicSystem> {
    anchor: S::Point,
    a: HolonomySolver<S>,
    b: HolonomySolver<S>,
    periodic: Option<PeriodicDataReport>,
    cache: RwLock<Vec<CachedValue<S::Point>>>,
}

fn product(h: &HolonomyResult, k: &HolonomyResult) -> TransferValue {
    let d = h.matrix.nrows() as f64;
    let matrix = &h.matrix * &k.matrix;
    let tail_bound = h.tail_bound * k.matrix.norm()
        + k.tail_bound * h.matrix.norm()
        + h.tail_bound * k.tail_bound
        + 2.0 * d * f64::EPSILON * h.matrix.norm() * k.matrix.norm();
    TransferValue { matrix, tail_bound }
}

impl<S: HyperbolicSystem> TransferMap<S> {
    pub fn new(anchor: S::Point, a: HolonomySolver<S>, b: HolonomySolver<S>) -> Result<Self> {
        let sys = a.cocycle().base();
        if !sys.same_point(&sys.iterate(&anchor, 1), &anchor) {
            return Err(Error::InvalidPoint(format!("anchor {} is not fixed", sys.describe(&anchor))));
        }
        if a.cocycle().dim() != b.cocycle().dim() {
            return Err(Error::DimensionMismatch { expected: a.cocycle().dim(), found: b.cocycle().dim() });
        }
        Ok(TransferMap { anchor, a, b, periodic: None, cache: RwLock::new(Vec::new()) })
    }

    pub fn anchor(&self) -> &S::Point {
        &self.anchor
    }

    pub fn solvers(&self) -> (&HolonomySolver<S>, &HolonomySolver<S>) {
        (&self.a, &self.b)
    }

    pub fn periodic_report(&self) -> Option<&PeriodicDataReport> {
        self.periodic.as_ref()
    }

    /// Runs [`periodic_check`] and keeps the verdict for later extensions.
    pub fn verify_periodic(&mut self, n_max: usize, tol: f64) -> Result<&PeriodicDataReport> {
        let report = periodic_check(self.a.cocycle(), self.b.cocycle(), n_max, tol)?;
        Ok(self.periodic.insert(report))
    }

    fn base(&self) -> &S {
        self.a.cocycle().base()
    }

    fn check_homoclinic(&self, y: &S::Point) -> Result<()> {
        if self.base().is_homoclinic(&self.anchor, y) {
            Ok(())
        } else {
            Err(Error::NotHomoclinic)
        }
    }

    /// `P(y)` for `y ∈ W(x)`; every value is appended to the cache.
    pub fn at(&self, y: &S::Point) -> Result<TransferValue> {
        self.check_homoclinic(y)?;
        let value = if self.base().same_point(y, &self.anchor) {
            TransferValue { matrix: linalg::identity(self.a.cocycle().dim()), tail_bound: 0.0 }
        } else {
            product(&self.a.stable(&self.anchor, y)?, &self.b.stable(y, &self.anchor)?)
        };
        self.cache.write().expect("cache lock").push(CachedValue { point: y.clone(), value: value.clone() });
        Ok(value)
    }

    /// Evaluates concurrently; results keep the input order.
    pub fn at_many(&self, points: &[S::Point]) -> Vec<Result<TransferValue>> {
        points.par_iter().map(|y| self.at(y)).collect()
    }

    pub fn cached(&self) -> usize {
        self.cache.read().expect("cache lock").len()
    }

    /// `‖A^n(y) − P(f^n y)·B^n(y)·α^n(P(y))⁻¹‖ / ‖A^n(y)‖`.
    pub fn cohomology_residual(&self, y: &S::Point, n: i64) -> Result<f64> {
        let p = self.at(y)?;
        let pn = self.at(&self.base().iterate(y, n))?;
        let a = self.a.cocycle();
        let rhs = &pn.matrix * self.b.cocycle().evaluate(y, n)? * linalg::invert(&a.alpha().apply(n, &p.matrix)?)?;
        Ok(linalg::relative_difference(&a.evaluate(y, n)?, &rhs))
    }

    /// Stable against unstable construction of `P(y)`.
    pub fn su_discrepancy(&self, y: &S::Point) -> Result<SuDiscrepancy> {
        self.check_homoclinic(y)?;
        let stable = product(&self.a.stable(&self.anchor, y)?, &self.b.stable(y, &self.anchor)?);
        let unstable = product(&self.a.unstable(&self.anchor, y)?, &self.b.unstable(y, &self.anchor)?);
        let d = stable.matrix.nrows() as f64;
        let discrepancy = (&stable.matrix - &unstable.matrix).norm();
        let combined_tails = stable.tail_bound
            + unstable.tail_bound
            + d * f64::EPSILON * (stable.matrix.norm() + unstable.matrix.norm());
        Ok(SuDiscrepancy { discrepancy, combined_tails, stable, unstable })
    }

    /// Upper-envelope log-log fit of `‖P(y) − P(z)‖` against `d(y, z)` over
    /// pairs of cached points, at most `pair_budget` of them.
    pub fn holder_fit(&self, pair_budget: usize) -> Result<HolderFit> {
        let cache = self.cache.read().expect("cache lock");
        let sys = self.base();
        let mut samples = Vec::new();
        'outer: for i in 0..cache.len() {
            for j in i + 1..cache.len() {
                if samples.len() >= pair_budget {
                    break 'outer;
                }
                let d = sys.distance(&cache[i].point, &cache[j].point);
                if d > 0.0 {
                    samples.push((d, (&cache[i].value.matrix - &cache[j].value.matrix).norm()));
                }
            }
        }
        if samples.len() < MIN_HOLDER_PAIRS {
            return Err(Error::InsufficientPairs { found: samples.len(), needed: MIN_HOLDER_PAIRS });
        }
        let pairs = samples.len();
        if samples.iter().all(|s| s.1 == 0.0) {
            return Ok(HolderFit { constant: 0.0, exponent: f64::INFINITY, pairs });
        }
        let logs: Vec<(f64, f64)> = samples.iter().filter(|s| s.1 > 0.0).map(|(d, v)| (d.ln(), v.ln())).collect();
        let envelope = max_per_abscissa(&logs);
        let exponent = match fit_line(&envelope) {
            Some(f) => f.slope,
            None => return Err(Error::InsufficientPairs { found: envelope.len(), needed: 2 }),
        };
        let constant = logs.iter().map(|(x, y)| y - exponent * x).fold(f64::NEG_INFINITY, f64::max).exp();
        Ok(HolderFit { constant, exponent, pairs })
    }

    pub fn to_serialized(&self) -> SerializedTransfer {
        let sys = self.base();
        let cache = self.cache.read().expect("cache lock");
        SerializedTransfer {
            anchor: sys.describe(&self.anchor),
            samples: cache.iter().map(|c| SerializedSample { point: sys.describe(&c.point), value: c.value.clone() }).collect(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(&self.to_serialized()).map_err(|e| Error::Io(e.to_string()))
    }
}

impl TransferMap<SftSystem> {
    /// `P(y)` for an arbitrary `y` as the limit of `P(y_N)` over homoclinic
    /// truncations `y_N` agreeing with `y` on `|i| ≤ N`, for `N` in `schedule`.
    /// Stops once the last few increments are all below `threshold`.
    pub fn extend(&self, y: &SymbolicPoint, schedule: &[u64], threshold: f64) -> Result<Extension> {
        if schedule.is_empty() || schedule.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::ConfigInvalid("extension schedule must be nonempty and increasing".into()));
        }
        let sys = self.base();
        let mut steps: Vec<ExtensionStep> = Vec::new();
        let mut prev: Option<TransferValue> = None;
        for &n in schedule {
            let yn = sys.homoclinic_truncate(y, &self.anchor, n)?;
            let value = self.at(&yn)?;
            let distance = sys.distance(y, &yn);
            let increment = prev.as_ref().map_or(0.0, |p| (&value.matrix - &p.matrix).norm());
            steps.push(ExtensionStep { window: n, distance, increment });
            let settled = steps.len() > SETTLE_WINDOWS && steps[steps.len() - SETTLE_WINDOWS..].iter().all(|s| s.increment <= threshold);
            if settled {
                let slope = extension_slope(&steps);
                let certified = self.periodic.as_ref().is_some_and(|p| p.matched);
                return Ok(Extension { value, steps, slope, certified });
            }
            prev = Some(value);
        }
        let last = steps.last().map_or(f64::NAN, |s| s.increment);
        Err(Error::NotCauchy(format!("last increment {last:e} above threshold {threshold:e} after {} windows", schedule.len())))
    }
}

/// Increment `i` is attributed to the distance of the coarser truncation.
fn extension_slope(steps: &[ExtensionStep]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = steps.windows(2).map(|w| (w[0].distance, w[1].increment)).collect();
    power_law_envelope(&pts).map(|p: PowerLaw| p.exponent)
}
