//! Matrix-valued generators over the base systems.

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::fmt::Debug;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dynamics::{HyperbolicSystem, SftSystem, SymbolicPoint, TorusPoint, TorusSystem};
use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};
use crate::twisting::Automorphism;

/// Generators must stay this well-conditioned at every point.
pub const GENERATOR_CONDITION_LIMIT: f64 = 1e8;

/// `‖A(x) − A(y)‖ ≤ constant·d(x, y)^nu`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HolderData {
    pub nu: f64,
    /// `None` when no closed-form constant is available.
    pub constant: Option<f64>,
}

/// A continuous map `M → GL(d, ℝ)`.
pub trait MatrixField<S: HyperbolicSystem>: Send + Sync + Debug {
    fn dim(&self) -> usize;

    fn value(&self, sys: &S, x: &S::Point) -> Result<Matrix>;

    /// `Some(r)` when `A(x)` depends only on the coordinates `|i| ≤ r`.
    fn locality_radius(&self) -> Option<usize> {
        None
    }

    fn holder(&self, sys: &S) -> HolderData;
}

fn check_generator(m: &Matrix, what: &str) -> Result<()> {
    let cond = linalg::condition(m);
    if !cond.is_finite() || cond > GENERATOR_CONDITION_LIMIT {
        return Err(Error::InvalidSystem(format!("{what} has condition number {cond:e}")));
    }
    Ok(())
}

/// Same matrix everywhere.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstantField {
    matrix: Matrix,
}

impl ConstantField {
    pub fn new(matrix: Matrix) -> Result<Self> {
        check_generator(&matrix, "constant generator")?;
        Ok(ConstantField { matrix })
    }

    pub fn identity(d: usize) -> Self {
        ConstantField { matrix: linalg::identity(d) }
    }
}

impl<S: HyperbolicSystem> MatrixField<S> for ConstantField {
    fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    fn value(&self, _sys: &S, _x: &S::Point) -> Result<Matrix> {
        Ok(self.matrix.clone())
    }

    fn locality_radius(&self) -> Option<usize> {
        Some(0)
    }

    fn holder(&self, _sys: &S) -> HolderData {
        HolderData { nu: 1.0, constant: Some(0.0) }
    }
}

/// `A(x)` determined by the word `x_{−r} … x_r`.
#[derive(Debug, Clone, PartialEq)]
pub struct LocallyConstant {
    radius: usize,
    dim: usize,
    table: BTreeMap<Vec<u8>, Matrix>,
}

impl LocallyConstant {
    /// Builds the table from `f` over every admissible word of length `2r + 1`.
    pub fn from_fn(sys: &SftSystem, radius: usize, dim: usize, mut f: impl FnMut(&[u8]) -> Matrix) -> Result<Self> {
        let mut table = BTreeMap::new();
        for w in sys.admissible_words(2 * radius + 1) {
            let m = f(&w);
            if m.nrows() != dim || m.ncols() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: m.nrows() });
            }
            check_generator(&m, &format!("table entry for word {w:?}"))?;
            table.insert(w, m);
        }
        Ok(LocallyConstant { radius, dim, table })
    }

    /// Entries `I + scale·E` with `E` uniform in `[-1, 1]`.
    pub fn random<R: Rng + ?Sized>(sys: &SftSystem, radius: usize, dim: usize, scale: f64, rng: &mut R) -> Self {
        Self::from_fn(sys, radius, dim, |_| linalg::random_near_identity(rng, dim, scale, 1e3)).expect("well-conditioned entries")
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn table(&self) -> &BTreeMap<Vec<u8>, Matrix> {
        &self.table
    }

    /// Replaces the matrix on one cylinder.
    pub fn with_entry(mut self, word: &[u8], m: Matrix) -> Result<Self> {
        if !self.table.contains_key(word) {
            return Err(Error::InvalidPoint(format!("word {word:?} is not an admissible cylinder of length {}", 2 * self.radius + 1)));
        }
        check_generator(&m, "replacement entry")?;
        self.table.insert(word.to_vec(), m);
        Ok(self)
    }

    pub fn lookup(&self, x: &SymbolicPoint) -> Result<&Matrix> {
        let r = self.radius as i64;
        let w = x.window(-r, r + 1);
        self.table.get(&w).ok_or_else(|| Error::InvalidPoint(format!("window {w:?} is not admissible")))
    }
}

impl MatrixField<SftSystem> for LocallyConstant {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, _sys: &SftSystem, x: &SymbolicPoint) -> Result<Matrix> {
        self.lookup(x).cloned()
    }

    fn locality_radius(&self) -> Option<usize> {
        Some(self.radius)
    }

    /// Points at distance below `e^{−λ(r+1)}` share the defining window, so
    /// the largest table difference scaled by `e^{λ(r+1)}` is a Lipschitz
    /// constant.
    fn holder(&self, sys: &SftSystem) -> HolderData {
        let entries: Vec<&Matrix> = self.table.values().collect();
        let mut max_diff: f64 = 0.0;
        for (i, a) in entries.iter().enumerate() {
            for b in &entries[i + 1..] {
                max_diff = max_diff.max(linalg::op_norm(&(*a - *b)));
            }
        }
        HolderData { nu: 1.0, constant: Some(max_diff * (sys.lambda() * (self.radius + 1) as f64).exp()) }
    }
}

/// `A(x) = A₀ + Σ_{|i| ≤ reach} c^{|i|}·W[x_i]`: Hölder with exponent
/// `−ln c / λ`, not locally constant below the reach.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolicSeries {
    base: Matrix,
    weights: Vec<Matrix>,
    decay: f64,
    reach: usize,
}

impl SymbolicSeries {
    pub fn new(base: Matrix, weights: Vec<Matrix>, decay: f64, reach: usize) -> Result<Self> {
        if !(decay > 0.0 && decay < 1.0) {
            return Err(Error::InvalidSystem(format!("decay {decay} must lie in (0, 1)")));
        }
        let d = base.nrows();
        if let Some(w) = weights.iter().find(|w| w.nrows() != d || w.ncols() != d) {
            return Err(Error::DimensionMismatch { expected: d, found: w.nrows() });
        }
        check_generator(&base, "series base")?;
        // Keep every value a small perturbation of the base.
        let spread = 2.0 * weights.iter().map(linalg::op_norm).fold(0.0, f64::max) / (1.0 - decay);
        let inv_norm = linalg::op_norm(&linalg::invert(&base)?);
        if spread * inv_norm > 0.5 {
            return Err(Error::InvalidSystem(format!("series perturbation {spread:e} too large for its base")));
        }
        Ok(SymbolicSeries { base, weights, decay, reach })
    }

    /// Random weights of norm at most `amplitude`; `fixed` (if any) gets a
    /// zero weight so that the value on its constant sequence is `base`.
    pub fn random<R: Rng + ?Sized>(
        sys: &SftSystem,
        base: Matrix,
        decay: f64,
        reach: usize,
        amplitude: f64,
        fixed: Option<u8>,
        rng: &mut R,
    ) -> Result<Self> {
        let d = base.nrows();
        let weights = (0..sys.alphabet_size() as u8)
            .map(|s| {
                if Some(s) == fixed {
                    Matrix::zeros(d, d)
                } else {
                    let e = Matrix::from_fn(d, d, |_, _| rng.random_range(-1.0..1.0));
                    let n = linalg::op_norm(&e).max(1e-300);
                    e * (amplitude / n)
                }
            })
            .collect();
        Self::new(base, weights, decay, reach)
    }

    /// Scalar field `φ(x)·I` with `φ = 1 + Σ c^{|i|} w[x_i]`.
    pub fn scalar(d: usize, weights: &[f64], decay: f64, reach: usize) -> Result<Self> {
        let ws = weights.iter().map(|&w| Matrix::identity(d, d) * w).collect();
        Self::new(Matrix::identity(d, d), ws, decay, reach)
    }

    pub fn decay(&self) -> f64 {
        self.decay
    }
}

impl MatrixField<SftSystem> for SymbolicSeries {
    fn dim(&self) -> usize {
        self.base.nrows()
    }

    fn value(&self, _sys: &SftSystem, x: &SymbolicPoint) -> Result<Matrix> {
        let mut m = self.base.clone();
        let r = self.reach as i64;
        for i in -r..=r {
            let s = x.symbol(i) as usize;
            let w = self.weights.get(s).ok_or_else(|| Error::InvalidPoint(format!("symbol {s} has no weight")))?;
            m += w * self.decay.powi(i.unsigned_abs() as i32);
        }
        Ok(m)
    }

    fn locality_radius(&self) -> Option<usize> {
        Some(self.reach)
    }

    fn holder(&self, sys: &SftSystem) -> HolderData {
        let w = self.weights.iter().map(linalg::op_norm).fold(0.0, f64::max);
        HolderData { nu: -self.decay.ln() / sys.lambda(), constant: Some(4.0 * w / (1.0 - self.decay)) }
    }
}

/// One Fourier mode `cos(2π k·x)·C + sin(2π k·x)·S`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrigTerm {
    pub k: [i32; 2],
    pub cos: Matrix,
    pub sin: Matrix,
}

/// Matrix-valued trigonometric polynomial on the torus.
#[derive(Debug, Clone, PartialEq)]
pub struct TorusSmooth {
    base: Matrix,
    terms: Vec<TrigTerm>,
}

impl TorusSmooth {
    pub fn new(base: Matrix, terms: Vec<TrigTerm>) -> Result<Self> {
        let d = base.nrows();
        if let Some(t) = terms.iter().find(|t| t.cos.nrows() != d || t.sin.nrows() != d) {
            return Err(Error::DimensionMismatch { expected: d, found: t.cos.nrows().max(t.sin.nrows()) });
        }
        let spread: f64 = terms.iter().map(|t| linalg::op_norm(&t.cos) + linalg::op_norm(&t.sin)).sum();
        let centre = &base + terms.iter().fold(Matrix::zeros(d, d), |acc, t| acc + &t.cos);
        check_generator(&base, "trigonometric base")?;
        let inv_norm = linalg::op_norm(&linalg::invert(&base)?);
        if spread * inv_norm > 0.5 {
            return Err(Error::InvalidSystem(format!("trigonometric perturbation {spread:e} too large for its base")));
        }
        check_generator(&centre, "value at the origin")?;
        Ok(TorusSmooth { base, terms })
    }

    /// Random modes with `|k_i| ≤ 1`; with `normalize` the constant term is
    /// shifted so that the value at the origin is the identity.
    pub fn random<R: Rng + ?Sized>(d: usize, amplitude: f64, normalize: bool, rng: &mut R) -> Result<Self> {
        let modes = [[1, 0], [0, 1], [1, 1], [1, -1]];
        let rand_mat = |rng: &mut R| {
            let e = Matrix::from_fn(d, d, |_, _| rng.random_range(-1.0..1.0));
            let n = linalg::op_norm(&e).max(1e-300);
            e * (amplitude / n)
        };
        let terms: Vec<TrigTerm> =
            modes.iter().map(|&k| TrigTerm { k, cos: rand_mat(rng), sin: rand_mat(rng) }).collect();
        let mut base = linalg::identity(d);
        if normalize {
            for t in &terms {
                base -= &t.cos;
            }
        } else {
            base += rand_mat(rng);
        }
        Self::new(base, terms)
    }

    pub fn terms(&self) -> &[TrigTerm] {
        &self.terms
    }
}

impl MatrixField<TorusSystem> for TorusSmooth {
    fn dim(&self) -> usize {
        self.base.nrows()
    }

    fn value(&self, _sys: &TorusSystem, x: &TorusPoint) -> Result<Matrix> {
        let mut m = self.base.clone();
        for t in &self.terms {
            let phase = TAU * (t.k[0] as f64 * x.coords[0] + t.k[1] as f64 * x.coords[1]);
            m += &t.cos * phase.cos() + &t.sin * phase.sin();
        }
        Ok(m)
    }

    /// Lipschitz constant `Σ 2π|k|(‖C‖ + ‖S‖)` for the flat metric.
    fn holder(&self, _sys: &TorusSystem) -> HolderData {
        let c: f64 = self
            .terms
            .iter()
            .map(|t| TAU * (t.k[0] as f64).hypot(t.k[1] as f64) * (linalg::op_norm(&t.cos) + linalg::op_norm(&t.sin)))
            .sum();
        HolderData { nu: 1.0, constant: Some(c) }
    }
}

/// `B(x) = Q(f x)⁻¹·A(x)·α(Q(x))`, so that `A^n(x) = Q(f^n x)·B^n(x)·α^n(Q(x))⁻¹`.
#[derive(Debug, Clone)]
pub struct Conjugated<S: HyperbolicSystem> {
    pub base: Arc<dyn MatrixField<S>>,
    pub q: Arc<dyn MatrixField<S>>,
    pub alpha: Arc<Automorphism>,
}

impl<S: HyperbolicSystem> MatrixField<S> for Conjugated<S> {
    fn dim(&self) -> usize {
        self.base.dim()
    }

    fn value(&self, sys: &S, x: &S::Point) -> Result<Matrix> {
        let fx = sys.iterate(x, 1);
        let q_next = self.q.value(sys, &fx)?;
        let q_inv = linalg::invert(&q_next).map_err(|_| Error::SingularQ(format!("at {}", sys.describe(&fx))))?;
        let q_here = self.q.value(sys, x)?;
        Ok(q_inv * self.base.value(sys, x)? * self.alpha.apply(1, &q_here)?)
    }

    fn locality_radius(&self) -> Option<usize> {
        Some(self.base.locality_radius()?.max(self.q.locality_radius()? + 1))
    }

    fn holder(&self, sys: &S) -> HolderData {
        let nu = self.base.holder(sys).nu.min(self.q.holder(sys).nu);
        HolderData { nu, constant: None }
    }
}

/// `A(x)` multiplied on the left by a fixed matrix on one cylinder.
#[derive(Debug, Clone)]
pub struct CylinderPerturbation {
    pub base: Arc<dyn MatrixField<SftSystem>>,
    /// Coordinates `−r..=r` of the cylinder, `r = (len − 1)/2`.
    pub word: Vec<u8>,
    pub factor: Matrix,
}

impl MatrixField<SftSystem> for CylinderPerturbation {
    fn dim(&self) -> usize {
        self.base.dim()
    }

    fn value(&self, sys: &SftSystem, x: &SymbolicPoint) -> Result<Matrix> {
        let r = (self.word.len() / 2) as i64;
        let a = self.base.value(sys, x)?;
        if x.window(-r, r + 1) == self.word {
            Ok(&self.factor * a)
        } else {
            Ok(a)
        }
    }

    fn locality_radius(&self) -> Option<usize> {
        Some(self.base.locality_radius()?.max(self.word.len() / 2))
    }

    fn holder(&self, sys: &SftSystem) -> HolderData {
        HolderData { nu: self.base.holder(sys).nu, constant: None }
    }
}
