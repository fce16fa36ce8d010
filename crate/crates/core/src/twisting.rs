//! Automorphisms of GL(d, ℝ) and their growth constants.
//!
//! Every supported automorphism reduces to the normal form
//! `T ↦ M·φ^e(T)·M⁻¹` with `φ(T) = (Tᵀ)⁻¹` and `e ∈ {0, 1}`. Powers are
//! computed once, eagerly, in that form.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::exp_envelope;
use crate::linalg::{self, Matrix, CONDITION_LIMIT};

/// Powers `α^n` with `|n|` up to this bound are cached at construction.
pub const POWER_CACHE: usize = 256;

/// Declarative description of an automorphism.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AutomorphismSpec {
    Identity,
    /// `T ↦ L T L⁻¹`, `L` given row-major.
    Inner { matrix: Vec<f64> },
    /// `T ↦ (Tᵀ)⁻¹`.
    TransposeInverse,
    /// Applied first to last.
    Composition { parts: Vec<AutomorphismSpec> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GrowthMethod {
    Exact,
    Empirical,
}

/// Constants with `‖α^n(T)‖ ≤ C_growth·e^{ρ|n|}‖T‖` and
/// `‖α^n(T₁) − α^n(T₂)‖ ≤ C_lip·e^{ρ|n|}‖T₁ − T₂‖` for `|n| ≤ n_max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthCertificate {
    pub rho: f64,
    pub c_growth: f64,
    pub c_lip: f64,
    pub n_max: usize,
    pub samples: usize,
    pub method: GrowthMethod,
    pub certifiable: bool,
    pub diagnostic: Option<String>,
}

impl GrowthCertificate {
    pub fn trivial(n_max: usize) -> Self {
        GrowthCertificate {
            rho: 0.0,
            c_growth: 1.0,
            c_lip: 1.0,
            n_max,
            samples: 0,
            method: GrowthMethod::Exact,
            certifiable: true,
            diagnostic: None,
        }
    }

    pub fn require_certified(&self) -> Result<&Self> {
        if self.certifiable {
            Ok(self)
        } else {
            Err(Error::NotCertifiable(self.diagnostic.clone().unwrap_or_else(|| "empirical growth constants".into())))
        }
    }

    /// `max(C_growth, C_lip)·e^{ρ|n|}`.
    pub fn bound(&self, n: i64) -> f64 {
        self.c_growth.max(self.c_lip) * (self.rho * n.unsigned_abs() as f64).exp()
    }
}

#[derive(Debug, Clone)]
struct Power {
    m: Matrix,
    m_inv: Matrix,
    odd: bool,
}

/// An automorphism of GL(d, ℝ) with cached powers.
#[derive(Clone)]
pub struct Automorphism {
    spec: AutomorphismSpec,
    dim: usize,
    /// `positive[k] = α^k`, `negative[k] = α^{−k}`; truncated where the
    /// conjugating matrix becomes ill-conditioned.
    positive: Vec<Power>,
    negative: Vec<Power>,
    limit_condition: Option<(i64, f64)>,
}

impl fmt::Debug for Automorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Automorphism").field("spec", &self.spec).field("dim", &self.dim).finish()
    }
}

fn phi(t: &Matrix) -> Result<Matrix> {
    Ok(linalg::invert(t)?.transpose())
}

fn phi_exact(m: &Matrix, m_inv: &Matrix) -> (Matrix, Matrix) {
    (m_inv.transpose(), m.transpose())
}

impl Automorphism {
    pub fn new(spec: AutomorphismSpec, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::DimensionMismatch { expected: 1, found: 0 });
        }
        let (m, m_inv, odd) = Self::normal_form(&spec, dim)?;
        let mut aut = Automorphism { spec, dim, positive: Vec::new(), negative: Vec::new(), limit_condition: None };
        let base = Power { m: m.clone(), m_inv: m_inv.clone(), odd };
        // α⁻¹ = (φ^e(M⁻¹), e).
        let inv = if odd {
            let (a, b) = phi_exact(&m_inv, &m);
            Power { m: a, m_inv: b, odd }
        } else {
            Power { m: m_inv, m_inv: m, odd }
        };
        aut.positive = Self::power_sequence(&base, dim, &mut aut.limit_condition, 1);
        aut.negative = Self::power_sequence(&inv, dim, &mut aut.limit_condition, -1);
        Ok(aut)
    }

    pub fn identity(dim: usize) -> Self {
        Self::new(AutomorphismSpec::Identity, dim).expect("identity is valid")
    }

    pub fn inner(l: &Matrix) -> Result<Self> {
        Self::new(AutomorphismSpec::Inner { matrix: linalg::to_row_major(l) }, l.nrows())
    }

    pub fn transpose_inverse(dim: usize) -> Self {
        Self::new(AutomorphismSpec::TransposeInverse, dim).expect("transpose-inverse is valid")
    }

    pub fn spec(&self) -> &AutomorphismSpec {
        &self.spec
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Whether `α` is linear on all of `M_d(ℝ)` (no transpose-inverse part).
    pub fn is_linear(&self) -> bool {
        !self.positive[1].odd
    }

    /// Largest `|n|` with a cached power in both directions.
    pub fn cached_range(&self) -> usize {
        self.positive.len().min(self.negative.len()) - 1
    }

    fn normal_form(spec: &AutomorphismSpec, dim: usize) -> Result<(Matrix, Matrix, bool)> {
        Ok(match spec {
            AutomorphismSpec::Identity => (linalg::identity(dim), linalg::identity(dim), false),
            AutomorphismSpec::TransposeInverse => (linalg::identity(dim), linalg::identity(dim), true),
            AutomorphismSpec::Inner { matrix } => {
                let l = linalg::from_row_major(dim, matrix)?;
                let cond = linalg::condition(&l);
                if !cond.is_finite() || cond > CONDITION_LIMIT {
                    return Err(Error::InvalidSystem(format!("inner automorphism matrix is singular (condition {cond:e})")));
                }
                let inv = linalg::invert(&l)?;
                (l, inv, false)
            }
            AutomorphismSpec::Composition { parts } => {
                // Parts apply first to last: α = α_k ∘ … ∘ α_1.
                let mut acc = (linalg::identity(dim), linalg::identity(dim), false);
                for part in parts {
                    let (n, n_inv, f) = Self::normal_form(part, dim)?;
                    acc = Self::compose(&(n, n_inv, f), &acc);
                }
                acc
            }
        })
    }

    /// `(M, e) ∘ (N, f) = (M·φ^e(N), e ⊕ f)`.
    fn compose(outer: &(Matrix, Matrix, bool), inner: &(Matrix, Matrix, bool)) -> (Matrix, Matrix, bool) {
        let (m, m_inv, e) = outer;
        let (n, n_inv, f) = inner;
        let (pn, pn_inv) = if *e { phi_exact(n, n_inv) } else { (n.clone(), n_inv.clone()) };
        (m * &pn, &pn_inv * m_inv, e ^ f)
    }

    fn power_sequence(base: &Power, dim: usize, limit: &mut Option<(i64, f64)>, sign: i64) -> Vec<Power> {
        let mut seq = vec![Power { m: linalg::identity(dim), m_inv: linalg::identity(dim), odd: false }];
        for k in 1..=POWER_CACHE {
            let prev = &seq[k - 1];
            let (m, m_inv, odd) = Self::compose(
                &(base.m.clone(), base.m_inv.clone(), base.odd),
                &(prev.m.clone(), prev.m_inv.clone(), prev.odd),
            );
            let cond = linalg::op_norm(&m) * linalg::op_norm(&m_inv);
            if !cond.is_finite() || cond > CONDITION_LIMIT {
                if limit.is_none() {
                    *limit = Some((sign * k as i64, cond));
                }
                break;
            }
            seq.push(Power { m, m_inv, odd });
        }
        seq
    }

    fn power(&self, n: i64) -> Result<&Power> {
        let table = if n >= 0 { &self.positive } else { &self.negative };
        table.get(n.unsigned_abs() as usize).ok_or_else(|| {
            let condition = match self.limit_condition {
                Some((k, c)) if k.signum() == n.signum() && k.unsigned_abs() <= n.unsigned_abs() => c,
                _ => f64::INFINITY,
            };
            Error::IllConditioned { step: n, condition }
        })
    }

    /// `‖M_n‖·‖M_n⁻¹‖` for the conjugating matrix of `α^n`.
    pub fn power_condition(&self, n: i64) -> Result<f64> {
        let p = self.power(n)?;
        Ok(linalg::op_norm(&p.m) * linalg::op_norm(&p.m_inv))
    }

    /// `α^n(T)`.
    pub fn apply(&self, n: i64, t: &Matrix) -> Result<Matrix> {
        if t.nrows() != self.dim || t.ncols() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: t.nrows() });
        }
        if n == 0 {
            return Ok(t.clone());
        }
        let p = self.power(n)?;
        if p.odd {
            Ok(&p.m * phi(t)? * &p.m_inv)
        } else {
            Ok(&p.m * t * &p.m_inv)
        }
    }

    /// `α^n` extended linearly to arbitrary (possibly singular) matrices;
    /// only defined when `α^n` has no transpose-inverse part.
    pub fn apply_linear(&self, n: i64, t: &Matrix) -> Result<Matrix> {
        let p = self.power(n)?;
        if p.odd {
            return Err(Error::NotCertifiable("automorphism power is not linear".into()));
        }
        Ok(&p.m * t * &p.m_inv)
    }

    /// Certifies growth constants over `|n| ≤ n_max`.
    ///
    /// Powers without a transpose-inverse part are linear conjugations, whose
    /// operator norm on `M_d(ℝ)` (and Lipschitz constant) is exactly
    /// `κ(n) = ‖M_n‖‖M_n⁻¹‖`; the certificate is the exponential upper
    /// envelope of that sequence. Otherwise constants are sampled and the
    /// result is flagged as not certifiable.
    pub fn certify_growth<R: Rng + ?Sized>(&self, n_max: usize, sample_size: usize, rng: &mut R) -> Result<GrowthCertificate> {
        if n_max < 4 {
            return Err(Error::ConfigInvalid(format!("growth certification needs n_max ≥ 4, got {n_max}")));
        }
        if matches!(self.spec, AutomorphismSpec::Identity) {
            return Ok(GrowthCertificate::trivial(n_max));
        }
        let linear = (1..=n_max as i64).all(|n| self.power(n).map(|p| !p.odd).unwrap_or(false));
        if linear {
            let mut samples = Vec::with_capacity(2 * n_max + 1);
            for n in -(n_max as i64)..=(n_max as i64) {
                samples.push((n.unsigned_abs() as f64, self.power_condition(n)?.ln()));
            }
            let env = exp_envelope(&samples);
            return Ok(GrowthCertificate {
                rho: env.rate,
                c_growth: env.constant,
                c_lip: env.constant,
                n_max,
                samples: samples.len(),
                method: GrowthMethod::Exact,
                certifiable: true,
                diagnostic: None,
            });
        }
        let mut growth = Vec::new();
        let mut lip = Vec::new();
        for _ in 0..sample_size.max(1) {
            let t1 = linalg::random_matrix(rng, self.dim, 1e3);
            let e = linalg::random_matrix(rng, self.dim, 1e6) * 1e-3;
            let t2 = &t1 + &e;
            if linalg::condition(&t2) > 1e6 {
                continue;
            }
            for n in -(n_max as i64)..=(n_max as i64) {
                let a1 = self.apply(n, &t1)?;
                let a2 = self.apply(n, &t2)?;
                let t = n.unsigned_abs() as f64;
                growth.push((t, (linalg::op_norm(&a1) / linalg::op_norm(&t1)).ln()));
                lip.push((t, (linalg::op_norm(&(&a1 - &a2)) / linalg::op_norm(&e)).ln()));
            }
        }
        let g = exp_envelope(&growth);
        let l = exp_envelope(&lip);
        Ok(GrowthCertificate {
            rho: g.rate.max(l.rate),
            c_growth: g.constant,
            c_lip: l.constant,
            n_max,
            samples: growth.len(),
            method: GrowthMethod::Empirical,
            certifiable: false,
            diagnostic: Some(
                "transpose-inverse is not norm-Lipschitz on GL(d,R); sampled constants cannot be certified".into(),
            ),
        })
    }
}
