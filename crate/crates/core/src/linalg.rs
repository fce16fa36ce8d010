//! Small dense matrix kernels.
//!
//! All norms are operator 2-norms (largest singular value). Matrices here are
//! at most a handful of rows, so plain SVD is used throughout.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::error::{Error, Result};

pub type Matrix = DMatrix<f64>;
pub type Vector = DVector<f64>;

/// Condition number above which products and automorphism powers are rejected.
pub const CONDITION_LIMIT: f64 = 1e12;

pub fn identity(d: usize) -> Matrix {
    Matrix::identity(d, d)
}

/// Singular values sorted from largest to smallest.
pub fn singular_values(m: &Matrix) -> Vec<f64> {
    let mut s: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Operator 2-norm.
pub fn op_norm(m: &Matrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    if m.nrows() == 1 || m.ncols() == 1 {
        return m.norm();
    }
    singular_values(m)[0]
}

/// `‖M‖·‖M⁻¹‖`, infinite for singular input.
pub fn condition(m: &Matrix) -> f64 {
    let s = singular_values(m);
    let (hi, lo) = (s[0], s[s.len() - 1]);
    if lo == 0.0 {
        f64::INFINITY
    } else {
        hi / lo
    }
}

/// Inverse, rejecting matrices whose condition number exceeds the limit.
pub fn invert(m: &Matrix) -> Result<Matrix> {
    let cond = condition(m);
    if !cond.is_finite() || cond > CONDITION_LIMIT {
        return Err(Error::IllConditioned { step: 0, condition: cond });
    }
    m.clone().try_inverse().ok_or(Error::IllConditioned { step: 0, condition: cond })
}

/// `‖a − b‖ / ‖a‖`, falling back to the absolute difference when `a` vanishes.
pub fn relative_difference(a: &Matrix, b: &Matrix) -> f64 {
    let diff = op_norm(&(a - b));
    let scale = op_norm(a);
    if scale > 0.0 {
        diff / scale
    } else {
        diff
    }
}

pub fn from_row_major(d: usize, values: &[f64]) -> Result<Matrix> {
    if values.len() != d * d {
        return Err(Error::DimensionMismatch { expected: d * d, found: values.len() });
    }
    Ok(Matrix::from_row_slice(d, d, values))
}

pub fn to_row_major(m: &Matrix) -> Vec<f64> {
    let mut out = Vec::with_capacity(m.nrows() * m.ncols());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            out.push(m[(i, j)]);
        }
    }
    out
}

/// Serde adapter storing a square matrix as a flat row-major list.
pub mod row_major {
    use serde::{de::Error as _, Deserialize, Deserializer, Serializer};

    use super::Matrix;

    pub fn serialize<S: Serializer>(m: &Matrix, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(super::to_row_major(m))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Matrix, D::Error> {
        let values = Vec::<f64>::deserialize(d)?;
        let dim = (values.len() as f64).sqrt().round() as usize;
        super::from_row_major(dim, &values).map_err(D::Error::custom)
    }
}

/// `I + scale·E` with `E` uniform in `[-1, 1]`, resampled until its
/// condition number is below `max_condition`.
pub fn random_near_identity<R: Rng + ?Sized>(rng: &mut R, d: usize, scale: f64, max_condition: f64) -> Matrix {
    loop {
        let m = Matrix::from_fn(d, d, |i, j| {
            let e: f64 = rng.random_range(-1.0..1.0);
            if i == j {
                1.0 + scale * e
            } else {
                scale * e
            }
        });
        if condition(&m) < max_condition {
            return m;
        }
    }
}

/// Random matrix with entries uniform in `[-1, 1]` and bounded condition number.
pub fn random_matrix<R: Rng + ?Sized>(rng: &mut R, d: usize, max_condition: f64) -> Matrix {
    loop {
        let m = Matrix::from_fn(d, d, |_, _| rng.random_range(-1.0..1.0));
        if condition(&m) < max_condition {
            return m;
        }
    }
}

/// Orthogonal matrix from the QR factorization of a random matrix.
pub fn random_orthogonal<R: Rng + ?Sized>(rng: &mut R, d: usize) -> Matrix {
    let m = random_matrix(rng, d, 1e6);
    m.qr().q()
}

/// Upper-triangular factor `R` with `G = RᵀR`, so that `vᵀGv = ‖Rv‖²`.
pub fn gram_factor(g: &Matrix) -> Option<Matrix> {
    nalgebra::Cholesky::new(g.clone()).map(|c| c.l().transpose())
}
