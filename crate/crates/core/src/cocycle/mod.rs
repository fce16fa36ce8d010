//! α-twisted cocycles `A_α^n(x)` generated by a matrix field.

mod fields;

use std::fmt;
use std::sync::Arc;

use crate::dynamics::HyperbolicSystem;
use crate::error::{Error, Result};
use crate::linalg::{self, Matrix, CONDITION_LIMIT};
use crate::twisting::Automorphism;

pub use fields::{
    ConstantField, Conjugated, CylinderPerturbation, HolderData, LocallyConstant, MatrixField, SymbolicSeries,
    TorusSmooth, TrigTerm, GENERATOR_CONDITION_LIMIT,
};

/// Generator `A`, automorphism `α` and base map `f`, with
/// `A^{m+n}(x) = A^n(f^m x)·α^n(A^m(x))`.
pub struct TwistedCocycle<S: HyperbolicSystem> {
    base: Arc<S>,
    field: Arc<dyn MatrixField<S>>,
    alpha: Arc<Automorphism>,
}

impl<S: HyperbolicSystem> Clone for TwistedCocycle<S> {
    fn clone(&self) -> Self {
        TwistedCocycle { base: self.base.clone(), field: self.field.clone(), alpha: self.alpha.clone() }
    }
}

impl<S: HyperbolicSystem> fmt::Debug for TwistedCocycle<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TwistedCocycle")
            .field("base", &self.base.name())
            .field("field", &self.field)
            .field("alpha", &self.alpha)
            .finish()
    }
}

fn monitor(p: &Matrix, step: i64) -> Result<()> {
    let cond = linalg::condition(p);
    if !cond.is_finite() || cond > CONDITION_LIMIT {
        return Err(Error::IllConditioned { step, condition: cond });
    }
    Ok(())
}

impl<S: HyperbolicSystem> TwistedCocycle<S> {
    pub fn new(base: Arc<S>, field: Arc<dyn MatrixField<S>>, alpha: Arc<Automorphism>) -> Result<Self> {
        if field.dim() != alpha.dim() {
            return Err(Error::DimensionMismatch { expected: alpha.dim(), found: field.dim() });
        }
        Ok(TwistedCocycle { base, field, alpha })
    }

    pub fn base(&self) -> &Arc<S> {
        &self.base
    }

    pub fn field(&self) -> &Arc<dyn MatrixField<S>> {
        &self.field
    }

    pub fn alpha(&self) -> &Arc<Automorphism> {
        &self.alpha
    }

    pub fn dim(&self) -> usize {
        self.field.dim()
    }

    pub fn holder(&self) -> HolderData {
        self.field.holder(&self.base)
    }

    /// `A(x)`.
    pub fn generator(&self, x: &S::Point) -> Result<Matrix> {
        self.field.value(&self.base, x)
    }

    /// `A_α^n(x)` for any integer `n`.
    ///
    /// Positive powers are accumulated left to right as
    /// `A(f^{n−1}x)·α(A(f^{n−2}x))···α^{n−1}(A(x))`; negative powers use
    /// `A^n(x) = α^n(A^{−n}(f^n x)⁻¹)`.
    pub fn evaluate(&self, x: &S::Point, n: i64) -> Result<Matrix> {
        if n == 0 {
            return Ok(linalg::identity(self.dim()));
        }
        if n < 0 {
            let y = self.base.iterate(x, n);
            let forward = self.evaluate(&y, -n)?;
            let inv = linalg::invert(&forward).map_err(|e| match e {
                Error::IllConditioned { condition, .. } => Error::IllConditioned { step: n, condition },
                other => other,
            })?;
            return self.alpha.apply(n, &inv);
        }
        let mut p = self.generator(&self.base.iterate(x, n - 1))?;
        for j in 1..n {
            let factor = self.alpha.apply(j, &self.generator(&self.base.iterate(x, n - 1 - j))?)?;
            p *= factor;
            monitor(&p, j)?;
        }
        Ok(p)
    }

    /// `‖A^{m+n}(x) − A^n(f^m x)·α^n(A^m(x))‖ / ‖A^{m+n}(x)‖`.
    pub fn law_residual(&self, x: &S::Point, m: i64, n: i64) -> Result<f64> {
        let lhs = self.evaluate(x, m + n)?;
        let rhs = self.evaluate(&self.base.iterate(x, m), n)? * self.alpha.apply(n, &self.evaluate(x, m)?)?;
        Ok(linalg::relative_difference(&lhs, &rhs))
    }

    /// `α^{−(n+1)}(A(f^n x))`, the factor with
    /// `α^{−(n+1)}(A^{n+1}(x)) = factor·α^{−n}(A^n(x))`.
    pub fn stable_factor(&self, x: &S::Point, n: usize) -> Result<Matrix> {
        let a = self.generator(&self.base.iterate(x, n as i64))?;
        self.alpha.apply(-(n as i64) - 1, &a)
    }

    /// `α^n(A(f^{−n−1}x)⁻¹)`, the factor with
    /// `α^{n+1}(A^{−(n+1)}(x)) = factor·α^n(A^{−n}(x))`.
    pub fn unstable_factor(&self, x: &S::Point, n: usize) -> Result<Matrix> {
        let a = self.generator(&self.base.iterate(x, -(n as i64) - 1))?;
        self.alpha.apply(n as i64, &linalg::invert(&a)?)
    }

    /// One step of the skew product `F(x, g) = (f(x), A(x)·α(g))`.
    pub fn skew_step(&self, x: &S::Point, g: &Matrix) -> Result<(S::Point, Matrix)> {
        Ok((self.base.iterate(x, 1), self.generator(x)? * self.alpha.apply(1, g)?))
    }

    /// The cocycle generated by `B(x) = Q(f x)⁻¹·A(x)·α(Q(x))`, so that
    /// `A^n(x) = Q(f^n x)·B^n(x)·α^n(Q(x))⁻¹`.
    ///
    /// `Q` is checked for invertibility on the fixed point and on every
    /// point of period at most three.
    pub fn conjugate(&self, q: Arc<dyn MatrixField<S>>) -> Result<TwistedCocycle<S>> {
        if q.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: q.dim() });
        }
        let mut probe = vec![self.base.fixed_point()];
        for n in 1..=3 {
            probe.extend(self.base.periodic_points(n).unwrap_or_default());
        }
        for p in &probe {
            let v = q.value(&self.base, p)?;
            let cond = linalg::condition(&v);
            if !cond.is_finite() || cond > GENERATOR_CONDITION_LIMIT {
                return Err(Error::SingularQ(format!("condition {cond:e} at {}", self.base.describe(p))));
            }
        }
        let field = Conjugated { base: self.field.clone(), q, alpha: self.alpha.clone() };
        Ok(TwistedCocycle { base: self.base.clone(), field: Arc::new(field), alpha: self.alpha.clone() })
    }

    /// Same base and automorphism, different generator.
    pub fn with_field(&self, field: Arc<dyn MatrixField<S>>) -> Result<TwistedCocycle<S>> {
        Self::new(self.base.clone(), field, self.alpha.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{SftSystem, SymbolicPoint, TorusSystem};
    use crate::twisting::AutomorphismSpec;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn ln2() -> f64 {
        std::f64::consts::LN_2
    }

    fn sft() -> Arc<SftSystem> {
        Arc::new(SftSystem::full_shift(2, ln2()).unwrap())
    }

    fn alphas(rng: &mut ChaCha8Rng, d: usize) -> Vec<Arc<Automorphism>> {
        let l = linalg::random_near_identity(rng, d, 0.1, 1.5);
        vec![
            Arc::new(Automorphism::identity(d)),
            Arc::new(Automorphism::inner(&l).unwrap()),
            Arc::new(Automorphism::transpose_inverse(d)),
            Arc::new(
                Automorphism::new(
                    AutomorphismSpec::Composition {
                        parts: vec![AutomorphismSpec::TransposeInverse, AutomorphismSpec::Inner { matrix: linalg::to_row_major(&l) }],
                    },
                    d,
                )
                .unwrap(),
            ),
        ]
    }

    #[test]
    fn zero_power_is_identity() {
        let sys = sft();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let c = TwistedCocycle::new(sys.clone(), Arc::new(LocallyConstant::random(&sys, 1, 3, 0.2, &mut rng)), Arc::new(Automorphism::identity(3))).unwrap();
        assert_eq!(c.evaluate(&sys.random_point(&mut rng, 5), 0).unwrap(), linalg::identity(3));
    }

    #[test]
    fn untwisted_constant_gives_matrix_powers() {
        let sys = sft();
        let a0 = Matrix::from_row_slice(2, 2, &[1.1, 0.3, -0.2, 0.9]);
        let c = TwistedCocycle::new(sys.clone(), Arc::new(ConstantField::new(a0.clone()).unwrap()), Arc::new(Automorphism::identity(2))).unwrap();
        let x = sys.fixed_point();
        for n in -6..=6i64 {
            let expected = if n >= 0 { a0.pow(n as u32) } else { a0.clone().try_inverse().unwrap().pow((-n) as u32) };
            assert!(linalg::relative_difference(&expected, &c.evaluate(&x, n).unwrap()) < 1e-13);
        }
    }

    #[test]
    fn inner_twist_of_constant_telescopes() {
        let sys = sft();
        let a0 = Matrix::from_row_slice(2, 2, &[1.1, 0.3, -0.2, 0.9]);
        let l = Matrix::from_row_slice(2, 2, &[1.2, 0.1, 0.0, 0.8]);
        let c = TwistedCocycle::new(sys.clone(), Arc::new(ConstantField::new(a0.clone()).unwrap()), Arc::new(Automorphism::inner(&l).unwrap())).unwrap();
        let x = sys.fixed_point();
        let l_inv = l.clone().try_inverse().unwrap();
        for n in 1..=6u32 {
            let expected = (&a0 * &l).pow(n) * l_inv.pow(n);
            assert!(linalg::relative_difference(&expected, &c.evaluate(&x, n as i64).unwrap()) < 1e-12);
        }
    }

    #[test]
    fn law_is_trivial_at_zero() {
        let sys = sft();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let c = TwistedCocycle::new(sys.clone(), Arc::new(LocallyConstant::random(&sys, 1, 2, 0.2, &mut rng)), Arc::new(Automorphism::transpose_inverse(2))).unwrap();
        let x = sys.random_point(&mut rng, 6);
        assert_eq!(c.law_residual(&x, 0, 4).unwrap(), 0.0);
        assert_eq!(c.law_residual(&x, 3, 0).unwrap(), 0.0);
    }

    #[test]
    fn conjugation_sandwich_identity() {
        let sys = sft();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for alpha in alphas(&mut rng, 2) {
            let a = TwistedCocycle::new(sys.clone(), Arc::new(LocallyConstant::random(&sys, 1, 2, 0.3, &mut rng)), alpha.clone()).unwrap();
            let q: Arc<dyn MatrixField<SftSystem>> = Arc::new(LocallyConstant::random(&sys, 1, 2, 0.3, &mut rng));
            let b = a.conjugate(q.clone()).unwrap();
            for _ in 0..10 {
                let x = sys.random_point(&mut rng, 10);
                for n in -8..=8i64 {
                    let lhs = a.evaluate(&x, n).unwrap();
                    let qn = q.value(&sys, &sys.iterate(&x, n)).unwrap();
                    let q0 = alpha.apply(n, &q.value(&sys, &x).unwrap()).unwrap().try_inverse().unwrap();
                    let rhs = qn * b.evaluate(&x, n).unwrap() * q0;
                    assert!(linalg::relative_difference(&lhs, &rhs) < 1e-10);
                }
            }
        }
    }

    #[test]
    fn conjugation_by_identity_and_of_identity() {
        let sys = sft();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = TwistedCocycle::new(sys.clone(), Arc::new(LocallyConstant::random(&sys, 1, 2, 0.3, &mut rng)), Arc::new(Automorphism::identity(2))).unwrap();
        let b = a.conjugate(Arc::new(ConstantField::identity(2))).unwrap();
        let x = sys.random_point(&mut rng, 8);
        assert!(linalg::relative_difference(&a.generator(&x).unwrap(), &b.generator(&x).unwrap()) < 1e-15);

        let id = TwistedCocycle::new(sys.clone(), Arc::new(ConstantField::identity(2)), Arc::new(Automorphism::identity(2))).unwrap();
        let q = LocallyConstant::random(&sys, 1, 2, 0.3, &mut rng);
        let b = id.conjugate(Arc::new(q.clone())).unwrap();
        let expected = q.lookup(&sys.iterate(&x, 1)).unwrap().clone().try_inverse().unwrap() * q.lookup(&x).unwrap();
        assert!(linalg::relative_difference(&expected, &b.generator(&x).unwrap()) < 1e-14);
    }

    #[test]
    fn singular_conjugator_is_rejected() {
        let sys = sft();
        let id = TwistedCocycle::new(sys.clone(), Arc::new(ConstantField::identity(2)), Arc::new(Automorphism::identity(2))).unwrap();
        let q = SymbolicSeries::new(Matrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1e-9]), vec![Matrix::zeros(2, 2); 2], 0.5, 1).unwrap_err();
        assert!(matches!(q, Error::InvalidSystem(_)));
        #[derive(Debug)]
        struct Degenerate;
        impl MatrixField<SftSystem> for Degenerate {
            fn dim(&self) -> usize {
                2
            }
            fn value(&self, _: &SftSystem, x: &SymbolicPoint) -> Result<Matrix> {
                Ok(Matrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, x.symbol(0) as f64]))
            }
            fn holder(&self, _: &SftSystem) -> HolderData {
                HolderData { nu: 1.0, constant: None }
            }
        }
        assert!(matches!(id.conjugate(Arc::new(Degenerate)), Err(Error::SingularQ(_))));
    }

    #[test]
    fn skew_product_reproduces_cocycle() {
        let sys = sft();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for alpha in alphas(&mut rng, 2) {
            let c = TwistedCocycle::new(sys.clone(), Arc::new(LocallyConstant::random(&sys, 1, 2, 0.3, &mut rng)), alpha).unwrap();
            let x = sys.random_point(&mut rng, 10);
            let (mut y, mut g) = (x.clone(), linalg::identity(2));
            for n in 1..=10 {
                (y, g) = c.skew_step(&y, &g).unwrap();
                assert_eq!(y, sys.iterate(&x, n));
                assert!(linalg::relative_difference(&c.evaluate(&x, n).unwrap(), &g) < 1e-12);
            }
        }
    }

    #[test]
    fn ill_conditioned_products_report_the_step() {
        let sys = sft();
        let a0 = Matrix::from_row_slice(2, 2, &[50.0, 0.0, 0.0, 0.02]);
        let c = TwistedCocycle::new(sys.clone(), Arc::new(ConstantField::new(a0).unwrap()), Arc::new(Automorphism::identity(2))).unwrap();
        match c.evaluate(&sys.fixed_point(), 10) {
            Err(Error::IllConditioned { step, .. }) => assert_eq!(step, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn torus_cocycle_law() {
        let sys = Arc::new(TorusSystem::cat_map());
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let l = linalg::random_near_identity(&mut rng, 2, 0.1, 1.5);
        let c = TwistedCocycle::new(sys.clone(), Arc::new(TorusSmooth::random(2, 0.05, false, &mut rng).unwrap()), Arc::new(Automorphism::inner(&l).unwrap())).unwrap();
        for _ in 0..20 {
            let x = sys.random_point(&mut rng);
            let (m, n) = (rng.random_range(-8..=8), rng.random_range(-8..=8));
            assert!(c.law_residual(&x, m, n).unwrap() < 1e-10);
        }
    }

    #[test]
    fn step_factors_rebuild_normalized_products() {
        let sys = sft();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for alpha in alphas(&mut rng, 2) {
            let c = TwistedCocycle::new(sys.clone(), Arc::new(LocallyConstant::random(&sys, 1, 2, 0.3, &mut rng)), alpha.clone()).unwrap();
            let x = sys.random_point(&mut rng, 10);
            let (mut y, mut u) = (linalg::identity(2), linalg::identity(2));
            for n in 0..8usize {
                y = c.stable_factor(&x, n).unwrap() * y;
                u = c.unstable_factor(&x, n).unwrap() * u;
                let k = n as i64 + 1;
                let ye = alpha.apply(-k, &c.evaluate(&x, k).unwrap()).unwrap();
                let ue = alpha.apply(k, &c.evaluate(&x, -k).unwrap()).unwrap();
                assert!(linalg::relative_difference(&ye, &y) < 1e-12);
                assert!(linalg::relative_difference(&ue, &u) < 1e-12);
            }
        }
    }

    proptest! {
        #[test]
        fn negative_branch_is_consistent(seed in 0u64..100, n in 1i64..=8) {
            let sys = sft();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for alpha in alphas(&mut rng, 3) {
                let c = TwistedCocycle::new(sys.clone(), Arc::new(LocallyConstant::random(&sys, 1, 3, 0.3, &mut rng)), alpha.clone()).unwrap();
                let x = sys.random_point(&mut rng, 10);
                let lhs = c.evaluate(&x, -n).unwrap();
                let inner = c.evaluate(&sys.iterate(&x, -n), n).unwrap().try_inverse().unwrap();
                let rhs = alpha.apply(-n, &inner).unwrap();
                prop_assert!(linalg::relative_difference(&lhs, &rhs) < 1e-10);
            }
        }
    }
}
