//! Composite problem abstraction: F(x) = f(x) + P1(x) - P2(x).
//!
//! The three terms are exposed through oracle traits. Oracles are immutable
//! after construction and safe to evaluate concurrently on distinct inputs.

use std::sync::Arc;

use ndarray::Array1;

use crate::{Error, Result};

/// Dense real vector. All solver state and oracle inputs/outputs use this.
pub type DenseVector = Array1<f64>;

/// Smooth term f: value and gradient in one call.
pub trait SmoothOracle: Send + Sync {
    fn value_grad(&self, x: &DenseVector) -> (f64, DenseVector);
}

/// Prox-friendly term P1. The value may be +inf outside the domain, never
/// -inf. `prox(z, t)` must return a global minimizer of
/// (1/2)||x - z||^2 + t * P1(x) for t > 0.
pub trait ProxOracle: Send + Sync {
    fn value(&self, x: &DenseVector) -> f64;
    fn prox(&self, z: &DenseVector, t: f64) -> DenseVector;
}

/// Convex term P2 with a deterministic subgradient selector: `subgrad(x)`
/// returns one fixed element of the subdifferential at x.
pub trait SubgradOracle: Send + Sync {
    fn value(&self, x: &DenseVector) -> f64;
    fn subgrad(&self, x: &DenseVector) -> DenseVector;
}

/// Bundles the three oracles and the ambient dimension.
#[derive(Clone)]
pub struct CompositeProblem {
    pub smooth: Arc<dyn SmoothOracle>,
    pub p1: Arc<dyn ProxOracle>,
    pub p2: Arc<dyn SubgradOracle>,
    pub dimension: usize,
}

impl CompositeProblem {
    pub fn new(
        smooth: Arc<dyn SmoothOracle>,
        p1: Arc<dyn ProxOracle>,
        p2: Arc<dyn SubgradOracle>,
        dimension: usize,
    ) -> Self {
        Self { smooth, p1, p2, dimension }
    }

    fn check_dim(&self, x: &DenseVector) -> Result<()> {
        if x.len() != self.dimension {
            return Err(Error::DimensionMismatch { expected: self.dimension, got: x.len() });
        }
        Ok(())
    }

    /// F(x) = f(x) + P1(x) - P2(x). Returns +inf when x is outside dom P1.
    pub fn objective(&self, x: &DenseVector) -> Result<f64> {
        self.check_dim(x)?;
        let (f, _) = self.smooth.value_grad(x);
        if !f.is_finite() {
            return Err(Error::NonFinite { context: "smooth value" });
        }
        let p1 = self.p1.value(x);
        if p1.is_nan() || p1 == f64::NEG_INFINITY {
            return Err(Error::NonFinite { context: "P1 value" });
        }
        let p2 = self.p2.value(x);
        if !p2.is_finite() {
            return Err(Error::NonFinite { context: "P2 value" });
        }
        Ok(f + p1 - p2)
    }

    /// Value and gradient of the smooth part, with dimension and finiteness
    /// checks.
    pub fn smooth_value_grad(&self, x: &DenseVector) -> Result<(f64, DenseVector)> {
        self.check_dim(x)?;
        let (f, g) = self.smooth.value_grad(x);
        if !f.is_finite() || g.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { context: "smooth value/gradient" });
        }
        if g.len() != self.dimension {
            return Err(Error::DimensionMismatch { expected: self.dimension, got: g.len() });
        }
        Ok((f, g))
    }
}

/// Free-function form of [`CompositeProblem::objective`].
pub fn eval_objective(problem: &CompositeProblem, x: &DenseVector) -> Result<f64> {
    problem.objective(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ops::{HalfSquaredNorm, ZeroFunction};
    use ndarray::array;

    fn quad_problem(dim: usize) -> CompositeProblem {
        CompositeProblem::new(
            Arc::new(HalfSquaredNorm),
            Arc::new(ZeroFunction),
            Arc::new(ZeroFunction),
            dim,
        )
    }

    #[test]
    fn objective_of_plain_quadratic() {
        let p = quad_problem(2);
        let v = p.objective(&array![3.0, 4.0]).unwrap();
        assert_eq!(v, 12.5);
    }

    #[test]
    fn objective_rejects_wrong_dimension() {
        let p = quad_problem(2);
        assert!(matches!(
            p.objective(&array![1.0, 2.0, 3.0]),
            Err(Error::DimensionMismatch { expected: 2, got: 3 })
        ));
    }

    #[test]
    fn smooth_value_grad_quadratic() {
        let p = quad_problem(2);
        let (v, g) = p.smooth_value_grad(&array![1.0, -2.0]).unwrap();
        assert_eq!(v, 2.5);
        assert_eq!(g, array![1.0, -2.0]);
    }

    #[test]
    fn constant_zero_smooth() {
        let p = CompositeProblem::new(
            Arc::new(ZeroFunction),
            Arc::new(ZeroFunction),
            Arc::new(ZeroFunction),
            3,
        );
        let (v, g) = p.smooth_value_grad(&array![1.0, 2.0, 3.0]).unwrap();
        assert_eq!(v, 0.0);
        assert_eq!(g, array![0.0, 0.0, 0.0]);
    }
}
