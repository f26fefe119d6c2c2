//! Concrete oracles: least-squares smooth term, l1 and l1-l2 proximal
//! operators, Euclidean-norm subgradient, and trivial building blocks.

use ndarray::{Array1, Array2};

use crate::problem::{DenseVector, ProxOracle, SmoothOracle, SubgradOracle};
use crate::{Error, Result};

/// Design matrix and observations for f(x) = (1/2)||Ax - b||^2.
#[derive(Debug, Clone)]
pub struct LeastSquaresData {
    a: Array2<f64>,
    b: Array1<f64>,
}

impl LeastSquaresData {
    pub fn new(a: Array2<f64>, b: Array1<f64>) -> Result<Self> {
        if a.nrows() == 0 || a.ncols() == 0 {
            return Err(Error::InvalidParams("empty design matrix".into()));
        }
        if a.nrows() != b.len() {
            return Err(Error::DimensionMismatch { expected: a.nrows(), got: b.len() });
        }
        if a.iter().chain(b.iter()).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { context: "least-squares data" });
        }
        Ok(Self { a, b })
    }

    pub fn matrix(&self) -> &Array2<f64> {
        &self.a
    }

    pub fn rhs(&self) -> &Array1<f64> {
        &self.b
    }

    pub fn ncols(&self) -> usize {
        self.a.ncols()
    }
}

impl SmoothOracle for LeastSquaresData {
    // Gradient as A^T(Ax - b): two mat-vecs, no normal matrix.
    fn value_grad(&self, x: &DenseVector) -> (f64, DenseVector) {
        assert_eq!(x.len(), self.a.ncols(), "least-squares input dimension mismatch");
        let r = self.a.dot(x) - &self.b;
        let value = 0.5 * r.dot(&r);
        let grad = self.a.t().dot(&r);
        (value, grad)
    }
}

/// Componentwise sign(z_i) * max(|z_i| - t, 0); the exact prox of t||.||_1.
pub fn soft_threshold(z: &DenseVector, t: f64) -> DenseVector {
    assert!(t > 0.0, "soft_threshold requires t > 0, got {t}");
    z.mapv(|v| v.signum() * (v.abs() - t).max(0.0))
}

fn l1l2_subproblem_obj(x: &DenseVector, z: &DenseVector, t: f64) -> f64 {
    let diff = x - z;
    let l1: f64 = x.iter().map(|v| v.abs()).sum();
    let l2 = x.dot(x).sqrt();
    0.5 * diff.dot(&diff) + t * (l1 - l2)
}

fn lowest_nonzero_index(x: &DenseVector) -> usize {
    x.iter().position(|&v| v != 0.0).unwrap_or(x.len())
}

/// Global minimizer of (1/2)||x - z||^2 + t(||x||_1 - ||x||).
///
/// Two closed-form candidates exist: the inflated soft-threshold point
/// w * (||w|| + t)/||w|| with w = soft_threshold(z, t) when ||z||_inf > t,
/// and the one-sparse point keeping a largest-magnitude entry of z. The
/// candidate with the lower subproblem objective is returned; exact ties go
/// to the candidate whose lowest nonzero index is smallest.
pub fn prox_l1_minus_l2(z: &DenseVector, t: f64) -> DenseVector {
    assert!(t > 0.0, "prox_l1_minus_l2 requires t > 0, got {t}");
    let n = z.len();
    let z_inf = z.iter().fold(0.0f64, |m, v| m.max(v.abs()));

    let mut candidates: Vec<DenseVector> = Vec::with_capacity(3);
    candidates.push(Array1::zeros(n));
    if z_inf > 0.0 {
        // One-sparse candidate: keep the first largest-magnitude entry as is.
        let i = z.iter().position(|&v| v.abs() == z_inf).unwrap();
        let mut single = Array1::zeros(n);
        single[i] = z[i];
        candidates.push(single);
    }
    if z_inf > t {
        let w = soft_threshold(z, t);
        let w_norm = w.dot(&w).sqrt();
        candidates.push(&w * ((w_norm + t) / w_norm));
    }

    let mut best: Option<(f64, usize, DenseVector)> = None;
    for cand in candidates {
        let obj = l1l2_subproblem_obj(&cand, z, t);
        let idx = lowest_nonzero_index(&cand);
        let better = match &best {
            None => true,
            Some((bo, bi, _)) => obj < *bo || (obj == *bo && idx < *bi),
        };
        if better {
            best = Some((obj, idx, cand));
        }
    }
    best.unwrap().2
}

/// A subgradient of lambda*||.|| at x: lambda*x/||x||, or 0 at the origin.
pub fn norm_subgradient(x: &DenseVector, lambda: f64) -> DenseVector {
    assert!(lambda > 0.0, "norm_subgradient requires lambda > 0, got {lambda}");
    let norm = x.dot(x).sqrt();
    if norm > 0.0 {
        x.mapv(|v| lambda * v / norm)
    } else {
        Array1::zeros(x.len())
    }
}

/// P1(x) = lambda * ||x||_1, with soft-threshold prox.
#[derive(Debug, Clone, Copy)]
pub struct L1Penalty {
    pub lambda: f64,
}

impl ProxOracle for L1Penalty {
    fn value(&self, x: &DenseVector) -> f64 {
        self.lambda * x.iter().map(|v| v.abs()).sum::<f64>()
    }

    fn prox(&self, z: &DenseVector, t: f64) -> DenseVector {
        soft_threshold(z, t * self.lambda)
    }
}

/// P1(x) = lambda * (||x||_1 - ||x||), with the closed-form prox.
#[derive(Debug, Clone, Copy)]
pub struct L1MinusL2Penalty {
    pub lambda: f64,
}

impl ProxOracle for L1MinusL2Penalty {
    fn value(&self, x: &DenseVector) -> f64 {
        let l1: f64 = x.iter().map(|v| v.abs()).sum();
        let l2 = x.dot(x).sqrt();
        self.lambda * (l1 - l2)
    }

    fn prox(&self, z: &DenseVector, t: f64) -> DenseVector {
        prox_l1_minus_l2(z, t * self.lambda)
    }
}

/// P2(x) = lambda * ||x||, with the subgradient selector above.
#[derive(Debug, Clone, Copy)]
pub struct EuclideanNorm {
    pub lambda: f64,
}

impl SubgradOracle for EuclideanNorm {
    fn value(&self, x: &DenseVector) -> f64 {
        self.lambda * x.dot(x).sqrt()
    }

    fn subgrad(&self, x: &DenseVector) -> DenseVector {
        norm_subgradient(x, self.lambda)
    }
}

/// The identically-zero function, usable as any of the three oracles.
#[derive(Debug, Clone, Copy)]
pub struct ZeroFunction;

impl SmoothOracle for ZeroFunction {
    fn value_grad(&self, x: &DenseVector) -> (f64, DenseVector) {
        (0.0, Array1::zeros(x.len()))
    }
}

impl ProxOracle for ZeroFunction {
    fn value(&self, _x: &DenseVector) -> f64 {
        0.0
    }

    fn prox(&self, z: &DenseVector, _t: f64) -> DenseVector {
        z.clone()
    }
}

impl SubgradOracle for ZeroFunction {
    fn value(&self, _x: &DenseVector) -> f64 {
        0.0
    }

    fn subgrad(&self, x: &DenseVector) -> DenseVector {
        Array1::zeros(x.len())
    }
}

/// f(x) = (1/2)||x||^2.
#[derive(Debug, Clone, Copy)]
pub struct HalfSquaredNorm;

impl SmoothOracle for HalfSquaredNorm {
    fn value_grad(&self, x: &DenseVector) -> (f64, DenseVector) {
        (0.5 * x.dot(x), x.clone())
    }
}

/// f(x) = (1/2)||x - c||^2.
#[derive(Debug, Clone)]
pub struct ShiftedQuadratic {
    pub center: DenseVector,
}

impl SmoothOracle for ShiftedQuadratic {
    fn value_grad(&self, x: &DenseVector) -> (f64, DenseVector) {
        let d = x - &self.center;
        (0.5 * d.dot(&d), d)
    }
}
