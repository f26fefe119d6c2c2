//! Random sparse regression instances: b = A*x_true + noise, with A dense
//! Gaussian, and the two decompositions of the l1-l2 regularized
//! least-squares objective
//!
//!   F(x) = (1/2)||Ax - b||^2 + lambda*(||x||_1 - ||x||).
//!
//! Generation is deterministic given the seed: ChaCha8 as the base stream
//! (split per trial via the stream index) and the ziggurat transform of
//! `rand_distr::StandardNormal` for Gaussian draws.

use std::io::{BufRead, Write};
use std::sync::Arc;

use ndarray::{Array1, Array2};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::ops::{EuclideanNorm, L1MinusL2Penalty, L1Penalty, LeastSquaresData, ZeroFunction};
use crate::problem::{CompositeProblem, DenseVector};
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct Instance {
    pub a: Array2<f64>,
    pub b: DenseVector,
    pub x_true: DenseVector,
    pub seed: u64,
    pub n: usize,
    pub m: usize,
    pub s: usize,
    pub noise_scale: f64,
}

/// RNG stream for trial `trial` of base seed `seed`.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Generate one instance: A has i.i.d. standard Gaussian entries, x_true is
/// s-sparse with a uniformly chosen support and Gaussian nonzeros, and
/// b = A*x_true + noise_scale * z with z standard Gaussian.
pub fn generate_instance(
    n: usize,
    m: usize,
    s: usize,
    noise_scale: f64,
    seed: u64,
) -> Result<Instance> {
    generate_instance_stream(n, m, s, noise_scale, seed, 0)
}

/// Like [`generate_instance`] but drawing from the per-trial stream.
pub fn generate_instance_stream(
    n: usize,
    m: usize,
    s: usize,
    noise_scale: f64,
    seed: u64,
    trial: u64,
) -> Result<Instance> {
    if !(1 <= s && s <= m && m <= n) {
        return Err(Error::InvalidParams(format!(
            "need 1 <= s <= m <= n, got n={n}, m={m}, s={s}"
        )));
    }
    let mut rng = trial_rng(seed, trial);
    let a = Array2::from_shape_simple_fn((m, n), || rng.sample::<f64, _>(StandardNormal));
    let support = sample(&mut rng, n, s);
    let mut x_true = Array1::zeros(n);
    for i in support {
        x_true[i] = rng.sample::<f64, _>(StandardNormal);
    }
    let noise = Array1::from_shape_simple_fn(m, || rng.sample::<f64, _>(StandardNormal));
    let b = a.dot(&x_true) + &(noise * noise_scale);
    Ok(Instance { a, b, x_true, seed, n, m, s, noise_scale })
}

impl Instance {
    pub fn least_squares(&self) -> Result<LeastSquaresData> {
        LeastSquaresData::new(self.a.clone(), self.b.clone())
    }

    /// ||A^T b||_inf, the quantity in the Decomposition II validity check.
    pub fn atb_inf_norm(&self) -> f64 {
        self.a.t().dot(&self.b).iter().fold(0.0f64, |acc, v| acc.max(v.abs()))
    }

    /// Whether 2*lambda < ||A^T b||_inf, the sufficient condition under
    /// which Decomposition II is known to be valid.
    pub fn dc_condition_holds(&self, lambda: f64) -> bool {
        2.0 * lambda < self.atb_inf_norm()
    }
}

/// Decomposition I: f least squares, P1 = lambda*(||.||_1 - ||.||), P2 = 0.
pub fn decomposition_i(inst: &Instance, lambda: f64) -> Result<CompositeProblem> {
    assert!(lambda > 0.0);
    Ok(CompositeProblem::new(
        Arc::new(inst.least_squares()?),
        Arc::new(L1MinusL2Penalty { lambda }),
        Arc::new(ZeroFunction),
        inst.n,
    ))
}

/// Decomposition II: f least squares, P1 = lambda*||.||_1, P2 = lambda*||.||.
/// Logs a warning when the sufficient validity condition
/// 2*lambda < ||A^T b||_inf fails (the condition is not necessary, so this
/// is diagnostic only).
pub fn decomposition_ii(inst: &Instance, lambda: f64) -> Result<CompositeProblem> {
    assert!(lambda > 0.0);
    if !inst.dc_condition_holds(lambda) {
        log::warn!(
            "decomposition II validity condition 2*lambda < ||A^T b||_inf fails: 2*{} >= {}",
            lambda,
            inst.atb_inf_norm()
        );
    }
    Ok(CompositeProblem::new(
        Arc::new(inst.least_squares()?),
        Arc::new(L1Penalty { lambda }),
        Arc::new(EuclideanNorm { lambda }),
        inst.n,
    ))
}

/// Text dump for cross-implementation fixtures: header `n m s seed noise`,
/// then A row-major, then b, then (index, value) pairs of x_true.
pub fn write_instance<W: Write>(inst: &Instance, mut w: W) -> Result<()> {
    writeln!(w, "{} {} {} {} {}", inst.n, inst.m, inst.s, inst.seed, inst.noise_scale)?;
    for row in inst.a.rows() {
        let line: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
        writeln!(w, "{}", line.join(" "))?;
    }
    let bline: Vec<String> = inst.b.iter().map(|v| format!("{v}")).collect();
    writeln!(w, "{}", bline.join(" "))?;
    for (i, v) in inst.x_true.iter().enumerate() {
        if *v != 0.0 {
            writeln!(w, "{i} {v}")?;
        }
    }
    Ok(())
}

/// Inverse of [`write_instance`].
pub fn read_instance<R: BufRead>(r: R) -> Result<Instance> {
    let bad = |msg: &str| Error::Config(format!("instance dump: {msg}"));
    let mut lines = r.lines();
    let header = lines.next().ok_or_else(|| bad("missing header"))??;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 5 {
        return Err(bad("header must be `n m s seed noise`"));
    }
    let n: usize = fields[0].parse().map_err(|_| bad("bad n"))?;
    let m: usize = fields[1].parse().map_err(|_| bad("bad m"))?;
    let s: usize = fields[2].parse().map_err(|_| bad("bad s"))?;
    let seed: u64 = fields[3].parse().map_err(|_| bad("bad seed"))?;
    let noise_scale: f64 = fields[4].parse().map_err(|_| bad("bad noise"))?;

    let mut a = Array2::zeros((m, n));
    for i in 0..m {
        let line = lines.next().ok_or_else(|| bad("missing matrix row"))??;
        let vals: Vec<f64> = line
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| bad("bad matrix entry")))
            .collect::<Result<_>>()?;
        if vals.len() != n {
            return Err(bad("matrix row length mismatch"));
        }
        for (j, v) in vals.into_iter().enumerate() {
            a[(i, j)] = v;
        }
    }
    let bline = lines.next().ok_or_else(|| bad("missing rhs"))??;
    let b: Array1<f64> = bline
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| bad("bad rhs entry")))
        .collect::<Result<Vec<f64>>>()?
        .into();
    if b.len() != m {
        return Err(bad("rhs length mismatch"));
    }
    let mut x_true = Array1::zeros(n);
    for line in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let mut it = line.split_whitespace();
        let i: usize = it.next().ok_or_else(|| bad("bad support row"))?.parse()
            .map_err(|_| bad("bad support index"))?;
        let v: f64 = it.next().ok_or_else(|| bad("bad support row"))?.parse()
            .map_err(|_| bad("bad support value"))?;
        if i >= n {
            return Err(bad("support index out of range"));
        }
        x_true[i] = v;
    }
    Ok(Instance { a, b, x_true, seed, n, m, s, noise_scale })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn shapes_and_support_size() {
        let inst = generate_instance(10, 5, 2, 0.01, 7).unwrap();
        assert_eq!(inst.a.dim(), (5, 10));
        assert_eq!(inst.b.len(), 5);
        assert_eq!(inst.x_true.iter().filter(|v| **v != 0.0).count(), 2);
    }

    #[test]
    fn zero_noise_is_exact() {
        let inst = generate_instance(8, 4, 2, 0.0, 3).unwrap();
        let r = inst.a.dot(&inst.x_true) - &inst.b;
        assert!(r.iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn generation_is_deterministic() {
        let a = generate_instance(20, 6, 3, 0.01, 42).unwrap();
        let b = generate_instance(20, 6, 3, 0.01, 42).unwrap();
        assert_eq!(a.a, b.a);
        assert_eq!(a.b, b.b);
        assert_eq!(a.x_true, b.x_true);
        let c = generate_instance_stream(20, 6, 3, 0.01, 42, 1).unwrap();
        assert_ne!(a.a, c.a);
    }

    #[test]
    fn rejects_bad_dims() {
        assert!(generate_instance(5, 10, 2, 0.01, 0).is_err());
        assert!(generate_instance(10, 5, 6, 0.01, 0).is_err());
        assert!(generate_instance(10, 5, 0, 0.01, 0).is_err());
    }

    #[test]
    fn objective_at_zero_is_half_b_norm() {
        let inst = generate_instance(12, 6, 2, 0.01, 11).unwrap();
        let p = decomposition_i(&inst, 0.1).unwrap();
        let f0 = p.objective(&Array1::zeros(12)).unwrap();
        assert!((f0 - 0.5 * inst.b.dot(&inst.b)).abs() < 1e-12);
    }

    #[test]
    fn decompositions_agree_pointwise() {
        let inst = generate_instance(15, 6, 3, 0.01, 5).unwrap();
        let p1 = decomposition_i(&inst, 0.1).unwrap();
        let p2 = decomposition_ii(&inst, 0.1).unwrap();
        let mut rng = trial_rng(99, 0);
        for _ in 0..50 {
            let x = Array1::from_shape_simple_fn(15, || {
                rng.sample::<f64, _>(StandardNormal)
            });
            let a = p1.objective(&x).unwrap();
            let b = p2.objective(&x).unwrap();
            assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()), "{a} vs {b}");
        }
    }

    #[test]
    fn dc_condition_detects_huge_lambda() {
        let inst = generate_instance(10, 5, 2, 0.01, 1).unwrap();
        assert!(inst.dc_condition_holds(0.1));
        assert!(!inst.dc_condition_holds(10.0 * inst.atb_inf_norm()));
        // b = 0 edge: condition always fails
        let zero = Instance {
            a: Array2::eye(2),
            b: array![0.0, 0.0],
            x_true: array![0.0, 0.0],
            seed: 0,
            n: 2,
            m: 2,
            s: 1,
            noise_scale: 0.0,
        };
        assert!(!zero.dc_condition_holds(1e-9));
    }

    #[test]
    fn dump_round_trip() {
        let inst = generate_instance(6, 3, 2, 0.01, 13).unwrap();
        let mut buf = Vec::new();
        write_instance(&inst, &mut buf).unwrap();
        let back = read_instance(std::io::BufReader::new(buf.as_slice())).unwrap();
        assert_eq!(inst.a, back.a);
        assert_eq!(inst.b, back.b);
        assert_eq!(inst.x_true, back.x_true);
        assert_eq!(inst.seed, back.seed);
    }
}
