//! Shared test oracles, independent of the library's closed-form paths.

#![allow(dead_code)]

use ndarray::Array1;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_vec(rng: &mut ChaCha8Rng, n: usize) -> Array1<f64> {
    Array1::from_shape_simple_fn(n, || rng.sample::<f64, _>(StandardNormal))
}

/// Subproblem objective of the l1-l2 prox: (1/2)||x-z||^2 + t(||x||_1 - ||x||).
pub fn l1l2_obj(x: &Array1<f64>, z: &Array1<f64>, t: f64) -> f64 {
    let d = x - z;
    let l1: f64 = x.iter().map(|v| v.abs()).sum();
    let l2 = x.dot(x).sqrt();
    0.5 * d.dot(&d) + t * (l1 - l2)
}

/// Subproblem objective of the l1 prox: (1/2)||x-z||^2 + t*||x||_1.
pub fn l1_obj(x: &Array1<f64>, z: &Array1<f64>, t: f64) -> f64 {
    let d = x - z;
    let l1: f64 = x.iter().map(|v| v.abs()).sum();
    0.5 * d.dot(&d) + t * l1
}

fn project_pattern(x: &mut Array1<f64>, pattern: &[i8]) {
    for (v, &p) in x.iter_mut().zip(pattern) {
        match p {
            0 => *v = 0.0,
            1 => *v = v.max(0.0),
            _ => *v = v.min(0.0),
        }
    }
}

/// One subgradient of the l1-l2 objective at x (valid at points with the
/// given sign pattern; the -t*||x|| part contributes 0 at the origin).
fn l1l2_grad(x: &Array1<f64>, z: &Array1<f64>, t: f64, pattern: &[i8]) -> Array1<f64> {
    let norm = x.dot(x).sqrt();
    Array1::from_shape_fn(x.len(), |i| {
        let sign = pattern[i] as f64;
        let norm_part = if norm > 1e-14 { x[i] / norm } else { 0.0 };
        x[i] - z[i] + t * sign - t * norm_part
    })
}

/// Brute-force global minimizer of the l1-l2 prox subproblem: enumerate all
/// 3^n sign patterns and run projected gradient descent with Armijo
/// backtracking from several starts within each pattern. Returns the best
/// objective value found.
pub fn brute_force_l1l2_prox_obj(z: &Array1<f64>, t: f64, seed: u64) -> f64 {
    let n = z.len();
    assert!(n <= 4, "brute force oracle is exponential in n");
    let mut local_rng = rng(seed);
    let mut best = f64::INFINITY;

    let patterns = 3usize.pow(n as u32);
    for code in 0..patterns {
        let mut pattern = vec![0i8; n];
        let mut c = code;
        for p in pattern.iter_mut() {
            *p = [0i8, 1, -1][c % 3];
            c /= 3;
        }

        let mut starts: Vec<Array1<f64>> = Vec::new();
        let mut from_z = z.clone();
        project_pattern(&mut from_z, &pattern);
        starts.push(from_z.clone());
        starts.push(&from_z * 0.5);
        starts.push(&from_z * 2.0);
        for _ in 0..4 {
            let mut x = &from_z + &(gaussian_vec(&mut local_rng, n) * (0.3 * (t + 1.0)));
            project_pattern(&mut x, &pattern);
            starts.push(x);
        }

        for mut x in starts {
            let mut fx = l1l2_obj(&x, z, t);
            for _ in 0..2000 {
                let g = l1l2_grad(&x, z, t, &pattern);
                let gnorm = g.dot(&g).sqrt();
                if gnorm < 1e-12 {
                    break;
                }
                // Armijo backtracking on the projected step
                let mut step = 1.0;
                let mut improved = false;
                for _ in 0..40 {
                    let mut cand = &x - &(&g * step);
                    project_pattern(&mut cand, &pattern);
                    let fc = l1l2_obj(&cand, z, t);
                    if fc < fx - 1e-16 {
                        x = cand;
                        fx = fc;
                        improved = true;
                        break;
                    }
                    step *= 0.5;
                }
                if !improved {
                    break;
                }
            }
            if fx < best {
                best = fx;
            }
        }
    }
    best
}

/// Central finite differences of a scalar function.
pub fn central_diff<F: Fn(&Array1<f64>) -> f64>(f: F, x: &Array1<f64>) -> Array1<f64> {
    let mut g = Array1::zeros(x.len());
    for i in 0..x.len() {
        let h = 1e-6 * (1.0 + x[i].abs());
        let mut xp = x.clone();
        let mut xm = x.clone();
        xp[i] += h;
        xm[i] -= h;
        g[i] = (f(&xp) - f(&xm)) / (2.0 * h);
    }
    g
}
