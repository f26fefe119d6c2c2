//! Oracle-based checks of the proximal operators and gradients against
//! independent brute-force references.

mod common;

use common::*;
use ndarray::{array, Array1};
use nexpga::instance::generate_instance;
use nexpga::ops::{
    norm_subgradient, prox_l1_minus_l2, soft_threshold, L1MinusL2Penalty, L1Penalty,
    LeastSquaresData, ZeroFunction,
};
use nexpga::problem::{ProxOracle, SmoothOracle, SubgradOracle};
use nexpga::solver::prox_gradient_step;
use nexpga::CompositeProblem;
use proptest::prelude::*;
use rand::Rng;
use std::sync::Arc;

#[test]
fn l1l2_prox_matches_brute_force() {
    let mut r = rng(7001);
    for case in 0..200 {
        let n = 1 + case % 3;
        let z = gaussian_vec(&mut r, n) * r.random_range(0.2..3.0);
        let t = r.random_range(0.05..2.0);
        let out = prox_l1_minus_l2(&z, t);
        let ours = l1l2_obj(&out, &z, t);
        let brute = brute_force_l1l2_prox_obj(&z, t, 9000 + case as u64);
        assert!(
            (ours - brute).abs() <= 1e-6,
            "case {case}: z={z}, t={t}: closed-form obj {ours} vs brute {brute}"
        );
    }
}

#[test]
fn l1l2_prox_single_support_matches_brute_force() {
    let mut r = rng(7002);
    for case in 0..40 {
        let n = 2 + case % 2;
        let mut z = Array1::zeros(n);
        let i = r.random_range(0..n);
        z[i] = r.random_range(-3.0..3.0f64);
        if z[i] == 0.0 {
            z[i] = 1.0;
        }
        let t = r.random_range(0.05..2.0);
        let out = prox_l1_minus_l2(&z, t);
        let d = &out - &z;
        assert!(d.dot(&d).sqrt() <= 1e-12, "single-support z should be a fixed point");
        let brute = brute_force_l1l2_prox_obj(&z, t, 9500 + case as u64);
        assert!((l1l2_obj(&out, &z, t) - brute).abs() <= 1e-6);
    }
}

#[test]
fn soft_threshold_beats_dense_grid() {
    let mut r = rng(7003);
    for _ in 0..100 {
        let n = 1 + r.random_range(0..4usize);
        let z = gaussian_vec(&mut r, n) * r.random_range(0.3..2.0);
        let t = r.random_range(0.05..1.5);
        let out = soft_threshold(&z, t);
        let ours = l1_obj(&out, &z, t);
        // dense grid over [-||z||_inf, ||z||_inf]^n
        let a = z.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let pts = 13usize;
        let mut best = f64::INFINITY;
        let total = pts.pow(n as u32);
        let mut x = Array1::zeros(n);
        for code in 0..total {
            let mut c = code;
            for v in x.iter_mut() {
                *v = -a + 2.0 * a * (c % pts) as f64 / (pts - 1) as f64;
                c /= pts;
            }
            best = best.min(l1_obj(&x, &z, t));
        }
        assert!(ours <= best + 1e-6, "soft threshold obj {ours} vs grid {best}");
    }
}

#[test]
fn prox_outputs_satisfy_spot_optimality() {
    // The prox objective at the output must not exceed it at z or at 0.
    let oracles: Vec<(&str, Box<dyn ProxOracle>)> = vec![
        ("l1", Box::new(L1Penalty { lambda: 0.7 })),
        ("l1l2", Box::new(L1MinusL2Penalty { lambda: 0.7 })),
        ("zero", Box::new(ZeroFunction)),
    ];
    let mut r = rng(7004);
    for (name, oracle) in &oracles {
        for _ in 0..100 {
            let n = 1 + r.random_range(0..5usize);
            let z = gaussian_vec(&mut r, n) * 2.0;
            let t = r.random_range(0.05..2.0);
            let sub = |x: &Array1<f64>| {
                let d = x - &z;
                0.5 * d.dot(&d) + t * oracle.value(x)
            };
            let out = oracle.prox(&z, t);
            let at_out = sub(&out);
            assert!(at_out <= sub(&z) + 1e-12, "{name}: prox worse than z");
            assert!(at_out <= sub(&Array1::zeros(n)) + 1e-12, "{name}: prox worse than 0");
        }
    }
}

#[test]
fn norm_subgradient_convexity_inequality() {
    let lambda = 0.7;
    let mut r = rng(7005);
    for _ in 0..100 {
        let n = 1 + r.random_range(0..6usize);
        let x = gaussian_vec(&mut r, n) * 2.0;
        let y = gaussian_vec(&mut r, n) * 2.0;
        let xi = norm_subgradient(&x, lambda);
        let vx = lambda * x.dot(&x).sqrt();
        let vy = lambda * y.dot(&y).sqrt();
        let lin = xi.dot(&(&y - &x));
        assert!(vy >= vx + lin - 1e-12, "convexity violated: {vy} < {vx} + {lin}");
    }
}

#[test]
fn generic_subgrad_oracle_convexity() {
    // Same inequality through the trait surface, at looser tolerance and
    // including the zero oracle.
    let oracles: Vec<Box<dyn SubgradOracle>> =
        vec![Box::new(nexpga::ops::EuclideanNorm { lambda: 1.3 }), Box::new(ZeroFunction)];
    let mut r = rng(7006);
    for oracle in &oracles {
        for _ in 0..100 {
            let x = gaussian_vec(&mut r, 4);
            let y = gaussian_vec(&mut r, 4);
            let xi = oracle.subgrad(&x);
            assert!(oracle.value(&y) >= oracle.value(&x) + xi.dot(&(&y - &x)) - 1e-10);
        }
    }
}

#[test]
fn least_squares_gradient_matches_finite_differences() {
    let inst = generate_instance(8, 5, 2, 0.01, 321).unwrap();
    let data = inst.least_squares().unwrap();
    let mut r = rng(7007);
    for _ in 0..20 {
        let x = gaussian_vec(&mut r, 8);
        let (_, g) = data.value_grad(&x);
        let fd = central_diff(|p| data.value_grad(p).0, &x);
        let num = (&g - &fd).dot(&(&g - &fd)).sqrt();
        let den = g.dot(&g).sqrt().max(1e-12);
        assert!(num / den < 1e-6, "relative gradient error {}", num / den);
    }
}

#[test]
fn prox_gradient_step_beats_random_probes() {
    let inst = generate_instance(3, 3, 1, 0.01, 55).unwrap();
    let problem = nexpga::instance::decomposition_i(&inst, 0.3).unwrap();
    let mut r = rng(7008);
    let y = gaussian_vec(&mut r, 3);
    let xi = array![0.0, 0.0, 0.0];
    let gamma = 2.0;
    let (_, grad_y) = problem.smooth_value_grad(&y).unwrap();
    let sub = |x: &Array1<f64>| {
        let d = x - &y;
        grad_y.dot(&d) - xi.dot(&d) + gamma / 2.0 * d.dot(&d) + problem.p1.value(x)
    };
    let out = prox_gradient_step(&problem, &y, &xi, gamma).unwrap();
    let at_out = sub(&out);
    for _ in 0..200 {
        let probe = &y + &(gaussian_vec(&mut r, 3) * 2.0);
        assert!(at_out <= sub(&probe) + 1e-10);
    }
}

#[test]
fn prox_gradient_step_reduces_to_soft_threshold_on_l1() {
    // Decomposition II with xi = 0: the step is exactly
    // soft_threshold(y - g/gamma, lambda/gamma).
    let inst = generate_instance(10, 5, 2, 0.01, 77).unwrap();
    let problem = nexpga::instance::decomposition_ii(&inst, 0.25).unwrap();
    let mut r = rng(7009);
    for _ in 0..20 {
        let y = gaussian_vec(&mut r, 10);
        let gamma = r.random_range(0.5..5.0);
        let xi = Array1::zeros(10);
        let (_, g) = problem.smooth_value_grad(&y).unwrap();
        let direct = soft_threshold(&(&y - &(&g / gamma)), 0.25 / gamma);
        let via_step = prox_gradient_step(&problem, &y, &xi, gamma).unwrap();
        assert_eq!(direct, via_step);
    }
}

#[test]
fn prox_gradient_step_fixed_point_at_stationary_input() {
    // f = (1/2)||x - c||^2, P1 = P2 = 0, y = c: gradient is zero and the
    // prox is the identity.
    let c = array![1.0, -2.0, 0.5];
    let problem = CompositeProblem::new(
        Arc::new(nexpga::ops::ShiftedQuadratic { center: c.clone() }),
        Arc::new(ZeroFunction),
        Arc::new(ZeroFunction),
        3,
    );
    let out = prox_gradient_step(&problem, &c, &Array1::zeros(3), 1.7).unwrap();
    assert_eq!(out, c);
}

// Smooth oracle for the composite problem used in the finite-difference
// property below.
#[test]
fn least_squares_10x20_gradient_check() {
    let inst = generate_instance(20, 10, 4, 0.01, 99).unwrap();
    let data = LeastSquaresData::new(inst.a.clone(), inst.b.clone()).unwrap();
    let mut r = rng(7010);
    for _ in 0..20 {
        let x = gaussian_vec(&mut r, 20);
        let (_, g) = data.value_grad(&x);
        let fd = central_diff(|p| data.value_grad(p).0, &x);
        let num = (&g - &fd).dot(&(&g - &fd)).sqrt();
        let den = g.dot(&g).sqrt().max(1e-12);
        assert!(num / den < 1e-6);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn prox_outputs_stay_bounded(
        z in proptest::collection::vec(-10.0f64..10.0, 1..6),
        t in 0.01f64..5.0,
    ) {
        let z = Array1::from_vec(z);
        let z_inf = z.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for out in [soft_threshold(&z, t), prox_l1_minus_l2(&z, t)] {
            let out_inf = out.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            prop_assert!(out_inf <= z_inf + t + 1e-12);
        }
    }

    #[test]
    fn soft_threshold_shrinks_componentwise(
        z in proptest::collection::vec(-10.0f64..10.0, 1..6),
        t in 0.01f64..5.0,
    ) {
        let z = Array1::from_vec(z);
        let out = soft_threshold(&z, t);
        for (o, v) in out.iter().zip(z.iter()) {
            prop_assert!(o.abs() <= v.abs());
            prop_assert!(o.signum() * v.signum() >= 0.0);
        }
    }
}
