//! Comparison methods sharing the solver core: nexPGA and NPG on
//! Decomposition I, nexPGA-DC on Decomposition II, PGels (max-type
//! reference policy) on Decomposition I, and pDCAe with a fixed stepsize on
//! Decomposition II.

use std::time::Instant;

use ndarray::{Array1, Array2};

use crate::instance::{decomposition_i, decomposition_ii, Instance};
use crate::problem::{CompositeProblem, DenseVector};
use crate::solver::{
    self, fista_beta_next, prox_gradient_step, BetaInit, GammaInit, IterTrace, PSchedule,
    ReferencePolicy, SolveResult, SolverParams, StopReason, StopRule,
};
use crate::{Error, Result};

/// Window for the PGels max-type reference (last N+1 potential values).
pub const PGELS_WINDOW: usize = 4;

/// FISTA t-sequence restart period for pDCAe.
pub const PDCAE_RESTART_PERIOD: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decomposition {
    I,
    II,
}

#[derive(Debug, Clone)]
pub enum MethodKind {
    LineSearch { params: SolverParams, policy: ReferencePolicy },
    FixedStep { restart_period: usize },
}

#[derive(Debug, Clone)]
pub struct MethodConfig {
    pub label: String,
    pub decomposition: Decomposition,
    pub kind: MethodKind,
}

/// The shared solver parameter block used by every line-search method:
/// tau = 1.56, eta = 0.8, beta_max = 10, gamma in [1e-6, 1e6], p = 0.01,
/// spectral gamma initialization.
fn base_params(delta: f64) -> SolverParams {
    let mut params = SolverParams::new(1e-6, 1e6, 10.0, 0.01, delta, 1.56, 0.8)
        .expect("base parameter block is valid");
    params.p_schedule = PSchedule::Constant(0.01);
    params.gamma_init = GammaInit::Spectral;
    params.beta_init = if delta > 0.0 { BetaInit::Fista } else { BetaInit::Zero };
    params
}

/// nexPGA on Decomposition I. delta = 0.1 gives the standard configuration
/// (labeled `nexPGA`); delta = 0 disables the potential coupling and the
/// extrapolation schedule, which is the NPG method.
pub fn make_nexpga(delta: f64) -> Result<MethodConfig> {
    if !(0.0..1.0).contains(&delta) {
        return Err(Error::InvalidParams(format!("delta must be in [0, 1), got {delta}")));
    }
    let label = if delta == 0.0 {
        "NPG".to_string()
    } else if delta == 0.1 {
        "nexPGA".to_string()
    } else {
        format!("nexPGA(delta={delta})")
    };
    Ok(MethodConfig {
        label,
        decomposition: Decomposition::I,
        kind: MethodKind::LineSearch {
            params: base_params(delta),
            policy: ReferencePolicy::ZhangHager,
        },
    })
}

/// nexPGA with delta = 0.1 on Decomposition II.
pub fn make_nexpga_dc() -> MethodConfig {
    MethodConfig {
        label: "nexPGA-DC".to_string(),
        decomposition: Decomposition::II,
        kind: MethodKind::LineSearch {
            params: base_params(0.1),
            policy: ReferencePolicy::ZhangHager,
        },
    }
}

/// PGels: same solver core on Decomposition I, but with the max-type
/// reference over the last PGELS_WINDOW+1 potential values.
pub fn make_pgels() -> MethodConfig {
    MethodConfig {
        label: "PGels".to_string(),
        decomposition: Decomposition::I,
        kind: MethodKind::LineSearch {
            params: base_params(0.1),
            policy: ReferencePolicy::Gll { window: PGELS_WINDOW },
        },
    }
}

/// pDCAe: fixed stepsize 1/L with FISTA extrapolation restarted
/// periodically, on Decomposition II.
pub fn make_pdcae() -> MethodConfig {
    MethodConfig {
        label: "pDCAe".to_string(),
        decomposition: Decomposition::II,
        kind: MethodKind::FixedStep { restart_period: PDCAE_RESTART_PERIOD },
    }
}

/// All five standard methods in presentation order.
pub fn standard_roster() -> Vec<MethodConfig> {
    vec![
        make_nexpga(0.1).unwrap(),
        make_nexpga(0.0).unwrap(),
        make_nexpga_dc(),
        make_pgels(),
        make_pdcae(),
    ]
}

pub fn method_by_label(label: &str) -> Result<MethodConfig> {
    match label {
        "nexPGA" => make_nexpga(0.1),
        "NPG" => make_nexpga(0.0),
        "nexPGA-DC" => Ok(make_nexpga_dc()),
        "PGels" => Ok(make_pgels()),
        "pDCAe" => Ok(make_pdcae()),
        other => Err(Error::Config(format!(
            "unknown method `{other}` (known: nexPGA, NPG, nexPGA-DC, PGels, pDCAe)"
        ))),
    }
}

/// Power-iteration estimate of lambda_max(A^T A), iterated until the
/// Rayleigh quotient changes by less than 1e-10 relatively (at most 5000
/// iterations), then inflated by 1.01.
pub fn lipschitz_bound(a: &Array2<f64>) -> Result<f64> {
    const MAX_ITERS: usize = 5000;
    const RTOL: f64 = 1e-10;
    let n = a.ncols();
    if a.nrows() == 0 || n == 0 {
        return Err(Error::InvalidParams("empty matrix".into()));
    }
    // Deterministic start with unequal components so it is not orthogonal
    // to the leading eigenvector of a diagonal-like A^T A.
    let mut v: Array1<f64> =
        Array1::from_shape_fn(n, |i| 1.0 + (i as f64) / (n as f64 + 1.0));
    let norm = v.dot(&v).sqrt();
    v /= norm;
    let mut prev = 0.0f64;
    for _ in 0..MAX_ITERS {
        let w = a.t().dot(&a.dot(&v));
        let lam = v.dot(&w);
        let w_norm = w.dot(&w).sqrt();
        if w_norm == 0.0 {
            // A^T A v = 0: v is in the null space; the operator norm along
            // the remaining subspace is 0 only if A = 0.
            return Ok(1.01 * 0.0_f64.max(lam));
        }
        v = w / w_norm;
        if (lam - prev).abs() <= RTOL * (1.0 + lam.abs()) {
            return Ok(1.01 * lam);
        }
        prev = lam;
    }
    Err(Error::PowerIterationDiverged(MAX_ITERS))
}

/// One pDCAe update: the prox-gradient step with gamma fixed at L.
pub fn pdcae_step(
    problem: &CompositeProblem,
    y: &DenseVector,
    xi: &DenseVector,
    l: f64,
) -> Result<DenseVector> {
    prox_gradient_step(problem, y, xi, l)
}

/// Fixed-stepsize pDCAe loop, emitting the same trace schema as the line
/// search solver (gamma_bar = L, inner_iters = 0, R = H = F).
pub fn solve_pdcae(
    problem: &CompositeProblem,
    x0: &DenseVector,
    l: f64,
    restart_period: usize,
    stopping: &StopRule,
) -> Result<SolveResult> {
    if !(l > 0.0) {
        return Err(Error::InvalidParams(format!("stepsize bound L must be positive, got {l}")));
    }
    let start = Instant::now();
    let f0 = problem.objective(x0)?;
    if !f0.is_finite() {
        return Err(Error::InvalidParams("F(x0) must be finite".into()));
    }

    let mut x_prev = x0.clone();
    let mut x_cur = x0.clone();
    let (mut t_prev, mut t_cur) = (1.0f64, 1.0f64);
    let mut traces = vec![IterTrace {
        k: 0,
        wall_time: 0.0,
        f_val: f0,
        r_val: f0,
        h_val: f0,
        gamma_bar: l,
        beta_bar: 0.0,
        inner_iters: 0,
        step_norm: 0.0,
        residual: f64::NAN,
    }];

    let mut k = 0usize;
    let status = loop {
        if let Some(max_iters) = stopping.max_iters {
            if k >= max_iters {
                break StopReason::MaxIters;
            }
        }
        if let Some(max_time) = stopping.max_time {
            if start.elapsed().as_secs_f64() >= max_time {
                break StopReason::MaxTime;
            }
        }

        if restart_period > 0 && k > 0 && k % restart_period == 0 {
            t_prev = 1.0;
            t_cur = 1.0;
        }
        // Unclamped FISTA weight (delta plays no role here).
        let beta = (t_prev - 1.0) / t_cur;
        let (t_next, _) = fista_beta_next(t_prev, t_cur, 0.0, 0.0);
        t_prev = t_cur;
        t_cur = t_next;

        let y = solver::extrapolate(&x_cur, &x_prev, beta);
        let xi = problem.p2.subgrad(&x_cur);
        let (_, grad_y) = problem.smooth_value_grad(&y)?;
        let x_next = pdcae_step(problem, &y, &xi, l)?;
        let f_next = problem.objective(&x_next)?;
        let (_, grad_next) = problem.smooth_value_grad(&x_next)?;
        let residual = solver::stationarity_residual(&grad_next, &grad_y, &x_next, &y, l);
        let diff = &x_next - &x_cur;
        let step_norm = diff.dot(&diff).sqrt();

        x_prev = std::mem::replace(&mut x_cur, x_next);
        k += 1;
        traces.push(IterTrace {
            k,
            wall_time: start.elapsed().as_secs_f64(),
            f_val: f_next,
            r_val: f_next,
            h_val: f_next,
            gamma_bar: l,
            beta_bar: beta,
            inner_iters: 0,
            step_norm,
            residual,
        });

        if step_norm <= stopping.step_tol {
            break StopReason::StepTol;
        }
    };

    let f_final = problem.objective(&x_cur)?;
    Ok(SolveResult { x_final: x_cur, f_final, traces, status })
}

/// Build the method's decomposition of the instance and run it from `x0`.
pub fn run_method(
    config: &MethodConfig,
    inst: &Instance,
    lambda: f64,
    x0: &DenseVector,
    stopping: &StopRule,
) -> Result<SolveResult> {
    let problem = match config.decomposition {
        Decomposition::I => decomposition_i(inst, lambda)?,
        Decomposition::II => decomposition_ii(inst, lambda)?,
    };
    match &config.kind {
        MethodKind::LineSearch { params, policy } => {
            let mut params = params.clone();
            params.stopping = *stopping;
            solver::solve(&problem, x0, &params, *policy, None)
        }
        MethodKind::FixedStep { restart_period } => {
            let l = lipschitz_bound(&inst.a)?;
            solve_pdcae(&problem, x0, l, *restart_period, stopping)
        }
    }
}
