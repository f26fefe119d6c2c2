//! nexPGA: proximal gradient-subgradient iterations with extrapolation and a
//! nonmonotone line search on the potential
//! H_delta(u, v, gamma) = F(u) + (delta*gamma/8)*||u - v||^2.
//!
//! Each outer iteration fixes a subgradient xi of P2 at the current iterate,
//! then backtracks jointly on the extrapolation weight beta (shrunk by eta)
//! and the prox weight gamma (grown by tau) until the candidate satisfies
//!
//!   H_delta(cand, x_k, gamma) - R_k <= -((1-delta)*gamma/8)*||cand - x_k||^2.
//!
//! The reference value R_k is either an exponentially weighted average of
//! past potential values (Zhang-Hager) or a sliding-window maximum (GLL,
//! used by the PGels baseline).

use std::time::Instant;

use crate::problem::{CompositeProblem, DenseVector};
use crate::{Error, Result};

/// Hard ceiling on gamma during backtracking. The line search provably
/// terminates for correct oracles, so reaching this indicates a bug.
const GAMMA_RUNAWAY_CAP: f64 = 1e12;

/// Absolute slack factor applied to the acceptance test so that candidates
/// equal to the threshold up to rounding are not rejected forever.
const ACCEPT_SLACK: f64 = 1e-14;

/// Relative tolerance for the runtime invariant checks on R_k.
const INVARIANT_RTOL: f64 = 1e-10;

/// Rule for the initial prox weight gamma_{k,0} of each outer iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GammaInit {
    Constant(f64),
    /// Barzilai-Borwein quotient from consecutive accepted extrapolated
    /// points, floored at 0.9 * previous accepted gamma and clipped to
    /// [gamma_min, gamma_max]. Falls back to Constant(1) on the first
    /// iteration.
    Spectral,
}

/// Rule for the initial extrapolation weight beta_{k,0}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BetaInit {
    Zero,
    /// beta_{k,0} = (t_{k-1} - 1)/t_k with t_{k+1} = (1 + sqrt(1+4t_k^2))/2,
    /// t_{-1} = t_0 = 1, clamped into [0, delta*beta_max].
    Fista,
}

/// Weight schedule for the reference-value convex combination.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PSchedule {
    Constant(f64),
}

/// How the reference value R_k is formed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ReferencePolicy {
    /// Average-type: R_{k+1} = (1-p)R_k + p*H_{k+1}.
    ZhangHager,
    /// Max-type: R_k = max of the last `window`+1 potential values.
    Gll { window: usize },
}

/// Stopping controls. `max_time` is wall-clock seconds; `step_tol` stops
/// when ||x^{k+1} - x^k|| falls at or below the tolerance.
#[derive(Debug, Clone, Copy)]
pub struct StopRule {
    pub max_time: Option<f64>,
    pub max_iters: Option<usize>,
    pub step_tol: f64,
}

impl Default for StopRule {
    fn default() -> Self {
        Self { max_time: None, max_iters: Some(10_000), step_tol: 0.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    MaxTime,
    MaxIters,
    StepTol,
}

/// Validated parameter block. Constraints: 0 < gamma_min <= gamma_max,
/// beta_max >= 0, 0 < p_min <= 1, 0 <= delta < 1, tau > 1, 0 < eta with
/// tau*eta^2 < 1.
#[derive(Debug, Clone)]
pub struct SolverParams {
    pub gamma_min: f64,
    pub gamma_max: f64,
    pub beta_max: f64,
    pub p_min: f64,
    pub delta: f64,
    pub tau: f64,
    pub eta: f64,
    pub p_schedule: PSchedule,
    pub gamma_init: GammaInit,
    pub beta_init: BetaInit,
    pub inner_cap: usize,
    pub stopping: StopRule,
}

impl SolverParams {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        gamma_min: f64,
        gamma_max: f64,
        beta_max: f64,
        p_min: f64,
        delta: f64,
        tau: f64,
        eta: f64,
    ) -> Result<Self> {
        let params = Self {
            gamma_min,
            gamma_max,
            beta_max,
            p_min,
            delta,
            tau,
            eta,
            p_schedule: PSchedule::Constant(0.01),
            gamma_init: GammaInit::Constant(1.0),
            beta_init: BetaInit::Zero,
            inner_cap: 200,
            stopping: StopRule::default(),
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParams(msg));
        if !(self.gamma_min > 0.0 && self.gamma_min <= self.gamma_max && self.gamma_max.is_finite())
        {
            return bad(format!(
                "need 0 < gamma_min <= gamma_max < inf, got [{}, {}]",
                self.gamma_min, self.gamma_max
            ));
        }
        if !(self.beta_max >= 0.0) {
            return bad(format!("need beta_max >= 0, got {}", self.beta_max));
        }
        if !(self.p_min > 0.0 && self.p_min <= 1.0) {
            return bad(format!("need p_min in (0, 1], got {}", self.p_min));
        }
        if !(0.0..1.0).contains(&self.delta) {
            return bad(format!("need delta in [0, 1), got {}", self.delta));
        }
        if !(self.tau > 1.0) {
            return bad(format!("need tau > 1, got {}", self.tau));
        }
        if !(self.eta > 0.0 && self.tau * self.eta * self.eta < 1.0) {
            return bad(format!(
                "need 0 < eta < 1/sqrt(tau), got eta = {} with tau*eta^2 = {}",
                self.eta,
                self.tau * self.eta * self.eta
            ));
        }
        let PSchedule::Constant(p) = self.p_schedule;
        if !(p >= self.p_min && p <= 1.0) {
            return bad(format!("p schedule value {p} outside [p_min, 1]"));
        }
        if self.inner_cap == 0 {
            return bad("inner_cap must be positive".into());
        }
        Ok(())
    }

    fn next_p(&self) -> f64 {
        let PSchedule::Constant(p) = self.p_schedule;
        p.clamp(self.p_min, 1.0)
    }
}

/// Per-outer-iteration record. `k` is the index of the iterate the row
/// describes; row 0 is the starting point (residual is NaN there).
#[derive(Debug, Clone)]
pub struct IterTrace {
    pub k: usize,
    pub wall_time: f64,
    pub f_val: f64,
    pub r_val: f64,
    pub h_val: f64,
    pub gamma_bar: f64,
    pub beta_bar: f64,
    pub inner_iters: usize,
    pub step_norm: f64,
    pub residual: f64,
}

#[derive(Debug)]
pub struct SolveResult {
    pub x_final: DenseVector,
    pub f_final: f64,
    pub traces: Vec<IterTrace>,
    pub status: StopReason,
}

/// H_delta(u, v, gamma) = F(u) + (delta*gamma/8)*||u - v||^2. Returns +inf
/// when u is outside dom P1.
pub fn potential(
    problem: &CompositeProblem,
    u: &DenseVector,
    v: &DenseVector,
    gamma: f64,
    delta: f64,
) -> Result<f64> {
    assert!(gamma > 0.0 && (0.0..1.0).contains(&delta));
    let f = problem.objective(u)?;
    let d = u - v;
    Ok(f + delta * gamma / 8.0 * d.dot(&d))
}

/// y = x_cur + beta*(x_cur - x_prev).
pub fn extrapolate(x_cur: &DenseVector, x_prev: &DenseVector, beta: f64) -> DenseVector {
    debug_assert!(beta >= 0.0);
    x_cur + &((x_cur - x_prev) * beta)
}

/// One proximal step: minimizer of
/// <grad f(y) - xi, x - y> + (gamma/2)||x - y||^2 + P1(x),
/// computed as prox_{P1/gamma}(y - (grad f(y) - xi)/gamma).
pub fn prox_gradient_step(
    problem: &CompositeProblem,
    y: &DenseVector,
    xi: &DenseVector,
    gamma: f64,
) -> Result<DenseVector> {
    let (_, grad) = problem.smooth_value_grad(y)?;
    prox_gradient_step_with_grad(problem, y, &grad, xi, gamma)
}

fn prox_gradient_step_with_grad(
    problem: &CompositeProblem,
    y: &DenseVector,
    grad_y: &DenseVector,
    xi: &DenseVector,
    gamma: f64,
) -> Result<DenseVector> {
    assert!(gamma > 0.0);
    let z = y - &((grad_y - xi) / gamma);
    if z.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite { context: "prox input" });
    }
    let out = problem.p1.prox(&z, 1.0 / gamma);
    if out.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite { context: "prox output" });
    }
    Ok(out)
}

/// Line search acceptance: H_cand - R <= -((1-delta)*gamma/8)*step_sq, with
/// an absolute slack of 1e-14*(1+|R|) against rounding.
pub fn accept_test(h_cand: f64, r: f64, gamma: f64, delta: f64, step_sq: f64) -> bool {
    debug_assert!(gamma > 0.0 && step_sq >= 0.0);
    if h_cand == f64::INFINITY {
        return false;
    }
    h_cand - r <= -(1.0 - delta) * gamma / 8.0 * step_sq + ACCEPT_SLACK * (1.0 + r.abs())
}

/// R_{k+1} = (1-p)*R_k + p*H.
pub fn reference_update(r: f64, p: f64, h: f64) -> f64 {
    debug_assert!(p > 0.0 && p <= 1.0);
    (1.0 - p) * r + p * h
}

/// Spectral initial gamma:
/// clip(max(max(<dy, dg>/||dy||^2, 0.9*gamma_bar_prev), gamma_min), gamma_max).
/// The quotient is skipped when dy = 0.
pub fn spectral_gamma_init(
    dy: &DenseVector,
    dg: &DenseVector,
    gamma_bar_prev: f64,
    params: &SolverParams,
) -> f64 {
    let dy_sq = dy.dot(dy);
    let mut cand = 0.9 * gamma_bar_prev;
    if dy_sq > 0.0 {
        cand = cand.max(dy.dot(dg) / dy_sq);
    }
    cand.clamp(params.gamma_min, params.gamma_max)
}

/// Advance the FISTA t-sequence and produce the initial extrapolation
/// weight beta_{k,0} = clamp((t_prev - 1)/t_cur, 0, delta*beta_max).
pub fn fista_beta_next(t_prev: f64, t_cur: f64, delta: f64, beta_max: f64) -> (f64, f64) {
    debug_assert!(t_prev >= 1.0 && t_cur >= 1.0);
    let t_next = (1.0 + (1.0 + 4.0 * t_cur * t_cur).sqrt()) / 2.0;
    let beta0 = ((t_prev - 1.0) / t_cur).clamp(0.0, delta * beta_max);
    (t_next, beta0)
}

/// ||grad f(x_next) - grad f(y) + gamma_bar*(y - x_next)||: an upper bound
/// on the distance from 0 to grad f(x_next) - xi + dP1(x_next), by the
/// subproblem optimality condition.
pub fn stationarity_residual(
    grad_xnext: &DenseVector,
    grad_y: &DenseVector,
    x_next: &DenseVector,
    y: &DenseVector,
    gamma_bar: f64,
) -> f64 {
    let v = grad_xnext - grad_y + &((y - x_next) * gamma_bar);
    v.dot(&v).sqrt()
}

/// Outcome of one backtracking loop.
#[derive(Debug)]
pub struct InnerStep {
    pub x_next: DenseVector,
    pub y: DenseVector,
    pub grad_y: DenseVector,
    pub f_next: f64,
    pub h_val: f64,
    pub gamma_bar: f64,
    pub beta_bar: f64,
    pub inner_iters: usize,
    pub step_norm: f64,
}

/// Backtracking loop for one outer iteration: trial i uses
/// beta = beta_0*eta^i and gamma = gamma_0*tau^i, with the same xi for
/// every trial. Returns the first accepted candidate.
#[allow(clippy::too_many_arguments)]
pub fn inner_loop(
    problem: &CompositeProblem,
    x_cur: &DenseVector,
    x_prev: &DenseVector,
    xi: &DenseVector,
    r: f64,
    beta_0: f64,
    gamma_0: f64,
    params: &SolverParams,
    k: usize,
) -> Result<InnerStep> {
    let mut beta = beta_0;
    let mut gamma = gamma_0;
    let mut i = 0usize;
    loop {
        let y = extrapolate(x_cur, x_prev, beta);
        let (_, grad_y) = problem.smooth_value_grad(&y)?;
        let cand = prox_gradient_step_with_grad(problem, &y, &grad_y, xi, gamma)?;
        let step = &cand - x_cur;
        let step_sq = step.dot(&step);
        let f_cand = problem.objective(&cand)?;
        let h_cand = f_cand + params.delta * gamma / 8.0 * step_sq;
        if accept_test(h_cand, r, gamma, params.delta, step_sq) {
            return Ok(InnerStep {
                x_next: cand,
                y,
                grad_y,
                f_next: f_cand,
                h_val: h_cand,
                gamma_bar: gamma,
                beta_bar: beta,
                inner_iters: i,
                step_norm: step_sq.sqrt(),
            });
        }
        i += 1;
        if i > params.inner_cap || gamma > GAMMA_RUNAWAY_CAP {
            return Err(Error::LineSearchFailed { k, cap: params.inner_cap, gamma });
        }
        beta *= params.eta;
        gamma *= params.tau;
    }
}

struct ReferenceState {
    policy: ReferencePolicy,
    r: f64,
    h_history: Vec<f64>,
}

impl ReferenceState {
    fn new(policy: ReferencePolicy, h0: f64) -> Self {
        Self { policy, r: h0, h_history: vec![h0] }
    }

    fn current(&self) -> f64 {
        match self.policy {
            ReferencePolicy::ZhangHager => self.r,
            ReferencePolicy::Gll { window } => {
                let start = self.h_history.len().saturating_sub(window + 1);
                self.h_history[start..].iter().cloned().fold(f64::NEG_INFINITY, f64::max)
            }
        }
    }

    fn update(&mut self, h_new: f64, p: f64) {
        self.h_history.push(h_new);
        if let ReferencePolicy::ZhangHager = self.policy {
            self.r = reference_update(self.r, p, h_new);
        }
    }
}

/// Run the solver from `x0` until a stopping rule fires. Under the
/// Zhang-Hager policy two invariants are checked every iteration (to
/// relative tolerance 1e-10): R_k is non-increasing with the quantified
/// decrease ((1-delta)*p*gamma_bar/8)*step^2, and R_k dominates the latest
/// potential value.
pub fn solve(
    problem: &CompositeProblem,
    x0: &DenseVector,
    params: &SolverParams,
    policy: ReferencePolicy,
    mut trace_sink: Option<&mut dyn FnMut(&IterTrace)>,
) -> Result<SolveResult> {
    params.validate()?;
    let start = Instant::now();

    let f0 = problem.objective(x0)?;
    if !f0.is_finite() {
        return Err(Error::InvalidParams("F(x0) must be finite (x0 in dom P1)".into()));
    }

    let mut x_prev = x0.clone();
    let mut x_cur = x0.clone();
    let mut gamma_bar_prev = params.gamma_min;
    let mut reference = ReferenceState::new(policy, f0);
    let (mut t_prev, mut t_cur) = (1.0f64, 1.0f64);
    // (accepted y, grad f at it) from the last iteration, and the
    // differences between the last two, for the spectral gamma rule.
    let mut last_y: Option<(DenseVector, DenseVector)> = None;
    let mut spectral_delta: Option<(DenseVector, DenseVector)> = None;

    let mut traces = Vec::new();
    let mut emit = |t: IterTrace, traces: &mut Vec<IterTrace>| {
        if let Some(sink) = trace_sink.as_deref_mut() {
            sink(&t);
        }
        traces.push(t);
    };
    emit(
        IterTrace {
            k: 0,
            wall_time: 0.0,
            f_val: f0,
            r_val: f0,
            h_val: f0,
            gamma_bar: gamma_bar_prev,
            beta_bar: 0.0,
            inner_iters: 0,
            step_norm: 0.0,
            residual: f64::NAN,
        },
        &mut traces,
    );

    let mut k = 0usize;
    let status = loop {
        if let Some(max_iters) = params.stopping.max_iters {
            if k >= max_iters {
                break StopReason::MaxIters;
            }
        }
        if let Some(max_time) = params.stopping.max_time {
            if start.elapsed().as_secs_f64() >= max_time {
                break StopReason::MaxTime;
            }
        }

        let xi = problem.p2.subgrad(&x_cur);
        let beta_0 = match params.beta_init {
            BetaInit::Zero => 0.0,
            BetaInit::Fista => {
                let (t_next, beta0) =
                    fista_beta_next(t_prev, t_cur, params.delta, params.beta_max);
                t_prev = t_cur;
                t_cur = t_next;
                beta0
            }
        };
        let gamma_0 = match (&params.gamma_init, &spectral_delta) {
            (GammaInit::Constant(c), _) => c.clamp(params.gamma_min, params.gamma_max),
            (GammaInit::Spectral, Some((dy, dg))) => {
                spectral_gamma_init(dy, dg, gamma_bar_prev, params)
            }
            (GammaInit::Spectral, None) => 1.0f64.clamp(params.gamma_min, params.gamma_max),
        };

        let r_before = reference.current();
        let step =
            inner_loop(problem, &x_cur, &x_prev, &xi, r_before, beta_0, gamma_0, params, k)?;

        let p = params.next_p();
        reference.update(step.h_val, p);
        let r_after = reference.current();

        if policy == ReferencePolicy::ZhangHager {
            let tol = INVARIANT_RTOL * (1.0 + r_before.abs());
            let decrease =
                (1.0 - params.delta) * p * step.gamma_bar / 8.0 * step.step_norm * step.step_norm;
            if r_after > r_before - decrease + tol {
                return Err(Error::InvariantViolation {
                    k,
                    what: format!(
                        "reference value did not decrease by the required amount: {} -> {} (required decrease {})",
                        r_before, r_after, decrease
                    ),
                });
            }
            if r_after < step.h_val - tol {
                return Err(Error::InvariantViolation {
                    k,
                    what: format!(
                        "reference value {} fell below the latest potential {}",
                        r_after, step.h_val
                    ),
                });
            }
        }

        let (_, grad_next) = problem.smooth_value_grad(&step.x_next)?;
        let residual =
            stationarity_residual(&grad_next, &step.grad_y, &step.x_next, &step.y, step.gamma_bar);

        if let Some((yl, gl)) = &last_y {
            spectral_delta = Some((&step.y - yl, &step.grad_y - gl));
        }
        let step_norm = step.step_norm;
        last_y = Some((step.y, step.grad_y));
        gamma_bar_prev = step.gamma_bar;
        x_prev = std::mem::replace(&mut x_cur, step.x_next);
        k += 1;

        emit(
            IterTrace {
                k,
                wall_time: start.elapsed().as_secs_f64(),
                f_val: step.f_next,
                r_val: r_after,
                h_val: step.h_val,
                gamma_bar: step.gamma_bar,
                beta_bar: step.beta_bar,
                inner_iters: step.inner_iters,
                step_norm,
                residual,
            },
            &mut traces,
        );

        if step_norm <= params.stopping.step_tol {
            break StopReason::StepTol;
        }
    };

    let f_final = problem.objective(&x_cur)?;
    Ok(SolveResult { x_final: x_cur, f_final, traces, status })
}
