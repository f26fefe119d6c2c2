//! Evaluation metrics: the normalized objective error
//! e(k) = (F(x^k) - F_min)/(F(x^0) - F_min) and its time evolution
//! E(t) = min{ e(k) : T(k) <= t }, averaged over trials.

use crate::solver::IterTrace;
use crate::{Error, Result};

/// Sampled E(t) values for one method on a shared time grid.
#[derive(Debug, Clone)]
pub struct EvolutionCurve {
    pub label: String,
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub trials: usize,
}

/// F_min of a trial: the minimum terminating objective value among all
/// methods that completed.
pub fn f_min_of_trial(finals: &[f64]) -> Result<f64> {
    finals.iter().cloned().reduce(f64::min).ok_or(Error::EmptySeries)
}

/// Per-iterate normalized error, clamped to [0, 1] against rounding.
/// Returns None for a degenerate trial (F(x^0) <= F_min), which callers
/// must exclude from averaging.
pub fn relative_error_series(
    traces: &[IterTrace],
    f_min: f64,
    f0: f64,
) -> Option<Vec<(usize, f64)>> {
    if f0 <= f_min {
        return None;
    }
    let denom = f0 - f_min;
    Some(
        traces
            .iter()
            .map(|t| (t.k, ((t.f_val - f_min) / denom).clamp(0.0, 1.0)))
            .collect(),
    )
}

/// E(t) on a time grid: for each grid point, the running minimum of e over
/// records with wall time <= t. Grid points earlier than the first record
/// take the first record's value (T(0) = 0 in practice).
pub fn evolution_curve(series: &[(f64, f64)], grid: &[f64]) -> Result<Vec<f64>> {
    if series.is_empty() {
        return Err(Error::EmptySeries);
    }
    let mut values = Vec::with_capacity(grid.len());
    let mut idx = 0usize;
    let mut running_min = series[0].1;
    for &t in grid {
        while idx < series.len() && series[idx].0 <= t {
            running_min = running_min.min(series[idx].1);
            idx += 1;
        }
        values.push(running_min);
    }
    Ok(values)
}

/// Uniform grid of `points` samples on [0, t_max].
pub fn time_grid(t_max: f64, points: usize) -> Vec<f64> {
    assert!(points >= 2 && t_max > 0.0);
    (0..points).map(|i| t_max * i as f64 / (points - 1) as f64).collect()
}

/// Pointwise mean and standard error over per-trial curves (all on the same
/// grid).
pub fn average_curves(per_trial: &[Vec<f64>]) -> Result<(Vec<f64>, Vec<f64>)> {
    let trials = per_trial.len();
    if trials == 0 {
        return Err(Error::EmptySeries);
    }
    let len = per_trial[0].len();
    let mut mean = vec![0.0; len];
    for curve in per_trial {
        assert_eq!(curve.len(), len, "curves must share the grid");
        for (m, v) in mean.iter_mut().zip(curve) {
            *m += v;
        }
    }
    for m in &mut mean {
        *m /= trials as f64;
    }
    let mut stderr = vec![0.0; len];
    if trials > 1 {
        for curve in per_trial {
            for (s, (v, m)) in stderr.iter_mut().zip(curve.iter().zip(&mean)) {
                *s += (v - m) * (v - m);
            }
        }
        for s in &mut stderr {
            *s = (*s / (trials as f64 - 1.0)).sqrt() / (trials as f64).sqrt();
        }
    }
    Ok((mean, stderr))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn trace(k: usize, wall_time: f64, f_val: f64) -> IterTrace {
        IterTrace {
            k,
            wall_time,
            f_val,
            r_val: f_val,
            h_val: f_val,
            gamma_bar: 1.0,
            beta_bar: 0.0,
            inner_iters: 0,
            step_norm: 0.0,
            residual: 0.0,
        }
    }

    #[test]
    fn f_min_examples() {
        assert_eq!(f_min_of_trial(&[3.2, 3.0, 3.1]).unwrap(), 3.0);
        assert_eq!(f_min_of_trial(&[4.5]).unwrap(), 4.5);
        assert_eq!(f_min_of_trial(&[2.0, 2.0]).unwrap(), 2.0);
        assert!(f_min_of_trial(&[]).is_err());
    }

    #[test]
    fn relative_error_examples() {
        let traces = vec![trace(0, 0.0, 10.0), trace(1, 0.1, 2.5), trace(2, 0.2, 0.0)];
        let e = relative_error_series(&traces, 0.0, 10.0).unwrap();
        assert_eq!(e[0], (0, 1.0));
        assert_abs_diff_eq!(e[1].1, 0.25, epsilon = 1e-15);
        assert_eq!(e[2], (2, 0.0));
    }

    #[test]
    fn degenerate_trial_is_flagged() {
        let traces = vec![trace(0, 0.0, 1.0)];
        assert!(relative_error_series(&traces, 1.0, 1.0).is_none());
    }

    #[test]
    fn evolution_single_record() {
        let v = evolution_curve(&[(0.0, 1.0)], &[0.0, 0.5, 1.0]).unwrap();
        assert_eq!(v, vec![1.0, 1.0, 1.0]);
    }

    #[test]
    fn evolution_running_min_not_last() {
        let series = [(0.0, 1.0), (1.0, 0.5), (2.0, 0.7)];
        let v = evolution_curve(&series, &[2.0]).unwrap();
        assert_eq!(v, vec![0.5]);
    }

    #[test]
    fn evolution_between_records() {
        let series = [(0.0, 1.0), (0.5, 0.3)];
        let v = evolution_curve(&series, &[0.25, 0.75]).unwrap();
        assert_eq!(v, vec![1.0, 0.3]);
    }

    #[test]
    fn evolution_rejects_empty() {
        assert!(evolution_curve(&[], &[0.0]).is_err());
    }

    #[test]
    fn averaging_matches_hand_mean() {
        let (mean, stderr) =
            average_curves(&[vec![1.0, 0.5], vec![0.0, 0.5]]).unwrap();
        assert_eq!(mean, vec![0.5, 0.5]);
        assert_abs_diff_eq!(stderr[0], 0.5, epsilon = 1e-15);
        assert_eq!(stderr[1], 0.0);
    }
}
