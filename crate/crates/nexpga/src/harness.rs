//! Experiment orchestration: generate instances, run every method under a
//! shared budget, compute E(t) curves, and emit CSV plus SVG files.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use ndarray::Array1;

use crate::baselines::{method_by_label, run_method, MethodConfig};
use crate::instance::generate_instance_stream;
use crate::metrics::{
    average_curves, evolution_curve, f_min_of_trial, relative_error_series, time_grid,
};
use crate::solver::{IterTrace, StopRule};
use crate::{Error, Result};

pub const DEFAULT_NOISE_SCALE: f64 = 0.01;
pub const DEFAULT_TIME_GRID_POINTS: usize = 200;

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub n: usize,
    /// Defaults to 0.1 * n.
    pub m: Option<usize>,
    /// Defaults to 0.2 * m.
    pub s: Option<usize>,
    pub lambdas: Vec<f64>,
    pub trials: usize,
    /// Per-method wall-clock budget in seconds.
    pub t_max: f64,
    /// When set, methods stop on iteration count instead of wall time,
    /// making trace files reproducible byte for byte (except time_s).
    pub max_iters: Option<usize>,
    pub step_tol: f64,
    pub methods: Vec<String>,
    pub seed: u64,
    pub time_grid_points: usize,
    pub output_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            n: 1000,
            m: None,
            s: None,
            lambdas: vec![0.1],
            trials: 10,
            t_max: 2.0,
            max_iters: None,
            step_tol: 0.0,
            methods: vec![
                "nexPGA".into(),
                "NPG".into(),
                "nexPGA-DC".into(),
                "PGels".into(),
                "pDCAe".into(),
            ],
            seed: 2024,
            time_grid_points: DEFAULT_TIME_GRID_POINTS,
            output_dir: PathBuf::from("bench-out"),
        }
    }
}

impl ExperimentConfig {
    pub fn rows(&self) -> usize {
        self.m.unwrap_or_else(|| ((self.n as f64) * 0.1).round() as usize)
    }

    pub fn sparsity(&self) -> usize {
        self.s.unwrap_or_else(|| ((self.rows() as f64) * 0.2).round() as usize)
    }

    pub fn validate(&self) -> Result<Vec<MethodConfig>> {
        if self.trials < 1 {
            return Err(Error::Config("trials must be >= 1".into()));
        }
        if !(self.t_max > 0.0) {
            return Err(Error::Config("t_max must be positive".into()));
        }
        if self.time_grid_points < 2 {
            return Err(Error::Config("time_grid_points must be >= 2".into()));
        }
        if self.lambdas.is_empty() || self.lambdas.iter().any(|l| !(*l > 0.0)) {
            return Err(Error::Config("lambda list must be nonempty and positive".into()));
        }
        let (m, s) = (self.rows(), self.sparsity());
        if !(1 <= s && s <= m && m <= self.n) {
            return Err(Error::Config(format!(
                "need 1 <= s <= m <= n, got n={}, m={m}, s={s}",
                self.n
            )));
        }
        if self.methods.is_empty() {
            return Err(Error::Config("method list must be nonempty".into()));
        }
        self.methods.iter().map(|l| method_by_label(l)).collect()
    }

    fn stop_rule(&self) -> StopRule {
        match self.max_iters {
            Some(mi) => StopRule { max_time: None, max_iters: Some(mi), step_tol: self.step_tol },
            None => {
                StopRule { max_time: Some(self.t_max), max_iters: None, step_tol: self.step_tol }
            }
        }
    }
}

/// Parse the line-oriented `key = value` config format. `#` starts a
/// comment; unknown keys are an error.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::default();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", lineno + 1)))?;
        let (key, value) = (key.trim(), value.trim());
        let bad =
            |k: &str, v: &str| Error::Config(format!("line {}: bad value `{v}` for `{k}`", lineno + 1));
        match key {
            "n" => cfg.n = value.parse().map_err(|_| bad(key, value))?,
            "m" => cfg.m = Some(value.parse().map_err(|_| bad(key, value))?),
            "s" => cfg.s = Some(value.parse().map_err(|_| bad(key, value))?),
            "lambda" => {
                cfg.lambdas = value
                    .split(',')
                    .map(|t| t.trim().parse().map_err(|_| bad(key, value)))
                    .collect::<Result<_>>()?;
            }
            "trials" => cfg.trials = value.parse().map_err(|_| bad(key, value))?,
            "t_max" => cfg.t_max = value.parse().map_err(|_| bad(key, value))?,
            "max_iters" => cfg.max_iters = Some(value.parse().map_err(|_| bad(key, value))?),
            "step_tol" => cfg.step_tol = value.parse().map_err(|_| bad(key, value))?,
            "methods" => {
                cfg.methods = value.split(',').map(|t| t.trim().to_string()).collect();
            }
            "seed" => cfg.seed = value.parse().map_err(|_| bad(key, value))?,
            "time_grid_points" => {
                cfg.time_grid_points = value.parse().map_err(|_| bad(key, value))?
            }
            "output_dir" => cfg.output_dir = PathBuf::from(value),
            other => {
                return Err(Error::Config(format!("line {}: unknown key `{other}`", lineno + 1)))
            }
        }
    }
    Ok(cfg)
}

#[derive(Debug, Clone)]
pub struct MethodCurves {
    pub label: String,
    pub per_trial: Vec<Vec<f64>>,
    pub mean: Vec<f64>,
    pub stderr: Vec<f64>,
}

#[derive(Debug)]
pub struct LambdaResult {
    pub lambda: f64,
    pub grid: Vec<f64>,
    pub methods: Vec<MethodCurves>,
    pub degenerate_trials: usize,
    pub failed_runs: usize,
}

#[derive(Debug)]
pub struct ExperimentReport {
    pub lambdas: Vec<LambdaResult>,
    pub total_runs: usize,
    pub failed_runs: usize,
}

fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

fn write_trace_csv(path: &Path, label: &str, lambda: f64, n: usize, trial: usize, traces: &[IterTrace]) -> Result<()> {
    let mut out = String::new();
    out.push_str("method,lambda,n,trial,k,time_s,F,R,H,gamma_bar,beta_bar,inner_iters,step_norm,residual\n");
    for t in traces {
        let _ = writeln!(
            out,
            "{label},{lambda},{n},{trial},{},{},{},{},{},{},{},{},{},{}",
            t.k,
            fmt_f64(t.wall_time),
            fmt_f64(t.f_val),
            fmt_f64(t.r_val),
            fmt_f64(t.h_val),
            fmt_f64(t.gamma_bar),
            fmt_f64(t.beta_bar),
            t.inner_iters,
            fmt_f64(t.step_norm),
            fmt_f64(t.residual),
        );
    }
    fs::write(path, out)?;
    Ok(())
}

fn write_curves_csv(path: &Path, lambda: f64, n: usize, grid: &[f64], methods: &[MethodCurves]) -> Result<()> {
    let mut out = String::new();
    out.push_str("method,lambda,n,t,E_mean,E_stderr,trials\n");
    for mc in methods {
        for ((t, mean), stderr) in grid.iter().zip(&mc.mean).zip(&mc.stderr) {
            let _ = writeln!(
                out,
                "{},{lambda},{n},{},{},{},{}",
                mc.label,
                fmt_f64(*t),
                fmt_f64(*mean),
                fmt_f64(*stderr),
                mc.per_trial.len(),
            );
        }
    }
    fs::write(path, out)?;
    Ok(())
}

const SVG_COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

/// Minimal static plot: one polyline per method, E on a linear [0, 1] axis
/// against time.
fn write_svg_plot(path: &Path, lambda: f64, n: usize, grid: &[f64], methods: &[MethodCurves]) -> Result<()> {
    let (w, h) = (640.0, 420.0);
    let (left, right, top, bottom) = (60.0, 20.0, 30.0, 50.0);
    let (pw, ph) = (w - left - right, h - top - bottom);
    let t_max = grid.last().copied().unwrap_or(1.0).max(f64::MIN_POSITIVE);
    let x_of = |t: f64| left + pw * t / t_max;
    let y_of = |e: f64| top + ph * (1.0 - e.clamp(0.0, 1.0));

    let mut svg = String::new();
    let _ = write!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n\
         <rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n\
         <rect x=\"{left}\" y=\"{top}\" width=\"{pw}\" height=\"{ph}\" fill=\"none\" stroke=\"black\"/>\n\
         <text x=\"{}\" y=\"18\" text-anchor=\"middle\" font-size=\"14\">average E(t), lambda = {lambda}, n = {n}</text>\n\
         <text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-size=\"12\">t (s)</text>\n\
         <text x=\"16\" y=\"{}\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 16 {})\">E(t)</text>\n",
        w / 2.0,
        left + pw / 2.0,
        h - 12.0,
        top + ph / 2.0,
        top + ph / 2.0,
    );
    for i in 0..=4 {
        let e = i as f64 / 4.0;
        let y = y_of(e);
        let t = t_max * e;
        let x = x_of(t);
        let _ = write!(
            svg,
            "<text x=\"{}\" y=\"{}\" text-anchor=\"end\" font-size=\"10\">{:.2}</text>\n\
             <text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-size=\"10\">{:.2}</text>\n",
            left - 6.0,
            y + 3.0,
            e,
            x,
            top + ph + 14.0,
            t,
        );
    }
    for (i, mc) in methods.iter().enumerate() {
        let color = SVG_COLORS[i % SVG_COLORS.len()];
        let pts: Vec<String> = grid
            .iter()
            .zip(&mc.mean)
            .map(|(t, e)| format!("{:.2},{:.2}", x_of(*t), y_of(*e)))
            .collect();
        let _ = write!(
            svg,
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>\n\
             <text x=\"{}\" y=\"{}\" font-size=\"11\" fill=\"{color}\">{}</text>\n",
            pts.join(" "),
            left + pw - 100.0,
            top + 16.0 + 14.0 * i as f64,
            mc.label,
        );
    }
    svg.push_str("</svg>\n");
    fs::write(path, svg)?;
    Ok(())
}

/// Run the full experiment described by `config` and write all output
/// files into `config.output_dir`.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let methods = config.validate()?;
    fs::create_dir_all(&config.output_dir)?;
    let (n, m, s) = (config.n, config.rows(), config.sparsity());
    let grid = time_grid(config.t_max, config.time_grid_points);
    let stop = config.stop_rule();
    let x0: Array1<f64> = Array1::zeros(n);

    let mut lambdas_out = Vec::new();
    let mut total_runs = 0usize;
    let mut total_failed = 0usize;

    for (li, &lambda) in config.lambdas.iter().enumerate() {
        let mut per_method: BTreeMap<usize, Vec<Vec<f64>>> = BTreeMap::new();
        let mut degenerate = 0usize;
        let mut failed = 0usize;

        for trial in 0..config.trials {
            let stream = li as u64 * 1_000_000 + trial as u64;
            let inst =
                generate_instance_stream(n, m, s, DEFAULT_NOISE_SCALE, config.seed, stream)?;

            let mut results: Vec<(usize, crate::solver::SolveResult)> = Vec::new();
            for (mi, method) in methods.iter().enumerate() {
                total_runs += 1;
                match run_method(method, &inst, lambda, &x0, &stop) {
                    Ok(res) => results.push((mi, res)),
                    Err(err) => {
                        failed += 1;
                        total_failed += 1;
                        log::error!(
                            "{} failed on lambda={lambda} trial={trial}: {err}",
                            method.label
                        );
                        let path = config.output_dir.join(format!(
                            "failures_lambda{lambda}.csv"
                        ));
                        let mut f = fs::OpenOptions::new()
                            .create(true)
                            .append(true)
                            .open(path)?;
                        writeln!(f, "{},{lambda},{n},{trial},{err}", method.label)?;
                    }
                }
            }
            if results.is_empty() {
                continue;
            }

            let f_min =
                f_min_of_trial(&results.iter().map(|(_, r)| r.f_final).collect::<Vec<_>>())?;
            for (mi, res) in &results {
                let label = &methods[*mi].label;
                write_trace_csv(
                    &config.output_dir.join(format!(
                        "trace_{label}_lambda{lambda}_trial{trial}.csv"
                    )),
                    label,
                    lambda,
                    n,
                    trial,
                    &res.traces,
                )?;
                let f0 = res.traces[0].f_val;
                match relative_error_series(&res.traces, f_min, f0) {
                    Some(errors) => {
                        let series: Vec<(f64, f64)> = res
                            .traces
                            .iter()
                            .zip(&errors)
                            .map(|(t, (_, e))| (t.wall_time, *e))
                            .collect();
                        let curve = evolution_curve(&series, &grid)?;
                        per_method.entry(*mi).or_default().push(curve);
                    }
                    None => {
                        degenerate += 1;
                        log::warn!(
                            "degenerate trial excluded: {label} lambda={lambda} trial={trial} (F(x0) <= F_min)"
                        );
                    }
                }
            }
        }

        let mut method_curves = Vec::new();
        for (mi, per_trial) in per_method {
            let (mean, stderr) = average_curves(&per_trial)?;
            method_curves.push(MethodCurves {
                label: methods[mi].label.clone(),
                per_trial,
                mean,
                stderr,
            });
        }
        write_curves_csv(
            &config.output_dir.join(format!("curves_lambda{lambda}.csv")),
            lambda,
            n,
            &grid,
            &method_curves,
        )?;
        write_svg_plot(
            &config.output_dir.join(format!("evolution_lambda{lambda}_n{n}.svg")),
            lambda,
            n,
            &grid,
            &method_curves,
        )?;
        lambdas_out.push(LambdaResult {
            lambda,
            grid: grid.clone(),
            methods: method_curves,
            degenerate_trials: degenerate,
            failed_runs: failed,
        });
    }

    Ok(ExperimentReport { lambdas: lambdas_out, total_runs, failed_runs: total_failed })
}
