//! CSV producers for Petz curves and α-sweeps of the optimizer.

use std::io::Write;

use rayon::prelude::*;

use crate::config::ExperimentConfig;
use crate::error::{QngError, Result};
use crate::optimizer::{run_optimization, Termination, Trajectory};
use crate::petz::PetzFunction;

/// Thread cap for sweeps. `0` runs serially.
pub const THREADS_ENV: &str = "QNGLAB_THREADS";

pub const DEFAULT_CURVE_ALPHAS: [f64; 8] = [0.1, 0.3, 0.5, 100.0, -100.0, -1.0, -0.3, -0.1];

pub fn default_curve_alphas() -> Vec<PetzFunction> {
    DEFAULT_CURVE_ALPHAS.iter().map(|&a| PetzFunction::Alpha(a)).collect()
}

/// 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w)
}

/// `samples` evenly spaced points on `[t_min, t_max]`, plus `t = 1` when it lies
/// inside the range.
pub fn curve_grid(t_min: f64, t_max: f64, samples: usize) -> Result<Vec<f64>> {
    if !(t_min > 0.0 && t_max >= t_min && t_max.is_finite()) {
        return Err(QngError::InvalidParameter(format!("t-range must be positive, got [{t_min}, {t_max}]")));
    }
    if samples < 1 {
        return Err(QngError::InvalidParameter("samples must be at least 1".into()));
    }
    let mut ts: Vec<f64> = if samples == 1 {
        vec![t_min]
    } else {
        (0..samples)
            .map(|k| if k == samples - 1 { t_max } else { t_min + (t_max - t_min) * k as f64 / (samples - 1) as f64 })
            .collect()
    };
    if (t_min..=t_max).contains(&1.0) && !ts.contains(&1.0) {
        let at = ts.partition_point(|&t| t < 1.0);
        ts.insert(at, 1.0);
    }
    Ok(ts)
}

/// Writes `t,alpha,f` rows, one block per Petz function.
pub fn write_petz_curve<W: Write>(out: W, alphas: &[PetzFunction], ts: &[f64]) -> Result<()> {
    for f in alphas {
        f.eval(1.0)?;
    }
    let mut w = csv_writer(out);
    w.write_record(["t", "alpha", "f"])?;
    for f in alphas {
        let label = f.label();
        for &t in ts {
            w.write_record([fmt_f64(t), label.clone(), fmt_f64(f.eval(t)?)])?;
        }
    }
    w.flush()?;
    Ok(())
}

fn thread_cap() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| QngError::InvalidParameter(format!("{THREADS_ENV} must be a nonnegative integer, got `{v}`"))),
    }
}

/// Runs the optimizer once per sweep entry, in parallel unless
/// `QNGLAB_THREADS=0`. Results are in α-list order.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<Vec<Trajectory>> {
    let (family, target) = cfg.build()?;
    let alphas = cfg.sweep_alphas();
    for &petz in &alphas {
        cfg.optimizer_config(petz).validate()?;
    }
    let run = |petz: &PetzFunction| run_optimization(&family, &target, &cfg.optimizer_config(*petz), &cfg.theta0);
    match thread_cap()? {
        Some(0) => alphas.iter().map(run).collect(),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| QngError::InvalidParameter(e.to_string()))?
            .install(|| alphas.par_iter().map(run).collect()),
        None => alphas.par_iter().map(run).collect(),
    }
}

/// Writes `iter,alpha,cost,grad_norm,step_norm,predicted_decrease` blocks.
///
/// A failed run contributes its partial records followed by a row
/// `error,<alpha>,<message>,,,`; the first such failure is returned after all
/// blocks are flushed.
pub fn write_trajectories<W: Write>(out: W, runs: Vec<Trajectory>) -> Result<()> {
    let mut w = csv_writer(out);
    w.write_record(["iter", "alpha", "cost", "grad_norm", "step_norm", "predicted_decrease"])?;
    let mut failure = None;
    for run in runs {
        let label = run.petz.label();
        for r in &run.records {
            w.write_record([
                r.iter.to_string(),
                label.clone(),
                fmt_f64(r.cost),
                fmt_f64(r.grad_norm),
                fmt_f64(r.step_norm()),
                fmt_f64(r.predicted_decrease),
            ])?;
        }
        if let Termination::Failed(e) = run.termination {
            w.write_record(["error", &label, &e.to_string(), "", "", ""])?;
            failure.get_or_insert(e);
        }
    }
    w.flush()?;
    match failure {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

pub fn optimize<W: Write>(out: W, cfg: &ExperimentConfig) -> Result<()> {
    write_trajectories(out, run_sweep(cfg)?)
}
