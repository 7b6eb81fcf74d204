//! Success-rate sweeps over sparsity levels and penalties.
//!
//! Trial `t` at sparsity `k` draws its matrix from
//! `stream_seed(seed, k, t)` and its signal from the stream after that, so
//! every penalty in a sweep sees the same instances and adding sparsity
//! levels does not change existing ones.

use std::io::Write;
use std::time::Instant;

use ndarray::Array2;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::ista::{ista_solve, mu_max_from_nu, nu_max, IstaConfig, Problem};
use crate::prox_zoo::PenaltySpec;
use crate::sensing::{gen_matrix, gen_signal, is_success, stream_seed, MatrixKind, SignalSpec};

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub matrix: MatrixKind,
    pub m: usize,
    pub n: usize,
    pub ks: Vec<usize>,
    pub trials: usize,
    pub penalties: Vec<PenaltySpec>,
    /// Step size as a fraction of the penalty's maximum step.
    pub mu_fraction: f64,
    pub eps: f64,
    pub maxiter: usize,
    pub seed: u64,
    /// When off, the time column is written as `NA` and the CSV is
    /// byte-reproducible.
    pub record_time: bool,
}

/// `{4, 12, 20, ..., 60}`.
pub fn desk_ks() -> Vec<usize> {
    (4..=60).step_by(8).collect()
}

/// `{4, 8, ..., 60}`.
pub fn full_ks() -> Vec<usize> {
    (4..=60).step_by(4).collect()
}

impl SweepConfig {
    /// Gaussian 128 x 256, 20 trials, `mu = 0.99 mu_max`, `eps = 1e-5`,
    /// 3000 iterations.
    pub fn desk(penalties: Vec<PenaltySpec>) -> Self {
        Self {
            matrix: MatrixKind::Gaussian,
            m: 128,
            n: 256,
            ks: desk_ks(),
            trials: 20,
            penalties,
            mu_fraction: 0.99,
            eps: 1e-5,
            maxiter: 3000,
            seed: 0,
            record_time: true,
        }
    }

    /// 100 trials on every sparsity level in `{4, 8, ..., 60}`.
    pub fn full(penalties: Vec<PenaltySpec>) -> Self {
        Self {
            ks: full_ks(),
            trials: 100,
            ..Self::desk(penalties)
        }
    }

    pub fn validate(&self) -> Result<()> {
        let invalid = |name, value, reason| {
            Err(Error::InvalidParameter {
                name,
                value,
                reason,
            })
        };
        if self.trials == 0 {
            return invalid("trials", 0.0, "must be at least 1");
        }
        if self.penalties.is_empty() {
            return invalid("penalty", f64::NAN, "at least one penalty is required");
        }
        if self.ks.is_empty() {
            return invalid("k", f64::NAN, "at least one sparsity level is required");
        }
        if let Some(&k) = self.ks.iter().find(|&&k| k == 0 || k > self.n) {
            return invalid("k", k as f64, "sparsity must satisfy 0 < k <= n");
        }
        if self.m == 0 || self.n == 0 {
            return invalid("m", self.m as f64, "matrix dimensions must be positive");
        }
        if !(self.mu_fraction > 0.0 && self.mu_fraction <= 1.0) {
            return invalid("mu_fraction", self.mu_fraction, "must lie in (0, 1]");
        }
        if !(self.eps.is_finite() && self.eps > 0.0) {
            return invalid("eps", self.eps, "must be positive");
        }
        if self.maxiter == 0 {
            return invalid("maxiter", 0.0, "must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialReport {
    pub penalty: String,
    pub k: usize,
    pub trials: usize,
    pub successes: usize,
    pub success_rate: f64,
    /// `None` when timing was disabled.
    pub mean_time_s: Option<f64>,
    pub mean_iters: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialOutcome {
    pub success: bool,
    pub iterations: usize,
    pub seconds: f64,
}

const FAILED: TrialOutcome = TrialOutcome {
    success: false,
    iterations: 0,
    seconds: 0.0,
};

/// One random instance shared by every penalty in a trial.
pub struct Instance {
    pub a: Array2<f64>,
    pub x: ndarray::Array1<f64>,
    pub nu_max: f64,
}

pub fn trial_instance(cfg: &SweepConfig, k: usize, trial: usize) -> Result<Instance> {
    let seed = stream_seed(cfg.seed, k as u64, trial as u64);
    let a = gen_matrix(cfg.matrix, cfg.m, cfg.n, seed)?;
    let x = gen_signal(&SignalSpec::new(cfg.n, k, stream_seed(seed, 1, 0)))?;
    let nu = nu_max(a.view())?;
    Ok(Instance { a, x, nu_max: nu })
}

fn solve_one(cfg: &SweepConfig, inst: &Instance, penalty: &PenaltySpec) -> Result<TrialOutcome> {
    let b = inst.a.dot(&inst.x);
    let mu = cfg.mu_fraction * mu_max_from_nu(inst.nu_max, penalty);
    let prob = Problem::new(inst.a.clone(), b, *penalty)?;
    let ista = IstaConfig::new(mu)
        .eps(cfg.eps)
        .maxiter(cfg.maxiter)
        .record_trace(false);
    let start = Instant::now();
    let r = ista_solve(&prob, &ista)?;
    let seconds = start.elapsed().as_secs_f64();
    Ok(TrialOutcome {
        success: is_success(r.x_final.view(), inst.x.view())?,
        iterations: r.iterations,
        seconds,
    })
}

/// Outcomes of one trial for each penalty, in config order. Any failure
/// counts as an unsuccessful trial.
pub fn run_trial(cfg: &SweepConfig, k: usize, trial: usize) -> Vec<TrialOutcome> {
    match trial_instance(cfg, k, trial) {
        Ok(inst) => cfg
            .penalties
            .iter()
            .map(|p| solve_one(cfg, &inst, p).unwrap_or(FAILED))
            .collect(),
        Err(_) => vec![FAILED; cfg.penalties.len()],
    }
}

/// One report per `(penalty, k)`, ordered by penalty then `k`. Trials run
/// in parallel on the global rayon pool.
pub fn run_sweep(cfg: &SweepConfig) -> Result<Vec<TrialReport>> {
    cfg.validate()?;
    let mut per_k = Vec::with_capacity(cfg.ks.len());
    for &k in &cfg.ks {
        let outcomes: Vec<Vec<TrialOutcome>> = (0..cfg.trials)
            .into_par_iter()
            .map(|t| run_trial(cfg, k, t))
            .collect();
        per_k.push(outcomes);
    }

    let mut reports = Vec::with_capacity(cfg.penalties.len() * cfg.ks.len());
    for (pi, penalty) in cfg.penalties.iter().enumerate() {
        for (ki, &k) in cfg.ks.iter().enumerate() {
            let column = per_k[ki].iter().map(|row| row[pi]);
            let successes = column.clone().filter(|o| o.success).count();
            let iters: usize = column.clone().map(|o| o.iterations).sum();
            let secs: f64 = column.map(|o| o.seconds).sum();
            let t = cfg.trials as f64;
            reports.push(TrialReport {
                penalty: penalty.to_string(),
                k,
                trials: cfg.trials,
                successes,
                success_rate: successes as f64 / t,
                mean_time_s: cfg.record_time.then_some(secs / t),
                mean_iters: iters as f64 / t,
            });
        }
    }
    Ok(reports)
}

pub fn write_sweep_csv<W: Write>(reports: &[TrialReport], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["penalty", "k", "success_rate", "mean_time_s", "mean_iters"])?;
    for r in reports {
        w.write_record([
            r.penalty.clone(),
            r.k.to_string(),
            r.success_rate.to_string(),
            r.mean_time_s
                .map_or_else(|| "NA".to_string(), |s| s.to_string()),
            r.mean_iters.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
