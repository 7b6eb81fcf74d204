//! Wall-clock comparison of three ways to evaluate the PiE prox in the
//! discontinuous regime, on a uniform grid over `[0, 10]`.

use std::hint::black_box;
use std::io::Write;
use std::time::{Duration, Instant};

use crate::error::{Error, Result};
use crate::pie_prox::{t_operator_malek, t_operator_refined, PieParams, PieProx, ProxSet};

/// `(mu, lambda, sigma)` rows of the published timing table.
pub const PUBLISHED_ROWS: [(f64, f64, f64); 4] = [
    (1.0, 1.0, 0.2),
    (1.0, 0.5, 0.5),
    (1.0, 0.1, 0.2),
    (0.2, 0.1, 0.1),
];

pub const DEFAULT_POINTS: usize = 1_000_000;

const REPEATS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimingRow {
    pub mu: f64,
    pub lambda: f64,
    pub sigma: f64,
    pub baseline_s: f64,
    pub refined_s: f64,
    pub threshold_s: f64,
}

impl TimingRow {
    /// `threshold < refined < baseline`.
    pub fn ordering_holds(&self) -> bool {
        self.threshold_s < self.refined_s && self.refined_s < self.baseline_s
    }

    pub fn threshold_ratio(&self) -> f64 {
        self.threshold_s / self.baseline_s
    }
}

pub fn grid(points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..points)
            .map(|i| 10.0 * i as f64 / (points - 1) as f64)
            .collect(),
    }
}

/// Best of [`REPEATS`] timed passes after one untimed warm-up.
fn best_time(xs: &[f64], f: impl Fn(f64) -> ProxSet) -> f64 {
    let pass = || {
        let mut acc = 0.0;
        for &x in xs {
            acc += f(black_box(x)).select();
        }
        black_box(acc);
    };
    pass();
    let mut best = Duration::MAX;
    for _ in 0..REPEATS {
        let start = Instant::now();
        pass();
        best = best.min(start.elapsed());
    }
    best.as_secs_f64()
}

/// Checks that the three formulas agree on every grid point (ties compared
/// through their selected element), then times each.
pub fn timing_row(points: usize, mu: f64, lambda: f64, sigma: f64) -> Result<TimingRow> {
    let p = PieParams::new(mu, lambda, sigma)?;
    let prepared = PieProx::new(p);
    let xs = grid(points);
    // Fails early outside the discontinuous regime.
    t_operator_refined(0.0, &p)?;
    let refined = |x: f64| t_operator_refined(x, &p).unwrap_or(ProxSet::single(f64::NAN));
    let baseline = |x: f64| t_operator_malek(x, &p);
    let threshold = |x: f64| prepared.t(x);

    for &x in &xs {
        let (a, b, c) = (baseline(x), refined(x), threshold(x));
        if !(a.agrees_with(&b) && b.agrees_with(&c)) {
            return Err(Error::Assertion(format!(
                "formulas disagree at x0 = {x}: baseline {:?}, refined {:?}, threshold {:?}",
                a.values(),
                b.values(),
                c.values()
            )));
        }
    }

    Ok(TimingRow {
        mu,
        lambda,
        sigma,
        baseline_s: best_time(&xs, baseline),
        refined_s: best_time(&xs, refined),
        threshold_s: best_time(&xs, threshold),
    })
}

pub fn timing_bench(points: usize, rows: &[(f64, f64, f64)]) -> Result<Vec<TimingRow>> {
    rows.iter()
        .map(|&(mu, lambda, sigma)| timing_row(points, mu, lambda, sigma))
        .collect()
}

pub fn write_timing_csv<W: Write>(rows: &[TimingRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "mu",
        "lambda",
        "sigma",
        "baseline_s",
        "refined_s",
        "threshold_s",
        "threshold_over_baseline",
    ])?;
    for r in rows {
        w.write_record([
            r.mu.to_string(),
            r.lambda.to_string(),
            r.sigma.to_string(),
            r.baseline_s.to_string(),
            r.refined_s.to_string(),
            r.threshold_s.to_string(),
            r.threshold_ratio().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
