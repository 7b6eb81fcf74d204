//! Threshold table: `x*` and the jump location for a list of `(mu*lambda, sigma)`.

use std::io::Write;

use crate::error::{Error, Result};
use crate::pie_prox::{threshold_bar_tau, PieParams, ThresholdResult};

/// A published `(mu*lambda, sigma, x*, bar_tau)` entry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdEntry {
    pub mu_lambda: f64,
    pub sigma: f64,
    pub x_star: f64,
    pub bar_tau: f64,
}

const fn entry(mu_lambda: f64, sigma: f64, x_star: f64, bar_tau: f64) -> ThresholdEntry {
    ThresholdEntry {
        mu_lambda,
        sigma,
        x_star,
        bar_tau,
    }
}

/// Reference values, rounded as published.
#[allow(clippy::approx_constant)]
pub const PUBLISHED: [ThresholdEntry; 18] = [
    entry(2.0, 1.4, 0.04247947, 1.42835552),
    entry(2.0, 1.0, 1.09157888, 1.76295101),
    entry(2.0, 0.5, 1.88725512, 1.97904843),
    entry(2.0, 0.3, 1.98992887, 1.99870274),
    entry(2.0, 0.2, 1.9994994, 1.99995454),
    entry(2.0, 0.1, 1.99999996, 2.0),
    entry(1.0, 0.99, 0.02988714, 1.00994987),
    entry(1.0, 0.9, 0.28837712, 1.09487137),
    entry(1.0, 0.5, 1.16132153, 1.3573499),
    entry(1.0, 0.3, 1.3730464, 1.40733821),
    entry(1.0, 0.2, 1.40925117, 1.41360448),
    entry(1.0, 0.1, 1.41420584, 1.41421305),
    entry(0.25, 0.49, 0.02977356, 0.5098995),
    entry(0.25, 0.3, 0.49609826, 0.65555503),
    entry(0.25, 0.2, 0.64499062, 0.69468768),
    entry(0.25, 0.1, 0.70462559, 0.70680224),
    entry(0.25, 0.05, 0.70710291, 0.70710652),
    entry(0.25, 0.02, 0.70710678, 0.70710678),
];

pub fn published_pairs() -> Vec<(f64, f64)> {
    PUBLISHED.iter().map(|e| (e.mu_lambda, e.sigma)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdRow {
    pub mu_lambda: f64,
    pub sigma: f64,
    pub result: Result<ThresholdResult>,
}

/// Solves the threshold for each pair with `mu = 1`, `lambda = mu*lambda`.
/// A pair outside the discontinuous regime gives an error in its row only.
pub fn table1_report(pairs: &[(f64, f64)]) -> Vec<ThresholdRow> {
    pairs
        .iter()
        .map(|&(mu_lambda, sigma)| ThresholdRow {
            mu_lambda,
            sigma,
            result: PieParams::new(1.0, mu_lambda, sigma).and_then(|p| threshold_bar_tau(&p)),
        })
        .collect()
}

/// Largest deviation of `rows` from [`PUBLISHED`], matching rows by pair.
pub fn max_published_deviation(rows: &[ThresholdRow]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for row in rows {
        let reference = PUBLISHED
            .iter()
            .find(|e| e.mu_lambda == row.mu_lambda && e.sigma == row.sigma)
            .ok_or_else(|| {
                Error::Assertion(format!(
                    "({}, {}) has no published entry",
                    row.mu_lambda, row.sigma
                ))
            })?;
        let r = row.result.as_ref().map_err(Clone::clone)?;
        worst = worst
            .max((r.x_star - reference.x_star).abs())
            .max((r.bar_tau - reference.bar_tau).abs());
    }
    Ok(worst)
}

pub fn write_table1_csv<W: Write>(rows: &[ThresholdRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["mu_lambda", "sigma", "x_star", "bar_tau", "error"])?;
    for row in rows {
        let (x, t, e) = match &row.result {
            Ok(r) => (r.x_star.to_string(), r.bar_tau.to_string(), String::new()),
            Err(e) => ("NA".into(), "NA".into(), e.to_string()),
        };
        w.write_record([row.mu_lambda.to_string(), row.sigma.to_string(), x, t, e])?;
    }
    w.flush()?;
    Ok(())
}
