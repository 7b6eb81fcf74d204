//! The `mu = lambda = 1, sigma = 2, x0 = 1/4` instance on which the older
//! closed form returns an infeasible negative point.

use std::io::Write;

use crate::error::Result;
use crate::pie_prox::{
    objective_l_hat, prox_pie, t_operator_malek, x1_candidate, PieParams, ProxSet,
};

pub const MU: f64 = 1.0;
pub const LAMBDA: f64 = 1.0;
pub const SIGMA: f64 = 2.0;
pub const X0: f64 = 0.25;

const GRID_POINTS: usize = 10_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub value: f64,
    pub expected: String,
    pub passed: bool,
}

fn near(name: &'static str, value: f64, target: f64, tol: f64) -> Check {
    Check {
        name,
        value,
        expected: format!("{target} +- {tol}"),
        passed: (value - target).abs() <= tol,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CounterexampleReport {
    pub checks: Vec<Check>,
    pub baseline: ProxSet,
    pub prox: ProxSet,
}

impl CounterexampleReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["check", "value", "expected", "pass"])?;
        for c in &self.checks {
            w.write_record([
                c.name.to_string(),
                c.value.to_string(),
                c.expected.clone(),
                c.passed.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Left-most minimizer of `L_hat(., x0)` on a uniform grid over `[0, x0]`.
fn grid_argmin(p: &PieParams, points: usize) -> f64 {
    let mut best = (0.0, f64::INFINITY);
    for i in 0..points {
        let x = X0 * i as f64 / (points - 1) as f64;
        let v = objective_l_hat(x, X0, p);
        if v < best.1 {
            best = (x, v);
        }
    }
    best.0
}

pub fn counterexample_check() -> CounterexampleReport {
    let p = PieParams::new(MU, LAMBDA, SIGMA).expect("fixed parameters are valid");
    let x1 = x1_candidate(X0, &p).unwrap_or(f64::NAN);
    let baseline = t_operator_malek(X0, &p);
    let prox = prox_pie(X0, &p);
    let grid = grid_argmin(&p, GRID_POINTS);

    let checks = vec![
        near("x1", x1, -0.3438, 1e-4),
        near(
            "objective_at_x1",
            objective_l_hat(x1, X0, &p),
            -0.0113,
            1e-4,
        ),
        near(
            "objective_at_zero",
            objective_l_hat(0.0, X0, &p),
            1.0 / 32.0,
            1e-12,
        ),
        near("lower_band", p.lower_band(), -0.7726, 1e-4),
        Check {
            name: "baseline_is_negative",
            value: baseline.select(),
            expected: "< 0".into(),
            passed: baseline.select() < 0.0,
        },
        Check {
            name: "prox_is_zero",
            value: prox.select(),
            expected: "{0}".into(),
            passed: prox == ProxSet::zero(),
        },
        Check {
            name: "grid_argmin",
            value: grid,
            expected: "0".into(),
            passed: grid == 0.0,
        },
    ];
    CounterexampleReport {
        checks,
        baseline,
        prox,
    }
}
