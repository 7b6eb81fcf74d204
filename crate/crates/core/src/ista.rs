//! Iterative shrinkage-thresholding for `1/2 ||Ax - b||^2 + P(x)`.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use rand::Rng;

use crate::error::{check_positive, Error, Result};
use crate::prox_zoo::{penalty_value, weak_convexity_rho, PenaltySpec, ScalarProx};
use crate::sensing::rng_from_seed;

const POWER_MAX_ITER: usize = 5000;
const POWER_STAGNATION: f64 = 1e-10;
const POWER_SEED: u64 = 0x005e_ed0f_1a57;

#[derive(Debug, Clone)]
pub struct Problem {
    a: Array2<f64>,
    b: Array1<f64>,
    penalty: PenaltySpec,
}

impl Problem {
    pub fn new(a: Array2<f64>, b: Array1<f64>, penalty: PenaltySpec) -> Result<Self> {
        if a.nrows() != b.len() {
            return Err(Error::Dimension(format!(
                "A has {} rows but b has length {}",
                a.nrows(),
                b.len()
            )));
        }
        if a.ncols() == 0 {
            return Err(Error::Dimension("A has no columns".into()));
        }
        if !a.iter().chain(b.iter()).all(|v| v.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "A/b",
                value: f64::NAN,
                reason: "entries must be finite",
            });
        }
        Ok(Self { a, b, penalty })
    }

    pub fn a(&self) -> ArrayView2<'_, f64> {
        self.a.view()
    }

    pub fn b(&self) -> ArrayView1<'_, f64> {
        self.b.view()
    }

    pub fn penalty(&self) -> &PenaltySpec {
        &self.penalty
    }

    pub fn n(&self) -> usize {
        self.a.ncols()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IstaConfig {
    pub mu: f64,
    pub eps: f64,
    pub maxiter: usize,
    /// Starting point; zero when `None`.
    pub x_init: Option<Array1<f64>>,
    /// Record the objective at every iterate. Off for timing runs.
    pub record_trace: bool,
}

impl IstaConfig {
    /// `eps = 1e-5`, `maxiter = 3000`, zero start, trace on.
    pub fn new(mu: f64) -> Self {
        Self {
            mu,
            eps: 1e-5,
            maxiter: 3000,
            x_init: None,
            record_trace: true,
        }
    }

    pub fn eps(mut self, eps: f64) -> Self {
        self.eps = eps;
        self
    }

    pub fn maxiter(mut self, maxiter: usize) -> Self {
        self.maxiter = maxiter;
        self
    }

    pub fn x_init(mut self, x: Array1<f64>) -> Self {
        self.x_init = Some(x);
        self
    }

    pub fn record_trace(mut self, on: bool) -> Self {
        self.record_trace = on;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IstaResult {
    pub x_final: Array1<f64>,
    pub iterations: usize,
    pub final_e: f64,
    /// Objective at `x^0, ..., x^iterations`; empty if recording was off.
    pub objective_trace: Vec<f64>,
}

/// `1/2 ||Ax - b||^2 + sum_i P(x_i)`.
pub fn objective(prob: &Problem, x: ArrayView1<f64>) -> Result<f64> {
    if x.len() != prob.n() {
        return Err(Error::Dimension(format!(
            "x has length {}, expected {}",
            x.len(),
            prob.n()
        )));
    }
    Ok(objective_unchecked(prob, x))
}

fn objective_unchecked(prob: &Problem, x: ArrayView1<f64>) -> f64 {
    let r = prob.a.dot(&x) - &prob.b;
    let pen: f64 = x.iter().map(|&v| penalty_value(&prob.penalty, v)).sum();
    0.5 * r.dot(&r) + pen
}

/// Largest eigenvalue of `A^T A` by power iteration on the smaller Gram matrix.
pub fn nu_max(a: ArrayView2<f64>) -> Result<f64> {
    if a.iter().all(|&v| v == 0.0) {
        return Err(Error::InvalidParameter {
            name: "A",
            value: 0.0,
            reason: "matrix must be nonzero",
        });
    }
    let g = if a.nrows() <= a.ncols() {
        a.dot(&a.t())
    } else {
        a.t().dot(&a)
    };
    power_iteration(g.view())
}

fn power_iteration(g: ArrayView2<f64>) -> Result<f64> {
    let mut rng = rng_from_seed(POWER_SEED);
    let mut v: Array1<f64> = Array1::from_shape_simple_fn(g.nrows(), || rng.random_range(0.5..1.5));
    v /= v.dot(&v).sqrt();
    let mut q = f64::NAN;
    for _ in 0..POWER_MAX_ITER {
        let gv = g.dot(&v);
        let q_new = v.dot(&gv);
        let norm = gv.dot(&gv).sqrt();
        if norm == 0.0 {
            return Ok(0.0);
        }
        v = gv / norm;
        if (q_new - q).abs() <= POWER_STAGNATION * q_new.abs() {
            return Ok(q_new);
        }
        q = q_new;
    }
    Err(Error::Convergence {
        what: "power iteration for the largest eigenvalue",
        iterations: POWER_MAX_ITER,
    })
}

/// `2 / (nu + rho)`, or `2 / nu` when the penalty is not weakly convex.
pub fn mu_max_from_nu(nu: f64, penalty: &PenaltySpec) -> f64 {
    2.0 / (nu + weak_convexity_rho(penalty).unwrap_or(0.0))
}

pub fn mu_max(a: ArrayView2<f64>, penalty: &PenaltySpec) -> Result<f64> {
    Ok(mu_max_from_nu(nu_max(a)?, penalty))
}

fn check_config(prob: &Problem, cfg: &IstaConfig) -> Result<()> {
    check_positive("mu", cfg.mu)?;
    check_positive("eps", cfg.eps)?;
    if cfg.maxiter == 0 {
        return Err(Error::InvalidParameter {
            name: "maxiter",
            value: 0.0,
            reason: "must be positive",
        });
    }
    if let Some(x) = &cfg.x_init {
        if x.len() != prob.n() {
            return Err(Error::Dimension(format!(
                "x_init has length {}, expected {}",
                x.len(),
                prob.n()
            )));
        }
    }
    Ok(())
}

/// One gradient-plus-prox step, `select(prox(x - mu (G x - c)))`.
pub(crate) fn ista_step(
    prox: &ScalarProx,
    gram: &Array2<f64>,
    atb: &Array1<f64>,
    x: &Array1<f64>,
) -> Array1<f64> {
    let mu = prox.mu();
    let mut z = gram.dot(x);
    z.zip_mut_with(atb, |g, &c| *g -= c);
    z.zip_mut_with(x, |g, &xi| *g = xi - mu * *g);
    z.mapv_inplace(|v| prox.select(v));
    z
}

/// Runs the iteration until the relative step `||x+ - x|| / (1 + ||x||)`
/// drops to `eps` or `maxiter` steps are taken.
pub fn ista_solve(prob: &Problem, cfg: &IstaConfig) -> Result<IstaResult> {
    check_config(prob, cfg)?;
    let prox = ScalarProx::new(&prob.penalty, cfg.mu)?;
    let gram = prob.a.t().dot(&prob.a);
    let atb = prob.a.t().dot(&prob.b);

    let mut x = cfg
        .x_init
        .clone()
        .unwrap_or_else(|| Array1::zeros(prob.n()));
    let mut trace = Vec::new();
    if cfg.record_trace {
        trace.push(objective_unchecked(prob, x.view()));
    }
    let mut e = f64::INFINITY;
    let mut l = 0;
    while e > cfg.eps && l < cfg.maxiter {
        let next = ista_step(&prox, &gram, &atb, &x);
        let step = (&next - &x).mapv(|v| v * v).sum().sqrt();
        e = step / (1.0 + x.dot(&x).sqrt());
        x = next;
        l += 1;
        if cfg.record_trace {
            trace.push(objective_unchecked(prob, x.view()));
        }
    }
    Ok(IstaResult {
        x_final: x,
        iterations: l,
        final_e: e,
        objective_trace: trace,
    })
}

/// Largest coordinate distance between `x` and one ISTA step from `x`.
pub fn fixed_point_residual(prob: &Problem, mu: f64, x: ArrayView1<f64>) -> Result<f64> {
    let prox = ScalarProx::new(&prob.penalty, mu)?;
    let gram = prob.a.t().dot(&prob.a);
    let atb = prob.a.t().dot(&prob.b);
    let x = x.to_owned();
    let next = ista_step(&prox, &gram, &atb, &x);
    Ok((&next - &x).iter().fold(0.0, |m: f64, v| m.max(v.abs())))
}
