//! Proximal operator of the piece-wise exponential (PiE) penalty
//! `lambda * (1 - exp(-|x| / sigma))`.
//!
//! The prox of weight `mu` at `x0` is `sign(x0) * T(|x0|)`, where `T` minimizes
//! the half-line objective [`objective_l_hat`] over `x >= 0`. With
//! `r = mu*lambda/sigma^2`:
//!
//! * `r <= 1`: `T` is continuous; it is zero up to `mu*lambda/sigma` and equals
//!   the principal Lambert-W stationary point [`x1_candidate`] beyond it.
//! * `r > 1`: `T` jumps from zero to `x1` at the threshold `bar_tau`, found by
//!   minimizing `H(x) = x/2 + mu*lambda*(1 - exp(-x/sigma))/x` over `x > 0`.
//!
//! [`t_operator_malek`] keeps the older closed form that skips the `r <= 1`
//! case. It is only here as a regression and timing baseline.

use crate::error::{check_positive, Error, Result};
use crate::lambert_w;

/// `(mu, lambda, sigma)` for one scalar PiE prox problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PieParams {
    mu: f64,
    lambda: f64,
    sigma: f64,
}

impl PieParams {
    pub fn new(mu: f64, lambda: f64, sigma: f64) -> Result<Self> {
        Ok(Self {
            mu: check_positive("mu", mu)?,
            lambda: check_positive("lambda", lambda)?,
            sigma: check_positive("sigma", sigma)?,
        })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn mu_lambda(&self) -> f64 {
        self.mu * self.lambda
    }

    /// `mu*lambda/sigma^2`; the prox is discontinuous exactly when this exceeds 1.
    pub fn ratio(&self) -> f64 {
        self.mu * self.lambda / (self.sigma * self.sigma)
    }

    pub fn is_discontinuous(&self) -> bool {
        self.ratio() > 1.0
    }

    /// `sigma * (1 + ln(mu*lambda/sigma^2))`, the smallest `|x0|` that can have a
    /// nonzero minimizer.
    pub fn lower_band(&self) -> f64 {
        self.sigma * (1.0 + self.ratio().ln())
    }

    fn require_discontinuous(&self) -> Result<()> {
        if self.is_discontinuous() {
            Ok(())
        } else {
            Err(Error::Regime {
                requirement: "mu*lambda/sigma^2 > 1",
                detail: format!("mu*lambda/sigma^2 = {}", self.ratio()),
            })
        }
    }
}

/// Minimizer set of a scalar proximal problem: one value, or two at a tie.
/// Values are kept in ascending order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProxSet {
    values: [f64; 2],
    len: usize,
}

impl ProxSet {
    pub fn single(v: f64) -> Self {
        Self {
            values: [v, v],
            len: 1,
        }
    }

    pub fn pair(a: f64, b: f64) -> Self {
        if a == b {
            return Self::single(a);
        }
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        Self {
            values: [lo, hi],
            len: 2,
        }
    }

    pub fn zero() -> Self {
        Self::single(0.0)
    }

    pub fn values(&self) -> &[f64] {
        &self.values[..self.len]
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn is_singleton(&self) -> bool {
        self.len == 1
    }

    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn max(&self) -> f64 {
        self.values[self.len - 1]
    }

    /// Elementwise negation, order preserved.
    pub fn negate(&self) -> Self {
        let neg = |v: f64| if v == 0.0 { 0.0 } else { -v };
        match self.len {
            1 => Self::single(neg(self.values[0])),
            _ => Self::pair(neg(self.values[0]), neg(self.values[1])),
        }
    }

    /// Multiply every element by `sign(x0)`, with `sign(0) = +1`.
    pub fn with_sign_of(&self, x0: f64) -> Self {
        if x0 < 0.0 {
            self.negate()
        } else {
            *self
        }
    }

    /// Single-valued selection used inside iterative solvers. At a tie the
    /// element of largest magnitude (the nonzero one for `{0, v}`) wins.
    pub fn select(&self) -> f64 {
        match self.len {
            1 => self.values[0],
            _ => {
                if self.values[1].abs() >= self.values[0].abs() {
                    self.values[1]
                } else {
                    self.values[0]
                }
            }
        }
    }

    /// Two sets are equal up to the representation of a tie when they share
    /// their selected element.
    pub fn agrees_with(&self, other: &ProxSet) -> bool {
        self == other || self.select() == other.select()
    }
}

/// Result of the threshold search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdResult {
    /// Minimizer of `H` on `(0, inf)`.
    pub x_star: f64,
    /// The jump location `bar_tau = H(x_star)`.
    pub bar_tau: f64,
    pub iterations: usize,
}

/// `lambda(1 - e^{-x/sigma}) + (x - |x0|)^2 / (2 mu)`, evaluated as written for
/// any real `x` (negative `x` is allowed so that the baseline formula's output
/// can be scored).
pub fn objective_l_hat(x: f64, x0: f64, p: &PieParams) -> f64 {
    let d = x - x0.abs();
    -p.lambda * (-x / p.sigma).exp_m1() + d * d / (2.0 * p.mu)
}

/// Full-line objective `lambda(1 - e^{-|x|/sigma}) + (x - x0)^2 / (2 mu)`.
pub fn objective_l(x: f64, x0: f64, p: &PieParams) -> f64 {
    let d = x - x0;
    -p.lambda * (-x.abs() / p.sigma).exp_m1() + d * d / (2.0 * p.mu)
}

/// First three derivatives of [`objective_l_hat`] in `x`, for `x > 0`.
pub fn l_hat_derivatives(x: f64, x0: f64, p: &PieParams) -> (f64, f64, f64) {
    let e = (-x / p.sigma).exp();
    let s2 = p.sigma * p.sigma;
    let d1 = p.lambda / p.sigma * e + (x - x0.abs()) / p.mu;
    let d2 = -p.lambda / s2 * e + 1.0 / p.mu;
    let d3 = p.lambda / (s2 * p.sigma) * e;
    (d1, d2, d3)
}

/// Argument `-(mu*lambda/sigma^2) e^{-|x0|/sigma}` of the Lambert function.
fn lambert_argument(x0: f64, p: &PieParams) -> f64 {
    -p.ratio() * (-x0.abs() / p.sigma).exp()
}

/// Stationary point `sigma * W0(-(mu*lambda/sigma^2) e^{-|x0|/sigma}) + |x0|`.
pub fn x1_candidate(x0: f64, p: &PieParams) -> Result<f64> {
    let w = lambert_w::w0(lambert_argument(x0, p))?;
    Ok(p.sigma * w + x0.abs())
}

/// Callers only reach this where the Lambert argument lies in `[-1/e, 0)`
/// analytically; a non-finite `x0` yields NaN instead of an error.
fn x1_unchecked(x0: f64, p: &PieParams) -> f64 {
    x1_candidate(x0, p).unwrap_or(f64::NAN)
}

/// `((1 + t) e^{-t} - 1) / t^2` without cancellation near `t = 0`.
fn h_kernel(t: f64) -> f64 {
    if t < 0.1 {
        // sum_{n>=2} (-1)^{n+1} (n-1)/n! t^{n-2}
        let mut term_fact = 2.0; // n!
        let mut tp = 1.0; // t^{n-2}
        let mut sum = 0.0;
        for n in 2..20 {
            if n > 2 {
                term_fact *= n as f64;
                tp *= t;
            }
            let sign = if n % 2 == 0 { -1.0 } else { 1.0 };
            sum += sign * (n as f64 - 1.0) / term_fact * tp;
        }
        sum
    } else {
        ((1.0 + t) * (-t).exp() - 1.0) / (t * t)
    }
}

/// `H(x) = x/2 + mu*lambda*(1 - e^{-x/sigma})/x` for `x > 0`.
pub fn threshold_h(x: f64, p: &PieParams) -> f64 {
    0.5 * x - p.mu_lambda() * (-x / p.sigma).exp_m1() / x
}

/// `H'(x) = 1/2 + mu*lambda*((x/sigma + 1) e^{-x/sigma} - 1)/x^2`.
pub fn threshold_h_prime(x: f64, p: &PieParams) -> f64 {
    0.5 + p.ratio() * h_kernel(x / p.sigma)
}

const BISECT_MAX_ITER: usize = 200;
const BISECT_REL_TOL: f64 = 1e-14;

/// Threshold `bar_tau` for the discontinuous regime, by bisection on
/// `H'(x) = 0` over `(0, sqrt(2 mu lambda))`.
pub fn threshold_bar_tau(p: &PieParams) -> Result<ThresholdResult> {
    p.require_discontinuous()?;
    let upper = (2.0 * p.mu_lambda()).sqrt();

    let mut lo = 1e-12 * upper;
    while threshold_h_prime(lo, p) >= 0.0 {
        lo *= 0.5;
        if lo == 0.0 {
            return Err(Error::Convergence {
                what: "threshold bracket search",
                iterations: BISECT_MAX_ITER,
            });
        }
    }
    let mut hi = upper;
    let mut iterations = 0;
    while iterations < BISECT_MAX_ITER && hi - lo > BISECT_REL_TOL * upper {
        let mid = 0.5 * (lo + hi);
        if threshold_h_prime(mid, p) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        iterations += 1;
    }
    let x_star = 0.5 * (lo + hi);
    let bar_tau = x_star + p.mu_lambda() / p.sigma * (-x_star / p.sigma).exp();
    Ok(ThresholdResult {
        x_star,
        bar_tau,
        iterations,
    })
}

/// `T(x0)` for the continuous regime.
fn t_continuous(x0: f64, p: &PieParams) -> ProxSet {
    let a = x0.abs();
    if a <= p.mu_lambda() / p.sigma {
        ProxSet::zero()
    } else {
        ProxSet::single(x1_unchecked(a, p))
    }
}

/// `T(x0)` for the discontinuous regime given the threshold.
fn t_thresholded(x0: f64, p: &PieParams, bar_tau: f64) -> ProxSet {
    let a = x0.abs();
    if a < bar_tau {
        ProxSet::zero()
    } else if a == bar_tau {
        ProxSet::pair(0.0, x1_unchecked(a, p))
    } else {
        ProxSet::single(x1_unchecked(a, p))
    }
}

/// Minimizer set of [`objective_l_hat`] over `x >= 0`.
///
/// In the discontinuous regime this solves for the threshold on every call;
/// use [`PieProx`] to evaluate many points with the same parameters.
pub fn t_operator(x0: f64, p: &PieParams) -> ProxSet {
    PieProx::new(*p).t(x0)
}

/// `argmin_{x in {0, x1}} L_hat(x, x0)`, keeping both at exact equality.
fn compare_zero_and_x1(x0: f64, x1: f64, p: &PieParams) -> ProxSet {
    let at_x1 = objective_l_hat(x1, x0, p);
    let at_zero = objective_l_hat(0.0, x0, p);
    if at_x1 < at_zero {
        ProxSet::single(x1)
    } else if at_x1 == at_zero {
        ProxSet::pair(0.0, x1)
    } else {
        ProxSet::zero()
    }
}

/// Band formula for the discontinuous regime: zero below
/// `sigma(1 + ln r)`, an objective comparison up to
/// `min(mu*lambda/sigma, sqrt(2 mu lambda))`, and `x1` above. Band limits
/// are evaluated on every call.
pub fn t_operator_refined(x0: f64, p: &PieParams) -> Result<ProxSet> {
    p.require_discontinuous()?;
    let a = x0.abs();
    if a < p.lower_band() {
        return Ok(ProxSet::zero());
    }
    let upper = (p.mu_lambda() / p.sigma).min((2.0 * p.mu_lambda()).sqrt());
    let x1 = x1_unchecked(a, p);
    if a <= upper {
        Ok(compare_zero_and_x1(a, x1, p))
    } else {
        Ok(ProxSet::single(x1))
    }
}

/// The older closed form: zero below `sigma(1 + ln r)` and an objective
/// comparison against `x1` everywhere above it, in every regime.
///
/// This is wrong when `mu*lambda/sigma^2 <= 1`, where it can return a
/// negative "minimizer" outside the feasible half-line. Kept verbatim.
pub fn t_operator_malek(x0: f64, p: &PieParams) -> ProxSet {
    let a = x0.abs();
    if a < p.lower_band() {
        return ProxSet::zero();
    }
    let x1 = x1_unchecked(a, p);
    compare_zero_and_x1(a, x1, p)
}

/// `Prox(x0) = sign(x0) T(x0)`.
pub fn prox_pie(x0: f64, p: &PieParams) -> ProxSet {
    t_operator(x0, p).with_sign_of(x0)
}

/// Single-valued prox: the unique element, or the nonzero one at a tie.
pub fn prox_pie_select(x0: f64, p: &PieParams) -> f64 {
    prox_pie(x0, p).select()
}

/// PiE prox with the threshold solved once up front.
#[derive(Debug, Clone, Copy)]
pub struct PieProx {
    params: PieParams,
    threshold: Option<ThresholdResult>,
}

impl PieProx {
    pub fn new(params: PieParams) -> Self {
        // The bracket search cannot fail for r > 1: H'(0+) = (1 - r)/2 < 0.
        let threshold = threshold_bar_tau(&params).ok();
        Self { params, threshold }
    }

    pub fn params(&self) -> &PieParams {
        &self.params
    }

    pub fn threshold(&self) -> Option<&ThresholdResult> {
        self.threshold.as_ref()
    }

    pub fn t(&self, x0: f64) -> ProxSet {
        match &self.threshold {
            Some(th) => t_thresholded(x0, &self.params, th.bar_tau),
            None => t_continuous(x0, &self.params),
        }
    }

    pub fn prox(&self, x0: f64) -> ProxSet {
        self.t(x0).with_sign_of(x0)
    }

    pub fn select(&self, x0: f64) -> f64 {
        self.prox(x0).select()
    }
}
