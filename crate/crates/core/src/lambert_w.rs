//! Real branches `W0` and `W-1` of the Lambert W function.
//!
//! Both branches are evaluated by Halley iteration from a branch-specific
//! starting guess. Near the branch point `-1/e` the guess comes from the
//! series in `p = sqrt(2(e x + 1))`; elsewhere a logarithmic asymptotic
//! guess is used. Arguments that fall below `-1/e` by at most
//! [`BRANCH_CLAMP`] are treated as `-1/e`.

use std::f64::consts::E;

use crate::error::{Error, Result};

/// `1/e` rounded to nearest.
pub const INV_E: f64 = 0.367_879_441_171_442_33;

/// Absolute slack below `-1/e` that is clamped onto the branch point.
pub const BRANCH_CLAMP: f64 = 1e-12;

const MAX_ITER: usize = 40;
const STEP_TOL: f64 = 1e-15;
const RESIDUAL_TOL: f64 = 1e-14;

/// Which real branch to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Principal,
    Lower,
}

impl Branch {
    fn name(self) -> &'static str {
        match self {
            Branch::Principal => "W0",
            Branch::Lower => "W-1",
        }
    }

    pub fn eval(self, x: f64) -> Result<f64> {
        match self {
            Branch::Principal => w0(x),
            Branch::Lower => wm1(x),
        }
    }
}

fn clamp_to_domain(x: f64, branch: Branch) -> Result<f64> {
    if x.is_nan() || x < -INV_E - BRANCH_CLAMP {
        return Err(Error::LambertDomain {
            branch: branch.name(),
            x,
        });
    }
    Ok(x.max(-INV_E))
}

/// `p = sqrt(2(e x + 1))`, computed from the offset to the branch point so
/// that it stays real for every clamped argument.
fn branch_offset(x: f64) -> f64 {
    (2.0 * E * (x + INV_E)).max(0.0).sqrt()
}

/// Principal branch, `W0(x) >= -1`, defined for `x >= -1/e`.
pub fn w0(x: f64) -> Result<f64> {
    let x = clamp_to_domain(x, Branch::Principal)?;
    if x == -INV_E {
        return Ok(-1.0);
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x == f64::INFINITY {
        return Ok(f64::INFINITY);
    }

    if x < -0.25 {
        let p = branch_offset(x);
        let guess = -1.0 + p * (1.0 + p * (-1.0 / 3.0 + p * 11.0 / 72.0));
        return Ok(halley_product(x, guess).max(-1.0));
    }
    if x < 3.0 {
        // Winitzki's approximation, good to a few percent on this range.
        let l = x.ln_1p();
        let guess = l * (1.0 - l.ln_1p() / (2.0 + l));
        if x < 1.0 {
            return Ok(halley_product(x, guess));
        }
        return Ok(halley_log(x.ln(), guess, 1.0));
    }
    let l1 = x.ln();
    let l2 = l1.ln();
    let guess = l1 - l2 + l2 / l1;
    Ok(halley_log(l1, guess, 1.0))
}

/// Lower branch, `W-1(x) <= -1`, defined for `-1/e <= x < 0`.
pub fn wm1(x: f64) -> Result<f64> {
    if x >= 0.0 {
        return Err(Error::LambertDomain {
            branch: Branch::Lower.name(),
            x,
        });
    }
    let x = clamp_to_domain(x, Branch::Lower)?;
    if x == -INV_E {
        return Ok(-1.0);
    }

    if x < -0.25 {
        let p = branch_offset(x);
        let guess = -1.0 - p * (1.0 + p * (1.0 / 3.0 + p * 11.0 / 72.0));
        return Ok(halley_product(x, guess).min(-1.0));
    }
    let l1 = (-x).ln();
    let l2 = (-l1).ln();
    let guess = l1 - l2 + l2 / l1;
    Ok(halley_log((-x).ln(), guess, -1.0))
}

/// Halley iteration on `f(w) = w e^w - x`.
fn halley_product(x: f64, mut w: f64) -> f64 {
    let scale = x.abs().max(1.0);
    for _ in 0..MAX_ITER {
        let ew = w.exp();
        let f = w * ew - x;
        if f.abs() <= RESIDUAL_TOL * scale {
            break;
        }
        let wp1 = w + 1.0;
        if wp1 == 0.0 {
            break;
        }
        let step = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1));
        if !step.is_finite() {
            break;
        }
        w -= step;
        if step.abs() <= STEP_TOL * (1.0 + w.abs()) {
            break;
        }
    }
    w
}

/// Halley iteration on `g(w) = w + ln(sign * w) - ln|x|`, which avoids
/// overflow and underflow of `e^w` away from the branch point. `sign` is the
/// sign of `w` on the branch being solved.
fn halley_log(ln_abs_x: f64, mut w: f64, sign: f64) -> f64 {
    for _ in 0..MAX_ITER {
        let g = w + (sign * w).ln() - ln_abs_x;
        let d1 = 1.0 + 1.0 / w;
        let d2 = -1.0 / (w * w);
        let step = g / (d1 - g * d2 / (2.0 * d1));
        if !step.is_finite() {
            break;
        }
        w -= step;
        if step.abs() <= STEP_TOL * (1.0 + w.abs()) {
            break;
        }
    }
    w
}
