//! Separable l0-surrogate penalties and their scalar proximal maps.
//!
//! Every penalty is stored with its regularization weight `lambda` folded in,
//! so [`penalty_value`] is the full per-coordinate penalty `P(x)`. The prox of
//! step `mu` is
//!
//! ```text
//! argmin_x  mu * P(x) + (x - x0)^2 / 2
//! ```
//!
//! For penalties of the form `lambda * g(x)` (PiE, soft, hard, half, Log, TL1,
//! CaP) this is the textbook formula with `lambda` replaced by `mu * lambda`.
//! SCAD and MCP carry `lambda` inside their breakpoints as well, so they are
//! rescaled separately: `mu * MCP(lambda, a) = MCP(mu*lambda, a/mu)`, and SCAD
//! uses the closed form for general `mu`.

use std::fmt;
use std::str::FromStr;

use crate::error::{check_positive, Error, Result};
use crate::pie_prox::{PieParams, PieProx, ProxSet};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PenaltyKind {
    Pie { sigma: f64 },
    Soft,
    Hard,
    Half,
    Scad { a: f64 },
    Mcp { a: f64 },
    Log { a: f64 },
    Tl1 { a: f64 },
    Cap { a: f64 },
}

impl PenaltyKind {
    pub fn name(&self) -> &'static str {
        match self {
            PenaltyKind::Pie { .. } => "pie",
            PenaltyKind::Soft => "soft",
            PenaltyKind::Hard => "hard",
            PenaltyKind::Half => "half",
            PenaltyKind::Scad { .. } => "scad",
            PenaltyKind::Mcp { .. } => "mcp",
            PenaltyKind::Log { .. } => "log",
            PenaltyKind::Tl1 { .. } => "tl1",
            PenaltyKind::Cap { .. } => "cap",
        }
    }

    /// Shape parameter (`sigma` or `a`), if the penalty has one.
    pub fn shape(&self) -> Option<f64> {
        match *self {
            PenaltyKind::Pie { sigma } => Some(sigma),
            PenaltyKind::Soft | PenaltyKind::Hard | PenaltyKind::Half => None,
            PenaltyKind::Scad { a }
            | PenaltyKind::Mcp { a }
            | PenaltyKind::Log { a }
            | PenaltyKind::Tl1 { a }
            | PenaltyKind::Cap { a } => Some(a),
        }
    }
}

/// A penalty with its regularization weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PenaltySpec {
    kind: PenaltyKind,
    lambda: f64,
}

/// Names accepted by [`PenaltySpec::from_str`], in the usual comparison order.
pub const PENALTY_NAMES: [&str; 9] = [
    "pie", "soft", "hard", "half", "scad", "mcp", "log", "tl1", "cap",
];

impl PenaltySpec {
    pub fn new(kind: PenaltyKind, lambda: f64) -> Result<Self> {
        check_positive("lambda", lambda)?;
        let shape_err = |value, reason| Error::InvalidParameter {
            name: "shape",
            value,
            reason,
        };
        match kind {
            PenaltyKind::Pie { sigma } => {
                check_positive("sigma", sigma)?;
            }
            PenaltyKind::Scad { a } => {
                if !(a.is_finite() && a > 2.0) {
                    return Err(shape_err(a, "SCAD requires a > 2"));
                }
            }
            PenaltyKind::Mcp { a } => {
                if !(a.is_finite() && a > 1.0) {
                    return Err(shape_err(a, "MCP requires a > 1"));
                }
            }
            PenaltyKind::Log { a } | PenaltyKind::Tl1 { a } | PenaltyKind::Cap { a } => {
                check_positive("a", a)?;
            }
            PenaltyKind::Soft | PenaltyKind::Hard | PenaltyKind::Half => {}
        }
        Ok(Self { kind, lambda })
    }

    pub fn pie(lambda: f64, sigma: f64) -> Result<Self> {
        Self::new(PenaltyKind::Pie { sigma }, lambda)
    }

    /// Parameters used for the penalty comparison experiments.
    pub fn comparison_default(name: &str) -> Option<Self> {
        let (kind, lambda) = match name {
            "pie" => (PenaltyKind::Pie { sigma: 0.5 }, 0.01),
            "soft" => (PenaltyKind::Soft, 0.001),
            "hard" => (PenaltyKind::Hard, 0.05),
            "half" => (PenaltyKind::Half, 0.05),
            "scad" => (PenaltyKind::Scad { a: 3.7 }, 0.05),
            "mcp" => (PenaltyKind::Mcp { a: 3.7 }, 0.05),
            "log" => (PenaltyKind::Log { a: 0.1 }, 0.001),
            "tl1" => (PenaltyKind::Tl1 { a: 2.0 }, 0.001),
            "cap" => (PenaltyKind::Cap { a: 1.0 }, 0.001),
            _ => return None,
        };
        Self::new(kind, lambda).ok()
    }

    pub fn kind(&self) -> PenaltyKind {
        self.kind
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn name(&self) -> &'static str {
        self.kind.name()
    }

    pub fn value(&self, x: f64) -> f64 {
        penalty_value(self, x)
    }
}

impl fmt::Display for PenaltySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind.shape() {
            Some(s) => write!(f, "{}:{}:{}", self.name(), self.lambda, s),
            None => write!(f, "{}:{}", self.name(), self.lambda),
        }
    }
}

/// Parses `name`, `name:lambda` or `name:lambda:shape`. Missing fields take
/// the comparison defaults.
impl FromStr for PenaltySpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.trim().split(':');
        let name = parts.next().unwrap_or("").to_ascii_lowercase();
        let default = Self::comparison_default(&name).ok_or(Error::InvalidParameter {
            name: "penalty",
            value: f64::NAN,
            reason: "unknown penalty name (expected one of pie, soft, hard, half, scad, mcp, log, tl1, cap)",
        })?;
        let parse = |field: Option<&str>, name: &'static str| -> Result<Option<f64>> {
            match field {
                None | Some("") => Ok(None),
                Some(t) => t
                    .parse::<f64>()
                    .map(Some)
                    .map_err(|_| Error::InvalidParameter {
                        name,
                        value: f64::NAN,
                        reason: "not a number",
                    }),
            }
        };
        let lambda = parse(parts.next(), "lambda")?.unwrap_or(default.lambda);
        let shape = parse(parts.next(), "shape")?;
        if parts.next().is_some() {
            return Err(Error::InvalidParameter {
                name: "penalty",
                value: f64::NAN,
                reason: "too many ':'-separated fields",
            });
        }
        let kind = match (default.kind, shape) {
            (k, None) => k,
            (PenaltyKind::Pie { .. }, Some(sigma)) => PenaltyKind::Pie { sigma },
            (PenaltyKind::Scad { .. }, Some(a)) => PenaltyKind::Scad { a },
            (PenaltyKind::Mcp { .. }, Some(a)) => PenaltyKind::Mcp { a },
            (PenaltyKind::Log { .. }, Some(a)) => PenaltyKind::Log { a },
            (PenaltyKind::Tl1 { .. }, Some(a)) => PenaltyKind::Tl1 { a },
            (PenaltyKind::Cap { .. }, Some(a)) => PenaltyKind::Cap { a },
            (_, Some(v)) => {
                return Err(Error::InvalidParameter {
                    name: "shape",
                    value: v,
                    reason: "this penalty takes no shape parameter",
                })
            }
        };
        Self::new(kind, lambda)
    }
}

/// Per-coordinate penalty `P(x)`, including the weight `lambda`.
pub fn penalty_value(spec: &PenaltySpec, x: f64) -> f64 {
    let lam = spec.lambda;
    let ax = x.abs();
    match spec.kind {
        PenaltyKind::Pie { sigma } => -lam * (-ax / sigma).exp_m1(),
        PenaltyKind::Soft => lam * ax,
        PenaltyKind::Hard => {
            if x != 0.0 {
                lam
            } else {
                0.0
            }
        }
        PenaltyKind::Half => lam * ax.sqrt(),
        PenaltyKind::Scad { a } => {
            if ax <= lam {
                lam * ax
            } else if ax <= a * lam {
                (-ax * ax + 2.0 * a * lam * ax - lam * lam) / (2.0 * (a - 1.0))
            } else {
                (a + 1.0) * lam * lam / 2.0
            }
        }
        PenaltyKind::Mcp { a } => {
            if ax <= a * lam {
                lam * ax - ax * ax / (2.0 * a)
            } else {
                a * lam * lam / 2.0
            }
        }
        PenaltyKind::Log { a } => lam * (ax / a).ln_1p(),
        PenaltyKind::Tl1 { a } => lam * (a + 1.0) * ax / (a + ax),
        PenaltyKind::Cap { a } => lam * ax.min(a),
    }
}

/// Smallest `rho` for which `P + rho/2 x^2` is convex; `None` for penalties
/// that are not weakly convex.
pub fn weak_convexity_rho(spec: &PenaltySpec) -> Option<f64> {
    let lam = spec.lambda;
    match spec.kind {
        PenaltyKind::Pie { sigma } => Some(lam / (sigma * sigma)),
        PenaltyKind::Soft => Some(0.0),
        PenaltyKind::Scad { a } => Some(1.0 / (a - 1.0)),
        PenaltyKind::Mcp { a } => Some(1.0 / a),
        PenaltyKind::Log { a } => Some(lam / (a * a)),
        PenaltyKind::Tl1 { a } => Some(2.0 * (a + 1.0) * lam / (a * a)),
        PenaltyKind::Hard | PenaltyKind::Half | PenaltyKind::Cap { .. } => None,
    }
}

/// Stationary point `r(y) = (y - a)/2 + sqrt((y + a)^2/4 - w)` of the Log prox
/// objective for `y >= 2 sqrt(w) - a`.
fn log_root(y: f64, w: f64, a: f64) -> f64 {
    let disc = ((y + a) * (y + a) / 4.0 - w).max(0.0);
    (y - a) / 2.0 + disc.sqrt()
}

/// `F(r(y)) - F(0)` for the Log prox objective `F`.
fn log_gap(y: f64, w: f64, a: f64) -> f64 {
    let r = log_root(y, w, a);
    0.5 * r * r - y * r + w * (r / a).ln_1p()
}

/// Input magnitude at which the Log prox jumps from zero, for `sqrt(w) > a`.
/// Solved by bisection on `[2 sqrt(w) - a, w / a]`.
pub fn log_prox_breakpoint(w: f64, a: f64) -> Result<f64> {
    check_positive("w", w)?;
    check_positive("a", a)?;
    if w.sqrt() <= a {
        return Err(Error::Regime {
            requirement: "sqrt(w) > a",
            detail: format!("sqrt(w) = {}, a = {}", w.sqrt(), a),
        });
    }
    let mut lo = 2.0 * w.sqrt() - a;
    let mut hi = w / a;
    let tol = 1e-12 * hi.max(1.0);
    for _ in 0..200 {
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if log_gap(mid, w, a) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `g(y)` of the TL1 prox, the largest root of the stationarity cubic.
fn tl1_root(y: f64, w: f64, a: f64) -> f64 {
    let s = a + y;
    let arg = (1.0 - 27.0 * w * a * (a + 1.0) / (2.0 * s * s * s)).clamp(-1.0, 1.0);
    2.0 / 3.0 * s * (arg.acos() / 3.0).cos() - 2.0 * a / 3.0 + y / 3.0
}

fn half_root(y: f64, w: f64) -> f64 {
    let arg = (-(27f64.sqrt() / 4.0) * w * y.powf(-1.5)).clamp(-1.0, 1.0);
    2.0 / 3.0 * y * (1.0 + (2.0 / 3.0 * arg.acos()).cos())
}

/// Hard-threshold style jump from 0 to `y` at `threshold`.
fn jump_to_identity(y: f64, threshold: f64) -> ProxSet {
    if y < threshold {
        ProxSet::zero()
    } else if y == threshold {
        ProxSet::pair(0.0, y)
    } else {
        ProxSet::single(y)
    }
}

#[derive(Debug, Clone, Copy)]
enum Prepared {
    Pie(PieProx),
    Soft {
        w: f64,
    },
    Hard {
        threshold: f64,
    },
    Half {
        w: f64,
        threshold: f64,
        tie: f64,
    },
    Scad {
        mu: f64,
        lambda: f64,
        a: f64,
    },
    Mcp {
        lambda: f64,
        a: f64,
    },
    Log {
        w: f64,
        a: f64,
        breakpoint: Option<f64>,
    },
    Tl1 {
        w: f64,
        a: f64,
    },
    Cap {
        w: f64,
        a: f64,
    },
}

/// Scalar prox of `mu * P` with every per-parameter constant (PiE threshold,
/// Log breakpoint) solved once.
#[derive(Debug, Clone, Copy)]
pub struct ScalarProx {
    spec: PenaltySpec,
    mu: f64,
    prepared: Prepared,
}

impl ScalarProx {
    pub fn new(spec: &PenaltySpec, mu: f64) -> Result<Self> {
        check_positive("mu", mu)?;
        let lam = spec.lambda;
        let w = mu * lam;
        let prepared = match spec.kind {
            PenaltyKind::Pie { sigma } => {
                Prepared::Pie(PieProx::new(PieParams::new(mu, lam, sigma)?))
            }
            PenaltyKind::Soft => Prepared::Soft { w },
            PenaltyKind::Hard => Prepared::Hard {
                threshold: (2.0 * w).sqrt(),
            },
            PenaltyKind::Half => Prepared::Half {
                w,
                threshold: 1.5 * w.powf(2.0 / 3.0),
                tie: w.powf(2.0 / 3.0),
            },
            PenaltyKind::Scad { a } => Prepared::Scad { mu, lambda: lam, a },
            PenaltyKind::Mcp { a } => Prepared::Mcp {
                lambda: w,
                a: a / mu,
            },
            PenaltyKind::Log { a } => Prepared::Log {
                w,
                a,
                breakpoint: if w.sqrt() > a {
                    Some(log_prox_breakpoint(w, a)?)
                } else {
                    None
                },
            },
            PenaltyKind::Tl1 { a } => Prepared::Tl1 { w, a },
            PenaltyKind::Cap { a } => Prepared::Cap { w, a },
        };
        Ok(Self {
            spec: *spec,
            mu,
            prepared,
        })
    }

    pub fn spec(&self) -> &PenaltySpec {
        &self.spec
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// The objective `mu * P(x) + (x - x0)^2 / 2` this prox minimizes.
    pub fn objective(&self, x: f64, x0: f64) -> f64 {
        let d = x - x0;
        self.mu * penalty_value(&self.spec, x) + 0.5 * d * d
    }

    /// Minimizer set, ascending.
    pub fn prox(&self, x0: f64) -> ProxSet {
        if let Prepared::Pie(p) = &self.prepared {
            return p.prox(x0);
        }
        self.prox_magnitude(x0.abs()).with_sign_of(x0)
    }

    /// Single-valued selection; see [`ProxSet::select`].
    pub fn select(&self, x0: f64) -> f64 {
        self.prox(x0).select()
    }

    /// Minimizer set for `y = |x0| >= 0`, before the sign is restored.
    fn prox_magnitude(&self, y: f64) -> ProxSet {
        match self.prepared {
            Prepared::Pie(p) => p.t(y),
            Prepared::Soft { w } => {
                if y <= w {
                    ProxSet::zero()
                } else {
                    ProxSet::single(y - w)
                }
            }
            Prepared::Hard { threshold } => jump_to_identity(y, threshold),
            Prepared::Half { w, threshold, tie } => {
                if y < threshold {
                    ProxSet::zero()
                } else if y == threshold {
                    ProxSet::pair(0.0, tie)
                } else {
                    ProxSet::single(half_root(y, w))
                }
            }
            Prepared::Scad { mu, lambda, a } => self.scad(y, mu, lambda, a),
            Prepared::Mcp { lambda, a } => {
                if a > 1.0 {
                    if y <= a * lambda {
                        ProxSet::single((y - lambda).max(0.0) / (1.0 - 1.0 / a))
                    } else {
                        ProxSet::single(y)
                    }
                } else {
                    // Concave below a*lambda: the prox degenerates to a jump.
                    jump_to_identity(y, a.sqrt() * lambda)
                }
            }
            Prepared::Log { w, a, breakpoint } => match breakpoint {
                None => {
                    if y <= w / a {
                        ProxSet::zero()
                    } else {
                        ProxSet::single(log_root(y, w, a))
                    }
                }
                Some(bp) => {
                    if y < bp {
                        ProxSet::zero()
                    } else if y == bp {
                        ProxSet::pair(0.0, log_root(bp, w, a))
                    } else {
                        ProxSet::single(log_root(y, w, a))
                    }
                }
            },
            Prepared::Tl1 { w, a } => {
                if w <= a * a / (2.0 * (a + 1.0)) {
                    if y <= w * (a + 1.0) / a {
                        ProxSet::zero()
                    } else {
                        ProxSet::single(tl1_root(y, w, a))
                    }
                } else {
                    let s = (2.0 * w * (a + 1.0)).sqrt();
                    let threshold = s - a / 2.0;
                    if y < threshold {
                        ProxSet::zero()
                    } else if y == threshold {
                        ProxSet::pair(0.0, s - a)
                    } else {
                        ProxSet::single(tl1_root(y, w, a))
                    }
                }
            }
            Prepared::Cap { w, a } => {
                if w <= 2.0 * a {
                    let jump = a + w / 2.0;
                    if y < w {
                        ProxSet::zero()
                    } else if y < jump {
                        ProxSet::single(y - w)
                    } else if y == jump {
                        ProxSet::pair(y, y - w)
                    } else {
                        ProxSet::single(y)
                    }
                } else {
                    jump_to_identity(y, (2.0 * a * w).sqrt())
                }
            }
        }
    }

    fn scad(&self, y: f64, mu: f64, lambda: f64, a: f64) -> ProxSet {
        if mu < a - 1.0 {
            if y <= lambda * (1.0 + mu) {
                ProxSet::single((y - mu * lambda).max(0.0))
            } else if y <= a * lambda {
                ProxSet::single(((a - 1.0) * y - mu * a * lambda) / (a - 1.0 - mu))
            } else {
                ProxSet::single(y)
            }
        } else {
            // Middle piece is concave in x: compare the piecewise candidates.
            let candidates = [
                (y - mu * lambda).clamp(0.0, lambda),
                lambda,
                a * lambda,
                y.max(a * lambda),
            ];
            self.argmin_of(y, &candidates)
        }
    }

    fn argmin_of(&self, y: f64, candidates: &[f64]) -> ProxSet {
        let mut best = f64::INFINITY;
        let mut set: Option<ProxSet> = None;
        for &c in candidates {
            let v = self.objective(c, y);
            if v < best {
                best = v;
                set = Some(ProxSet::single(c));
            } else if v == best {
                if let Some(s) = set {
                    if s.is_singleton() && s.min() != c {
                        set = Some(ProxSet::pair(s.min(), c));
                    }
                }
            }
        }
        set.unwrap_or_else(ProxSet::zero)
    }
}

/// Minimizer set of `mu * P(x) + (x - x0)^2 / 2`.
pub fn prox_scalar(spec: &PenaltySpec, mu: f64, x0: f64) -> Result<ProxSet> {
    Ok(ScalarProx::new(spec, mu)?.prox(x0))
}
