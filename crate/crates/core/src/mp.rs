//! The Manneville-Pomeau family
//!
//! ```text
//! f_t(x) = x / (1 - x^t)^(1/t)      for 0 <= x <= 2^(-1/t)
//! f_t(x) = (2 - 1/x^t)^(1/t)        for 2^(-1/t) < x <= 1
//! ```
//!
//! with its inverse branches, derivative, closed-form iterates on the left
//! branch and the fixed-point potential `V*(x) = -(1 + 1/t) log(1 - x^t)`.

use crate::error::{domain, Error, Result};
use crate::numeric::{pow, SINGULAR_GUARD};

/// Largest exponent accepted by [`LaminarParams::new`]; larger `t` overflows `x^t`
/// in the iterate formulas long before it is interesting.
pub const DEFAULT_T_MAX: f64 = 64.0;

/// Laminar parameters: the MP exponent `t`, the shift exponent `gamma = 1 + 1/t`
/// and the perturbation exponent `eps` of the potential class.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaminarParams {
    t: f64,
    gamma: f64,
    eps: f64,
}

impl LaminarParams {
    pub fn new(t: f64) -> Result<Self> {
        Self::with_limit(t, 1.0, DEFAULT_T_MAX)
    }

    /// Same as [`new`](Self::new) with an explicit perturbation exponent and cap on `t`.
    pub fn with_limit(t: f64, eps: f64, t_max: f64) -> Result<Self> {
        if !(t > 0.0 && t <= t_max) {
            return domain(format!("t = {t} outside (0, {t_max}]"));
        }
        if !(eps > 0.0) || !eps.is_finite() {
            return domain(format!("eps = {eps} must be positive"));
        }
        Ok(Self {
            t,
            gamma: 1.0 + 1.0 / t,
            eps,
        })
    }

    pub fn with_eps(self, eps: f64) -> Result<Self> {
        Self::with_limit(self.t, eps, f64::INFINITY)
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// The branch boundary `2^(-1/t)`.
    pub fn split(&self) -> f64 {
        pow(0.5, 1.0 / self.t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    Left,
    Right,
}

/// A point of `[0, 1]` tagged with the branch of `f_t` it lies on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MPPoint {
    pub x: f64,
    pub branch: Branch,
}

impl MPPoint {
    pub fn new(p: &LaminarParams, x: f64) -> Result<Self> {
        check_unit(x)?;
        Ok(Self {
            x,
            branch: branch_of(p, x),
        })
    }
}

fn check_unit(x: f64) -> Result<()> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        domain(format!("x = {x} outside [0, 1]"))
    }
}

/// The boundary point `2^(-1/t)` belongs to the left branch.
pub fn branch_of(p: &LaminarParams, x: f64) -> Branch {
    if x <= p.split() {
        Branch::Left
    } else {
        Branch::Right
    }
}

pub fn eval(p: &LaminarParams, x: f64) -> Result<f64> {
    check_unit(x)?;
    let t = p.t;
    Ok(match branch_of(p, x) {
        Branch::Left => x / pow(1.0 - pow(x, t), 1.0 / t),
        Branch::Right => pow((2.0 - 1.0 / pow(x, t)).max(0.0), 1.0 / t),
    })
}

/// The inverse branch of `f_t` landing in `branch`.
pub fn inverse_branch(p: &LaminarParams, y: f64, branch: Branch) -> Result<f64> {
    check_unit(y)?;
    let t = p.t;
    let yt = pow(y, t);
    Ok(match branch {
        Branch::Left => y / pow(1.0 + yt, 1.0 / t),
        Branch::Right => pow(1.0 / (2.0 - yt), 1.0 / t),
    })
}

pub fn derivative(p: &LaminarParams, x: f64) -> Result<f64> {
    check_unit(x)?;
    let t = p.t;
    let xt = pow(x, t);
    match branch_of(p, x) {
        Branch::Left => {
            let base = 1.0 - xt;
            if base < SINGULAR_GUARD {
                return Err(Error::Singularity {
                    at: x,
                    what: "x^t -> 1 on the left branch",
                });
            }
            Ok(1.0 / pow(base, 1.0 + 1.0 / t))
        }
        Branch::Right => {
            let base = 2.0 * xt - 1.0;
            let s = -1.0 + 1.0 / t;
            if s < 0.0 && base < SINGULAR_GUARD {
                return Err(Error::Singularity {
                    at: x,
                    what: "2 x^t -> 1 on the right branch",
                });
            }
            Ok(pow(base.max(0.0), s) / (x * x))
        }
    }
}

/// `f_t^j(x) = (1/x^t - j)^(-1/t)`, valid while the orbit stays on the left branch,
/// which requires `1/x^t - j >= 1`.
pub fn iterate_closed(p: &LaminarParams, x: f64, j: u64) -> Result<f64> {
    check_unit(x)?;
    if j == 0 {
        return Ok(x);
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    let margin = 1.0 / pow(x, p.t) - j as f64;
    if margin < 1.0 {
        return Err(Error::OrbitEscape { margin });
    }
    Ok(pow(margin, -1.0 / p.t))
}

/// `V*(x) = -(1 + 1/t) log(1 - x^t)`, the fixed point of the interval operator.
pub fn fixed_potential(p: &LaminarParams, x: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&x) {
        if x == 1.0 {
            return Err(Error::Singularity {
                at: x,
                what: "V* diverges at x = 1",
            });
        }
        return domain(format!("x = {x} outside [0, 1)"));
    }
    let base = 1.0 - pow(x, p.t);
    if base < SINGULAR_GUARD {
        return Err(Error::Singularity {
            at: x,
            what: "V* diverges at x = 1",
        });
    }
    Ok(-p.gamma * base.ln())
}
