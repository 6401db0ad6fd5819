//! Closed-form value functions of the switching problem (`U`) and the
//! stopping problem (`V`), their first and second derivatives, and the
//! generator `L f(x) = (mu^2 / 2) (1 - x^2)^2 f''(x)` of the belief diffusion.
//!
//! `U(x, y)` is the expected remaining cost when the current belief is `x`
//! and the current decision is `y`, if the optimal switching rule is
//! followed from now on. `V(x)` is the optimal risk starting from belief `x`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Parameters, Sign};
use crate::thresholds::Thresholds;

/// Problem instance bundled with its solved thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValueContext {
    pub params: Parameters,
    pub thresholds: Thresholds,
}

/// Selects the function the generator is applied to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValueFn {
    U(Sign),
    V,
}

/// `s ln((2 - s) / s)` with `s = 1 - |x|`, i.e. `(1-x) ln((1+x)/(1-x))` for
/// `x` near 1. Its limit at `s = 0` is 0.
#[inline]
fn edge_xlog(s: f64) -> f64 {
    if s == 0.0 {
        0.0
    } else {
        s * ((2.0 - s) / s).ln()
    }
}

#[inline]
fn log_ratio(x: f64) -> f64 {
    // ln((1+x)/(1-x))
    2.0 * x.atanh()
}

fn check_closed(x: f64) -> Result<()> {
    if (-1.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(Error::Domain { what: "x", value: x, domain: "[-1, 1]" })
    }
}

fn check_open(x: f64) -> Result<()> {
    if x > -1.0 && x < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain { what: "x", value: x, domain: "(-1, 1)" })
    }
}

impl ValueContext {
    pub fn new(params: Parameters) -> Result<Self> {
        Ok(Self { params, thresholds: Thresholds::solve(&params)? })
    }

    fn mu2(&self) -> f64 {
        self.params.mu() * self.params.mu()
    }

    // -----------------------------------------------------------------------
    // Continuation branch of U(., 1): x in (-B, 1]
    // -----------------------------------------------------------------------

    fn cont_u(&self, x: f64) -> f64 {
        let b = self.thresholds.b;
        let scale = self.params.c1() / (4.0 * self.mu2());
        let s = 1.0 - x;
        let xlog = if s < 1e-14 { edge_xlog(s) } else { s * log_ratio(x) };
        scale * (xlog + s * 2.0 / (1.0 - b * b))
    }

    fn cont_du(&self, x: f64) -> f64 {
        let b = self.thresholds.b;
        self.params.c1() / (4.0 * self.mu2()) * (-log_ratio(x) - 2.0 / (1.0 - b * b) + 2.0 / (1.0 + x))
    }

    fn cont_d2u(&self, x: f64) -> f64 {
        -self.params.c1() / (self.mu2() * (1.0 - x) * (1.0 + x) * (1.0 + x))
    }

    // -----------------------------------------------------------------------
    // Continuation branch of V: |x| < A
    // -----------------------------------------------------------------------

    fn cont_v(&self, x: f64) -> f64 {
        self.params.c0() * x / (2.0 * self.mu2()) * -log_ratio(x) + self.thresholds.k
    }

    fn cont_dv(&self, x: f64) -> f64 {
        self.params.c0() / (2.0 * self.mu2()) * (-log_ratio(x) - 2.0 * x / ((1.0 - x) * (1.0 + x)))
    }

    fn cont_d2v(&self, x: f64) -> f64 {
        let w = (1.0 - x) * (1.0 + x);
        -2.0 * self.params.c0() / (self.mu2() * w * w)
    }

    // -----------------------------------------------------------------------
    // Public evaluators
    // -----------------------------------------------------------------------

    /// `U(x, y)` on `[-1, 1] x {-1, +1}`.
    pub fn value_u(&self, x: f64, y: Sign) -> Result<f64> {
        check_closed(x)?;
        Ok(self.u(x, y))
    }

    pub(crate) fn u(&self, x: f64, y: Sign) -> f64 {
        // U(x, -1) = U(-x, 1)
        let x = x * y.value();
        if x > -self.thresholds.b {
            self.cont_u(x)
        } else {
            self.cont_u(-x) + self.params.c2()
        }
    }

    /// `V(x)` on `[-1, 1]`.
    pub fn value_v(&self, x: f64) -> Result<f64> {
        check_closed(x)?;
        Ok(if x.abs() < self.thresholds.a {
            self.cont_v(x)
        } else {
            self.u(x.abs(), Sign::Plus)
        })
    }

    /// `dU/dx (x, y)` on `(-1, 1)`.
    pub fn deriv_u(&self, x: f64, y: Sign) -> Result<f64> {
        check_open(x)?;
        let z = x * y.value();
        // d/dx U(x, -1) = -U'(-x, 1)
        let d = if z > -self.thresholds.b { self.cont_du(z) } else { -self.cont_du(-z) };
        Ok(d * y.value())
    }

    /// `V'(x)` on `(-1, 1)`.
    pub fn deriv_v(&self, x: f64) -> Result<f64> {
        check_open(x)?;
        Ok(if x.abs() < self.thresholds.a {
            self.cont_dv(x)
        } else {
            Sign::of(x).value() * self.cont_du(x.abs())
        })
    }

    /// Closed-form second derivative; undefined exactly at the kinks
    /// (`x = -y B` for `U(., y)`, `x = ±A` for `V`).
    pub fn second_deriv(&self, f: ValueFn, x: f64) -> Result<f64> {
        check_open(x)?;
        match f {
            ValueFn::U(y) => {
                let z = x * y.value();
                let b = self.thresholds.b;
                if z == -b {
                    return Err(Error::KinkPoint { x });
                }
                Ok(if z > -b { self.cont_d2u(z) } else { self.cont_d2u(-z) })
            }
            ValueFn::V => {
                let a = self.thresholds.a;
                if x.abs() == a {
                    return Err(Error::KinkPoint { x });
                }
                Ok(if x.abs() < a { self.cont_d2v(x) } else { self.cont_d2u(x.abs()) })
            }
        }
    }

    /// `L f(x) = (mu^2 / 2) (1 - x^2)^2 f''(x)`.
    pub fn generator_apply(&self, f: ValueFn, x: f64) -> Result<f64> {
        let d2 = self.second_deriv(f, x)?;
        let w = (1.0 - x) * (1.0 + x);
        Ok(0.5 * self.mu2() * w * w * d2)
    }

    /// `U(x, y) - U(x, -y)`.
    pub fn delta_u(&self, x: f64, y: Sign) -> Result<f64> {
        Ok(self.value_u(x, y)? - self.value_u(x, y.flip())?)
    }

    // -----------------------------------------------------------------------
    // One-sided branch values used by the fit checks
    // -----------------------------------------------------------------------

    /// `U(., 1)` continuation branch extended to `x = -B` (right limit at the kink).
    pub fn u_continuation_branch(&self, x: f64) -> f64 {
        self.cont_u(x)
    }

    /// Derivative of the `U(., 1)` continuation branch.
    pub fn du_continuation_branch(&self, x: f64) -> f64 {
        self.cont_du(x)
    }

    /// `V` continuation branch `c0 x/(2 mu^2) ln((1-x)/(1+x)) + K` at any `x` in `(-1, 1)`.
    pub fn v_continuation_branch(&self, x: f64) -> f64 {
        self.cont_v(x)
    }

    pub fn dv_continuation_branch(&self, x: f64) -> f64 {
        self.cont_dv(x)
    }
}

/// Expected remaining cost of the threshold switching rule with an arbitrary
/// switching level `b`, once the initial decision has been made.
///
/// On the continuation region `x y > -b` it solves
/// `L W = -c1 (1 - x y) / 2` with `W(1, 1) = 0` and value matching
/// `W(-b, 1) = W(-b, -1) + c2`; unlike `U`, no smooth fit is imposed, so it
/// equals `U` only when `b = B`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwitchingCost {
    params: Parameters,
    b: f64,
    // W(x, 1) = (1 - x) (c1/(4 mu^2) ln((1+x)/(1-x)) + slope)
    slope: f64,
}

impl SwitchingCost {
    pub fn new(params: Parameters, b: f64) -> Result<Self> {
        if !(b > 0.0 && b < 1.0) {
            return Err(Error::Domain { what: "b", value: b, domain: "(0, 1)" });
        }
        let mu2 = params.mu() * params.mu();
        let slope = (params.c1() * b.atanh() / mu2 + params.c2()) / (2.0 * b);
        Ok(Self { params, b, slope })
    }

    fn cont(&self, x: f64) -> f64 {
        let mu2 = self.params.mu() * self.params.mu();
        let s = 1.0 - x;
        let xlog = if s < 1e-14 { edge_xlog(s) } else { s * log_ratio(x) };
        self.params.c1() / (4.0 * mu2) * xlog + self.slope * s
    }

    /// Cost to go from belief `x` holding decision `y`.
    pub fn cost_to_go(&self, x: f64, y: Sign) -> f64 {
        let z = x.clamp(-1.0, 1.0) * y.value();
        if z > -self.b {
            self.cont(z)
        } else {
            self.cont(-z) + self.params.c2()
        }
    }
}
