//! The decision thresholds `A` (initial decision) and `B` (switching),
//! and the constant `K = V(0)` of the stopping value function.
//!
//! `B` solves `ln((1-B)/(1+B)) + 2B/(1-B^2) = 2 mu^2 c2 / c1`.
//! `A` solves
//! `(r - 1) ln((1-A)/(1+A)) + 2/(1+A) (r + A/(1-A)) = c1 / (c0 (1 - B^2))`
//! with `r = c1 / (2 c0)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Parameters;
use crate::roots::bracketed_root;

/// Default tolerance in the threshold variable.
pub const DEFAULT_TOL: f64 = 1e-12;

/// The open bracket `(EDGE, 1 - EDGE)` searched for both thresholds.
const EDGE: f64 = 1e-15;

/// Solved threshold pair and value constant for one instance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub a: f64,
    pub b: f64,
    pub k: f64,
    pub residual_a: f64,
    pub residual_b: f64,
}

impl Thresholds {
    pub fn solve(params: &Parameters) -> Result<Self> {
        Self::solve_with_tol(params, DEFAULT_TOL)
    }

    pub fn solve_with_tol(params: &Parameters, tol: f64) -> Result<Self> {
        let b = solve_b(params, tol)?;
        let a = solve_a(params, b, tol)?;
        Ok(Self {
            a,
            b,
            k: compute_k(params, a, b),
            residual_a: equation_a_residual(params, a, b),
            residual_b: equation_b_residual(params, b),
        })
    }
}

fn check_open_unit(what: &'static str, x: f64) -> Result<()> {
    if x > 0.0 && x < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain { what, value: x, domain: "(0, 1)" })
    }
}

fn check_tol(tol: f64) -> Result<()> {
    if tol.is_finite() && tol > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter { name: "tol", value: tol, reason: "must be positive" })
    }
}

/// `ln((1-b)/(1+b)) + 2b/(1-b^2)`, increasing from 0 at `b = 0` to `+inf` at `b = 1`.
pub fn equation_lhs_b(b: f64) -> Result<f64> {
    check_open_unit("b", b)?;
    Ok(lhs_b(b))
}

#[inline]
fn lhs_b(b: f64) -> f64 {
    // ln((1-b)/(1+b)) = -2 atanh(b), accurate for small b where the two terms nearly cancel.
    -2.0 * b.atanh() + 2.0 * b / ((1.0 - b) * (1.0 + b))
}

fn rhs_b(params: &Parameters) -> f64 {
    2.0 * params.mu() * params.mu() * params.c2() / params.c1()
}

fn equation_b_residual(params: &Parameters, b: f64) -> f64 {
    lhs_b(b) - rhs_b(params)
}

/// Left-hand side of the equation for `A`.
pub fn equation_lhs_a(params: &Parameters, a: f64) -> Result<f64> {
    check_open_unit("a", a)?;
    Ok(lhs_a(params, a))
}

#[inline]
fn lhs_a(params: &Parameters, a: f64) -> f64 {
    let r = params.c1() / (2.0 * params.c0());
    (r - 1.0) * ((1.0 - a) / (1.0 + a)).ln() + 2.0 / (1.0 + a) * (r + a / (1.0 - a))
}

fn rhs_a(params: &Parameters, b: f64) -> f64 {
    params.c1() / (params.c0() * (1.0 - b * b))
}

fn equation_a_residual(params: &Parameters, a: f64, b: f64) -> f64 {
    lhs_a(params, a) - rhs_a(params, b)
}

/// Solves for the switching threshold `B`.
pub fn solve_b(params: &Parameters, tol: f64) -> Result<f64> {
    check_tol(tol)?;
    solve_b_in(params, EDGE, 1.0 - EDGE, tol)
}

/// Solves for `B` on a caller-supplied bracket inside `(0, 1)`.
pub fn solve_b_in(params: &Parameters, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    check_tol(tol)?;
    let rhs = rhs_b(params);
    Ok(bracketed_root("B", |b| lhs_b(b) - rhs, lo, hi, tol)?.x)
}

/// Solves for the initial-decision threshold `A` given the solved `B`.
///
/// The left-hand side is not monotone when `c1 > 2 c0` (it dips below its
/// value at `A = 0` before rising to `+inf`), but it starts below the
/// right-hand side, so the sign change on `(0, 1)` is still unique.
pub fn solve_a(params: &Parameters, b: f64, tol: f64) -> Result<f64> {
    solve_a_in(params, b, EDGE, 1.0 - EDGE, tol)
}

/// Solves for `A` on a caller-supplied bracket inside `(0, 1)`.
pub fn solve_a_in(params: &Parameters, b: f64, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    check_tol(tol)?;
    check_open_unit("b", b)?;
    let rhs = rhs_a(params, b);
    Ok(bracketed_root("A", |a| lhs_a(params, a) - rhs, lo, hi, tol)?.x)
}

/// `K = (c1 (1-A) / (4 mu^2) + c0 A / (2 mu^2)) ln((1+A)/(1-A)) + c1 (1-A) / (2 mu^2 (1-B^2))`.
pub fn compute_k(params: &Parameters, a: f64, b: f64) -> f64 {
    let mu2 = params.mu() * params.mu();
    let (c0, c1) = (params.c0(), params.c1());
    (c1 * (1.0 - a) / (4.0 * mu2) + c0 * a / (2.0 * mu2)) * ((1.0 + a) / (1.0 - a)).ln()
        + c1 * (1.0 - a) / (2.0 * mu2 * (1.0 - b * b))
}

/// Checks on a grid that `lhs_a - rhs` changes sign exactly once on `(0, 1)`.
pub fn equation_a_has_single_crossing(params: &Parameters, b: f64, grid: usize) -> bool {
    let rhs = rhs_a(params, b);
    let mut crossings = 0;
    let mut prev = lhs_a(params, EDGE) - rhs;
    for i in 1..grid {
        let a = i as f64 / grid as f64;
        let cur = lhs_a(params, a) - rhs;
        if cur.signum() != prev.signum() {
            crossings += 1;
        }
        prev = cur;
    }
    let last = lhs_a(params, 1.0 - EDGE) - rhs;
    if last.signum() != prev.signum() {
        crossings += 1;
    }
    crossings == 1
}
