//! Bracketing scalar root finder: Illinois-modified regula falsi with a
//! mandatory bisection fallback.

use crate::error::{Error, Result};

const MAX_ITER: usize = 400;

/// A bracketed root together with its final residual.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub x: f64,
    pub residual: f64,
    pub iterations: usize,
}

/// Finds `x` in `[lo, hi]` with `f(x) = 0`, given `f(lo)` and `f(hi)` of
/// opposite sign. Stops once the bracket is narrower than `tol`.
pub fn bracketed_root<F>(equation: &'static str, f: F, lo: f64, hi: f64, tol: f64) -> Result<Root>
where
    F: Fn(f64) -> f64,
{
    let (mut a, mut b) = (lo, hi);
    let (mut fa, mut fb) = (f(a), f(b));
    if fa == 0.0 {
        return Ok(Root { x: a, residual: 0.0, iterations: 0 });
    }
    if fb == 0.0 {
        return Ok(Root { x: b, residual: 0.0, iterations: 0 });
    }
    if !(fa.is_finite() && fb.is_finite()) || fa.signum() == fb.signum() {
        return Err(Error::NotBracketed { equation, lo, hi, f_lo: fa, f_hi: fb });
    }

    // +1: `a` was replaced by the previous step, -1: `b` was.
    let mut last_replaced: i8 = 0;
    let mut width_two_ago = f64::INFINITY;
    let mut width_prev = b - a;
    let mut iterations = 0;
    while iterations < MAX_ITER && (b - a) > tol {
        iterations += 1;
        let mid = 0.5 * (a + b);
        // Fall back to bisection whenever two steps failed to halve the bracket.
        let x = if (b - a) > 0.5 * width_two_ago {
            mid
        } else {
            let s = b - fb * (b - a) / (fb - fa);
            if s.is_finite() && s > a && s < b {
                s
            } else {
                mid
            }
        };
        let fx = f(x);
        if fx == 0.0 {
            return Ok(Root { x, residual: 0.0, iterations });
        }
        if fx.signum() == fa.signum() {
            a = x;
            fa = fx;
            if last_replaced == 1 {
                fb *= 0.5;
            }
            last_replaced = 1;
        } else {
            b = x;
            fb = fx;
            if last_replaced == -1 {
                fa *= 0.5;
            }
            last_replaced = -1;
        }
        width_two_ago = width_prev;
        width_prev = b - a;
    }

    // One unweighted secant step inside the final bracket; on steep equations
    // this shrinks the residual by orders of magnitude at no risk.
    let (ra, rb) = (f(a), f(b));
    let mut best = if ra.abs() <= rb.abs() { (a, ra) } else { (b, rb) };
    let s = b - rb * (b - a) / (rb - ra);
    if s.is_finite() && s > a && s < b {
        let rs = f(s);
        if rs.abs() < best.1.abs() {
            best = (s, rs);
        }
    }
    Ok(Root { x: best.0, residual: best.1, iterations })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_sqrt2() {
        let r = bracketed_root("x^2-2", |x| x * x - 2.0, 0.0, 2.0, 1e-14).unwrap();
        assert!((r.x - 2f64.sqrt()).abs() < 1e-14);
        assert!(r.residual.abs() < 1e-13);
    }

    #[test]
    fn decreasing_function() {
        let r = bracketed_root("1-x", |x| 1.0 - x, -3.0, 5.0, 1e-13).unwrap();
        assert!((r.x - 1.0).abs() < 1e-13);
    }

    #[test]
    fn steep_singular_function() {
        // Pole at 1 on the right end of the bracket.
        let f = |x: f64| 1.0 / (1.0 - x) - 1e6;
        let r = bracketed_root("pole", f, 0.0, 1.0 - 1e-15, 1e-15).unwrap();
        assert!((r.x - (1.0 - 1e-6)).abs() < 1e-14);
    }

    #[test]
    fn unbracketed_is_an_error() {
        let err = bracketed_root("x^2+1", |x| x * x + 1.0, -1.0, 1.0, 1e-12).unwrap_err();
        assert!(matches!(err, Error::NotBracketed { .. }));
    }

    #[test]
    fn endpoint_root() {
        let r = bracketed_root("x", |x| x, 0.0, 1.0, 1e-12).unwrap();
        assert_eq!(r.x, 0.0);
    }
}
