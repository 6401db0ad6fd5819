//! Grid verification of the structural properties of `U` and `V` and of
//! the continuous-fit / smooth-fit conditions at the free boundaries.

use serde::{Deserialize, Serialize};

use crate::model::Sign;
use crate::value::{ValueContext, ValueFn};

/// Half-width of the window around `±A`, `±B` excluded from pointwise checks.
pub const KINK_WINDOW: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PropertyId {
    U1,
    U2,
    U3,
    U4,
    V1,
    V2,
    V3,
    V4,
    #[serde(rename = "fitU_cont")]
    FitUCont,
    #[serde(rename = "fitU_smooth")]
    FitUSmooth,
    #[serde(rename = "fitV_cont")]
    FitVCont,
    #[serde(rename = "fitV_smooth")]
    FitVSmooth,
}

impl PropertyId {
    pub const ALL: [PropertyId; 12] = [
        PropertyId::U1,
        PropertyId::U2,
        PropertyId::U3,
        PropertyId::U4,
        PropertyId::V1,
        PropertyId::V2,
        PropertyId::V3,
        PropertyId::V4,
        PropertyId::FitUCont,
        PropertyId::FitUSmooth,
        PropertyId::FitVCont,
        PropertyId::FitVSmooth,
    ];
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyReport {
    pub property_id: PropertyId,
    pub grid_size: usize,
    pub max_violation: f64,
    pub passed: bool,
    /// Observed supremum of `|(1 - x^2) f'(x)|` for the boundedness checks.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub observed_bound: Option<f64>,
}

impl PropertyReport {
    fn new(property_id: PropertyId, grid_size: usize, max_violation: f64, tol: f64) -> Self {
        Self {
            property_id,
            grid_size,
            max_violation,
            passed: max_violation.is_finite() && max_violation <= tol,
            observed_bound: None,
        }
    }
}

/// Interior grid on `(-1, 1)` plus points accumulating at both ends.
fn grid(n: usize) -> Vec<f64> {
    let mut xs: Vec<f64> = (1..n).map(|i| -1.0 + 2.0 * i as f64 / n as f64).collect();
    for k in 1..=13 {
        let e = 10f64.powi(-k);
        xs.push(1.0 - e);
        xs.push(-1.0 + e);
    }
    xs.sort_by(|a, b| a.total_cmp(b));
    xs
}

fn near(x: f64, points: &[f64]) -> bool {
    points.iter().any(|p| (x - p).abs() <= KINK_WINDOW)
}

/// Runs all twelve checks on a grid of `grid_size` interior points.
pub fn verify_properties(ctx: &ValueContext, grid_size: usize, tol: f64) -> Vec<PropertyReport> {
    let grid_size = grid_size.max(100);
    let xs = grid(grid_size);
    let n = xs.len();
    let a = ctx.thresholds.a;
    let b = ctx.thresholds.b;
    let (c0, c1, c2) = (ctx.params.c0(), ctx.params.c1(), ctx.params.c2());
    let ys = [Sign::Plus, Sign::Minus];

    // (U.1) C^1 at x = -yB: value and first derivative agree from both sides.
    let mut u1: f64 = 0.0;
    for y in ys {
        // U(x, y) for y = -1 mirrors y = +1, so both kinks reduce to the same
        // one-sided limits at x = -B of U(., 1), taken in closed form.
        let sign = y.value();
        let cont_val = ctx.u_continuation_branch(-b);
        let switch_val = ctx.u_continuation_branch(b) + c2;
        let cont_d = sign * ctx.du_continuation_branch(-b);
        let switch_d = -sign * ctx.du_continuation_branch(b);
        u1 = u1.max((cont_val - switch_val).abs()).max((cont_d - switch_d).abs());
    }

    // (U.2) / (V.2): |(1 - x^2) f'| is bounded; the band near ±1 must not exceed
    // the interior supremum.
    let bound_report = |id: PropertyId, f: &dyn Fn(f64) -> f64| {
        let mut inner: f64 = 0.0;
        let mut outer: f64 = 0.0;
        for &x in &xs {
            let h = ((1.0 - x) * (1.0 + x) * f(x)).abs();
            if x.abs() <= 0.999 {
                inner = inner.max(h);
            } else {
                outer = outer.max(h);
            }
        }
        let sup = inner.max(outer);
        let mut r = PropertyReport::new(id, n, if sup.is_finite() { (outer - inner).max(0.0) } else { f64::INFINITY }, tol);
        r.observed_bound = Some(sup);
        r
    };
    let u2a = bound_report(PropertyId::U2, &|x| ctx.deriv_u(x, Sign::Plus).unwrap());
    let u2b = bound_report(PropertyId::U2, &|x| ctx.deriv_u(x, Sign::Minus).unwrap());
    let mut u2 = u2a.clone();
    u2.max_violation = u2a.max_violation.max(u2b.max_violation);
    u2.observed_bound = Some(u2a.observed_bound.unwrap().max(u2b.observed_bound.unwrap()));
    u2.passed = u2a.passed && u2b.passed;

    // (U.3) ODE in the continuation set, super-solution inequality elsewhere.
    let mut u3: f64 = 0.0;
    for y in ys {
        for &x in &xs {
            let xy = x * y.value();
            if near(xy, &[-b]) {
                continue;
            }
            let lu = ctx.generator_apply(ValueFn::U(y), x).unwrap();
            let rhs = -c1 * (1.0 - xy) / 2.0;
            let v = if xy > -b { (lu - rhs).abs() } else { (rhs - lu).max(0.0) };
            u3 = u3.max(v);
        }
    }

    // (U.4) Delta U = -c2 where xy >= B, >= -c2 elsewhere.
    let mut u4: f64 = 0.0;
    for y in ys {
        for &x in xs.iter().chain([b, -b, 1.0, -1.0].iter()) {
            let xy = x * y.value();
            let du = ctx.delta_u(x, y).unwrap();
            let v = if xy >= b { (du + c2).abs() } else { (-c2 - du).max(0.0) };
            u4 = u4.max(v);
        }
    }

    // (V.1) C^1 at ±A.
    let mut v1: f64 = 0.0;
    for s in [1.0, -1.0] {
        let x = s * a;
        let left_val = ctx.v_continuation_branch(x);
        let right_val = ctx.value_u(a, Sign::Plus).unwrap();
        let left_d = ctx.dv_continuation_branch(x);
        let right_d = s * ctx.du_continuation_branch(a);
        v1 = v1.max((left_val - right_val).abs()).max((left_d - right_d).abs());
    }

    let v2 = bound_report(PropertyId::V2, &|x| ctx.deriv_v(x).unwrap());

    // (V.3)
    let mut v3: f64 = 0.0;
    for &x in &xs {
        if near(x.abs(), &[a]) {
            continue;
        }
        let lv = ctx.generator_apply(ValueFn::V, x).unwrap();
        let v = if x.abs() < a { (lv + c0).abs() } else { (-c0 - lv).max(0.0) };
        v3 = v3.max(v);
    }

    // (V.4)
    let mut v4: f64 = 0.0;
    for &x in xs.iter().chain([a, -a, 0.0, 1.0, -1.0].iter()) {
        let v = ctx.value_v(x).unwrap();
        let u = ctx.value_u(x.abs(), Sign::Plus).unwrap();
        let viol = if x.abs() >= a { (v - u).abs() } else { (v - u).max(0.0) };
        v4 = v4.max(viol);
    }

    // Continuous and smooth fit at the boundaries of the continuation sets.
    let fit_u_cont = (ctx.u_continuation_branch(-b) - ctx.value_u(-b, Sign::Minus).unwrap() - c2).abs();
    let fit_u_smooth = (ctx.du_continuation_branch(-b) - ctx.deriv_u(-b, Sign::Minus).unwrap()).abs();
    let fit_v_cont = (ctx.v_continuation_branch(a) - ctx.value_u(a, Sign::Plus).unwrap()).abs();
    let fit_v_smooth = (ctx.dv_continuation_branch(a) - ctx.deriv_u(a, Sign::Plus).unwrap()).abs();

    vec![
        PropertyReport::new(PropertyId::U1, 4, u1, tol),
        u2,
        PropertyReport::new(PropertyId::U3, 2 * n, u3, tol),
        PropertyReport::new(PropertyId::U4, 2 * (n + 4), u4, tol),
        PropertyReport::new(PropertyId::V1, 2, v1, tol),
        v2,
        PropertyReport::new(PropertyId::V3, n, v3, tol),
        PropertyReport::new(PropertyId::V4, n + 5, v4, tol),
        PropertyReport::new(PropertyId::FitUCont, 1, fit_u_cont, tol),
        PropertyReport::new(PropertyId::FitUSmooth, 1, fit_u_smooth, tol),
        PropertyReport::new(PropertyId::FitVCont, 1, fit_v_cont, tol),
        PropertyReport::new(PropertyId::FitVSmooth, 1, fit_v_smooth, tol),
    ]
}
