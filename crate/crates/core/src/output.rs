//! Plain-text table emitters (comma-separated, header row, `.` decimal
//! point, every float printed with 17 significant digits).

use std::fmt::Write;

use crate::decision::DecisionTrajectory;
use crate::error::{Error, Result};
use crate::model::Sign;
use crate::montecarlo::SweepResult;
use crate::simulation::PathSample;
use crate::value::ValueContext;

/// Formats `v` with 17 significant digits, independent of locale.
pub fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v.is_nan() {
        "nan".to_string()
    } else if v > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

/// `x, V(x), U(x, 1), U(x, -1)` on `n` evenly spaced points of `[x_min, x_max]`.
pub fn value_table_csv(ctx: &ValueContext, x_min: f64, x_max: f64, n: usize) -> Result<String> {
    if !(-1.0..=1.0).contains(&x_min) || !(-1.0..=1.0).contains(&x_max) || x_min > x_max {
        return Err(Error::Domain { what: "x grid", value: x_min, domain: "-1 <= x_min <= x_max <= 1" });
    }
    if n < 1 || (n == 1 && x_min != x_max) {
        return Err(Error::InvalidParameter { name: "n", value: n as f64, reason: "grid needs at least two points" });
    }
    let mut out = String::from("x,V,U_plus,U_minus\n");
    for i in 0..n {
        let x = if n == 1 { x_min } else { x_min + (x_max - x_min) * i as f64 / (n - 1) as f64 };
        // Snap the end points so rounding never leaves [-1, 1].
        let x = if i + 1 == n { x_max } else { x };
        writeln!(
            out,
            "{},{},{},{}",
            fmt_f64(x),
            fmt_f64(ctx.value_v(x)?),
            fmt_f64(ctx.value_u(x, Sign::Plus)?),
            fmt_f64(ctx.value_u(x, Sign::Minus)?)
        )
        .expect("writing to a String cannot fail");
    }
    Ok(out)
}

/// `t, x, m, d` for every grid point of `path`; `d` is 0 without a trajectory.
pub fn path_csv(path: &PathSample, traj: Option<&DecisionTrajectory>) -> String {
    let mut out = String::from("t,x,m,d\n");
    for i in 0..path.len() {
        let d = traj.map_or(0, |t| t.d_process[i]);
        writeln!(out, "{},{},{},{}", fmt_f64(path.time(i)), fmt_f64(path.x[i]), fmt_f64(path.m[i]), d)
            .expect("writing to a String cannot fail");
    }
    out
}

/// One row per sweep cell.
pub fn sweep_csv(sweep: &SweepResult) -> String {
    let mut out = String::from("da,db,a,b,mean,stderr,diff_mean,diff_stderr,skipped\n");
    for cell in &sweep.cells {
        let (mean, se) = cell.estimate.map_or((f64::NAN, f64::NAN), |e| (e.mean, e.stderr));
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            fmt_f64(cell.da),
            fmt_f64(cell.db),
            fmt_f64(sweep.a + cell.da),
            fmt_f64(sweep.b + cell.db),
            fmt_f64(mean),
            fmt_f64(se),
            fmt_f64(cell.diff_mean),
            fmt_f64(cell.diff_stderr),
            cell.skipped
        )
        .expect("writing to a String cannot fail");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Parameters;

    #[test]
    fn seventeen_significant_digits() {
        assert_eq!(fmt_f64(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_f64(-2.0), "-2.0000000000000000e0");
        let v = 1.0 / 3.0;
        assert_eq!(fmt_f64(v).parse::<f64>().unwrap(), v);
    }

    #[test]
    fn value_table_rows() {
        let ctx = ValueContext::new(Parameters::reference()).unwrap();
        let csv = value_table_csv(&ctx, -1.0, 1.0, 201).unwrap();
        let rows: Vec<Vec<f64>> = csv
            .lines()
            .skip(1)
            .map(|l| l.split(',').map(|f| f.parse().unwrap()).collect())
            .collect();
        assert_eq!(rows.len(), 201);
        assert_eq!(rows[100][0], 0.0);
        assert_eq!(rows[100][1], ctx.thresholds.k);
        for i in 0..=100 {
            assert!((rows[i][1] - rows[200 - i][1]).abs() < 1e-12);
        }
        assert!(value_table_csv(&ctx, -1.5, 1.0, 10).is_err());
        assert!(value_table_csv(&ctx, 0.5, 0.0, 10).is_err());
    }
}
