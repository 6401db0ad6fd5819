//! Monte Carlo estimation of the Bayesian risk of threshold rules.
//!
//! Two per-path estimators are available. `Raw` charges `c1` for every unit
//! of time the decision disagrees with the simulated `theta`. `Conditioned`
//! replaces that indicator by its conditional expectation `(1 - M D) / 2`,
//! which has the same mean and never looks at `theta`.
//!
//! Paths are generated in parallel; each path index owns its RNG substream
//! and per-path totals are reduced in index order, so results do not depend
//! on the number of workers.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::decision::{DecisionTracker, PenaltyAccumulator, PenaltyBreakdown, ThresholdRule};
use crate::error::{Error, Result};
use crate::model::Parameters;
use crate::simulation::{PathStepper, SimConfig};
use crate::value::ValueContext;

/// Fraction of untriggered paths above which an estimate is flagged.
pub const UNRELIABLE_FRACTION: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimator {
    Raw,
    Conditioned,
}

impl std::str::FromStr for Estimator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "raw" => Ok(Estimator::Raw),
            "conditioned" => Ok(Estimator::Conditioned),
            _ => Err(Error::InvalidInstance("estimator must be raw or conditioned")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiskEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub n_paths: u64,
    pub estimator: Estimator,
    pub tail_corrected: bool,
    pub dt: f64,
    pub seed: u64,
    /// Paths truncated before the initial decision (excluded from the mean).
    pub n_untriggered: u64,
    pub unreliable: bool,
}

/// Neumaier-compensated sum in slice order.
fn compensated_sum(xs: impl IntoIterator<Item = f64>) -> f64 {
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for x in xs {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Sample mean and standard error of the mean.
pub fn mean_and_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = compensated_sum(xs.iter().copied()) / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = compensated_sum(xs.iter().map(|x| (x - mean) * (x - mean))) / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// Runs every rule over path `path_index`; `None` marks an untriggered rule.
pub fn evaluate_path(
    params: &Parameters,
    rules: &[ThresholdRule],
    cfg: &SimConfig,
    path_index: u64,
    tail: bool,
) -> Result<Vec<Option<PenaltyBreakdown>>> {
    let stepper = PathStepper::new(params, cfg, path_index);
    let theta = stepper.theta();
    let mut trackers: Vec<DecisionTracker> = rules.iter().map(|r| DecisionTracker::new(*r)).collect();
    let mut accs = rules
        .iter()
        .map(|r| PenaltyAccumulator::new(params, r, cfg.dt, theta, tail))
        .collect::<Result<Vec<_>>>()?;
    for pt in stepper {
        for (tracker, acc) in trackers.iter_mut().zip(accs.iter_mut()) {
            let event = tracker.observe(pt.m);
            acc.push(pt.index, pt.m, tracker.current_i8(), event);
        }
    }
    Ok(accs.into_iter().map(|acc| acc.finish().ok()).collect())
}

fn build_estimate(totals: &[f64], n_paths: u64, untriggered: u64, estimator: Estimator, tail: bool, cfg: &SimConfig) -> RiskEstimate {
    let (mean, stderr) = mean_and_stderr(totals);
    RiskEstimate {
        mean,
        stderr,
        n_paths,
        estimator,
        tail_corrected: tail,
        dt: cfg.dt,
        seed: cfg.seed,
        n_untriggered: untriggered,
        unreliable: untriggered as f64 > UNRELIABLE_FRACTION * n_paths as f64,
    }
}

fn check_n_paths(n_paths: u64) -> Result<()> {
    if n_paths < 100 {
        Err(Error::InvalidParameter {
            name: "n_paths",
            value: n_paths as f64,
            reason: "at least 100 paths are required",
        })
    } else {
        Ok(())
    }
}

/// Per-path penalties of one rule, in path order.
fn rule_penalties(
    params: &Parameters,
    rule: &ThresholdRule,
    cfg: &SimConfig,
    n_paths: u64,
    tail: bool,
) -> Result<Vec<Option<PenaltyBreakdown>>> {
    cfg.validate()?;
    let per_path: Vec<Option<PenaltyBreakdown>> = (0..n_paths)
        .into_par_iter()
        .map(|i| evaluate_path(params, std::slice::from_ref(rule), cfg, i, tail).map(|v| v[0]))
        .collect::<Result<_>>()?;
    Ok(per_path)
}

/// Estimates the risk of `rule` from `n_paths` simulated paths.
pub fn estimate_risk(
    params: &Parameters,
    rule: &ThresholdRule,
    cfg: &SimConfig,
    n_paths: u64,
    estimator: Estimator,
    tail: bool,
) -> Result<RiskEstimate> {
    check_n_paths(n_paths)?;
    let per_path = rule_penalties(params, rule, cfg, n_paths, tail)?;
    let totals: Vec<f64> = per_path
        .iter()
        .flatten()
        .map(|p| match estimator {
            Estimator::Raw => p.total_raw(),
            Estimator::Conditioned => p.total_conditioned(),
        })
        .collect();
    let untriggered = n_paths - totals.len() as u64;
    Ok(build_estimate(&totals, n_paths, untriggered, estimator, tail, cfg))
}

/// Both estimators on the same paths.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimatorComparison {
    pub raw: RiskEstimate,
    pub conditioned: RiskEstimate,
    /// Standard error of the per-path difference `raw - conditioned`.
    pub paired_diff_stderr: f64,
}

impl EstimatorComparison {
    /// `sqrt(se_raw^2 + se_cond^2)`.
    pub fn combined_stderr(&self) -> f64 {
        self.raw.stderr.hypot(self.conditioned.stderr)
    }
}

pub fn compare_estimators(
    params: &Parameters,
    rule: &ThresholdRule,
    cfg: &SimConfig,
    n_paths: u64,
    tail: bool,
) -> Result<EstimatorComparison> {
    check_n_paths(n_paths)?;
    let per_path = rule_penalties(params, rule, cfg, n_paths, tail)?;
    let done: Vec<&PenaltyBreakdown> = per_path.iter().flatten().collect();
    let raw: Vec<f64> = done.iter().map(|p| p.total_raw()).collect();
    let cond: Vec<f64> = done.iter().map(|p| p.total_conditioned()).collect();
    let diff: Vec<f64> = raw.iter().zip(&cond).map(|(r, c)| r - c).collect();
    let untriggered = n_paths - done.len() as u64;
    Ok(EstimatorComparison {
        raw: build_estimate(&raw, n_paths, untriggered, Estimator::Raw, tail, cfg),
        conditioned: build_estimate(&cond, n_paths, untriggered, Estimator::Conditioned, tail, cfg),
        paired_diff_stderr: mean_and_stderr(&diff).1,
    })
}

// ---------------------------------------------------------------------------
// Perturbation sweep
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub da: f64,
    pub db: f64,
    pub rule: Option<ThresholdRule>,
    /// Set when a perturbed threshold leaves `(0, 1)`.
    pub skipped: bool,
    pub estimate: Option<RiskEstimate>,
    /// Mean of `cell - baseline` over common paths.
    pub diff_mean: f64,
    /// Standard error of the paired difference.
    pub diff_stderr: f64,
    /// Standard error the difference would have with independent runs.
    pub independent_diff_stderr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub a: f64,
    pub b: f64,
    pub offsets: Vec<f64>,
    pub cells: Vec<SweepCell>,
    pub baseline: usize,
    pub n_paths: u64,
    pub seed: u64,
    pub dt: f64,
    /// Baseline mean ≤ every cell mean + 3 paired standard errors.
    pub baseline_minimal: bool,
}

impl SweepResult {
    pub fn baseline_cell(&self) -> &SweepCell {
        &self.cells[self.baseline]
    }
}

/// Significance band, in paired standard errors, for the minimality check.
pub const SWEEP_SIGMA: f64 = 3.0;

/// Risk of several rules on common paths. Cells with `None` rules are skipped.
pub fn sweep_rules(
    params: &Parameters,
    cfg: &SimConfig,
    n_paths: u64,
    rules: &[Option<ThresholdRule>],
    baseline: usize,
    offsets: &[(f64, f64)],
) -> Result<(Vec<SweepCell>, bool)> {
    check_n_paths(n_paths)?;
    cfg.validate()?;
    let active: Vec<ThresholdRule> = rules.iter().flatten().copied().collect();
    let slot: Vec<Option<usize>> = {
        let mut k = 0;
        rules
            .iter()
            .map(|r| {
                r.map(|_| {
                    k += 1;
                    k - 1
                })
            })
            .collect()
    };
    let base_slot = slot[baseline].ok_or(Error::InvalidInstance("baseline rule must be inside (0, 1)"))?;

    let per_path: Vec<Vec<Option<f64>>> = (0..n_paths)
        .into_par_iter()
        .map(|i| {
            evaluate_path(params, &active, cfg, i, true)
                .map(|v| v.into_iter().map(|p| p.map(|p| p.total_conditioned())).collect())
        })
        .collect::<Result<_>>()?;

    let mut cells = Vec::with_capacity(rules.len());
    let mut minimal = true;
    for (k, rule) in rules.iter().enumerate() {
        let (da, db) = offsets[k];
        let Some(s) = slot[k] else {
            cells.push(SweepCell {
                da,
                db,
                rule: None,
                skipped: true,
                estimate: None,
                diff_mean: f64::NAN,
                diff_stderr: f64::NAN,
                independent_diff_stderr: f64::NAN,
            });
            continue;
        };
        let totals: Vec<f64> = per_path.iter().filter_map(|v| v[s]).collect();
        let diffs: Vec<f64> = per_path
            .iter()
            .filter_map(|v| Some(v[s]? - v[base_slot]?))
            .collect();
        let estimate = build_estimate(&totals, n_paths, n_paths - totals.len() as u64, Estimator::Conditioned, true, cfg);
        let base_totals: Vec<f64> = per_path.iter().filter_map(|v| v[base_slot]).collect();
        let base_se = mean_and_stderr(&base_totals).1;
        let (diff_mean, diff_stderr) = if s == base_slot { (0.0, 0.0) } else { mean_and_stderr(&diffs) };
        if diff_mean < -SWEEP_SIGMA * diff_stderr {
            minimal = false;
        }
        cells.push(SweepCell {
            da,
            db,
            rule: *rule,
            skipped: false,
            estimate: Some(estimate),
            diff_mean,
            diff_stderr,
            independent_diff_stderr: estimate.stderr.hypot(base_se),
        });
    }
    Ok((cells, minimal))
}

/// Risk over the grid `(A + da, B + db)` for `da, db` in `offsets`, on common
/// random numbers. Every cell uses the conditioned estimator with the
/// closed-form tail.
pub fn optimality_sweep(params: &Parameters, cfg: &SimConfig, n_paths: u64, offsets: &[f64]) -> Result<SweepResult> {
    let ctx = ValueContext::new(*params)?;
    let (a, b) = (ctx.thresholds.a, ctx.thresholds.b);
    let zero = offsets
        .iter()
        .position(|&o| o == 0.0)
        .ok_or(Error::InvalidInstance("sweep offsets must include 0"))?;
    let mut rules = Vec::new();
    let mut grid = Vec::new();
    for &da in offsets {
        for &db in offsets {
            rules.push(ThresholdRule::new(a + da, b + db).ok());
            grid.push((da, db));
        }
    }
    let baseline = zero * offsets.len() + zero;
    let (cells, baseline_minimal) = sweep_rules(params, cfg, n_paths, &rules, baseline, &grid)?;
    Ok(SweepResult {
        a,
        b,
        offsets: offsets.to_vec(),
        cells,
        baseline,
        n_paths,
        seed: cfg.seed,
        dt: cfg.dt,
        baseline_minimal,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulation::Scheme;

    fn quick_cfg() -> SimConfig {
        SimConfig::new(0.01, 90.0, 0.999, 3, Scheme::ExactPosterior).unwrap()
    }

    #[test]
    fn compensated_sum_is_exact_on_cancellation() {
        assert_eq!(compensated_sum([1e16, 1.0, -1e16]), 1.0);
        let (m, se) = mean_and_stderr(&[1.0, 2.0, 3.0]);
        assert_eq!(m, 2.0);
        assert!((se - (1.0f64 / 3.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn perfect_prior_has_zero_risk() {
        let params = Parameters::new(1.0 / 3.0, 1.0, 2.0 / 3.0, 1.0, 1.5).unwrap();
        let ctx = ValueContext::new(params).unwrap();
        for est in [Estimator::Raw, Estimator::Conditioned] {
            let r = estimate_risk(&params, &ThresholdRule::optimal(&ctx), &quick_cfg(), 200, est, true).unwrap();
            assert_eq!(r.mean, 0.0);
            assert_eq!(r.stderr, 0.0);
            assert!(!r.unreliable);
        }
    }

    #[test]
    fn too_few_paths() {
        let params = Parameters::reference();
        let rule = ThresholdRule::new(0.3, 0.5).unwrap();
        assert!(estimate_risk(&params, &rule, &quick_cfg(), 10, Estimator::Raw, true).is_err());
    }

    #[test]
    fn untriggered_paths_are_flagged() {
        let params = Parameters::reference();
        let cfg = SimConfig::new(0.01, 1.0, 0.999, 3, Scheme::ExactPosterior).unwrap();
        let rule = ThresholdRule::new(0.95, 0.5).unwrap();
        let r = estimate_risk(&params, &rule, &cfg, 200, Estimator::Conditioned, true).unwrap();
        assert!(r.n_untriggered > 0);
        assert!(r.unreliable);
    }

    #[test]
    fn deterministic_across_thread_counts() {
        let params = Parameters::reference();
        let ctx = ValueContext::new(params).unwrap();
        let rule = ThresholdRule::optimal(&ctx);
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| estimate_risk(&params, &rule, &quick_cfg(), 300, Estimator::Conditioned, true).unwrap())
        };
        let one = run(1);
        let four = run(4);
        assert_eq!(one.mean.to_bits(), four.mean.to_bits());
        assert_eq!(one.stderr.to_bits(), four.stderr.to_bits());
    }

    #[test]
    fn degenerate_sweep_matches_single_estimate() {
        let params = Parameters::reference();
        let ctx = ValueContext::new(params).unwrap();
        let cfg = quick_cfg();
        let sweep = optimality_sweep(&params, &cfg, 300, &[0.0]).unwrap();
        assert_eq!(sweep.cells.len(), 1);
        let single = estimate_risk(&params, &ThresholdRule::optimal(&ctx), &cfg, 300, Estimator::Conditioned, true).unwrap();
        assert_eq!(sweep.baseline_cell().estimate.unwrap(), single);
        assert!(sweep.baseline_minimal);
    }

    #[test]
    fn sweep_skips_out_of_range_cells() {
        let params = Parameters::reference();
        let sweep = optimality_sweep(&params, &quick_cfg(), 100, &[-0.5, 0.0, 0.5]).unwrap();
        assert_eq!(sweep.cells.len(), 9);
        // A - 0.5 < 0
        assert!(sweep.cells[0].skipped && sweep.cells[1].skipped && sweep.cells[2].skipped);
        assert!(!sweep.baseline_cell().skipped);
        assert!(optimality_sweep(&params, &quick_cfg(), 100, &[0.1]).is_err());
    }

    #[test]
    fn common_random_numbers_reduce_difference_variance() {
        let params = Parameters::reference();
        let sweep = optimality_sweep(&params, &quick_cfg(), 2000, &[0.0, 0.05]).unwrap();
        for cell in sweep.cells.iter().filter(|c| c.da != 0.0 || c.db != 0.0) {
            assert!(cell.diff_stderr < cell.independent_diff_stderr, "{cell:?}");
        }
    }
}
