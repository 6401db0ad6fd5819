//! The six subcommands. Each returns the rendered output together with the
//! process exit code; a nonzero code with a body means the computation ran
//! but flagged a numerical problem.

use serde::Serialize;

use seqrev_core::montecarlo::estimate_risk;
use seqrev_core::output::{path_csv, sweep_csv, value_table_csv};
use seqrev_core::{
    initial_belief, optimality_sweep, run_rule, simulate_path, verify_properties, PropertyReport, RiskEstimate,
    SweepResult, ThresholdRule, Thresholds, ValueContext,
};

use crate::config::RunConfig;
use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommandOutput {
    pub body: String,
    pub exit_code: i32,
}

impl CommandOutput {
    fn ok(body: String) -> Self {
        Self { body, exit_code: 0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SweepFormat {
    #[default]
    Json,
    Csv,
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    command: &'a str,
    config: &'a RunConfig,
    result: T,
}

fn render<T: Serialize>(command: &str, config: &RunConfig, result: T) -> String {
    let mut s = serde_json::to_string_pretty(&Envelope { command, config, result }).expect("results serialize");
    s.push('\n');
    s
}

#[derive(Serialize)]
struct ThresholdsResult {
    #[serde(flatten)]
    thresholds: Thresholds,
    /// Present when `c1 = 2 c0`, in which case `A = B`.
    #[serde(skip_serializing_if = "Option::is_none")]
    note: Option<String>,
}

pub fn cmd_thresholds(config: &RunConfig) -> Result<CommandOutput, CliError> {
    let thresholds = Thresholds::solve_with_tol(&config.problem, config.tol)?;
    let p = &config.problem;
    let note = (p.c1() == 2.0 * p.c0()).then(|| "c1 = 2 c0, so A = B".to_string());
    Ok(CommandOutput::ok(render("thresholds", config, ThresholdsResult { thresholds, note })))
}

pub fn cmd_value(config: &RunConfig) -> Result<CommandOutput, CliError> {
    let ctx = ValueContext::new(config.problem)?;
    Ok(CommandOutput::ok(value_table_csv(&ctx, config.x_min, config.x_max, config.x_n)?))
}

/// Path trace `t, x, m, d` of path `path_index` under the optimal rule.
pub fn cmd_simulate(config: &RunConfig) -> Result<CommandOutput, CliError> {
    let ctx = ValueContext::new(config.problem)?;
    let rule = config.rule.unwrap_or_else(|| ThresholdRule::optimal(&ctx));
    let path = simulate_path(&config.problem, &config.sim, config.path_index);
    let traj = run_rule(&rule, &path);
    Ok(CommandOutput::ok(path_csv(&path, Some(&traj))))
}

#[derive(Serialize)]
struct RiskResult {
    rule: ThresholdRule,
    optimal_rule: bool,
    estimate: RiskEstimate,
    /// Closed-form optimal risk `V(2p - 1)`.
    closed_form_value: f64,
}

pub fn cmd_risk(config: &RunConfig) -> Result<CommandOutput, CliError> {
    let ctx = ValueContext::new(config.problem)?;
    let optimal = ThresholdRule::optimal(&ctx);
    let rule = config.rule.unwrap_or(optimal);
    let estimate = estimate_risk(&config.problem, &rule, &config.sim, config.n_paths, config.estimator, config.tail)?;
    let result = RiskResult {
        rule,
        optimal_rule: rule == optimal,
        estimate,
        closed_form_value: ctx.value_v(initial_belief(&config.problem).value())?,
    };
    let body = render("risk", config, result);
    Ok(CommandOutput { body, exit_code: if estimate.unreliable { 2 } else { 0 } })
}

pub fn cmd_sweep(config: &RunConfig, format: SweepFormat) -> Result<CommandOutput, CliError> {
    let sweep: SweepResult = optimality_sweep(&config.problem, &config.sim, config.n_paths, &config.offsets)?;
    let unreliable = sweep.cells.iter().filter_map(|c| c.estimate).any(|e| e.unreliable);
    let body = match format {
        SweepFormat::Json => render("sweep", config, &sweep),
        SweepFormat::Csv => sweep_csv(&sweep),
    };
    Ok(CommandOutput { body, exit_code: if unreliable { 2 } else { 0 } })
}

#[derive(Serialize)]
struct VerifyResult {
    thresholds: Thresholds,
    all_passed: bool,
    reports: Vec<PropertyReport>,
}

/// Property tolerance used by `verify`.
pub const VERIFY_TOL: f64 = 1e-9;

pub fn cmd_verify(config: &RunConfig) -> Result<CommandOutput, CliError> {
    let ctx = ValueContext::new(config.problem)?;
    let reports = verify_properties(&ctx, config.grid_size, VERIFY_TOL);
    let all_passed = reports.iter().all(|r| r.passed);
    let body = render("verify", config, VerifyResult { thresholds: ctx.thresholds, all_passed, reports });
    Ok(CommandOutput { body, exit_code: if all_passed { 0 } else { 2 } })
}
