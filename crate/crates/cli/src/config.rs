//! Flat `key = value` run configuration.
//!
//! Lines are `key = value`; blank lines and `#` comments are ignored.
//! Command-line overrides are applied on top of the file, and unknown keys
//! are rejected in both places.

use std::collections::BTreeMap;

use serde::Serialize;

use seqrev_core::montecarlo::Estimator;
use seqrev_core::simulation::{default_t_max, DEFAULT_DT, DEFAULT_M_STOP, DEFAULT_SEED};
use seqrev_core::thresholds::DEFAULT_TOL;
use seqrev_core::{Parameters, Scheme, SimConfig, ThresholdRule};

use crate::error::CliError;

/// Environment variable naming the default config file.
pub const CONFIG_ENV: &str = "SEQREV_CONFIG";

pub const KEYS: &[&str] = &[
    "mu", "p", "c0", "c1", "c2", "dt", "t_max", "m_stop", "seed", "scheme", "n_paths", "estimator", "tail", "offsets",
    "tol", "a_init", "b_switch", "x_min", "x_max", "x_n", "path_index", "grid_size",
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub problem: Parameters,
    pub sim: SimConfig,
    pub n_paths: u64,
    pub estimator: Estimator,
    pub tail: bool,
    pub offsets: Vec<f64>,
    pub tol: f64,
    /// Explicit rule for `risk`; the optimal rule when absent.
    pub rule: Option<ThresholdRule>,
    pub x_min: f64,
    pub x_max: f64,
    pub x_n: usize,
    pub path_index: u64,
    pub grid_size: usize,
}

/// Parses `key = value` lines into a map, rejecting unknown or repeated keys.
pub fn parse_pairs(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("line {}: expected `key = value`", lineno + 1)))?;
        let (k, v) = (k.trim(), v.trim());
        check_key(k)?;
        if map.insert(k.to_string(), v.to_string()).is_some() {
            return Err(CliError::Config(format!("line {}: duplicate key `{k}`", lineno + 1)));
        }
    }
    Ok(map)
}

pub fn check_key(k: &str) -> Result<(), CliError> {
    if KEYS.contains(&k) {
        Ok(())
    } else {
        Err(CliError::Config(format!("unknown key `{k}`")))
    }
}

fn get<T: std::str::FromStr>(map: &BTreeMap<String, String>, key: &str, default: T) -> Result<T, CliError> {
    match map.get(key) {
        None => Ok(default),
        Some(v) => v.parse().map_err(|_| CliError::Config(format!("`{key}`: cannot parse `{v}`"))),
    }
}

fn parse_offsets(s: &str) -> Result<Vec<f64>, CliError> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| CliError::Config(format!("`offsets`: cannot parse `{t}`"))))
        .collect()
}

impl RunConfig {
    /// Builds a configuration from file contents plus overrides (later wins).
    pub fn from_sources(file: Option<&str>, overrides: &[(String, String)]) -> Result<Self, CliError> {
        let mut map = match file {
            Some(text) => parse_pairs(text)?,
            None => BTreeMap::new(),
        };
        for (k, v) in overrides {
            check_key(k)?;
            map.insert(k.clone(), v.clone());
        }
        Self::from_map(&map)
    }

    pub fn from_map(map: &BTreeMap<String, String>) -> Result<Self, CliError> {
        let reference = Parameters::reference();
        let problem = Parameters::new(
            get(map, "mu", reference.mu())?,
            get(map, "p", reference.p())?,
            get(map, "c0", reference.c0())?,
            get(map, "c1", reference.c1())?,
            get(map, "c2", reference.c2())?,
        )?;
        let dt = get(map, "dt", DEFAULT_DT)?;
        let sim = SimConfig::new(
            dt,
            get(map, "t_max", default_t_max(problem.mu(), dt))?,
            get(map, "m_stop", DEFAULT_M_STOP)?,
            get(map, "seed", DEFAULT_SEED)?,
            get(map, "scheme", Scheme::ExactPosterior)?,
        )?;
        let rule = match (map.get("a_init"), map.get("b_switch")) {
            (None, None) => None,
            (Some(_), Some(_)) => Some(ThresholdRule::new(get(map, "a_init", 0.0)?, get(map, "b_switch", 0.0)?)?),
            _ => return Err(CliError::Config("`a_init` and `b_switch` must be given together".into())),
        };
        let offsets = match map.get("offsets") {
            Some(s) => parse_offsets(s)?,
            None => vec![-0.1, -0.05, 0.0, 0.05, 0.1],
        };
        let tol: f64 = get(map, "tol", DEFAULT_TOL)?;
        if !(tol > 0.0) {
            return Err(CliError::Config("`tol` must be positive".into()));
        }
        let n_paths = get(map, "n_paths", 10_000u64)?;
        if n_paths < 100 {
            return Err(CliError::Config("`n_paths` must be at least 100".into()));
        }
        let grid_size = get(map, "grid_size", 2000usize)?;
        if grid_size < 100 {
            return Err(CliError::Config("`grid_size` must be at least 100".into()));
        }
        Ok(Self {
            problem,
            sim,
            n_paths,
            estimator: get(map, "estimator", Estimator::Conditioned)?,
            tail: get(map, "tail", true)?,
            offsets,
            tol,
            rule,
            x_min: get(map, "x_min", -1.0)?,
            x_max: get(map, "x_max", 1.0)?,
            x_n: get(map, "x_n", 201usize)?,
            path_index: get(map, "path_index", 0u64)?,
            grid_size,
        })
    }
}
