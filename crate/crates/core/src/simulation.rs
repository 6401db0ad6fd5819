//! Sample paths of the observation `X_t` and the posterior mean `M_t`.
//!
//! `X` is generated from exact Gaussian increments. `M` is either the
//! closed-form posterior mean of the current `X` (the default), or an
//! Euler–Maruyama discretization of `dM = mu (1 - M^2) dW~` driven by the
//! innovation increments `dW~ = dX - mu M dt`, kept as a cross-check.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{initial_belief, posterior_mean_value, Parameters, Sign};
use crate::rng::{NoiseSource, PathRng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    ExactPosterior,
    EulerSde,
}

impl std::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact_posterior" | "exact" => Ok(Scheme::ExactPosterior),
            "euler_sde" | "euler" => Ok(Scheme::EulerSde),
            _ => Err(Error::InvalidInstance("scheme must be exact_posterior or euler_sde")),
        }
    }
}

/// Discretization and truncation settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub dt: f64,
    pub t_max: f64,
    pub m_stop: f64,
    pub seed: u64,
    pub scheme: Scheme,
}

pub const DEFAULT_DT: f64 = 1e-3;
pub const DEFAULT_M_STOP: f64 = 0.9999;
pub const DEFAULT_SEED: u64 = 20_240_601;

/// `10^4 dt ceil(1 / mu^2)`.
pub fn default_t_max(mu: f64, dt: f64) -> f64 {
    // 1/mu^2 is often an integer up to rounding, e.g. mu = 1/3.
    let scale = (1.0 / (mu * mu) - 1e-9).ceil().max(1.0);
    1e4 * dt * scale
}

impl SimConfig {
    pub fn new(dt: f64, t_max: f64, m_stop: f64, seed: u64, scheme: Scheme) -> Result<Self> {
        let cfg = Self { dt, t_max, m_stop, seed, scheme };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Defaults scaled to the instance: `dt = 1e-3`, `m_stop = 0.9999`.
    pub fn for_params(params: &Parameters) -> Self {
        Self {
            dt: DEFAULT_DT,
            t_max: default_t_max(params.mu(), DEFAULT_DT),
            m_stop: DEFAULT_M_STOP,
            seed: DEFAULT_SEED,
            scheme: Scheme::ExactPosterior,
        }
    }

    /// Same settings with a new step; `t_max` is kept.
    pub fn with_dt(self, dt: f64) -> Result<Self> {
        Self::new(dt, self.t_max, self.m_stop, self.seed, self.scheme)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt <= 0.1) {
            return Err(Error::InvalidParameter { name: "dt", value: self.dt, reason: "must lie in (0, 0.1]" });
        }
        if !(self.m_stop >= 0.9 && self.m_stop < 1.0) {
            return Err(Error::InvalidParameter {
                name: "m_stop",
                value: self.m_stop,
                reason: "must lie in [0.9, 1)",
            });
        }
        if !(self.t_max.is_finite() && self.t_max >= 100.0 * self.dt) {
            return Err(Error::InvalidParameter {
                name: "t_max",
                value: self.t_max,
                reason: "must be finite and at least 100 dt",
            });
        }
        Ok(())
    }

    /// Index of the last admissible grid point.
    pub fn max_steps(&self) -> usize {
        (self.t_max / self.dt + 1e-9).floor() as usize
    }
}

/// One simulated trajectory on the grid `t_i = i dt`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathSample {
    pub theta: Sign,
    pub dt: f64,
    pub x: Vec<f64>,
    pub m: Vec<f64>,
    pub truncated_at: f64,
    pub rng_stream_id: u64,
}

impl PathSample {
    pub fn len(&self) -> usize {
        self.m.len()
    }

    pub fn is_empty(&self) -> bool {
        self.m.is_empty()
    }

    pub fn time(&self, i: usize) -> f64 {
        i as f64 * self.dt
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(|i| self.time(i))
    }

    /// Builds a path from a prescribed belief sequence, e.g. for decision-rule fixtures.
    pub fn from_beliefs(theta: Sign, dt: f64, m: Vec<f64>) -> Self {
        let truncated_at = dt * m.len().saturating_sub(1) as f64;
        Self { theta, dt, x: vec![f64::NAN; m.len()], m, truncated_at, rng_stream_id: 0 }
    }
}

/// A single grid point of a path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathPoint {
    pub index: usize,
    pub x: f64,
    pub m: f64,
}

/// Streaming path generator; yields grid points until `|M| >= m_stop` or `t_max`.
#[derive(Debug, Clone)]
pub struct PathStepper<N> {
    noise: N,
    theta: Sign,
    p: f64,
    mu: f64,
    dt: f64,
    sqrt_dt: f64,
    drift: f64,
    m_stop: f64,
    max_steps: usize,
    scheme: Scheme,
    index: usize,
    x: f64,
    m: f64,
    done: bool,
}

impl PathStepper<PathRng> {
    pub fn new(params: &Parameters, cfg: &SimConfig, path_index: u64) -> Self {
        Self::with_noise(params, cfg, PathRng::new(cfg.seed, path_index))
    }
}

impl<N: NoiseSource> PathStepper<N> {
    /// Draws `theta` from the prior and prepares the first grid point.
    pub fn with_noise(params: &Parameters, cfg: &SimConfig, mut noise: N) -> Self {
        let theta = if noise.uniform() < params.p() { Sign::Plus } else { Sign::Minus };
        let mu = params.mu();
        Self {
            noise,
            theta,
            p: params.p(),
            mu,
            dt: cfg.dt,
            sqrt_dt: cfg.dt.sqrt(),
            drift: mu * theta.value() * cfg.dt,
            m_stop: cfg.m_stop,
            max_steps: cfg.max_steps(),
            scheme: cfg.scheme,
            index: 0,
            x: 0.0,
            m: initial_belief(params).value(),
            done: false,
        }
    }

    pub fn theta(&self) -> Sign {
        self.theta
    }
}

impl<N: NoiseSource> Iterator for PathStepper<N> {
    type Item = PathPoint;

    #[inline]
    fn next(&mut self) -> Option<PathPoint> {
        if self.done {
            return None;
        }
        if self.index > 0 {
            let dx = self.drift + self.sqrt_dt * self.noise.normal();
            self.x += dx;
            self.m = match self.scheme {
                Scheme::ExactPosterior => posterior_mean_value(self.p, self.mu, self.x),
                Scheme::EulerSde => euler_step(self.mu, self.m, dx, self.dt),
            };
        }
        let point = PathPoint { index: self.index, x: self.x, m: self.m };
        if self.m.abs() >= self.m_stop || self.index >= self.max_steps {
            self.done = true;
        }
        self.index += 1;
        Some(point)
    }
}

/// One Euler–Maruyama step of `dM = mu (1 - M^2)(dX - mu M dt)`, clamped to `[-1, 1]`.
#[inline]
pub fn euler_step(mu: f64, m: f64, dx: f64, dt: f64) -> f64 {
    (m + mu * (1.0 - m * m) * (dx - mu * m * dt)).clamp(-1.0, 1.0)
}

/// Simulates path `path_index` on its own substream.
pub fn simulate_path(params: &Parameters, cfg: &SimConfig, path_index: u64) -> PathSample {
    let mut path = collect_path(params, cfg, PathStepper::new(params, cfg, path_index));
    path.rng_stream_id = path_index;
    path
}

/// Simulates a path from an explicit noise source.
pub fn simulate_path_with_noise<N: NoiseSource>(params: &Parameters, cfg: &SimConfig, noise: N) -> PathSample {
    collect_path(params, cfg, PathStepper::with_noise(params, cfg, noise))
}

fn collect_path<N: NoiseSource>(_params: &Parameters, cfg: &SimConfig, stepper: PathStepper<N>) -> PathSample {
    let theta = stepper.theta();
    let mut x = Vec::new();
    let mut m = Vec::new();
    for pt in stepper {
        x.push(pt.x);
        m.push(pt.m);
    }
    let truncated_at = cfg.dt * (m.len() - 1) as f64;
    PathSample { theta, dt: cfg.dt, x, m, truncated_at, rng_stream_id: 0 }
}

// ---------------------------------------------------------------------------
// Scheme comparison
// ---------------------------------------------------------------------------

/// Sup-norm gap between the exact and Euler beliefs on one path, driven by
/// `factor` fine increments per coarse step. Returns `(coarse, fine)` gaps.
fn path_scheme_gaps(params: &Parameters, cfg: &SimConfig, path_index: u64, factor: usize) -> (f64, f64) {
    let mut noise = PathRng::new(cfg.seed, path_index);
    let theta = if noise.uniform() < params.p() { 1.0 } else { -1.0 };
    let (mu, p) = (params.mu(), params.p());
    let dt_fine = cfg.dt / factor as f64;
    let sqrt_fine = dt_fine.sqrt();
    let m0 = initial_belief(params).value();
    let max_coarse = cfg.max_steps();

    let (mut x, mut m_fine, mut m_coarse) = (0.0, m0, m0);
    let (mut gap_fine, mut gap_coarse): (f64, f64) = (0.0, 0.0);
    for _ in 0..max_coarse {
        let mut dx_coarse = 0.0;
        let mut exact = 0.0;
        for _ in 0..factor {
            let dx = mu * theta * dt_fine + sqrt_fine * noise.normal();
            x += dx;
            dx_coarse += dx;
            m_fine = euler_step(mu, m_fine, dx, dt_fine);
            exact = posterior_mean_value(p, mu, x);
            gap_fine = gap_fine.max((exact - m_fine).abs());
        }
        m_coarse = euler_step(mu, m_coarse, dx_coarse, cfg.dt);
        gap_coarse = gap_coarse.max((exact - m_coarse).abs());
        if exact.abs() >= cfg.m_stop {
            break;
        }
    }
    (gap_coarse, gap_fine)
}

/// Max over `n_paths` of the sup-norm gap between exact and Euler beliefs at step `cfg.dt`.
pub fn compare_schemes(params: &Parameters, cfg: &SimConfig, n_paths: u64) -> f64 {
    (0..n_paths)
        .into_par_iter()
        .map(|i| path_scheme_gaps(params, cfg, i, 1).0)
        .collect::<Vec<_>>()
        .into_iter()
        .fold(0.0, f64::max)
}

/// Scheme gaps at step `cfg.dt` and `cfg.dt / factor` on common noise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchemeConvergence {
    pub dt_coarse: f64,
    pub dt_fine: f64,
    pub coarse: f64,
    pub fine: f64,
}

pub fn compare_schemes_refined(params: &Parameters, cfg: &SimConfig, n_paths: u64, factor: usize) -> SchemeConvergence {
    let factor = factor.max(1);
    let gaps: Vec<(f64, f64)> = (0..n_paths)
        .into_par_iter()
        .map(|i| path_scheme_gaps(params, cfg, i, factor))
        .collect();
    let (coarse, fine) = gaps.into_iter().fold((0.0f64, 0.0f64), |(c, f), (gc, gf)| (c.max(gc), f.max(gf)));
    SchemeConvergence { dt_coarse: cfg.dt, dt_fine: cfg.dt / factor as f64, coarse, fine }
}
