//! Problem instance and the posterior mean of the drift sign.
//!
//! The observed process is `X_t = mu * theta * t + W_t` with `theta = ±1`
//! and `P(theta = 1) = p`. The posterior mean `M_t = E(theta | X_s, s <= t)`
//! is an explicit function of the current observation `X_t`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A validated problem instance `(mu, p, c0, c1, c2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParameters")]
pub struct Parameters {
    mu: f64,
    p: f64,
    c0: f64,
    c1: f64,
    c2: f64,
}

#[derive(Deserialize)]
struct RawParameters {
    mu: f64,
    p: f64,
    c0: f64,
    c1: f64,
    c2: f64,
}

impl TryFrom<RawParameters> for Parameters {
    type Error = Error;

    fn try_from(raw: RawParameters) -> Result<Self> {
        Parameters::new(raw.mu, raw.p, raw.c0, raw.c1, raw.c2)
    }
}

fn positive(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be a finite positive number",
        })
    }
}

impl Parameters {
    pub fn new(mu: f64, p: f64, c0: f64, c1: f64, c2: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidParameter {
                name: "p",
                value: p,
                reason: "must lie in [0, 1]",
            });
        }
        Ok(Self {
            mu: positive("mu", mu)?,
            p,
            c0: positive("c0", c0)?,
            c1: positive("c1", c1)?,
            c2: positive("c2", c2)?,
        })
    }

    /// The worked example instance: `p = 1/2, mu = 1/3, c0 = 2/3, c1 = 1, c2 = 3/2`.
    pub fn reference() -> Self {
        Self::new(1.0 / 3.0, 0.5, 2.0 / 3.0, 1.0, 1.5).expect("reference instance is valid")
    }

    /// Same costs and drift, different prior.
    pub fn with_prior(self, p: f64) -> Result<Self> {
        Self::new(self.mu, p, self.c0, self.c1, self.c2)
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }
    pub fn p(&self) -> f64 {
        self.p
    }
    pub fn c0(&self) -> f64 {
        self.c0
    }
    pub fn c1(&self) -> f64 {
        self.c1
    }
    pub fn c2(&self) -> f64 {
        self.c2
    }
}

/// Posterior mean of `theta`, always in `[-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct Belief(f64);

impl Belief {
    pub fn new(m: f64) -> Result<Self> {
        if (-1.0..=1.0).contains(&m) {
            Ok(Self(m))
        } else {
            Err(Error::Domain {
                what: "belief",
                value: m,
                domain: "[-1, 1]",
            })
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// A hypothesis label or decision, `+1` or `-1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    /// Sign of `x`, with `sgn 0 = +1`.
    pub fn of(x: f64) -> Self {
        if x < 0.0 {
            Sign::Minus
        } else {
            Sign::Plus
        }
    }

    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn as_i8(self) -> i8 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

/// `M_0 = 2p - 1`.
pub fn initial_belief(params: &Parameters) -> Belief {
    Belief(2.0 * params.p - 1.0)
}

/// Posterior mean given the current observation `x = X_t`.
///
/// Evaluates `1 - 2(1-p) / (p e^{2 mu x} + 1 - p)` with the exponential
/// always taken of a non-positive argument, so the result saturates at
/// `±1` instead of overflowing.
pub fn posterior_mean(params: &Parameters, x: f64) -> Belief {
    Belief(posterior_mean_value(params.p, params.mu, x))
}

#[inline]
pub(crate) fn posterior_mean_value(p: f64, mu: f64, x: f64) -> f64 {
    if p == 0.0 {
        return -1.0;
    }
    if p == 1.0 {
        return 1.0;
    }
    if x == 0.0 {
        return 2.0 * p - 1.0;
    }
    let q = 1.0 - p;
    if x > 0.0 {
        let e = (-2.0 * mu * x).exp();
        1.0 - 2.0 * q * e / (p + q * e)
    } else {
        let e = (2.0 * mu * x).exp();
        2.0 * p * e / (p * e + q) - 1.0
    }
}

/// Reduces a test of drift `mu1` against `mu2` to the centered `±mu` form.
///
/// Returns `(mu, centered)` with `mu = |mu1 - mu2| / 2` and
/// `centered = path_value - (mu1 + mu2) t / 2`. When `mu1 < mu2` the
/// hypothesis `theta = +1` corresponds to `mu2`.
pub fn center_two_drift_problem(mu1: f64, mu2: f64, path_value: f64, t: f64) -> Result<(f64, f64)> {
    if !(mu1.is_finite() && mu2.is_finite()) {
        return Err(Error::InvalidInstance("drift values must be finite"));
    }
    if mu1 == mu2 {
        return Err(Error::InvalidInstance("mu1 = mu2: the hypotheses are indistinguishable"));
    }
    let mu = (mu1 - mu2).abs() / 2.0;
    let centered = path_value - 0.5 * (mu1 + mu2) * t;
    Ok((mu, centered))
}
