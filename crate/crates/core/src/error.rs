use thiserror::Error;

/// Errors raised by the engine.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("invalid instance: {0}")]
    InvalidInstance(&'static str),

    #[error("{what} = {value} is outside the domain {domain}")]
    Domain {
        what: &'static str,
        value: f64,
        domain: &'static str,
    },

    #[error("root of {equation} not bracketed on [{lo}, {hi}] (f(lo) = {f_lo}, f(hi) = {f_hi})")]
    NotBracketed {
        equation: &'static str,
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
    },

    #[error("second derivative is undefined at the kink x = {x}")]
    KinkPoint { x: f64 },

    #[error("initial decision never triggered before truncation at t = {t_end}")]
    NoInitialDecision { t_end: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
