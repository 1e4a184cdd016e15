use thiserror::Error;

/// Errors produced by the solvers, analysis routines and simulator.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParams {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    /// The target value is not straddled by the function values at the
    /// bracket ends. For valid model inputs this indicates corrupted
    /// arithmetic, never a legitimate state.
    #[error("no sign change on [{lo}, {hi}] while solving {what}: f(lo) = {f_lo}, f(hi) = {f_hi}")]
    NoBracket {
        what: &'static str,
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
    },

    #[error("{what}: argument {value} outside [{lo}, {hi}]")]
    Domain {
        what: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("{what} is not defined for the {regime} regime")]
    Regime {
        what: &'static str,
        regime: &'static str,
    },

    #[error("invalid simulation config: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
