//! Maximum probability of reaching a bequest goal at death.
//!
//! An investor with wealth `w`, consuming at rate `c`, invests in a
//! Black–Scholes market (drift `μ`, volatility `σ`, riskless rate `r`) and
//! dies at an exponential time with hazard `λ`. This crate computes the
//! maximum probability `φ(w)` that wealth at death is at least `b`, the
//! optimal dollar amount `π*(w)` held in the risky asset, and checks both
//! against independent oracles.
//!
//! ```
//! use bequest::{solve, ModelParams};
//!
//! let params = ModelParams::new(0.08, 0.04, 0.2, 0.04, 0.0, 1.0)?;
//! let solution = solve(&params)?;
//! assert!((solution.phi(0.25)? - 0.5).abs() < 1e-12);
//! # Ok::<(), bequest::Error>(())
//! ```

pub mod analysis;
pub mod dual;
pub mod error;
pub mod mc;
pub mod model;
pub mod output;
pub mod primal;
pub mod roots;
pub mod verify;

pub use dual::{Curvature, DualFunction, DualValue, FreeBoundaries};
pub use error::{Error, Result};
pub use model::{derive_constants, DerivedConstants, ModelParams, Regime};
pub use primal::{solve, solve_in_regime, Allocation, Solution, StrategyPoint};
