//! Market and investor inputs, and every closed-form constant derived from
//! them.
//!
//! All exponents are explicit roots of two quadratics:
//!
//! * `q` is the root in `(0, 1)` of `r q² − (r + λ + m) q + λ = 0`,
//! * `α₁ > 1 > 0 > α₂` are the roots of `m α² − (r − λ + m) α − λ = 0`,
//!
//! with `m = ½((μ − r)/σ)²`. The roots are computed with the
//! cancellation-free form of the quadratic formula (the small root taken
//! from the product of roots), which is the same explicit formula
//! rearranged.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Consumption rates below `DEGENERATE_CONSUMPTION * r * b` are solved with
/// the zero-consumption closed form: the free-boundary ratio underflows
/// there and the solution is continuous as consumption vanishes.
pub const DEGENERATE_CONSUMPTION: f64 = 1e-10;

/// Black–Scholes market with exponential lifetime and constant consumption.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Drift of the risky asset.
    pub mu: f64,
    /// Riskless rate.
    pub r: f64,
    /// Volatility of the risky asset.
    pub sigma: f64,
    /// Mortality hazard rate.
    pub lambda: f64,
    /// Consumption rate.
    pub c: f64,
    /// Bequest goal.
    pub b: f64,
}

impl ModelParams {
    /// Validates and builds the inputs. Rejects instead of clamping.
    pub fn new(mu: f64, r: f64, sigma: f64, lambda: f64, c: f64, b: f64) -> Result<Self> {
        let params = Self {
            mu,
            r,
            sigma,
            lambda,
            c,
            b,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        let checks: [(&'static str, f64, bool, &'static str); 6] = [
            ("r", self.r, self.r > 0.0, "riskless rate must be positive"),
            ("mu", self.mu, self.mu > self.r, "drift must exceed the riskless rate"),
            ("sigma", self.sigma, self.sigma > 0.0, "volatility must be positive"),
            ("lambda", self.lambda, self.lambda > 0.0, "hazard rate must be positive"),
            ("c", self.c, self.c >= 0.0, "consumption rate must be non-negative"),
            ("b", self.b, self.b > 0.0, "bequest goal must be positive"),
        ];
        for (name, value, ok, reason) in checks {
            if !value.is_finite() {
                return Err(Error::InvalidParams {
                    name,
                    value,
                    reason: "must be finite",
                });
            }
            if !ok {
                return Err(Error::InvalidParams {
                    name,
                    value,
                    reason,
                });
            }
        }
        Ok(())
    }

    /// Same market with a different consumption rate.
    pub fn with_c(&self, c: f64) -> Result<Self> {
        Self::new(self.mu, self.r, self.sigma, self.lambda, c, self.b)
    }

    /// Same market with a different bequest goal.
    pub fn with_b(&self, b: f64) -> Result<Self> {
        Self::new(self.mu, self.r, self.sigma, self.lambda, self.c, b)
    }

    pub fn with_lambda(&self, lambda: f64) -> Result<Self> {
        Self::new(self.mu, self.r, self.sigma, lambda, self.c, self.b)
    }

    pub fn with_sigma(&self, sigma: f64) -> Result<Self> {
        Self::new(self.mu, self.r, sigma, self.lambda, self.c, self.b)
    }

    /// `(μ − r)/σ²`, the Merton ratio that multiplies every strategy.
    pub fn merton_ratio(&self) -> f64 {
        (self.mu - self.r) / (self.sigma * self.sigma)
    }

    /// Wealth whose interest exactly covers consumption.
    pub fn perpetuity_level(&self) -> f64 {
        self.c / self.r
    }
}

/// Which closed form governs the solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Regime {
    /// `c = 0`.
    ZeroConsumption,
    /// `0 < c ≤ r b`; the safe level equals `b`.
    LowConsumption,
    /// `c > r b`; the safe level is `c / r`.
    HighConsumption,
}

impl Regime {
    pub fn classify(params: &ModelParams) -> Self {
        if params.c == 0.0 {
            Regime::ZeroConsumption
        } else if params.c <= params.r * params.b {
            Regime::LowConsumption
        } else {
            Regime::HighConsumption
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Regime::ZeroConsumption => "zero-consumption",
            Regime::LowConsumption => "low-consumption",
            Regime::HighConsumption => "high-consumption",
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Closed-form constants shared by all formulas.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedConstants {
    /// `½((μ − r)/σ)²`.
    pub m: f64,
    /// Exponent of the zero-consumption value function, in `(0, 1)`.
    pub q: f64,
    /// Positive dual exponent, `> 1`.
    pub alpha1: f64,
    /// Negative dual exponent.
    pub alpha2: f64,
    /// `α₁ / (α₁ − 1)`, exponent of the ruin-minimizing value function.
    pub p: f64,
    /// `max(b, c/r)`.
    pub w_safe: f64,
    pub regime: Regime,
}

impl DerivedConstants {
    /// Residual of `r q² − (r + λ + m) q + λ`.
    pub fn q_residual(&self, params: &ModelParams) -> f64 {
        let (r, l, m, q) = (params.r, params.lambda, self.m, self.q);
        r * q * q - (r + l + m) * q + l
    }

    /// Residual of `m α² − (r − λ + m) α − λ` at `alpha`.
    pub fn alpha_residual(&self, params: &ModelParams, alpha: f64) -> f64 {
        let (r, l, m) = (params.r, params.lambda, self.m);
        m * alpha * alpha - (r - l + m) * alpha - l
    }

    /// `(α₁ − 1)(1 − α₂)/(α₁ − α₂)`, the prefactor of the value function
    /// and strategy for `c > 0`.
    pub fn kappa(&self) -> f64 {
        (self.alpha1 - 1.0) * (1.0 - self.alpha2) / (self.alpha1 - self.alpha2)
    }

    /// Coefficients `(α₁(1 − α₂), α₂(α₁ − 1)) / (α₁ − α₂)` of the
    /// first-order condition relating wealth and the dual ratio.
    pub fn slope_coefficients(&self) -> (f64, f64) {
        let (a1, a2) = (self.alpha1, self.alpha2);
        let d = a1 - a2;
        (a1 * (1.0 - a2) / d, a2 * (a1 - 1.0) / d)
    }
}

/// Computes `m`, `q`, `α₁`, `α₂`, `p`, the safe level and the regime.
pub fn derive_constants(params: &ModelParams) -> DerivedConstants {
    let ModelParams {
        mu,
        r,
        sigma,
        lambda,
        c,
        b,
    } = *params;
    let sharpe = (mu - r) / sigma;
    let m = 0.5 * sharpe * sharpe;

    // r q² − B q + λ = 0 with B > 0; small root via the product of roots.
    let bq = r + lambda + m;
    let disc_q = (bq * bq - 4.0 * r * lambda).max(0.0).sqrt();
    let q = 2.0 * lambda / (bq + disc_q);

    // m α² − a α − λ = 0; the product of roots is −λ/m.
    let a = r - lambda + m;
    let disc_a = (a * a + 4.0 * m * lambda).sqrt();
    let (alpha1, alpha2) = if a >= 0.0 {
        let alpha1 = (a + disc_a) / (2.0 * m);
        (alpha1, -lambda / (m * alpha1))
    } else {
        let alpha2 = (a - disc_a) / (2.0 * m);
        (-lambda / (m * alpha2), alpha2)
    };

    DerivedConstants {
        m,
        q,
        alpha1,
        alpha2,
        p: alpha1 / (alpha1 - 1.0),
        w_safe: b.max(c / r),
        regime: Regime::classify(params),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn standard(c: f64) -> ModelParams {
        ModelParams::new(0.08, 0.04, 0.2, 0.04, c, 1.0).unwrap()
    }

    #[test]
    fn standard_constants() {
        let p = standard(0.0);
        let k = derive_constants(&p);
        assert!((k.m - 0.02).abs() < 1e-15);
        assert!((k.q - 0.5).abs() < 1e-14);
        assert!((k.alpha1 - 2.0).abs() < 1e-14);
        assert!((k.alpha2 + 1.0).abs() < 1e-14);
        assert!((k.p - 2.0).abs() < 1e-13);
        assert_eq!(k.w_safe, 1.0);
        assert_eq!(k.regime, Regime::ZeroConsumption);
        assert!(k.q_residual(&p).abs() < 1e-14);
        assert!(k.alpha_residual(&p, k.alpha1).abs() < 1e-14);
        assert!(k.alpha_residual(&p, k.alpha2).abs() < 1e-14);
    }

    #[test]
    fn regimes_and_safe_level() {
        let low = derive_constants(&standard(0.02));
        assert_eq!(low.regime, Regime::LowConsumption);
        assert_eq!(low.w_safe, 1.0);

        let high = derive_constants(&standard(0.06));
        assert_eq!(high.regime, Regime::HighConsumption);
        assert!((high.w_safe - 1.5).abs() < 1e-15);

        // c = r b ties go to the low-consumption side.
        let tie = derive_constants(&standard(0.04));
        assert_eq!(tie.regime, Regime::LowConsumption);
    }

    #[test]
    fn rejects_invalid_inputs() {
        assert!(ModelParams::new(0.04, 0.04, 0.2, 0.04, 0.0, 1.0).is_err());
        assert!(ModelParams::new(0.08, 0.0, 0.2, 0.04, 0.0, 1.0).is_err());
        assert!(ModelParams::new(0.08, 0.04, 0.0, 0.04, 0.0, 1.0).is_err());
        assert!(ModelParams::new(0.08, 0.04, 0.2, 0.0, 0.0, 1.0).is_err());
        assert!(ModelParams::new(0.08, 0.04, 0.2, 0.04, -0.01, 1.0).is_err());
        assert!(ModelParams::new(0.08, 0.04, 0.2, 0.04, 0.0, 0.0).is_err());
        assert!(ModelParams::new(f64::NAN, 0.04, 0.2, 0.04, 0.0, 1.0).is_err());
        let err = ModelParams::new(0.08, 0.04, -0.2, 0.04, 0.0, 1.0).unwrap_err();
        assert!(err.to_string().contains("sigma"));
    }

    #[test]
    fn q_and_alpha2_identity() {
        let k = derive_constants(&ModelParams::new(0.11, 0.03, 0.31, 0.07, 0.0, 2.0).unwrap());
        assert!(((1.0 - k.q) - 1.0 / (1.0 - k.alpha2)).abs() < 1e-12);
    }
}
