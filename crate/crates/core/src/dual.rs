//! Convex dual of the value function for `c > 0`.
//!
//! For `0 < c ≤ r b` the dual is the value of an optimal stopping problem
//! with payoff `(1 − b z)₊`; on its continuation region `[z_b, z_0]` it
//! solves
//!
//! ```text
//! λ φ̂ = (λ − r) z φ̂_z + m z² φ̂_zz − c z,
//! φ̂(z_b) = 1 − b z_b,  φ̂_z(z_b) = −b,  φ̂(z_0) = 0 = φ̂_z(z_0).
//! ```
//!
//! For `c > r b` it solves a two-phase problem on `[0, z_0]` with an extra
//! source `λ 1{z ≤ z_b}`, `φ̂(0) = 1`, `φ̂_z(z_b) = −b` and the same
//! conditions at `z_0`. Both problems share the ratio `z_b0 = z_b / z_0`,
//! the unique root in `(0, 1)` of
//!
//! ```text
//! (c/r) [A₁ y^(α₁−1) + A₂ y^(α₂−1)] = c/r − b,
//! A₁ = α₁(1 − α₂)/(α₁ − α₂),  A₂ = α₂(α₁ − 1)/(α₁ − α₂).
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{DerivedConstants, ModelParams, Regime};
use crate::roots::bisect_newton;

/// Lower end of the initial bracket for `z_b0`.
pub const ZB0_BRACKET_EPS: f64 = 1e-14;

/// `y^e` evaluated as `exp(e ln y)`, exact at `y = 0`.
#[inline]
pub(crate) fn pow_ratio(y: f64, e: f64) -> f64 {
    if y == 0.0 {
        return match e.partial_cmp(&0.0) {
            Some(std::cmp::Ordering::Greater) => 0.0,
            Some(std::cmp::Ordering::Less) => f64::INFINITY,
            _ => 1.0,
        };
    }
    (e * y.ln()).exp()
}

/// `A₁ y^(α₁−1) + A₂ y^(α₂−1)`: the normalized first-order condition that
/// maps a dual ratio to wealth. Strictly increasing in `y`.
pub(crate) fn slope_condition(k: &DerivedConstants, y: f64) -> f64 {
    let (a1c, a2c) = k.slope_coefficients();
    a1c * pow_ratio(y, k.alpha1 - 1.0) + a2c * pow_ratio(y, k.alpha2 - 1.0)
}

pub(crate) fn slope_condition_derivative(k: &DerivedConstants, y: f64) -> f64 {
    let (a1c, a2c) = k.slope_coefficients();
    a1c * (k.alpha1 - 1.0) * pow_ratio(y, k.alpha1 - 2.0)
        + a2c * (k.alpha2 - 1.0) * pow_ratio(y, k.alpha2 - 2.0)
}

/// Positions of the free boundaries in the dual variable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FreeBoundaries {
    /// `z_b / z_0`, in `(0, 1)`.
    pub z_b0: f64,
    /// Dual image of wealth `b`.
    pub z_b: f64,
    /// Dual image of wealth `0`.
    pub z_0: f64,
    pub regime: Regime,
}

impl FreeBoundaries {
    /// Places both boundaries from a given ratio using the closed forms
    /// for the regime. Does not check that the ratio solves the boundary
    /// equation; [`solve_boundaries`] is the validated entry point.
    pub fn from_ratio(
        params: &ModelParams,
        k: &DerivedConstants,
        regime: Regime,
        z_b0: f64,
    ) -> Result<Self> {
        let cr = params.perpetuity_level();
        match regime {
            Regime::LowConsumption => {
                let inv_zb = cr
                    * k.kappa()
                    * (pow_ratio(z_b0, k.alpha2 - 1.0) - pow_ratio(z_b0, k.alpha1 - 1.0));
                let z_b = 1.0 / inv_zb;
                Ok(Self {
                    z_b0,
                    z_b,
                    z_0: z_b / z_b0,
                    regime,
                })
            }
            Regime::HighConsumption => {
                let inv_z0 = cr * (k.alpha1 - 1.0) / k.alpha1 * pow_ratio(z_b0, k.alpha2);
                let z_0 = 1.0 / inv_z0;
                Ok(Self {
                    z_b0,
                    z_b: z_0 * z_b0,
                    z_0,
                    regime,
                })
            }
            Regime::ZeroConsumption => Err(Error::Regime {
                what: "free boundaries",
                regime: regime.name(),
            }),
        }
    }

    /// Margin by which `z_b < 1/b` is guaranteed (left side minus one of
    /// the equivalent ratio inequality); positive on `(0, 1)`.
    pub fn lower_margin(&self, k: &DerivedConstants) -> f64 {
        let (a1, a2) = (k.alpha1, k.alpha2);
        let d = a1 - a2;
        (1.0 - a2) / d * pow_ratio(self.z_b0, a1 - 1.0)
            + (a1 - 1.0) / d * pow_ratio(self.z_b0, a2 - 1.0)
            - 1.0
    }

    /// Left side of the ratio inequality equivalent to `z_0 > 1/b`;
    /// positive on `(0, 1)`.
    pub fn upper_margin(&self, k: &DerivedConstants) -> f64 {
        let (a1, a2) = (k.alpha1, k.alpha2);
        let y = self.z_b0;
        let (a1c, a2c) = k.slope_coefficients();
        1.0 + k.kappa() * (pow_ratio(y, a1) - pow_ratio(y, a2))
            - a1c * pow_ratio(y, a1 - 1.0)
            - a2c * pow_ratio(y, a2 - 1.0)
    }
}

/// Solves the boundary-ratio equation for `z_b0 ∈ (0, 1)`.
///
/// The left side increases from `−∞` at `0⁺` to `c/r > c/r − b` at `1`, so
/// bisection on `[ε, 1]` always brackets the root; the lower end is pushed
/// towards zero if the left side has not yet dropped below the target.
pub fn solve_zb0(params: &ModelParams, k: &DerivedConstants) -> Result<f64> {
    if params.c <= 0.0 {
        return Err(Error::Regime {
            what: "boundary ratio",
            regime: Regime::ZeroConsumption.name(),
        });
    }
    let target = 1.0 - params.b * params.r / params.c;
    let g = |y: f64| slope_condition(k, y) - target;
    let dg = |y: f64| slope_condition_derivative(k, y);

    let mut lo = ZB0_BRACKET_EPS;
    while g(lo) >= 0.0 && lo > 1e-300 {
        lo *= 1e-10;
    }
    let y = bisect_newton("boundary ratio z_b0", g, dg, lo, 1.0)?;
    if !(y > 0.0 && y < 1.0) {
        return Err(Error::NoBracket {
            what: "boundary ratio z_b0",
            lo,
            hi: 1.0,
            f_lo: g(lo),
            f_hi: g(1.0),
        });
    }
    Ok(y)
}

/// Residual of the boundary-ratio equation in wealth units:
/// `(c/r)[A₁ y^(α₁−1) + A₂ y^(α₂−1)] − (c/r − b)`.
pub fn zb0_residual(params: &ModelParams, k: &DerivedConstants, y: f64) -> f64 {
    let cr = params.perpetuity_level();
    cr * slope_condition(k, y) - (cr - params.b)
}

/// Solves the free boundaries for the regime implied by the parameters.
pub fn solve_boundaries(params: &ModelParams, k: &DerivedConstants) -> Result<FreeBoundaries> {
    solve_boundaries_as(params, k, k.regime)
}

/// Solves the free boundaries with an explicit choice of problem. At `c = r b`
/// both problems apply and agree.
pub fn solve_boundaries_as(
    params: &ModelParams,
    k: &DerivedConstants,
    regime: Regime,
) -> Result<FreeBoundaries> {
    let c = params.c;
    let rb = params.r * params.b;
    let applicable = match regime {
        Regime::LowConsumption => c > 0.0 && c <= rb,
        Regime::HighConsumption => c >= rb,
        Regime::ZeroConsumption => false,
    };
    if !applicable {
        return Err(Error::Regime {
            what: "free-boundary problem",
            regime: regime.name(),
        });
    }
    let z_b0 = solve_zb0(params, k)?;
    FreeBoundaries::from_ratio(params, k, regime, z_b0)
}

/// Second derivative, which is one-sided at the phase transition `z_b` of
/// the two-phase problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Curvature {
    Smooth(f64),
    OneSided { left: f64, right: f64 },
}

impl Curvature {
    /// Single value if smooth, the right-hand value otherwise.
    pub fn right(self) -> f64 {
        match self {
            Curvature::Smooth(v) => v,
            Curvature::OneSided { right, .. } => right,
        }
    }

    pub fn left(self) -> f64 {
        match self {
            Curvature::Smooth(v) => v,
            Curvature::OneSided { left, .. } => left,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualValue {
    pub value: f64,
    pub slope: f64,
    pub curvature: Curvature,
}

/// Smooth-pasting residuals at both free boundaries.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PastingResiduals {
    pub value_at_zb: f64,
    pub slope_at_zb: f64,
    pub value_at_z0: f64,
    pub slope_at_z0: f64,
}

impl PastingResiduals {
    pub fn max_abs(&self) -> f64 {
        self.value_at_zb
            .abs()
            .max(self.slope_at_zb.abs())
            .max(self.value_at_z0.abs())
            .max(self.slope_at_z0.abs())
    }
}

/// The solved dual `φ̂` with its boundaries.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualFunction {
    pub params: ModelParams,
    pub constants: DerivedConstants,
    pub boundaries: FreeBoundaries,
}

impl DualFunction {
    pub fn new(params: ModelParams, constants: DerivedConstants, boundaries: FreeBoundaries) -> Self {
        Self {
            params,
            constants,
            boundaries,
        }
    }

    pub fn solve(params: &ModelParams) -> Result<Self> {
        let k = crate::model::derive_constants(params);
        let fb = solve_boundaries(params, &k)?;
        Ok(Self::new(*params, k, fb))
    }

    pub fn regime(&self) -> Regime {
        self.boundaries.regime
    }

    /// Left end of the domain on which `φ̂` solves its ODE.
    pub fn domain_start(&self) -> f64 {
        match self.regime() {
            Regime::HighConsumption => 0.0,
            _ => self.boundaries.z_b,
        }
    }

    /// Value and derivatives of the shared continuation branch on
    /// `[z_b, z_0]`.
    fn continuation(&self, z: f64) -> (f64, f64, f64) {
        let k = &self.constants;
        let cr = self.params.perpetuity_level();
        let z0 = self.boundaries.z_0;
        let (a1, a2) = (k.alpha1, k.alpha2);
        let d = a1 - a2;
        let y = z / z0;
        let ln_y = y.ln();
        let y_a1 = (a1 * ln_y).exp();
        let y_a2 = (a2 * ln_y).exp();
        let value = cr * z0 * ((1.0 - a2) / d * y_a1 + (a1 - 1.0) / d * y_a2 - y);
        let slope = cr * (slope_condition(k, y) - 1.0);
        let curvature = cr * k.kappa() * (a1 * y_a1 - a2 * y_a2) / (y * y) / z0;
        (value, slope, curvature)
    }

    /// Stopping-phase branch of the two-phase problem on `[0, z_b]`.
    fn source_phase(&self, z: f64) -> (f64, f64, f64) {
        let k = &self.constants;
        let cr = self.params.perpetuity_level();
        let excess = cr - self.params.b;
        let zb = self.boundaries.z_b;
        let a1 = k.alpha1;
        let t = z / zb;
        let value = 1.0 + excess * zb / a1 * pow_ratio(t, a1) - cr * z;
        let slope = excess * pow_ratio(t, a1 - 1.0) - cr;
        let curvature = if excess == 0.0 {
            0.0
        } else {
            excess * (a1 - 1.0) / zb * pow_ratio(t, a1 - 2.0)
        };
        (value, slope, curvature)
    }

    /// Evaluates `φ̂(z)` and its first two derivatives.
    ///
    /// Low consumption: the closed form on `[z_b, z_0]`, `1 − b z` below
    /// `z_b` and `0` above `z_0`. High consumption: the two-branch form on
    /// `[0, z_0]` (zero beyond), with a one-sided curvature pair at `z_b`.
    pub fn eval(&self, z: f64) -> Result<DualValue> {
        if !(z >= 0.0) {
            return Err(Error::Domain {
                what: "dual evaluation",
                value: z,
                lo: 0.0,
                hi: f64::INFINITY,
            });
        }
        let FreeBoundaries { z_b, z_0, .. } = self.boundaries;
        let b = self.params.b;
        let smooth = |(value, slope, c): (f64, f64, f64)| DualValue {
            value,
            slope,
            curvature: Curvature::Smooth(c),
        };
        let out = if z > z_0 {
            smooth((0.0, 0.0, 0.0))
        } else {
            match self.regime() {
                Regime::LowConsumption if z < z_b => smooth((1.0 - b * z, -b, 0.0)),
                Regime::HighConsumption if z < z_b => smooth(self.source_phase(z)),
                Regime::HighConsumption if z == z_b => {
                    let (value, slope, left) = self.source_phase(z);
                    let (_, _, right) = self.continuation(z);
                    DualValue {
                        value,
                        slope,
                        curvature: Curvature::OneSided { left, right },
                    }
                }
                _ => smooth(self.continuation(z)),
            }
        };
        Ok(out)
    }

    /// Residual of the dual ODE at `z` (including the source term below
    /// `z_b` in the two-phase problem).
    pub fn ode_residual(&self, z: f64) -> Result<f64> {
        let v = self.eval(z)?;
        let p = &self.params;
        let m = self.constants.m;
        let source = match self.regime() {
            Regime::HighConsumption if z <= self.boundaries.z_b => p.lambda,
            _ => 0.0,
        };
        let curvature = if z <= self.boundaries.z_b {
            v.curvature.left()
        } else {
            v.curvature.right()
        };
        Ok(p.lambda * v.value - (p.lambda - p.r) * z * v.slope - m * z * z * curvature + p.c * z
            - source)
    }

    /// Value and slope matching at `z_b` and `z_0`.
    pub fn pasting_residuals(&self) -> PastingResiduals {
        let FreeBoundaries { z_b, z_0, .. } = self.boundaries;
        let b = self.params.b;
        let (v_zb, s_zb, _) = self.continuation(z_b);
        let (v_z0, s_z0, _) = self.continuation(z_0);
        let (target_v, target_s) = match self.regime() {
            Regime::HighConsumption => {
                let (v, s, _) = self.source_phase(z_b);
                (v, s)
            }
            _ => (1.0 - b * z_b, -b),
        };
        PastingResiduals {
            value_at_zb: v_zb - target_v,
            slope_at_zb: s_zb - target_s,
            value_at_z0: v_z0,
            slope_at_z0: s_z0,
        }
    }
}
