//! Value function `φ(w)` and optimal feedback `π*(w)` on `[0, w_safe]`.
//!
//! * `c = 0`: `φ(w) = (w/b)^q`, `π*(w) = ((μ − r)/σ²) w/(1 − q)`.
//! * `c > 0`, `w ≤ b`: with `y = z/z_0 ∈ [z_b0, 1]` the unique solution of
//!   `(c/r)[A₁ y^(α₁−1) + A₂ y^(α₂−1)] = c/r − w`,
//!
//!   ```text
//!   φ(w)  = (c/r) κ [y^(α₂−1) − y^(α₁−1)] z,
//!   π*(w) = ((μ − r)/σ²) (c/r) κ [α₁ y^(α₁−1) − α₂ y^(α₂−1)],
//!   ```
//!
//!   `κ = (α₁ − 1)(1 − α₂)/(α₁ − α₂)`.
//! * `c > r b`, `b < w ≤ c/r`:
//!   `φ(w) = 1 − (c/r − b)(z_b/p)((c/r − w)/(c/r − b))^p` and
//!   `π*(w) = ((μ − r)/σ²)(c/r − w)/(p − 1)`.

use serde::Serialize;

use crate::dual::{pow_ratio, slope_condition, slope_condition_derivative, DualFunction, FreeBoundaries};
use crate::error::{Error, Result};
use crate::model::{derive_constants, DerivedConstants, ModelParams, Regime, DEGENERATE_CONSUMPTION};
use crate::roots::bisect_newton;

/// Relative slack accepted when a wealth argument overshoots the safe level
/// by floating-point error.
const SAFE_LEVEL_SLACK: f64 = 1e-12;

/// Inversion residuals this small at a bracket end are treated as zero.
const ROUNDING_SLACK: f64 = 1e-13;

/// Optimal risky allocation, which jumps at `w = b` when `c > r b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Allocation {
    Smooth(f64),
    Kink { left: f64, right: f64 },
}

impl Allocation {
    /// Value used for simulation: the left limit at the kink.
    pub fn feedback(self) -> f64 {
        match self {
            Allocation::Smooth(v) => v,
            Allocation::Kink { left, .. } => left,
        }
    }
}

/// One tabulated wealth level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StrategyPoint {
    pub w: f64,
    pub phi: f64,
    pub pi_star: f64,
    /// Dual variable `φ_w(w)`; present when `c > 0` and `w ≤ b`.
    pub z: Option<f64>,
}

/// The solved problem for one parameter set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Solution {
    pub params: ModelParams,
    pub constants: DerivedConstants,
    dual: Option<DualFunction>,
    route: Regime,
}

/// Solves the problem with the closed form appropriate to the regime.
pub fn solve(params: &ModelParams) -> Result<Solution> {
    params.validate()?;
    let k = derive_constants(params);
    let route = if params.c < DEGENERATE_CONSUMPTION * params.r * params.b {
        Regime::ZeroConsumption
    } else {
        k.regime
    };
    Solution::build(params, k, route)
}

/// Solves with an explicit choice of formula family. At `c = r b` the
/// low- and high-consumption routes both apply.
pub fn solve_in_regime(params: &ModelParams, route: Regime) -> Result<Solution> {
    params.validate()?;
    let k = derive_constants(params);
    if route == Regime::ZeroConsumption && params.c != 0.0 {
        return Err(Error::Regime {
            what: "closed form with positive consumption",
            regime: route.name(),
        });
    }
    Solution::build(params, k, route)
}

impl Solution {
    fn build(params: &ModelParams, k: DerivedConstants, route: Regime) -> Result<Self> {
        let dual = match route {
            Regime::ZeroConsumption => None,
            _ => {
                let fb = crate::dual::solve_boundaries_as(params, &k, route)?;
                Some(DualFunction::new(*params, k, fb))
            }
        };
        Ok(Self {
            params: *params,
            constants: k,
            dual,
            route,
        })
    }

    /// Assembles a solution around externally supplied boundaries, e.g. to
    /// exercise the verifiers against a deliberately wrong ratio.
    pub fn with_boundaries(params: &ModelParams, boundaries: FreeBoundaries) -> Self {
        let k = derive_constants(params);
        Self {
            params: *params,
            constants: k,
            dual: Some(DualFunction::new(*params, k, boundaries)),
            route: boundaries.regime,
        }
    }

    /// Formula family used; differs from `constants.regime` only for
    /// vanishing consumption or a forced route at `c = r b`.
    pub fn regime(&self) -> Regime {
        self.route
    }

    pub fn boundaries(&self) -> Option<&FreeBoundaries> {
        self.dual.as_ref().map(|d| &d.boundaries)
    }

    pub fn dual(&self) -> Option<&DualFunction> {
        self.dual.as_ref()
    }

    pub fn w_safe(&self) -> f64 {
        self.constants.w_safe
    }

    fn dual_or_err(&self, what: &'static str) -> Result<&DualFunction> {
        self.dual.as_ref().ok_or(Error::Regime {
            what,
            regime: self.route.name(),
        })
    }

    /// Dual ratio `y = z/z_0` for `w ∈ [0, b]`.
    fn ratio(&self, dual: &DualFunction, w: f64) -> Result<f64> {
        let b = self.params.b;
        if !(0.0..=b).contains(&w) {
            return Err(Error::Domain {
                what: "dual inversion",
                value: w,
                lo: 0.0,
                hi: b,
            });
        }
        let fb = &dual.boundaries;
        if w == 0.0 {
            return Ok(1.0);
        }
        if w == b {
            return Ok(fb.z_b0);
        }
        let k = &self.constants;
        let target = 1.0 - w / self.params.perpetuity_level();
        let f = |y| slope_condition(k, y) - target;
        // The residual increases in y. Near w = b (and w = 0) rounding can push
        // an endpoint value a few ulps past zero.
        let (f_lo, f_hi) = (f(fb.z_b0), f(1.0));
        if f_lo >= 0.0 && f_lo <= ROUNDING_SLACK {
            return Ok(fb.z_b0);
        }
        if f_hi <= 0.0 && f_hi >= -ROUNDING_SLACK {
            return Ok(1.0);
        }
        bisect_newton(
            "dual inversion",
            f,
            |y| slope_condition_derivative(k, y),
            fb.z_b0,
            1.0,
        )
    }

    /// The dual variable `z = φ_w(w) ∈ [z_b, z_0]` for `w ∈ [0, b]`; the
    /// solution of `φ̂_z(z) = −w`.
    pub fn invert_dual(&self, w: f64) -> Result<f64> {
        let dual = self.dual_or_err("dual inversion")?;
        Ok(self.ratio(dual, w)? * dual.boundaries.z_0)
    }

    /// Residual of the inversion equation at `(w, z)` in wealth units.
    pub fn inversion_residual(&self, w: f64, z: f64) -> Result<f64> {
        let dual = self.dual_or_err("dual inversion")?;
        let cr = self.params.perpetuity_level();
        Ok(cr * slope_condition(&self.constants, z / dual.boundaries.z_0) - (cr - w))
    }

    fn check_wealth(&self, what: &'static str, w: f64) -> Result<f64> {
        let ws = self.w_safe();
        if w < 0.0 || w.is_nan() || w > ws * (1.0 + SAFE_LEVEL_SLACK) {
            return Err(Error::Domain {
                what,
                value: w,
                lo: 0.0,
                hi: ws,
            });
        }
        Ok(w.min(ws))
    }

    /// `φ` on `[0, b]` from the dual ratio (`c > 0`).
    fn phi_lower(&self, dual: &DualFunction, y: f64) -> f64 {
        let k = &self.constants;
        let cr = self.params.perpetuity_level();
        let z = y * dual.boundaries.z_0;
        cr * k.kappa() * (pow_ratio(y, k.alpha2 - 1.0) - pow_ratio(y, k.alpha1 - 1.0)) * z
    }

    fn pi_lower(&self, y: f64) -> f64 {
        let k = &self.constants;
        let cr = self.params.perpetuity_level();
        self.params.merton_ratio()
            * cr
            * k.kappa()
            * (k.alpha1 * pow_ratio(y, k.alpha1 - 1.0) - k.alpha2 * pow_ratio(y, k.alpha2 - 1.0))
    }

    /// `(c/r − w)/(c/r − b)` on the upper branch.
    fn upper_fraction(&self, w: f64) -> f64 {
        let cr = self.params.perpetuity_level();
        (cr - w) / (cr - self.params.b)
    }

    fn ruin_minimizing(&self, w: f64) -> f64 {
        self.params.merton_ratio() * (self.params.perpetuity_level() - w) / (self.constants.p - 1.0)
    }

    /// Maximum probability of reaching the goal; `1` at and above the safe
    /// level.
    pub fn phi(&self, w: f64) -> Result<f64> {
        if w < 0.0 || w.is_nan() {
            return Err(Error::Domain {
                what: "value function",
                value: w,
                lo: 0.0,
                hi: f64::INFINITY,
            });
        }
        if w >= self.w_safe() {
            return Ok(1.0);
        }
        let b = self.params.b;
        let value = match &self.dual {
            None => pow_ratio(w / b, self.constants.q),
            Some(dual) if w <= b => {
                let y = self.ratio(dual, w)?;
                self.phi_lower(dual, y)
            }
            Some(dual) => {
                let p = self.constants.p;
                let excess = self.params.perpetuity_level() - b;
                1.0 - excess * dual.boundaries.z_b / p * pow_ratio(self.upper_fraction(w), p)
            }
        };
        Ok(value.clamp(0.0, 1.0))
    }

    /// Optimal amount in the risky asset, with both one-sided values at the
    /// kink `w = b` when `c > r b`.
    pub fn pi_star(&self, w: f64) -> Result<Allocation> {
        let w = self.check_wealth("optimal strategy", w)?;
        let b = self.params.b;
        let Some(dual) = &self.dual else {
            return Ok(Allocation::Smooth(
                self.params.merton_ratio() * w / (1.0 - self.constants.q),
            ));
        };
        if w < b {
            return Ok(Allocation::Smooth(self.pi_lower(self.ratio(dual, w)?)));
        }
        match self.route {
            Regime::HighConsumption if w == b => Ok(Allocation::Kink {
                left: self.pi_lower(dual.boundaries.z_b0),
                right: self.ruin_minimizing(b),
            }),
            Regime::HighConsumption => Ok(Allocation::Smooth(self.ruin_minimizing(w))),
            _ => Ok(Allocation::Smooth(self.pi_lower(dual.boundaries.z_b0))),
        }
    }

    /// `π*(w)` with the left limit at the kink.
    pub fn allocation(&self, w: f64) -> Result<f64> {
        self.pi_star(w).map(Allocation::feedback)
    }

    /// `φ`, `π*` and `z` at one wealth level with a single inversion.
    pub fn point(&self, w: f64) -> Result<StrategyPoint> {
        let w = self.check_wealth("strategy point", w)?;
        match &self.dual {
            Some(dual) if w <= self.params.b => {
                let y = self.ratio(dual, w)?;
                let phi = if w >= self.w_safe() {
                    1.0
                } else {
                    self.phi_lower(dual, y).clamp(0.0, 1.0)
                };
                Ok(StrategyPoint {
                    w,
                    phi,
                    pi_star: self.pi_lower(y),
                    z: Some(y * dual.boundaries.z_0),
                })
            }
            _ => Ok(StrategyPoint {
                w,
                phi: self.phi(w)?,
                pi_star: self.allocation(w)?,
                z: None,
            }),
        }
    }

    /// Dual variable `φ_w(w)` anywhere on `[0, w_safe]` for `c > 0`,
    /// including the explicit upper branch when `c > r b`.
    pub fn dual_variable(&self, w: f64) -> Result<f64> {
        let dual = self.dual_or_err("dual variable")?;
        let w = self.check_wealth("dual variable", w)?;
        if w <= self.params.b {
            return Ok(self.ratio(dual, w)? * dual.boundaries.z_0);
        }
        let a1 = self.constants.alpha1;
        Ok(dual.boundaries.z_b * pow_ratio(self.upper_fraction(w), 1.0 / (a1 - 1.0)))
    }

    /// `(φ_w, φ_ww)` at an interior wealth level. For `c > 0` these are
    /// `z` and `−1/φ̂_zz(z)`.
    pub fn phi_derivatives(&self, w: f64) -> Result<(f64, f64)> {
        let w = self.check_wealth("value derivatives", w)?;
        match &self.dual {
            None => {
                let (q, b) = (self.constants.q, self.params.b);
                let d1 = q * pow_ratio(w / b, q - 1.0) / b;
                let d2 = q * (q - 1.0) * pow_ratio(w / b, q - 2.0) / (b * b);
                Ok((d1, d2))
            }
            Some(dual) => {
                let z = self.dual_variable(w)?;
                let v = dual.eval(z)?;
                let curvature = if w < self.params.b {
                    v.curvature.right()
                } else {
                    v.curvature.left()
                };
                Ok((z, -1.0 / curvature))
            }
        }
    }

    /// `dπ*/dw` on `[0, b]` (left derivative at `b`) for `c > 0`, or on
    /// `[0, w_safe]` for `c = 0`.
    pub fn pi_slope(&self, w: f64) -> Result<f64> {
        let k = &self.constants;
        let merton = self.params.merton_ratio();
        let Some(dual) = &self.dual else {
            return Ok(merton / (1.0 - k.q));
        };
        let w = self.check_wealth("strategy slope", w)?;
        if w > self.params.b {
            return Ok(-merton / (k.p - 1.0));
        }
        let y = self.ratio(dual, w)?;
        let (a1, a2) = (k.alpha1, k.alpha2);
        let num = a1 * (a1 - 1.0) * pow_ratio(y, a1 - 2.0) + a2 * (1.0 - a2) * pow_ratio(y, a2 - 2.0);
        let den = a1 * pow_ratio(y, a1 - 2.0) - a2 * pow_ratio(y, a2 - 2.0);
        Ok(-merton * num / den)
    }

    /// `min_z [φ̂(z) + w z]` over the dual domain by dense scan and golden
    /// section refinement; independent of the inversion used by
    /// [`Solution::phi`].
    pub fn phi_by_legendre(&self, w: f64, scan_points: usize) -> Result<f64> {
        let dual = self.dual_or_err("Legendre transform")?;
        let (lo, hi) = (dual.domain_start(), dual.boundaries.z_0);
        let objective = |z: f64| dual.eval(z).map(|v| v.value + w * z).unwrap_or(f64::INFINITY);
        let n = scan_points.max(3);
        let step = (hi - lo) / (n - 1) as f64;
        let (mut best_i, mut best) = (0, f64::INFINITY);
        for i in 0..n {
            let v = objective(lo + step * i as f64);
            if v < best {
                best = v;
                best_i = i;
            }
        }
        let mut a = lo + step * best_i.saturating_sub(1) as f64;
        let mut b = (lo + step * (best_i + 1) as f64).min(hi);
        let inv_phi = 0.5 * (5f64.sqrt() - 1.0);
        let mut x1 = b - inv_phi * (b - a);
        let mut x2 = a + inv_phi * (b - a);
        let (mut f1, mut f2) = (objective(x1), objective(x2));
        for _ in 0..200 {
            if (b - a) <= 1e-15 * hi {
                break;
            }
            if f1 <= f2 {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - inv_phi * (b - a);
                f1 = objective(x1);
            } else {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + inv_phi * (b - a);
                f2 = objective(x2);
            }
        }
        Ok(best.min(f1).min(f2).min(objective(lo)).min(objective(hi)))
    }

    /// Evaluates `StrategyPoint`s on `count` evenly spaced levels between
    /// `lo` and `hi`. When `c > r b` and `b` lies inside the range, it is
    /// reported twice (left and right limits of the strategy).
    pub fn tabulate(&self, count: usize, lo: f64, hi: f64) -> Result<Vec<StrategyPoint>> {
        if count < 2 {
            return Err(Error::Domain {
                what: "grid count",
                value: count as f64,
                lo: 2.0,
                hi: f64::INFINITY,
            });
        }
        let lo = self.check_wealth("grid lower bound", lo)?;
        let hi = self.check_wealth("grid upper bound", hi)?;
        let b = self.params.b;
        let kinked = self.route == Regime::HighConsumption && b > lo && b < hi;
        let mut rows = Vec::with_capacity(count + 2);
        let mut kink_done = false;
        for i in 0..count {
            let w = if i + 1 == count {
                hi
            } else {
                lo + (hi - lo) * i as f64 / (count - 1) as f64
            };
            if kinked && !kink_done && w >= b {
                rows.extend(self.kink_rows()?);
                kink_done = true;
                if w == b {
                    continue;
                }
            }
            rows.push(self.point(w)?);
        }
        Ok(rows)
    }

    fn kink_rows(&self) -> Result<[StrategyPoint; 2]> {
        let b = self.params.b;
        let left = self.point(b)?;
        let Allocation::Kink { right, .. } = self.pi_star(b)? else {
            return Ok([left, left]);
        };
        Ok([
            left,
            StrategyPoint {
                pi_star: right,
                ..left
            },
        ])
    }
}
