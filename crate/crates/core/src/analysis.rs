//! Qualitative properties of the optimal strategy as executable checks:
//! monotonicity in wealth, independence from the goal, leveraging, and
//! comparisons against the ruin-minimizing and goal-seeking benchmarks.

use serde::Serialize;

use crate::dual::{pow_ratio, slope_condition};
use crate::error::{Error, Result};
use crate::model::{derive_constants, DerivedConstants, ModelParams, Regime};
use crate::primal::{solve, Allocation, Solution};
use crate::roots::bisect;

/// Relative tolerance for the implicitly defined thresholds `c*`, `σ_l`.
pub const THRESHOLD_REL_TOL: f64 = 1e-10;

/// Relative step for the finite-difference sensitivities.
pub const FD_REL_STEP: f64 = 1e-5;

/// Strategy minimizing the probability of lifetime ruin:
/// `((μ − r)/σ²)(c/r − w)/(p − 1)`.
pub fn ruin_minimizing_strategy(params: &ModelParams, k: &DerivedConstants, w: f64) -> f64 {
    params.merton_ratio() * (params.perpetuity_level() - w) / (k.p - 1.0)
}

/// Zero-consumption goal-seeking strategy `((μ − r)/σ²) w/(1 − q)`.
pub fn goal_seeking_strategy(params: &ModelParams, k: &DerivedConstants, w: f64) -> f64 {
    params.merton_ratio() * w / (1.0 - k.q)
}

/// Goal-seeking strategy that treats `c/r` as the ruin level:
/// `((μ − r)/σ²)(w − c/r)/(1 − q)`.
pub fn shifted_goal_strategy(params: &ModelParams, k: &DerivedConstants, w: f64) -> f64 {
    params.merton_ratio() * (w - params.perpetuity_level()) / (1.0 - k.q)
}

/// `f(y) = −[α₁(α₁ − 1) y^(α₁−1) + α₂(1 − α₂) y^(α₂−1)]`, proportional to
/// `dπ*/dw` at the dual ratio `y`. Strictly decreasing in `y`.
pub fn turning_function(k: &DerivedConstants, y: f64) -> f64 {
    let (a1, a2) = (k.alpha1, k.alpha2);
    -(a1 * (a1 - 1.0) * pow_ratio(y, a1 - 1.0) + a2 * (1.0 - a2) * pow_ratio(y, a2 - 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum MonotonicityShape {
    IncreasingEverywhere,
    DecreasingThenIncreasing { w_star: f64 },
    DecreasingEverywhere,
}

/// Parameter case determining the shape.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RateCase {
    /// `r ≤ λ`.
    RateAtMostHazard,
    /// `λ < r < λ + m`.
    IntermediateRate,
    /// `r ≥ λ + m` and `c < c*`.
    HighRateBelowThreshold,
    /// `r ≥ λ + m` and `c ≥ c*`.
    HighRateAboveThreshold,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MonotonicityReport {
    pub shape: MonotonicityShape,
    pub case: RateCase,
    pub w_star: Option<f64>,
    pub c_star: Option<f64>,
    /// `f` at `z_0` (wealth `0`).
    pub f_at_z0: f64,
    /// `f` at `z_b` (wealth `b`).
    pub f_at_zb: f64,
}

/// Consumption threshold `c* ∈ (0, r b)` separating decreasing-then-
/// increasing from decreasing strategies when `r ≥ λ + m`, found by
/// bisection on
///
/// `[(rb/c − 1)/(α₁ + α₂ − 2)]^((α₁−α₂)/(α₁−1)) = −(α₂/(α₁−1)) ((1−α₂)/α₁)^(−(1−α₂)/(α₁−1))`.
///
/// `None` when `r < λ + m`, or when `α₁ + α₂ − 2` vanishes (then every
/// `c < r b` lies below the threshold).
pub fn consumption_threshold(params: &ModelParams) -> Result<Option<f64>> {
    let k = derive_constants(params);
    if params.r < params.lambda + k.m {
        return Ok(None);
    }
    let (a1, a2) = (k.alpha1, k.alpha2);
    let denom = a1 + a2 - 2.0;
    if !(denom > 0.0) {
        return Ok(None);
    }
    let rb = params.r * params.b;
    let exponent = (a1 - a2) / (a1 - 1.0);
    let rhs = -a2 / (a1 - 1.0) * pow_ratio((1.0 - a2) / a1, -(1.0 - a2) / (a1 - 1.0));
    // Compare logarithms; the left side spans many decades in c.
    let ln_rhs = rhs.ln();
    let gap = |c: f64| exponent * ((rb / c - 1.0) / denom).ln() - ln_rhs;
    let c_star = bisect("consumption threshold", gap, rb * 1e-12, rb, THRESHOLD_REL_TOL)?;
    Ok(Some(c_star))
}

/// Monotonicity of `π*` on `[0, b]` when `0 < c ≤ r b`.
pub fn classify_monotonicity(solution: &Solution) -> Result<MonotonicityReport> {
    let regime = solution.regime();
    let fb = match (regime, solution.boundaries()) {
        (Regime::LowConsumption, Some(fb)) => *fb,
        _ => {
            return Err(Error::Regime {
                what: "monotonicity classification",
                regime: regime.name(),
            })
        }
    };
    let params = &solution.params;
    let k = &solution.constants;
    let f_at_z0 = turning_function(k, 1.0);
    let f_at_zb = turning_function(k, fb.z_b0);

    let c_star = consumption_threshold(params)?;
    let case = if params.r <= params.lambda {
        RateCase::RateAtMostHazard
    } else if params.r < params.lambda + k.m {
        RateCase::IntermediateRate
    } else if c_star.is_none_or(|cs| params.c < cs) {
        RateCase::HighRateBelowThreshold
    } else {
        RateCase::HighRateAboveThreshold
    };

    let shape = if params.r <= params.lambda {
        MonotonicityShape::IncreasingEverywhere
    } else if f_at_zb > 0.0 {
        let y_star = bisect(
            "turning ratio",
            |y| turning_function(k, y),
            fb.z_b0,
            1.0,
            1e-15,
        )?;
        let cr = params.perpetuity_level();
        let w_star = cr * (1.0 - slope_condition(k, y_star));
        MonotonicityShape::DecreasingThenIncreasing { w_star }
    } else {
        MonotonicityShape::DecreasingEverywhere
    };
    let w_star = match shape {
        MonotonicityShape::DecreasingThenIncreasing { w_star } => Some(w_star),
        _ => None,
    };
    Ok(MonotonicityReport {
        shape,
        case,
        w_star,
        c_star,
        f_at_z0,
        f_at_zb,
    })
}

/// Shape of `π*` on `[0, b]` read off forward differences on `n + 1`
/// evenly spaced points, independent of the turning-function argument.
/// A turning point is located to within one grid spacing.
pub fn brute_force_shape(solution: &Solution, n: usize) -> Result<MonotonicityShape> {
    let b = solution.params.b;
    let mut prev = solution.allocation(0.0)?;
    let mut signs = Vec::with_capacity(n);
    for i in 1..=n {
        let w = b * i as f64 / n as f64;
        let next = solution.allocation(w)?;
        signs.push(((next - prev).signum(), w));
        prev = next;
    }
    let first_up = signs.iter().position(|&(s, _)| s > 0.0);
    let shape = match first_up {
        Some(0) if signs.iter().all(|&(s, _)| s > 0.0) => MonotonicityShape::IncreasingEverywhere,
        None => MonotonicityShape::DecreasingEverywhere,
        Some(i) if signs[i..].iter().all(|&(s, _)| s > 0.0) => {
            let h = b / n as f64;
            // The minimum lies within one step of the first rising interval.
            MonotonicityShape::DecreasingThenIncreasing {
                w_star: signs[i].1 - h,
            }
        }
        Some(_) => {
            return Err(Error::Regime {
                what: "brute-force shape (more than one turning point)",
                regime: solution.regime().name(),
            })
        }
    };
    Ok(shape)
}

/// Whether two shapes agree, with turning points within `tol`.
pub fn shapes_agree(a: MonotonicityShape, b: MonotonicityShape, tol: f64) -> bool {
    use MonotonicityShape::*;
    match (a, b) {
        (IncreasingEverywhere, IncreasingEverywhere) | (DecreasingEverywhere, DecreasingEverywhere) => true,
        (DecreasingThenIncreasing { w_star: x }, DecreasingThenIncreasing { w_star: y }) => {
            (x - y).abs() <= tol
        }
        _ => false,
    }
}

/// Goal-seeking indicator `α₁ z_b0^(α₁−1) − 1` for each goal in `goals`;
/// its sign tells which comparison branch holds.
pub fn goal_indicators(params: &ModelParams, goals: &[f64]) -> Result<Vec<(f64, f64)>> {
    goals
        .iter()
        .map(|&b| {
            let s = solve(&params.with_b(b)?)?;
            let fb = s.boundaries().ok_or(Error::Regime {
                what: "goal indicator",
                regime: s.regime().name(),
            })?;
            if s.regime() != Regime::LowConsumption {
                return Err(Error::Regime {
                    what: "goal indicator",
                    regime: s.regime().name(),
                });
            }
            let k = &s.constants;
            Ok((b, k.alpha1 * pow_ratio(fb.z_b0, k.alpha1 - 1.0) - 1.0))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GoalIndependence {
    pub max_deviation: f64,
    pub points: usize,
    pub passes: bool,
}

/// Maximum deviation between strategies for goals `b1 < b2` over the part
/// of `w_grid` below `b1`.
pub fn check_b_independence(
    params: &ModelParams,
    b1: f64,
    b2: f64,
    w_grid: &[f64],
) -> Result<GoalIndependence> {
    let s1 = solve(&params.with_b(b1)?)?;
    let s2 = solve(&params.with_b(b2)?)?;
    let mut max_deviation: f64 = 0.0;
    let mut points = 0;
    for &w in w_grid.iter().filter(|&&w| (0.0..b1).contains(&w)) {
        let d = (s1.allocation(w)? - s2.allocation(w)?).abs();
        max_deviation = max_deviation.max(d);
        points += 1;
    }
    Ok(GoalIndependence {
        max_deviation,
        points,
        passes: max_deviation < 1e-9,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Leverage {
    AlwaysLeveraged,
    NotAlwaysLeveraged,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LeverageReport {
    pub status: Leverage,
    /// `((μ − r)/σ²)/(1 − q)`, the ratio `π*(w)/w`.
    pub ratio: f64,
    /// Volatility below which leveraging holds, when `λ < (μ + r)/2`.
    pub sigma_l: Option<f64>,
}

/// `π*(w)/w` for zero consumption.
pub fn leverage_ratio(params: &ModelParams) -> f64 {
    let k = derive_constants(params);
    params.merton_ratio() / (1.0 - k.q)
}

/// Whether the zero-consumption strategy borrows at every wealth level.
pub fn check_leveraging(params: &ModelParams) -> Result<LeverageReport> {
    if params.c != 0.0 {
        return Err(Error::Regime {
            what: "leveraging check",
            regime: Regime::classify(params).name(),
        });
    }
    let ratio = leverage_ratio(params);
    let status = if ratio > 1.0 {
        Leverage::AlwaysLeveraged
    } else {
        Leverage::NotAlwaysLeveraged
    };
    let sigma_l = if params.lambda < 0.5 * (params.mu + params.r) {
        let excess = |sigma: f64| {
            params
                .with_sigma(sigma)
                .map(|p| leverage_ratio(&p) - 1.0)
                .unwrap_or(f64::NAN)
        };
        let mut lo = params.sigma;
        while excess(lo) <= 0.0 && lo > 1e-12 {
            lo *= 0.5;
        }
        let mut hi = params.sigma;
        while excess(hi) > 0.0 && hi < 1e12 {
            hi *= 2.0;
        }
        Some(bisect("leverage volatility", excess, lo, hi, THRESHOLD_REL_TOL)?)
    } else {
        None
    };
    Ok(LeverageReport {
        status,
        ratio,
        sigma_l,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InequalityCheck {
    pub name: &'static str,
    pub min_slack: f64,
    pub points: usize,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub checks: Vec<InequalityCheck>,
    /// `α₁ z_b0^(α₁−1) − 1`; positive when `π*` exceeds the goal-seeking
    /// strategy on all of `[0, b]`.
    pub goal_indicator: Option<f64>,
    /// Wealth where `π*` crosses the goal-seeking strategy, when it does.
    pub goal_crossing: Option<f64>,
}

impl ComparisonReport {
    pub fn all_hold(&self) -> bool {
        self.checks.iter().all(|c| c.holds)
    }

    pub fn get(&self, name: &str) -> Option<&InequalityCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

fn inequality<I>(name: &'static str, slacks: I, scale: f64) -> InequalityCheck
where
    I: IntoIterator<Item = f64>,
{
    let mut min_slack = f64::INFINITY;
    let mut points = 0;
    for s in slacks {
        min_slack = min_slack.min(s);
        points += 1;
    }
    InequalityCheck {
        name,
        min_slack,
        points,
        // Gaps below rounding are unresolvable (e.g. huge alpha1), not violations.
        holds: points > 0 && min_slack > -1e-12 * scale,
    }
}

/// Evaluates every applicable strategy inequality on `w_grid`.
///
/// * `ruin-minimizing`: `π* > ruin-minimizing strategy` on `(0, min(c/r, b))`.
/// * `goal-seeking`: `π* > goal-seeking strategy` on `[0, b]` when the
///   indicator is positive; otherwise `>` below and `<` above the crossing.
/// * `shifted-goal`: `π* > shifted goal-seeking strategy` on `(c/r, b)`.
/// * `kink`: `π*(b−) > π*(b+)` when `c > r b`.
pub fn compare_strategies(solution: &Solution, w_grid: &[f64]) -> Result<ComparisonReport> {
    let params = &solution.params;
    let k = &solution.constants;
    let fb = *solution.boundaries().ok_or(Error::Regime {
        what: "strategy comparison",
        regime: solution.regime().name(),
    })?;
    let (b, cr) = (params.b, params.perpetuity_level());
    let mut pis = Vec::with_capacity(w_grid.len());
    for &w in w_grid.iter().filter(|&&w| (0.0..=b).contains(&w)) {
        pis.push((w, solution.allocation(w)?));
    }
    let scale = pis.iter().map(|&(_, p)| p.abs()).fold(1e-300, f64::max);
    let mut checks = Vec::new();

    checks.push(inequality(
        "ruin-minimizing",
        pis.iter()
            .filter(|&&(w, _)| w > 0.0 && w < cr.min(b))
            .map(|&(w, pi)| pi - ruin_minimizing_strategy(params, k, w)),
        scale,
    ));

    let mut goal_indicator = None;
    let mut goal_crossing = None;
    if solution.regime() == Regime::LowConsumption {
        let indicator = k.alpha1 * pow_ratio(fb.z_b0, k.alpha1 - 1.0) - 1.0;
        goal_indicator = Some(indicator);
        if indicator > 0.0 {
            checks.push(inequality(
                "goal-seeking",
                pis.iter()
                    .map(|&(w, pi)| pi - goal_seeking_strategy(params, k, w)),
                scale,
            ));
        } else {
            let gap = |w: f64| {
                solution
                    .allocation(w)
                    .map(|pi| pi - goal_seeking_strategy(params, k, w))
                    .unwrap_or(f64::NAN)
            };
            let crossing = bisect("goal-seeking crossing", gap, 0.0, b, 1e-14)?;
            goal_crossing = Some(crossing);
            let excl = 1e-9 * b;
            checks.push(inequality(
                "goal-seeking-below-crossing",
                pis.iter()
                    .filter(|&&(w, _)| w < crossing - excl)
                    .map(|&(w, pi)| pi - goal_seeking_strategy(params, k, w)),
                scale,
            ));
            checks.push(inequality(
                "goal-seeking-above-crossing",
                pis.iter()
                    .filter(|&&(w, _)| w > crossing + excl)
                    .map(|&(w, pi)| goal_seeking_strategy(params, k, w) - pi),
                scale,
            ));
        }
        // The interval (c/r, b) may hold no grid points when c is close to r b.
        let shifted = inequality(
            "shifted-goal",
            pis.iter()
                .filter(|&&(w, _)| w > cr && w < b)
                .map(|&(w, pi)| pi - shifted_goal_strategy(params, k, w)),
            scale,
        );
        if shifted.points > 0 {
            checks.push(shifted);
        }
    }

    if solution.regime() == Regime::HighConsumption {
        if let Allocation::Kink { left, right } = solution.pi_star(b)? {
            checks.push(inequality("kink", [left - right], left.abs()));
        }
    }

    Ok(ComparisonReport {
        checks,
        goal_indicator,
        goal_crossing,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sensitivity {
    pub derivative: f64,
    pub positive: bool,
}

/// Central finite difference of `π*(w_small)` in `c`; `0 < c ≤ r b`.
pub fn check_c_sensitivity(params: &ModelParams, w_small: f64) -> Result<Sensitivity> {
    let regime = Regime::classify(params);
    if regime != Regime::LowConsumption {
        return Err(Error::Regime {
            what: "consumption sensitivity",
            regime: regime.name(),
        });
    }
    let h = FD_REL_STEP * params.c;
    let up = solve(&params.with_c(params.c + h)?)?.allocation(w_small)?;
    let down = solve(&params.with_c(params.c - h)?)?.allocation(w_small)?;
    let derivative = (up - down) / (2.0 * h);
    Ok(Sensitivity {
        derivative,
        positive: derivative > 0.0,
    })
}

/// Finite-difference derivatives `(∂π*/∂λ, ∂π*/∂σ)` at `w` for `c = 0`.
pub fn zero_consumption_sensitivities(params: &ModelParams, w: f64) -> Result<(f64, f64)> {
    if params.c != 0.0 {
        return Err(Error::Regime {
            what: "zero-consumption sensitivities",
            regime: Regime::classify(params).name(),
        });
    }
    let hl = FD_REL_STEP * params.lambda;
    let d_lambda = (solve(&params.with_lambda(params.lambda + hl)?)?.allocation(w)?
        - solve(&params.with_lambda(params.lambda - hl)?)?.allocation(w)?)
        / (2.0 * hl);
    let hs = FD_REL_STEP * params.sigma;
    let d_sigma = (solve(&params.with_sigma(params.sigma + hs)?)?.allocation(w)?
        - solve(&params.with_sigma(params.sigma - hs)?)?.allocation(w)?)
        / (2.0 * hs);
    Ok((d_lambda, d_sigma))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(mu: f64, r: f64, sigma: f64, lambda: f64, c: f64, b: f64) -> ModelParams {
        ModelParams::new(mu, r, sigma, lambda, c, b).unwrap()
    }

    #[test]
    fn increasing_when_rate_at_most_hazard() {
        let s = solve(&p(0.08, 0.04, 0.2, 0.04, 0.02, 1.0)).unwrap();
        let rep = classify_monotonicity(&s).unwrap();
        assert_eq!(rep.shape, MonotonicityShape::IncreasingEverywhere);
        assert_eq!(rep.case, RateCase::RateAtMostHazard);
    }

    #[test]
    fn intermediate_rate_turns() {
        let s = solve(&p(0.08, 0.04, 0.2, 0.03, 0.02, 1.0)).unwrap();
        let rep = classify_monotonicity(&s).unwrap();
        assert_eq!(rep.case, RateCase::IntermediateRate);
        let w_star = rep.w_star.unwrap();
        assert!(w_star > 0.0 && w_star < 1.0);
        assert!(s.pi_slope(0.5 * w_star).unwrap() < 0.0);
        assert!(s.pi_slope(0.5 * (w_star + 1.0)).unwrap() > 0.0);
    }

    #[test]
    fn threshold_flips_shape() {
        let base = p(0.08, 0.06, 0.2, 0.01, 0.03, 1.0);
        let c_star = consumption_threshold(&base).unwrap().unwrap();
        assert!(c_star > 0.0 && c_star < 0.06);
        let below = solve(&base.with_c(c_star * 0.99).unwrap()).unwrap();
        let above = solve(&base.with_c(c_star * 1.01).unwrap()).unwrap();
        let rb = classify_monotonicity(&below).unwrap();
        let ra = classify_monotonicity(&above).unwrap();
        assert_eq!(rb.case, RateCase::HighRateBelowThreshold);
        assert!(matches!(rb.shape, MonotonicityShape::DecreasingThenIncreasing { .. }));
        assert_eq!(ra.case, RateCase::HighRateAboveThreshold);
        assert_eq!(ra.shape, MonotonicityShape::DecreasingEverywhere);
    }

    #[test]
    fn monotonicity_needs_low_consumption() {
        for c in [0.0, 0.06] {
            let s = solve(&p(0.08, 0.04, 0.2, 0.04, c, 1.0)).unwrap();
            assert!(matches!(classify_monotonicity(&s), Err(Error::Regime { .. })));
        }
    }

    #[test]
    fn leveraging_cases() {
        let standard = check_leveraging(&p(0.08, 0.04, 0.2, 0.04, 0.0, 1.0)).unwrap();
        assert_eq!(standard.status, Leverage::AlwaysLeveraged);
        assert!((standard.ratio - 2.0).abs() < 1e-12);
        let sigma_l = standard.sigma_l.unwrap();
        assert!(sigma_l > 0.2);
        let at = leverage_ratio(&p(0.08, 0.04, sigma_l, 0.04, 0.0, 1.0));
        assert!((at - 1.0).abs() < 1e-8);

        let high_hazard = check_leveraging(&p(0.08, 0.04, 5.0, 0.06, 0.0, 1.0)).unwrap();
        assert_eq!(high_hazard.status, Leverage::AlwaysLeveraged);
        assert!(high_hazard.sigma_l.is_none());

        let volatile = check_leveraging(&p(0.08, 0.04, 3.0, 0.04, 0.0, 1.0)).unwrap();
        assert_eq!(volatile.status, Leverage::NotAlwaysLeveraged);
        assert!(check_leveraging(&p(0.08, 0.04, 0.2, 0.04, 0.01, 1.0)).is_err());
    }

    #[test]
    fn comparisons_hold_on_standard_params() {
        let grid: Vec<f64> = (0..=200).map(|i| i as f64 / 200.0).collect();
        let s = solve(&p(0.08, 0.04, 0.2, 0.04, 0.02, 1.0)).unwrap();
        let rep = compare_strategies(&s, &grid).unwrap();
        assert!(rep.all_hold(), "{rep:?}");
        assert!(rep.goal_indicator.unwrap() < 0.0);
        assert!(rep.goal_crossing.is_some());

        let high = solve(&p(0.08, 0.04, 0.2, 0.04, 0.06, 1.0)).unwrap();
        let rep = compare_strategies(&high, &grid).unwrap();
        assert!(rep.get("kink").unwrap().holds);
    }

    #[test]
    fn sensitivities() {
        let s = check_c_sensitivity(&p(0.08, 0.04, 0.2, 0.04, 0.02, 1.0), 0.01).unwrap();
        assert!(s.positive);
        let (dl, ds) = zero_consumption_sensitivities(&p(0.08, 0.04, 0.2, 0.04, 0.0, 1.0), 0.5).unwrap();
        assert!(dl > 0.0 && ds < 0.0);
    }
}
