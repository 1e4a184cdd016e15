//! Monte Carlo and residual verification.
//!
//! Wealth follows `dW = (rW + (μ − r)π(W) − c) dt + σ π(W) dB` under a
//! feedback strategy, with an independent exponential death time drawn up
//! front for each path. Paths stop at death, at ruin (`W ≤ 0`), at the safe
//! level (`W ≥ w_safe`, counted as success), or at the horizon cap
//! (counted as failure and reported).
//!
//! Each path uses its own Xoshiro256++ generator keyed by `(seed, path index)`,
//! and paths are reduced in fixed-size chunks in index order, so results do
//! not depend on the number of worker threads.

use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use rand_distr::{Distribution, Exp, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{ModelParams, Regime};
use crate::primal::Solution;

const CHUNK: usize = 2048;

/// Crossing exponents above this are treated as a zero crossing
/// probability (`e^{-40}` is below one part in 10¹⁷).
const BRIDGE_CUTOFF: f64 = 40.0;

/// A feedback map `w ↦ π(w)` in currency units.
pub trait Feedback: Sync {
    fn allocation(&self, w: f64) -> f64;
}

impl<F> Feedback for F
where
    F: Fn(f64) -> f64 + Sync,
{
    fn allocation(&self, w: f64) -> f64 {
        self(w)
    }
}

/// The optimal strategy in a form cheap enough for path simulation:
/// cubic Hermite interpolation of `π*` and its analytic slope on `[0, b]`
/// for `c > 0`, exact linear forms elsewhere. At `w = b` the left value is
/// used.
#[derive(Debug, Clone)]
pub struct OptimalFeedback {
    kind: FeedbackKind,
}

#[derive(Debug, Clone)]
enum FeedbackKind {
    Linear {
        slope: f64,
    },
    Tabulated {
        step: f64,
        values: Vec<f64>,
        slopes: Vec<f64>,
        b: f64,
        /// `(merton/(p − 1), c/r)` for the explicit branch above `b`.
        upper: Option<(f64, f64)>,
    },
}

impl OptimalFeedback {
    pub const DEFAULT_INTERVALS: usize = 4096;

    pub fn new(solution: &Solution) -> Result<Self> {
        Self::with_intervals(solution, Self::DEFAULT_INTERVALS)
    }

    pub fn with_intervals(solution: &Solution, intervals: usize) -> Result<Self> {
        let params = &solution.params;
        let k = &solution.constants;
        if solution.boundaries().is_none() {
            return Ok(Self {
                kind: FeedbackKind::Linear {
                    slope: params.merton_ratio() / (1.0 - k.q),
                },
            });
        }
        let n = intervals.max(1);
        let b = params.b;
        let step = b / n as f64;
        let mut values = Vec::with_capacity(n + 1);
        let mut slopes = Vec::with_capacity(n + 1);
        for i in 0..=n {
            let w = if i == n { b } else { step * i as f64 };
            values.push(solution.allocation(w)?);
            slopes.push(solution.pi_slope(w)?);
        }
        let upper = (solution.regime() == Regime::HighConsumption)
            .then(|| (params.merton_ratio() / (k.p - 1.0), params.perpetuity_level()));
        Ok(Self {
            kind: FeedbackKind::Tabulated {
                step,
                values,
                slopes,
                b,
                upper,
            },
        })
    }
}

impl Feedback for OptimalFeedback {
    #[inline]
    fn allocation(&self, w: f64) -> f64 {
        match &self.kind {
            FeedbackKind::Linear { slope } => slope * w,
            FeedbackKind::Tabulated {
                step,
                values,
                slopes,
                b,
                upper,
            } => {
                if w > *b {
                    if let Some((k, cr)) = upper {
                        return (k * (cr - w)).max(0.0);
                    }
                    return values[values.len() - 1];
                }
                let x = (w / step).max(0.0);
                let i = (x as usize).min(values.len() - 2);
                let t = x - i as f64;
                let (p0, p1) = (values[i], values[i + 1]);
                let (m0, m1) = (slopes[i] * step, slopes[i + 1] * step);
                let t2 = t * t;
                let t3 = t2 * t;
                (2.0 * t3 - 3.0 * t2 + 1.0) * p0
                    + (t3 - 2.0 * t2 + t) * m0
                    + (-2.0 * t3 + 3.0 * t2) * p1
                    + (t3 - t2) * m1
            }
        }
    }
}

/// Numerical parameters of a simulation run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimConfig {
    pub n_paths: usize,
    /// Time step in years; at most one trading day.
    pub dt: f64,
    pub seed: u64,
    /// Simulation stops here even if the investor is alive.
    pub horizon_cap: f64,
    pub initial_wealth: f64,
    /// Kill paths that cross a barrier between grid points with the
    /// Brownian-bridge crossing probability of the frozen-coefficient step.
    pub bridge_correction: bool,
}

impl SimConfig {
    /// Defaults: `dt = 1/1000`, horizon cap `50/λ`, bridge correction on.
    pub fn new(params: &ModelParams, initial_wealth: f64, n_paths: usize, seed: u64) -> Self {
        Self {
            n_paths,
            dt: 1e-3,
            seed,
            horizon_cap: 50.0 / params.lambda,
            initial_wealth,
            bridge_correction: true,
        }
    }

    pub fn validate(&self, params: &ModelParams) -> Result<()> {
        if self.n_paths == 0 {
            return Err(Error::Config("n_paths must be at least 1".into()));
        }
        if !(self.dt > 0.0 && self.dt <= 1.0 / 252.0) {
            return Err(Error::Config(format!("dt = {} must lie in (0, 1/252]", self.dt)));
        }
        if !(self.horizon_cap >= 10.0 / params.lambda) {
            return Err(Error::Config(format!(
                "horizon_cap = {} must be at least 10/lambda = {}",
                self.horizon_cap,
                10.0 / params.lambda
            )));
        }
        if !(self.initial_wealth >= 0.0 && self.initial_wealth.is_finite()) {
            return Err(Error::Config(format!(
                "initial wealth {} must be finite and non-negative",
                self.initial_wealth
            )));
        }
        Ok(())
    }
}

/// Path counts and the success-probability estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimResult {
    pub p_hat: f64,
    pub std_err: f64,
    pub n_paths: usize,
    pub n_ruined: usize,
    pub n_died_below_b: usize,
    pub n_died_at_or_above_b: usize,
    pub n_reached_safe: usize,
    pub n_capped: usize,
}

impl SimResult {
    pub fn successes(&self) -> usize {
        self.n_died_at_or_above_b + self.n_reached_safe
    }

    /// `(p_hat − target) / std_err`; zero when both coincide exactly.
    pub fn z_score(&self, target: f64) -> f64 {
        let d = self.p_hat - target;
        if d == 0.0 {
            0.0
        } else {
            d / self.std_err
        }
    }

    pub fn has_capped_paths(&self) -> bool {
        self.n_capped > 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Outcome {
    Ruined,
    DiedBelow,
    DiedAbove,
    ReachedSafe,
    Capped,
}

type PathRng = Xoshiro256PlusPlus;

/// SplitMix64 finaliser.
fn mix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

fn path_rng(seed: u64, index: usize) -> PathRng {
    PathRng::seed_from_u64(mix64(seed) ^ mix64(!(index as u64)))
}

/// Brownian-bridge test for touching `level` within a step whose end
/// points `x0`, `x1` lie on the same side: the crossing probability is
/// `exp(−2 (x0 − level)(x1 − level) / (vol² h))`.
#[inline]
fn crossed(rng: &mut PathRng, x0: f64, x1: f64, level: f64, var_h: f64) -> bool {
    let gap = 2.0 * (x0 - level) * (x1 - level);
    // Multiply instead of divide on the common path; e^{-40} is negligible.
    if gap >= BRIDGE_CUTOFF * var_h || var_h <= 0.0 {
        return false;
    }
    rng.random::<f64>() < (-gap / var_h).exp()
}

/// One Euler–Maruyama path until `death` (or the cap). `on_step` sees
/// `(w, w_next, h)` for every completed step inside the domain.
fn run_path<S, O>(
    params: &ModelParams,
    cfg: &SimConfig,
    w_safe: f64,
    strategy: &S,
    rng: &mut PathRng,
    death: f64,
    mut on_step: O,
) -> (Outcome, f64)
where
    S: Feedback + ?Sized,
    O: FnMut(f64, f64, f64),
{
    let ModelParams {
        mu, r, sigma, c, b, ..
    } = *params;
    let mut w = cfg.initial_wealth;
    if w <= 0.0 {
        return (Outcome::Ruined, 0.0);
    }
    if w >= w_safe {
        return (Outcome::ReachedSafe, 0.0);
    }
    let end = death.min(cfg.horizon_cap);
    let dt = cfg.dt;
    let sqrt_dt = dt.sqrt();
    let excess = mu - r;
    let full_steps = (end / dt).floor() as u64;
    let mut t = 0.0;
    let mut step: u64 = 0;
    while t < end {
        let (h, sqrt_h) = if step < full_steps {
            (dt, sqrt_dt)
        } else {
            let h = end - t;
            (h, h.sqrt())
        };
        step += 1;
        let pi = strategy.allocation(w);
        let vol = sigma * pi;
        let z: f64 = rng.sample(StandardNormal);
        let w_next = w + (r * w + excess * pi - c) * h + vol * sqrt_h * z;
        t = if step <= full_steps { step as f64 * dt } else { end };
        if w_next <= 0.0 {
            return (Outcome::Ruined, t);
        }
        if w_next >= w_safe {
            return (Outcome::ReachedSafe, t);
        }
        if cfg.bridge_correction {
            let var_h = vol * vol * h;
            if crossed(rng, w, w_next, 0.0, var_h) {
                return (Outcome::Ruined, t);
            }
            if crossed(rng, w, w_next, w_safe, var_h) {
                return (Outcome::ReachedSafe, t);
            }
        }
        on_step(w, w_next, h);
        w = w_next;
    }
    if death <= cfg.horizon_cap {
        if w >= b {
            (Outcome::DiedAbove, t)
        } else {
            (Outcome::DiedBelow, t)
        }
    } else {
        (Outcome::Capped, t)
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Tally {
    ruined: usize,
    below: usize,
    above: usize,
    safe: usize,
    capped: usize,
}

impl Tally {
    fn record(&mut self, o: Outcome) {
        match o {
            Outcome::Ruined => self.ruined += 1,
            Outcome::DiedBelow => self.below += 1,
            Outcome::DiedAbove => self.above += 1,
            Outcome::ReachedSafe => self.safe += 1,
            Outcome::Capped => self.capped += 1,
        }
    }

    fn merge(mut self, o: Tally) -> Tally {
        self.ruined += o.ruined;
        self.below += o.below;
        self.above += o.above;
        self.safe += o.safe;
        self.capped += o.capped;
        self
    }
}

/// Runs `per_path` over all path indices in fixed chunks and merges the
/// chunk results in index order.
fn chunked<T, F, M>(n_paths: usize, init: T, per_path: F, merge: M) -> T
where
    T: Send + Clone + Sync,
    F: Fn(&mut T, usize) + Sync,
    M: Fn(T, T) -> T,
{
    let n_chunks = n_paths.div_ceil(CHUNK);
    let parts: Vec<T> = (0..n_chunks)
        .into_par_iter()
        .map(|ci| {
            let mut acc = init.clone();
            for idx in ci * CHUNK..((ci + 1) * CHUNK).min(n_paths) {
                per_path(&mut acc, idx);
            }
            acc
        })
        .collect();
    parts.into_iter().fold(init, merge)
}

fn std_err(p: f64, n: usize) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

/// Estimates `P(W at death ≥ b)` under `strategy`.
pub fn simulate<S>(params: &ModelParams, config: &SimConfig, strategy: &S) -> Result<SimResult>
where
    S: Feedback + ?Sized,
{
    params.validate()?;
    config.validate(params)?;
    let w_safe = crate::model::derive_constants(params).w_safe;
    let death_dist = Exp::new(params.lambda).map_err(|e| Error::Config(e.to_string()))?;
    let tally = chunked(
        config.n_paths,
        Tally::default(),
        |acc, idx| {
            let mut rng = path_rng(config.seed, idx);
            let death: f64 = death_dist.sample(&mut rng);
            let (o, _) = run_path(params, config, w_safe, strategy, &mut rng, death, |_, _, _| {});
            acc.record(o);
        },
        Tally::merge,
    );
    let n = config.n_paths;
    let successes = tally.above + tally.safe;
    let p_hat = successes as f64 / n as f64;
    Ok(SimResult {
        p_hat,
        std_err: std_err(p_hat, n),
        n_paths: n,
        n_ruined: tally.ruined,
        n_died_below_b: tally.below,
        n_died_at_or_above_b: tally.above,
        n_reached_safe: tally.safe,
        n_capped: tally.capped,
    })
}

/// Simulates the optimally controlled process of `solution` from
/// `config.initial_wealth`.
pub fn simulate_optimal(solution: &Solution, config: &SimConfig) -> Result<SimResult> {
    let feedback = OptimalFeedback::new(solution)?;
    simulate(&solution.params, config, &feedback)
}

/// Estimate with standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub std_err: f64,
    pub expected: f64,
}

impl Estimate {
    /// Signed `(value − expected) / std_err`.
    pub fn z_score(&self) -> f64 {
        let d = self.value - self.expected;
        if d == 0.0 {
            0.0
        } else {
            d / self.std_err
        }
    }

    pub fn within(&self, n_se: f64) -> bool {
        self.z_score().abs() < n_se
    }
}

/// Zero-consumption checks: no ruin under the optimal strategy, and the
/// optimally controlled wealth behaves as a geometric Brownian motion with
/// drift `r + 2m/(1 − q)` and volatility `((μ − r)/σ)/(1 − q)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NoRuinReport {
    pub sim: SimResult,
    /// Drift from relative increments `ΔW/W` divided by `dt`.
    pub drift: Estimate,
    /// Volatility from the standard deviation of `ΔW/W` over `√dt`.
    pub volatility: Estimate,
    /// Mean log increment against `(drift − ½ vol²) dt`.
    pub log_increment: Estimate,
    pub increments: u64,
}

impl NoRuinReport {
    pub fn passes(&self) -> bool {
        self.sim.n_ruined == 0
            && self.drift.within(3.0)
            && self.volatility.within(3.0)
            && self.log_increment.within(3.0)
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    tally: Tally,
    n: u64,
    sum_rel: f64,
    sum_rel2: f64,
    sum_log: f64,
    sum_log2: f64,
}

pub fn check_no_ruin_zero_c(params: &ModelParams, config: &SimConfig) -> Result<NoRuinReport> {
    if params.c != 0.0 {
        return Err(Error::Regime {
            what: "no-ruin check",
            regime: Regime::classify(params).name(),
        });
    }
    config.validate(params)?;
    let solution = crate::primal::solve(params)?;
    let feedback = OptimalFeedback::new(&solution)?;
    let w_safe = solution.w_safe();
    let death_dist = Exp::new(params.lambda).map_err(|e| Error::Config(e.to_string()))?;
    let dt = config.dt;

    let moments = chunked(
        config.n_paths,
        Moments::default(),
        |acc, idx| {
            let mut rng = path_rng(config.seed, idx);
            let death: f64 = death_dist.sample(&mut rng);
            let (mut n, mut s1, mut s2, mut l1, mut l2) = (0u64, 0.0, 0.0, 0.0, 0.0);
            let (o, _) = run_path(params, config, w_safe, &feedback, &mut rng, death, |w, wn, h| {
                if h == dt {
                    let rel = wn / w - 1.0;
                    let lg = (wn / w).ln();
                    n += 1;
                    s1 += rel;
                    s2 += rel * rel;
                    l1 += lg;
                    l2 += lg * lg;
                }
            });
            acc.tally.record(o);
            acc.n += n;
            acc.sum_rel += s1;
            acc.sum_rel2 += s2;
            acc.sum_log += l1;
            acc.sum_log2 += l2;
        },
        |a, b| Moments {
            tally: a.tally.merge(b.tally),
            n: a.n + b.n,
            sum_rel: a.sum_rel + b.sum_rel,
            sum_rel2: a.sum_rel2 + b.sum_rel2,
            sum_log: a.sum_log + b.sum_log,
            sum_log2: a.sum_log2 + b.sum_log2,
        },
    );

    let k = &solution.constants;
    let drift_true = params.r + 2.0 * k.m / (1.0 - k.q);
    let vol_true = (params.mu - params.r) / params.sigma / (1.0 - k.q);
    let n = moments.n.max(1) as f64;
    let mean_rel = moments.sum_rel / n;
    let var_rel = (moments.sum_rel2 / n - mean_rel * mean_rel).max(0.0);
    let mean_log = moments.sum_log / n;
    let var_log = (moments.sum_log2 / n - mean_log * mean_log).max(0.0);
    let vol_hat = (var_rel / dt).sqrt();

    let t = moments.tally;
    let successes = t.above + t.safe;
    let p_hat = successes as f64 / config.n_paths as f64;
    Ok(NoRuinReport {
        sim: SimResult {
            p_hat,
            std_err: std_err(p_hat, config.n_paths),
            n_paths: config.n_paths,
            n_ruined: t.ruined,
            n_died_below_b: t.below,
            n_died_at_or_above_b: t.above,
            n_reached_safe: t.safe,
            n_capped: t.capped,
        },
        drift: Estimate {
            value: mean_rel / dt,
            std_err: (var_rel / n).sqrt() / dt,
            expected: drift_true,
        },
        volatility: Estimate {
            value: vol_hat,
            std_err: vol_hat / (2.0 * n).sqrt(),
            expected: vol_true,
        },
        log_increment: Estimate {
            value: mean_log,
            std_err: (var_log / n).sqrt(),
            expected: (drift_true - 0.5 * vol_true * vol_true) * dt,
        },
        increments: moments.n,
    })
}

/// Empirical `E[exp(−λ τ_b)]` for the optimally controlled zero-consumption
/// wealth without death, against `φ(w₀)`. Hitting times beyond the horizon
/// cap contribute zero.
pub fn laplace_hitting_check(params: &ModelParams, config: &SimConfig) -> Result<Estimate> {
    if params.c != 0.0 {
        return Err(Error::Regime {
            what: "hitting-time Laplace check",
            regime: Regime::classify(params).name(),
        });
    }
    config.validate(params)?;
    let solution = crate::primal::solve(params)?;
    let feedback = OptimalFeedback::new(&solution)?;
    let w_safe = solution.w_safe();
    let lambda = params.lambda;

    let (sum, sum2) = chunked(
        config.n_paths,
        (0.0f64, 0.0f64),
        |acc, idx| {
            let mut rng = path_rng(config.seed, idx);
            let (o, t) = run_path(
                params,
                config,
                w_safe,
                &feedback,
                &mut rng,
                f64::INFINITY,
                |_, _, _| {},
            );
            let disc = if o == Outcome::ReachedSafe {
                (-lambda * t).exp()
            } else {
                0.0
            };
            acc.0 += disc;
            acc.1 += disc * disc;
        },
        |a, b| (a.0 + b.0, a.1 + b.1),
    );
    let n = config.n_paths as f64;
    let mean = sum / n;
    let var = (sum2 / n - mean * mean).max(0.0);
    Ok(Estimate {
        value: mean,
        std_err: (var / n).sqrt(),
        expected: solution.phi(config.initial_wealth)?,
    })
}

/// `max_π L^π φ(w)` evaluated at the closed-form strategy:
/// `(rw + (μ − r)π* − c)φ_w + ½σ²π*²φ_ww − λ(φ − 1{w ≥ b})`.
pub fn hjb_residual_at(solution: &Solution, w: f64) -> Result<f64> {
    let p = &solution.params;
    let phi = solution.phi(w)?;
    let (d1, d2) = solution.phi_derivatives(w)?;
    let pi = solution.allocation(w)?;
    let indicator = if w >= p.b { 1.0 } else { 0.0 };
    Ok((p.r * w + (p.mu - p.r) * pi - p.c) * d1 + 0.5 * p.sigma * p.sigma * pi * pi * d2
        - p.lambda * (phi - indicator))
}

/// Maximum absolute HJB residual over `grid`, which must lie inside
/// `(0, w_safe)` and avoid `w = b` when `c > r b`.
pub fn hjb_residual(solution: &Solution, grid: &[f64]) -> Result<f64> {
    let ws = solution.w_safe();
    let b = solution.params.b;
    let kinked = solution.regime() == Regime::HighConsumption;
    let mut worst: f64 = 0.0;
    for &w in grid {
        if !(w > 0.0 && w < ws) || (kinked && w == b) {
            return Err(Error::Domain {
                what: "HJB residual grid",
                value: w,
                lo: 0.0,
                hi: ws,
            });
        }
        worst = worst.max(hjb_residual_at(solution, w)?.abs());
    }
    Ok(worst)
}

/// `n` interior points evenly spaced in `(0, w_safe)`, nudged off `b`
/// when the strategy has a kink there.
pub fn interior_grid(solution: &Solution, n: usize) -> Vec<f64> {
    let ws = solution.w_safe();
    let b = solution.params.b;
    (1..=n)
        .map(|i| ws * i as f64 / (n + 1) as f64)
        .map(|w| if w == b { w * (1.0 - 1e-9) } else { w })
        .collect()
}
