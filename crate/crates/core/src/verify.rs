//! Pass/fail verification of a solved parameter set: residual suites,
//! strategy properties and (optionally) Monte Carlo agreement.
//!
//! Every check reports a value, a threshold and a slack; a check passes
//! when its slack is strictly positive. Errors raised while computing a
//! check turn into failures carrying the error message.

use std::fmt;

use serde::Serialize;

use crate::analysis::{
    self, brute_force_shape, check_b_independence, check_c_sensitivity, check_leveraging,
    classify_monotonicity, compare_strategies, shapes_agree, zero_consumption_sensitivities,
    Leverage,
};
use crate::dual::zb0_residual;
use crate::error::Result;
use crate::mc::{self, SimConfig};
use crate::model::{ModelParams, Regime};
use crate::primal::{Allocation, Solution};

pub const CONSTANT_TOL: f64 = 1e-12;
pub const PASTING_TOL: f64 = 1e-10;
pub const ODE_TOL: f64 = 1e-8;
pub const HJB_TOL_ZERO: f64 = 1e-10;
pub const HJB_TOL: f64 = 1e-6;
pub const LEGENDRE_TOL: f64 = 1e-8;
pub const INVERSION_TOL: f64 = 1e-10;
pub const MC_SIGMAS: f64 = 3.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    /// Positive iff the check passes.
    pub slack: f64,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl Check {
    /// Passes when `value < threshold`.
    pub fn below(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        let slack = threshold - value;
        Self {
            name: name.into(),
            value,
            threshold,
            slack,
            passed: slack > 0.0,
            error: None,
        }
    }

    /// Passes when `value > threshold`.
    pub fn above(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        let slack = value - threshold;
        Self {
            name: name.into(),
            value,
            threshold,
            slack,
            passed: slack > 0.0,
            error: None,
        }
    }

    pub fn flag(name: impl Into<String>, ok: bool) -> Self {
        let v = if ok { 1.0 } else { 0.0 };
        Self::above(name, v, 0.5)
    }

    fn failed(name: impl Into<String>, err: impl fmt::Display) -> Self {
        Self {
            name: name.into(),
            value: f64::NAN,
            threshold: f64::NAN,
            slack: f64::NAN,
            passed: false,
            error: Some(err.to_string()),
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed { "PASS" } else { "FAIL" };
        match &self.error {
            Some(e) => write!(f, "{status} {:<36} error: {e}", self.name),
            None => write!(
                f,
                "{status} {:<36} value={:.6e} threshold={:.6e} slack={:.6e}",
                self.name, self.value, self.threshold, self.slack
            ),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Report {
    pub checks: Vec<Check>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn first_failure(&self) -> Option<&Check> {
        self.checks.iter().find(|c| !c.passed)
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    fn push(&mut self, name: &str, check: Result<Check>) {
        self.checks.push(check.unwrap_or_else(|e| Check::failed(name, e)));
    }

    fn extend(&mut self, name: &str, checks: Result<Vec<Check>>) {
        match checks {
            Ok(cs) => self.checks.extend(cs),
            Err(e) => self.checks.push(Check::failed(name, e)),
        }
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(f, "{c}")?;
        }
        let failed = self.checks.iter().filter(|c| !c.passed).count();
        write!(f, "{} checks, {} failed", self.checks.len(), failed)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyOptions {
    /// Skip the Monte Carlo checks.
    pub quick: bool,
    /// Points in the residual and inequality grids.
    pub grid: usize,
    pub n_paths: usize,
    pub dt: f64,
    pub seed: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            quick: false,
            grid: 200,
            n_paths: 20_000,
            dt: 1e-3,
            seed: 1,
        }
    }
}

fn uniform(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect()
}

/// Residual and property suites for `solution`, then Monte Carlo unless
/// `opts.quick`.
pub fn run_verify(solution: &Solution, opts: &VerifyOptions) -> Report {
    let mut report = Report::default();
    residual_checks(solution, opts, &mut report);
    property_checks(solution, opts, &mut report);
    if !opts.quick {
        mc_checks(solution, opts, &mut report);
    }
    report
}

fn residual_checks(s: &Solution, opts: &VerifyOptions, report: &mut Report) {
    let p = &s.params;
    let k = &s.constants;
    report.checks.push(Check::below(
        "constants.q-residual",
        k.q_residual(p).abs(),
        CONSTANT_TOL,
    ));
    report.checks.push(Check::below(
        "constants.alpha-residual",
        k.alpha_residual(p, k.alpha1).abs().max(k.alpha_residual(p, k.alpha2).abs()),
        CONSTANT_TOL,
    ));

    if let (Some(dual), Some(fb)) = (s.dual(), s.boundaries()) {
        report.checks.push(Check::below(
            "dual.smooth-pasting",
            dual.pasting_residuals().max_abs(),
            PASTING_TOL,
        ));
        report.checks.push(Check::below(
            "dual.boundary-equation",
            zb0_residual(p, k, fb.z_b0).abs(),
            PASTING_TOL,
        ));
        if s.regime() == Regime::LowConsumption {
            let inv_b = 1.0 / p.b;
            report.checks.push(Check::above(
                "dual.boundary-order",
                (inv_b - fb.z_b).min(fb.z_0 - inv_b) / inv_b,
                0.0,
            ));
        }
        let lo = dual.domain_start().max(fb.z_b * 1e-3);
        let ode = uniform(lo, fb.z_0, opts.grid)
            .into_iter()
            .try_fold(0.0f64, |acc, z| Ok(acc.max(dual.ode_residual(z)?.abs())));
        report.push("dual.ode", ode.map(|v| Check::below("dual.ode", v, ODE_TOL)));

        let inv = uniform(0.0, p.b, opts.grid).into_iter().try_fold(0.0f64, |acc, w| {
            let z = s.invert_dual(w)?;
            Ok(acc.max(s.inversion_residual(w, z)?.abs()))
        });
        report.push(
            "primal.inversion",
            inv.map(|v| Check::below("primal.inversion", v, INVERSION_TOL)),
        );
    }

    let bounds = s.phi(0.0).and_then(|lo| Ok(lo.abs().max((s.phi(s.w_safe())? - 1.0).abs())));
    report.push(
        "primal.boundary-values",
        bounds.map(|v| Check::below("primal.boundary-values", v, CONSTANT_TOL)),
    );

    let tol = if s.regime() == Regime::ZeroConsumption {
        HJB_TOL_ZERO
    } else {
        HJB_TOL
    };
    let grid = mc::interior_grid(s, opts.grid);
    report.push(
        "hjb",
        mc::hjb_residual(s, &grid).map(|v| Check::below("hjb", v, tol)),
    );

    if s.dual().is_some() {
        let legendre = uniform(0.0, p.b, 20).into_iter().try_fold(0.0f64, |acc, w| {
            Ok(acc.max((s.phi_by_legendre(w, 4000)? - s.phi(w)?).abs()))
        });
        report.push(
            "legendre",
            legendre.map(|v| Check::below("legendre", v, LEGENDRE_TOL)),
        );
    }
}

fn property_checks(s: &Solution, opts: &VerifyOptions, report: &mut Report) {
    let p = &s.params;
    let grid = uniform(0.0, p.b, opts.grid);
    match s.regime() {
        Regime::ZeroConsumption => {
            report.extend("props.leverage", leverage_checks(p));
            report.push(
                "props.goal-independence",
                check_b_independence(p, p.b, 2.0 * p.b, &grid)
                    .map(|g| Check::below("props.goal-independence", g.max_deviation, 1e-9)),
            );
        }
        Regime::LowConsumption => {
            report.extend("props.comparisons", comparison_checks(s, &grid));
            report.push(
                "props.goal-independence",
                check_b_independence(p, p.b, 2.0 * p.b, &grid)
                    .map(|g| Check::below("props.goal-independence", g.max_deviation, 1e-9)),
            );
            report.push("props.monotonicity", monotonicity_check(s, opts.grid.max(2000)));
            if p.c < p.r * p.b {
                report.push(
                    "props.c-sensitivity",
                    check_c_sensitivity(p, 1e-3 * p.b)
                        .map(|d| Check::above("props.c-sensitivity", d.derivative, 0.0)),
                );
            }
        }
        Regime::HighConsumption => {
            report.extend("props.comparisons", comparison_checks(s, &grid));
        }
    }
}

fn leverage_checks(p: &ModelParams) -> Result<Vec<Check>> {
    let lev = check_leveraging(p)?;
    let mut out = vec![Check::flag(
        "props.leverage-status",
        (lev.status == Leverage::AlwaysLeveraged) == (lev.ratio > 1.0),
    )];
    let w = 0.5 * p.b;
    let (d_lambda, d_sigma) = zero_consumption_sensitivities(p, w)?;
    out.push(Check::above("props.lambda-monotone", d_lambda, 0.0));
    out.push(Check::above("props.sigma-monotone", -d_sigma, 0.0));
    Ok(out)
}

fn comparison_checks(s: &Solution, grid: &[f64]) -> Result<Vec<Check>> {
    let rep = compare_strategies(s, grid)?;
    Ok(rep
        .checks
        .iter()
        .map(|c| {
            let mut ch = Check::above(format!("props.{}", c.name), c.min_slack, 0.0);
            ch.passed = c.holds;
            ch
        })
        .collect())
}

fn monotonicity_check(s: &Solution, n: usize) -> Result<Check> {
    let rep = classify_monotonicity(s)?;
    let brute = brute_force_shape(s, n)?;
    let tol = 2.0 * s.params.b / n as f64;
    Ok(Check::flag("props.monotonicity", shapes_agree(rep.shape, brute, tol)))
}

/// Starting wealth levels for the Monte Carlo checks.
pub fn mc_levels(s: &Solution) -> Vec<f64> {
    let b = s.params.b;
    let mut levels = vec![0.25 * b, 0.75 * b];
    if s.regime() == Regime::HighConsumption {
        levels.push(0.5 * (b + s.w_safe()));
    }
    levels
}

fn mc_checks(s: &Solution, opts: &VerifyOptions, report: &mut Report) {
    for (i, w0) in mc_levels(s).into_iter().enumerate() {
        let name = format!("mc.w0={w0}");
        let mut cfg = SimConfig::new(&s.params, w0, opts.n_paths, opts.seed.wrapping_add(i as u64));
        cfg.dt = opts.dt;
        let res = cfg.validate(&s.params).and_then(|_| {
            let sim = mc::simulate_optimal(s, &cfg)?;
            let phi = s.phi(w0)?;
            Ok((sim, phi))
        });
        match res {
            Ok((sim, phi)) => {
                report.checks.push(Check::below(name, sim.z_score(phi).abs(), MC_SIGMAS));
                if s.regime() == Regime::ZeroConsumption {
                    report.checks.push(Check::below(
                        format!("mc.no-ruin.w0={w0}"),
                        sim.n_ruined as f64,
                        0.5,
                    ));
                }
            }
            Err(e) => report.checks.push(Check::failed(name, e)),
        }
    }
}

/// Property report for the `props` subcommand: the regime's property
/// checks plus the goal-seeking branch indicators over a range of goals.
pub fn props_report(s: &Solution, grid: usize) -> Report {
    let opts = VerifyOptions {
        quick: true,
        grid,
        ..VerifyOptions::default()
    };
    let mut report = Report::default();
    property_checks(s, &opts, &mut report);
    let p = &s.params;
    if s.regime() == Regime::HighConsumption {
        let kink = s.pi_star(p.b).map(|a| match a {
            Allocation::Kink { left, right } => Check::above("props.kink-jump", left - right, 0.0),
            Allocation::Smooth(_) => Check::flag("props.kink-jump", false),
        });
        report.push("props.kink-jump", kink);
    }
    if p.c > 0.0 {
        // Goals between the perpetuity level c/r and forty times it.
        let cr = p.perpetuity_level();
        let goals: Vec<f64> = (0..=40).map(|i| cr * (1.0 + i as f64)).collect();
        let branches = analysis::goal_indicators(p, &goals).map(|ind| {
            let pos = ind.iter().any(|&(_, v)| v > 0.0);
            let neg = ind.iter().any(|&(_, v)| v < 0.0);
            Check::flag("props.goal-seeking-branches", pos && neg)
        });
        report.push("props.goal-seeking-branches", branches);
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dual::FreeBoundaries;
    use crate::primal::solve;

    fn params(c: f64) -> ModelParams {
        ModelParams::new(0.08, 0.04, 0.2, 0.04, c, 1.0).unwrap()
    }

    fn quick() -> VerifyOptions {
        VerifyOptions {
            quick: true,
            ..VerifyOptions::default()
        }
    }

    #[test]
    fn quick_suite_passes_in_every_regime() {
        for c in [0.0, 0.02, 0.04, 0.06] {
            let rep = run_verify(&solve(&params(c)).unwrap(), &quick());
            assert!(rep.passed(), "c={c}\n{rep}");
            assert!(rep.checks.iter().all(|ch| !ch.name.starts_with("mc.")));
        }
    }

    #[test]
    fn corrupted_ratio_fails_pasting_first() {
        let p = params(0.02);
        let s = solve(&p).unwrap();
        let fb = s.boundaries().unwrap();
        let bad = FreeBoundaries::from_ratio(&p, &s.constants, fb.regime, fb.z_b0 * 1.01).unwrap();
        let rep = run_verify(&Solution::with_boundaries(&p, bad), &quick());
        assert_eq!(rep.first_failure().unwrap().name, "dual.smooth-pasting");
    }

    #[test]
    fn props_report_shows_both_branches() {
        let rep = props_report(&solve(&params(0.02)).unwrap(), 200);
        assert!(rep.passed(), "{rep}");
        assert!(rep.get("props.goal-seeking-branches").unwrap().passed);
    }
}
