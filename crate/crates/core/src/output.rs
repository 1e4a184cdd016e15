//! Machine-readable tables: strategy grids, parameter sweeps and
//! Monte Carlo summaries, as CSV or versioned JSON.
//!
//! CSV numbers are written with 17 significant digits in scientific
//! notation, which round-trips every `f64` and never depends on locale.
//! Metadata goes in leading `#` lines.

use std::fmt::Write as _;
use std::io::Write;
use std::str::FromStr;

use serde::Serialize;
use serde_json::{json, Value};

use crate::dual::FreeBoundaries;
use crate::error::{Error, Result};
use crate::mc::SimResult;
use crate::model::{DerivedConstants, ModelParams, Regime};
use crate::primal::{solve, Solution, StrategyPoint};

pub const SCHEMA_VERSION: u32 = 1;
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => Err(Error::Config(format!(
                "unknown format {other:?}; expected csv or json"
            ))),
        }
    }
}

/// `count` evenly spaced wealth levels; missing bounds default to `0` and
/// the safe level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub count: usize,
    pub lo: Option<f64>,
    pub hi: Option<f64>,
}

impl GridSpec {
    pub fn new(count: usize) -> Self {
        Self {
            count,
            lo: None,
            hi: None,
        }
    }

    /// Bounds resolved against `w_safe`, with the grid invariants checked.
    pub fn resolve(&self, w_safe: f64) -> Result<(usize, f64, f64)> {
        if self.count < 2 {
            return Err(Error::Config(format!(
                "grid count must be at least 2, got {}",
                self.count
            )));
        }
        let lo = self.lo.unwrap_or(0.0);
        let hi = self.hi.unwrap_or(w_safe);
        if !(0.0 <= lo && lo < hi && hi <= w_safe) {
            return Err(Error::Config(format!(
                "grid bounds [{lo}, {hi}] must satisfy 0 <= lo < hi <= w_safe = {w_safe}"
            )));
        }
        Ok((self.count, lo, hi))
    }
}

/// 17 significant digits, fixed layout.
pub fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_num).unwrap_or_default()
}

/// A tabulated solution with everything needed to reproduce it.
#[derive(Debug, Clone, PartialEq)]
pub struct StrategyTable {
    pub params: ModelParams,
    pub constants: DerivedConstants,
    pub regime: Regime,
    pub boundaries: Option<FreeBoundaries>,
    pub rows: Vec<StrategyPoint>,
}

impl StrategyTable {
    pub fn build(solution: &Solution, grid: &GridSpec) -> Result<Self> {
        let (count, lo, hi) = grid.resolve(solution.w_safe())?;
        Ok(Self {
            params: solution.params,
            constants: solution.constants,
            regime: solution.regime(),
            boundaries: solution.boundaries().copied(),
            rows: solution.tabulate(count, lo, hi)?,
        })
    }

    fn header_lines(&self) -> String {
        let p = &self.params;
        let k = &self.constants;
        let mut s = String::new();
        let _ = writeln!(s, "# bequest {TOOL_VERSION}");
        let _ = writeln!(
            s,
            "# params mu={} r={} sigma={} lambda={} c={} b={}",
            fmt_num(p.mu),
            fmt_num(p.r),
            fmt_num(p.sigma),
            fmt_num(p.lambda),
            fmt_num(p.c),
            fmt_num(p.b)
        );
        let _ = writeln!(s, "# regime {}", self.regime);
        let _ = writeln!(
            s,
            "# constants m={} q={} alpha1={} alpha2={} p={} w_safe={}",
            fmt_num(k.m),
            fmt_num(k.q),
            fmt_num(k.alpha1),
            fmt_num(k.alpha2),
            fmt_num(k.p),
            fmt_num(k.w_safe)
        );
        if let Some(fb) = &self.boundaries {
            let _ = writeln!(
                s,
                "# boundaries z_b0={} z_b={} z_0={}",
                fmt_num(fb.z_b0),
                fmt_num(fb.z_b),
                fmt_num(fb.z_0)
            );
        }
        s
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.header_lines();
        s.push_str("w,phi,pi_star,z\n");
        for row in &self.rows {
            let _ = writeln!(
                s,
                "{},{},{},{}",
                fmt_num(row.w),
                fmt_num(row.phi),
                fmt_num(row.pi_star),
                fmt_opt(row.z)
            );
        }
        s
    }

    pub fn to_json(&self) -> Value {
        json!({
            "schema": SCHEMA_VERSION,
            "tool_version": TOOL_VERSION,
            "params": self.params,
            "regime": self.regime.name(),
            "constants": self.constants,
            "boundaries": self.boundaries,
            "columns": ["w", "phi", "pi_star", "z"],
            "rows": self.rows,
        })
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => pretty(&self.to_json()),
        }
    }
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json values always serialize");
    s.push('\n');
    s
}

/// Parameter varied by a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepParam {
    Mu,
    R,
    Sigma,
    Lambda,
    C,
    B,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            Self::Mu => "mu",
            Self::R => "r",
            Self::Sigma => "sigma",
            Self::Lambda => "lambda",
            Self::C => "c",
            Self::B => "b",
        }
    }

    fn apply(self, params: &ModelParams, v: f64) -> Result<ModelParams> {
        let mut p = *params;
        match self {
            Self::Mu => p.mu = v,
            Self::R => p.r = v,
            Self::Sigma => p.sigma = v,
            Self::Lambda => p.lambda = v,
            Self::C => p.c = v,
            Self::B => p.b = v,
        }
        p.validate()?;
        Ok(p)
    }
}

impl FromStr for SweepParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "mu" => Self::Mu,
            "r" => Self::R,
            "sigma" => Self::Sigma,
            "lambda" => Self::Lambda,
            "c" => Self::C,
            "b" => Self::B,
            other => {
                return Err(Error::Config(format!(
                    "unknown sweep parameter {other:?}; expected one of mu, r, sigma, lambda, c, b"
                )))
            }
        })
    }
}

/// Solution summary at one swept value, evaluated at a fixed wealth `w`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub value: f64,
    pub regime: Regime,
    pub z_b0: Option<f64>,
    pub z_b: Option<f64>,
    pub z_0: Option<f64>,
    pub w_safe: f64,
    pub phi: f64,
    pub pi_star: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub base: ModelParams,
    pub param: SweepParam,
    pub w: f64,
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    /// Solves at `steps` evenly spaced values of `param` in `[lo, hi]`.
    /// `φ` and `π*` are evaluated at `min(w, w_safe)`.
    pub fn build(
        base: &ModelParams,
        param: SweepParam,
        lo: f64,
        hi: f64,
        steps: usize,
        w: f64,
    ) -> Result<Self> {
        if steps < 2 || !(lo < hi) {
            return Err(Error::Config(format!(
                "sweep needs at least 2 steps and lo < hi, got {steps} steps on [{lo}, {hi}]"
            )));
        }
        if !(w >= 0.0 && w.is_finite()) {
            return Err(Error::Config(format!("sweep wealth must be finite and >= 0, got {w}")));
        }
        let mut rows = Vec::with_capacity(steps);
        for i in 0..steps {
            let v = if i + 1 == steps {
                hi
            } else {
                lo + (hi - lo) * i as f64 / (steps - 1) as f64
            };
            let p = param.apply(base, v)?;
            let s = solve(&p)?;
            let at = w.min(s.w_safe());
            let fb = s.boundaries();
            rows.push(SweepRow {
                value: v,
                regime: s.regime(),
                z_b0: fb.map(|f| f.z_b0),
                z_b: fb.map(|f| f.z_b),
                z_0: fb.map(|f| f.z_0),
                w_safe: s.w_safe(),
                phi: s.phi(at)?,
                pi_star: s.allocation(at)?,
            });
        }
        Ok(Self {
            base: *base,
            param,
            w,
            rows,
        })
    }

    pub fn to_csv(&self) -> String {
        let p = &self.base;
        let mut s = String::new();
        let _ = writeln!(s, "# bequest {TOOL_VERSION}");
        let _ = writeln!(
            s,
            "# base mu={} r={} sigma={} lambda={} c={} b={}",
            fmt_num(p.mu),
            fmt_num(p.r),
            fmt_num(p.sigma),
            fmt_num(p.lambda),
            fmt_num(p.c),
            fmt_num(p.b)
        );
        let _ = writeln!(s, "# sweep {} at w={}", self.param.name(), fmt_num(self.w));
        let _ = writeln!(s, "{},regime,z_b0,z_b,z_0,w_safe,phi,pi_star", self.param.name());
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{}",
                fmt_num(r.value),
                r.regime.name(),
                fmt_opt(r.z_b0),
                fmt_opt(r.z_b),
                fmt_opt(r.z_0),
                fmt_num(r.w_safe),
                fmt_num(r.phi),
                fmt_num(r.pi_star)
            );
        }
        s
    }

    pub fn to_json(&self) -> Value {
        json!({
            "schema": SCHEMA_VERSION,
            "tool_version": TOOL_VERSION,
            "base": self.base,
            "param": self.param,
            "w": self.w,
            "rows": self.rows,
        })
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => pretty(&self.to_json()),
        }
    }
}

/// Monte Carlo estimate next to the closed-form value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimulationSummary {
    pub params: ModelParams,
    pub regime: Regime,
    pub initial_wealth: f64,
    pub n_paths: usize,
    pub dt: f64,
    pub seed: u64,
    pub phi: f64,
    pub result: SimResult,
}

impl SimulationSummary {
    pub fn z_score(&self) -> f64 {
        self.result.z_score(self.phi)
    }

    pub fn to_csv(&self) -> String {
        let p = &self.params;
        let r = &self.result;
        let mut s = String::new();
        let _ = writeln!(s, "# bequest {TOOL_VERSION}");
        let _ = writeln!(
            s,
            "# params mu={} r={} sigma={} lambda={} c={} b={}",
            fmt_num(p.mu),
            fmt_num(p.r),
            fmt_num(p.sigma),
            fmt_num(p.lambda),
            fmt_num(p.c),
            fmt_num(p.b)
        );
        let _ = writeln!(s, "# regime {} dt={} seed={}", self.regime, fmt_num(self.dt), self.seed);
        s.push_str(
            "w0,phi,p_hat,std_err,z_score,n_paths,n_ruined,n_died_below_b,\
             n_died_at_or_above_b,n_reached_safe,n_capped\n",
        );
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{}",
            fmt_num(self.initial_wealth),
            fmt_num(self.phi),
            fmt_num(r.p_hat),
            fmt_num(r.std_err),
            fmt_num(self.z_score()),
            r.n_paths,
            r.n_ruined,
            r.n_died_below_b,
            r.n_died_at_or_above_b,
            r.n_reached_safe,
            r.n_capped
        );
        s
    }

    pub fn to_json(&self) -> Value {
        json!({
            "schema": SCHEMA_VERSION,
            "tool_version": TOOL_VERSION,
            "params": self.params,
            "regime": self.regime.name(),
            "initial_wealth": self.initial_wealth,
            "n_paths": self.n_paths,
            "dt": self.dt,
            "seed": self.seed,
            "phi": self.phi,
            "z_score": self.z_score(),
            "result": self.result,
        })
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => pretty(&self.to_json()),
        }
    }
}

/// Writes `text` to `path`, or to stdout when `path` is `None`.
pub fn emit(text: &str, path: Option<&std::path::Path>) -> std::io::Result<()> {
    match path {
        Some(p) => std::fs::write(p, text),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()
        }
    }
}
