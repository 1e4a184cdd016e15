use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use bequest::dual::FreeBoundaries;
use bequest::mc::{self, SimConfig};
use bequest::output::{emit, Format, GridSpec, SimulationSummary, StrategyTable, SweepTable};
use bequest::verify::{props_report, run_verify, Report, VerifyOptions};
use bequest::{solve, ModelParams, Solution};

#[derive(Parser)]
#[command(name = "bequest", version, about = "Maximize the probability of reaching a bequest goal")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Tabulate phi, pi* and the dual variable on a wealth grid.
    Solve {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Vary one parameter and report boundaries, phi and pi* at a fixed wealth.
    Sweep {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, value_parser = ["mu", "r", "sigma", "lambda", "c", "b"])]
        param: String,
        #[arg(long)]
        from: f64,
        #[arg(long)]
        to: f64,
        #[arg(long, default_value_t = 11)]
        steps: usize,
        /// Wealth level (clamped to the safe level).
        #[arg(long, default_value_t = 0.5)]
        w: f64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Monte Carlo estimate of the success probability from one wealth level.
    Simulate {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        w0: f64,
        #[arg(long, default_value_t = 100_000)]
        paths: usize,
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Plain discrete absorption without the bridge crossing test.
        #[arg(long)]
        no_bridge: bool,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Residual, property and Monte Carlo checks; exits nonzero on failure.
    Verify {
        #[command(flatten)]
        model: ModelArgs,
        /// Skip Monte Carlo.
        #[arg(long)]
        quick: bool,
        #[arg(long, default_value_t = 200)]
        grid: usize,
        #[arg(long, default_value_t = 20_000)]
        paths: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Replace the free-boundary ratio (negative control).
        #[arg(long, hide = true)]
        corrupt_zb0: Option<f64>,
        #[command(flatten)]
        out: ReportOut,
    },
    /// Strategy property checks for the parameter set.
    Props {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 200)]
        grid: usize,
        #[command(flatten)]
        out: ReportOut,
    },
}

#[derive(Args)]
struct ModelArgs {
    #[arg(long, default_value_t = 0.08)]
    mu: f64,
    #[arg(long, default_value_t = 0.04)]
    r: f64,
    #[arg(long, default_value_t = 0.2)]
    sigma: f64,
    #[arg(long, default_value_t = 0.04)]
    lambda: f64,
    #[arg(long, default_value_t = 0.0)]
    c: f64,
    #[arg(long, default_value_t = 1.0)]
    b: f64,
}

impl ModelArgs {
    fn params(&self) -> bequest::Result<ModelParams> {
        ModelParams::new(self.mu, self.r, self.sigma, self.lambda, self.c, self.b)
    }
}

#[derive(Args)]
struct GridArgs {
    /// Number of wealth levels.
    #[arg(long, default_value_t = 101)]
    grid: usize,
    #[arg(long)]
    w_min: Option<f64>,
    #[arg(long)]
    w_max: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Fmt {
    Csv,
    Json,
}

impl From<Fmt> for Format {
    fn from(f: Fmt) -> Self {
        match f {
            Fmt::Csv => Format::Csv,
            Fmt::Json => Format::Json,
        }
    }
}

#[derive(Args)]
struct OutArgs {
    #[arg(long, value_enum, default_value = "csv")]
    format: Fmt,
    /// Write here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReportOut {
    /// Emit the report as JSON.
    #[arg(long)]
    json: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn render_report(report: &Report, json: bool) -> String {
    if json {
        let v = serde_json::json!({
            "schema": bequest::output::SCHEMA_VERSION,
            "tool_version": bequest::output::TOOL_VERSION,
            "passed": report.passed(),
            "checks": report.checks,
        });
        format!("{}\n", serde_json::to_string_pretty(&v).expect("report serializes"))
    } else {
        format!("{report}\n")
    }
}

fn finish_report(report: &Report, out: &ReportOut) -> Result<ExitCode, String> {
    emit(&render_report(report, out.json), out.out.as_deref()).map_err(|e| e.to_string())?;
    match report.first_failure() {
        None => Ok(ExitCode::SUCCESS),
        Some(c) => {
            eprintln!("first failing check: {}", c.name);
            Ok(ExitCode::from(1))
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, String> {
    let err = |e: bequest::Error| e.to_string();
    match cli.cmd {
        Cmd::Solve { model, grid, out } => {
            let s = solve(&model.params().map_err(err)?).map_err(err)?;
            let spec = GridSpec {
                count: grid.grid,
                lo: grid.w_min,
                hi: grid.w_max,
            };
            let table = StrategyTable::build(&s, &spec).map_err(err)?;
            emit(&table.render(out.format.into()), out.out.as_deref()).map_err(|e| e.to_string())?;
        }
        Cmd::Sweep {
            model,
            param,
            from,
            to,
            steps,
            w,
            out,
        } => {
            let p = model.params().map_err(err)?;
            let table =
                SweepTable::build(&p, param.parse().map_err(err)?, from, to, steps, w).map_err(err)?;
            emit(&table.render(out.format.into()), out.out.as_deref()).map_err(|e| e.to_string())?;
        }
        Cmd::Simulate {
            model,
            w0,
            paths,
            dt,
            seed,
            no_bridge,
            out,
        } => {
            let p = model.params().map_err(err)?;
            let s = solve(&p).map_err(err)?;
            let mut cfg = SimConfig::new(&p, w0, paths, seed);
            cfg.dt = dt;
            cfg.bridge_correction = !no_bridge;
            cfg.validate(&p).map_err(err)?;
            let result = mc::simulate_optimal(&s, &cfg).map_err(err)?;
            let summary = SimulationSummary {
                params: p,
                regime: s.regime(),
                initial_wealth: w0,
                n_paths: paths,
                dt,
                seed,
                phi: s.phi(w0).map_err(err)?,
                result,
            };
            emit(&summary.render(out.format.into()), out.out.as_deref())
                .map_err(|e| e.to_string())?;
        }
        Cmd::Verify {
            model,
            quick,
            grid,
            paths,
            seed,
            corrupt_zb0,
            out,
        } => {
            let p = model.params().map_err(err)?;
            let mut s = solve(&p).map_err(err)?;
            if let Some(y) = corrupt_zb0 {
                let regime = s.boundaries().map(|fb| fb.regime).ok_or_else(|| {
                    "--corrupt-zb0 needs positive consumption".to_string()
                })?;
                let fb = FreeBoundaries::from_ratio(&p, &s.constants, regime, y).map_err(err)?;
                s = Solution::with_boundaries(&p, fb);
            }
            let opts = VerifyOptions {
                quick,
                grid,
                n_paths: paths,
                seed,
                ..VerifyOptions::default()
            };
            return finish_report(&run_verify(&s, &opts), &out);
        }
        Cmd::Props { model, grid, out } => {
            let s = solve(&model.params().map_err(err)?).map_err(err)?;
            return finish_report(&props_report(&s, grid), &out);
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
