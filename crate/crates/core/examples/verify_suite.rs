//! Runs the residual and property checks for a parameter set and prints
//! the report; pass `--mc` to include Monte Carlo.
//!
//! ```text
//! cargo run --release --example verify_suite -- --mc
//! ```

use bequest::verify::{run_verify, VerifyOptions};
use bequest::{solve, ModelParams};

fn main() -> bequest::Result<()> {
    let with_mc = std::env::args().any(|a| a == "--mc");
    let opts = VerifyOptions {
        quick: !with_mc,
        ..VerifyOptions::default()
    };
    for c in [0.0, 0.02, 0.04, 0.06] {
        let s = solve(&ModelParams::new(0.08, 0.04, 0.2, 0.04, c, 1.0)?)?;
        let report = run_verify(&s, &opts);
        println!("c = {c}\n{report}\n");
    }
    Ok(())
}
