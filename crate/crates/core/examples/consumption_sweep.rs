//! Sweeps the consumption rate across all three regimes and writes the
//! boundaries and values as CSV to stdout.
//!
//! ```text
//! cargo run --example consumption_sweep > sweep.csv
//! ```

use bequest::output::{SweepParam, SweepTable};
use bequest::ModelParams;

fn main() -> bequest::Result<()> {
    let base = ModelParams::new(0.08, 0.04, 0.2, 0.04, 0.0, 1.0)?;
    let table = SweepTable::build(&base, SweepParam::C, 0.0, 0.08, 17, 0.5)?;
    print!("{}", table.to_csv());
    Ok(())
}
