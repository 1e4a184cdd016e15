//! Optimal success probability and risky allocation in each of the three
//! consumption regimes.
//!
//! ```text
//! cargo run --example solve_regimes
//! ```

use bequest::{solve, ModelParams};

fn main() -> bequest::Result<()> {
    for c in [0.0, 0.02, 0.06] {
        let params = ModelParams::new(0.08, 0.04, 0.2, 0.04, c, 1.0)?;
        let s = solve(&params)?;
        println!("c = {c}: {} regime, safe level {}", s.regime(), s.w_safe());
        println!("{:>8} {:>10} {:>10}", "w", "phi", "pi*");
        for row in s.tabulate(7, 0.0, s.w_safe())? {
            println!("{:8.4} {:10.6} {:10.6}", row.w, row.phi, row.pi_star);
        }
        println!();
    }
    Ok(())
}
