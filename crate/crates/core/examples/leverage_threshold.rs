//! Zero-consumption strategy as a multiple of wealth, the volatility below
//! which it always borrows, and its sensitivity to hazard and volatility.
//!
//! ```text
//! cargo run --example leverage_threshold
//! ```

use bequest::analysis::{check_leveraging, zero_consumption_sensitivities};
use bequest::ModelParams;

fn main() -> bequest::Result<()> {
    for sigma in [0.1, 0.2, 0.4, 0.8] {
        let p = ModelParams::new(0.08, 0.04, sigma, 0.04, 0.0, 1.0)?;
        let lev = check_leveraging(&p)?;
        let (dl, ds) = zero_consumption_sensitivities(&p, 0.5)?;
        println!(
            "sigma = {sigma}: pi*/w = {:.4} ({:?}), d pi*/d lambda = {dl:.4}, d pi*/d sigma = {ds:.4}",
            lev.ratio, lev.status
        );
        if let Some(s) = lev.sigma_l {
            println!("  leveraged for every wealth level while sigma < {s:.8}");
        }
    }
    Ok(())
}
