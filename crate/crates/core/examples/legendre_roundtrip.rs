//! Recovers `phi` from the dual function by minimizing `phi_hat(z) + w z`
//! and compares with the closed form.
//!
//! ```text
//! cargo run --example legendre_roundtrip
//! ```

use bequest::{solve, ModelParams};

fn main() -> bequest::Result<()> {
    for c in [0.02, 0.06] {
        let s = solve(&ModelParams::new(0.08, 0.04, 0.2, 0.04, c, 1.0)?)?;
        let mut worst: f64 = 0.0;
        for i in 0..=50 {
            let w = i as f64 / 50.0;
            worst = worst.max((s.phi_by_legendre(w, 4000)? - s.phi(w)?).abs());
        }
        println!("c = {c}: max |legendre - closed form| on [0, b] = {worst:.3e}");
    }
    Ok(())
}
