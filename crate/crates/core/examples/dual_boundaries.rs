//! Free boundaries of the dual problem and the residuals that certify them.
//!
//! ```text
//! cargo run --example dual_boundaries -- 0.02
//! ```

use bequest::{derive_constants, mc, DualFunction, ModelParams};

fn main() -> bequest::Result<()> {
    let c: f64 = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(0.02);
    let params = ModelParams::new(0.08, 0.04, 0.2, 0.04, c, 1.0)?;
    let k = derive_constants(&params);
    println!("m = {}, q = {}, alpha1 = {}, alpha2 = {}", k.m, k.q, k.alpha1, k.alpha2);

    let dual = DualFunction::solve(&params)?;
    let fb = dual.boundaries;
    println!("{} regime: z_b0 = {:.10}, z_b = {:.10}, z_0 = {:.10}", fb.regime, fb.z_b0, fb.z_b, fb.z_0);

    let pasting = dual.pasting_residuals();
    println!("smooth pasting residual: {:.3e}", pasting.max_abs());

    let mut worst: f64 = 0.0;
    for i in 0..=100 {
        let z = fb.z_b + (fb.z_0 - fb.z_b) * i as f64 / 100.0;
        worst = worst.max(dual.ode_residual(z)?.abs());
    }
    println!("dual ODE residual on [z_b, z_0]: {worst:.3e}");

    let s = bequest::solve(&params)?;
    let hjb = mc::hjb_residual(&s, &mc::interior_grid(&s, 1000))?;
    println!("primal HJB residual on 1000 points: {hjb:.3e}");
    Ok(())
}
