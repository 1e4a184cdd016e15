//! Simulates wealth under the optimal feedback strategy and compares the
//! fraction of goal-reaching paths with `phi(w0)`.
//!
//! ```text
//! cargo run --release --example monte_carlo -- 0.02 0.5 100000
//! ```

use bequest::mc::{self, SimConfig};
use bequest::{solve, ModelParams};

fn main() -> bequest::Result<()> {
    let args: Vec<f64> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let c = args.first().copied().unwrap_or(0.02);
    let w0 = args.get(1).copied().unwrap_or(0.5);
    let n = args.get(2).copied().unwrap_or(20_000.0) as usize;

    let params = ModelParams::new(0.08, 0.04, 0.2, 0.04, c, 1.0)?;
    let s = solve(&params)?;
    let cfg = SimConfig::new(&params, w0, n, 42);
    let res = mc::simulate_optimal(&s, &cfg)?;
    let phi = s.phi(w0)?;
    println!("{} regime, w0 = {w0}, {n} paths", s.regime());
    println!("phi(w0) = {phi:.5}, estimate = {:.5} +/- {:.5}, z = {:.2}", res.p_hat, res.std_err, res.z_score(phi));
    println!(
        "ruined {}, died below b {}, died at or above b {}, reached safe level {}",
        res.n_ruined, res.n_died_below_b, res.n_died_at_or_above_b, res.n_reached_safe
    );

    if c == 0.0 {
        let lap = mc::laplace_hitting_check(&params, &SimConfig::new(&params, w0, n / 4, 43))?;
        println!("E[exp(-lambda tau_b)] = {:.5} +/- {:.5} against {:.5}", lap.value, lap.std_err, lap.expected);
    }
    Ok(())
}
