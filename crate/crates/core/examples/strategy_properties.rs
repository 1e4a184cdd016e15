//! Shape of the optimal strategy: monotonicity cases, comparison with the
//! ruin-minimizing and goal-seeking benchmarks, and independence from `b`.
//!
//! ```text
//! cargo run --example strategy_properties
//! ```

use bequest::analysis::{
    brute_force_shape, check_b_independence, check_c_sensitivity, classify_monotonicity,
    compare_strategies, consumption_threshold,
};
use bequest::{solve, ModelParams};

fn main() -> bequest::Result<()> {
    let cases = [
        ("r <= lambda", ModelParams::new(0.08, 0.04, 0.2, 0.04, 0.02, 1.0)?),
        ("lambda < r < lambda + m", ModelParams::new(0.08, 0.04, 0.2, 0.03, 0.02, 1.0)?),
        ("r >= lambda + m, small c", ModelParams::new(0.08, 0.06, 0.2, 0.01, 0.02, 1.0)?),
        ("r >= lambda + m, large c", ModelParams::new(0.08, 0.06, 0.2, 0.01, 0.055, 1.0)?),
    ];
    for (label, p) in cases {
        let s = solve(&p)?;
        let rep = classify_monotonicity(&s)?;
        let brute = brute_force_shape(&s, 2000)?;
        println!("{label}: {:?} (finite differences: {brute:?})", rep.shape);
        if let Some(c_star) = consumption_threshold(&p)? {
            println!("  consumption threshold c* = {c_star:.10}");
        }
    }

    let p = ModelParams::new(0.08, 0.04, 0.2, 0.04, 0.02, 1.0)?;
    let grid: Vec<f64> = (0..=200).map(|i| i as f64 / 200.0).collect();
    let rep = compare_strategies(&solve(&p)?, &grid)?;
    for c in &rep.checks {
        println!("{:<30} min slack {:.4e} holds={}", c.name, c.min_slack, c.holds);
    }
    if let Some(w) = rep.goal_crossing {
        println!("pi* crosses the goal-seeking strategy at w = {w:.6}");
    }

    let g = check_b_independence(&p, 1.0, 3.0, &grid)?;
    println!("b = 1 vs b = 3: max |pi* difference| below w = 1 is {:.2e}", g.max_deviation);

    let d = check_c_sensitivity(&p, 1e-3)?;
    println!("d pi*(0.001) / dc = {:.4}", d.derivative);

    let high = solve(&p.with_c(0.06)?)?;
    println!("c > rb: pi* at b is {:?}", high.pi_star(1.0)?);
    Ok(())
}
