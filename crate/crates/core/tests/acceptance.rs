//! Acceptance criteria 1 to 7. Runs sequentially (so wall-clock budgets
//! are meaningful) and prints one PASS/FAIL line per criterion.
//!
//! Oracles are computed here, independently of the library, wherever a
//! value can be derived by hand: polynomial roots by plain bisection,
//! closed-form derivatives for `c = 0`, the HJB maximizer from first-order
//! conditions, and the Legendre minimum by direct grid search.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use bequest::analysis::{self, check_b_independence, check_c_sensitivity, check_leveraging};
use bequest::mc::{self, SimConfig};
use bequest::{derive_constants, solve, solve_in_regime, Allocation, ModelParams, Regime, Solution};

type Outcome = Result<String, String>;

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let neg_lo = f(lo) < 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if (f(mid) < 0.0) == neg_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect()
}

fn standard(c: f64) -> ModelParams {
    ModelParams::new(0.08, 0.04, 0.2, 0.04, c, 1.0).unwrap()
}

/// Random market and hazard; `c` is set by the caller relative to `r b`.
fn draw_market(rng: &mut StdRng) -> (f64, f64, f64, f64, f64) {
    let r = rng.random_range(0.01..0.07);
    let mu = r + rng.random_range(0.01..0.10);
    let sigma = rng.random_range(0.1..0.45);
    let lambda = rng.random_range(0.005..0.12);
    let b = rng.random_range(0.5..3.0);
    (mu, r, sigma, lambda, b)
}

fn draw(rng: &mut StdRng, regime: Regime) -> ModelParams {
    let (mu, r, sigma, lambda, b) = draw_market(rng);
    let c = match regime {
        Regime::ZeroConsumption => 0.0,
        Regime::LowConsumption => r * b * rng.random_range(0.02..1.0),
        Regime::HighConsumption => r * b * rng.random_range(1.02..4.0),
    };
    ModelParams::new(mu, r, sigma, lambda, c, b).unwrap()
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn close(name: &str, got: f64, want: f64, tol: f64) -> Result<(), String> {
    ensure((got - want).abs() <= tol, || {
        format!("{name} = {got:.17e}, expected {want:.17e} (tol {tol:e})")
    })
}

fn criterion_1() -> Outcome {
    let p = standard(0.0);
    let k = derive_constants(&p);
    let (mu, r, sigma, lambda) = (p.mu, p.r, p.sigma, p.lambda);
    let m_oracle = 0.5 * ((mu - r) / sigma).powi(2);
    // Oracle roots of the two quadratics by bisection on their brackets.
    let q_poly = |q: f64| r * q * q - (r + lambda + m_oracle) * q + lambda;
    let a_poly = |a: f64| m_oracle * a * a - (r - lambda + m_oracle) * a - lambda;
    let q_oracle = bisect(q_poly, 0.0, 1.0);
    let a1_oracle = bisect(a_poly, 1.0, 100.0);
    let a2_oracle = bisect(a_poly, -100.0, 0.0);
    let tol = 1e-12;
    close("m", k.m, 0.02, tol)?;
    close("m oracle", m_oracle, 0.02, tol)?;
    close("q", k.q, 0.5, tol)?;
    close("q oracle", k.q, q_oracle, tol)?;
    close("alpha1", k.alpha1, 2.0, tol)?;
    close("alpha1 oracle", k.alpha1, a1_oracle, tol)?;
    close("alpha2", k.alpha2, -1.0, tol)?;
    close("alpha2 oracle", k.alpha2, a2_oracle, tol)?;
    close("p", k.p, 2.0, tol)?;
    close("q residual", q_poly(k.q), 0.0, tol)?;
    close("alpha1 residual", a_poly(k.alpha1), 0.0, tol)?;
    close("alpha2 residual", a_poly(k.alpha2), 0.0, tol)?;
    let s = solve(&p).map_err(|e| e.to_string())?;
    close("phi(0.25)", s.phi(0.25).unwrap(), 0.5, tol)?;
    close("pi*(0.25)", s.allocation(0.25).unwrap(), 0.5, tol)?;
    Ok(format!("q = {:.17}, alpha = ({}, {})", k.q, k.alpha1, k.alpha2))
}

fn criterion_2() -> Outcome {
    let s = solve(&standard(0.02)).map_err(|e| e.to_string())?;
    let fb = *s.boundaries().ok_or("no boundaries")?;
    let oracle = bisect(|z| 4.0 * z * z * z + 3.0 * z * z - 1.0, 0.0, 1.0);
    close("z_b0", fb.z_b0, oracle, 1e-10)?;
    // With alpha = (2, -1) and c/r = 1/2: 1/z_b = (1/3)(y^-2 - y), z_0 = z_b / y.
    let zb_oracle = 3.0 / (oracle.powi(-2) - oracle);
    let z0_oracle = zb_oracle / oracle;
    close("z_b", fb.z_b, zb_oracle, 1e-10)?;
    close("z_0", fb.z_0, z0_oracle, 1e-10)?;
    close("z_b (4 digits)", fb.z_b, 0.6871, 1e-4)?;
    close("z_0 (4 digits)", fb.z_0, 1.5088, 1e-4)?;
    ensure(fb.z_b < 1.0 && 1.0 < fb.z_0, || format!("ordering z_b < 1/b < z_0 fails: {fb:?}"))?;

    let mut rng = StdRng::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    for regime in [Regime::LowConsumption, Regime::HighConsumption] {
        for _ in 0..50 {
            let p = draw(&mut rng, regime);
            let s = solve(&p).map_err(|e| format!("{p:?}: {e}"))?;
            ensure(s.regime() == regime, || format!("{p:?} solved as {}", s.regime()))?;
            let res = s.dual().unwrap().pasting_residuals().max_abs();
            ensure(res < 1e-10, || format!("pasting residual {res:e} at {p:?}"))?;
            worst = worst.max(res);
        }
    }
    Ok(format!(
        "z_b0 = {:.12} (oracle {oracle:.12}); max pasting residual over 100 draws {worst:.2e}",
        fb.z_b0
    ))
}

/// HJB residual with derivatives supplied independently of the library in
/// the zero-consumption case, and the maximizing allocation from the
/// first-order condition in every case.
fn hjb_oracle(s: &Solution, w: f64) -> Result<f64, String> {
    let p = &s.params;
    let phi = s.phi(w).map_err(|e| e.to_string())?;
    let (d1, d2) = if p.c == 0.0 {
        let q = s.constants.q;
        (q * phi / w, q * (q - 1.0) * phi / (w * w))
    } else {
        let (d1, d2) = s.phi_derivatives(w).map_err(|e| e.to_string())?;
        // Central differences of phi confirm the supplied derivatives.
        let h = 1e-4 * w.min(s.w_safe() - w).min((w - p.b).abs().max(1e-3));
        let fd1 = (s.phi(w + h).unwrap() - s.phi(w - h).unwrap()) / (2.0 * h);
        ensure((fd1 - d1).abs() <= 1e-6 * d1.abs().max(1.0), || {
            format!("phi_w {d1} vs finite difference {fd1} at w = {w}, {p:?}")
        })?;
        (d1, d2)
    };
    ensure(d2 < 0.0, || format!("phi not strictly concave at w = {w}: {d2}"))?;
    let pi_hat = -(p.mu - p.r) * d1 / (p.sigma * p.sigma * d2);
    let pi = s.allocation(w).map_err(|e| e.to_string())?;
    ensure((pi - pi_hat).abs() <= 1e-8 * pi_hat.abs().max(1.0), || {
        format!("pi* = {pi} is not the maximizer {pi_hat} at w = {w}, {p:?}")
    })?;
    let ind = if w >= p.b { 1.0 } else { 0.0 };
    Ok((p.r * w + (p.mu - p.r) * pi_hat - p.c) * d1 + 0.5 * p.sigma * p.sigma * pi_hat * pi_hat * d2
        - p.lambda * (phi - ind))
}

fn criterion_3() -> Outcome {
    let mut rng = StdRng::seed_from_u64(3);
    let mut summary = Vec::new();
    for regime in [Regime::ZeroConsumption, Regime::LowConsumption, Regime::HighConsumption] {
        let tol = if regime == Regime::ZeroConsumption { 1e-10 } else { 1e-6 };
        let mut worst: f64 = 0.0;
        for _ in 0..50 {
            let p = draw(&mut rng, regime);
            let s = solve(&p).map_err(|e| format!("{p:?}: {e}"))?;
            let ws = s.w_safe();
            for i in 1..=1000 {
                let w = ws * i as f64 / 1001.0;
                if regime == Regime::HighConsumption && (w - p.b).abs() < 1e-12 * p.b {
                    continue;
                }
                let res = hjb_oracle(&s, w)?.abs();
                ensure(res < tol, || format!("HJB residual {res:e} at w = {w}, {p:?}"))?;
                worst = worst.max(res);
            }
        }
        summary.push(format!("{regime}: {worst:.2e}"));
    }
    Ok(format!("max |residual| {}", summary.join(", ")))
}

/// `min_z φ̂(z) + w z` by a dense scan followed by golden-section search.
fn legendre_oracle(s: &Solution, w: f64) -> f64 {
    let dual = s.dual().unwrap();
    let z_hi = 2.0 * dual.boundaries.z_0;
    let f = |z: f64| dual.eval(z).unwrap().value + w * z;
    let n = 20_000;
    let (mut best_i, mut best) = (0, f(0.0));
    for i in 1..=n {
        let v = f(z_hi * i as f64 / n as f64);
        if v < best {
            best = v;
            best_i = i;
        }
    }
    let h = z_hi / n as f64;
    let (mut a, mut b) = (((best_i as f64) - 1.0).max(0.0) * h, (best_i as f64 + 1.0) * h);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..200 {
        let x1 = b - g * (b - a);
        let x2 = a + g * (b - a);
        if f(x1) < f(x2) {
            b = x2;
        } else {
            a = x1;
        }
    }
    best.min(f(0.5 * (a + b)))
}

fn criterion_4() -> Outcome {
    let mut cases = vec![standard(0.02), standard(0.04), standard(0.06)];
    let mut rng = StdRng::seed_from_u64(4);
    for regime in [Regime::LowConsumption, Regime::HighConsumption] {
        for _ in 0..5 {
            cases.push(draw(&mut rng, regime));
        }
    }
    let mut worst: f64 = 0.0;
    for p in &cases {
        let s = solve(p).map_err(|e| e.to_string())?;
        for w in grid(0.0, p.b, 100) {
            let d = (legendre_oracle(&s, w) - s.phi(w).unwrap()).abs();
            ensure(d < 1e-8, || format!("Legendre gap {d:e} at w = {w}, {p:?}"))?;
            worst = worst.max(d);
        }
    }
    Ok(format!("{} parameter sets, max gap {worst:.2e}", cases.len()))
}

struct Cell {
    params: ModelParams,
    w0: f64,
}

fn mc_cells() -> Vec<Cell> {
    let a = |c| standard(c);
    let b = |c| ModelParams::new(0.10, 0.05, 0.3, 0.08, c, 1.0).unwrap();
    let mut cells = Vec::new();
    let mut add = |params: ModelParams, levels: &[f64]| {
        for &w0 in levels {
            cells.push(Cell { params, w0 });
        }
    };
    add(a(0.0), &[0.1, 0.25, 0.5, 0.8]);
    add(a(0.02), &[0.1, 0.3, 0.5, 0.7, 0.9]);
    add(a(0.04), &[0.5]);
    add(a(0.06), &[0.25, 0.6, 0.95, 1.2, 1.45]);
    add(b(0.0), &[0.3, 0.7]);
    add(b(0.03), &[0.4]);
    add(b(0.07), &[0.5, 1.2]);
    cells
}

fn criterion_5() -> Outcome {
    let cells = mc_cells();
    ensure(cells.len() == 20, || format!("{} cells", cells.len()))?;
    let mut agree = 0;
    let mut zero_c_ruined = 0;
    for (i, cell) in cells.iter().enumerate() {
        let s = solve(&cell.params).map_err(|e| e.to_string())?;
        let cfg = SimConfig::new(&cell.params, cell.w0, 100_000, 5000 + i as u64);
        ensure(cfg.dt == 1e-3, || "dt must be 1/1000".into())?;
        let t = Instant::now();
        let res = mc::simulate_optimal(&s, &cfg).map_err(|e| e.to_string())?;
        let phi = s.phi(cell.w0).unwrap();
        let z = res.z_score(phi);
        let ok = z.abs() < 3.0;
        agree += ok as usize;
        if cell.params.c == 0.0 {
            zero_c_ruined += res.n_ruined;
        }
        println!(
            "    cell {i:2} {:<16} c={:<5} w0={:<5} phi={phi:.5} p_hat={:.5} se={:.5} z={z:+.2} ruined={} capped={} {} ({:.1}s)",
            s.regime().name(),
            cell.params.c,
            cell.w0,
            res.p_hat,
            res.std_err,
            res.n_ruined,
            res.n_capped,
            if ok { "ok" } else { "outside 3 SE" },
            t.elapsed().as_secs_f64()
        );
    }
    ensure(agree >= 19, || format!("only {agree}/20 cells within 3 SE"))?;
    ensure(zero_c_ruined == 0, || format!("{zero_c_ruined} ruined paths with c = 0"))?;

    let p = standard(0.0);
    let mut cfg = SimConfig::new(&p, 0.5, 100_000, 77);
    cfg.horizon_cap = 10.0 / p.lambda;
    let lap = mc::laplace_hitting_check(&p, &cfg).map_err(|e| e.to_string())?;
    println!(
        "    laplace E[exp(-lambda tau_b)] = {:.5} se={:.5} phi={:.5} z={:.2}",
        lap.value,
        lap.std_err,
        lap.expected,
        lap.z_score()
    );
    ensure(lap.within(3.0), || format!("Laplace identity off by {:.2} SE", lap.z_score()))?;
    Ok(format!("{agree}/20 cells within 3 SE, zero ruined paths for c = 0, Laplace z = {:.2}", lap.z_score()))
}

/// Sign pattern of forward differences of `π*` on `[0, b]`:
/// `(first rising step, all later steps rising)`.
fn fd_shape(s: &Solution, n: usize) -> (String, Option<f64>) {
    let b = s.params.b;
    let pis: Vec<f64> = grid(0.0, b, n).iter().map(|&w| s.allocation(w).unwrap()).collect();
    let signs: Vec<bool> = pis.windows(2).map(|d| d[1] > d[0]).collect();
    let switches = signs.windows(2).filter(|s| s[0] != s[1]).count();
    match (signs.first(), switches) {
        (Some(true), 0) => ("IncreasingEverywhere".into(), None),
        (Some(false), 0) => ("DecreasingEverywhere".into(), None),
        (Some(false), 1) => {
            let i = signs.iter().position(|&up| up).unwrap();
            ("DecreasingThenIncreasing".into(), Some(b * i as f64 / n as f64))
        }
        _ => ("Irregular".into(), None),
    }
}

fn criterion_6() -> Outcome {
    let w200 = |b: f64| grid(0.0, b, 199);
    let mut lines = Vec::new();

    // Goal independence.
    for (p, b2) in [(standard(0.0), 2.0), (standard(0.02), 1.5), (standard(0.06), 2.0)] {
        let g = check_b_independence(&p, p.b, b2, &w200(p.b)).map_err(|e| e.to_string())?;
        ensure(g.points >= 199 && g.max_deviation < 1e-9, || {
            format!("b-independence c={}: {g:?}", p.c)
        })?;
    }
    lines.push("b-independence ok".to_string());

    // Monotonicity: four cases against brute-force differences.
    let base = ModelParams::new(0.08, 0.06, 0.2, 0.01, 0.02, 1.0).unwrap();
    let c_star = analysis::consumption_threshold(&base)
        .map_err(|e| e.to_string())?
        .ok_or("no c*")?;
    let cases = [
        ("i", standard(0.02), "IncreasingEverywhere"),
        (
            "ii",
            ModelParams::new(0.08, 0.04, 0.2, 0.03, 0.02, 1.0).unwrap(),
            "DecreasingThenIncreasing",
        ),
        ("iii", base.with_c(0.99 * c_star).unwrap(), "DecreasingThenIncreasing"),
        ("iv", base.with_c(1.01 * c_star).unwrap(), "DecreasingEverywhere"),
    ];
    let n = 4000;
    for (label, p, expected) in cases {
        let s = solve(&p).map_err(|e| e.to_string())?;
        let rep = analysis::classify_monotonicity(&s).map_err(|e| e.to_string())?;
        let (brute, w_fd) = fd_shape(&s, n);
        let name = match rep.shape {
            analysis::MonotonicityShape::IncreasingEverywhere => "IncreasingEverywhere",
            analysis::MonotonicityShape::DecreasingThenIncreasing { .. } => "DecreasingThenIncreasing",
            analysis::MonotonicityShape::DecreasingEverywhere => "DecreasingEverywhere",
        };
        ensure(name == expected && brute == expected, || {
            format!("case {label}: classified {name}, brute force {brute}, expected {expected}")
        })?;
        if let (Some(ws), Some(wf)) = (rep.w_star, w_fd) {
            ensure((ws - wf).abs() <= 2.0 * p.b / n as f64, || {
                format!("case {label}: w* = {ws} vs brute force {wf}")
            })?;
        }
    }
    lines.push(format!("monotonicity cases i-iv agree (c* = {c_star:.8})"));

    // Inequalities, evaluated from the benchmark formulas directly.
    let mut rng = StdRng::seed_from_u64(6);
    let mut min_ruin = f64::INFINITY;
    let mut min_shift = f64::INFINITY;
    let mut min_kink = f64::INFINITY;
    for regime in [Regime::LowConsumption, Regime::HighConsumption] {
        for j in 0..51 {
            let p = if j == 0 {
                standard(if regime == Regime::LowConsumption { 0.02 } else { 0.06 })
            } else {
                draw(&mut rng, regime)
            };
            let s = solve(&p).map_err(|e| e.to_string())?;
            let k = s.constants;
            let kk = p.merton_ratio();
            let cr = p.c / p.r;
            let scale = s.allocation(0.0).unwrap().abs().max(1.0);
            for w in w200(p.b.min(cr)).into_iter().filter(|&w| w > 0.0 && w < cr.min(p.b)) {
                let slack = s.allocation(w).unwrap() - kk * (cr - w) / (k.p - 1.0);
                ensure(slack > 1e-12 * scale, || format!("ruin-minimizing slack {slack:e} at w={w}, {p:?}"))?;
                min_ruin = min_ruin.min(slack);
            }
            if regime == Regime::LowConsumption && cr < p.b {
                for w in grid(cr, p.b, 199).into_iter().filter(|&w| w > cr && w < p.b) {
                    let slack = s.allocation(w).unwrap() - kk * (w - cr) / (1.0 - k.q);
                    ensure(slack > 1e-12 * scale, || format!("shifted-goal slack {slack:e} at w={w}, {p:?}"))?;
                    min_shift = min_shift.min(slack);
                }
            }
            if regime == Regime::HighConsumption {
                match s.pi_star(p.b).unwrap() {
                    Allocation::Kink { left, right } => {
                        ensure(left > right, || format!("pi*(b-) = {left} <= pi*(b+) = {right}"))?;
                        min_kink = min_kink.min(left - right);
                    }
                    Allocation::Smooth(_) => return Err(format!("no kink at b for {p:?}")),
                }
            }
        }
    }
    lines.push(format!(
        "min slack: ruin-minimizing {min_ruin:.2e}, shifted-goal {min_shift:.2e}, kink {min_kink:.2e}"
    ));

    // Goal-seeking comparison: both branches appear as b varies.
    let p = standard(0.02);
    let mut seen = (false, false);
    for b in [0.5, 0.6, 0.8, 1.0, 2.0, 5.0, 20.0] {
        let pb = p.with_b(b).unwrap();
        let s = solve(&pb).map_err(|e| e.to_string())?;
        let k = s.constants;
        let zb0 = s.boundaries().unwrap().z_b0;
        let indicator = k.alpha1 * zb0.powf(k.alpha1 - 1.0) - 1.0;
        let gap = |w: f64| s.allocation(w).unwrap() - pb.merton_ratio() * w / (1.0 - k.q);
        let ws = w200(b);
        if indicator > 0.0 {
            seen.0 = true;
            for &w in &ws {
                ensure(gap(w) > 0.0, || format!("b={b}: pi* <= goal-seeking at w={w}"))?;
            }
        } else {
            seen.1 = true;
            let cross = bisect(gap, 0.0, b);
            for &w in ws.iter().filter(|&&w| (w - cross).abs() > 1e-9 * b) {
                let ok = if w < cross { gap(w) > 0.0 } else { gap(w) < 0.0 };
                ensure(ok, || format!("b={b}: wrong side of goal-seeking at w={w} (crossing {cross})"))?;
            }
        }
    }
    ensure(seen.0 && seen.1, || format!("goal-seeking branches seen: {seen:?}"))?;
    lines.push("goal-seeking: both branches exhibited".into());

    // Consumption sensitivity near zero wealth.
    let sens = check_c_sensitivity(&standard(0.02), 0.01).map_err(|e| e.to_string())?;
    ensure(sens.positive, || format!("d pi*/dc = {}", sens.derivative))?;
    let up = solve(&standard(0.021)).unwrap().allocation(0.01).unwrap();
    let down = solve(&standard(0.019)).unwrap().allocation(0.01).unwrap();
    ensure(up > down, || format!("pi*(0.01) at c = 0.021 ({up}) <= at c = 0.019 ({down})"))?;
    lines.push(format!("d pi*(0.01)/dc = {:.4}", sens.derivative));

    // Leveraging and hazard/volatility monotonicity for c = 0.
    let lev = check_leveraging(&standard(0.0)).map_err(|e| e.to_string())?;
    ensure(lev.status == analysis::Leverage::AlwaysLeveraged && (lev.ratio - 2.0).abs() < 1e-12, || {
        format!("{lev:?}")
    })?;
    let hazard = check_leveraging(&ModelParams::new(0.08, 0.04, 3.0, 0.06, 0.0, 1.0).unwrap())
        .map_err(|e| e.to_string())?;
    ensure(hazard.status == analysis::Leverage::AlwaysLeveraged, || format!("{hazard:?}"))?;
    let volatile = check_leveraging(&ModelParams::new(0.08, 0.04, 50.0, 0.04, 0.0, 1.0).unwrap())
        .map_err(|e| e.to_string())?;
    ensure(volatile.status == analysis::Leverage::NotAlwaysLeveraged, || format!("{volatile:?}"))?;
    let sigma_l = lev.sigma_l.ok_or("no sigma_l")?;
    let ratio_at = |sigma: f64| analysis::leverage_ratio(&standard(0.0).with_sigma(sigma).unwrap());
    ensure(ratio_at(0.999 * sigma_l) > 1.0 && ratio_at(1.001 * sigma_l) < 1.0, || {
        format!("sigma_l = {sigma_l} does not separate leveraging")
    })?;
    let pi_at = |lambda: f64, sigma: f64| {
        solve(&ModelParams::new(0.08, 0.04, sigma, lambda, 0.0, 1.0).unwrap())
            .unwrap()
            .allocation(0.5)
            .unwrap()
    };
    for w in [0.02, 0.04, 0.08] {
        ensure(pi_at(w * 1.1, 0.2) > pi_at(w, 0.2), || format!("pi* not increasing in lambda at {w}"))?;
    }
    for s in [0.1, 0.2, 0.4] {
        ensure(pi_at(0.04, s * 1.1) < pi_at(0.04, s), || format!("pi* not decreasing in sigma at {s}"))?;
    }
    lines.push(format!("leveraging: ratio {:.3}, sigma_l = {sigma_l:.8}", lev.ratio));
    Ok(lines.join("; "))
}

fn criterion_7() -> Outcome {
    // c = r b: both formula families apply.
    let mut worst_tie: f64 = 0.0;
    for p in [
        standard(0.04),
        ModelParams::new(0.10, 0.05, 0.3, 0.08, 0.05, 1.0).unwrap(),
        ModelParams::new(0.12, 0.03, 0.25, 0.02, 0.06, 2.0).unwrap(),
    ] {
        let low = solve_in_regime(&p, Regime::LowConsumption).map_err(|e| e.to_string())?;
        let high = solve_in_regime(&p, Regime::HighConsumption).map_err(|e| e.to_string())?;
        let (fl, fh) = (low.boundaries().unwrap(), high.boundaries().unwrap());
        for (name, a, b) in [("z_b0", fl.z_b0, fh.z_b0), ("z_b", fl.z_b, fh.z_b), ("z_0", fl.z_0, fh.z_0)] {
            close(name, a, b, 1e-9)?;
            worst_tie = worst_tie.max((a - b).abs());
        }
        for w in grid(0.0, p.b, 200) {
            let dphi = (low.phi(w).unwrap() - high.phi(w).unwrap()).abs();
            let dpi = (low.allocation(w).unwrap() - high.allocation(w).unwrap()).abs();
            ensure(dphi < 1e-9 && dpi < 1e-9, || format!("c = rb disagreement at w={w}: {dphi:e}, {dpi:e}"))?;
            worst_tie = worst_tie.max(dphi).max(dpi);
        }
    }

    // c -> 0 against the zero-consumption closed form.
    let zero = standard(0.0);
    let k = derive_constants(&zero);
    let small = solve(&standard(1e-6)).map_err(|e| e.to_string())?;
    ensure(small.regime() == Regime::LowConsumption, || "c = 1e-6 not solved by the dual".into())?;
    let mut worst_c: f64 = 0.0;
    for w in grid(0.0, 1.0, 200) {
        let phi0 = w.powf(k.q);
        let pi0 = zero.merton_ratio() * w / (1.0 - k.q);
        worst_c = worst_c
            .max((small.phi(w).unwrap() - phi0).abs())
            .max((small.allocation(w).unwrap() - pi0).abs());
    }
    ensure(worst_c < 1e-3, || format!("c -> 0 distance {worst_c:e}"))?;

    // b -> 0 against the ruin-minimizing solution.
    let pb = ModelParams::new(0.08, 0.04, 0.2, 0.04, 0.06, 1e-6).unwrap();
    let kb = derive_constants(&pb);
    let s = solve(&pb).map_err(|e| e.to_string())?;
    let cr = pb.c / pb.r;
    let mut worst_b: f64 = 0.0;
    // Pointwise on (0, c/r): below b the strategy does not depend on b at all.
    for w in grid(0.0, cr, 200).into_iter().filter(|&w| w > 0.0) {
        let phi_lim = 1.0 - (1.0 - pb.r * w / pb.c).powf(kb.p);
        let pi_lim = pb.merton_ratio() * (cr - w) / (kb.p - 1.0);
        let pi = match s.pi_star(w).unwrap() {
            Allocation::Smooth(v) => v,
            Allocation::Kink { right, .. } => right,
        };
        worst_b = worst_b.max((s.phi(w).unwrap() - phi_lim).abs()).max((pi - pi_lim).abs());
    }
    ensure(worst_b < 1e-3, || format!("b -> 0 distance {worst_b:e}"))?;
    Ok(format!(
        "c = rb gap {worst_tie:.2e}; c = 1e-6 distance {worst_c:.2e}; b = 1e-6 distance {worst_b:.2e}"
    ))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome, Duration); 7] = [
        ("closed-form benchmark", criterion_1, Duration::from_secs(1)),
        ("free-boundary oracle", criterion_2, Duration::from_secs(5)),
        ("HJB residual", criterion_3, Duration::from_secs(30)),
        ("Legendre roundtrip", criterion_4, Duration::from_secs(10)),
        ("Monte Carlo agreement", criterion_5, Duration::from_secs(600)),
        ("property suite", criterion_6, Duration::from_secs(60)),
        ("continuity and limits", criterion_7, Duration::from_secs(10)),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, run, budget)) in criteria.iter().enumerate() {
        let id = (i + 1).to_string();
        if !filter.is_empty() && !filter.iter().any(|f| *f == id || name.contains(f.as_str())) {
            continue;
        }
        let t = Instant::now();
        let outcome = run();
        let elapsed = t.elapsed();
        let within = elapsed <= *budget;
        let (status, detail) = match (&outcome, within) {
            (Ok(d), true) => ("PASS", d.clone()),
            (Ok(d), false) => ("FAIL", format!("{d}; over runtime budget")),
            (Err(e), _) => ("FAIL", e.clone()),
        };
        if status == "FAIL" {
            failed += 1;
        }
        println!(
            "criterion {id} [{status}] {name} ({:.2}s, budget {}s): {detail}",
            elapsed.as_secs_f64(),
            budget.as_secs()
        );
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
