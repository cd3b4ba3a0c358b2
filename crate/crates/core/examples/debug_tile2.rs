//! Scratch diagnostic (not part of the API).

use punwrap_core::*;
use std::time::Instant;

fn geo(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let ratio = (hi / lo).powf(1.0 / (n - 1) as f64);
    (0..n).map(|i| lo * ratio.powi(i as i32)).collect()
}

fn main() {
    let spec = SynthSpec::new(40, 40, 1000);
    let inst = synthesize(&spec).unwrap();
    let parent = build_problem(&inst.wrapped, &WeightPolicy::default(), 5).unwrap();
    let tiling = make_tiling(40, 40, 10, 10).unwrap();
    let sub = restrict_problem(&parent, &tiling, 0).unwrap();
    let (qubo, _layout) = build_qubo(&sub).unwrap();

    for (temps, hi, sweeps) in [
        (16usize, 6.0f64, 1000usize),
        (32, 6.0, 1000),
        (32, 6.0, 3000),
        (48, 6.0, 3000),
        (32, 20.0, 3000),
        (48, 6.0, 10000),
    ] {
        let mut cfg = SolverConfig::new(1);
        cfg.num_sweeps = sweeps;
        cfg.beta_ladder = Some(geo(0.02, hi, temps));
        let t0 = Instant::now();
        let r = solve_pt(&qubo, &cfg).unwrap();
        let rates = &r.swap_acceptance_rates;
        let min_rate = rates.iter().cloned().fold(f64::INFINITY, f64::min);
        let mid = rates[rates.len() / 2];
        println!(
            "pt temps={temps:2} hi={hi:4} s={sweeps:5}: best {:9.4} [{:5.1}s] swap min {:.3} mid {:.3}",
            r.best_energy,
            t0.elapsed().as_secs_f64(),
            min_rate,
            mid
        );
    }

    for (sweeps, restarts) in [(20_000usize, 4usize), (50_000, 2)] {
        let mut cfg = SolverConfig::new(1);
        cfg.num_sweeps = sweeps;
        cfg.num_restarts = restarts;
        cfg.beta_ladder = Some(vec![0.02, 8.0]);
        let t0 = Instant::now();
        let r = solve_sa(&qubo, &cfg).unwrap();
        println!(
            "sa s={sweeps} x{restarts}: best {:9.4} [{:5.1}s]",
            r.best_energy,
            t0.elapsed().as_secs_f64()
        );
    }
}
