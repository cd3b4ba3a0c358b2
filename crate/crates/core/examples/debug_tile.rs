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
    println!("tile qubo: {} vars, max |coef| {}", qubo.num_vars(), qubo.max_abs_coef());

    // Upper bound: truth restricted to the tile, shifted to min 0.
    let tile = tiling.tiles()[0];
    let mut truth_tile = Vec::new();
    for row in tile.y0..tile.y0 + tile.height {
        for col in tile.x0..tile.x0 + tile.width {
            truth_tile.push(inst.labels.get(row, col));
        }
    }
    let min = *truth_tile.iter().min().unwrap();
    let nice: Vec<i32> = truth_tile.iter().map(|k| k - min).collect();
    let nice_grid = LabelGrid::new(10, 10, nice, 5).unwrap();
    let ub = energy_l2(&sub, &nice_grid).unwrap().total;
    println!("upper bound (truth representative): {ub}");

    for (label, ladder, sweeps, solver, restarts) in [
        ("pt   default       s=1000", None, 1000usize, SolverKind::Pt, 1usize),
        ("pt   [0.02,4]x16   s=1000", Some(geo(0.02, 4.0, 16)), 1000, SolverKind::Pt, 1),
        ("pt   [0.02,8]x20   s=3000", Some(geo(0.02, 8.0, 20)), 3000, SolverKind::Pt, 1),
        ("pticm[0.02,8]x20   s=3000", Some(geo(0.02, 8.0, 20)), 3000, SolverKind::Pticm, 1),
        ("sa   [0.02,8]      s=500x16", Some(geo(0.02, 8.0, 16)), 500, SolverKind::Sa, 16),
        ("sa   [0.02,8]      s=2000x8", Some(geo(0.02, 8.0, 16)), 2000, SolverKind::Sa, 8),
    ] {
        let mut cfg = SolverConfig::new(1);
        cfg.num_sweeps = sweeps;
        cfg.beta_ladder = ladder;
        cfg.num_restarts = restarts;
        let t0 = Instant::now();
        let r = solver.solve(&qubo, &cfg).unwrap();
        println!(
            "{label}: best {:9.4}  [{:6.2} s]",
            r.best_energy,
            t0.elapsed().as_secs_f64()
        );
    }
}
