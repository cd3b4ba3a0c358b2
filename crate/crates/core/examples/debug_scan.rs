//! Scratch diagnostic (not part of the API).

use punwrap_core::*;
use std::time::Instant;

fn geo(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let ratio = (hi / lo).powf(1.0 / (n - 1) as f64);
    (0..n).map(|i| lo * ratio.powi(i as i32)).collect()
}

fn main() {
    // Gather tile problems + reference bounds from several images.
    let mut tiles = Vec::new();
    for seed in [1000u64, 1001, 1002] {
        let spec = SynthSpec::new(40, 40, seed);
        let inst = synthesize(&spec).unwrap();
        let parent = build_problem(&inst.wrapped, &WeightPolicy::default(), 5).unwrap();
        let tiling = make_tiling(40, 40, 10, 10).unwrap();
        for (i, tile) in tiling.tiles().iter().enumerate() {
            let sub = restrict_problem(&parent, &tiling, i).unwrap();
            let (qubo, _) = build_qubo(&sub).unwrap();
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
            tiles.push((qubo, ub));
        }
    }
    println!("{} tiles", tiles.len());

    for (temps, lo, hi, sweeps, reps) in [
        (16usize, 0.05f64, 2.0f64, 800usize, 1usize),
        (16, 0.05, 2.0, 800, 2),
        (20, 0.05, 2.0, 600, 1),
        (20, 0.05, 2.0, 800, 1),
        (16, 0.04, 1.5, 800, 1),
        (24, 0.05, 2.5, 800, 1),
        (20, 0.05, 2.0, 1200, 1),
    ] {
        let t0 = Instant::now();
        let mut hits = 0;
        let mut excess = 0.0f64;
        for (idx, (qubo, ub)) in tiles.iter().enumerate() {
            let mut cfg = SolverConfig::new(900 + idx as u64);
            cfg.num_sweeps = sweeps;
            cfg.beta_ladder = Some(geo(lo, hi, temps));
            cfg.replicas_per_temperature = reps;
            let r = solve_pt(qubo, &cfg).unwrap();
            if r.best_energy <= ub + 1e-9 {
                hits += 1;
            } else {
                excess += r.best_energy - ub;
            }
        }
        println!(
            "pt temps={temps:2} [{lo},{hi}] s={sweeps:5} r={reps}: {hits}/{} at-bound, excess {excess:8.3} [{:6.2} s total, {:0.3} s/tile]",
            tiles.len(),
            t0.elapsed().as_secs_f64(),
            t0.elapsed().as_secs_f64() / tiles.len() as f64
        );
    }
}
