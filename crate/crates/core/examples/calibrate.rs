//! Scratch calibration harness for solver defaults (not part of the API).

use punwrap_core::*;
use rand::{Rng, SeedableRng};
use std::time::Instant;

fn run(label: &str, sweeps: usize, reps: usize, snr: Option<f64>, images: usize) {
    let mut matches = Vec::new();
    let t0 = Instant::now();
    for img in 0..images {
        let mut spec = SynthSpec::new(100, 100, 2000 + img as u64);
        spec.snr_db = snr;
        let inst = synthesize(&spec).unwrap();
        let mut cfg = SolverConfig::new(500 + img as u64);
        cfg.num_sweeps = sweeps;
        cfg.replicas_per_temperature = reps;
        let report =
            unwrap_superpixel(&inst.wrapped, &WeightPolicy::default(), 5, 10, 10, SolverKind::Pt, &cfg)
                .unwrap();
        let m = match_labels(&report.labels, &inst.labels).unwrap();
        matches.push(m.raw_match_pct);
    }
    let (mean, std) = summarize(&matches).unwrap();
    println!(
        "{label:<46} raw {mean:7.3}% (std {std:6.3})  min {:7.3}  [{:5.1} s/img]",
        matches.iter().cloned().fold(f64::INFINITY, f64::min),
        t0.elapsed().as_secs_f64() / images as f64
    );
}

fn ground_state_recovery() {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(123);
    let mut sa_hits = 0;
    let mut pt_hits = 0;
    let mut pticm_hits = 0;
    for trial in 0..100u64 {
        let mut q = QuboProblem::new(6);
        for i in 0..6 {
            q.add_linear(i, rng.gen_range(-2.0..2.0));
            for j in i + 1..6 {
                q.add_quadratic(i, j, rng.gen_range(-2.0..2.0));
            }
        }
        q.prune_zeros();
        let exact = solve_exhaustive(&q).unwrap().best_energy;
        let mut sa_cfg = SolverConfig::new(trial);
        sa_cfg.num_sweeps = 200;
        sa_cfg.num_restarts = 5;
        if (solve_sa(&q, &sa_cfg).unwrap().best_energy - exact).abs() < 1e-9 {
            sa_hits += 1;
        }
        let mut pt_cfg = SolverConfig::new(trial);
        pt_cfg.num_sweeps = 200;
        if (solve_pt(&q, &pt_cfg).unwrap().best_energy - exact).abs() < 1e-9 {
            pt_hits += 1;
        }
        if (solve_pticm(&q, &pt_cfg).unwrap().best_energy - exact).abs() < 1e-9 {
            pticm_hits += 1;
        }
    }
    println!("ground-state recovery /100: sa {sa_hits} pt {pt_hits} pticm {pticm_hits}");
}

fn main() {
    ground_state_recovery();
    println!("== PT, adaptive default ladder, replicas 2 ==");
    let images = 4;
    run("noise-free  s=800", 800, 2, None, images);
    run("noise-free  s=1000", 1000, 2, None, images);
    run("15 dB       s=800", 800, 2, Some(15.0), images);
    run("13 dB       s=800", 800, 2, Some(13.0), images);
    run("13 dB       s=1000", 1000, 2, Some(13.0), images);
}
