//! Simulated annealing with sequential Metropolis sweeps.

use super::compiled::{BestTracker, CompiledQubo, SolverState};
use super::{resolve_ladder, validate_counts, SolveReport, SolverConfig};
use crate::error::Result;
use crate::qubo::QuboProblem;
use crate::rng::{domain, stream};
use rayon::prelude::*;
use std::time::Instant;

struct RestartOutcome {
    tracker_bits: Vec<bool>,
    tracker_energy: f64,
    trace: Vec<f64>,
}

/// Simulated annealing: each restart starts from a seeded uniform random bit
/// vector and anneals along a geometric inverse-temperature schedule between
/// the ladder endpoints. Returns the best assignment over all restarts.
///
/// Restarts draw from streams derived from `(seed, restart_index)`, so the
/// result does not depend on whether they run in parallel.
pub fn solve_sa(qubo: &QuboProblem, config: &SolverConfig) -> Result<SolveReport> {
    validate_counts(config)?;
    let ladder = resolve_ladder(config, qubo)?;
    let (beta_lo, beta_hi) = (ladder[0], ladder[ladder.len() - 1]);
    let start = Instant::now();
    let compiled = CompiledQubo::new(qubo);
    let sweeps = config.num_sweeps;

    let schedule: Vec<f64> = if sweeps == 1 {
        vec![beta_hi]
    } else {
        super::geometric_schedule(beta_lo, beta_hi, sweeps)
    };

    let outcomes: Vec<RestartOutcome> = (0..config.num_restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = stream(config.seed, domain::RESTART, r as u64);
            let mut state = SolverState::random(&compiled, &mut rng);
            let mut tracker = BestTracker::start(&compiled, &state);
            let mut trace = Vec::with_capacity(sweeps);
            for &beta in &schedule {
                state.metropolis_sweep(&compiled, beta, &mut rng, |s| tracker.offer(&compiled, s));
                // offer() verifies candidates exactly, but a sweep with no
                // accepted flips still needs the trace entry.
                trace.push(tracker.energy);
            }
            RestartOutcome { tracker_bits: tracker.bits, tracker_energy: tracker.energy, trace }
        })
        .collect();

    let mut best_bits = outcomes[0].tracker_bits.clone();
    let mut best_energy = outcomes[0].tracker_energy;
    let mut trace = Vec::with_capacity(sweeps * config.num_restarts);
    let mut restart_bests = Vec::with_capacity(config.num_restarts);
    let mut running = f64::INFINITY;
    for o in &outcomes {
        restart_bests.push(o.tracker_energy);
        if o.tracker_energy < best_energy {
            best_energy = o.tracker_energy;
            best_bits.clone_from(&o.tracker_bits);
        }
        for &e in &o.trace {
            running = running.min(e);
            trace.push(running);
        }
    }

    let mut report = SolveReport::new(best_bits, best_energy, config.seed);
    report.energy_trace = trace;
    report.restart_best_energies = restart_bests;
    report.wall_time_s = start.elapsed().as_secs_f64();
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::super::{solve_exhaustive, test_support::random_qubo};
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn finds_unique_minimum() {
        // Minimum at [1, 1] with energy -1.5.
        let mut q = QuboProblem::new(2);
        q.add_linear(0, -1.0);
        q.add_linear(1, -1.0);
        q.add_quadratic(0, 1, 0.5);
        let mut cfg = SolverConfig::new(7);
        cfg.num_sweeps = 100;
        cfg.num_restarts = 2;
        let r = solve_sa(&q, &cfg).unwrap();
        assert_eq!(r.best_bits, vec![true, true]);
        assert_eq!(r.best_energy, -1.5);
        assert_eq!(r.best_energy, solve_exhaustive(&q).unwrap().best_energy);
    }

    #[test]
    fn zero_qubo_reports_offset_after_one_sweep() {
        let mut q = QuboProblem::new(3);
        q.add_offset(1.25);
        let mut cfg = SolverConfig::new(1);
        cfg.num_sweeps = 1;
        cfg.num_restarts = 1;
        let r = solve_sa(&q, &cfg).unwrap();
        assert_eq!(r.best_energy, 1.25);
        assert_eq!(r.energy_trace.len(), 1);
    }

    #[test]
    fn deterministic_given_seed() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let q = random_qubo(10, &mut rng);
        let cfg = SolverConfig::new(1234);
        let a = solve_sa(&q, &cfg).unwrap();
        let b = solve_sa(&q, &cfg).unwrap();
        assert_eq!(a.best_bits, b.best_bits);
        assert_eq!(a.best_energy, b.best_energy);
        assert_eq!(a.energy_trace, b.energy_trace);
    }

    #[test]
    fn trace_is_monotone_and_consistent() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(10);
        let q = random_qubo(12, &mut rng);
        let mut cfg = SolverConfig::new(5);
        cfg.num_sweeps = 50;
        cfg.num_restarts = 3;
        let r = solve_sa(&q, &cfg).unwrap();
        assert_eq!(r.energy_trace.len(), 150);
        assert!(r.energy_trace.windows(2).all(|w| w[1] <= w[0]));
        assert_eq!(*r.energy_trace.last().unwrap(), r.best_energy);
        assert_eq!(r.best_energy, q.energy(&r.best_bits).unwrap());
        assert_eq!(r.restart_best_energies.len(), 3);
    }

    #[test]
    fn rejects_zero_counts() {
        let q = QuboProblem::new(2);
        let mut cfg = SolverConfig::new(1);
        cfg.num_sweeps = 0;
        assert!(solve_sa(&q, &cfg).is_err());
    }
}
