//! Parallel tempering and PTICM.

use super::compiled::{BestTracker, CompiledQubo, SolverState};
use super::{resolve_ladder, validate_counts, SolveReport, SolverConfig};
use crate::error::{Error, Result};
use crate::qubo::QuboProblem;
use crate::rng::{domain, stream};
use rand::Rng;
use std::time::Instant;

/// Parallel tempering: one chain of replicas per ladder entry (times
/// `replicas_per_temperature`), Metropolis sweeps at every temperature, then
/// neighbour-temperature swaps accepted with
/// `min(1, exp((beta_a - beta_b) * (E_a - E_b)))`.
pub fn solve_pt(qubo: &QuboProblem, config: &SolverConfig) -> Result<SolveReport> {
    pt_core(qubo, config, false)
}

/// Parallel tempering with isoenergetic cluster moves between same-
/// temperature replica pairs at the lowest-beta end of the ladder. The
/// exchange of a connected cluster of disagreeing variables preserves the
/// summed energy of the pair and is always accepted. With `icm_enabled`
/// false this is exactly `solve_pt`.
pub fn solve_pticm(qubo: &QuboProblem, config: &SolverConfig) -> Result<SolveReport> {
    if config.icm_enabled && config.replicas_per_temperature < 2 {
        return Err(Error::invalid(
            "isoenergetic cluster moves need at least 2 replicas per temperature",
        ));
    }
    pt_core(qubo, config, config.icm_enabled)
}

fn pt_core(qubo: &QuboProblem, config: &SolverConfig, icm: bool) -> Result<SolveReport> {
    validate_counts(config)?;
    let ladder = resolve_ladder(config, qubo)?;
    if ladder.len() < 2 {
        return Err(Error::invalid("parallel tempering needs a ladder of at least 2 temperatures"));
    }
    let start = Instant::now();
    let compiled = CompiledQubo::new(qubo);
    let num_temps = ladder.len();
    let num_chains = config.replicas_per_temperature;

    // Replica state and RNG stream per (chain, ladder slot); an extra stream
    // drives swap decisions and cluster moves.
    // Replicas start from the zero vector: a fixed, seed-independent state
    // that for unwrapping QUBOs (all labels zero) is far below a random
    // assignment, so sweeps go into refinement instead of initial
    // coarsening. Temperature-driven exploration supplies the diversity.
    let mut states: Vec<Vec<SolverState>> = Vec::with_capacity(num_chains);
    let mut rngs = Vec::with_capacity(num_chains);
    for c in 0..num_chains {
        let mut chain_states = Vec::with_capacity(num_temps);
        let mut chain_rngs = Vec::with_capacity(num_temps);
        for t in 0..num_temps {
            let rng = stream(config.seed, domain::REPLICA, (c * num_temps + t) as u64);
            chain_states.push(SolverState::from_bits(&compiled, vec![false; compiled.num_vars]));
            chain_rngs.push(rng);
        }
        states.push(chain_states);
        rngs.push(chain_rngs);
    }
    let mut rng_global = stream(config.seed, domain::SWAP, 0);

    let mut tracker = BestTracker::start(&compiled, &states[0][0]);
    for chain in &states {
        for s in chain {
            tracker.offer(&compiled, s);
        }
    }

    let mut trace = Vec::with_capacity(config.num_sweeps);
    let mut replica_best = vec![f64::INFINITY; num_temps];
    let mut swap_accepts = vec![0u64; num_temps - 1];
    let mut swap_proposals = vec![0u64; num_temps - 1];
    let mut icm_moves = 0u64;

    for sweep in 0..config.num_sweeps {
        for c in 0..num_chains {
            for t in 0..num_temps {
                states[c][t].metropolis_sweep(&compiled, ladder[t], &mut rngs[c][t], |s| {
                    tracker.offer(&compiled, s)
                });
                replica_best[t] = replica_best[t].min(states[c][t].energy);
            }
        }

        // Neighbour swaps, alternating pair parity between sweeps.
        for chain in states.iter_mut() {
            let mut t = sweep % 2;
            while t + 1 < num_temps {
                let exponent =
                    (ladder[t + 1] - ladder[t]) * (chain[t + 1].energy - chain[t].energy);
                let accept = exponent >= 0.0 || rng_global.gen::<f64>() < exponent.exp();
                swap_proposals[t] += 1;
                if accept {
                    chain.swap(t, t + 1);
                    swap_accepts[t] += 1;
                }
                t += 2;
            }
        }

        if icm {
            for pair in 0..num_chains / 2 {
                let (lo, hi) = states.split_at_mut(2 * pair + 1);
                if icm_move(&compiled, &mut lo[2 * pair][0], &mut hi[0][0], &mut rng_global) {
                    icm_moves += 1;
                    tracker.offer(&compiled, &states[2 * pair][0]);
                    tracker.offer(&compiled, &states[2 * pair + 1][0]);
                }
            }
        }

        trace.push(tracker.energy);
    }

    let mut report = SolveReport::new(tracker.bits, tracker.energy, config.seed);
    report.energy_trace = trace;
    report.replica_best_energies = replica_best;
    report.swap_acceptance_rates = swap_accepts
        .iter()
        .zip(&swap_proposals)
        .map(|(&a, &p)| if p == 0 { 0.0 } else { a as f64 / p as f64 })
        .collect();
    report.icm_move_count = icm_moves;
    report.wall_time_s = start.elapsed().as_secs_f64();
    Ok(report)
}

/// Houdayer-style exchange: pick a random disagreeing variable, flood-fill
/// through disagreeing neighbours in the QUBO adjacency graph, and swap the
/// cluster's bits between the replicas. Returns false when the replicas
/// agree everywhere.
fn icm_move(
    compiled: &CompiledQubo,
    a: &mut SolverState,
    b: &mut SolverState,
    rng: &mut impl Rng,
) -> bool {
    let disagree: Vec<usize> =
        (0..compiled.num_vars).filter(|&i| a.bits[i] != b.bits[i]).collect();
    if disagree.is_empty() {
        return false;
    }
    let seed_var = disagree[rng.gen_range(0..disagree.len())];
    let mut in_cluster = vec![false; compiled.num_vars];
    in_cluster[seed_var] = true;
    let mut stack = vec![seed_var];
    let mut cluster = vec![seed_var];
    while let Some(i) = stack.pop() {
        for &(j, _) in compiled.neighbors(i) {
            let j = j as usize;
            if !in_cluster[j] && a.bits[j] != b.bits[j] {
                in_cluster[j] = true;
                stack.push(j);
                cluster.push(j);
            }
        }
    }
    // Exchanging differing bits is a flip of the same positions in both.
    for &i in &cluster {
        a.flip(compiled, i);
        b.flip(compiled, i);
    }
    true
}
