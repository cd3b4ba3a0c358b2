//! Stochastic QUBO solvers behind one pluggable contract, plus an exhaustive
//! oracle for small instances.
//!
//! Every solver is a pure function of `(qubo, config.seed)`: identical
//! outputs across runs and thread counts. Parallelism only reorders work
//! whose RNG streams are pre-split per restart/replica/tile.

mod compiled;
mod exhaustive;
mod pt;
mod sa;

pub use exhaustive::{solve_exhaustive, EXHAUSTIVE_CAP};
pub use pt::{solve_pt, solve_pticm};
pub use sa::solve_sa;

use crate::error::{Error, Result};
use crate::qubo::QuboProblem;
use serde::Serialize;

/// Configuration shared by the annealing solvers.
#[derive(Debug, Clone, Serialize)]
pub struct SolverConfig {
    pub seed: u64,
    pub num_sweeps: usize,
    /// Independent restarts (simulated annealing only).
    pub num_restarts: usize,
    /// Ascending inverse temperatures. `None` selects the default ladder:
    /// 16 geometrically spaced values of `beta` from 0.75 to 30, divided by
    /// the problem's median absolute linear coefficient (falling back to the
    /// largest absolute coefficient), which tracks the typical single-flip
    /// energy scale.
    pub beta_ladder: Option<Vec<f64>>,
    /// Chains per ladder entry (parallel tempering).
    pub replicas_per_temperature: usize,
    /// Isoenergetic cluster moves (PTICM only; requires at least two
    /// replicas per temperature).
    pub icm_enabled: bool,
}

impl SolverConfig {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            num_sweeps: 500,
            num_restarts: 4,
            beta_ladder: None,
            replicas_per_temperature: 2,
            icm_enabled: true,
        }
    }
}

/// Geometric interpolation from `lo` to `hi` over `n` points.
fn geometric_schedule(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![hi];
    }
    let ratio = (hi / lo).powf(1.0 / (n - 1) as f64);
    (0..n).map(|i| lo * ratio.powi(i as i32)).collect()
}

/// Resolves the ladder for a problem, validating a user-provided one.
fn resolve_ladder(config: &SolverConfig, qubo: &QuboProblem) -> Result<Vec<f64>> {
    match &config.beta_ladder {
        Some(ladder) => {
            if ladder.is_empty() {
                return Err(Error::invalid("temperature ladder must not be empty"));
            }
            if ladder.iter().any(|&b| !b.is_finite() || b <= 0.0) {
                return Err(Error::invalid("inverse temperatures must be positive"));
            }
            if ladder.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::invalid("temperature ladder must be strictly increasing"));
            }
            Ok(ladder.clone())
        }
        None => {
            let mut scale = qubo.median_abs_linear();
            if scale <= 0.0 {
                scale = qubo.max_abs_coef();
            }
            if scale <= 0.0 {
                scale = 1.0;
            }
            Ok(geometric_schedule(0.75 / scale, 30.0 / scale, 16))
        }
    }
}

fn validate_counts(config: &SolverConfig) -> Result<()> {
    if config.num_sweeps == 0 || config.num_restarts == 0 || config.replicas_per_temperature == 0 {
        return Err(Error::invalid("sweep, restart and replica counts must be at least 1"));
    }
    Ok(())
}

/// Outcome of one solve: the best assignment seen, its exactly re-evaluated
/// energy, and per-sweep/per-unit statistics.
#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    pub best_bits: Vec<bool>,
    pub best_energy: f64,
    /// Best-so-far energy after each sweep (concatenated over restarts for
    /// simulated annealing); non-increasing.
    pub energy_trace: Vec<f64>,
    pub seed_used: u64,
    pub wall_time_s: f64,
    /// Per-restart best energies (simulated annealing).
    pub restart_best_energies: Vec<f64>,
    /// Per-ladder-slot best energies over all chains (parallel tempering).
    pub replica_best_energies: Vec<f64>,
    /// Accepted swap fraction per adjacent ladder pair (parallel tempering).
    pub swap_acceptance_rates: Vec<f64>,
    /// Isoenergetic cluster exchanges performed (PTICM).
    pub icm_move_count: u64,
}

impl SolveReport {
    fn new(best_bits: Vec<bool>, best_energy: f64, seed_used: u64) -> Self {
        Self {
            best_bits,
            best_energy,
            energy_trace: Vec::new(),
            seed_used,
            wall_time_s: 0.0,
            restart_best_energies: Vec::new(),
            replica_best_energies: Vec::new(),
            swap_acceptance_rates: Vec::new(),
            icm_move_count: 0,
        }
    }
}

/// Solver selection for the pipeline and the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverKind {
    Exhaustive,
    Sa,
    Pt,
    Pticm,
}

impl SolverKind {
    pub fn solve(self, qubo: &QuboProblem, config: &SolverConfig) -> Result<SolveReport> {
        match self {
            SolverKind::Exhaustive => solve_exhaustive(qubo),
            SolverKind::Sa => solve_sa(qubo, config),
            SolverKind::Pt => solve_pt(qubo, config),
            SolverKind::Pticm => solve_pticm(qubo, config),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SolverKind::Exhaustive => "exhaustive",
            SolverKind::Sa => "sa",
            SolverKind::Pt => "pt",
            SolverKind::Pticm => "pticm",
        }
    }
}

impl std::str::FromStr for SolverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exhaustive" => Ok(SolverKind::Exhaustive),
            "sa" => Ok(SolverKind::Sa),
            "pt" => Ok(SolverKind::Pt),
            "pticm" => Ok(SolverKind::Pticm),
            other => Err(Error::invalid(format!(
                "unknown solver '{other}' (expected sa, pt, pticm or exhaustive)"
            ))),
        }
    }
}

impl std::fmt::Display for SolverKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}


#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometric_schedule_endpoints() {
        let s = geometric_schedule(0.1, 10.0, 16);
        assert_eq!(s.len(), 16);
        assert!((s[0] - 0.1).abs() < 1e-12);
        assert!((s[15] - 10.0).abs() < 1e-9);
        assert!(s.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn ladder_validation() {
        let q = QuboProblem::new(2);
        let mut cfg = SolverConfig::new(1);
        cfg.beta_ladder = Some(vec![1.0, 0.5]);
        assert!(resolve_ladder(&cfg, &q).is_err());
        cfg.beta_ladder = Some(vec![0.5, 0.5]);
        assert!(resolve_ladder(&cfg, &q).is_err());
        cfg.beta_ladder = Some(vec![-1.0, 1.0]);
        assert!(resolve_ladder(&cfg, &q).is_err());
        cfg.beta_ladder = Some(vec![0.5, 1.0, 2.0]);
        assert_eq!(resolve_ladder(&cfg, &q).unwrap(), vec![0.5, 1.0, 2.0]);
    }

    #[test]
    fn default_ladder_scales_with_coefficients() {
        let mut q = QuboProblem::new(2);
        q.add_linear(0, -40.0);
        q.add_linear(1, 10.0);
        let cfg = SolverConfig::new(1);
        let ladder = resolve_ladder(&cfg, &q).unwrap();
        assert_eq!(ladder.len(), 16);
        // median |linear| = 40 (upper median of {10, 40})
        assert!((ladder[0] - 0.75 / 40.0).abs() < 1e-12);
        assert!((ladder[15] - 30.0 / 40.0).abs() < 1e-9);
        assert!(ladder.windows(2).all(|w| w[0] < w[1]));

        // Pure-quadratic problems fall back to the largest coefficient.
        let mut q2 = QuboProblem::new(2);
        q2.add_quadratic(0, 1, 5.0);
        let ladder2 = resolve_ladder(&cfg, &q2).unwrap();
        assert!((ladder2[0] - 0.75 / 5.0).abs() < 1e-12);
    }

    #[test]
    fn solver_kind_parsing() {
        assert_eq!("pt".parse::<SolverKind>().unwrap(), SolverKind::Pt);
        assert_eq!("pticm".parse::<SolverKind>().unwrap(), SolverKind::Pticm);
        assert!("mystery".parse::<SolverKind>().is_err());
    }
}
