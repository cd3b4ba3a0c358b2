//! Two-dimensional phase unwrapping as quadratic unconstrained binary
//! optimization.
//!
//! The library models an interferogram as a grid of wrapped phases, derives
//! the integer-label energy function over four-neighbour pixel pairs, encodes
//! it as a QUBO and minimizes with stochastic annealing solvers. Large images
//! are handled by a two-phase decomposition: tiles are unwrapped
//! independently, then a second, much smaller QUBO over per-tile integer
//! offsets stitches the tiles into a consistent image.

pub mod error;
pub mod grid;
pub mod io;
pub mod metrics;
pub mod phase;
pub mod qubo;
pub mod rng;
pub mod solvers;
pub mod superpixel;
pub mod synth;

pub use error::{Error, Result};
pub use grid::{GridKind, LabelGrid, PhaseGrid};
pub use metrics::{match_labels, summarize, MatchReport};
pub use phase::{
    apply_labels, build_problem, edge_constant, energy_l1, energy_l2, wrap, Edge, EnergyBreakdown,
    UnaryTerm, UnwrapProblem, WeightPolicy,
};
pub use qubo::{build_qubo, decode_solution, qubo_energy, BinaryEncoding, QuboProblem, VarLayout};
pub use solvers::{solve_exhaustive, solve_pt, solve_pticm, solve_sa, SolveReport, SolverConfig, SolverKind};
pub use superpixel::{
    build_offset_qubo, build_superpixel_problem, make_tiling, restrict_problem, stitch,
    unwrap_superpixel, PipelineReport, StitchOutcome, SuperEdge, SuperpixelProblem, Tile, Tiling,
};
pub use synth::{add_noise, generate_truth, synthesize, wrap_grid, SynthSpec};
