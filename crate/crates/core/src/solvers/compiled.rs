//! Flat QUBO representation for hot solver loops.
//!
//! Flipping bit `i` changes the energy by `(1 - 2 x_i) * f_i` where
//! `f_i = a_i + sum_j b_ij x_j` is the local field. States keep all fields
//! cached so a Metropolis proposal costs O(1) and an accepted flip costs
//! O(degree). Incremental energies can drift by a few ulps over long runs,
//! so best-so-far candidates are always re-evaluated against the exact
//! sparse form before they are recorded.

use crate::qubo::QuboProblem;
use rand::Rng;

pub(crate) struct CompiledQubo<'a> {
    qubo: &'a QuboProblem,
    pub(crate) num_vars: usize,
    linear: Vec<f64>,
    nbr_starts: Vec<usize>,
    nbr_entries: Vec<(u32, f64)>,
}

impl<'a> CompiledQubo<'a> {
    pub(crate) fn new(qubo: &'a QuboProblem) -> Self {
        let n = qubo.num_vars();
        let mut linear = vec![0.0; n];
        for (&i, &v) in qubo.linear() {
            linear[i] = v;
        }
        let mut degree = vec![0usize; n];
        for &(i, j) in qubo.quadratic().keys() {
            degree[i] += 1;
            degree[j] += 1;
        }
        let mut nbr_starts = Vec::with_capacity(n + 1);
        let mut acc = 0;
        nbr_starts.push(0);
        for d in &degree {
            acc += d;
            nbr_starts.push(acc);
        }
        let mut cursor = nbr_starts[..n].to_vec();
        let mut nbr_entries = vec![(0u32, 0.0); acc];
        for (&(i, j), &v) in qubo.quadratic() {
            nbr_entries[cursor[i]] = (j as u32, v);
            cursor[i] += 1;
            nbr_entries[cursor[j]] = (i as u32, v);
            cursor[j] += 1;
        }
        Self { qubo, num_vars: n, linear, nbr_starts, nbr_entries }
    }

    pub(crate) fn neighbors(&self, i: usize) -> &[(u32, f64)] {
        &self.nbr_entries[self.nbr_starts[i]..self.nbr_starts[i + 1]]
    }

    /// Exact evaluation through the sparse form.
    pub(crate) fn exact_energy(&self, bits: &[bool]) -> f64 {
        self.qubo.energy(bits).expect("bit vector length matches compiled problem")
    }
}

/// One solver configuration: bits, cached local fields and tracked energy.
pub(crate) struct SolverState {
    pub(crate) bits: Vec<bool>,
    fields: Vec<f64>,
    pub(crate) energy: f64,
}

impl SolverState {
    pub(crate) fn from_bits(compiled: &CompiledQubo, bits: Vec<bool>) -> Self {
        let mut state = Self { bits, fields: vec![0.0; compiled.num_vars], energy: 0.0 };
        state.resync(compiled);
        state
    }

    pub(crate) fn random(compiled: &CompiledQubo, rng: &mut impl Rng) -> Self {
        let bits = (0..compiled.num_vars).map(|_| rng.gen::<bool>()).collect();
        Self::from_bits(compiled, bits)
    }

    /// Recomputes fields and energy from scratch.
    pub(crate) fn resync(&mut self, compiled: &CompiledQubo) {
        for i in 0..compiled.num_vars {
            let mut f = compiled.linear[i];
            for &(j, q) in compiled.neighbors(i) {
                if self.bits[j as usize] {
                    f += q;
                }
            }
            self.fields[i] = f;
        }
        self.energy = compiled.exact_energy(&self.bits);
    }

    /// Energy change if bit `i` were flipped.
    #[inline]
    pub(crate) fn delta(&self, i: usize) -> f64 {
        if self.bits[i] {
            -self.fields[i]
        } else {
            self.fields[i]
        }
    }

    #[inline]
    pub(crate) fn flip(&mut self, compiled: &CompiledQubo, i: usize) {
        self.energy += self.delta(i);
        let sign = if self.bits[i] { -1.0 } else { 1.0 };
        for &(j, q) in compiled.neighbors(i) {
            self.fields[j as usize] += sign * q;
        }
        self.bits[i] = !self.bits[i];
    }

    /// One Metropolis pass over all variables in index order. Returns the
    /// number of accepted flips; `on_accept` sees the state after each one.
    pub(crate) fn metropolis_sweep(
        &mut self,
        compiled: &CompiledQubo,
        beta: f64,
        rng: &mut impl Rng,
        mut on_accept: impl FnMut(&SolverState),
    ) -> u64 {
        let mut accepted = 0;
        for i in 0..compiled.num_vars {
            let d = self.delta(i);
            // Uphill moves with beta*d >= 40 (acceptance < 1e-17) are
            // rejected without drawing.
            let accept = if d <= 0.0 {
                true
            } else {
                let x = beta * d;
                x < 40.0 && rng.gen::<f64>() < (-x).exp()
            };
            if accept {
                self.flip(compiled, i);
                accepted += 1;
                on_accept(self);
            }
        }
        accepted
    }
}

/// Best assignment seen so far, verified by exact re-evaluation.
pub(crate) struct BestTracker {
    pub(crate) bits: Vec<bool>,
    pub(crate) energy: f64,
    threshold: f64,
}

impl BestTracker {
    pub(crate) fn start(compiled: &CompiledQubo, state: &SolverState) -> Self {
        let energy = compiled.exact_energy(&state.bits);
        Self { bits: state.bits.clone(), energy, threshold: Self::margin_above(energy) }
    }

    fn margin_above(energy: f64) -> f64 {
        energy + 1e-9 * (1.0 + energy.abs())
    }

    /// Considers a state whose incremental energy looks at least as good as
    /// the current best (within a drift margin).
    #[inline]
    pub(crate) fn offer(&mut self, compiled: &CompiledQubo, state: &SolverState) {
        if state.energy < self.threshold {
            let exact = compiled.exact_energy(&state.bits);
            if exact < self.energy {
                self.energy = exact;
                self.bits.clone_from(&state.bits);
                self.threshold = Self::margin_above(exact);
            }
        }
    }

}
