//! Wrapping model and integer-label energy functions.
//!
//! A wrapped phase determines the true phase up to an integer number of full
//! turns: `true = wrapped + 2*pi*k`. For two four-neighbour pixels whose true
//! difference is below the sampling limit, the required label difference
//! `k_t - k_s` is an exact integer computable from the wrapped values alone
//! (`edge_constant`). Unwrapping then minimizes the weighted residuals of
//! those per-edge constraints plus a small unary term that pins the global
//! shift.

use crate::error::{Error, Result};
use crate::grid::{GridKind, LabelGrid, PhaseGrid};
use std::f64::consts::PI;

const TAU: f64 = 2.0 * PI;

/// Tolerance for the edge-constant integrality check.
const EDGE_INT_TOL: f64 = 1e-6;

/// Maps `theta` into the half-open interval (-pi, pi], congruent mod 2*pi.
///
/// Odd multiples of pi map to +pi.
pub fn wrap(theta: f64) -> Result<f64> {
    if !theta.is_finite() {
        return Err(Error::invalid(format!("wrap of non-finite value {theta}")));
    }
    Ok(wrap_raw(theta))
}

/// `wrap` without the finiteness check, for validated inputs.
pub(crate) fn wrap_raw(theta: f64) -> f64 {
    let mut r = theta.rem_euclid(TAU); // [0, 2*pi)
    if r > PI {
        r -= TAU;
    }
    r
}

/// Integer label difference implied by two wrapped phases:
/// `(wrap(phi_i - phi_j) - (phi_i - phi_j)) / (2*pi)`, rounded.
///
/// The quotient is an integer by construction; if it strays more than 1e-6
/// from one the inputs were not wrapped values.
pub fn edge_constant(phi_i: f64, phi_j: f64) -> Result<i32> {
    let diff = phi_i - phi_j;
    if !diff.is_finite() {
        return Err(Error::invalid("edge constant of non-finite phases"));
    }
    let quotient = (wrap_raw(diff) - diff) / TAU;
    let rounded = quotient.round();
    if (quotient - rounded).abs() >= EDGE_INT_TOL {
        return Err(Error::Inconsistency(format!(
            "edge-constant quotient {quotient} is not an integer; inputs were not wrapped"
        )));
    }
    Ok(rounded as i32)
}

/// One pairwise term `W_st * (k_t - k_s - a_st)^2` of the energy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub s: usize,
    pub t: usize,
    /// Exact integer constant `a_st`.
    pub constant: i32,
    pub weight: f64,
}

/// Per-pixel regularization `w_s * (k_s - a_s)^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnaryTerm {
    pub weight: f64,
    pub bias: i32,
}

/// Default unary regularization weight, `2^-7`. A dyadic value keeps every
/// default-policy energy term exactly representable, so differently grouped
/// sums (integer domain, QUBO expansion, tile decomposition) agree
/// bit-for-bit.
pub const DEFAULT_UNARY_WEIGHT: f64 = 0.0078125;

/// Weights used when building a problem from a wrapped grid.
#[derive(Debug, Clone, Copy)]
pub struct WeightPolicy {
    pub edge_weight: f64,
    pub unary_weight: f64,
    pub unary_bias: i32,
}

impl Default for WeightPolicy {
    /// Unit data terms and a weak unary pull toward zero labels; the unary
    /// term only breaks the global-shift degeneracy and must never override
    /// a single data term.
    fn default() -> Self {
        Self { edge_weight: 1.0, unary_weight: DEFAULT_UNARY_WEIGHT, unary_bias: 0 }
    }
}

/// The integer-label unwrapping problem over a pixel grid.
#[derive(Debug, Clone)]
pub struct UnwrapProblem {
    width: usize,
    height: usize,
    edges: Vec<Edge>,
    unary: Vec<UnaryTerm>,
    domain_size: usize,
}

impl UnwrapProblem {
    /// Validates and builds a problem. Edges must connect distinct
    /// four-neighbour pixels and list each unordered pair at most once.
    pub fn new(
        width: usize,
        height: usize,
        edges: Vec<Edge>,
        unary: Vec<UnaryTerm>,
        domain_size: usize,
    ) -> Result<Self> {
        let n = width * height;
        if n == 0 {
            return Err(Error::invalid("problem dimensions must be nonzero"));
        }
        if unary.len() != n {
            return Err(Error::invalid(format!(
                "unary term count {} does not match {n} pixels",
                unary.len()
            )));
        }
        if domain_size < 2 {
            return Err(Error::invalid("label domain must have at least 2 values"));
        }
        let mut seen = std::collections::HashSet::with_capacity(edges.len());
        for e in &edges {
            if e.s >= n || e.t >= n {
                return Err(Error::invalid(format!("edge ({}, {}) out of bounds", e.s, e.t)));
            }
            let (rs, cs) = (e.s / width, e.s % width);
            let (rt, ct) = (e.t / width, e.t % width);
            if rs.abs_diff(rt) + cs.abs_diff(ct) != 1 {
                return Err(Error::invalid(format!(
                    "edge ({}, {}) does not connect four-neighbour pixels",
                    e.s, e.t
                )));
            }
            if !e.weight.is_finite() || e.weight < 0.0 {
                return Err(Error::invalid("edge weights must be finite and nonnegative"));
            }
            if !seen.insert((e.s.min(e.t), e.s.max(e.t))) {
                return Err(Error::invalid(format!("duplicate edge ({}, {})", e.s, e.t)));
            }
        }
        for u in &unary {
            if !u.weight.is_finite() || u.weight < 0.0 {
                return Err(Error::invalid("unary weights must be finite and nonnegative"));
            }
        }
        Ok(Self { width, height, edges, unary, domain_size })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn num_pixels(&self) -> usize {
        self.width * self.height
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn unary(&self) -> &[UnaryTerm] {
        &self.unary
    }

    pub fn domain_size(&self) -> usize {
        self.domain_size
    }

    fn check_labels(&self, labels: &LabelGrid) -> Result<()> {
        if labels.width() != self.width || labels.height() != self.height {
            return Err(Error::invalid(format!(
                "label grid {}x{} does not match problem {}x{}",
                labels.width(),
                labels.height(),
                self.width,
                self.height
            )));
        }
        if labels.labels().iter().any(|&k| k < 0 || k as usize >= self.domain_size) {
            return Err(Error::invalid("labels outside the problem domain"));
        }
        Ok(())
    }
}

/// Pairwise/unary/total energy of one labeling.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct EnergyBreakdown {
    pub pairwise: f64,
    pub unary: f64,
    pub total: f64,
}

impl EnergyBreakdown {
    fn new(pairwise: f64, unary: f64) -> Self {
        Self { pairwise, unary, total: pairwise + unary }
    }
}

/// Builds the unwrapping problem for a wrapped grid: one edge per
/// horizontally or vertically adjacent pixel pair (right neighbour first,
/// then down neighbour), with `a_st` from `edge_constant` and weights from
/// the policy.
pub fn build_problem(
    wrapped: &PhaseGrid,
    weights: &WeightPolicy,
    domain_size: usize,
) -> Result<UnwrapProblem> {
    if wrapped.kind() != GridKind::Wrapped {
        return Err(Error::invalid("build_problem requires a wrapped grid"));
    }
    if wrapped.len() < 2 {
        return Err(Error::invalid("grid must have at least 1x2 pixels"));
    }
    if domain_size < 2 {
        return Err(Error::invalid("label domain must have at least 2 values"));
    }
    let (w, h) = (wrapped.width(), wrapped.height());
    let v = wrapped.values();
    let mut edges = Vec::with_capacity(2 * w * h);
    for row in 0..h {
        for col in 0..w {
            let s = row * w + col;
            if col + 1 < w {
                let t = s + 1;
                edges.push(Edge {
                    s,
                    t,
                    constant: edge_constant(v[t], v[s])?,
                    weight: weights.edge_weight,
                });
            }
            if row + 1 < h {
                let t = s + w;
                edges.push(Edge {
                    s,
                    t,
                    constant: edge_constant(v[t], v[s])?,
                    weight: weights.edge_weight,
                });
            }
        }
    }
    let unary = vec![UnaryTerm { weight: weights.unary_weight, bias: weights.unary_bias }; w * h];
    UnwrapProblem::new(w, h, edges, unary, domain_size)
}

/// Quadratic energy: `sum W_st (k_t - k_s - a_st)^2 + sum w_s (k_s - a_s)^2`.
pub fn energy_l2(problem: &UnwrapProblem, labels: &LabelGrid) -> Result<EnergyBreakdown> {
    problem.check_labels(labels)?;
    Ok(energy_l2_raw(problem, labels.labels()))
}

/// Absolute-value energy: as `energy_l2` with |.| replacing squares.
pub fn energy_l1(problem: &UnwrapProblem, labels: &LabelGrid) -> Result<EnergyBreakdown> {
    problem.check_labels(labels)?;
    let k = labels.labels();
    let mut pairwise = 0.0;
    for e in &problem.edges {
        pairwise += e.weight * f64::from(k[e.t] - k[e.s] - e.constant).abs();
    }
    let mut unary = 0.0;
    for (u, &ks) in problem.unary.iter().zip(k) {
        unary += u.weight * f64::from(ks - u.bias).abs();
    }
    Ok(EnergyBreakdown::new(pairwise, unary))
}

/// `energy_l2` over raw labels, without the domain check. Used internally
/// where intermediate labelings may leave the domain (e.g. stitching
/// diagnostics).
pub(crate) fn energy_l2_raw(problem: &UnwrapProblem, k: &[i32]) -> EnergyBreakdown {
    let mut pairwise = 0.0;
    for e in &problem.edges {
        let r = f64::from(k[e.t] - k[e.s] - e.constant);
        pairwise += e.weight * r * r;
    }
    let mut unary = 0.0;
    for (u, &ks) in problem.unary.iter().zip(k) {
        let r = f64::from(ks - u.bias);
        unary += u.weight * r * r;
    }
    EnergyBreakdown::new(pairwise, unary)
}

/// Applies labels to a wrapped grid: `out_i = wrapped_i + 2*pi*k_i`.
pub fn apply_labels(wrapped: &PhaseGrid, labels: &LabelGrid) -> Result<PhaseGrid> {
    if wrapped.kind() != GridKind::Wrapped {
        return Err(Error::invalid("apply_labels requires a wrapped grid"));
    }
    if wrapped.width() != labels.width() || wrapped.height() != labels.height() {
        return Err(Error::invalid(format!(
            "label grid {}x{} does not match phase grid {}x{}",
            labels.width(),
            labels.height(),
            wrapped.width(),
            wrapped.height()
        )));
    }
    let values = wrapped
        .values()
        .iter()
        .zip(labels.labels())
        .map(|(&v, &k)| v + TAU * f64::from(k))
        .collect();
    PhaseGrid::new(wrapped.width(), wrapped.height(), values, GridKind::Unwrapped)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;
    use rand::SeedableRng;

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b}");
    }

    #[test]
    fn wrap_known_values() {
        assert_eq!(wrap(0.0).unwrap(), 0.0);
        assert_close(wrap(3.0 * PI).unwrap(), PI, 1e-12);
        assert_close(wrap(2.5 * PI).unwrap(), 0.5 * PI, 1e-12);
        // Boundary maps to +pi under the half-open convention.
        assert_eq!(wrap(PI).unwrap(), PI);
        assert_eq!(wrap(-PI).unwrap(), PI);
    }

    #[test]
    fn wrap_rejects_non_finite() {
        assert!(wrap(f64::NAN).is_err());
        assert!(wrap(f64::INFINITY).is_err());
    }

    #[test]
    fn wrap_is_congruent_and_idempotent() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10_000 {
            let theta: f64 = rng.gen_range(-100.0..100.0);
            let w = wrap(theta).unwrap();
            assert!(w > -PI && w <= PI);
            // Congruent mod 2*pi.
            let k = ((theta - w) / TAU).round();
            assert_close(w + TAU * k, theta, 1e-9);
            // Idempotent.
            assert_eq!(wrap(w).unwrap(), w);
        }
    }

    #[test]
    fn edge_constant_known_values() {
        assert_eq!(edge_constant(0.1 * PI, -0.1 * PI).unwrap(), 0);
        // diff = 1.9*pi, wrap(1.9*pi) = -0.1*pi, a = (-0.1*pi - 1.9*pi)/(2*pi) = -1
        assert_eq!(edge_constant(0.95 * PI, -0.95 * PI).unwrap(), -1);
        assert_eq!(edge_constant(-0.95 * PI, 0.95 * PI).unwrap(), 1);
    }

    #[test]
    fn edge_constant_integrality_and_antisymmetry() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(12);
        for _ in 0..10_000 {
            let a = wrap_raw(rng.gen_range(-10.0..10.0));
            let b = wrap_raw(rng.gen_range(-10.0..10.0));
            let diff = a - b;
            let q = (wrap_raw(diff) - diff) / TAU;
            assert!((q - q.round()).abs() < 1e-6);
            assert_eq!(edge_constant(a, b).unwrap(), -edge_constant(b, a).unwrap());
        }
    }

    #[test]
    fn edge_constant_rejects_unwrapped_garbage() {
        // At this magnitude the quotient lands a full ulp (~1.6e-2) away
        // from the integer, tripping the integrality guard.
        assert!(matches!(
            edge_constant(5.89982655292278375e14, 0.0),
            Err(Error::Inconsistency(_))
        ));
        assert!(edge_constant(f64::NAN, 0.0).is_err());
    }

    fn grid_from(values: Vec<f64>, w: usize, h: usize) -> PhaseGrid {
        PhaseGrid::new(w, h, values, GridKind::Wrapped).unwrap()
    }

    #[test]
    fn build_problem_edge_counts() {
        let g = grid_from(vec![0.0; 4], 2, 2);
        let p = build_problem(&g, &WeightPolicy::default(), 4).unwrap();
        assert_eq!(p.edges().len(), 4);

        let g = grid_from(vec![0.0; 9], 3, 3);
        let p = build_problem(&g, &WeightPolicy::default(), 4).unwrap();
        assert_eq!(p.edges().len(), 12);
        // Constant grid: all edge constants are zero.
        assert!(p.edges().iter().all(|e| e.constant == 0));
    }

    #[test]
    fn build_problem_rejects_degenerate_input() {
        let g = grid_from(vec![0.0], 1, 1);
        assert!(build_problem(&g, &WeightPolicy::default(), 4).is_err());
        let g2 = grid_from(vec![0.0, 0.1], 2, 1);
        assert!(build_problem(&g2, &WeightPolicy::default(), 1).is_err());
        assert!(build_problem(&g2, &WeightPolicy::default(), 2).is_ok());
    }

    #[test]
    fn unwrap_problem_rejects_non_adjacent_edges() {
        let unary = vec![UnaryTerm { weight: 0.0, bias: 0 }; 4];
        let bad = Edge { s: 0, t: 3, constant: 0, weight: 1.0 };
        assert!(UnwrapProblem::new(2, 2, vec![bad], unary.clone(), 2).is_err());
        let dup = vec![
            Edge { s: 0, t: 1, constant: 0, weight: 1.0 },
            Edge { s: 1, t: 0, constant: 0, weight: 1.0 },
        ];
        assert!(UnwrapProblem::new(2, 2, dup, unary, 2).is_err());
    }

    #[test]
    fn energy_l2_single_edge() {
        let unary = vec![UnaryTerm { weight: 0.0, bias: 0 }; 2];
        let p = UnwrapProblem::new(
            2,
            1,
            vec![Edge { s: 0, t: 1, constant: 1, weight: 1.0 }],
            unary,
            4,
        )
        .unwrap();
        let k = LabelGrid::new(2, 1, vec![0, 2], 4).unwrap();
        let e = energy_l2(&p, &k).unwrap();
        assert_eq!(e.pairwise, 1.0); // (2 - 0 - 1)^2
        assert_eq!(e.unary, 0.0);
        assert_eq!(e.total, 1.0);
    }

    #[test]
    fn energy_l1_single_edge() {
        let unary = vec![UnaryTerm { weight: 0.0, bias: 0 }; 2];
        let p = UnwrapProblem::new(
            2,
            1,
            vec![Edge { s: 0, t: 1, constant: 1, weight: 1.0 }],
            unary,
            4,
        )
        .unwrap();
        let k = LabelGrid::new(2, 1, vec![0, 3], 4).unwrap();
        let e = energy_l1(&p, &k).unwrap();
        assert_eq!(e.pairwise, 2.0); // |3 - 0 - 1|
    }

    #[test]
    fn zero_residual_labelings_have_zero_energy() {
        // All labels equal to the bias and all constants zero.
        let unary = vec![UnaryTerm { weight: 0.5, bias: 2 }; 4];
        let edges = vec![
            Edge { s: 0, t: 1, constant: 0, weight: 1.0 },
            Edge { s: 2, t: 3, constant: 0, weight: 1.0 },
            Edge { s: 0, t: 2, constant: 0, weight: 1.0 },
            Edge { s: 1, t: 3, constant: 0, weight: 1.0 },
        ];
        let p = UnwrapProblem::new(2, 2, edges, unary, 4).unwrap();
        let k = LabelGrid::new(2, 2, vec![2; 4], 4).unwrap();
        assert_eq!(energy_l2(&p, &k).unwrap().total, 0.0);
        assert_eq!(energy_l1(&p, &k).unwrap().total, 0.0);
    }

    #[test]
    fn energy_shape_mismatch_is_rejected() {
        let g = grid_from(vec![0.0; 4], 2, 2);
        let p = build_problem(&g, &WeightPolicy::default(), 4).unwrap();
        let k = LabelGrid::zeros(3, 2, 4).unwrap();
        assert!(energy_l2(&p, &k).is_err());
        assert!(energy_l1(&p, &k).is_err());
        assert!(apply_labels(&g, &k).is_err());
    }

    /// Deliberately naive scalar re-computation of both energies.
    fn oracle_energies(p: &UnwrapProblem, k: &[i32]) -> (f64, f64) {
        let mut l2 = 0.0;
        let mut l1 = 0.0;
        for e in p.edges() {
            let r = (k[e.t] - k[e.s] - e.constant) as f64;
            l2 += e.weight * r.powi(2);
            l1 += e.weight * r.abs();
        }
        for (i, u) in p.unary().iter().enumerate() {
            let r = (k[i] - u.bias) as f64;
            l2 += u.weight * r.powi(2);
            l1 += u.weight * r.abs();
        }
        (l2, l1)
    }

    #[test]
    fn energies_match_scalar_oracle() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
        for _ in 0..100 {
            let values: Vec<f64> = (0..16).map(|_| wrap_raw(rng.gen_range(-20.0..20.0))).collect();
            let g = grid_from(values, 4, 4);
            let p = build_problem(&g, &WeightPolicy::default(), 4).unwrap();
            let labels: Vec<i32> = (0..16).map(|_| rng.gen_range(0..4)).collect();
            let lg = LabelGrid::new(4, 4, labels.clone(), 4).unwrap();
            let (l2, l1) = oracle_energies(&p, &labels);
            assert_eq!(energy_l2(&p, &lg).unwrap().total, l2);
            assert_eq!(energy_l1(&p, &lg).unwrap().total, l1);
        }
    }

    #[test]
    fn pairwise_energy_is_shift_invariant() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let values: Vec<f64> = (0..12).map(|_| wrap_raw(rng.gen_range(-9.0..9.0))).collect();
        let g = grid_from(values, 4, 3);
        let p = build_problem(&g, &WeightPolicy::default(), 8).unwrap();
        let base: Vec<i32> = (0..12).map(|_| rng.gen_range(0..4)).collect();
        let lg0 = LabelGrid::new(4, 3, base.clone(), 8).unwrap();
        let e0 = energy_l2(&p, &lg0).unwrap();
        let e0_l1 = energy_l1(&p, &lg0).unwrap();
        for c in 1..=3 {
            let shifted: Vec<i32> = base.iter().map(|&k| k + c).collect();
            let lg = LabelGrid::new(4, 3, shifted, 8).unwrap();
            assert_eq!(energy_l2(&p, &lg).unwrap().pairwise, e0.pairwise);
            assert_eq!(energy_l1(&p, &lg).unwrap().pairwise, e0_l1.pairwise);
        }
    }

    #[test]
    fn apply_labels_formula_and_kind() {
        let g = grid_from(vec![0.5], 1, 1);
        let k = LabelGrid::new(1, 1, vec![2], 4).unwrap();
        let out = apply_labels(&g, &k).unwrap();
        assert_eq!(out.kind(), GridKind::Unwrapped);
        assert_close(out.values()[0], 0.5 + 2.0 * TAU, 1e-12);

        let zeros = LabelGrid::zeros(1, 1, 4).unwrap();
        assert_eq!(apply_labels(&g, &zeros).unwrap().values(), g.values());
    }

    proptest! {
        #[test]
        fn wrapping_applied_labels_reproduces_the_grid(
            vals in proptest::collection::vec(-30.0f64..30.0, 6),
            ks in proptest::collection::vec(0i32..6, 6),
        ) {
            let wrapped: Vec<f64> = vals.iter().map(|&v| wrap_raw(v)).collect();
            let g = PhaseGrid::new(3, 2, wrapped.clone(), GridKind::Wrapped).unwrap();
            let lg = LabelGrid::new(3, 2, ks, 6).unwrap();
            let applied = apply_labels(&g, &lg).unwrap();
            for (a, w) in applied.values().iter().zip(&wrapped) {
                prop_assert!((wrap_raw(*a) - w).abs() < 1e-9);
            }
        }
    }
}
