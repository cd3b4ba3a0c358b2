//! Sparse QUBO form and the binary encoding of integer labels.
//!
//! Each label `k` in `0..D` becomes `ceil(log2 D)` bits with weights
//! `2^0, 2^1, ...`; expanding the squared residuals of the quadratic energy
//! produces linear and pairwise coefficients plus a constant offset. The
//! expansion is exact: coefficients are sums of products of integers and
//! term weights, so the QUBO energy of an encoded labeling equals the
//! integer-domain energy.

use crate::error::{Error, Result};
use crate::grid::LabelGrid;
use crate::phase::{Edge, UnaryTerm, UnwrapProblem};
use std::collections::BTreeMap;
use std::io::Write;

/// Sparse symmetric quadratic form over binary variables.
///
/// Quadratic keys are ordered pairs `(i, j)` with `i < j`; diagonal terms are
/// folded into the linear part (for binary `x`, `x^2 = x`) and zero
/// coefficients are never stored.
#[derive(Debug, Clone, PartialEq)]
pub struct QuboProblem {
    num_vars: usize,
    linear: BTreeMap<usize, f64>,
    quadratic: BTreeMap<(usize, usize), f64>,
    offset: f64,
}

impl QuboProblem {
    pub fn new(num_vars: usize) -> Self {
        Self { num_vars, linear: BTreeMap::new(), quadratic: BTreeMap::new(), offset: 0.0 }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn add_offset(&mut self, v: f64) {
        self.offset += v;
    }

    pub fn add_linear(&mut self, i: usize, v: f64) {
        debug_assert!(i < self.num_vars);
        *self.linear.entry(i).or_insert(0.0) += v;
    }

    pub fn add_quadratic(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(i < self.num_vars && j < self.num_vars);
        if i == j {
            self.add_linear(i, v);
            return;
        }
        let key = (i.min(j), i.max(j));
        *self.quadratic.entry(key).or_insert(0.0) += v;
    }

    /// Drops coefficients that cancelled to exactly zero during accumulation.
    pub fn prune_zeros(&mut self) {
        self.linear.retain(|_, v| *v != 0.0);
        self.quadratic.retain(|_, v| *v != 0.0);
    }

    pub fn linear(&self) -> &BTreeMap<usize, f64> {
        &self.linear
    }

    pub fn quadratic(&self) -> &BTreeMap<(usize, usize), f64> {
        &self.quadratic
    }

    pub fn linear_coef(&self, i: usize) -> f64 {
        self.linear.get(&i).copied().unwrap_or(0.0)
    }

    pub fn quadratic_coef(&self, i: usize, j: usize) -> f64 {
        self.quadratic.get(&(i.min(j), i.max(j))).copied().unwrap_or(0.0)
    }

    /// Largest absolute coefficient (linear or quadratic); 0 for an empty form.
    pub fn max_abs_coef(&self) -> f64 {
        self.linear
            .values()
            .chain(self.quadratic.values())
            .fold(0.0f64, |m, &v| m.max(v.abs()))
    }

    /// Median absolute linear coefficient; 0 when there are none. Tracks the
    /// energy scale of typical single-bit flips, which is what temperature
    /// ladders should be calibrated against.
    pub fn median_abs_linear(&self) -> f64 {
        let mut v: Vec<f64> = self.linear.values().map(|x| x.abs()).collect();
        if v.is_empty() {
            return 0.0;
        }
        v.sort_by(f64::total_cmp);
        v[v.len() / 2]
    }

    /// Evaluates the quadratic form on a bit vector.
    pub fn energy(&self, bits: &[bool]) -> Result<f64> {
        if bits.len() != self.num_vars {
            return Err(Error::invalid(format!(
                "bit vector length {} does not match {} variables",
                bits.len(),
                self.num_vars
            )));
        }
        let mut e = self.offset;
        for (&i, &v) in &self.linear {
            if bits[i] {
                e += v;
            }
        }
        for (&(i, j), &v) in &self.quadratic {
            if bits[i] && bits[j] {
                e += v;
            }
        }
        Ok(e)
    }

    /// Writes the text form: `offset <v>`, then `lin <i> <v>` lines, then
    /// `quad <i> <j> <v>` lines, indices ascending.
    pub fn export_text(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "offset {}", self.offset)?;
        for (&i, &v) in &self.linear {
            writeln!(w, "lin {i} {v}")?;
        }
        for (&(i, j), &v) in &self.quadratic {
            writeln!(w, "quad {i} {j} {v}")?;
        }
        Ok(())
    }
}

/// Evaluates a QUBO on a bit vector (free-function form of
/// [`QuboProblem::energy`]).
pub fn qubo_energy(qubo: &QuboProblem, bits: &[bool]) -> Result<f64> {
    qubo.energy(bits)
}

/// Binary encoding of a label domain `0..D`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BinaryEncoding {
    domain_size: usize,
    width: usize,
}

impl BinaryEncoding {
    pub fn new(domain_size: usize) -> Result<Self> {
        if domain_size < 2 {
            return Err(Error::invalid("encoding domain must have at least 2 values"));
        }
        let width = usize::BITS as usize - (domain_size - 1).leading_zeros() as usize;
        Ok(Self { domain_size, width })
    }

    pub fn domain_size(&self) -> usize {
        self.domain_size
    }

    /// Number of bits per label: `ceil(log2 D)`.
    pub fn width(&self) -> usize {
        self.width
    }

    /// Weight of bit `b`, i.e. `2^b`.
    pub fn bit_weight(&self, b: usize) -> i32 {
        1 << b
    }
}

/// Encodes a label as little-endian bits under the given encoding.
pub fn encode_label(k: i32, enc: &BinaryEncoding) -> Result<Vec<bool>> {
    if k < 0 || k as usize >= enc.domain_size {
        return Err(Error::invalid(format!(
            "label {k} outside encoding domain 0..{}",
            enc.domain_size
        )));
    }
    Ok((0..enc.width).map(|b| (k >> b) & 1 == 1).collect())
}

/// Maps (pixel, bit) to a QUBO variable index and back.
///
/// Variables are laid out pixel-major: `var = pixel * width + bit`, a
/// bijection over `num_pixels * width` variables.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VarLayout {
    num_pixels: usize,
    bits_per_pixel: usize,
}

impl VarLayout {
    pub fn new(num_pixels: usize, bits_per_pixel: usize) -> Self {
        Self { num_pixels, bits_per_pixel }
    }

    pub fn num_pixels(&self) -> usize {
        self.num_pixels
    }

    pub fn bits_per_pixel(&self) -> usize {
        self.bits_per_pixel
    }

    pub fn num_vars(&self) -> usize {
        self.num_pixels * self.bits_per_pixel
    }

    pub fn var_index(&self, pixel: usize, bit: usize) -> usize {
        debug_assert!(pixel < self.num_pixels && bit < self.bits_per_pixel);
        pixel * self.bits_per_pixel + bit
    }

    pub fn pixel_bit(&self, var: usize) -> (usize, usize) {
        debug_assert!(var < self.num_vars());
        (var / self.bits_per_pixel, var % self.bits_per_pixel)
    }
}

/// Expands quadratic integer terms over an arbitrary node set into QUBO
/// coefficients. Shared by the pixel-level and super-pixel problems.
///
/// Each edge contributes `W * (k_t - k_s - a)^2` and each node
/// `w * (k - bias)^2`, with every `k` replaced by its binary expansion.
pub(crate) fn expand_terms(
    num_nodes: usize,
    edges: &[Edge],
    unary: &[UnaryTerm],
    enc: &BinaryEncoding,
) -> (QuboProblem, VarLayout) {
    let layout = VarLayout::new(num_nodes, enc.width());
    let mut qubo = QuboProblem::new(layout.num_vars());

    // (sum_i c_i x_i - a)^2 = sum_i c_i^2 x_i + 2 sum_{i<j} c_i c_j x_i x_j
    //                         - 2a sum_i c_i x_i + a^2
    let mut vars: Vec<(usize, f64)> = Vec::with_capacity(2 * enc.width());
    let emit = |qubo: &mut QuboProblem, vars: &[(usize, f64)], a: f64, weight: f64| {
        if weight == 0.0 {
            return;
        }
        for (p, &(i, ci)) in vars.iter().enumerate() {
            qubo.add_linear(i, weight * (ci * ci - 2.0 * a * ci));
            for &(j, cj) in &vars[p + 1..] {
                qubo.add_quadratic(i, j, 2.0 * weight * ci * cj);
            }
        }
        qubo.add_offset(weight * a * a);
    };

    for e in edges {
        vars.clear();
        for b in 0..enc.width() {
            vars.push((layout.var_index(e.t, b), f64::from(enc.bit_weight(b))));
        }
        for b in 0..enc.width() {
            vars.push((layout.var_index(e.s, b), -f64::from(enc.bit_weight(b))));
        }
        emit(&mut qubo, &vars, f64::from(e.constant), e.weight);
    }
    for (node, u) in unary.iter().enumerate() {
        vars.clear();
        for b in 0..enc.width() {
            vars.push((layout.var_index(node, b), f64::from(enc.bit_weight(b))));
        }
        emit(&mut qubo, &vars, f64::from(u.bias), u.weight);
    }
    qubo.prune_zeros();
    (qubo, layout)
}

/// Binarizes the quadratic unwrapping energy of `problem` into a QUBO.
pub fn build_qubo(problem: &UnwrapProblem) -> Result<(QuboProblem, VarLayout)> {
    let enc = BinaryEncoding::new(problem.domain_size())?;
    Ok(expand_terms(problem.num_pixels(), problem.edges(), problem.unary(), &enc))
}

/// Labels decoded from a solver bit vector.
#[derive(Debug, Clone)]
pub struct DecodedLabels {
    pub labels: LabelGrid,
    /// Codewords above `D - 1` (possible when `D` is not a power of two)
    /// that were clamped down.
    pub clamped: usize,
}

/// Decodes a bit vector into a label grid of the given shape, clamping
/// out-of-domain codewords to `D - 1`.
pub fn decode_solution(
    bits: &[bool],
    layout: &VarLayout,
    enc: &BinaryEncoding,
    width: usize,
    height: usize,
) -> Result<DecodedLabels> {
    if bits.len() != layout.num_vars() {
        return Err(Error::invalid(format!(
            "bit vector length {} does not match layout with {} variables",
            bits.len(),
            layout.num_vars()
        )));
    }
    if width * height != layout.num_pixels() {
        return Err(Error::invalid(format!(
            "shape {width}x{height} does not match layout with {} pixels",
            layout.num_pixels()
        )));
    }
    let max = enc.domain_size() as i32 - 1;
    let mut clamped = 0;
    let mut labels = Vec::with_capacity(layout.num_pixels());
    for pixel in 0..layout.num_pixels() {
        let mut k = 0;
        for b in 0..layout.bits_per_pixel() {
            if bits[layout.var_index(pixel, b)] {
                k += enc.bit_weight(b);
            }
        }
        if k > max {
            k = max;
            clamped += 1;
        }
        labels.push(k);
    }
    Ok(DecodedLabels {
        labels: LabelGrid::new(width, height, labels, enc.domain_size())?,
        clamped,
    })
}
