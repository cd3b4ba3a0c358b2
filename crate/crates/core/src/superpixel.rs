//! Two-phase decomposition: unwrap tiles independently, then solve a small
//! QUBO over one integer offset per tile and stitch.
//!
//! Splitting the pixel energy over a tiling leaves intra-tile terms plus the
//! boundary terms that couple tiles. After the tile solves fix labels
//! `k'`, each boundary residual depends only on the tile offsets:
//! `W (K_i - K_j - a')^2` with `a' = a_st - (k'_t - k'_s)` an exact integer.
//! The offsets form a second unwrap-shaped problem over the tile graph,
//! solved with the same machinery and re-centered before stitching.

use crate::error::{Error, Result};
use crate::grid::{GridKind, LabelGrid, PhaseGrid};
use crate::phase::{
    apply_labels, build_problem, energy_l2_raw, Edge, EnergyBreakdown, UnaryTerm, UnwrapProblem,
    WeightPolicy,
};
use crate::qubo::{build_qubo, decode_solution, expand_terms, BinaryEncoding, QuboProblem, VarLayout};
use crate::rng::{derive_seed, domain};
use crate::solvers::{SolveReport, SolverConfig, SolverKind};
use rayon::prelude::*;

/// Bounding box of one tile.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Tile {
    pub x0: usize,
    pub y0: usize,
    pub width: usize,
    pub height: usize,
}

impl Tile {
    pub fn num_pixels(&self) -> usize {
        self.width * self.height
    }

    pub fn contains(&self, row: usize, col: usize) -> bool {
        row >= self.y0 && row < self.y0 + self.height && col >= self.x0 && col < self.x0 + self.width
    }
}

/// A partition of the pixel grid into rectangular tiles, with the parent
/// edges that cross tile boundaries.
#[derive(Debug, Clone)]
pub struct Tiling {
    grid_width: usize,
    grid_height: usize,
    tiles_x: usize,
    tiles: Vec<Tile>,
    tile_width: usize,
    tile_height: usize,
    boundary_edges: Vec<(usize, usize)>,
}

impl Tiling {
    pub fn num_tiles(&self) -> usize {
        self.tiles.len()
    }

    pub fn tiles(&self) -> &[Tile] {
        &self.tiles
    }

    pub fn grid_width(&self) -> usize {
        self.grid_width
    }

    pub fn grid_height(&self) -> usize {
        self.grid_height
    }

    /// Parent `(s, t)` pixel pairs whose endpoints lie in different tiles,
    /// in canonical edge order.
    pub fn boundary_edges(&self) -> &[(usize, usize)] {
        &self.boundary_edges
    }

    /// Index of the tile containing a pixel.
    pub fn tile_of(&self, pixel: usize) -> usize {
        let row = pixel / self.grid_width;
        let col = pixel % self.grid_width;
        (row / self.tile_height) * self.tiles_x + col / self.tile_width
    }

    /// Local row-major index of a parent pixel within its tile.
    pub fn local_index(&self, pixel: usize) -> usize {
        let row = pixel / self.grid_width;
        let col = pixel % self.grid_width;
        let tile = &self.tiles[self.tile_of(pixel)];
        (row - tile.y0) * tile.width + (col - tile.x0)
    }
}

/// Partitions a `width` x `height` grid into `tile_w` x `tile_h` tiles in
/// row-major tile order; right and bottom remainder tiles may be smaller.
pub fn make_tiling(width: usize, height: usize, tile_w: usize, tile_h: usize) -> Result<Tiling> {
    if tile_w < 2 || tile_h < 2 {
        return Err(Error::invalid("tile dimensions must be at least 2"));
    }
    if width < tile_w || height < tile_h {
        return Err(Error::invalid(format!(
            "grid {width}x{height} smaller than tile {tile_w}x{tile_h}"
        )));
    }
    let tiles_x = width.div_ceil(tile_w);
    let tiles_y = height.div_ceil(tile_h);
    let mut tiles = Vec::with_capacity(tiles_x * tiles_y);
    for ty in 0..tiles_y {
        for tx in 0..tiles_x {
            let x0 = tx * tile_w;
            let y0 = ty * tile_h;
            tiles.push(Tile {
                x0,
                y0,
                width: tile_w.min(width - x0),
                height: tile_h.min(height - y0),
            });
        }
    }
    let tiling = Tiling {
        grid_width: width,
        grid_height: height,
        tiles_x,
        tiles,
        tile_width: tile_w,
        tile_height: tile_h,
        boundary_edges: Vec::new(),
    };
    let mut boundary = Vec::new();
    for row in 0..height {
        for col in 0..width {
            let s = row * width + col;
            if col + 1 < width && tiling.tile_of(s) != tiling.tile_of(s + 1) {
                boundary.push((s, s + 1));
            }
            if row + 1 < height && tiling.tile_of(s) != tiling.tile_of(s + width) {
                boundary.push((s, s + width));
            }
        }
    }
    Ok(Tiling { boundary_edges: boundary, ..tiling })
}

/// Extracts the sub-problem of one tile: exactly the parent's intra-tile
/// edges and unary terms, reindexed to tile-local coordinates.
pub fn restrict_problem(
    parent: &UnwrapProblem,
    tiling: &Tiling,
    tile_index: usize,
) -> Result<UnwrapProblem> {
    if parent.width() != tiling.grid_width || parent.height() != tiling.grid_height {
        return Err(Error::invalid("tiling does not match the problem dimensions"));
    }
    let tile = *tiling.tiles.get(tile_index).ok_or_else(|| {
        Error::invalid(format!("tile index {tile_index} out of range"))
    })?;
    let mut edges = Vec::new();
    for e in parent.edges() {
        if tiling.tile_of(e.s) == tile_index && tiling.tile_of(e.t) == tile_index {
            edges.push(Edge {
                s: tiling.local_index(e.s),
                t: tiling.local_index(e.t),
                constant: e.constant,
                weight: e.weight,
            });
        }
    }
    let mut unary = Vec::with_capacity(tile.num_pixels());
    for row in tile.y0..tile.y0 + tile.height {
        for col in tile.x0..tile.x0 + tile.width {
            unary.push(parent.unary()[row * parent.width() + col]);
        }
    }
    UnwrapProblem::new(tile.width, tile.height, edges, unary, parent.domain_size())
}

/// One boundary-edge term of the offset problem:
/// `weight * (K_tile_t - K_tile_s - constant)^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuperEdge {
    pub tile_s: usize,
    pub tile_t: usize,
    /// `a' = a_st - (k'_t - k'_s)`, an exact integer.
    pub constant: i32,
    pub weight: f64,
}

/// The offset problem: one integer variable `K_g` per tile.
#[derive(Debug, Clone)]
pub struct SuperpixelProblem {
    num_tiles: usize,
    edges: Vec<SuperEdge>,
    unary: Vec<UnaryTerm>,
    offset_domain: usize,
}

impl SuperpixelProblem {
    pub fn new(
        num_tiles: usize,
        edges: Vec<SuperEdge>,
        unary: Vec<UnaryTerm>,
        offset_domain: usize,
    ) -> Result<Self> {
        if num_tiles == 0 || unary.len() != num_tiles {
            return Err(Error::invalid("unary term count must match the tile count"));
        }
        if offset_domain < 2 {
            return Err(Error::invalid("offset domain must have at least 2 values"));
        }
        if edges.iter().any(|e| e.tile_s >= num_tiles || e.tile_t >= num_tiles) {
            return Err(Error::invalid("super-pixel edge out of range"));
        }
        Ok(Self { num_tiles, edges, unary, offset_domain })
    }

    pub fn num_tiles(&self) -> usize {
        self.num_tiles
    }

    pub fn edges(&self) -> &[SuperEdge] {
        &self.edges
    }

    pub fn unary(&self) -> &[UnaryTerm] {
        &self.unary
    }

    pub fn offset_domain(&self) -> usize {
        self.offset_domain
    }

    /// Evaluates the offset objective for signed offsets `K`.
    pub fn energy(&self, offsets: &[i32]) -> Result<EnergyBreakdown> {
        if offsets.len() != self.num_tiles {
            return Err(Error::invalid("offset count must match the tile count"));
        }
        let mut pairwise = 0.0;
        for e in &self.edges {
            let r = f64::from(offsets[e.tile_t] - offsets[e.tile_s] - e.constant);
            pairwise += e.weight * r * r;
        }
        let mut unary = 0.0;
        for (u, &k) in self.unary.iter().zip(offsets) {
            let r = f64::from(k - u.bias);
            unary += u.weight * r * r;
        }
        Ok(EnergyBreakdown { pairwise, unary, total: pairwise + unary })
    }
}

/// Builds the offset problem from solved tile labels. Each parent boundary
/// edge `(s, t)` becomes a term between `tile_of(s)` and `tile_of(t)` with
/// constant `a_st - (k'_t - k'_s)`; each tile gets a weak zero-bias unary
/// term. The offset domain is `2 * D` so offsets can both raise and lower
/// tiles after re-centering.
pub fn build_superpixel_problem(
    parent: &UnwrapProblem,
    tiling: &Tiling,
    tile_labels: &[LabelGrid],
) -> Result<SuperpixelProblem> {
    if tile_labels.len() != tiling.num_tiles() {
        return Err(Error::InvalidState(format!(
            "{} tile solutions for {} tiles",
            tile_labels.len(),
            tiling.num_tiles()
        )));
    }
    for (i, (labels, tile)) in tile_labels.iter().zip(&tiling.tiles).enumerate() {
        if labels.width() != tile.width || labels.height() != tile.height {
            return Err(Error::InvalidState(format!(
                "tile {i} labels are {}x{}, tile is {}x{}",
                labels.width(),
                labels.height(),
                tile.width,
                tile.height
            )));
        }
    }
    let mut edges = Vec::new();
    for e in parent.edges() {
        let (ts, tt) = (tiling.tile_of(e.s), tiling.tile_of(e.t));
        if ts == tt {
            continue;
        }
        let k_s = tile_labels[ts].labels()[tiling.local_index(e.s)];
        let k_t = tile_labels[tt].labels()[tiling.local_index(e.t)];
        edges.push(SuperEdge {
            tile_s: ts,
            tile_t: tt,
            constant: e.constant - (k_t - k_s),
            weight: e.weight,
        });
    }
    // One bias per tile (A_g = 0), with the parent's uniform unary weight.
    let omega =
        parent.unary().first().map_or(crate::phase::DEFAULT_UNARY_WEIGHT, |u| u.weight);
    let unary = vec![UnaryTerm { weight: omega, bias: 0 }; tiling.num_tiles()];
    SuperpixelProblem::new(tiling.num_tiles(), edges, unary, 2 * parent.domain_size())
}

/// Binarizes the offset problem. Offsets are shifted by `D` (half the offset
/// domain) to nonnegative codewords before encoding; differences are
/// shift-invariant, and the unary bias absorbs the shift. Returns the QUBO,
/// its layout and the shift to subtract after decoding.
pub fn build_offset_qubo(sp: &SuperpixelProblem) -> Result<(QuboProblem, VarLayout, i32)> {
    let enc = BinaryEncoding::new(sp.offset_domain)?;
    let shift = (sp.offset_domain / 2) as i32;
    let edges: Vec<Edge> = sp
        .edges
        .iter()
        .map(|e| Edge { s: e.tile_s, t: e.tile_t, constant: e.constant, weight: e.weight })
        .collect();
    let unary: Vec<UnaryTerm> =
        sp.unary.iter().map(|u| UnaryTerm { weight: u.weight, bias: u.bias + shift }).collect();
    let (qubo, layout) = expand_terms(sp.num_tiles, &edges, &unary, &enc);
    Ok((qubo, layout, shift))
}

/// Global labels after stitching, with the number of clamped pixels.
#[derive(Debug, Clone)]
pub struct StitchOutcome {
    pub labels: LabelGrid,
    pub clamped: usize,
}

fn stitch_raw(tiling: &Tiling, tile_labels: &[LabelGrid], offsets: &[i32]) -> Vec<i32> {
    let n = tiling.grid_width * tiling.grid_height;
    (0..n)
        .map(|pixel| {
            let tile = tiling.tile_of(pixel);
            tile_labels[tile].labels()[tiling.local_index(pixel)] + offsets[tile]
        })
        .collect()
}

/// Combines tile labels with per-tile offsets: `k_i = k'_i + K_tile(i)`.
/// Offsets are first re-centered by subtracting their minimum; labels that
/// still leave `0..parent_domain` are clamped and counted.
pub fn stitch(
    tiling: &Tiling,
    tile_labels: &[LabelGrid],
    offsets: &[i32],
    parent_domain: usize,
) -> Result<StitchOutcome> {
    if tile_labels.len() != tiling.num_tiles() || offsets.len() != tiling.num_tiles() {
        return Err(Error::invalid("tile label and offset counts must match the tiling"));
    }
    let min = offsets.iter().copied().min().unwrap_or(0);
    let normalized: Vec<i32> = offsets.iter().map(|&k| k - min).collect();
    let raw = stitch_raw(tiling, tile_labels, &normalized);
    let max = parent_domain as i32 - 1;
    let mut clamped = 0;
    let labels: Vec<i32> = raw
        .into_iter()
        .map(|k| {
            let c = k.clamp(0, max);
            if c != k {
                clamped += 1;
            }
            c
        })
        .collect();
    Ok(StitchOutcome {
        labels: LabelGrid::new(tiling.grid_width, tiling.grid_height, labels, parent_domain)?,
        clamped,
    })
}

/// Full two-phase run: per-tile solves, offset solve, stitch, diagnostics.
#[derive(Debug, Clone)]
pub struct PipelineReport {
    pub tile_reports: Vec<SolveReport>,
    pub superpixel_report: SolveReport,
    /// Tile-local labels as decoded from the tile solves.
    pub tile_labels: Vec<LabelGrid>,
    /// Re-centered per-tile offsets applied by the stitch.
    pub offsets: Vec<i32>,
    pub labels: LabelGrid,
    pub unwrapped: PhaseGrid,
    /// Final labeling scored under the parent problem.
    pub energy: EnergyBreakdown,
    /// Out-of-domain codewords clamped while decoding solver bits.
    pub decode_clamped: usize,
    /// Pixels clamped into the parent domain by the stitch.
    pub stitch_clamped: usize,
}

/// Unwraps a grid with the two-phase super-pixel pipeline.
///
/// Tile solves draw RNG streams derived from `(seed, tile_index)` and may run
/// in parallel; outputs are identical for any thread count. A tiling equal to
/// the whole image degenerates to a single-shot solve.
pub fn unwrap_superpixel(
    wrapped: &PhaseGrid,
    policy: &WeightPolicy,
    domain_size: usize,
    tile_w: usize,
    tile_h: usize,
    solver: SolverKind,
    config: &SolverConfig,
) -> Result<PipelineReport> {
    if wrapped.kind() != GridKind::Wrapped {
        return Err(Error::invalid("unwrap_superpixel expects a wrapped grid"));
    }
    let parent = build_problem(wrapped, policy, domain_size)?;
    let tiling = make_tiling(wrapped.width(), wrapped.height(), tile_w, tile_h)?;
    let enc = BinaryEncoding::new(domain_size)?;

    let tile_outcomes: Vec<Result<(SolveReport, LabelGrid, usize)>> = (0..tiling.num_tiles())
        .into_par_iter()
        .map(|i| {
            let sub = restrict_problem(&parent, &tiling, i)?;
            let (qubo, layout) = build_qubo(&sub)?;
            let tile_config = SolverConfig {
                seed: derive_seed(config.seed, domain::TILE, i as u64),
                ..config.clone()
            };
            let report = solver.solve(&qubo, &tile_config)?;
            let decoded =
                decode_solution(&report.best_bits, &layout, &enc, sub.width(), sub.height())?;
            Ok((report, decoded.labels, decoded.clamped))
        })
        .collect();

    let mut tile_reports = Vec::with_capacity(tiling.num_tiles());
    let mut tile_labels = Vec::with_capacity(tiling.num_tiles());
    let mut decode_clamped = 0;
    for outcome in tile_outcomes {
        let (report, labels, clamped) = outcome?;
        tile_reports.push(report);
        tile_labels.push(labels);
        decode_clamped += clamped;
    }

    let sp = build_superpixel_problem(&parent, &tiling, &tile_labels)?;
    let (offset_qubo, offset_layout, shift) = build_offset_qubo(&sp)?;
    let offset_config = SolverConfig {
        seed: derive_seed(config.seed, domain::SUPERPIXEL, 0),
        ..config.clone()
    };
    let superpixel_report = solver.solve(&offset_qubo, &offset_config)?;
    let offset_enc = BinaryEncoding::new(sp.offset_domain())?;
    let decoded_offsets = decode_solution(
        &superpixel_report.best_bits,
        &offset_layout,
        &offset_enc,
        sp.num_tiles(),
        1,
    )?;
    decode_clamped += decoded_offsets.clamped;
    let offsets: Vec<i32> = decoded_offsets.labels.labels().iter().map(|&o| o - shift).collect();

    let stitched = stitch(&tiling, &tile_labels, &offsets, domain_size)?;
    let unwrapped = apply_labels(wrapped, &stitched.labels)?;
    let energy = energy_l2_raw(&parent, stitched.labels.labels());

    let min = offsets.iter().copied().min().unwrap_or(0);
    Ok(PipelineReport {
        tile_reports,
        superpixel_report,
        tile_labels,
        offsets: offsets.iter().map(|&k| k - min).collect(),
        labels: stitched.labels,
        unwrapped,
        energy,
        decode_clamped,
        stitch_clamped: stitched.clamped,
    })
}
