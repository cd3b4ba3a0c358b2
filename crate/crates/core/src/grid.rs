//! Dense row-major grids for phases and integer labels.

use crate::error::{Error, Result};
use std::f64::consts::PI;

/// Slack accepted around the wrapped interval (-pi, pi] so that values that
/// round-tripped through binary32 storage still validate.
pub(crate) const WRAP_SLACK: f64 = 1e-6;

/// Whether a grid holds wrapped (interval (-pi, pi]) or unwrapped phases.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum GridKind {
    Wrapped,
    Unwrapped,
}

/// A dense 2-D grid of phase values in radians, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseGrid {
    width: usize,
    height: usize,
    values: Vec<f64>,
    kind: GridKind,
}

impl PhaseGrid {
    /// Builds a grid, validating the length and (for wrapped grids) the
    /// value range. All values must be finite.
    pub fn new(width: usize, height: usize, values: Vec<f64>, kind: GridKind) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::invalid("grid dimensions must be nonzero"));
        }
        if values.len() != width * height {
            return Err(Error::invalid(format!(
                "value count {} does not match {width}x{height}",
                values.len()
            )));
        }
        for (i, &v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::invalid(format!("non-finite phase at index {i}")));
            }
            if kind == GridKind::Wrapped && !(v > -PI - WRAP_SLACK && v <= PI + WRAP_SLACK) {
                return Err(Error::invalid(format!(
                    "value {v} at index {i} outside the wrapped interval (-pi, pi]"
                )));
            }
        }
        Ok(Self { width, height, values, kind })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn kind(&self) -> GridKind {
        self.kind
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Row-major pixel index.
    pub fn index(&self, row: usize, col: usize) -> usize {
        row * self.width + col
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[self.index(row, col)]
    }
}

/// A dense 2-D grid of integer ambiguity labels, row-major.
///
/// Every label lies in `0..domain_size`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelGrid {
    width: usize,
    height: usize,
    labels: Vec<i32>,
    domain_size: usize,
}

impl LabelGrid {
    pub fn new(width: usize, height: usize, labels: Vec<i32>, domain_size: usize) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::invalid("grid dimensions must be nonzero"));
        }
        if labels.len() != width * height {
            return Err(Error::invalid(format!(
                "label count {} does not match {width}x{height}",
                labels.len()
            )));
        }
        if domain_size == 0 {
            return Err(Error::invalid("domain size must be at least 1"));
        }
        for (i, &k) in labels.iter().enumerate() {
            if k < 0 || k as usize >= domain_size {
                return Err(Error::invalid(format!(
                    "label {k} at index {i} outside domain 0..{domain_size}"
                )));
            }
        }
        Ok(Self { width, height, labels, domain_size })
    }

    /// All-zero labels.
    pub fn zeros(width: usize, height: usize, domain_size: usize) -> Result<Self> {
        Self::new(width, height, vec![0; width * height], domain_size)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn domain_size(&self) -> usize {
        self.domain_size
    }

    pub fn labels(&self) -> &[i32] {
        &self.labels
    }

    pub fn index(&self, row: usize, col: usize) -> usize {
        row * self.width + col
    }

    pub fn get(&self, row: usize, col: usize) -> i32 {
        self.labels[self.index(row, col)]
    }
}
