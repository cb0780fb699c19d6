//! Uniform spatial grid with trapezoidal quadrature.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform grid on `[x_min, x_max]` with `n` points; integrals are trapezoid
/// sums over the nodes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    x_min: f64,
    x_max: f64,
    n: usize,
}

impl Grid {
    pub fn new(x_min: f64, x_max: f64, n: usize) -> Result<Self> {
        if n < 16 {
            return Err(Error::GridTooCoarse {
                reason: format!("need at least 16 points, got {n}"),
            });
        }
        if x_max.partial_cmp(&x_min) != Some(std::cmp::Ordering::Greater) {
            return Err(Error::OutOfRange {
                name: "x_max",
                value: x_max,
                min: x_min,
                max: f64::INFINITY,
            });
        }
        Ok(Self { x_min, x_max, n })
    }

    /// Grid symmetric about zero with half-span `half_span`.
    pub fn symmetric(half_span: f64, n: usize) -> Result<Self> {
        Self::new(-half_span, half_span, n)
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / (self.n - 1) as f64
    }

    pub fn span(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn point(&self, i: usize) -> f64 {
        self.x_min + self.dx() * i as f64
    }

    /// Trapezoid weight of node `i`.
    pub fn weight(&self, i: usize) -> f64 {
        if i == 0 || i == self.n - 1 {
            0.5 * self.dx()
        } else {
            self.dx()
        }
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(move |i| self.point(i))
    }

    /// Momentum cutoff representable on the grid.
    pub fn nyquist(&self) -> f64 {
        std::f64::consts::PI / self.dx()
    }

    /// Same span, twice the resolution (`dx` exactly halves).
    pub fn refined(&self) -> Self {
        Self {
            x_min: self.x_min,
            x_max: self.x_max,
            n: 2 * self.n - 1,
        }
    }

    /// Twice the span at the same `dx`.
    pub fn widened(&self) -> Self {
        let half = 0.5 * self.span();
        Self {
            x_min: self.x_min - half,
            x_max: self.x_max + half,
            n: 2 * self.n - 1,
        }
    }
}

/// How operations that build their own grids size them: `n` points over
/// `[-L, L]` with `L = span_factor * max(characteristic widths)`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct GridSpec {
    pub n: usize,
    pub span_factor: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            n: 512,
            span_factor: 8.0,
        }
    }
}

impl GridSpec {
    /// Symmetric grid wide enough for every listed width.
    pub fn grid_for(&self, widths: &[f64]) -> Result<Grid> {
        let max = widths.iter().fold(0.0f64, |m, w| m.max(w.abs()));
        if max <= 0.0 {
            return Err(Error::OutOfRange {
                name: "characteristic width",
                value: max,
                min: f64::MIN_POSITIVE,
                max: f64::INFINITY,
            });
        }
        Grid::symmetric(self.span_factor * max, self.n)
    }
}
