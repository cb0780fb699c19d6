//! Grid-sampled integral kernels `K(x, y)` representing states on the line,
//! and spectrally-accurate moment extraction from them.
//!
//! Position moments are quadratures of the diagonal. Momentum moments come
//! from the translation autocorrelation `A(u) = int K(y + u, y) dy`:
//! `<p> = -i A'(0)` and `<p^2> = -A''(0)`, with the derivatives taken by
//! 8th-order central stencils on the grid spacing.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::grid::Grid;
use crate::error::{Error, Result};

/// Grid-level tolerance: discretization noise allowance for trace, PSD and
/// closed-form comparisons.
pub const TOL_GRID: f64 = 1e-6;

/// 8th-order central first-derivative stencil, offsets -4..=4, divide by dx.
const D1_8: [f64; 9] = [
    1.0 / 280.0,
    -4.0 / 105.0,
    1.0 / 5.0,
    -4.0 / 5.0,
    0.0,
    4.0 / 5.0,
    -1.0 / 5.0,
    4.0 / 105.0,
    -1.0 / 280.0,
];

/// 8th-order central second-derivative stencil, offsets -4..=4, divide by dx^2.
const D2_8: [f64; 9] = [
    -1.0 / 560.0,
    8.0 / 315.0,
    -1.0 / 5.0,
    8.0 / 5.0,
    -205.0 / 72.0,
    8.0 / 5.0,
    -1.0 / 5.0,
    8.0 / 315.0,
    -1.0 / 560.0,
];

/// First derivative at the center of 9 equally spaced samples.
pub(crate) fn stencil_d1(samples: &[C64; 9], dx: f64) -> C64 {
    let mut acc = C64::new(0.0, 0.0);
    for (c, s) in D1_8.iter().zip(samples) {
        acc += *s * *c;
    }
    acc / dx
}

/// Second derivative at the center of 9 equally spaced samples.
pub(crate) fn stencil_d2(samples: &[C64; 9], dx: f64) -> C64 {
    let mut acc = C64::new(0.0, 0.0);
    for (c, s) in D2_8.iter().zip(samples) {
        acc += *s * *c;
    }
    acc / (dx * dx)
}

/// A state on the line sampled as `K[i, j] = K(x_i, x_j)`, hermitian,
/// unit-trace and positive under the grid quadrature.
#[derive(Clone, Debug)]
pub struct KernelState {
    grid: Grid,
    k: DMatrix<C64>,
}

impl KernelState {
    /// Validates hermiticity, unit trace, and positivity of the
    /// quadrature-weighted matrix `W^1/2 K W^1/2` (via a shifted Cholesky).
    pub fn new(grid: Grid, k: DMatrix<C64>) -> Result<Self> {
        let n = grid.len();
        if k.nrows() != n || k.ncols() != n {
            return Err(Error::DimensionMismatch {
                left: k.nrows().max(k.ncols()),
                right: n,
            });
        }
        let scale = k.iter().map(|c| c.norm()).fold(0.0, f64::max).max(1.0);
        let herm = (&k - k.adjoint())
            .iter()
            .map(|c| c.norm())
            .fold(0.0, f64::max);
        if herm > 1e-8 * scale {
            return Err(Error::NotHermitian {
                defect: herm,
                tol: 1e-8 * scale,
            });
        }
        let state = Self { grid, k };
        let trace_defect = (state.trace() - 1.0).abs();
        if trace_defect > TOL_GRID {
            return Err(Error::NotUnitTrace {
                defect: trace_defect,
                tol: TOL_GRID,
            });
        }
        // W^1/2 K W^1/2 + tol*I must admit a Cholesky factorization, which is
        // exactly "smallest eigenvalue above -tol".
        let mut weighted = state.k.clone();
        for i in 0..n {
            let wi = state.grid.weight(i).sqrt();
            for j in 0..n {
                let wj = state.grid.weight(j).sqrt();
                weighted[(i, j)] *= C64::new(wi * wj, 0.0);
            }
        }
        for i in 0..n {
            weighted[(i, i)] += C64::new(TOL_GRID, 0.0);
        }
        if weighted.cholesky().is_none() {
            return Err(Error::NotPositiveSemidefinite {
                min_eig: f64::NAN,
                tol: TOL_GRID,
            });
        }
        Ok(state)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn kernel(&self) -> &DMatrix<C64> {
        &self.k
    }

    pub fn value(&self, i: usize, j: usize) -> C64 {
        self.k[(i, j)]
    }

    /// `Tr(rho) = int K(x, x) dx`.
    pub fn trace(&self) -> f64 {
        (0..self.grid.len())
            .map(|i| self.grid.weight(i) * self.k[(i, i)].re)
            .sum()
    }

    /// `Tr(rho^2) = int int |K(x, y)|^2 dx dy`.
    pub fn purity(&self) -> f64 {
        let n = self.grid.len();
        let mut acc = 0.0;
        for i in 0..n {
            let wi = self.grid.weight(i);
            for j in 0..n {
                acc += wi * self.grid.weight(j) * self.k[(i, j)].norm_sqr();
            }
        }
        acc
    }

    /// Position moment `<x^m> = int x^m K(x, x) dx`.
    pub fn x_moment(&self, m: u32) -> f64 {
        (0..self.grid.len())
            .map(|i| {
                let x = self.grid.point(i);
                self.grid.weight(i) * x.powi(m as i32) * self.k[(i, i)].re
            })
            .sum()
    }

    pub fn x_mean(&self) -> f64 {
        self.x_moment(1)
    }

    pub fn x_var(&self) -> f64 {
        let m = self.x_mean();
        self.x_moment(2) - m * m
    }

    /// Translation autocorrelation `A(m dx) = sum_j w_j K[j + m, j]` for
    /// `m = -4..=4`; the only samples the momentum stencils need.
    pub(crate) fn autocorr_near_zero(&self) -> [C64; 9] {
        let n = self.grid.len() as i64;
        let mut out = [C64::new(0.0, 0.0); 9];
        for (slot, m) in (-4i64..=4).enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for j in 0..n {
                let i = j + m;
                if i < 0 || i >= n {
                    continue;
                }
                acc += self.k[(i as usize, j as usize)] * self.grid.weight(j as usize);
            }
            out[slot] = acc;
        }
        out
    }

    /// `<p> = -i A'(0)`.
    pub fn p_mean(&self) -> f64 {
        let a = self.autocorr_near_zero();
        (-C64::i() * stencil_d1(&a, self.grid.dx())).re
    }

    /// `<p^2> = -A''(0)`.
    pub fn p_moment2(&self) -> f64 {
        let a = self.autocorr_near_zero();
        (-stencil_d2(&a, self.grid.dx())).re
    }

    pub fn p_var(&self) -> f64 {
        let m = self.p_mean();
        self.p_moment2() - m * m
    }
}

#[derive(Serialize, Deserialize)]
struct KernelRepr {
    x_min: f64,
    x_max: f64,
    n: usize,
    re: Vec<f64>,
    im: Vec<f64>,
}

impl Serialize for KernelState {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let n = self.grid.len();
        let mut re = Vec::with_capacity(n * n);
        let mut im = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                re.push(self.k[(i, j)].re);
                im.push(self.k[(i, j)].im);
            }
        }
        KernelRepr {
            x_min: self.grid.x_min(),
            x_max: self.grid.x_max(),
            n,
            re,
            im,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for KernelState {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = KernelRepr::deserialize(deserializer)?;
        if repr.re.len() != repr.n * repr.n || repr.im.len() != repr.n * repr.n {
            return Err(serde::de::Error::custom("kernel payload size mismatch"));
        }
        let grid = Grid::new(repr.x_min, repr.x_max, repr.n).map_err(serde::de::Error::custom)?;
        let k = DMatrix::from_fn(repr.n, repr.n, |i, j| {
            C64::new(repr.re[i * repr.n + j], repr.im[i * repr.n + j])
        });
        KernelState::new(grid, k).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cv::ops::gaussian_state;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    #[test]
    fn stencils_differentiate_a_plane_wave() {
        let dx = 0.05;
        let k = 1.7;
        let mut samples = [C64::new(0.0, 0.0); 9];
        for (slot, m) in (-4i32..=4).enumerate() {
            samples[slot] = (C64::i() * k * (m as f64 * dx)).exp();
        }
        let d1 = stencil_d1(&samples, dx);
        assert_abs_diff_eq!(d1.im, k, epsilon = 1e-10);
        let d2 = stencil_d2(&samples, dx);
        assert_abs_diff_eq!(d2.re, -k * k, epsilon = 1e-9);
    }

    #[test]
    fn gaussian_state_moments_are_reproduced() {
        let grid = Grid::symmetric(8.0, 512).unwrap();
        let state = gaussian_state(&grid, 0.3, 0.9, 0.5).unwrap();
        assert_abs_diff_eq!(state.trace(), 1.0, epsilon = 1e-10);
        assert_relative_eq!(state.x_var(), 0.5, max_relative = 1e-9);
        assert_abs_diff_eq!(state.x_mean(), 0.3, epsilon = 1e-9);
        assert_abs_diff_eq!(state.p_mean(), 0.9, epsilon = 1e-8);
        assert_relative_eq!(state.p_var(), 0.5, max_relative = 1e-8);
        assert_abs_diff_eq!(state.purity(), 1.0, epsilon = 1e-9);
    }

    #[test]
    fn validation_rejects_a_broken_kernel() {
        let grid = Grid::symmetric(4.0, 32).unwrap();
        // Non-hermitian.
        let k = DMatrix::from_fn(32, 32, |i, j| C64::new((i + 2 * j) as f64, 0.0));
        assert!(KernelState::new(grid, k).is_err());
        // Hermitian but wrong trace.
        let k = DMatrix::from_diagonal_element(32, 32, C64::new(1.0, 0.0));
        assert!(matches!(
            KernelState::new(grid, k),
            Err(Error::NotUnitTrace { .. })
        ));
    }

    #[test]
    fn serde_round_trip() {
        let grid = Grid::symmetric(6.0, 64).unwrap();
        let state = gaussian_state(&grid, 0.0, 0.0, 0.4).unwrap();
        let text = serde_json::to_string(&state).unwrap();
        let back: KernelState = serde_json::from_str(&text).unwrap();
        assert_eq!(back.grid().len(), 64);
        let mut max = 0.0f64;
        for i in 0..64 {
            for j in 0..64 {
                max = max.max((back.value(i, j) - state.value(i, j)).norm());
            }
        }
        assert!(max < 1e-15);
    }
}
