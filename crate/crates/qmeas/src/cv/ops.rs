//! Finite-resolution measurements on kernel states: Gaussian state
//! preparation, the position measurement with an arbitrary acceptance
//! profile, the Gaussian momentum measurement, the intrinsic noise of the
//! position POVM, and sharp interval probabilities.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use super::grid::Grid;
use super::kernel::{stencil_d1, stencil_d2, KernelState, TOL_GRID};
use super::profile::AcceptanceProfile;
use crate::error::{Error, Result};

/// Pure Gaussian wave packet with position mean `x_mean`, momentum mean
/// `p_mean` and position variance `var_x` (so `(Delta p)^2 = 1/(4 var_x)`).
pub fn gaussian_state(grid: &Grid, x_mean: f64, p_mean: f64, var_x: f64) -> Result<KernelState> {
    if var_x.is_nan() || var_x <= 0.0 {
        return Err(Error::OutOfRange {
            name: "var_x",
            value: var_x,
            min: f64::MIN_POSITIVE,
            max: f64::INFINITY,
        });
    }
    let width = var_x.sqrt();
    if grid.x_max() - x_mean < 8.0 * width || x_mean - grid.x_min() < 8.0 * width {
        return Err(Error::GridTooNarrow {
            reason: format!(
                "need 8 state widths ({}) of clearance around x = {x_mean} inside [{}, {}]",
                8.0 * width,
                grid.x_min(),
                grid.x_max()
            ),
        });
    }
    if grid.dx() > width / 2.0 {
        return Err(Error::GridTooCoarse {
            reason: format!("dx = {} exceeds half the state width {width}", grid.dx()),
        });
    }
    if grid.nyquist() < 8.0 * (p_mean.abs() + 0.5 / width) {
        return Err(Error::Aliasing {
            reason: format!(
                "momentum content ~{} too close to nyquist {}",
                p_mean.abs() + 0.5 / width,
                grid.nyquist()
            ),
        });
    }
    let norm = (2.0 * std::f64::consts::PI * var_x).powf(-0.25);
    let psi: Vec<C64> = grid
        .points()
        .map(|x| {
            let envelope = norm * (-(x - x_mean).powi(2) / (4.0 * var_x)).exp();
            (C64::i() * p_mean * x).exp() * envelope
        })
        .collect();
    let n = grid.len();
    let k = DMatrix::from_fn(n, n, |i, j| psi[i] * psi[j].conj());
    KernelState::new(*grid, k)
}

/// Result of a finite-resolution position measurement.
#[derive(Clone, Debug)]
pub struct XMeasurement {
    /// Collapsed state, `K(x, y) F(x - y)` with `F` the profile
    /// autocorrelation.
    pub post: KernelState,
    /// Mean of the recorded outcome distribution.
    pub measured_mean: f64,
    /// Variance of the recorded outcome distribution,
    /// `(Delta x)^2_rho + sigma_x^2`.
    pub measured_var: f64,
}

/// Measures position with detector profile `f`. The outcome statistics are
/// evaluated honestly from the POVM densities
/// `P(x0) = int f(x - x0)^2 K(x, x) dx` by double quadrature; the identity
/// `measured variance = state variance + sigma_x^2` is a theorem, not an
/// implementation shortcut.
pub fn measure_x(state: &KernelState, profile: &AcceptanceProfile) -> Result<XMeasurement> {
    let grid = *state.grid();
    let sigma_x = profile.sigma_x_squared()?.sqrt();
    if grid.dx() > sigma_x / 4.0 {
        return Err(Error::GridTooCoarse {
            reason: format!(
                "dx = {} cannot resolve detector width sigma_x = {sigma_x}",
                grid.dx()
            ),
        });
    }
    let n = grid.len();

    // Off-diagonal suppression factor, one value per diagonal offset.
    let autocorr: Vec<f64> = (0..n)
        .map(|m| profile.autocorrelation(m as f64 * grid.dx()))
        .collect();
    let k = DMatrix::from_fn(n, n, |i, j| {
        state.value(i, j) * autocorr[i.abs_diff(j)]
    });
    let post = KernelState::new(grid, k)?;

    // Outcome densities on the same grid of detector positions.
    let diag: Vec<f64> = (0..n).map(|i| grid.weight(i) * state.value(i, i).re).collect();
    let mut total = 0.0;
    let mut mean = 0.0;
    let mut second = 0.0;
    for m in 0..n {
        let x0 = grid.point(m);
        let mut p = 0.0;
        for (i, d) in diag.iter().enumerate() {
            if *d == 0.0 {
                continue;
            }
            p += profile.eval(grid.point(i) - x0).powi(2) * d;
        }
        let w = grid.weight(m) * p;
        total += w;
        mean += w * x0;
        second += w * x0 * x0;
    }
    if (total - 1.0).abs() > TOL_GRID {
        return Err(Error::GridTooNarrow {
            reason: format!(
                "outcome density integrates to {total}; detector mass escapes the grid"
            ),
        });
    }
    let measured_mean = mean / total;
    let measured_var = second / total - measured_mean * measured_mean;
    Ok(XMeasurement {
        post,
        measured_mean,
        measured_var,
    })
}

/// Gaussian smear along the main diagonal: `K'(x, y) = (2 pi v)^{-1/2}
/// int du exp(-u^2 / 2v) K(x + u, y + u)`, evaluated on grid multiples so no
/// interpolation enters.
pub(crate) fn diagonal_gaussian_smear(
    state: &KernelState,
    smear_var: f64,
) -> Result<DMatrix<C64>> {
    let grid = *state.grid();
    let n = grid.len() as i64;
    let dx = grid.dx();
    let cut = 8.5 * smear_var.sqrt();
    let m_cut = ((cut / dx).ceil() as i64).min(n - 1);
    let state_width = state.x_var().max(0.0).sqrt();
    if cut + 8.0 * state_width > grid.span() {
        return Err(Error::GridTooNarrow {
            reason: format!(
                "smear reach {cut} plus state support exceeds the grid span {}",
                grid.span()
            ),
        });
    }
    let norm = 1.0 / (2.0 * std::f64::consts::PI * smear_var).sqrt();
    let weights: Vec<f64> = (-m_cut..=m_cut)
        .map(|m| {
            let u = m as f64 * dx;
            norm * dx * (-u * u / (2.0 * smear_var)).exp()
        })
        .collect();
    let mut out = DMatrix::from_element(n as usize, n as usize, C64::new(0.0, 0.0));
    for (slot, m) in (-m_cut..=m_cut).enumerate() {
        let w = weights[slot];
        if w == 0.0 {
            continue;
        }
        let lo = 0.max(-m);
        let hi = (n - 1).min(n - 1 - m);
        for i in lo..=hi {
            for j in lo..=hi {
                out[(i as usize, j as usize)] +=
                    state.value((i + m) as usize, (j + m) as usize) * w;
            }
        }
    }
    Ok(out)
}

/// Result of a finite-resolution momentum measurement.
#[derive(Clone, Debug)]
pub struct PMeasurement {
    /// Collapsed state: the kernel smeared along the diagonal against a
    /// Gaussian of variance `1/(4 sigma_p^2)`.
    pub post: KernelState,
    pub measured_mean: f64,
    /// `(Delta p)^2_rho + sigma_p^2`.
    pub measured_var: f64,
}

/// Measures momentum with a Gaussian detector of resolution `sigma_p`. The
/// outcome moments are read off the weighted autocorrelation
/// `g(u) = exp(-sigma_p^2 u^2 / 2) conj(A(u))` via `<k0> = i g'(0)`,
/// `<k0^2> = -g''(0)`.
pub fn measure_p(state: &KernelState, sigma_p: f64) -> Result<PMeasurement> {
    if sigma_p.is_nan() || sigma_p <= 0.0 {
        return Err(Error::OutOfRange {
            name: "sigma_p",
            value: sigma_p,
            min: f64::MIN_POSITIVE,
            max: f64::INFINITY,
        });
    }
    let grid = *state.grid();
    let p_spread = state.p_var().max(0.0).sqrt();
    if grid.nyquist() < 8.0 * (p_spread + sigma_p) {
        return Err(Error::Aliasing {
            reason: format!(
                "momentum spread {p_spread} + resolution {sigma_p} too close to nyquist {}",
                grid.nyquist()
            ),
        });
    }
    let a = state.autocorr_near_zero();
    let dx = grid.dx();
    let mut g = [C64::new(0.0, 0.0); 9];
    for (slot, m) in (-4i32..=4).enumerate() {
        let u = m as f64 * dx;
        g[slot] = a[slot].conj() * (-0.5 * sigma_p * sigma_p * u * u).exp();
    }
    let mean = (C64::i() * stencil_d1(&g, dx)).re;
    let second = (-stencil_d2(&g, dx)).re;
    let measured_var = second - mean * mean;

    let post = KernelState::new(
        grid,
        diagonal_gaussian_smear(state, 1.0 / (4.0 * sigma_p * sigma_p))?,
    )?;
    Ok(PMeasurement {
        post,
        measured_mean: mean,
        measured_var,
    })
}

/// Intrinsic noise of the position POVM:
/// `eps(x)^2 = int dx0 Tr(F_x0 (x - x0)^2 rho)`, by double quadrature.
/// State-independent and equal to `sigma_x^2`; the equality is verified on
/// every call at the grid tolerance.
pub fn epsilon_x_squared(state: &KernelState, profile: &AcceptanceProfile) -> Result<f64> {
    let grid = *state.grid();
    let n = grid.len();
    let diag: Vec<f64> = (0..n).map(|i| grid.weight(i) * state.value(i, i).re).collect();
    let mut eps_sq = 0.0;
    let mut total = 0.0;
    for m in 0..n {
        let x0 = grid.point(m);
        let w0 = grid.weight(m);
        for (i, d) in diag.iter().enumerate() {
            if *d == 0.0 {
                continue;
            }
            let u = grid.point(i) - x0;
            let f_sq = profile.eval(u).powi(2);
            eps_sq += w0 * f_sq * u * u * d;
            total += w0 * f_sq * d;
        }
    }
    if (total - 1.0).abs() > TOL_GRID {
        return Err(Error::GridTooNarrow {
            reason: format!("POVM completeness integrates to {total} on this grid"),
        });
    }
    let sigma_sq = profile.sigma_x_squared()?;
    if (eps_sq - sigma_sq).abs() > TOL_GRID * sigma_sq.max(1e-12) {
        return Err(Error::NumericalContract {
            what: "eps(x)^2 must equal sigma_x^2",
            defect: (eps_sq - sigma_sq).abs(),
            tol: TOL_GRID * sigma_sq.max(1e-12),
        });
    }
    Ok(eps_sq)
}

/// Probability of finding the particle in `[lo, hi]`:
/// `int_lo^hi K(x, x) dx` with linear interpolation at the interval ends.
pub fn pvm_probability_x(state: &KernelState, lo: f64, hi: f64) -> Result<f64> {
    let grid = *state.grid();
    if lo > hi || lo < grid.x_min() - 1e-12 || hi > grid.x_max() + 1e-12 {
        return Err(Error::IntervalOutsideGrid {
            lo,
            hi,
            x_min: grid.x_min(),
            x_max: grid.x_max(),
        });
    }
    let lo = lo.max(grid.x_min());
    let hi = hi.min(grid.x_max());
    if lo == hi {
        return Ok(0.0);
    }
    let n = grid.len();
    let density = |i: usize| state.value(i, i).re;
    let value_at = |x: f64| {
        let pos = (x - grid.x_min()) / grid.dx();
        let cell = (pos.floor() as usize).min(n - 2);
        let t = pos - cell as f64;
        density(cell) * (1.0 - t) + density(cell + 1) * t
    };
    // Trapezoid over the cell boundaries interior to [lo, hi], with partial
    // cells at both ends.
    let first_node = ((lo - grid.x_min()) / grid.dx()).ceil() as usize;
    let last_node = ((hi - grid.x_min()) / grid.dx()).floor() as usize;
    let mut acc = 0.0;
    if first_node > last_node {
        // Entire interval inside one cell.
        acc += (hi - lo) * 0.5 * (value_at(lo) + value_at(hi));
    } else {
        let x_first = grid.point(first_node);
        if x_first > lo {
            acc += (x_first - lo) * 0.5 * (value_at(lo) + density(first_node));
        }
        for i in first_node..last_node {
            acc += grid.dx() * 0.5 * (density(i) + density(i + 1));
        }
        let x_last = grid.point(last_node);
        if hi > x_last {
            acc += (hi - x_last) * 0.5 * (density(last_node) + value_at(hi));
        }
    }
    Ok(acc.clamp(0.0, 1.0 + TOL_GRID))
}
