//! Measurement protocols built from the primitive detectors: successive
//! position-then-momentum measurement, the simultaneous (joint) measurement of
//! both, and the disturbance-matched comparison of the two.

use num_complex::Complex64 as C64;

use super::grid::GridSpec;
use super::kernel::{stencil_d1, stencil_d2, KernelState};
use super::ops::{diagonal_gaussian_smear, gaussian_state, measure_p, measure_x};
use super::profile::AcceptanceProfile;
use crate::error::{Error, Result};

/// Outcome of measuring `x` with profile `f` and then `p` with resolution
/// `sigma_p`.
#[derive(Clone, Debug)]
pub struct SuccessiveXp {
    /// `(Delta x)^2_rho + sigma_x^2`.
    pub measured_var_x: f64,
    /// `(Delta p)^2_rho + eta(p)^2 + sigma_p^2`.
    pub measured_var_p: f64,
    /// `(1 + sqrt(1 + 4 sigma_x^2 sigma_p^2))^2 / 4`, the floor for the
    /// product of measured variances over all states (Gaussian profile).
    pub bound: f64,
    /// State after both measurements.
    pub final_state: KernelState,
    /// Net momentum disturbance `<p^2>_final - <p^2>_initial`.
    pub eta_p_sq: f64,
    /// Net position disturbance `<x^2>_final - <x^2>_initial`.
    pub eta_x_sq: f64,
}

impl SuccessiveXp {
    pub fn product(&self) -> f64 {
        self.measured_var_x * self.measured_var_p
    }

    pub fn margin(&self) -> f64 {
        self.product() - self.bound
    }
}

/// Runs the two detectors in sequence and evaluates the lower bound.
pub fn successive_xp(
    state: &KernelState,
    profile: &AcceptanceProfile,
    sigma_p: f64,
) -> Result<SuccessiveXp> {
    let x_out = measure_x(state, profile)?;
    let p_out = measure_p(&x_out.post, sigma_p)?;
    let sigma_x_sq = profile.sigma_x_squared()?;
    let bound = 0.25 * (1.0 + (1.0 + 4.0 * sigma_x_sq * sigma_p * sigma_p).sqrt()).powi(2);
    let eta_p_sq = p_out.post.p_moment2() - state.p_moment2();
    let eta_x_sq = p_out.post.x_moment(2) - state.x_moment(2);
    Ok(SuccessiveXp {
        measured_var_x: x_out.measured_var,
        measured_var_p: p_out.measured_var,
        bound,
        final_state: p_out.post,
        eta_p_sq,
        eta_x_sq,
    })
}

/// The state variance that saturates the successive-measurement bound:
/// `var_x = sigma_x^2 / sqrt(1 + 4 sigma_x^2 sigma_p^2)`.
pub fn saturating_var_x(sigma_x_sq: f64, sigma_p: f64) -> f64 {
    sigma_x_sq / (1.0 + 4.0 * sigma_x_sq * sigma_p * sigma_p).sqrt()
}

/// Golden-section consistency check: minimizes the closed-form product of
/// measured variances over the state width and returns `(var_x, product)` at
/// the minimum. Agrees with [`saturating_var_x`] and the bound.
pub fn saturating_width_search(sigma_x_sq: f64, sigma_p: f64) -> (f64, f64) {
    let objective = |var: f64| {
        (var + sigma_x_sq) * (0.25 / var + 0.25 / sigma_x_sq + sigma_p * sigma_p)
    };
    let phi = (5.0f64.sqrt() - 1.0) / 2.0;
    // Search in log space over [1e-3, 1e3] * sigma_x^2.
    let (mut lo, mut hi) = ((1e-3 * sigma_x_sq).ln(), (1e3 * sigma_x_sq).ln());
    let mut c = hi - phi * (hi - lo);
    let mut d = lo + phi * (hi - lo);
    let (mut fc, mut fd) = (objective(c.exp()), objective(d.exp()));
    while (objective(lo.exp()) - objective(hi.exp())).abs() > 1e-10
        || (hi - lo) > 1e-12
    {
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - phi * (hi - lo);
            fc = objective(c.exp());
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + phi * (hi - lo);
            fd = objective(d.exp());
        }
        if hi - lo < 1e-14 {
            break;
        }
    }
    let var = (0.5 * (lo + hi)).exp();
    (var, objective(var))
}

/// Outcome of the simultaneous position/momentum measurement with pointer
/// widths `b` (position side) and `a` (the auxiliary smoothing the collapse).
#[derive(Clone, Debug)]
pub struct JointAk {
    /// `(Delta x)^2_rho + b^2/2`.
    pub measured_var_x: f64,
    /// `(Delta p)^2_rho + 1/(2 b^2)`.
    pub measured_var_p: f64,
    /// Post-measurement state; unlike the outcome statistics it depends on
    /// `a`.
    pub post: KernelState,
    /// `<p^2>_post - <p^2>_rho` from the grid.
    pub eta_p_sq: f64,
    /// `<x^2>_post - <x^2>_rho` from the grid.
    pub eta_x_sq: f64,
    /// `(a^2 + b^2) / (2 a^2 b^2)`.
    pub eta_p_sq_analytic: f64,
    /// `(a^2 + b^2) / 2`.
    pub eta_x_sq_analytic: f64,
}

impl JointAk {
    pub fn product(&self) -> f64 {
        self.measured_var_x * self.measured_var_p
    }
}

/// Outcome moments of the joint POVM, `<<x0^k k0^l>>`, evaluated from the raw
/// moments integral for the factorized pointer
/// `h(u, v) = g(u) conj(f(v))`: the `u` integral carries all the
/// `a`-dependence and is kept as an explicit quadrature factor so the
/// g-independence of the statistics is a numerical fact, not a shortcut.
fn ak_moment(state: &KernelState, b: f64, a: f64, k: u32, l: u32) -> Result<f64> {
    let grid = *state.grid();
    let n = grid.len();
    let dx = grid.dx();

    let f = |v: f64| (b * std::f64::consts::PI.sqrt()).powf(-0.5) * (-v * v / (2.0 * b * b)).exp();
    let f1 = |v: f64| -v / (b * b) * f(v);
    let f2 = |v: f64| (v * v / (b * b * b * b) - 1.0 / (b * b)) * f(v);
    let g = |u: f64| (a * std::f64::consts::PI.sqrt()).powf(-0.5) * (-u * u / (2.0 * a * a)).exp();

    // The pointer normalization integral; equals one on an adequate grid.
    let norm_g: f64 = (0..n)
        .map(|i| grid.weight(i) * g(grid.point(i)).powi(2))
        .sum();
    if (norm_g - 1.0).abs() > 1e-8 {
        return Err(Error::GridTooNarrow {
            reason: format!("pointer profile g integrates to {norm_g} on this grid"),
        });
    }

    // First-slot kernel derivatives along the diagonal, D1(x) and D2(x).
    let mut d1 = vec![C64::new(0.0, 0.0); n];
    let mut d2 = vec![C64::new(0.0, 0.0); n];
    for i in 4..n - 4 {
        let mut col = [C64::new(0.0, 0.0); 9];
        for (slot, off) in (-4i32..=4).enumerate() {
            col[slot] = state.value((i as i32 + off) as usize, i);
        }
        d1[i] = stencil_d1(&col, dx);
        d2[i] = stencil_d2(&col, dx);
    }

    let mut acc = C64::new(0.0, 0.0);
    for m in 0..n {
        let v = grid.point(m);
        let wf = grid.weight(m) * f(v);
        if wf == 0.0 {
            continue;
        }
        let (fv, f1v, f2v) = (f(v), f1(v), f2(v));
        for i in 0..n {
            let x = grid.point(i);
            let kxx = state.value(i, i);
            let t = match l {
                0 => kxx * fv,
                1 => -C64::i() * (kxx * f1v + d1[i] * fv),
                2 => -(kxx * f2v + d1[i] * 2.0 * f1v + d2[i] * fv),
                _ => unreachable!("moments above second order are not used"),
            };
            acc += t * (grid.weight(i) * wf * (x - v).powi(k as i32));
        }
    }
    acc *= norm_g;
    let value = acc.re;
    if acc.im.abs() > 1e-8 * value.abs().max(1.0) {
        return Err(Error::ImaginaryResidue {
            residue: acc.im.abs(),
            tol: 1e-8 * value.abs().max(1.0),
        });
    }
    Ok(value)
}

/// Runs the joint measurement: outcome statistics from the POVM moment
/// integrals (they depend only on `b`), post state from the closed-form
/// kernel map (depends on `a` too).
pub fn joint_ak(state: &KernelState, b: f64, a: f64) -> Result<JointAk> {
    if a.is_nan() || b.is_nan() || a <= 0.0 || b <= 0.0 {
        return Err(Error::OutOfRange {
            name: "pointer widths",
            value: a.min(b),
            min: f64::MIN_POSITIVE,
            max: f64::INFINITY,
        });
    }
    let grid = *state.grid();
    if grid.dx() > 0.25 * (b / std::f64::consts::SQRT_2).min(a) {
        return Err(Error::GridTooCoarse {
            reason: format!(
                "dx = {} cannot resolve pointer widths (a, b) = ({a}, {b})",
                grid.dx()
            ),
        });
    }

    let x_mean = ak_moment(state, b, a, 1, 0)?;
    let x_second = ak_moment(state, b, a, 2, 0)?;
    let p_mean = ak_moment(state, b, a, 0, 1)?;
    let p_second = ak_moment(state, b, a, 0, 2)?;
    let measured_var_x = x_second - x_mean * x_mean;
    let measured_var_p = p_second - p_mean * p_mean;

    // Post state: off-diagonal damping times a diagonal Gaussian smear.
    let gamma = (a * a + b * b) / (4.0 * a * a * b * b);
    let smear_var = 0.5 * (a * a + b * b);
    let smeared = diagonal_gaussian_smear(state, smear_var)?;
    let n = grid.len();
    let mut damped = smeared;
    for i in 0..n {
        for j in 0..n {
            let d = grid.point(i) - grid.point(j);
            damped[(i, j)] *= C64::new((-gamma * d * d).exp(), 0.0);
        }
    }
    let post = KernelState::new(grid, damped)?;

    Ok(JointAk {
        measured_var_x,
        measured_var_p,
        eta_p_sq: post.p_moment2() - state.p_moment2(),
        eta_x_sq: post.x_moment(2) - state.x_moment(2),
        eta_p_sq_analytic: (a * a + b * b) / (2.0 * a * a * b * b),
        eta_x_sq_analytic: 0.5 * (a * a + b * b),
        post,
    })
}

/// Disturbance-matched comparison of the joint and successive protocols.
#[derive(Clone, Copy, Debug)]
pub struct JointVsSuccessive {
    /// Matched pointer widths squared.
    pub a_sq: f64,
    pub b_sq: f64,
    /// Closed-form `(Delta x)^2_joint - (Delta x)^2_successive`
    /// `= (1 - sqrt(1 - 16 sx^2 sp^2))^2 / (16 sp^2) > 0`.
    pub diff_x_closed: f64,
    /// Closed-form `(Delta p)^2_joint - (Delta p)^2_successive`
    /// `= -[(1 - sqrt(1 - 16 sx^2 sp^2)) + 8 sx^2 sp^2] / (8 sx^2) < 0`.
    pub diff_p_closed: f64,
    /// The same differences from running both pipelines on a grid.
    pub diff_x_grid: f64,
    pub diff_p_grid: f64,
}

/// Matched pointer widths for given detector resolutions: both protocols then
/// leave identical final states. Requires `sigma_x sigma_p <= 1/4`.
pub fn matched_pointer_widths(sigma_x: f64, sigma_p: f64) -> Result<(f64, f64)> {
    let product = sigma_x * sigma_p;
    if product > 0.25 {
        return Err(Error::NoMatchedJoint { value: product });
    }
    let s = (1.0 - 16.0 * product * product).max(0.0).sqrt();
    let a_sq = (1.0 + s) / (4.0 * sigma_p * sigma_p);
    let b_sq = (1.0 - s) / (4.0 * sigma_p * sigma_p);
    Ok((a_sq, b_sq))
}

/// Compares measured uncertainties of the two protocols at matched
/// disturbances, both in closed form and on the grid.
pub fn joint_vs_successive(
    sigma_x: f64,
    sigma_p: f64,
    spec: &GridSpec,
) -> Result<JointVsSuccessive> {
    if sigma_x.is_nan() || sigma_p.is_nan() || sigma_x <= 0.0 || sigma_p <= 0.0 {
        return Err(Error::OutOfRange {
            name: "detector resolutions",
            value: sigma_x.min(sigma_p),
            min: f64::MIN_POSITIVE,
            max: f64::INFINITY,
        });
    }
    let (a_sq, b_sq) = matched_pointer_widths(sigma_x, sigma_p)?;
    let s = (1.0 - 16.0 * (sigma_x * sigma_p).powi(2)).max(0.0).sqrt();
    let diff_x_closed = (1.0 - s).powi(2) / (16.0 * sigma_p * sigma_p);
    let diff_p_closed = -((1.0 - s) + 8.0 * (sigma_x * sigma_p).powi(2)) / (8.0 * sigma_x * sigma_x);

    // Grid cross-check: any state works since the state terms cancel in the
    // differences; use the Gaussian that saturates the joint bound.
    let var_x = 0.5 * b_sq;
    let widths = [
        var_x.sqrt(),
        sigma_x,
        (var_x + sigma_x * sigma_x).sqrt(),
        0.5 / sigma_p,
        a_sq.sqrt(),
        b_sq.sqrt(),
    ];
    let grid = spec.grid_for(&widths)?;
    let state = gaussian_state(&grid, 0.0, 0.0, var_x)?;

    let f = AcceptanceProfile::gaussian(sigma_x)?;
    let succ = successive_xp(&state, &f, sigma_p)?;
    let joint = joint_ak(&state, b_sq.sqrt(), a_sq.sqrt())?;

    Ok(JointVsSuccessive {
        a_sq,
        b_sq,
        diff_x_closed,
        diff_p_closed,
        diff_x_grid: joint.measured_var_x - succ.measured_var_x,
        diff_p_grid: joint.measured_var_p - succ.measured_var_p,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cv::grid::Grid;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn grid() -> Grid {
        Grid::symmetric(16.0, 512).unwrap()
    }

    #[test]
    fn successive_bound_is_saturated_by_the_matched_gaussian() {
        let (sx, sp) = (1.0, 1.0);
        let var = saturating_var_x(sx * sx, sp);
        assert_relative_eq!(var, 1.0 / 5.0f64.sqrt(), max_relative = 1e-14);
        let state = gaussian_state(&grid(), 0.0, 0.0, var).unwrap();
        let f = AcceptanceProfile::gaussian(sx).unwrap();
        let out = successive_xp(&state, &f, sp).unwrap();
        let expected_bound = 0.25 * (1.0 + 5.0f64.sqrt()).powi(2);
        assert_relative_eq!(out.bound, expected_bound, max_relative = 1e-14);
        assert_relative_eq!(out.product(), expected_bound, max_relative = 1e-6);
        // Net disturbances for the Gaussian pair.
        assert_relative_eq!(out.eta_p_sq, 0.25, max_relative = 1e-6);
        assert_relative_eq!(out.eta_x_sq, 0.25, max_relative = 1e-6);
    }

    #[test]
    fn successive_product_dominates_the_bound_for_random_states() {
        let f = AcceptanceProfile::gaussian(0.8).unwrap();
        let mut rng = crate::sample::seeded_rng(71);
        use rand::Rng;
        for _ in 0..12 {
            let var = rng.gen_range(0.1..2.0);
            let x0 = rng.gen_range(-1.0..1.0);
            let p0 = rng.gen_range(-1.0..1.0);
            let state = gaussian_state(&grid(), x0, p0, var).unwrap();
            let out = successive_xp(&state, &f, 0.7).unwrap();
            assert!(
                out.margin() >= -1e-8,
                "bound violated: product {} < bound {}",
                out.product(),
                out.bound
            );
        }
    }

    #[test]
    fn bound_approaches_the_joint_floor_as_sigma_p_vanishes() {
        // The floor (1 + sqrt(1 + 4 sx^2 sp^2))^2 / 4 tends to the joint
        // measurement's floor of 1 as the second detector sharpens.
        let state = gaussian_state(&grid(), 0.0, 0.0, 0.5).unwrap();
        let f = AcceptanceProfile::gaussian(1.0).unwrap();
        let moderate = successive_xp(&state, &f, 0.2).unwrap();
        let loose = successive_xp(&state, &f, 1.0).unwrap();
        assert!(moderate.bound < loose.bound);
        assert!((moderate.bound - 0.25 * (1.0 + 1.16f64.sqrt()).powi(2)).abs() < 1e-12);
        let floor = |sp: f64| 0.25 * (1.0 + (1.0 + 4.0 * sp * sp).sqrt()).powi(2);
        assert!((floor(1e-8) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn golden_section_search_recovers_the_closed_form_optimum() {
        for (sx2, sp) in [(1.0, 1.0), (0.25, 0.5), (2.0, 0.1)] {
            let (var, product) = saturating_width_search(sx2, sp);
            assert_relative_eq!(var, saturating_var_x(sx2, sp), max_relative = 1e-5);
            let bound = 0.25 * (1.0 + (1.0 + 4.0 * sx2 * sp * sp).sqrt()).powi(2);
            assert!((product - bound).abs() <= 1e-10 * bound);
        }
    }

    #[test]
    fn successive_final_state_matches_the_composite_kernel_map() {
        let state = gaussian_state(&grid(), 0.0, 0.4, 0.5).unwrap();
        let f = AcceptanceProfile::gaussian(0.9).unwrap();
        let sp = 0.8;
        let out = successive_xp(&state, &f, sp).unwrap();
        // Oracle: damp then smear, in one explicit pass.
        let smeared = diagonal_gaussian_smear(&state, 1.0 / (4.0 * sp * sp)).unwrap();
        let g = grid();
        for &(i, j) in &[(200, 300), (256, 256), (150, 380)] {
            let d = g.point(i) - g.point(j);
            let expected = smeared[(i, j)] * C64::new((-d * d / (8.0 * 0.81)).exp(), 0.0);
            assert!((out.final_state.value(i, j) - expected).norm() < 1e-10);
        }
    }

    #[test]
    fn joint_measurement_statistics_and_saturation() {
        let b: f64 = 1.1;
        let var = 0.5 * b * b;
        let state = gaussian_state(&grid(), 0.0, 0.0, var).unwrap();
        let out = joint_ak(&state, b, 0.9).unwrap();
        assert_relative_eq!(out.measured_var_x, var + 0.5 * b * b, max_relative = 1e-7);
        assert_relative_eq!(
            out.measured_var_p,
            1.0 / (4.0 * var) + 0.5 / (b * b),
            max_relative = 1e-7
        );
        // Saturation: var_x = b^2/2 gives measured product exactly one.
        assert_relative_eq!(out.product(), 1.0, max_relative = 1e-6);
    }

    #[test]
    fn joint_statistics_do_not_depend_on_the_pointer_smoothing() {
        let state = gaussian_state(&grid(), 0.2, -0.3, 0.6).unwrap();
        let b = 0.9;
        let out1 = joint_ak(&state, b, 0.7).unwrap();
        let out2 = joint_ak(&state, b, 1.6).unwrap();
        assert_abs_diff_eq!(out1.measured_var_x, out2.measured_var_x, epsilon = 1e-10);
        assert_abs_diff_eq!(out1.measured_var_p, out2.measured_var_p, epsilon = 1e-10);
        // The post states differ though: disturbances move with `a`.
        assert!((out1.eta_x_sq - out2.eta_x_sq).abs() > 0.1);
    }

    #[test]
    fn joint_post_state_disturbances_follow_the_closed_forms() {
        let state = gaussian_state(&grid(), 0.0, 0.0, 0.5).unwrap();
        let (a, b) = (1.3, 0.8);
        let out = joint_ak(&state, b, a).unwrap();
        assert_relative_eq!(out.eta_p_sq, out.eta_p_sq_analytic, max_relative = 1e-4);
        assert_relative_eq!(out.eta_x_sq, out.eta_x_sq_analytic, max_relative = 1e-4);
    }

    #[test]
    fn joint_post_state_matches_the_raw_double_quadrature() {
        // Coarse odd grid keeps the O(n^2)-per-entry oracle affordable and
        // puts every diagonal shift on a node.
        let g = Grid::symmetric(10.0, 129).unwrap();
        let state = gaussian_state(&g, 0.0, 0.0, 0.8).unwrap();
        let (a, b) = (1.2f64, 1.0f64);
        let out = joint_ak(&state, b, a).unwrap();

        let n = g.len();
        let mid = (n - 1) / 2; // g.point(mid) = 0, so u = g.point(mu) shifts indices by mu - mid
        let gauss = |w: f64, u: f64| {
            (w * std::f64::consts::PI.sqrt()).powf(-0.5) * (-u * u / (2.0 * w * w)).exp()
        };
        let mut worst = 0.0f64;
        for &(i, j) in &[(64, 64), (56, 72), (44, 84), (70, 58)] {
            let (x, y) = (g.point(i), g.point(j));
            let mut acc = C64::new(0.0, 0.0);
            for mu in 0..n {
                let shift = mu as i64 - mid as i64;
                let ki = i as i64 + shift;
                let kj = j as i64 + shift;
                if ki < 0 || kj < 0 || ki >= n as i64 || kj >= n as i64 {
                    continue;
                }
                let kval = state.value(ki as usize, kj as usize);
                if kval.norm() == 0.0 {
                    continue;
                }
                let u = g.point(mu);
                let mut inner = 0.0;
                for mv in 0..n {
                    let v = g.point(mv);
                    inner += g.weight(mv)
                        * gauss(a, x - v)
                        * gauss(a, y - v)
                        * gauss(b, x + u - v)
                        * gauss(b, y + u - v);
                }
                acc += kval * (g.weight(mu) * inner);
            }
            worst = worst.max((acc - out.post.value(i, j)).norm());
        }
        assert!(worst < 1e-6, "joint post-state oracle defect {worst}");
    }

    #[test]
    fn matched_comparison_reproduces_closed_forms_on_the_grid() {
        let spec = GridSpec::default();
        // sigma_x sigma_p = 1/8.
        let s = 1.0 / (2.0 * std::f64::consts::SQRT_2);
        let out = joint_vs_successive(s, s, &spec).unwrap();
        assert_relative_eq!(out.diff_x_grid, out.diff_x_closed, max_relative = 1e-4);
        assert_relative_eq!(out.diff_p_grid, out.diff_p_closed, max_relative = 1e-4);
        assert!(out.diff_x_closed > 0.0);
        assert!(out.diff_p_closed < 0.0);
    }

    #[test]
    fn matched_comparison_at_the_boundary_resolution_product() {
        let spec = GridSpec::default();
        // sigma_x sigma_p = 1/4 exactly: difference is -3/(16 sigma_x^2).
        let (sx, sp) = (0.5, 0.5);
        let out = joint_vs_successive(sx, sp, &spec).unwrap();
        assert_relative_eq!(
            out.diff_p_closed,
            -3.0 / (16.0 * sx * sx),
            max_relative = 1e-12
        );
        assert_relative_eq!(out.diff_p_grid, out.diff_p_closed, max_relative = 1e-4);
        assert_abs_diff_eq!(out.a_sq, out.b_sq, epsilon = 1e-12);
    }

    #[test]
    fn no_matched_joint_beyond_the_quarter_product() {
        let spec = GridSpec::default();
        assert!(matches!(
            joint_vs_successive(1.0, 0.3, &spec),
            Err(Error::NoMatchedJoint { .. })
        ));
    }

    #[test]
    fn matched_protocols_leave_the_same_final_state() {
        let spec = GridSpec {
            n: 384,
            span_factor: 8.0,
        };
        let (sx, sp) = (0.5, 0.4);
        let (a_sq, b_sq) = matched_pointer_widths(sx, sp).unwrap();
        let widths = [0.5 * b_sq, sx * sx, 0.25 / (sp * sp), a_sq, b_sq]
            .map(|w: f64| w.sqrt());
        let grid = spec.grid_for(&widths).unwrap();
        let state = gaussian_state(&grid, 0.0, 0.0, 0.5 * b_sq).unwrap();
        let f = AcceptanceProfile::gaussian(sx).unwrap();
        let succ = successive_xp(&state, &f, sp).unwrap();
        let joint = joint_ak(&state, b_sq.sqrt(), a_sq.sqrt()).unwrap();
        let mut worst = 0.0f64;
        for i in (0..grid.len()).step_by(7) {
            for j in (0..grid.len()).step_by(7) {
                worst = worst
                    .max((succ.final_state.value(i, j) - joint.post.value(i, j)).norm());
            }
        }
        assert!(worst < 1e-8, "final states differ by {worst}");
    }
}
