//! The scenario runners behind each CLI subcommand.

use anyhow::Context;
use rand::Rng;
use rayon::prelude::*;

use qmeas::cv::{
    gaussian_state, joint_ak, joint_vs_successive, saturating_var_x, successive_xp,
    AcceptanceProfile, GridSpec,
};
use qmeas::matrix::ComplexMatrix;
use qmeas::measure::{collapse_pvm, disturbance_eta_sq};
use qmeas::povm::{
    collapse_povm, contextual_values, dilation_crosscheck, epsilon_noise, eta_weak,
    olw_inequality, weak_povm, WeakFamily,
};
use qmeas::sample::{
    random_bloch, random_density, random_observable, random_pvm, random_unit_direction,
    seeded_rng,
};
use qmeas::spin::{analytic_suite, jx, sharp_two_state_bound, BlochState, SpinObservable};
use qmeas::state::{covariance, pvm_from_observable, variance, Observable, Pvm};

use crate::config::{Scenario, ScenarioConfig};
use crate::report::{Cell, Check, RunReport};

/// Decorrelated per-row seed for parallel sweeps.
fn row_seed(base: u64, index: usize) -> u64 {
    base.wrapping_add((index as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

fn jx_pvm() -> Pvm {
    pvm_from_observable(&Observable::new(jx()).expect("J_x hermitian"), 1e-12)
        .expect("J_x spectrum is simple")
}

/// Runs the configured scenario and assembles the report.
pub fn run(config: &ScenarioConfig) -> anyhow::Result<RunReport> {
    let start = std::time::Instant::now();
    let mut report = match &config.scenario {
        Scenario::TwoState { a, b, samples } => two_state(config, *a, *b, *samples)?,
        Scenario::WeakSweep { a, b, theta_steps } => weak_sweep(config, *a, *b, *theta_steps)?,
        Scenario::SuccessiveXp {
            sigma_x,
            sigma_p,
            var_x,
            x_mean,
            p_mean,
        } => successive(config, *sigma_x, *sigma_p, *var_x, *x_mean, *p_mean)?,
        Scenario::JointAk { b, a, var_x } => joint(config, *b, *a, *var_x)?,
        Scenario::CompareJointSuccessive { sigma_x, sigma_p } => {
            compare(config, *sigma_x, *sigma_p)?
        }
        Scenario::OzawaGap { samples } => ozawa_gap(config, *samples)?,
        Scenario::DilationCheck {
            samples,
            outcome_counts,
        } => dilation(config, *samples, outcome_counts)?,
        Scenario::ProfileSweep {
            gaussian_sigmas,
            alpha_b_min,
            alpha_b_max,
            alpha_b_steps,
        } => profile_sweep(
            config,
            gaussian_sigmas,
            *alpha_b_min,
            *alpha_b_max,
            *alpha_b_steps,
        )?,
    };
    report.wall_ms = start.elapsed().as_millis();
    Ok(report)
}

/// Matrix-engine row for one (a, b) pair plus the worst deviation from the
/// closed forms.
fn two_state_row(state: &BlochState, spin: &SpinObservable, pvm: &Pvm) -> anyhow::Result<(Vec<Cell>, f64)> {
    let suite = analytic_suite(state, spin);
    let rho = state.to_density();
    let b_obs = spin.observable();
    let a_obs = Observable::new(jx()).expect("J_x hermitian");
    let collapsed = collapse_pvm(&rho, pvm)?.post_state;
    let engine = [
        variance(&b_obs, &rho)?,
        variance(&b_obs, &collapsed)?,
        covariance(&a_obs, &b_obs, &rho)?,
        covariance(&a_obs, &b_obs, &collapsed)?,
        disturbance_eta_sq(&b_obs, pvm, &rho)?,
    ];
    let closed = [
        suite.var_b_initial,
        suite.var_b_post,
        suite.cov_initial,
        suite.cov_post,
        suite.eta_sq,
    ];
    let err = engine
        .iter()
        .zip(&closed)
        .map(|(e, c)| (e - c).abs())
        .fold(0.0f64, f64::max);
    let a = state.vector();
    let b = spin.vector();
    let row = vec![
        Cell::Num(a[0]),
        Cell::Num(a[1]),
        Cell::Num(a[2]),
        Cell::Num(b[0]),
        Cell::Num(b[1]),
        Cell::Num(b[2]),
        Cell::Num(suite.var_b_initial),
        Cell::Num(suite.var_b_post),
        Cell::Num(suite.delta_var),
        Cell::Num(suite.eta_sq),
        Cell::Num(suite.cov_initial),
        Cell::Num(suite.cov_post),
        Cell::Num(suite.commutator_rhs),
        Cell::Num(err),
    ];
    Ok((row, err))
}

fn two_state(
    config: &ScenarioConfig,
    a: [f64; 3],
    b: [f64; 3],
    samples: usize,
) -> anyhow::Result<RunReport> {
    let mut report = RunReport::new(
        config.scenario.name(),
        config.seed,
        vec![
            "ax", "ay", "az", "bx", "by", "bz", "var_b_initial", "var_b_post", "delta_var",
            "eta_sq", "cov_initial", "cov_post", "commutator_rhs", "engine_max_err",
        ],
    );
    let tol = config.tol.unwrap_or(1e-12);
    report.tolerances.push(("engine_agreement".into(), tol));
    let pvm = jx_pvm();

    let state = BlochState::new(a).context("two_state.a")?;
    let spin = SpinObservable::new(b);
    let (row, mut worst) = two_state_row(&state, &spin, &pvm)?;
    report.rows.push(row);

    let mut rng = seeded_rng(config.seed);
    for _ in 0..samples {
        let state = random_bloch(&mut rng);
        let spin = SpinObservable::new(random_unit_direction(&mut rng));
        let (row, err) = two_state_row(&state, &spin, &pvm)?;
        report.rows.push(row);
        worst = worst.max(err);
    }
    report
        .checks
        .push(Check::agreement("matrix engine vs closed forms", worst, tol));
    Ok(report)
}

fn weak_sweep(
    config: &ScenarioConfig,
    a: [f64; 3],
    b: [f64; 3],
    theta_steps: usize,
) -> anyhow::Result<RunReport> {
    let mut report = RunReport::new(
        config.scenario.name(),
        config.seed,
        vec!["theta", "lhs", "rhs", "gap", "epsilon", "eta_theta"],
    );
    let state = BlochState::new(a).context("weak_sweep.a")?;
    let spin = SpinObservable::new(b);
    let rho = state.to_density();
    let b_obs = spin.observable();
    let pvm = jx_pvm();
    let family = WeakFamily::prescribed(pvm.clone())?;
    let pinched = collapse_pvm(&rho, &pvm)?.post_state;

    let mut min_gap = f64::INFINITY;
    let mut worst_interp = 0.0f64;
    let mut worst_ctx = 0.0f64;
    for k in 0..theta_steps {
        let theta = family.theta_max() * k as f64 / (theta_steps - 1) as f64;
        let check = olw_inequality(theta, &state, &spin)?;
        let povm = weak_povm(&family, theta)?;
        let eps = epsilon_noise(&povm, &pvm, &rho)?;
        let eta_t = eta_weak(&b_obs, &family, theta, &rho)?;
        min_gap = min_gap.min(check.gap());
        report.rows.push(vec![
            Cell::Num(theta),
            Cell::Num(check.lhs()),
            Cell::Num(check.rhs),
            Cell::Num(check.gap()),
            Cell::Num(eps),
            Cell::Num(eta_t),
        ]);

        let out = collapse_povm(&rho, &povm)?;
        let f = family.strength(theta);
        let expected = rho
            .matrix()
            .scale(1.0 - f)
            .add(&pinched.matrix().scale(f));
        worst_interp = worst_interp.max(out.post_state.matrix().sub(&expected).max_norm());

        if family.theta_max() - theta >= 1e-3 {
            let values = contextual_values(&family, theta)?;
            let mut rec = ComplexMatrix::zeros(2);
            for (v, el) in values.iter().zip(povm.elements()) {
                rec = rec.add(&el.effect.scale(*v));
            }
            worst_ctx = worst_ctx.max(rec.sub(pvm.observable().matrix()).max_norm());
        }
    }
    report.tolerances.push(("interpolation".into(), 1e-10));
    report.tolerances.push(("contextual".into(), 1e-12));
    report.checks.push(Check::bound("relation gap positive", min_gap, 0.0));
    report
        .checks
        .push(Check::agreement("weak collapse interpolation", worst_interp, 1e-10));
    report
        .checks
        .push(Check::agreement("contextual reconstruction", worst_ctx, 1e-12));
    Ok(report)
}

fn successive(
    config: &ScenarioConfig,
    sigma_x: f64,
    sigma_p: f64,
    var_x: Option<f64>,
    x_mean: f64,
    p_mean: f64,
) -> anyhow::Result<RunReport> {
    let mut report = RunReport::new(
        config.scenario.name(),
        config.seed,
        vec![
            "sigma_x",
            "sigma_p",
            "var_x",
            "measured_var_x",
            "measured_var_p",
            "product",
            "bound",
            "margin",
            "eta_p_sq",
            "eta_x_sq",
        ],
    );
    let saturating = var_x.is_none();
    let var = var_x.unwrap_or_else(|| saturating_var_x(sigma_x * sigma_x, sigma_p));
    let run_on = |spec: &GridSpec| -> anyhow::Result<qmeas::cv::SuccessiveXp> {
        let widths = [
            var.sqrt() + x_mean.abs() / spec.span_factor,
            sigma_x,
            (var + sigma_x * sigma_x).sqrt() + x_mean.abs() / spec.span_factor,
            0.5 / sigma_p,
        ];
        let grid = spec.grid_for(&widths)?;
        let state = gaussian_state(&grid, x_mean, p_mean, var)?;
        let f = AcceptanceProfile::gaussian(sigma_x)?;
        Ok(successive_xp(&state, &f, sigma_p)?)
    };
    let out = run_on(&config.grid)?;
    report.rows.push(vec![
        Cell::Num(sigma_x),
        Cell::Num(sigma_p),
        Cell::Num(var),
        Cell::Num(out.measured_var_x),
        Cell::Num(out.measured_var_p),
        Cell::Num(out.product()),
        Cell::Num(out.bound),
        Cell::Num(out.margin()),
        Cell::Num(out.eta_p_sq),
        Cell::Num(out.eta_x_sq),
    ]);
    report.tolerances.push(("bound_margin".into(), 1e-8));
    report
        .checks
        .push(Check::bound("product >= bound", out.margin(), 1e-8));
    if saturating {
        let tol = config.tol.unwrap_or(1e-6);
        report.tolerances.push(("saturation_rel".into(), tol));
        report.checks.push(Check::agreement(
            "saturating state reaches the bound",
            (out.product() - out.bound) / out.bound,
            tol,
        ));
    }
    let fine = run_on(&GridSpec {
        n: 2 * config.grid.n - 1,
        span_factor: config.grid.span_factor,
    })?;
    report.convergence.push(Check::agreement(
        "product stable under grid refinement",
        (fine.product() - out.product()) / out.bound,
        1e-6,
    ));
    Ok(report)
}

fn joint(
    config: &ScenarioConfig,
    b: f64,
    a: f64,
    var_x: Option<f64>,
) -> anyhow::Result<RunReport> {
    let mut report = RunReport::new(
        config.scenario.name(),
        config.seed,
        vec![
            "b",
            "a",
            "var_x",
            "measured_var_x",
            "measured_var_p",
            "product",
            "eta_p_sq",
            "eta_x_sq",
            "eta_p_sq_analytic",
            "eta_x_sq_analytic",
            "stat_spread_vs_a",
        ],
    );
    let saturating = var_x.is_none();
    let var = var_x.unwrap_or(0.5 * b * b);
    let a_probe = 2.0 * a;
    let run_on = |spec: &GridSpec| -> anyhow::Result<(qmeas::cv::JointAk, f64)> {
        let widths = [
            var.sqrt(),
            b,
            a,
            a_probe,
            (var + 0.5 * b * b).sqrt(),
            (0.5 * (a_probe * a_probe + b * b)).sqrt() * 1.3,
        ];
        let grid = spec.grid_for(&widths)?;
        let state = gaussian_state(&grid, 0.0, 0.0, var)?;
        let out = joint_ak(&state, b, a)?;
        let other = joint_ak(&state, b, a_probe)?;
        let spread = (out.measured_var_x - other.measured_var_x)
            .abs()
            .max((out.measured_var_p - other.measured_var_p).abs());
        Ok((out, spread))
    };
    let (out, spread) = run_on(&config.grid)?;
    report.rows.push(vec![
        Cell::Num(b),
        Cell::Num(a),
        Cell::Num(var),
        Cell::Num(out.measured_var_x),
        Cell::Num(out.measured_var_p),
        Cell::Num(out.product()),
        Cell::Num(out.eta_p_sq),
        Cell::Num(out.eta_x_sq),
        Cell::Num(out.eta_p_sq_analytic),
        Cell::Num(out.eta_x_sq_analytic),
        Cell::Num(spread),
    ]);
    report.tolerances.push(("g_independence".into(), 1e-10));
    report.tolerances.push(("disturbance_rel".into(), 1e-4));
    report
        .checks
        .push(Check::bound("product >= 1", out.product() - 1.0, 1e-6));
    if saturating {
        report.checks.push(Check::agreement(
            "saturating width reaches product = 1",
            out.product() - 1.0,
            config.tol.unwrap_or(1e-6),
        ));
    }
    report.checks.push(Check::agreement(
        "statistics independent of pointer smoothing",
        spread,
        1e-10,
    ));
    report.checks.push(Check::agreement(
        "eta_p^2 matches closed form",
        (out.eta_p_sq - out.eta_p_sq_analytic) / out.eta_p_sq_analytic,
        1e-4,
    ));
    report.checks.push(Check::agreement(
        "eta_x^2 matches closed form",
        (out.eta_x_sq - out.eta_x_sq_analytic) / out.eta_x_sq_analytic,
        1e-4,
    ));
    let (fine, _) = run_on(&GridSpec {
        n: 2 * config.grid.n - 1,
        span_factor: config.grid.span_factor,
    })?;
    report.convergence.push(Check::agreement(
        "product stable under grid refinement",
        fine.product() - out.product(),
        1e-6,
    ));
    Ok(report)
}

fn compare(config: &ScenarioConfig, sigma_x: f64, sigma_p: f64) -> anyhow::Result<RunReport> {
    let mut report = RunReport::new(
        config.scenario.name(),
        config.seed,
        vec![
            "sigma_x",
            "sigma_p",
            "a_sq",
            "b_sq",
            "diff_x_closed",
            "diff_p_closed",
            "diff_x_grid",
            "diff_p_grid",
        ],
    );
    let tol = config.tol.unwrap_or(1e-4);
    report.tolerances.push(("grid_vs_closed_rel".into(), tol));
    let out = joint_vs_successive(sigma_x, sigma_p, &config.grid)?;
    report.rows.push(vec![
        Cell::Num(sigma_x),
        Cell::Num(sigma_p),
        Cell::Num(out.a_sq),
        Cell::Num(out.b_sq),
        Cell::Num(out.diff_x_closed),
        Cell::Num(out.diff_p_closed),
        Cell::Num(out.diff_x_grid),
        Cell::Num(out.diff_p_grid),
    ]);
    report.checks.push(Check::agreement(
        "position difference grid vs closed",
        (out.diff_x_grid - out.diff_x_closed) / out.diff_x_closed.abs().max(1e-300),
        tol,
    ));
    report.checks.push(Check::agreement(
        "momentum difference grid vs closed",
        (out.diff_p_grid - out.diff_p_closed) / out.diff_p_closed.abs().max(1e-300),
        tol,
    ));
    report
        .checks
        .push(Check::bound("position difference positive", out.diff_x_closed, 0.0));
    report
        .checks
        .push(Check::bound("momentum difference negative", -out.diff_p_closed, 0.0));
    let fine = joint_vs_successive(
        sigma_x,
        sigma_p,
        &GridSpec {
            n: 2 * config.grid.n - 1,
            span_factor: config.grid.span_factor,
        },
    )?;
    report.convergence.push(Check::agreement(
        "differences stable under grid refinement",
        (fine.diff_p_grid - out.diff_p_grid) / out.diff_p_closed.abs(),
        tol,
    ));
    Ok(report)
}

fn ozawa_gap(config: &ScenarioConfig, samples: usize) -> anyhow::Result<RunReport> {
    let mut report = RunReport::new(
        config.scenario.name(),
        config.seed,
        vec![
            "index", "ax", "ay", "az", "bx", "by", "bz", "theta", "lhs", "rhs", "gap",
        ],
    );
    let rows: Vec<(usize, Vec<Cell>, f64, f64)> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = seeded_rng(row_seed(config.seed, i));
            let state = random_bloch(&mut rng);
            let spin = SpinObservable::new(random_unit_direction(&mut rng));
            let theta = rng.gen_range(0.0..std::f64::consts::FRAC_PI_4);
            let check = olw_inequality(theta, &state, &spin)
                .expect("theta sampled inside the valid range");
            let ideal = olw_inequality(0.0, &state, &spin).expect("theta = 0 is valid");
            let sharp = sharp_two_state_bound(&state, &spin)
                .expect("bound chain holds on the Bloch ball");
            let a = state.vector();
            let b = spin.vector();
            let row = vec![
                Cell::Int(i as i64),
                Cell::Num(a[0]),
                Cell::Num(a[1]),
                Cell::Num(a[2]),
                Cell::Num(b[0]),
                Cell::Num(b[1]),
                Cell::Num(b[2]),
                Cell::Num(theta),
                Cell::Num(check.lhs()),
                Cell::Num(check.rhs),
                Cell::Num(check.gap()),
            ];
            (i, row, check.gap(), ideal.lhs() - sharp.sharp_rhs)
        })
        .collect();
    let mut rows = rows;
    rows.sort_by_key(|(i, ..)| *i);
    let mut min_gap = f64::INFINITY;
    let mut min_sharp = f64::INFINITY;
    for (_, row, gap, sharp_margin) in rows {
        report.rows.push(row);
        min_gap = min_gap.min(gap);
        min_sharp = min_sharp.min(sharp_margin);
    }
    report.tolerances.push(("sharp_margin".into(), 1e-12));
    report
        .checks
        .push(Check::bound("minimum relation gap positive", min_gap, 0.0));
    report.checks.push(Check::bound(
        "ideal-slice left side above the sharp bound",
        min_sharp,
        1e-12,
    ));
    Ok(report)
}

fn dilation(
    config: &ScenarioConfig,
    samples: usize,
    outcome_counts: &[usize],
) -> anyhow::Result<RunReport> {
    let mut report = RunReport::new(
        config.scenario.name(),
        config.seed,
        vec![
            "n_outcomes",
            "dim",
            "trial",
            "partial_trace_err",
            "eta_sq_dilation",
            "eta_sq_intrinsic",
            "eta_abs_diff",
        ],
    );
    let tol = config.tol.unwrap_or(1e-10);
    report.tolerances.push(("dilation_agreement".into(), tol));
    let mut worst_pt = 0.0f64;
    let mut worst_eta = 0.0f64;
    let mut rng = seeded_rng(config.seed);
    for &n in outcome_counts {
        for trial in 0..samples {
            let dim = if trial % 2 == 0 { n } else { n + 1 };
            let pvm = random_pvm(dim, n, &mut rng);
            let rho = random_density(dim, &mut rng);
            let b = random_observable(dim, &mut rng);
            let check = dilation_crosscheck(&pvm, &rho, &b)?;
            worst_pt = worst_pt.max(check.partial_trace_err);
            worst_eta = worst_eta.max(check.eta_abs_diff());
            report.rows.push(vec![
                Cell::Int(n as i64),
                Cell::Int(dim as i64),
                Cell::Int(trial as i64),
                Cell::Num(check.partial_trace_err),
                Cell::Num(check.eta_sq_dilation),
                Cell::Num(check.eta_sq_intrinsic),
                Cell::Num(check.eta_abs_diff()),
            ]);
        }
    }
    report
        .checks
        .push(Check::agreement("partial trace identity", worst_pt, tol));
    report
        .checks
        .push(Check::agreement("disturbance both routes", worst_eta, tol));
    Ok(report)
}

fn profile_sweep(
    config: &ScenarioConfig,
    gaussian_sigmas: &[f64],
    alpha_b_min: f64,
    alpha_b_max: f64,
    alpha_b_steps: usize,
) -> anyhow::Result<RunReport> {
    let mut report = RunReport::new(
        config.scenario.name(),
        config.seed,
        vec![
            "kind",
            "param",
            "sigma_x_sq",
            "eta_p_sq",
            "optimality_product",
            "closed_vs_quad_rel",
        ],
    );
    report.tolerances.push(("optimality_floor".into(), 1e-8));
    report.tolerances.push(("closed_vs_quad_rel".into(), 1e-4));

    let mut entries: Vec<(String, f64, AcceptanceProfile)> = Vec::new();
    for &sigma in gaussian_sigmas {
        entries.push((
            "gaussian".into(),
            sigma,
            AcceptanceProfile::gaussian(sigma)?,
        ));
    }
    for k in 0..alpha_b_steps {
        let t = k as f64 / (alpha_b_steps - 1).max(1) as f64;
        let ab = alpha_b_min * (alpha_b_max / alpha_b_min).powf(t);
        entries.push((
            "smoothed_square".into(),
            ab,
            AcceptanceProfile::smoothed_square(ab, 1.0)?,
        ));
    }
    for (idx, eps) in [0.05, 0.15, 0.3].iter().enumerate() {
        let n = 801;
        let r = 12.0;
        let us: Vec<f64> = (0..n).map(|i| -r + 2.0 * r * i as f64 / (n - 1) as f64).collect();
        let fs: Vec<f64> = us
            .iter()
            .map(|&u| (-u * u / 4.0).exp() * (1.0 + eps * (1.5 * u).cos()))
            .collect();
        entries.push((
            "perturbed_gaussian".into(),
            idx as f64,
            AcceptanceProfile::tabulated(us, fs)?,
        ));
    }
    for (idx, w) in [0.4, 0.25].iter().enumerate() {
        let n = 801;
        let r = 14.0;
        let us: Vec<f64> = (0..n).map(|i| -r + 2.0 * r * i as f64 / (n - 1) as f64).collect();
        let fs: Vec<f64> = us
            .iter()
            .map(|&u| (-u * u / 4.0).exp() + w * (-u * u).exp())
            .collect();
        entries.push((
            "two_width_mixture".into(),
            idx as f64,
            AcceptanceProfile::tabulated(us, fs)?,
        ));
    }

    let mut min_floor_margin = f64::INFINITY;
    let mut worst_quad = 0.0f64;
    for (kind, param, profile) in &entries {
        let sigma_sq = profile.sigma_x_squared()?;
        let eta_sq = profile.eta_p_squared()?;
        let product = 4.0 * sigma_sq * eta_sq;
        let quad_rel = (sigma_sq - profile.second_moment_quadrature()).abs() / sigma_sq;
        min_floor_margin = min_floor_margin.min(product - 1.0);
        worst_quad = worst_quad.max(quad_rel);
        report.rows.push(vec![
            Cell::Text(kind.clone()),
            Cell::Num(*param),
            Cell::Num(sigma_sq),
            Cell::Num(eta_sq),
            Cell::Num(product),
            Cell::Num(quad_rel),
        ]);
    }
    report.checks.push(Check::bound(
        "optimality product above the gaussian floor",
        min_floor_margin,
        1e-8,
    ));
    report.checks.push(Check::agreement(
        "closed forms vs quadrature",
        worst_quad,
        1e-4,
    ));
    Ok(report)
}
