//! `qmeas`: run a measurement scenario and emit plot-ready CSV or a full JSON
//! report.
//!
//! Exit status: 0 when the run completes with every check passing, 1 when a
//! check fails or a numerical guard trips, 2 for configuration problems.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use qmeas::cv::GridSpec;
use qmeas_cli::config::{resolve_scenario, validate, OutputFormat, RawConfig, ScenarioConfig};
use qmeas_cli::scenarios::run;

#[derive(Parser)]
#[command(
    name = "qmeas",
    about = "Quantum measurement scenarios: uncertainty and disturbance bounds on real detectors",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct Common {
    /// TOML configuration file; command-line flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output path; stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Output format.
    #[arg(long, global = true, value_enum)]
    format: Option<OutputFormat>,
    /// Base seed for randomized sweeps.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Grid points for kernel scenarios.
    #[arg(long, global = true)]
    grid_n: Option<usize>,
    /// Half-span of the grid in units of the widest characteristic width.
    #[arg(long, global = true)]
    grid_span: Option<f64>,
    /// Override of the scenario's headline check tolerance.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Validate the configuration and exit without running.
    #[arg(long, global = true)]
    validate_only: bool,
}

#[derive(Subcommand, Clone)]
enum Command {
    /// Closed-form two-state measurement statistics vs the matrix engine.
    TwoState {
        #[command(flatten)]
        common: Common,
        /// Bloch vector of the state, comma separated.
        #[arg(long, value_delimiter = ',')]
        a: Option<Vec<f64>>,
        /// Spin direction of the observed component, comma separated.
        #[arg(long, value_delimiter = ',')]
        b: Option<Vec<f64>>,
        /// Extra random (a, b) rows.
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Weak-measurement sweep: relation sides, noise and disturbance vs theta.
    WeakSweep {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',')]
        a: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',')]
        b: Option<Vec<f64>>,
        #[arg(long)]
        theta_steps: Option<usize>,
    },
    /// Measure x then p with finite resolutions; product vs its floor.
    SuccessiveXp {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        sigma_x: Option<f64>,
        #[arg(long)]
        sigma_p: Option<f64>,
        /// State width; defaults to the bound-saturating choice.
        #[arg(long)]
        var_x: Option<f64>,
        #[arg(long)]
        x_mean: Option<f64>,
        #[arg(long)]
        p_mean: Option<f64>,
    },
    /// Simultaneous x/p measurement with pointer widths b (readout) and a.
    JointAk {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        b: Option<f64>,
        #[arg(long)]
        a: Option<f64>,
        /// State width; defaults to b^2/2, the saturating choice.
        #[arg(long)]
        var_x: Option<f64>,
    },
    /// Disturbance-matched joint vs successive measured uncertainties.
    CompareJointSuccessive {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        sigma_x: Option<f64>,
        #[arg(long)]
        sigma_p: Option<f64>,
    },
    /// Random sweep of the weak-measurement relation; reports the minimum gap.
    OzawaGap {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Auxiliary-system realization of the collapse vs the intrinsic forms.
    DilationCheck {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        samples: Option<usize>,
        /// Outcome counts to test (2, 3 and/or 4).
        #[arg(long, value_delimiter = ',')]
        outcome_counts: Option<Vec<usize>>,
    },
    /// Detector-profile sweep: resolution, momentum kick, optimality product.
    ProfileSweep {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',')]
        gaussian_sigmas: Option<Vec<f64>>,
        #[arg(long)]
        alpha_b_min: Option<f64>,
        #[arg(long)]
        alpha_b_max: Option<f64>,
        #[arg(long)]
        alpha_b_steps: Option<usize>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::TwoState { .. } => "two-state",
            Command::WeakSweep { .. } => "weak-sweep",
            Command::SuccessiveXp { .. } => "successive-xp",
            Command::JointAk { .. } => "joint-ak",
            Command::CompareJointSuccessive { .. } => "compare-joint-successive",
            Command::OzawaGap { .. } => "ozawa-gap",
            Command::DilationCheck { .. } => "dilation-check",
            Command::ProfileSweep { .. } => "profile-sweep",
        }
    }

    fn common(&self) -> &Common {
        match self {
            Command::TwoState { common, .. }
            | Command::WeakSweep { common, .. }
            | Command::SuccessiveXp { common, .. }
            | Command::JointAk { common, .. }
            | Command::CompareJointSuccessive { common, .. }
            | Command::OzawaGap { common, .. }
            | Command::DilationCheck { common, .. }
            | Command::ProfileSweep { common, .. } => common,
        }
    }

    /// Overlays the command-line values onto the file config; flags win.
    fn overlay(&self, raw: &mut RawConfig) {
        match self.clone() {
            Command::TwoState { a, b, samples, .. } => {
                let t = raw.two_state.get_or_insert_with(Default::default);
                if a.is_some() {
                    t.a = a;
                }
                if b.is_some() {
                    t.b = b;
                }
                if samples.is_some() {
                    t.samples = samples;
                }
            }
            Command::WeakSweep {
                a, b, theta_steps, ..
            } => {
                let t = raw.weak_sweep.get_or_insert_with(Default::default);
                if a.is_some() {
                    t.a = a;
                }
                if b.is_some() {
                    t.b = b;
                }
                if theta_steps.is_some() {
                    t.theta_steps = theta_steps;
                }
            }
            Command::SuccessiveXp {
                sigma_x,
                sigma_p,
                var_x,
                x_mean,
                p_mean,
                ..
            } => {
                let t = raw.successive_xp.get_or_insert_with(Default::default);
                if sigma_x.is_some() {
                    t.sigma_x = sigma_x;
                }
                if sigma_p.is_some() {
                    t.sigma_p = sigma_p;
                }
                if var_x.is_some() {
                    t.var_x = var_x;
                }
                if x_mean.is_some() {
                    t.x_mean = x_mean;
                }
                if p_mean.is_some() {
                    t.p_mean = p_mean;
                }
            }
            Command::JointAk { b, a, var_x, .. } => {
                let t = raw.joint_ak.get_or_insert_with(Default::default);
                if b.is_some() {
                    t.b = b;
                }
                if a.is_some() {
                    t.a = a;
                }
                if var_x.is_some() {
                    t.var_x = var_x;
                }
            }
            Command::CompareJointSuccessive {
                sigma_x, sigma_p, ..
            } => {
                let t = raw
                    .compare_joint_successive
                    .get_or_insert_with(Default::default);
                if sigma_x.is_some() {
                    t.sigma_x = sigma_x;
                }
                if sigma_p.is_some() {
                    t.sigma_p = sigma_p;
                }
            }
            Command::OzawaGap { samples, .. } => {
                let t = raw.ozawa_gap.get_or_insert_with(Default::default);
                if samples.is_some() {
                    t.samples = samples;
                }
            }
            Command::DilationCheck {
                samples,
                outcome_counts,
                ..
            } => {
                let t = raw.dilation_check.get_or_insert_with(Default::default);
                if samples.is_some() {
                    t.samples = samples;
                }
                if outcome_counts.is_some() {
                    t.outcome_counts = outcome_counts;
                }
            }
            Command::ProfileSweep {
                gaussian_sigmas,
                alpha_b_min,
                alpha_b_max,
                alpha_b_steps,
                ..
            } => {
                let t = raw.profile_sweep.get_or_insert_with(Default::default);
                if gaussian_sigmas.is_some() {
                    t.gaussian_sigmas = gaussian_sigmas;
                }
                if alpha_b_min.is_some() {
                    t.alpha_b_min = alpha_b_min;
                }
                if alpha_b_max.is_some() {
                    t.alpha_b_max = alpha_b_max;
                }
                if alpha_b_steps.is_some() {
                    t.alpha_b_steps = alpha_b_steps;
                }
            }
        }
    }
}

fn init_threads() {
    if let Ok(value) = std::env::var("QMEAS_THREADS") {
        if let Ok(threads) = value.parse::<usize>() {
            if threads >= 1 {
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(threads)
                    .build_global();
            }
        }
    }
}

fn build_config(command: &Command) -> Result<ScenarioConfig, Vec<qmeas_cli::Diagnostic>> {
    let common = command.common().clone();
    let mut raw = if let Some(path) = &common.config {
        let text = std::fs::read_to_string(path).map_err(|e| {
            vec![qmeas_cli::Diagnostic {
                key: "config".into(),
                message: format!("cannot read {}: {e}", path.display()),
            }]
        })?;
        toml::from_str::<RawConfig>(&text).map_err(|e| {
            vec![qmeas_cli::Diagnostic {
                key: "config".into(),
                message: format!("parse error: {e}"),
            }]
        })?
    } else {
        RawConfig::default()
    };
    command.overlay(&mut raw);

    let (scenario, diags) = resolve_scenario(command.name(), &raw);
    if !diags.is_empty() {
        return Err(diags);
    }
    let defaults = GridSpec::default();
    let config = ScenarioConfig {
        scenario: scenario.expect("no diagnostics implies a scenario"),
        seed: common.seed.or(raw.seed).unwrap_or(0),
        format: common.format.or(raw.format).unwrap_or(OutputFormat::Csv),
        out: common.out.or(raw.out),
        grid: GridSpec {
            n: common.grid_n.or(raw.grid_n).unwrap_or(defaults.n),
            span_factor: common
                .grid_span
                .or(raw.grid_span)
                .unwrap_or(defaults.span_factor),
        },
        tol: common.tol.or(raw.tol),
    };
    let diags = validate(&config);
    if !diags.is_empty() {
        return Err(diags);
    }
    Ok(config)
}

fn main() -> ExitCode {
    init_threads();
    let cli = Cli::parse();
    let validate_only = cli.command.common().validate_only;
    let config = match build_config(&cli.command) {
        Ok(config) => config,
        Err(diags) => {
            for d in &diags {
                eprintln!("config error: {d}");
            }
            return ExitCode::from(2);
        }
    };
    if validate_only {
        eprintln!("configuration ok: scenario {}", config.scenario.name());
        return ExitCode::SUCCESS;
    }

    let report = match run(&config) {
        Ok(report) => report,
        Err(err) => {
            eprintln!("run failed: {err:#}");
            return ExitCode::from(1);
        }
    };

    let payload = match config.format {
        OutputFormat::Csv => report.to_csv(),
        OutputFormat::Json => {
            let mut text = serde_json::to_string_pretty(&report.to_json())
                .expect("json serialization cannot fail");
            text.push('\n');
            text
        }
    };
    let write_result = match &config.out {
        Some(path) => std::fs::write(path, payload.as_bytes()),
        None => std::io::stdout().write_all(payload.as_bytes()),
    };
    if let Err(err) = write_result {
        eprintln!("cannot write output: {err}");
        return ExitCode::from(1);
    }

    for check in report.checks.iter().chain(&report.convergence) {
        eprintln!(
            "check {}: {} (margin {:.3e}, tolerance {:.3e})",
            if check.pass { "pass" } else { "FAIL" },
            check.name,
            check.margin,
            check.tolerance
        );
    }
    eprintln!(
        "scenario {} finished in {} ms, {} rows, seed {}",
        report.scenario,
        report.wall_ms,
        report.rows.len(),
        report.seed
    );
    if report.failed_checks() > 0 {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    }
}
