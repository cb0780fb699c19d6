//! Scenario configuration: a TOML file plus command-line overrides, with
//! flags winning over file values, resolved into one typed scenario.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use qmeas::cv::GridSpec;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

/// A named problem with a configuration key.
#[derive(Clone, Debug, PartialEq)]
pub struct Diagnostic {
    /// The offending key, e.g. `successive_xp.sigma_p`.
    pub key: String,
    pub message: String,
}

impl std::fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.key, self.message)
    }
}

/// Raw file shape: every field optional so a file can carry any subset.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub seed: Option<u64>,
    pub format: Option<OutputFormat>,
    pub out: Option<PathBuf>,
    pub grid_n: Option<usize>,
    pub grid_span: Option<f64>,
    pub tol: Option<f64>,
    pub two_state: Option<TwoStateRaw>,
    pub weak_sweep: Option<WeakSweepRaw>,
    pub successive_xp: Option<SuccessiveRaw>,
    pub joint_ak: Option<JointRaw>,
    pub compare_joint_successive: Option<CompareRaw>,
    pub ozawa_gap: Option<OzawaRaw>,
    pub dilation_check: Option<DilationRaw>,
    pub profile_sweep: Option<ProfileSweepRaw>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwoStateRaw {
    pub a: Option<Vec<f64>>,
    pub b: Option<Vec<f64>>,
    pub samples: Option<usize>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeakSweepRaw {
    pub a: Option<Vec<f64>>,
    pub b: Option<Vec<f64>>,
    pub theta_steps: Option<usize>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuccessiveRaw {
    pub sigma_x: Option<f64>,
    pub sigma_p: Option<f64>,
    pub var_x: Option<f64>,
    pub x_mean: Option<f64>,
    pub p_mean: Option<f64>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JointRaw {
    pub b: Option<f64>,
    pub a: Option<f64>,
    pub var_x: Option<f64>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareRaw {
    pub sigma_x: Option<f64>,
    pub sigma_p: Option<f64>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OzawaRaw {
    pub samples: Option<usize>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DilationRaw {
    pub samples: Option<usize>,
    pub outcome_counts: Option<Vec<usize>>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileSweepRaw {
    pub gaussian_sigmas: Option<Vec<f64>>,
    pub alpha_b_min: Option<f64>,
    pub alpha_b_max: Option<f64>,
    pub alpha_b_steps: Option<usize>,
}

/// Fully resolved scenario parameters.
#[derive(Clone, Debug)]
pub enum Scenario {
    TwoState {
        a: [f64; 3],
        b: [f64; 3],
        samples: usize,
    },
    WeakSweep {
        a: [f64; 3],
        b: [f64; 3],
        theta_steps: usize,
    },
    SuccessiveXp {
        sigma_x: f64,
        sigma_p: f64,
        /// Defaults to the bound-saturating width.
        var_x: Option<f64>,
        x_mean: f64,
        p_mean: f64,
    },
    JointAk {
        b: f64,
        a: f64,
        /// Defaults to `b^2/2`, the saturating width.
        var_x: Option<f64>,
    },
    CompareJointSuccessive {
        sigma_x: f64,
        sigma_p: f64,
    },
    OzawaGap {
        samples: usize,
    },
    DilationCheck {
        samples: usize,
        outcome_counts: Vec<usize>,
    },
    ProfileSweep {
        gaussian_sigmas: Vec<f64>,
        alpha_b_min: f64,
        alpha_b_max: f64,
        alpha_b_steps: usize,
    },
}

impl Scenario {
    pub fn name(&self) -> &'static str {
        match self {
            Self::TwoState { .. } => "two-state",
            Self::WeakSweep { .. } => "weak-sweep",
            Self::SuccessiveXp { .. } => "successive-xp",
            Self::JointAk { .. } => "joint-ak",
            Self::CompareJointSuccessive { .. } => "compare-joint-successive",
            Self::OzawaGap { .. } => "ozawa-gap",
            Self::DilationCheck { .. } => "dilation-check",
            Self::ProfileSweep { .. } => "profile-sweep",
        }
    }
}

/// Everything a run needs.
#[derive(Clone, Debug)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    pub seed: u64,
    pub format: OutputFormat,
    pub out: Option<PathBuf>,
    pub grid: GridSpec,
    /// Optional override of the scenario's headline check tolerance.
    pub tol: Option<f64>,
}

fn vec3(key: &str, v: &[f64], diagnostics: &mut Vec<Diagnostic>) -> [f64; 3] {
    if v.len() != 3 {
        diagnostics.push(Diagnostic {
            key: key.to_string(),
            message: format!("expected 3 components, got {}", v.len()),
        });
        return [0.0; 3];
    }
    [v[0], v[1], v[2]]
}

fn require<T: Copy>(
    key: &str,
    value: Option<T>,
    diagnostics: &mut Vec<Diagnostic>,
    fallback: T,
) -> T {
    match value {
        Some(v) => v,
        None => {
            diagnostics.push(Diagnostic {
                key: key.to_string(),
                message: "missing required parameter".to_string(),
            });
            fallback
        }
    }
}

/// Builds the typed scenario from raw (file-merged) parameters, collecting
/// diagnostics instead of failing fast.
pub fn resolve_scenario(name: &str, raw: &RawConfig) -> (Option<Scenario>, Vec<Diagnostic>) {
    let mut diags = Vec::new();
    let scenario = match name {
        "two-state" => {
            let p = raw.two_state.clone().unwrap_or_default();
            let a = p
                .a
                .as_deref()
                .map(|v| vec3("two_state.a", v, &mut diags))
                .unwrap_or_else(|| {
                    diags.push(Diagnostic {
                        key: "two_state.a".into(),
                        message: "missing required parameter".into(),
                    });
                    [0.0; 3]
                });
            let b = p
                .b
                .as_deref()
                .map(|v| vec3("two_state.b", v, &mut diags))
                .unwrap_or_else(|| {
                    diags.push(Diagnostic {
                        key: "two_state.b".into(),
                        message: "missing required parameter".into(),
                    });
                    [0.0; 3]
                });
            if a.iter().map(|x| x * x).sum::<f64>() > 1.0 + 1e-10 {
                diags.push(Diagnostic {
                    key: "two_state.a".into(),
                    message: "bloch vector must lie in the unit ball".into(),
                });
            }
            Some(Scenario::TwoState {
                a,
                b,
                samples: p.samples.unwrap_or(0),
            })
        }
        "weak-sweep" => {
            let p = raw.weak_sweep.clone().unwrap_or_default();
            let a = p
                .a
                .as_deref()
                .map(|v| vec3("weak_sweep.a", v, &mut diags))
                .unwrap_or_else(|| {
                    diags.push(Diagnostic {
                        key: "weak_sweep.a".into(),
                        message: "missing required parameter".into(),
                    });
                    [0.0; 3]
                });
            let b = p
                .b
                .as_deref()
                .map(|v| vec3("weak_sweep.b", v, &mut diags))
                .unwrap_or_else(|| {
                    diags.push(Diagnostic {
                        key: "weak_sweep.b".into(),
                        message: "missing required parameter".into(),
                    });
                    [0.0; 3]
                });
            let steps = p.theta_steps.unwrap_or(33);
            if steps < 2 {
                diags.push(Diagnostic {
                    key: "weak_sweep.theta_steps".into(),
                    message: "need at least 2 steps".into(),
                });
            }
            Some(Scenario::WeakSweep {
                a,
                b,
                theta_steps: steps,
            })
        }
        "successive-xp" => {
            let p = raw.successive_xp.clone().unwrap_or_default();
            let sigma_x = require("successive_xp.sigma_x", p.sigma_x, &mut diags, 1.0);
            let sigma_p = require("successive_xp.sigma_p", p.sigma_p, &mut diags, 1.0);
            for (key, v) in [("successive_xp.sigma_x", sigma_x), ("successive_xp.sigma_p", sigma_p)]
            {
                if v <= 0.0 {
                    diags.push(Diagnostic {
                        key: key.into(),
                        message: "must be positive".into(),
                    });
                }
            }
            if let Some(v) = p.var_x {
                if v <= 0.0 {
                    diags.push(Diagnostic {
                        key: "successive_xp.var_x".into(),
                        message: "must be positive".into(),
                    });
                }
            }
            Some(Scenario::SuccessiveXp {
                sigma_x,
                sigma_p,
                var_x: p.var_x,
                x_mean: p.x_mean.unwrap_or(0.0),
                p_mean: p.p_mean.unwrap_or(0.0),
            })
        }
        "joint-ak" => {
            let p = raw.joint_ak.clone().unwrap_or_default();
            let b = require("joint_ak.b", p.b, &mut diags, 1.0);
            if b <= 0.0 {
                diags.push(Diagnostic {
                    key: "joint_ak.b".into(),
                    message: "must be positive".into(),
                });
            }
            let a = p.a.unwrap_or(b);
            if a <= 0.0 {
                diags.push(Diagnostic {
                    key: "joint_ak.a".into(),
                    message: "must be positive".into(),
                });
            }
            Some(Scenario::JointAk {
                b,
                a,
                var_x: p.var_x,
            })
        }
        "compare-joint-successive" => {
            let p = raw.compare_joint_successive.clone().unwrap_or_default();
            let sigma_x = require("compare_joint_successive.sigma_x", p.sigma_x, &mut diags, 0.5);
            let sigma_p = require("compare_joint_successive.sigma_p", p.sigma_p, &mut diags, 0.5);
            if sigma_x > 0.0 && sigma_p > 0.0 && sigma_x * sigma_p > 0.25 {
                diags.push(Diagnostic {
                    key: "compare_joint_successive.sigma_x".into(),
                    message: format!(
                        "sigma_x*sigma_p = {} violates the matching condition sigma_x*sigma_p <= 1/4",
                        sigma_x * sigma_p
                    ),
                });
            }
            Some(Scenario::CompareJointSuccessive { sigma_x, sigma_p })
        }
        "ozawa-gap" => {
            let p = raw.ozawa_gap.clone().unwrap_or_default();
            Some(Scenario::OzawaGap {
                samples: p.samples.unwrap_or(10_000),
            })
        }
        "dilation-check" => {
            let p = raw.dilation_check.clone().unwrap_or_default();
            let counts = p.outcome_counts.unwrap_or_else(|| vec![2, 3, 4]);
            for &n in &counts {
                if !(2..=4).contains(&n) {
                    diags.push(Diagnostic {
                        key: "dilation_check.outcome_counts".into(),
                        message: format!("dilation prescription needs 2 <= N <= 4, got {n}"),
                    });
                }
            }
            Some(Scenario::DilationCheck {
                samples: p.samples.unwrap_or(100),
                outcome_counts: counts,
            })
        }
        "profile-sweep" => {
            let p = raw.profile_sweep.clone().unwrap_or_default();
            let lo = p.alpha_b_min.unwrap_or(0.5);
            let hi = p.alpha_b_max.unwrap_or(20.0);
            if !(lo > 0.0 && hi > lo) {
                diags.push(Diagnostic {
                    key: "profile_sweep.alpha_b_min".into(),
                    message: "need 0 < alpha_b_min < alpha_b_max".into(),
                });
            }
            Some(Scenario::ProfileSweep {
                gaussian_sigmas: p.gaussian_sigmas.unwrap_or_else(|| vec![0.5, 1.0, 2.0]),
                alpha_b_min: lo,
                alpha_b_max: hi,
                alpha_b_steps: p.alpha_b_steps.unwrap_or(12),
            })
        }
        other => {
            diags.push(Diagnostic {
                key: "scenario".into(),
                message: format!("unknown scenario `{other}`"),
            });
            None
        }
    };
    (scenario, diags)
}

/// Config-level validation beyond scenario parameters.
pub fn validate(config: &ScenarioConfig) -> Vec<Diagnostic> {
    let mut diags = Vec::new();
    if config.grid.n < 16 {
        diags.push(Diagnostic {
            key: "grid_n".into(),
            message: format!("need at least 16 grid points, got {}", config.grid.n),
        });
    }
    if config.grid.span_factor < 4.0 {
        diags.push(Diagnostic {
            key: "grid_span".into(),
            message: "span factor below 4 truncates the states the scenarios build".into(),
        });
    }
    if let Some(t) = config.tol {
        if t <= 0.0 {
            diags.push(Diagnostic {
                key: "tol".into(),
                message: "tolerance must be positive".into(),
            });
        }
    }
    if let Scenario::CompareJointSuccessive { sigma_x, sigma_p } = config.scenario {
        if sigma_x * sigma_p > 0.25 {
            diags.push(Diagnostic {
                key: "compare_joint_successive.sigma_x".into(),
                message: format!(
                    "sigma_x*sigma_p = {} violates the matching condition sigma_x*sigma_p <= 1/4",
                    sigma_x * sigma_p
                ),
            });
        }
    }
    diags
}
