use std::path::{Path, PathBuf};

use dynstc::certificates::{
    synthesize_bank, Bisection, CertificateBank, CertificateError, PolytopicEmbedding,
    SamplingRegion, SynthesisSpec, Vertex,
};
use dynstc::linalg::solve_lyapunov;
use dynstc::presets::{example1, example2};
use dynstc::sim::{DisturbanceSignal, LinearSystem, NonlinearSystem};
use dynstc::triggering::{MechanismKind, TriggerConfig, Variant, DEFAULT_DELTA};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// User-defined linear closed loop `ẋ = Ax + Be + Ew`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinearSpec {
    pub a: Vec<Vec<f64>>,
    pub b: Vec<Vec<f64>>,
    pub e: Vec<Vec<f64>>,
    /// Lyapunov matrix; defaults to the solution of `AᵀP + PA = −I`.
    #[serde(default)]
    pub p: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SystemSpec {
    Example1,
    Example2,
    Linear(LinearSpec),
}

/// Sampling rule of one experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MechanismSpec {
    Fir {
        m: usize,
    },
    Iir {
        r1: f64,
        r2: f64,
    },
    Ref,
    /// Fixed sampling period.
    Periodic {
        period: f64,
    },
    /// Fall-back period of the current level.
    LevelAdaptive,
}

impl MechanismSpec {
    pub fn label(&self) -> &'static str {
        match self {
            Self::Fir { .. } => "fir",
            Self::Iir { .. } => "iir",
            Self::Ref => "ref",
            Self::Periodic { .. } => "periodic",
            Self::LevelAdaptive => "level-adaptive",
        }
    }

    pub fn dynamic(&self) -> Option<MechanismKind<f64>> {
        match *self {
            Self::Fir { m } => Some(MechanismKind::Fir { m }),
            Self::Iir { r1, r2 } => Some(MechanismKind::Iir { r1, r2 }),
            Self::Ref => Some(MechanismKind::Ref),
            _ => None,
        }
    }
}

/// One experiment; unset fields take the defaults of the chosen system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub name: Option<String>,
    pub system: SystemSpec,
    #[serde(default)]
    pub mechanism: Option<MechanismSpec>,
    #[serde(default)]
    pub variant: Option<Variant<f64>>,
    #[serde(default)]
    pub eps_ref: Option<f64>,
    #[serde(default)]
    pub delta: Option<f64>,
    #[serde(default)]
    pub x0: Option<Vec<f64>>,
    #[serde(default)]
    pub disturbance: Option<DisturbanceSignal>,
    #[serde(default)]
    pub horizon: Option<f64>,
    #[serde(default)]
    pub bank: Option<PathBuf>,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub epsilon_grid: Option<Vec<f64>>,
    #[serde(default)]
    pub theta: Option<f64>,
    #[serde(default)]
    pub c_levels: Option<Vec<f64>>,
    #[serde(default)]
    pub verify_samples: Option<usize>,
    #[serde(default)]
    pub verify_radius: Option<f64>,
}

/// A set of experiments run side by side, or a named preset suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchConfig {
    #[serde(default)]
    pub suite: Option<String>,
    #[serde(default)]
    pub experiments: Vec<ExperimentConfig>,
}

impl ExperimentConfig {
    pub fn preset(system: SystemSpec, mechanism: MechanismSpec) -> Self {
        Self {
            name: None,
            system,
            mechanism: Some(mechanism),
            variant: None,
            eps_ref: None,
            delta: None,
            x0: None,
            disturbance: None,
            horizon: None,
            bank: None,
            out: None,
            epsilon_grid: None,
            theta: None,
            c_levels: None,
            verify_samples: None,
            verify_radius: None,
        }
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::usage(format!("cannot read {}: {e}", path.display())))?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn system_id(&self) -> &'static str {
        match self.system {
            SystemSpec::Example1 => "example1",
            SystemSpec::Example2 => "example2",
            SystemSpec::Linear(_) => "linear",
        }
    }

    pub fn display_name(&self) -> String {
        self.name.clone().unwrap_or_else(|| {
            let mech = self.mechanism.map_or("certify", |m| m.label());
            format!("{}-{mech}", self.system_id())
        })
    }

    pub fn resolve(&self) -> Result<Experiment, CliError> {
        let defaults = Defaults::of(&self.system)?;
        let mechanism = self
            .mechanism
            .ok_or_else(|| CliError::usage("experiment needs a mechanism"))?;
        let eps_ref = self
            .eps_ref
            .or(defaults.eps_ref)
            .ok_or_else(|| CliError::usage("eps_ref is required for user-defined systems"))?;
        let delta = self.delta.unwrap_or(DEFAULT_DELTA);
        let variant = self.variant.unwrap_or(defaults.variant);
        let trigger = TriggerConfig {
            eps_ref,
            delta,
            variant,
        };
        trigger.validate()?;
        if let Some(kind) = mechanism.dynamic() {
            kind.validate()?;
        }
        let x0 = self
            .x0
            .clone()
            .or(defaults.x0)
            .ok_or_else(|| CliError::usage("x0 is required for user-defined systems"))?;
        let horizon = self
            .horizon
            .or(defaults.horizon)
            .ok_or_else(|| CliError::usage("horizon is required for user-defined systems"))?;
        if !(horizon >= 0.0) || !horizon.is_finite() {
            return Err(CliError::usage("horizon must be finite and non-negative"));
        }
        let disturbance = self.disturbance.clone().unwrap_or(defaults.disturbance);
        Ok(Experiment {
            name: self.display_name(),
            mechanism,
            trigger,
            x0,
            disturbance,
            horizon,
        })
    }

    pub fn synthesis_spec(&self) -> Result<SynthesisSpec<f64>, CliError> {
        let defaults = Defaults::of(&self.system)?;
        let epsilon_grid = self
            .epsilon_grid
            .clone()
            .or(defaults.epsilon_grid)
            .ok_or_else(|| CliError::usage("epsilon_grid is required for user-defined systems"))?;
        if epsilon_grid.is_empty() {
            return Err(CliError::usage("epsilon_grid must not be empty"));
        }
        let theta = self
            .theta
            .or(defaults.theta)
            .ok_or_else(|| CliError::usage("theta is required for user-defined systems"))?;
        let c_levels = self.c_levels.clone().unwrap_or(defaults.c_levels);
        if matches!(self.system, SystemSpec::Example2) && c_levels.is_empty() {
            return Err(CliError::usage("example2 needs at least one level"));
        }
        Ok(SynthesisSpec {
            epsilon_grid,
            theta,
            c_levels,
            bisection: Bisection::default(),
        })
    }

    pub fn p_matrix(&self) -> Result<DMatrix<f64>, CliError> {
        match &self.system {
            SystemSpec::Example1 => Ok(example1::p_matrix()?),
            SystemSpec::Example2 => Ok(example2::p_matrix()),
            SystemSpec::Linear(spec) => match &spec.p {
                Some(p) => matrix(p, "p"),
                None => {
                    let a = matrix(&spec.a, "a")?;
                    let n = a.nrows();
                    solve_lyapunov(&a, &DMatrix::identity(n, n))
                        .ok_or_else(|| CliError::infeasible("AᵀP + PA = −I has no solution"))
                }
            },
        }
    }

    pub fn embedding(&self, c: Option<f64>) -> Result<PolytopicEmbedding<f64>, CertificateError> {
        match &self.system {
            SystemSpec::Example1 => example1::embedding(c),
            SystemSpec::Example2 => example2::embedding(c),
            SystemSpec::Linear(spec) => {
                let conv = |m: &Vec<Vec<f64>>, name: &str| {
                    matrix(m, name).map_err(|e| CertificateError::DimensionMismatch(e.message))
                };
                PolytopicEmbedding::new(
                    vec![Vertex {
                        a: conv(&spec.a, "a")?,
                        b: conv(&spec.b, "b")?,
                        e: conv(&spec.e, "e")?,
                    }],
                    None,
                )
            }
        }
    }

    pub fn sampling_region(&self, c: Option<f64>) -> SamplingRegion {
        let region = match self.system {
            SystemSpec::Example1 => example1::sampling_region(c),
            SystemSpec::Example2 => example2::sampling_region(c),
            SystemSpec::Linear(_) => SamplingRegion {
                x_radius: 1.0,
                w_bound: 1.0,
            },
        };
        SamplingRegion {
            x_radius: self.verify_radius.unwrap_or(region.x_radius),
            ..region
        }
    }

    pub fn system(&self) -> Result<Box<dyn NonlinearSystem>, CliError> {
        Ok(match &self.system {
            SystemSpec::Example1 => Box::new(example1::system()),
            SystemSpec::Example2 => Box::new(example2::system()),
            SystemSpec::Linear(spec) => Box::new(LinearSystem {
                a: matrix(&spec.a, "a")?,
                b: matrix(&spec.b, "b")?,
                e: matrix(&spec.e, "e")?,
            }),
        })
    }

    /// Synthesizes the bank for this system.
    pub fn synthesize(&self) -> Result<CertificateBank<f64>, CliError> {
        let spec = self.synthesis_spec()?;
        let p = self.p_matrix()?;
        Ok(synthesize_bank(|c| self.embedding(c), &p, &spec)?)
    }
}

/// Fully specified experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct Experiment {
    pub name: String,
    pub mechanism: MechanismSpec,
    pub trigger: TriggerConfig<f64>,
    pub x0: Vec<f64>,
    pub disturbance: DisturbanceSignal,
    pub horizon: f64,
}

struct Defaults {
    eps_ref: Option<f64>,
    variant: Variant<f64>,
    x0: Option<Vec<f64>>,
    horizon: Option<f64>,
    disturbance: DisturbanceSignal,
    epsilon_grid: Option<Vec<f64>>,
    theta: Option<f64>,
    c_levels: Vec<f64>,
}

impl Defaults {
    fn of(system: &SystemSpec) -> Result<Self, CliError> {
        Ok(match system {
            SystemSpec::Example1 => Self {
                eps_ref: Some(example1::EPS_REF),
                variant: Variant::Iss,
                x0: Some(example1::X0.to_vec()),
                horizon: Some(example1::horizon()),
                disturbance: example1::disturbance(),
                epsilon_grid: Some(example1::epsilon_grid()),
                theta: Some(example1::THETA),
                c_levels: vec![],
            },
            SystemSpec::Example2 => Self {
                eps_ref: Some(example2::EPS_REF),
                variant: example2::trigger().variant,
                x0: Some(example2::X0.to_vec()),
                horizon: Some(example2::HORIZON),
                disturbance: example2::disturbance(),
                epsilon_grid: Some(example2::epsilon_grid()),
                theta: Some(example2::THETA),
                c_levels: example2::levels(),
            },
            SystemSpec::Linear(_) => Self {
                eps_ref: None,
                variant: Variant::Iss,
                x0: None,
                horizon: None,
                disturbance: DisturbanceSignal::zero(),
                epsilon_grid: None,
                theta: None,
                c_levels: vec![],
            },
        })
    }
}

fn matrix(rows: &[Vec<f64>], name: &str) -> Result<DMatrix<f64>, CliError> {
    let n_rows = rows.len();
    let n_cols = rows.first().map_or(0, Vec::len);
    if n_rows == 0 || n_cols == 0 || rows.iter().any(|r| r.len() != n_cols) {
        return Err(CliError::usage(format!(
            "matrix `{name}` must be a non-empty rectangle"
        )));
    }
    Ok(DMatrix::from_row_iterator(
        n_rows,
        n_cols,
        rows.iter().flatten().copied(),
    ))
}

/// Experiments of a named suite: the three dynamic mechanisms plus the
/// baseline of the system.
pub fn suite(name: &str) -> Result<Vec<ExperimentConfig>, CliError> {
    let (system, baseline) = match name {
        "example1" => (
            SystemSpec::Example1,
            MechanismSpec::Periodic {
                period: example1::BASELINE_PERIOD,
            },
        ),
        "example2" => (SystemSpec::Example2, MechanismSpec::LevelAdaptive),
        other => return Err(CliError::usage(format!("unknown suite `{other}`"))),
    };
    let mechanisms = match system {
        SystemSpec::Example1 => example1::mechanisms(),
        _ => example2::mechanisms(),
    };
    let mut out: Vec<ExperimentConfig> = mechanisms
        .iter()
        .map(|(_, kind)| {
            let spec = match *kind {
                MechanismKind::Fir { m } => MechanismSpec::Fir { m },
                MechanismKind::Iir { r1, r2 } => MechanismSpec::Iir { r1, r2 },
                MechanismKind::Ref => MechanismSpec::Ref,
            };
            ExperimentConfig::preset(system.clone(), spec)
        })
        .collect();
    out.push(ExperimentConfig::preset(system, baseline));
    Ok(out)
}

impl BenchConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::usage(format!("cannot read {}: {e}", path.display())))?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn experiments(&self) -> Result<Vec<ExperimentConfig>, CliError> {
        let mut out = match &self.suite {
            Some(name) => suite(name)?,
            None => vec![],
        };
        out.extend(self.experiments.iter().cloned());
        Ok(out)
    }
}
