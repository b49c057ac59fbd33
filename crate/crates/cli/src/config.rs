//! Run configuration: loading, validation and the objects it builds.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use wavewell::dynamics::{initial_state, InitialShape, IntegratorConfig, RecordOptions};
use wavewell::field::{CoefficientField, Diffusivity, DomainGrid, TimeCoefficient};
use wavewell::model::{DampingLaw, Exponents, SourceLaw, WaveModel};
use wavewell::varconst::GeometryOptions;
use wavewell::{Model, State};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemSpec,
    #[serde(default)]
    pub initial: InitialSpec,
    #[serde(default)]
    pub integrator: IntegratorConfig<f64>,
    #[serde(default)]
    pub constants: GeometryOptions,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepGrid>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    #[serde(default = "default_length")]
    pub length: f64,
    #[serde(default = "default_modes")]
    pub n_modes: usize,
    pub q: f64,
    #[serde(default)]
    pub p: f64,
    /// `A(x)`.
    #[serde(default = "unit_diffusivity")]
    pub coefficient: Diffusivity<f64>,
    /// `μ(t)`.
    #[serde(default = "unit_mu")]
    pub mu: TimeCoefficient<f64>,
    #[serde(default)]
    pub damping: DampingFamily,
    #[serde(default)]
    pub source: SourceLaw,
    /// Quadrature layout; the default is 8 Gauss points on `2·n_modes`
    /// cells.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quadrature: Option<QuadratureSpec>,
}

fn default_length() -> f64 {
    PI
}

fn default_modes() -> usize {
    32
}

fn unit_diffusivity() -> Diffusivity<f64> {
    Diffusivity::Constant { value: 1.0 }
}

fn unit_mu() -> TimeCoefficient<f64> {
    TimeCoefficient::Constant { value: 1.0 }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DampingFamily {
    /// `|s|^p s`.
    #[default]
    Power,
    Off,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureSpec {
    pub n_cells: usize,
    pub nodes_per_cell: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSpec {
    #[serde(default = "default_u0")]
    pub u0: InitialShape<f64>,
    #[serde(default = "zero_shape")]
    pub u1: InitialShape<f64>,
}

impl Default for InitialSpec {
    fn default() -> Self {
        Self {
            u0: default_u0(),
            u1: zero_shape(),
        }
    }
}

fn default_u0() -> InitialShape<f64> {
    InitialShape::Mode {
        index: 1,
        amplitude: 0.5,
    }
}

fn zero_shape() -> InitialShape<f64> {
    InitialShape::Zero
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    /// Output directory; `--out` takes precedence.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
    /// Record cadence; overrides `integrator.record_every` when set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub record_every: Option<f64>,
    /// Seed of the optimizer restarts and direction sampling; overrides
    /// `constants.ascent.seed` when set. `--seed` takes precedence.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// `ε` of the auxiliary functional `Y`; `Y` is recorded only when set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y_epsilon: Option<f64>,
}

/// Values swept by the `sweep` command; an absent axis holds the base
/// config's value. `amplitude` multiplies the configured `u0` profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepGrid {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<Vec<f64>>,
}

/// Rewrites `missing field `x`` and `unknown field `x`` errors at `path`
/// into the dotted path of the offending key.
fn field_path(path: &str, message: &str) -> String {
    let path = if path == "." { "" } else { path };
    for marker in ["missing field `", "unknown field `"] {
        if let Some(start) = message.find(marker) {
            let rest = &message[start + marker.len()..];
            if let Some(end) = rest.find('`') {
                let key = &rest[..end];
                return if path.is_empty() {
                    key.to_string()
                } else if path.rsplit('.').next() == Some(key) {
                    path.to_string()
                } else {
                    format!("{path}.{key}")
                };
            }
        }
    }
    if path.is_empty() {
        "<root>".to_string()
    } else {
        path.to_string()
    }
}

impl RunConfig {
    /// Parses TOML or JSON by file extension, folds in the output
    /// overrides and validates the result.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("");
        let cfg = match ext {
            "toml" => Self::from_toml(&text),
            "json" => Self::from_json(&text),
            _ => Err(CliError::Usage(format!(
                "{}: config must have a .toml or .json extension",
                path.display()
            ))),
        }
        .map_err(|e| e.in_file(path))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let de = toml::Deserializer::parse(text).map_err(|e| CliError::Parse {
            file: None,
            field: "<root>".into(),
            message: e.message().trim().to_string(),
        })?;
        let cfg: Self = serde_path_to_error::deserialize(de).map_err(|e| {
            let message = e.inner().message().trim().to_string();
            CliError::Parse {
                file: None,
                field: field_path(&e.path().to_string(), &message),
                message,
            }
        })?;
        Ok(cfg.resolved())
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: Self = serde_path_to_error::deserialize(de).map_err(|e| {
            let message = e.inner().to_string();
            CliError::Parse {
                file: None,
                field: field_path(&e.path().to_string(), &message),
                message,
            }
        })?;
        Ok(cfg.resolved())
    }

    /// Applies the `output` overrides to the sections they shadow.
    pub fn resolved(mut self) -> Self {
        if let Some(r) = self.output.record_every {
            self.integrator.record_every = r;
        }
        if let Some(s) = self.output.seed {
            self.constants.ascent.seed = s;
        }
        self
    }

    pub fn with_seed(mut self, seed: Option<u64>) -> Self {
        if let Some(s) = seed {
            self.output.seed = Some(s);
        }
        self.resolved()
    }

    /// Re-checks every model-level invariant by building the objects.
    pub fn validate(&self) -> Result<(), CliError> {
        self.integrator.validate()?;
        let g = &self.constants.gamma;
        if g.n_points == 0 || !(g.gamma_min > 0.0) || !(g.gamma_max > g.gamma_min) {
            return Err(CliError::Invalid(wavewell::Error::Config {
                field: "constants.gamma".into(),
                reason: "need n_points >= 1 and 0 < gamma_min < gamma_max".into(),
            }));
        }
        if let Some(eps) = self.output.y_epsilon {
            if !(eps > 0.0) {
                return Err(CliError::Invalid(wavewell::Error::Config {
                    field: "output.y_epsilon".into(),
                    reason: format!("must be positive, got {eps}"),
                }));
            }
        }
        let model = self.build_model()?;
        self.build_state(&model)?;
        if let Some(sweep) = &self.sweep {
            for (name, axis) in [("sweep.q", &sweep.q), ("sweep.p", &sweep.p), ("sweep.amplitude", &sweep.amplitude)] {
                if axis.as_ref().is_some_and(|v| v.is_empty()) {
                    return Err(CliError::Invalid(wavewell::Error::Config {
                        field: name.into(),
                        reason: "axis must not be empty".into(),
                    }));
                }
            }
        }
        Ok(())
    }

    pub fn build_model(&self) -> Result<Model, CliError> {
        let p = &self.problem;
        let grid = match p.quadrature {
            Some(qd) => DomainGrid::with_quadrature(p.length, p.n_modes, qd.n_cells, qd.nodes_per_cell)?,
            None => DomainGrid::new(p.length, p.n_modes)?,
        };
        let coeff = CoefficientField::new(p.coefficient, p.mu, &grid, self.integrator.t_end)?;
        let damping = match p.damping {
            DampingFamily::Power => DampingLaw::Power,
            DampingFamily::Off => DampingLaw::Off,
        };
        Ok(WaveModel::new(grid, coeff, Exponents::new(p.q, p.p)?)?
            .with_source(p.source)
            .with_damping(damping))
    }

    pub fn build_state(&self, model: &Model) -> Result<State, CliError> {
        Ok(initial_state(model.grid(), &self.initial.u0, &self.initial.u1)?)
    }

    pub fn record_options(&self) -> RecordOptions<f64> {
        RecordOptions {
            y_epsilon: self.output.y_epsilon,
        }
    }

    /// Canonical JSON form, loadable by [`RunConfig::from_json`].
    pub fn echo(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("config serializes")
    }
}
