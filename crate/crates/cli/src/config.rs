//! Experiment configuration: TOML with nested blocks, validated against the
//! per-experiment required-key table before anything runs.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use randwave::{FamilyKind, Geometry, GeometryKind, RandomFamily};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment: String,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub geometry: Option<GeometryConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<FamilyConfig>,
    #[serde(default)]
    pub params: Params,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GeometryConfig {
    pub kind: GeometryKind,
    pub dimension: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub side_lengths: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FamilyConfig {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probs: Option<Vec<f64>>,
}

/// Numeric parameters; which ones are required depends on the experiment.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_final: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda_grid: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_grid: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub truncations: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_schedule: Option<Vec<u32>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_grid: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_grid: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exponent: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub boundary: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rule: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub steps_grid: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_modes: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub control: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_iter: Option<usize>,
}

/// A config failure, carrying the offending key path.
#[derive(Debug)]
pub struct ValidationError {
    pub key: String,
    pub reason: String,
}

impl std::fmt::Display for ValidationError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "invalid config at `{}`: {}", self.key, self.reason)
    }
}

impl std::error::Error for ValidationError {}

fn invalid(key: &str, reason: impl Into<String>) -> ValidationError {
    ValidationError {
        key: key.into(),
        reason: reason.into(),
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, ValidationError> {
        toml::from_str(text).map_err(|e| invalid("<document>", e.to_string()))
    }

    pub fn build_geometry(&self) -> Result<Geometry, ValidationError> {
        let gc = self
            .geometry
            .as_ref()
            .ok_or_else(|| invalid("geometry", "block required for this experiment"))?;
        let sides = match &gc.side_lengths {
            Some(s) => {
                if s.len() != gc.dimension {
                    return Err(invalid(
                        "geometry.side_lengths",
                        format!("{} entries for dimension {}", s.len(), gc.dimension),
                    ));
                }
                s.clone()
            }
            None => {
                let default = match gc.kind {
                    GeometryKind::Torus => std::f64::consts::TAU,
                    _ => std::f64::consts::PI,
                };
                vec![default; gc.dimension]
            }
        };
        Geometry::new(gc.kind, sides).map_err(|e| invalid("geometry", e.to_string()))
    }

    pub fn build_family(&self) -> Result<RandomFamily, ValidationError> {
        let fc = self
            .family
            .as_ref()
            .ok_or_else(|| invalid("family", "block required for this experiment"))?;
        let kind = match fc.kind.as_str() {
            "gaussian" => FamilyKind::Gaussian,
            "bernoulli" => FamilyKind::Bernoulli,
            "uniform_pm" => FamilyKind::UniformPm,
            "custom_table" => FamilyKind::CustomTable {
                points: fc
                    .points
                    .clone()
                    .ok_or_else(|| invalid("family.points", "required for custom_table"))?,
                probs: fc
                    .probs
                    .clone()
                    .ok_or_else(|| invalid("family.probs", "required for custom_table"))?,
            },
            other => {
                return Err(invalid(
                    "family.kind",
                    format!("unknown family `{other}`"),
                ))
            }
        };
        RandomFamily::new(kind).map_err(|e| invalid("family", e.to_string()))
    }

    pub fn require_trials(&self) -> Result<u64, ValidationError> {
        match self.params.trials {
            Some(0) => Err(invalid("params.trials", "must be at least 1")),
            Some(t) => Ok(t),
            None => Err(invalid("params.trials", "required")),
        }
    }

    /// Checks the per-experiment required keys; the runner then trusts the
    /// accessors.
    pub fn validate(&self) -> Result<(), ValidationError> {
        let spec = crate::registry::find(&self.experiment).ok_or_else(|| {
            invalid(
                "experiment",
                format!(
                    "unknown experiment `{}`; see `randwave list`",
                    self.experiment
                ),
            )
        })?;
        for &key in spec.required {
            let present = match key {
                "geometry" => self.geometry.is_some(),
                "family" => self.family.is_some(),
                "params.s" => self.params.s.is_some(),
                "params.epsilon" => self.params.epsilon.is_some(),
                "params.t_final" => self.params.t_final.is_some(),
                "params.n" => self.params.n.is_some(),
                "params.trials" => self.params.trials.is_some(),
                "params.c" => self.params.c.as_ref().is_some_and(|c| !c.is_empty()),
                "params.lambda_grid" => self
                    .params
                    .lambda_grid
                    .as_ref()
                    .is_some_and(|g| !g.is_empty()),
                "params.t_grid" => self.params.t_grid.as_ref().is_some_and(|g| !g.is_empty()),
                "params.truncations" => self
                    .params
                    .truncations
                    .as_ref()
                    .is_some_and(|g| !g.is_empty()),
                "params.n_schedule" => self
                    .params
                    .n_schedule
                    .as_ref()
                    .is_some_and(|g| !g.is_empty()),
                "params.n_grid" => self.params.n_grid.as_ref().is_some_and(|g| !g.is_empty()),
                "params.p" => self.params.p.is_some(),
                "params.q" => self.params.q.is_some(),
                other => unreachable!("registry names unknown key {other}"),
            };
            if !present {
                return Err(invalid(key, "required"));
            }
        }
        if self.params.trials == Some(0) {
            return Err(invalid("params.trials", "must be at least 1"));
        }
        if matches!(self.params.rule.as_deref(), Some(r) if r != "picard_success" && r != "threshold")
        {
            return Err(invalid(
                "params.rule",
                "must be `picard_success` or `threshold`",
            ));
        }
        Ok(())
    }
}
