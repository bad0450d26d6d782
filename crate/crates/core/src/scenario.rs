//! Experiment descriptions and their plain-text (TOML) form.
//!
//! A scenario file looks like
//!
//! ```toml
//! name = "custom"
//! runs = 50
//! master_seed = 7
//! window = 5
//! algorithms = ["lms", "lp", "lpgc", "lpngc"]
//!
//! [input]
//! kind = "white_gaussian"        # or "ar1_normalized"
//! variance = 1.0
//!
//! [noise]
//! variance = 0.01
//!
//! [[stages]]
//! iterations = 500
//! n_taps = 16
//! kind = "random_sparse"         # or "bundled_ecg", "tap_file" (+ path)
//! n_nonzero = 1
//!
//! [[per_stage_params]]
//! mu = 0.05
//! rho = 0.0008
//! epsilon = 0.05
//! p = 0.5
//!
//! [rho_by_algorithm]             # optional, overrides the per-stage rho
//! lpgc = 0.0003
//! ```
//!
//! Individual fields can be overridden with flat dotted keys, see
//! [`Scenario::apply_override`].

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filters::{ComparatorWindow, LpParams};
use crate::signals::{InputModel, NoiseModel, SparseSystemSpec, SystemSource};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stage {
    pub iterations: usize,
    #[serde(flatten)]
    pub system: SparseSystemSpec,
}

/// Consecutive stages; a fresh true system is drawn at every boundary while
/// the filters carry on from where they were.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StageSchedule {
    pub stages: Vec<Stage>,
}

impl StageSchedule {
    pub fn total_iterations(&self) -> usize {
        self.stages.iter().map(|s| s.iterations).sum()
    }

    pub fn lengths(&self) -> Vec<usize> {
        self.stages.iter().map(|s| s.iterations).collect()
    }

    pub fn len(&self) -> usize {
        self.stages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stages.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    #[serde(default = "default_name")]
    pub name: String,
    pub runs: usize,
    pub master_seed: u64,
    #[serde(default = "default_window")]
    pub window: usize,
    #[serde(default = "default_algorithms")]
    pub algorithms: Vec<String>,
    pub input: InputModel,
    pub noise: NoiseModel,
    #[serde(rename = "stages")]
    pub schedule: StageSchedule,
    pub per_stage_params: Vec<LpParams>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub rho_by_algorithm: BTreeMap<String, f64>,
}

fn default_name() -> String {
    "custom".to_string()
}

fn default_window() -> usize {
    ComparatorWindow::DEFAULT_CAPACITY
}

pub fn default_algorithms() -> Vec<String> {
    ["lms", "lp", "lpgc", "lpngc"].map(String::from).to_vec()
}

impl Scenario {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let scenario: Scenario = toml::from_str(text).map_err(|e| Error::Parse {
            path: "<scenario>".into(),
            reason: e.to_string(),
        })?;
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Parse { reason, .. } => Error::Parse {
                path: path.to_path_buf(),
                reason,
            },
            other => other,
        })
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("scenario serialises to TOML")
    }

    pub fn n_taps(&self) -> usize {
        self.schedule.stages.first().map_or(0, |s| s.system.n_taps)
    }

    /// Attractor weight used by `algorithm` during `stage`.
    pub fn rho_for(&self, algorithm: &str, stage: usize) -> f64 {
        self.rho_by_algorithm
            .get(algorithm)
            .copied()
            .unwrap_or(self.per_stage_params[stage].rho)
    }

    pub fn validate(&self) -> Result<()> {
        if self.runs == 0 {
            return Err(Error::param("runs", "must be >= 1"));
        }
        if self.schedule.is_empty() {
            return Err(Error::param("stages", "at least one stage is required"));
        }
        if self.per_stage_params.len() != self.schedule.len() {
            return Err(Error::param(
                "per_stage_params",
                format!(
                    "{} parameter blocks for {} stages",
                    self.per_stage_params.len(),
                    self.schedule.len()
                ),
            ));
        }
        if self.window == 0 {
            return Err(Error::param("window", "must be >= 1"));
        }
        if self.algorithms.is_empty() {
            return Err(Error::param("algorithms", "at least one algorithm is required"));
        }
        let n = self.n_taps();
        for (i, stage) in self.schedule.stages.iter().enumerate() {
            stage.system.validate()?;
            if stage.system.n_taps != n {
                return Err(Error::param(
                    format!("stage.{}.n_taps", i + 1),
                    format!("all stages must share the tap count {n}"),
                ));
            }
            if stage.iterations == 0 {
                return Err(Error::param(
                    format!("stage.{}.iterations", i + 1),
                    "must be >= 1",
                ));
            }
        }
        let first = self.per_stage_params[0];
        for (i, params) in self.per_stage_params.iter().enumerate() {
            params.validate()?;
            if params.mu != first.mu || params.epsilon != first.epsilon || params.p != first.p {
                return Err(Error::param(
                    format!("per_stage_params[{}]", i + 1),
                    "mu, epsilon and p must be the same in every stage",
                ));
            }
        }
        for (name, rho) in &self.rho_by_algorithm {
            if !self.algorithms.contains(name) {
                return Err(Error::param(
                    format!("rho.{name}"),
                    "no such algorithm in this scenario",
                ));
            }
            if !rho.is_finite() || *rho < 0.0 {
                return Err(Error::param(format!("rho.{name}"), "must be >= 0"));
            }
        }
        self.input.validate()?;
        self.noise.validate()
    }

    /// Applies one `key=value` override.
    ///
    /// Keys: `name`, `runs`, `seed`, `window`, `algorithms` (comma list),
    /// `params.mu`, `params.epsilon`, `params.p`, `params.rho` (every stage),
    /// `params.rho.stageN`, `rho.<algorithm>`, `noise.variance`,
    /// `input.kind`, `input.variance`, `input.ar_coefficient`,
    /// `input.innovation_variance`, `input.output_variance`,
    /// `stages.iterations`, `stage.N.iterations`, `stage.N.n_nonzero`.
    /// Stage numbers are 1-based.
    pub fn apply_override(&mut self, key: &str, value: &str) -> Result<()> {
        let bad = |reason: &str| Error::InvalidOverride {
            key: key.to_string(),
            value: value.to_string(),
            reason: reason.to_string(),
        };
        let parts: Vec<&str> = key.split('.').collect();
        match parts.as_slice() {
            ["name"] => self.name = value.to_string(),
            ["runs"] => {
                let runs: usize = parse(key, value)?;
                if runs == 0 {
                    return Err(bad("must be >= 1"));
                }
                self.runs = runs;
            }
            ["seed"] | ["master_seed"] => self.master_seed = parse(key, value)?,
            ["window"] => {
                let s: usize = parse(key, value)?;
                if s == 0 {
                    return Err(bad("must be >= 1"));
                }
                self.window = s;
            }
            ["algorithms"] => {
                let names: Vec<String> = value
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(String::from)
                    .collect();
                if names.is_empty() {
                    return Err(bad("needs at least one algorithm"));
                }
                self.algorithms = names;
            }
            ["params" | "mu" | "epsilon" | "p", ..] => {
                let field = if parts[0] == "params" {
                    parts.get(1).copied()
                } else {
                    Some(parts[0])
                };
                self.override_params(key, field, parts.get(2).copied(), value)?;
            }
            ["rho", algorithm] => {
                let rho: f64 = parse(key, value)?;
                if !(rho.is_finite() && rho >= 0.0) {
                    return Err(bad("must be >= 0"));
                }
                self.rho_by_algorithm.insert(algorithm.to_string(), rho);
            }
            ["noise", "variance"] => {
                let v: f64 = parse(key, value)?;
                if !(v.is_finite() && v >= 0.0) {
                    return Err(bad("must be >= 0"));
                }
                self.noise.variance = v;
            }
            ["input", field] => self.override_input(key, field, value)?,
            ["stages", "iterations"] => {
                let it: usize = parse(key, value)?;
                if it == 0 {
                    return Err(bad("must be >= 1"));
                }
                self.schedule.stages.iter_mut().for_each(|s| s.iterations = it);
            }
            ["stage", index, field] => {
                let i = self.stage_index(key, index)?;
                let stage = &mut self.schedule.stages[i];
                match *field {
                    "iterations" => {
                        let it: usize = parse(key, value)?;
                        if it == 0 {
                            return Err(bad("must be >= 1"));
                        }
                        stage.iterations = it;
                    }
                    "n_nonzero" => {
                        let k: usize = parse(key, value)?;
                        if k > stage.system.n_taps {
                            return Err(bad("exceeds the tap count"));
                        }
                        stage.system.source = SystemSource::RandomSparse { n_nonzero: k };
                    }
                    _ => return Err(Error::UnknownKey(key.to_string())),
                }
            }
            _ => return Err(Error::UnknownKey(key.to_string())),
        }
        // Range problems not caught above surface under the offending key.
        self.validate().map_err(|e| match e {
            Error::InvalidParameter { reason, .. } => bad(&reason),
            other => other,
        })
    }

    fn stage_index(&self, key: &str, token: &str) -> Result<usize> {
        let digits = token.strip_prefix("stage").unwrap_or(token);
        let n: usize = parse(key, digits)?;
        if n == 0 || n > self.schedule.len() {
            return Err(Error::InvalidOverride {
                key: key.to_string(),
                value: token.to_string(),
                reason: format!("stage must be in 1..={}", self.schedule.len()),
            });
        }
        Ok(n - 1)
    }

    fn override_params(
        &mut self,
        key: &str,
        field: Option<&str>,
        stage: Option<&str>,
        value: &str,
    ) -> Result<()> {
        let v: f64 = parse(key, value)?;
        let stages: Vec<usize> = match (field, stage) {
            (Some("rho"), Some(s)) => vec![self.stage_index(key, s)?],
            (_, None) => (0..self.per_stage_params.len()).collect(),
            _ => return Err(Error::UnknownKey(key.to_string())),
        };
        for i in stages {
            let params = &mut self.per_stage_params[i];
            match field {
                Some("mu") => params.mu = v,
                Some("rho") => params.rho = v,
                Some("epsilon") => params.epsilon = v,
                Some("p") => params.p = v,
                _ => return Err(Error::UnknownKey(key.to_string())),
            }
        }
        Ok(())
    }

    fn override_input(&mut self, key: &str, field: &str, value: &str) -> Result<()> {
        let unknown = || Error::UnknownKey(key.to_string());
        if field == "kind" {
            self.input = match value {
                "white_gaussian" => InputModel::WhiteGaussian {
                    variance: self.input.variance(),
                },
                "ar1_normalized" => InputModel::Ar1Normalized {
                    ar_coefficient: 0.8,
                    innovation_variance: 1e-2,
                    output_variance: self.input.variance(),
                },
                _ => {
                    return Err(Error::InvalidOverride {
                        key: key.to_string(),
                        value: value.to_string(),
                        reason: "expected white_gaussian or ar1_normalized".into(),
                    })
                }
            };
            return Ok(());
        }
        let v: f64 = parse(key, value)?;
        match (&mut self.input, field) {
            (InputModel::WhiteGaussian { variance }, "variance") => *variance = v,
            (InputModel::Ar1Normalized { ar_coefficient, .. }, "ar_coefficient") => {
                *ar_coefficient = v
            }
            (
                InputModel::Ar1Normalized {
                    innovation_variance,
                    ..
                },
                "innovation_variance",
            ) => *innovation_variance = v,
            (
                InputModel::Ar1Normalized {
                    output_variance, ..
                },
                "output_variance" | "variance",
            ) => *output_variance = v,
            _ => return Err(unknown()),
        }
        Ok(())
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value.trim().parse().map_err(|e: T::Err| Error::InvalidOverride {
        key: key.to_string(),
        value: value.to_string(),
        reason: e.to_string(),
    })
}
