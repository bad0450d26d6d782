use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::ValueEnum;
use sparse_lms::presets::{build_preset, Preset};
use sparse_lms::scenario::Scenario;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PresetChoice {
    Example1,
    Example2,
    Example3,
    Custom,
}

impl PresetChoice {
    pub fn preset(self) -> Option<Preset> {
        match self {
            PresetChoice::Example1 => Some(Preset::Example1),
            PresetChoice::Example2 => Some(Preset::Example2),
            PresetChoice::Example3 => Some(Preset::Example3),
            PresetChoice::Custom => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// Everything needed to turn command-line flags into a scenario.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub preset: PresetChoice,
    pub scenario_file: Option<PathBuf>,
    /// Applied in order; `runs` and `seed` flags are appended last.
    pub overrides: Vec<(String, String)>,
    pub output_path: Option<PathBuf>,
    pub format: Format,
}

impl ExperimentConfig {
    pub fn scenario(&self) -> Result<Scenario> {
        let mut scenario = match (self.preset.preset(), &self.scenario_file) {
            (Some(p), None) => build_preset(p),
            (Some(p), Some(_)) => bail!("preset `{p}` does not take a scenario file"),
            (None, Some(path)) => Scenario::load(path)
                .with_context(|| format!("loading scenario {}", path.display()))?,
            (None, None) => bail!("the custom preset needs --scenario <file>"),
        };
        for (key, value) in &self.overrides {
            scenario.apply_override(key, value)?;
        }
        Ok(scenario)
    }
}

pub fn parse_assignment(s: &str) -> std::result::Result<(String, String), String> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| format!("expected key=value, got `{s}`"))?;
    let k = k.trim();
    if k.is_empty() {
        return Err(format!("empty key in `{s}`"));
    }
    Ok((k.to_string(), v.trim().to_string()))
}
