//! The three reference experiments.
//!
//! [`build_preset`] assembles each scenario; [`verify_preset`] checks a
//! scenario against the independent [`REFERENCE`] table so the two cannot
//! drift apart silently.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filters::LpParams;
use crate::scenario::{default_algorithms, Scenario, Stage, StageSchedule};
use crate::signals::{InputModel, NoiseModel, SparseSystemSpec, SystemSource};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    Example1,
    Example2,
    Example3,
}

impl Preset {
    pub const ALL: [Preset; 3] = [Preset::Example1, Preset::Example2, Preset::Example3];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Example1 => "example1",
            Preset::Example2 => "example2",
            Preset::Example3 => "example3",
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::UnknownPreset(s.to_string()))
    }
}

/// Default master seed of every preset.
pub const DEFAULT_SEED: u64 = 2015;
/// Attractor weight of the sparsity sweep.
pub const SWEEP_RHO: f64 = 0.0005;
/// Iterations of the single-stage ECG experiment.
pub const EXAMPLE3_ITERATIONS: usize = 5000;

pub fn build_preset(preset: Preset) -> Scenario {
    match preset {
        Preset::Example1 => {
            // 16 taps, SR 1/16 → 4/16 → 8/16, white input, SNR 20 dB
            let rhos = [8e-4, 3e-4, 1e-4];
            Scenario {
                name: preset.name().into(),
                runs: 200,
                master_seed: DEFAULT_SEED,
                window: 5,
                algorithms: default_algorithms(),
                input: InputModel::WhiteGaussian { variance: 1.0 },
                noise: NoiseModel { variance: 1e-2 },
                schedule: random_schedule(16, &[1, 4, 8], 500),
                per_stage_params: rhos.iter().map(|&rho| params(0.05, rho, 0.05)).collect(),
                rho_by_algorithm: Default::default(),
            }
        }
        Preset::Example2 => {
            let rhos = [5e-4, 5e-5, 1e-5];
            Scenario {
                name: preset.name().into(),
                runs: 200,
                master_seed: DEFAULT_SEED,
                window: 5,
                algorithms: default_algorithms(),
                input: InputModel::Ar1Normalized {
                    ar_coefficient: 0.8,
                    innovation_variance: 1e-2,
                    output_variance: 1.0,
                },
                noise: NoiseModel { variance: 1e-1 },
                schedule: random_schedule(16, &[1, 4, 8], 3000),
                per_stage_params: rhos.iter().map(|&rho| params(0.015, rho, 0.1)).collect(),
                rho_by_algorithm: Default::default(),
            }
        }
        Preset::Example3 => Scenario {
            name: preset.name().into(),
            runs: 200,
            master_seed: DEFAULT_SEED,
            window: 5,
            algorithms: default_algorithms(),
            input: InputModel::WhiteGaussian { variance: 1.0 },
            noise: NoiseModel { variance: 1e-1 },
            schedule: StageSchedule {
                stages: vec![Stage {
                    iterations: EXAMPLE3_ITERATIONS,
                    system: SparseSystemSpec::bundled_ecg(),
                }],
            },
            per_stage_params: vec![params(0.005, 7e-6, 0.1)],
            rho_by_algorithm: Default::default(),
        },
    }
}

fn params(mu: f64, rho: f64, epsilon: f64) -> LpParams {
    LpParams {
        mu,
        rho,
        epsilon,
        p: 0.5,
    }
}

fn random_schedule(n_taps: usize, nonzero: &[usize], iterations: usize) -> StageSchedule {
    StageSchedule {
        stages: nonzero
            .iter()
            .map(|&k| Stage {
                iterations,
                system: SparseSystemSpec::random(n_taps, k),
            })
            .collect(),
    }
}

/// One row of the reference parameter table.
#[derive(Debug, Clone, Copy)]
pub struct PresetReference {
    pub preset: Preset,
    pub n_taps: usize,
    /// Nonzero taps per stage.
    pub nonzero: &'static [usize],
    pub stage_iterations: usize,
    pub mu: f64,
    pub epsilon: f64,
    pub p: f64,
    pub window: usize,
    pub rho: &'static [f64],
    pub runs: usize,
    pub input_variance: f64,
    /// `(coefficient, innovation variance)` for correlated input.
    pub ar1: Option<(f64, f64)>,
    pub noise_variance: f64,
}

pub const REFERENCE: [PresetReference; 3] = [
    PresetReference {
        preset: Preset::Example1,
        n_taps: 16,
        nonzero: &[1, 4, 8],
        stage_iterations: 500,
        mu: 0.05,
        epsilon: 0.05,
        p: 0.5,
        window: 5,
        rho: &[0.0008, 0.0003, 0.0001],
        runs: 200,
        input_variance: 1.0,
        ar1: None,
        noise_variance: 0.01,
    },
    PresetReference {
        preset: Preset::Example2,
        n_taps: 16,
        nonzero: &[1, 4, 8],
        stage_iterations: 3000,
        mu: 0.015,
        epsilon: 0.1,
        p: 0.5,
        window: 5,
        rho: &[0.0005, 0.00005, 0.00001],
        runs: 200,
        input_variance: 1.0,
        ar1: Some((0.8, 0.01)),
        noise_variance: 0.1,
    },
    PresetReference {
        preset: Preset::Example3,
        n_taps: 256,
        nonzero: &[28],
        stage_iterations: EXAMPLE3_ITERATIONS,
        mu: 0.005,
        epsilon: 0.1,
        p: 0.5,
        window: 5,
        rho: &[0.000007],
        runs: 200,
        input_variance: 1.0,
        ar1: None,
        noise_variance: 0.1,
    },
];

pub fn reference(preset: Preset) -> &'static PresetReference {
    REFERENCE
        .iter()
        .find(|r| r.preset == preset)
        .expect("every preset has a reference row")
}

/// Checks every parameter of `scenario` against the reference row.
///
/// Run counts and seeds are excluded since they are meant to be overridden.
pub fn verify_preset(preset: Preset, scenario: &Scenario) -> Result<()> {
    let r = reference(preset);
    let drift = |field: &str| Error::PresetDrift {
        preset: preset.name().into(),
        field: field.into(),
    };
    let stages = &scenario.schedule.stages;
    if scenario.n_taps() != r.n_taps {
        return Err(drift("n_taps"));
    }
    if stages.len() != r.nonzero.len() || scenario.per_stage_params.len() != r.rho.len() {
        return Err(drift("stage count"));
    }
    for (i, stage) in stages.iter().enumerate() {
        if stage.iterations != r.stage_iterations {
            return Err(drift("stage iterations"));
        }
        let nonzero = match &stage.system.source {
            SystemSource::RandomSparse { n_nonzero } => *n_nonzero,
            SystemSource::BundledEcg => crate::signals::ECG_NONZERO,
            SystemSource::TapFile { .. } => return Err(drift("system source")),
        };
        if nonzero != r.nonzero[i] {
            return Err(drift("nonzero taps"));
        }
        let p = &scenario.per_stage_params[i];
        if p.mu != r.mu {
            return Err(drift("mu"));
        }
        if p.epsilon != r.epsilon {
            return Err(drift("epsilon"));
        }
        if p.p != r.p {
            return Err(drift("p"));
        }
        if p.rho != r.rho[i] {
            return Err(drift("rho"));
        }
    }
    if scenario.window != r.window {
        return Err(drift("window"));
    }
    if scenario.noise.variance != r.noise_variance {
        return Err(drift("noise variance"));
    }
    let ar1 = match scenario.input {
        InputModel::WhiteGaussian { .. } => None,
        InputModel::Ar1Normalized {
            ar_coefficient,
            innovation_variance,
            ..
        } => Some((ar_coefficient, innovation_variance)),
    };
    if ar1 != r.ar1 || scenario.input.variance() != r.input_variance {
        return Err(drift("input model"));
    }
    Ok(())
}
