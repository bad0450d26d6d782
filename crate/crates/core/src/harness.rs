//! Single identification trials and Monte-Carlo ensembles.

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::filters::{FilterState, LpParams, Registry, UpdateRule, WeightVector};
use crate::scenario::Scenario;
use crate::signals::{
    derive_seed, gen_input, gen_regressor_stream, stream, PreparedSystem, RegressorStream, Stream,
};

/// Minimum stage length for a steady-state estimate.
pub const MIN_STAGE_ITERATIONS: usize = 50;

/// Trials aggregated per parallel batch.
const BATCH: usize = 64;

/// A validated scenario with its systems loaded and its rules resolved.
#[derive(Clone)]
pub struct PreparedScenario {
    scenario: Scenario,
    systems: Vec<PreparedSystem>,
    rules: Vec<Arc<dyn UpdateRule>>,
}

impl PreparedScenario {
    pub fn new(scenario: &Scenario, registry: &Registry) -> Result<Self> {
        scenario.validate()?;
        let systems = scenario
            .schedule
            .stages
            .iter()
            .map(|s| s.system.prepare())
            .collect::<Result<Vec<_>>>()?;
        let rules = scenario
            .algorithms
            .iter()
            .map(|name| registry.get(name))
            .collect::<Result<Vec<_>>>()?;
        Ok(PreparedScenario {
            scenario: scenario.clone(),
            systems,
            rules,
        })
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn rules(&self) -> &[Arc<dyn UpdateRule>] {
        &self.rules
    }

    pub fn sparsity_ratios(&self) -> Vec<f64> {
        self.systems.iter().map(PreparedSystem::sparsity_ratio).collect()
    }

    fn rule_index(&self, name: &str) -> Result<usize> {
        self.rules
            .iter()
            .position(|r| r.name() == name)
            .ok_or_else(|| Error::UnknownAlgorithm(name.to_string()))
    }
}

/// Everything random about one trial. Every algorithm of the trial is run
/// against the same instance, so all of them see identical `(x_k, y_k)`.
#[derive(Debug, Clone)]
pub struct TrialData {
    /// True system of each stage.
    pub systems: Vec<WeightVector>,
    pub regressors: RegressorStream,
    /// Noisy outputs `y_k = w_stageᵀ x_k + n_k`.
    pub outputs: Vec<f64>,
    stage_lengths: Vec<usize>,
}

impl TrialData {
    pub fn generate(prepared: &PreparedScenario, trial_seed: u64) -> Result<Self> {
        let scenario = &prepared.scenario;
        let n = scenario.n_taps();
        let total = scenario.schedule.total_iterations();

        let mut system_rng = stream(trial_seed, Stream::System);
        let systems = prepared
            .systems
            .iter()
            .map(|s| s.draw(&mut system_rng))
            .collect::<Result<Vec<_>>>()?;

        // one continuous input sequence across all stages
        let mut input_rng = stream(trial_seed, Stream::Input);
        let input = gen_input(&scenario.input, total + n - 1, &mut input_rng)?;
        let regressors = gen_regressor_stream(&input, n)?;

        let mut noise_rng = stream(trial_seed, Stream::Noise);
        let mut outputs = Vec::with_capacity(total);
        let stage_lengths = scenario.schedule.lengths();
        let mut k = 0;
        for (system, &len) in systems.iter().zip(&stage_lengths) {
            for _ in 0..len {
                let x = regressors.get(k);
                outputs.push(system.dot(x) + scenario.noise.sample(&mut noise_rng));
                k += 1;
            }
        }
        Ok(TrialData {
            systems,
            regressors,
            outputs,
            stage_lengths,
        })
    }

    /// Assembles trial data by hand, e.g. for deterministic inputs.
    pub fn new(
        systems: Vec<WeightVector>,
        regressors: RegressorStream,
        outputs: Vec<f64>,
        stage_lengths: Vec<usize>,
    ) -> Result<Self> {
        if systems.len() != stage_lengths.len() {
            return Err(Error::ShapeMismatch {
                expected: stage_lengths.len(),
                actual: systems.len(),
            });
        }
        let total: usize = stage_lengths.iter().sum();
        if outputs.len() != total || regressors.len() < total {
            return Err(Error::ShapeMismatch {
                expected: total,
                actual: outputs.len().min(regressors.len()),
            });
        }
        if let Some(w) = systems.iter().find(|w| w.len() != regressors.taps()) {
            return Err(Error::ShapeMismatch {
                expected: regressors.taps(),
                actual: w.len(),
            });
        }
        Ok(TrialData {
            systems,
            regressors,
            outputs,
            stage_lengths,
        })
    }

    pub fn stage_lengths(&self) -> &[usize] {
        &self.stage_lengths
    }

    pub fn len(&self) -> usize {
        self.outputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outputs.is_empty()
    }

    /// Runs `rule` from a zero estimate and returns `‖w_true − w_k‖₂²` after
    /// every update, measured against the stage's current true system.
    pub fn run(&self, scenario: &Scenario, rule: &dyn UpdateRule) -> Result<Vec<f64>> {
        let base = scenario.per_stage_params[0];
        let initial = LpParams {
            rho: scenario.rho_for(rule.name(), 0),
            ..base
        };
        let mut state =
            FilterState::new(rule.family(), scenario.n_taps(), initial, scenario.window)?;
        let mut deviations = Vec::with_capacity(self.len());
        let mut k = 0;
        for (stage, (system, &len)) in self.systems.iter().zip(&self.stage_lengths).enumerate() {
            state.set_rho(scenario.rho_for(rule.name(), stage))?;
            for _ in 0..len {
                let x = self.regressors.get(k);
                let e = state.error(x, self.outputs[k]);
                rule.apply(&mut state, x, e)?;
                deviations.push(state.estimate().squared_distance(system));
                k += 1;
            }
        }
        Ok(deviations)
    }
}

/// Squared deviations of one algorithm over one trial.
pub fn run_trial(scenario: &Scenario, algorithm: &str, trial_seed: u64) -> Result<Vec<f64>> {
    let prepared = PreparedScenario::new(scenario, &Registry::builtin())?;
    let rule = &prepared.rules[prepared.rule_index(algorithm)?];
    TrialData::generate(&prepared, trial_seed)?.run(scenario, rule.as_ref())
}

/// Seed of trial `index`.
pub fn trial_seed(master_seed: u64, index: usize) -> u64 {
    derive_seed(master_seed, index as u64)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MsdCurve {
    pub algorithm: String,
    pub per_iteration_msd: Vec<f64>,
    pub steady_state_msd_per_stage: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonteCarloResult {
    pub scenario: String,
    pub runs: usize,
    pub master_seed: u64,
    pub stage_lengths: Vec<usize>,
    pub stage_sparsity: Vec<f64>,
    pub curves: Vec<MsdCurve>,
}

impl MonteCarloResult {
    pub fn curve(&self, algorithm: &str) -> Option<&MsdCurve> {
        self.curves.iter().find(|c| c.algorithm == algorithm)
    }

    pub fn total_iterations(&self) -> usize {
        self.stage_lengths.iter().sum()
    }

    /// Stage index of every iteration.
    pub fn stage_of_iteration(&self) -> Vec<usize> {
        self.stage_lengths
            .iter()
            .enumerate()
            .flat_map(|(s, &len)| std::iter::repeat_n(s, len))
            .collect()
    }
}

pub fn run_monte_carlo(scenario: &Scenario) -> Result<MonteCarloResult> {
    run_monte_carlo_with(scenario, &Registry::builtin())
}

/// Averages squared deviations over `scenario.runs` paired trials.
///
/// Trials run in parallel but are summed in trial order, so results do not
/// depend on scheduling.
pub fn run_monte_carlo_with(scenario: &Scenario, registry: &Registry) -> Result<MonteCarloResult> {
    let prepared = PreparedScenario::new(scenario, registry)?;
    let total = scenario.schedule.total_iterations();
    let n_alg = prepared.rules.len();
    let mut sums = vec![vec![0.0; total]; n_alg];

    let mut start = 0;
    while start < scenario.runs {
        let end = (start + BATCH).min(scenario.runs);
        let batch = (start..end)
            .into_par_iter()
            .map(|i| {
                let data = TrialData::generate(&prepared, trial_seed(scenario.master_seed, i))?;
                prepared
                    .rules
                    .iter()
                    .map(|rule| data.run(scenario, rule.as_ref()))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        for trial in batch {
            for (sum, dev) in sums.iter_mut().zip(trial) {
                for (s, d) in sum.iter_mut().zip(dev) {
                    *s += d;
                }
            }
        }
        start = end;
    }

    let runs = scenario.runs as f64;
    let lengths = scenario.schedule.lengths();
    let curves = prepared
        .rules
        .iter()
        .zip(sums)
        .map(|(rule, sum)| {
            let msd: Vec<f64> = sum.into_iter().map(|s| s / runs).collect();
            let steady = steady_state_msd(&msd, &lengths)?;
            Ok(MsdCurve {
                algorithm: rule.name().to_string(),
                per_iteration_msd: msd,
                steady_state_msd_per_stage: steady,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(MonteCarloResult {
        scenario: scenario.name.clone(),
        runs: scenario.runs,
        master_seed: scenario.master_seed,
        stage_sparsity: prepared.sparsity_ratios(),
        stage_lengths: lengths,
        curves,
    })
}

/// Mean of each stage's final 10% (rounded up) of iterations.
pub fn steady_state_msd(curve: &[f64], stage_lengths: &[usize]) -> Result<Vec<f64>> {
    let total: usize = stage_lengths.iter().sum();
    if total != curve.len() {
        return Err(Error::ShapeMismatch {
            expected: total,
            actual: curve.len(),
        });
    }
    let mut out = Vec::with_capacity(stage_lengths.len());
    let mut end = 0;
    for (stage, &len) in stage_lengths.iter().enumerate() {
        if len < MIN_STAGE_ITERATIONS {
            return Err(Error::StageTooShort {
                stage: stage + 1,
                iterations: len,
                min: MIN_STAGE_ITERATIONS,
            });
        }
        end += len;
        let tail = len.div_ceil(10);
        let window = &curve[end - tail..end];
        out.push(window.iter().sum::<f64>() / tail as f64);
    }
    Ok(out)
}

pub fn msd_in_db(msd: f64) -> Result<f64> {
    if msd > 0.0 && msd.is_finite() {
        Ok(10.0 * msd.log10())
    } else {
        Err(Error::param("msd", format!("must be positive, got {msd}")))
    }
}

/// Steady-state MSD per algorithm at each point of a sparsity grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub n_taps: usize,
    pub nonzero: Vec<usize>,
    pub algorithms: Vec<String>,
    /// `steady_state[point][algorithm]`
    pub steady_state: Vec<Vec<f64>>,
}

impl SweepResult {
    pub fn sparsity_ratios(&self) -> Vec<f64> {
        self.nonzero
            .iter()
            .map(|&k| k as f64 / self.n_taps as f64)
            .collect()
    }

    pub fn column(&self, algorithm: &str) -> Option<Vec<f64>> {
        let j = self.algorithms.iter().position(|a| a == algorithm)?;
        Some(self.steady_state.iter().map(|row| row[j]).collect())
    }
}

/// Runs a single-stage version of `base` at every sparsity level in
/// `nonzero` with a fixed attractor weight.
///
/// The stage length, step size, ε and p come from the first stage of `base`;
/// every grid point uses the same master seed.
pub fn sweep_sparsity(base: &Scenario, nonzero: &[usize], rho: f64) -> Result<SweepResult> {
    base.validate()?;
    if nonzero.is_empty() {
        return Err(Error::param("grid", "sparsity grid is empty"));
    }
    let n_taps = base.n_taps();
    let first = base.schedule.stages[0].clone();
    let params = LpParams {
        rho,
        ..base.per_stage_params[0]
    };
    let mut steady_state = Vec::with_capacity(nonzero.len());
    for &k in nonzero {
        let mut scenario = base.clone();
        scenario.name = format!("{}-sr{k}", base.name);
        scenario.schedule.stages = vec![crate::scenario::Stage {
            iterations: first.iterations,
            system: crate::signals::SparseSystemSpec::random(n_taps, k),
        }];
        scenario.per_stage_params = vec![params];
        scenario.rho_by_algorithm.clear();
        let result = run_monte_carlo(&scenario)?;
        steady_state.push(
            result
                .curves
                .iter()
                .map(|c| c.steady_state_msd_per_stage[0])
                .collect(),
        );
    }
    Ok(SweepResult {
        n_taps,
        nonzero: nonzero.to_vec(),
        algorithms: base.algorithms.clone(),
        steady_state,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn steady_state_windows() {
        assert_eq!(steady_state_msd(&vec![0.3; 100], &[50, 50]).unwrap(), vec![0.3, 0.3]);
        let mut c = vec![1.0; 500];
        c[450..].iter_mut().for_each(|v| *v = 0.01);
        let ss = steady_state_msd(&c, &[500]).unwrap();
        assert!((ss[0] - 0.01).abs() < 1e-15);
    }

    #[test]
    fn steady_state_linear_tail() {
        // 0, 1, …, 99 → last 10 are 90..99, mean 94.5
        let c: Vec<f64> = (0..100).map(f64::from).collect();
        let ss = steady_state_msd(&c, &[100]).unwrap();
        let direct: f64 = (90..100).map(f64::from).sum::<f64>() / 10.0;
        assert_eq!(ss[0], direct);
        assert_eq!(direct, 94.5);
    }

    #[test]
    fn steady_state_errors() {
        assert!(matches!(
            steady_state_msd(&[0.0; 40], &[40]),
            Err(Error::StageTooShort { .. })
        ));
        assert!(matches!(
            steady_state_msd(&[0.0; 60], &[50]),
            Err(Error::ShapeMismatch { .. })
        ));
    }

    #[test]
    fn decibels() {
        assert_eq!(msd_in_db(1.0).unwrap(), 0.0);
        assert!((msd_in_db(0.01).unwrap() + 20.0).abs() < 1e-12);
        assert!((msd_in_db(0.5).unwrap() + 3.010_299_956_639_812).abs() < 1e-12);
        assert!(msd_in_db(0.0).is_err());
        assert!(msd_in_db(-1.0).is_err());
    }
}
