use std::sync::{Arc, Mutex};

use sparse_lms::filters::*;
use sparse_lms::harness::*;
use sparse_lms::presets::{build_preset, Preset};
use sparse_lms::scenario::{Scenario, Stage, StageSchedule};
use sparse_lms::signals::{gen_regressor_stream, InputModel, NoiseModel, SparseSystemSpec};

fn small(nonzero: &[usize], iterations: usize, noise: f64, mu: f64, rho: f64) -> Scenario {
    Scenario {
        name: "small".into(),
        runs: 4,
        master_seed: 3,
        window: 5,
        algorithms: ["lms", "lp", "lpgc", "lpngc"].map(String::from).to_vec(),
        input: InputModel::WhiteGaussian { variance: 1.0 },
        noise: NoiseModel { variance: noise },
        schedule: StageSchedule {
            stages: nonzero
                .iter()
                .map(|&k| Stage {
                    iterations,
                    system: SparseSystemSpec::random(8, k),
                })
                .collect(),
        },
        per_stage_params: nonzero
            .iter()
            .map(|_| LpParams::new(mu, rho, 0.05, 0.5).unwrap())
            .collect(),
        rho_by_algorithm: Default::default(),
    }
}

#[test]
fn zero_system_noiseless_lms_stays_at_zero() {
    let s = small(&[0], 100, 0.0, 0.05, 0.0);
    let dev = run_trial(&s, "lms", 1).unwrap();
    assert_eq!(dev.len(), 100);
    assert!(dev.iter().all(|d| *d == 0.0));
}

#[test]
fn frozen_filter_keeps_initial_deviation() {
    let s = small(&[3], 100, 0.01, 0.0, 0.0);
    for alg in ["lms", "lp", "lpgc", "lpngc"] {
        let dev = run_trial(&s, alg, 7).unwrap();
        assert!(dev.iter().all(|d| *d == 3.0), "{alg}");
    }
}

#[test]
fn scalar_lms_closed_form() {
    let w_true = WeightVector::new(vec![1.0]).unwrap();
    let steps = 100;
    let input = vec![1.0; steps];
    let regs = gen_regressor_stream(&input, 1).unwrap();
    let data = TrialData::new(vec![w_true], regs, vec![1.0; steps], vec![steps]).unwrap();
    let mut s = small(&[1], steps, 0.0, 0.5, 0.0);
    s.schedule.stages[0].system = SparseSystemSpec::random(1, 1);
    let dev = data.run(&s, &Lms).unwrap();
    for (k, d) in dev.iter().enumerate() {
        let want = 0.25f64.powi(k as i32 + 1);
        assert!((d - want).abs() <= 1e-12, "k={k}");
    }
}

#[test]
fn one_run_equals_the_trial() {
    let mut s = small(&[2, 4], 100, 0.01, 0.05, 1e-3);
    s.runs = 1;
    let mc = run_monte_carlo(&s).unwrap();
    for curve in &mc.curves {
        let trial = run_trial(&s, &curve.algorithm, trial_seed(s.master_seed, 0)).unwrap();
        assert_eq!(curve.per_iteration_msd, trial);
    }
}

#[test]
fn ensemble_mean_matches_direct_summation() {
    let s = small(&[2, 5], 80, 0.01, 0.05, 1e-3);
    let mc = run_monte_carlo(&s).unwrap();
    for curve in &mc.curves {
        let trials: Vec<Vec<f64>> = (0..s.runs)
            .map(|i| run_trial(&s, &curve.algorithm, trial_seed(s.master_seed, i)).unwrap())
            .collect();
        for (k, m) in curve.per_iteration_msd.iter().enumerate() {
            let direct = trials.iter().map(|t| t[k]).sum::<f64>() / s.runs as f64;
            assert!((m - direct).abs() <= 1e-12 * direct.max(1e-12));
            assert!(*m >= 0.0);
        }
        assert_eq!(curve.per_iteration_msd.len(), 160);
    }
}

#[test]
fn doubling_runs_only_adds_trials() {
    let s = small(&[2], 60, 0.01, 0.05, 1e-3);
    let mut doubled = s.clone();
    doubled.runs = 2 * s.runs;
    let half = run_monte_carlo(&s).unwrap();
    let full = run_monte_carlo(&doubled).unwrap();
    for (h, f) in half.curves.iter().zip(&full.curves) {
        let extra: Vec<Vec<f64>> = (s.runs..doubled.runs)
            .map(|i| run_trial(&s, &h.algorithm, trial_seed(s.master_seed, i)).unwrap())
            .collect();
        for k in 0..60 {
            let added: f64 = extra.iter().map(|t| t[k]).sum();
            let want = (h.per_iteration_msd[k] * s.runs as f64 + added) / doubled.runs as f64;
            assert!((f.per_iteration_msd[k] - want).abs() <= 1e-12 * want.max(1e-12));
        }
    }
}

#[test]
fn ensembles_are_bit_reproducible() {
    let s = small(&[1, 3], 70, 0.01, 0.05, 1e-3);
    assert_eq!(run_monte_carlo(&s).unwrap(), run_monte_carlo(&s).unwrap());
    let mut other = s.clone();
    other.master_seed += 1;
    assert_ne!(run_monte_carlo(&s).unwrap(), run_monte_carlo(&other).unwrap());
}

struct Recording {
    inner: Arc<dyn UpdateRule>,
    name: String,
    trace: Mutex<Vec<(Vec<f64>, f64)>>,
}

impl UpdateRule for Recording {
    fn name(&self) -> &str {
        &self.name
    }
    fn family(&self) -> Algorithm {
        self.inner.family()
    }
    fn apply(&self, state: &mut FilterState, x: &[f64], e: f64) -> sparse_lms::Result<()> {
        // y = e + wᵀx reconstructs the measured output
        let y = e + state.estimate().dot(x);
        self.trace.lock().unwrap().push((x.to_vec(), y));
        self.inner.apply(state, x, e)
    }
}

#[test]
fn algorithms_see_identical_measurements() {
    let s = small(&[2, 4], 100, 0.01, 0.05, 1e-3);
    let builtin = Registry::builtin();
    let recorders: Vec<Arc<Recording>> = s
        .algorithms
        .iter()
        .map(|a| {
            Arc::new(Recording {
                inner: builtin.get(a).unwrap(),
                name: a.clone(),
                trace: Mutex::new(Vec::new()),
            })
        })
        .collect();
    let mut registry = Registry::empty();
    for r in &recorders {
        registry.register(r.clone());
    }
    let prepared = PreparedScenario::new(&s, &registry).unwrap();
    let data = TrialData::generate(&prepared, 17).unwrap();
    for rule in prepared.rules() {
        data.run(&s, rule.as_ref()).unwrap();
    }
    let reference = recorders[0].trace.lock().unwrap().clone();
    assert_eq!(reference.len(), 200);
    for r in &recorders[1..] {
        let trace = r.trace.lock().unwrap();
        for ((xa, ya), (xb, yb)) in reference.iter().zip(trace.iter()) {
            assert_eq!(xa, xb);
            assert!((ya - yb).abs() < 1e-12);
        }
    }
    for (k, (_, y)) in reference.iter().enumerate() {
        assert!((y - data.outputs[k]).abs() < 1e-12);
    }
    // regenerating gives the same data
    let again = TrialData::generate(&prepared, 17).unwrap();
    assert_eq!(again.outputs, data.outputs);
    assert_eq!(again.systems, data.systems);
}

#[test]
fn stage_switch_keeps_filter_state() {
    let s = small(&[1, 4], 60, 0.01, 0.05, 2e-3);
    let prepared = PreparedScenario::new(&s, &Registry::builtin()).unwrap();
    let data = TrialData::generate(&prepared, 5).unwrap();
    let dev = data.run(&s, &LpNgc { ordering: NgcOrdering::Concurrent }).unwrap();

    // same loop by hand, one filter state throughout
    let mut state = FilterState::new(Algorithm::LpNgc, 8, s.per_stage_params[0], 5).unwrap();
    let mut manual = Vec::new();
    for k in 0..120 {
        let stage = k / 60;
        if k == 60 {
            state.set_rho(s.per_stage_params[1].rho).unwrap();
        }
        let x = data.regressors.get(k);
        let e = data.outputs[k] - state.estimate().dot(x);
        state = lp_ngc_step(&state, x, e).unwrap();
        manual.push(state.estimate().squared_distance(&data.systems[stage]));
    }
    assert_eq!(dev, manual);
    // the deviation jumps when the true system changes
    assert_ne!(data.systems[0], data.systems[1]);
}

#[test]
fn per_algorithm_rho_override_is_used() {
    let mut s = small(&[1], 100, 0.01, 0.05, 1e-3);
    let base = run_trial(&s, "lp", 3).unwrap();
    s.rho_by_algorithm.insert("lp".into(), 0.0);
    let off = run_trial(&s, "lp", 3).unwrap();
    let lms = run_trial(&s, "lms", 3).unwrap();
    assert_ne!(base, off);
    for (a, b) in off.iter().zip(&lms) {
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn presets_converge_below_initial_deviation() {
    for preset in [Preset::Example1, Preset::Example2] {
        let mut s = build_preset(preset);
        s.runs = 10;
        let mc = run_monte_carlo(&s).unwrap();
        for c in &mc.curves {
            for (stage, ss) in c.steady_state_msd_per_stage.iter().enumerate() {
                // initial deviation of a ±1 system from zero is its nonzero count
                let initial = mc.stage_sparsity[stage] * 16.0;
                assert!(*ss < initial, "{preset} {} stage {stage}", c.algorithm);
            }
        }
    }
    let mut s = build_preset(Preset::Example3);
    s.runs = 3;
    let energy: f64 = sparse_lms::signals::bundled_ecg_ir().iter().map(|v| v * v).sum();
    for c in run_monte_carlo(&s).unwrap().curves {
        assert!(c.steady_state_msd_per_stage[0] < energy, "{}", c.algorithm);
    }
}

#[test]
fn unknown_algorithm_is_rejected() {
    let mut s = small(&[1], 60, 0.01, 0.05, 1e-3);
    s.algorithms.push("nlms".into());
    assert!(run_monte_carlo(&s).is_err());
    assert!(run_trial(&s, "zalms", 0).is_err());
}

#[test]
fn sweep_produces_one_row_per_grid_point() {
    let mut base = small(&[1], 60, 0.01, 0.05, 1e-3);
    base.runs = 2;
    let sweep = sweep_sparsity(&base, &[1, 4, 8], 5e-4).unwrap();
    assert_eq!(sweep.steady_state.len(), 3);
    assert_eq!(sweep.sparsity_ratios(), vec![0.125, 0.5, 1.0]);
    assert_eq!(sweep.column("lms").unwrap().len(), 3);
    assert!(sweep_sparsity(&base, &[9], 5e-4).is_err());
}
