use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filters::comparator::{
    gc_comparator_into, ngc_comparator_into, ComparatorMatrix, ComparatorWindow,
};
use crate::filters::weights::{lp_attractor_into, LpParams, WeightVector};

/// The four update families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Lms,
    #[serde(rename = "lp")]
    LpLms,
    #[serde(rename = "lpgc")]
    LpGc,
    #[serde(rename = "lpngc")]
    LpNgc,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [
        Algorithm::Lms,
        Algorithm::LpLms,
        Algorithm::LpGc,
        Algorithm::LpNgc,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Lms => "lms",
            Algorithm::LpLms => "lp",
            Algorithm::LpGc => "lpgc",
            Algorithm::LpNgc => "lpngc",
        }
    }

    pub fn uses_attractor(self) -> bool {
        !matches!(self, Algorithm::Lms)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::UnknownAlgorithm(s.to_string()))
    }
}

/// When the windowed comparator is formed relative to the current gate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NgcOrdering {
    /// The current gate is pushed before the window is read.
    #[default]
    Concurrent,
    /// The window is read first, so the gate lags one iteration.
    Lagged,
}

#[derive(Debug, Clone, Default)]
struct Scratch {
    attractor: Vec<f64>,
    gate: Vec<f64>,
    windowed: Vec<f64>,
}

/// Filter estimate plus everything an update needs to advance it.
///
/// The comparator window exists exactly for [`Algorithm::LpNgc`].
#[derive(Debug, Clone)]
pub struct FilterState {
    estimate: WeightVector,
    params: LpParams,
    window: Option<ComparatorWindow>,
    algorithm: Algorithm,
    scratch: Scratch,
}

impl FilterState {
    /// Zero-initialised filter of `taps` coefficients.
    pub fn new(algorithm: Algorithm, taps: usize, params: LpParams, window: usize) -> Result<Self> {
        if taps == 0 {
            return Err(Error::param("taps", "filter needs at least one tap"));
        }
        Self::with_estimate(algorithm, WeightVector::zeros(taps), params, window)
    }

    pub fn with_estimate(
        algorithm: Algorithm,
        estimate: WeightVector,
        params: LpParams,
        window: usize,
    ) -> Result<Self> {
        params.validate()?;
        let window = match algorithm {
            Algorithm::LpNgc => Some(ComparatorWindow::new(window)?),
            _ => None,
        };
        let n = estimate.len();
        Ok(FilterState {
            estimate,
            params,
            window,
            algorithm,
            scratch: Scratch {
                attractor: vec![0.0; n],
                gate: vec![0.0; n],
                windowed: vec![0.0; n],
            },
        })
    }

    pub fn estimate(&self) -> &WeightVector {
        &self.estimate
    }

    pub fn params(&self) -> &LpParams {
        &self.params
    }

    pub fn window(&self) -> Option<&ComparatorWindow> {
        self.window.as_ref()
    }

    pub fn algorithm(&self) -> Algorithm {
        self.algorithm
    }

    pub fn taps(&self) -> usize {
        self.estimate.len()
    }

    /// Replaces the attractor weight, leaving the estimate and window intact.
    pub fn set_rho(&mut self, rho: f64) -> Result<()> {
        let params = LpParams { rho, ..self.params };
        params.validate()?;
        self.params = params;
        Ok(())
    }

    /// A-priori error `y − wᵀx`.
    pub fn error(&self, x: &[f64], y: f64) -> f64 {
        y - self.estimate.dot(x)
    }

    fn check_inputs(&self, x: &[f64], e: f64) -> Result<()> {
        if x.len() != self.taps() {
            return Err(Error::ShapeMismatch {
                expected: self.taps(),
                actual: x.len(),
            });
        }
        if !e.is_finite() {
            return Err(Error::NonFinite("error sample"));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("regressor"));
        }
        Ok(())
    }

    fn check_estimate(&self) -> Result<()> {
        if self.estimate.iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(Error::NonFinite("estimate"))
        }
    }

    /// `w ← w + μ·e·x`
    pub fn apply_lms(&mut self, x: &[f64], e: f64) -> Result<()> {
        self.check_inputs(x, e)?;
        let step = self.params.mu * e;
        for (w, xi) in self.estimate.as_mut_slice().iter_mut().zip(x) {
            *w += step * xi;
        }
        self.check_estimate()
    }

    /// `w ← w + μ·e·x − t(w)` with `t` the p-norm attractor.
    pub fn apply_lp(&mut self, x: &[f64], e: f64) -> Result<()> {
        self.check_inputs(x, e)?;
        lp_attractor_into(&self.estimate, &self.params, &mut self.scratch.attractor);
        let step = self.params.mu * e;
        for ((w, xi), t) in self
            .estimate
            .as_mut_slice()
            .iter_mut()
            .zip(x)
            .zip(&self.scratch.attractor)
        {
            *w += step * xi - t;
        }
        self.check_estimate()
    }

    /// `w ← w + μ·e·x − gate ⊙ t(w)` for an externally supplied gate.
    pub fn apply_gated(&mut self, x: &[f64], e: f64, gate: &[f64]) -> Result<()> {
        self.check_inputs(x, e)?;
        if gate.len() != self.taps() {
            return Err(Error::ShapeMismatch {
                expected: self.taps(),
                actual: gate.len(),
            });
        }
        lp_attractor_into(&self.estimate, &self.params, &mut self.scratch.attractor);
        self.gated_update(x, e, gate);
        self.check_estimate()
    }

    fn gated_update(&mut self, x: &[f64], e: f64, gate: &[f64]) {
        let step = self.params.mu * e;
        for (((w, xi), t), g) in self
            .estimate
            .as_mut_slice()
            .iter_mut()
            .zip(x)
            .zip(&self.scratch.attractor)
            .zip(gate)
        {
            *w += step * xi - g * t;
        }
    }

    /// Gradient-compared update: the gate is computed from the pre-update estimate.
    pub fn apply_gc(&mut self, x: &[f64], e: f64) -> Result<()> {
        self.check_inputs(x, e)?;
        let mut gate = std::mem::take(&mut self.scratch.gate);
        gc_comparator_into(x, e, &self.estimate, &mut gate);
        lp_attractor_into(&self.estimate, &self.params, &mut self.scratch.attractor);
        self.gated_update(x, e, &gate);
        self.scratch.gate = gate;
        self.check_estimate()
    }

    /// Windowed gradient-compared update.
    pub fn apply_ngc(&mut self, x: &[f64], e: f64, ordering: NgcOrdering) -> Result<()> {
        self.check_inputs(x, e)?;
        if self.window.is_none() {
            return Err(Error::param("window", "state has no comparator window"));
        }
        let n = self.taps();
        let mut gate = std::mem::take(&mut self.scratch.gate);
        let mut windowed = std::mem::take(&mut self.scratch.windowed);
        gc_comparator_into(x, e, &self.estimate, &mut gate);
        let window = self.window.as_mut().expect("checked above");
        match ordering {
            NgcOrdering::Concurrent => {
                window.push_from(&gate);
                ngc_comparator_into(window, &mut windowed).expect("window holds the current gate");
            }
            NgcOrdering::Lagged => {
                if window.is_empty() {
                    windowed.iter_mut().for_each(|d| *d = 0.0);
                } else {
                    ngc_comparator_into(window, &mut windowed).expect("non-empty window");
                }
                window.push_from(&gate);
            }
        }
        debug_assert_eq!(windowed.len(), n);
        lp_attractor_into(&self.estimate, &self.params, &mut self.scratch.attractor);
        self.gated_update(x, e, &windowed);
        self.scratch.gate = gate;
        self.scratch.windowed = windowed;
        self.check_estimate()
    }
}

/// `w' = w + μ·e·x`
pub fn lms_step(state: &FilterState, x: &[f64], e: f64) -> Result<FilterState> {
    let mut next = state.clone();
    next.apply_lms(x, e)?;
    Ok(next)
}

/// `w' = w + μ·e·x − t(w)`
pub fn lp_lms_step(state: &FilterState, x: &[f64], e: f64) -> Result<FilterState> {
    let mut next = state.clone();
    next.apply_lp(x, e)?;
    Ok(next)
}

/// `w' = w + μ·e·x − gate ⊙ t(w)`
pub fn lp_gated_step(
    state: &FilterState,
    x: &[f64],
    e: f64,
    gate: &ComparatorMatrix,
) -> Result<FilterState> {
    let mut next = state.clone();
    next.apply_gated(x, e, gate.diag())?;
    Ok(next)
}

/// `w' = w + μ·e·x − G ⊙ t(w)` with `G` the instantaneous comparator.
pub fn lp_gc_step(state: &FilterState, x: &[f64], e: f64) -> Result<FilterState> {
    let mut next = state.clone();
    next.apply_gc(x, e)?;
    Ok(next)
}

/// `w' = w + μ·e·x − D ⊙ t(w)` with `D` the windowed comparator, the
/// current gate included.
pub fn lp_ngc_step(state: &FilterState, x: &[f64], e: f64) -> Result<FilterState> {
    let mut next = state.clone();
    next.apply_ngc(x, e, NgcOrdering::Concurrent)?;
    Ok(next)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(mu: f64, rho: f64) -> LpParams {
        LpParams::new(mu, rho, 0.05, 0.5).unwrap()
    }

    fn state(alg: Algorithm, w: &[f64], p: LpParams) -> FilterState {
        FilterState::with_estimate(alg, WeightVector::new(w.to_vec()).unwrap(), p, 5).unwrap()
    }

    #[test]
    fn lms_examples() {
        let s = FilterState::new(Algorithm::Lms, 2, params(0.1, 0.0), 5).unwrap();
        let next = lms_step(&s, &[1.0, 2.0], 1.0).unwrap();
        assert!((next.estimate()[0] - 0.1).abs() < 1e-15);
        assert!((next.estimate()[1] - 0.2).abs() < 1e-15);

        let s = state(Algorithm::Lms, &[0.3, -0.7], params(0.1, 0.0));
        assert_eq!(lms_step(&s, &[4.0, 5.0], 0.0).unwrap().estimate(), s.estimate());
        let frozen = state(Algorithm::Lms, &[0.3, -0.7], params(0.0, 0.0));
        assert_eq!(lms_step(&frozen, &[4.0, 5.0], 3.0).unwrap().estimate(), frozen.estimate());
    }

    #[test]
    fn lp_examples() {
        let s = FilterState::new(Algorithm::LpLms, 3, params(0.1, 0.01), 5).unwrap();
        let next = lp_lms_step(&s, &[1.0, 2.0, 3.0], 0.0).unwrap();
        assert!(next.estimate().iter().all(|w| *w == 0.0));

        let s = state(Algorithm::LpLms, &[1.0, 0.0], params(0.0, 0.001));
        let next = lp_lms_step(&s, &[7.0, -3.0], 2.5).unwrap();
        assert!((next.estimate()[0] - (1.0 - 0.001 / 1.05)).abs() < 1e-15);
        assert_eq!(next.estimate()[1], 0.0);
    }

    #[test]
    fn gc_gates_only_opposing_taps() {
        // e·x = [−1, −1]; w = [1, −1] → G = [1, 0]
        let s = state(Algorithm::LpGc, &[1.0, -1.0], params(0.0, 0.001));
        let next = lp_gc_step(&s, &[-1.0, -1.0], 1.0).unwrap();
        // ‖w‖_0.5 = 4, so ‖w‖^(0.5) = 2
        assert!((next.estimate()[0] - (1.0 - 0.001 * 2.0 / 1.05)).abs() < 1e-15);
        assert_eq!(next.estimate()[1], -1.0);
    }

    #[test]
    fn ngc_first_step_from_zero_is_plain_lms() {
        let s = FilterState::new(Algorithm::LpNgc, 3, params(0.05, 0.01), 5).unwrap();
        let x = [0.4, -1.2, 2.0];
        let next = lp_ngc_step(&s, &x, 0.8).unwrap();
        for (w, xi) in next.estimate().iter().zip(x) {
            assert_eq!(*w, 0.05 * 0.8 * xi);
        }
        assert_eq!(next.window().unwrap().len(), 1);
    }

    #[test]
    fn window_present_only_for_ngc() {
        for alg in Algorithm::ALL {
            let s = FilterState::new(alg, 4, params(0.1, 0.0), 5).unwrap();
            assert_eq!(s.window().is_some(), alg == Algorithm::LpNgc);
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let s = FilterState::new(Algorithm::LpLms, 2, params(0.1, 0.01), 5).unwrap();
        assert!(matches!(lms_step(&s, &[1.0], 1.0), Err(Error::ShapeMismatch { .. })));
        assert!(matches!(lp_lms_step(&s, &[1.0, f64::NAN], 1.0), Err(Error::NonFinite(_))));
        assert!(matches!(lp_gc_step(&s, &[1.0, 1.0], f64::NAN), Err(Error::NonFinite(_))));
        assert!(FilterState::new(Algorithm::Lms, 0, params(0.1, 0.0), 5).is_err());
        assert!(FilterState::new(Algorithm::LpNgc, 3, params(0.1, 0.0), 0).is_err());
    }

    #[test]
    fn divergence_is_reported() {
        let s = state(Algorithm::Lms, &[1.0], params(1e300, 0.0));
        assert!(matches!(lms_step(&s, &[1e300], 1e10), Err(Error::NonFinite("estimate"))));
    }

    #[test]
    fn lagged_ordering_skips_attraction_on_first_step() {
        let mut s = state(Algorithm::LpNgc, &[1.0, -1.0], params(0.0, 0.01));
        s.apply_ngc(&[1.0, 1.0], -1.0, NgcOrdering::Lagged).unwrap();
        assert_eq!(s.estimate().as_slice(), &[1.0, -1.0]);
        assert_eq!(s.window().unwrap().len(), 1);
    }

    #[test]
    fn algorithm_names_round_trip() {
        for alg in Algorithm::ALL {
            assert_eq!(alg.name().parse::<Algorithm>().unwrap(), alg);
        }
        assert!("nlms".parse::<Algorithm>().is_err());
    }
}
