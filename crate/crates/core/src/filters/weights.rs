use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense real tap vector. Used for both the true system and its estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    pub fn zeros(len: usize) -> Self {
        WeightVector(vec![0.0; len])
    }

    /// Wraps `taps`, rejecting empty or non-finite input.
    pub fn new(taps: Vec<f64>) -> Result<Self> {
        if taps.is_empty() {
            return Err(Error::param("taps", "a weight vector needs at least one tap"));
        }
        if taps.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("weight vector"));
        }
        Ok(WeightVector(taps))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub(crate) fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn dot(&self, x: &[f64]) -> f64 {
        self.0.iter().zip(x).map(|(a, b)| a * b).sum()
    }

    /// Squared euclidean distance, `‖self − other‖₂²`.
    pub fn squared_distance(&self, other: &[f64]) -> f64 {
        self.0
            .iter()
            .zip(other)
            .map(|(a, b)| (a - b) * (a - b))
            .sum()
    }

    pub fn nonzero_count(&self) -> usize {
        self.0.iter().filter(|v| **v != 0.0).count()
    }
}

impl Deref for WeightVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// Step size and p-norm attractor parameters shared by the LMS family.
///
/// `rho` is the attractor weight (the product of the step size and the
/// penalty weight), `epsilon` bounds the attractor denominator and `p` is the
/// norm exponent. The step size must also satisfy `mu < 1/λ_max` of the input
/// covariance for mean convergence; that bound depends on the input model and
/// is not checked here.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LpParams {
    pub mu: f64,
    pub rho: f64,
    pub epsilon: f64,
    pub p: f64,
}

impl LpParams {
    pub fn new(mu: f64, rho: f64, epsilon: f64, p: f64) -> Result<Self> {
        let params = LpParams {
            mu,
            rho,
            epsilon,
            p,
        };
        params.validate()?;
        Ok(params)
    }

    /// Parameters for plain LMS; the attractor fields hold valid placeholders.
    pub fn lms(mu: f64) -> Result<Self> {
        Self::new(mu, 0.0, 1.0, 0.5)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = |name: &str, v: f64| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::param(name, "must be finite"))
            }
        };
        finite("mu", self.mu)?;
        finite("rho", self.rho)?;
        finite("epsilon", self.epsilon)?;
        finite("p", self.p)?;
        // mu = 0 (a frozen filter) is allowed.
        if self.mu < 0.0 {
            return Err(Error::param("mu", format!("must be >= 0, got {}", self.mu)));
        }
        if self.rho < 0.0 {
            return Err(Error::param("rho", format!("must be >= 0, got {}", self.rho)));
        }
        if self.epsilon <= 0.0 {
            return Err(Error::param(
                "epsilon",
                format!("must be > 0, got {}", self.epsilon),
            ));
        }
        check_exponent(self.p)
    }
}

fn check_exponent(p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(Error::param("p", format!("must lie in (0, 1), got {p}")))
    }
}

/// Sign function with `sign(0) = 0`.
///
/// NaN is a contract violation; debug builds assert on it and release builds
/// return NaN, which every update step then rejects as non-finite.
#[inline]
pub fn sign(x: f64) -> f64 {
    debug_assert!(!x.is_nan(), "sign of NaN");
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else if x == 0.0 {
        0.0
    } else {
        f64::NAN
    }
}

/// `(Σ|w_i|^p)^(1/p)` for `0 < p < 1`.
pub fn p_norm(w: &[f64], p: f64) -> Result<f64> {
    check_exponent(p)?;
    Ok(abs_power_sum(w, p).powf(1.0 / p))
}

fn abs_power_sum(w: &[f64], p: f64) -> f64 {
    w.iter().map(|v| v.abs().powf(p)).sum()
}

/// The p-norm zero-attractor term subtracted by the ℓp-family updates:
///
/// ```text
/// t_i = ρ · ‖w‖_p^(1−p) · sign(w_i) / (ε + |w_i|^(1−p))
/// ```
///
/// The denominator is taken per element, so with `ε → 0` the term tends to
/// `ρ · ∂‖w‖_p/∂w_i`.
pub fn lp_attractor(w: &[f64], params: &LpParams) -> WeightVector {
    let mut out = vec![0.0; w.len()];
    lp_attractor_into(w, params, &mut out);
    WeightVector(out)
}

pub(crate) fn lp_attractor_into(w: &[f64], params: &LpParams, out: &mut [f64]) {
    let q = 1.0 - params.p;
    let sum = abs_power_sum(w, params.p);
    if params.rho == 0.0 || sum == 0.0 {
        out.iter_mut().for_each(|t| *t = 0.0);
        return;
    }
    // ‖w‖_p^(1−p) = (Σ|w_i|^p)^((1−p)/p)
    let scale = params.rho * sum.powf(q / params.p);
    for (t, &wi) in out.iter_mut().zip(w) {
        *t = if wi == 0.0 {
            0.0
        } else {
            scale * sign(wi) / (params.epsilon + wi.abs().powf(q))
        };
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sign_values() {
        assert_eq!(sign(0.0), 0.0);
        assert_eq!(sign(-0.0), 0.0);
        assert_eq!(sign(3.7), 1.0);
        assert_eq!(sign(-1e-12), -1.0);
    }

    #[test]
    fn p_norm_examples() {
        assert_eq!(p_norm(&[1.0, 0.0, 0.0], 0.5).unwrap(), 1.0);
        assert_eq!(p_norm(&[0.0, 0.0], 0.5).unwrap(), 0.0);
        assert!((p_norm(&[1.0, 1.0], 0.5).unwrap() - 4.0).abs() < 1e-15);
    }

    #[test]
    fn p_norm_rejects_exponent_outside_unit_interval() {
        for p in [0.0, 1.0, 1.5, -0.3, f64::NAN] {
            assert!(p_norm(&[1.0], p).is_err(), "p = {p}");
        }
    }

    #[test]
    fn attractor_vanishes_at_zero_and_without_weight() {
        let params = LpParams::new(0.1, 0.001, 0.05, 0.5).unwrap();
        assert!(lp_attractor(&[0.0; 4], &params).iter().all(|t| *t == 0.0));
        let off = LpParams { rho: 0.0, ..params };
        assert!(lp_attractor(&[1.0, -2.0], &off).iter().all(|t| *t == 0.0));
    }

    #[test]
    fn attractor_single_tap() {
        let params = LpParams::new(0.1, 0.001, 0.05, 0.5).unwrap();
        let t = lp_attractor(&[1.0, 0.0], &params);
        // 0.001 · 1 · 1 / (0.05 + 1)
        assert!((t[0] - 9.523_809_523_809_524e-4).abs() < 1e-15);
        assert_eq!(t[1], 0.0);
    }

    #[test]
    fn params_validation() {
        assert!(LpParams::new(0.05, 0.0, 0.05, 0.5).is_ok());
        assert!(LpParams::new(0.0, 0.0, 0.05, 0.5).is_ok());
        assert!(LpParams::new(-0.1, 0.0, 0.05, 0.5).is_err());
        assert!(LpParams::new(0.1, -1e-3, 0.05, 0.5).is_err());
        assert!(LpParams::new(0.1, 1e-3, 0.0, 0.5).is_err());
        assert!(LpParams::new(0.1, 1e-3, 0.05, 1.0).is_err());
        assert!(LpParams::new(f64::NAN, 1e-3, 0.05, 0.5).is_err());
    }

    #[test]
    fn weight_vector_rejects_bad_input() {
        assert!(WeightVector::new(vec![]).is_err());
        assert!(WeightVector::new(vec![1.0, f64::INFINITY]).is_err());
        assert_eq!(WeightVector::new(vec![0.0, 2.0, -1.0]).unwrap().nonzero_count(), 2);
    }
}
