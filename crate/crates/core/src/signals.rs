//! True systems, input signals and observation noise.
//!
//! All generators take an explicit RNG. Trials derive one seed from the master
//! seed and the trial index ([`derive_seed`]), then split it into independent
//! ChaCha streams for the system draws, the input and the noise ([`stream`]).

use std::path::{Path, PathBuf};

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filters::WeightVector;

pub const ECG_TAPS: usize = 256;
pub const ECG_NONZERO: usize = 28;
/// Samples discarded from the start of an AR(1) recursion.
pub const AR1_BURN_IN: usize = 1000;

const BUNDLED_ECG: &str = include_str!("../data/ecg_ir_256.txt");

/// Where a stage's true system comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SystemSource {
    /// `n_nonzero` taps at uniformly random positions, each ±1 with equal odds.
    RandomSparse { n_nonzero: usize },
    /// The ECG-like impulse response shipped with the crate.
    BundledEcg,
    /// Taps read from a plain-text file.
    TapFile { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseSystemSpec {
    pub n_taps: usize,
    #[serde(flatten)]
    pub source: SystemSource,
}

impl SparseSystemSpec {
    pub fn random(n_taps: usize, n_nonzero: usize) -> Self {
        SparseSystemSpec {
            n_taps,
            source: SystemSource::RandomSparse { n_nonzero },
        }
    }

    pub fn bundled_ecg() -> Self {
        SparseSystemSpec {
            n_taps: ECG_TAPS,
            source: SystemSource::BundledEcg,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_taps == 0 {
            return Err(Error::param("n_taps", "must be >= 1"));
        }
        match &self.source {
            SystemSource::RandomSparse { n_nonzero } if *n_nonzero > self.n_taps => {
                Err(Error::param(
                    "n_nonzero",
                    format!("{n_nonzero} exceeds the tap count {}", self.n_taps),
                ))
            }
            SystemSource::BundledEcg if self.n_taps != ECG_TAPS => Err(Error::param(
                "n_taps",
                format!("the bundled ECG response has {ECG_TAPS} taps"),
            )),
            _ => Ok(()),
        }
    }

    /// Loads fixed taps once so trials only draw random systems.
    pub fn prepare(&self) -> Result<PreparedSystem> {
        self.validate()?;
        match &self.source {
            SystemSource::RandomSparse { n_nonzero } => Ok(PreparedSystem::Random {
                n_taps: self.n_taps,
                n_nonzero: *n_nonzero,
            }),
            SystemSource::BundledEcg => Ok(PreparedSystem::Fixed(bundled_ecg_ir())),
            SystemSource::TapFile { path } => {
                let taps = read_taps(path)?;
                if taps.len() != self.n_taps {
                    return Err(Error::ShapeMismatch {
                        expected: self.n_taps,
                        actual: taps.len(),
                    });
                }
                Ok(PreparedSystem::Fixed(taps))
            }
        }
    }
}

#[derive(Debug, Clone)]
pub enum PreparedSystem {
    Random { n_taps: usize, n_nonzero: usize },
    Fixed(WeightVector),
}

impl PreparedSystem {
    pub fn n_taps(&self) -> usize {
        match self {
            PreparedSystem::Random { n_taps, .. } => *n_taps,
            PreparedSystem::Fixed(w) => w.len(),
        }
    }

    pub fn sparsity_ratio(&self) -> f64 {
        match self {
            PreparedSystem::Random { n_taps, n_nonzero } => *n_nonzero as f64 / *n_taps as f64,
            PreparedSystem::Fixed(w) => w.nonzero_count() as f64 / w.len() as f64,
        }
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<WeightVector> {
        match self {
            PreparedSystem::Random { n_taps, n_nonzero } => draw_system(*n_taps, *n_nonzero, rng),
            PreparedSystem::Fixed(w) => Ok(w.clone()),
        }
    }
}

/// Sparse ±1 system with exactly `n_nonzero` nonzero taps.
pub fn draw_system<R: Rng + ?Sized>(
    n_taps: usize,
    n_nonzero: usize,
    rng: &mut R,
) -> Result<WeightVector> {
    SparseSystemSpec::random(n_taps, n_nonzero).validate()?;
    let mut taps = vec![0.0; n_taps];
    for pos in index::sample(rng, n_taps, n_nonzero) {
        taps[pos] = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
    }
    WeightVector::new(taps)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InputModel {
    WhiteGaussian {
        variance: f64,
    },
    /// `x_{k+1} = a·x_k + u_k`, rescaled by the closed-form stationary
    /// variance to `output_variance`.
    Ar1Normalized {
        ar_coefficient: f64,
        innovation_variance: f64,
        output_variance: f64,
    },
}

impl InputModel {
    pub fn validate(&self) -> Result<()> {
        match *self {
            InputModel::WhiteGaussian { variance } => positive("input.variance", variance),
            InputModel::Ar1Normalized {
                ar_coefficient,
                innovation_variance,
                output_variance,
            } => {
                if !ar_coefficient.is_finite() || ar_coefficient.abs() >= 1.0 {
                    return Err(Error::param(
                        "input.ar_coefficient",
                        format!("|a| must be < 1 for a stationary process, got {ar_coefficient}"),
                    ));
                }
                positive("input.innovation_variance", innovation_variance)?;
                positive("input.output_variance", output_variance)
            }
        }
    }

    /// Variance of the generated samples.
    pub fn variance(&self) -> f64 {
        match *self {
            InputModel::WhiteGaussian { variance } => variance,
            InputModel::Ar1Normalized {
                output_variance, ..
            } => output_variance,
        }
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::param(name, format!("must be > 0, got {v}")))
    }
}

pub fn gen_input<R: Rng + ?Sized>(model: &InputModel, len: usize, rng: &mut R) -> Result<Vec<f64>> {
    model.validate()?;
    if len == 0 {
        return Err(Error::param("length", "input length must be >= 1"));
    }
    match *model {
        InputModel::WhiteGaussian { variance } => {
            let sd = variance.sqrt();
            Ok((0..len).map(|_| sd * gaussian(rng)).collect())
        }
        InputModel::Ar1Normalized {
            ar_coefficient: a,
            innovation_variance,
            output_variance,
        } => {
            let innovation_sd = innovation_variance.sqrt();
            let scale = (output_variance * (1.0 - a * a) / innovation_variance).sqrt();
            let mut x = 0.0;
            let mut out = Vec::with_capacity(len);
            for k in 0..AR1_BURN_IN + len {
                if k >= AR1_BURN_IN {
                    out.push(scale * x);
                }
                x = a * x + innovation_sd * gaussian(rng);
            }
            Ok(out)
        }
    }
}

#[inline]
fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

/// Sliding regressors `[x_k, x_{k−1}, …, x_{k−N+1}]` over an input sequence.
///
/// Only full windows are produced, so an input of length `L` yields
/// `L − N + 1` regressors.
#[derive(Debug, Clone)]
pub struct RegressorStream {
    reversed: Vec<f64>,
    taps: usize,
}

impl RegressorStream {
    pub fn len(&self) -> usize {
        self.reversed.len() + 1 - self.taps
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn taps(&self) -> usize {
        self.taps
    }

    /// Regressor `k`, whose newest sample is `input[k + N − 1]`.
    pub fn get(&self, k: usize) -> &[f64] {
        let start = self.len() - 1 - k;
        &self.reversed[start..start + self.taps]
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        (0..self.len()).map(move |k| self.get(k))
    }
}

pub fn gen_regressor_stream(input: &[f64], taps: usize) -> Result<RegressorStream> {
    if taps == 0 {
        return Err(Error::param("taps", "must be >= 1"));
    }
    if input.len() < taps {
        return Err(Error::ShapeMismatch {
            expected: taps,
            actual: input.len(),
        });
    }
    let mut reversed = input.to_vec();
    reversed.reverse();
    Ok(RegressorStream { reversed, taps })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub variance: f64,
}

impl NoiseModel {
    pub fn validate(&self) -> Result<()> {
        // 0 is allowed for noiseless runs.
        if self.variance.is_finite() && self.variance >= 0.0 {
            Ok(())
        } else {
            Err(Error::param(
                "noise.variance",
                format!("must be >= 0, got {}", self.variance),
            ))
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.variance.sqrt() * gaussian(rng)
    }
}

/// `y = wᵀx + n` with `n ~ N(0, σ²)`.
pub fn measure_output<R: Rng + ?Sized>(
    w: &WeightVector,
    x: &[f64],
    noise: &NoiseModel,
    rng: &mut R,
) -> Result<f64> {
    if x.len() != w.len() {
        return Err(Error::ShapeMismatch {
            expected: w.len(),
            actual: x.len(),
        });
    }
    noise.validate()?;
    Ok(w.dot(x) + noise.sample(rng))
}

#[derive(Debug, Clone)]
pub struct EcgIr {
    pub taps: WeightVector,
    /// True when the response has exactly [`ECG_NONZERO`] nonzero taps.
    pub has_reference_sparsity: bool,
}

/// Reads a 256-tap response from a whitespace- or comma-separated file.
pub fn load_ecg_ir(path: &Path) -> Result<EcgIr> {
    let taps = read_taps(path)?;
    if taps.len() != ECG_TAPS {
        return Err(Error::ShapeMismatch {
            expected: ECG_TAPS,
            actual: taps.len(),
        });
    }
    Ok(EcgIr {
        has_reference_sparsity: taps.nonzero_count() == ECG_NONZERO,
        taps,
    })
}

pub fn bundled_ecg_ir() -> WeightVector {
    let taps = parse_taps(BUNDLED_ECG).expect("bundled ECG response parses");
    assert_eq!(taps.len(), ECG_TAPS);
    assert_eq!(taps.nonzero_count(), ECG_NONZERO);
    taps
}

fn read_taps(path: &Path) -> Result<WeightVector> {
    let text = std::fs::read_to_string(path)?;
    parse_taps(&text).map_err(|reason| Error::Parse {
        path: path.to_path_buf(),
        reason,
    })
}

fn parse_taps(text: &str) -> std::result::Result<WeightVector, String> {
    let mut taps = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("");
        for tok in line.split(|c: char| c == ',' || c.is_whitespace()) {
            if tok.is_empty() {
                continue;
            }
            let v: f64 = tok
                .parse()
                .map_err(|_| format!("line {}: `{tok}` is not a number", lineno + 1))?;
            taps.push(v);
        }
    }
    WeightVector::new(taps).map_err(|e| e.to_string())
}

/// Mixes a trial index into the master seed (SplitMix64 finaliser).
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    System = 0,
    Input = 1,
    Noise = 2,
}

/// Independent RNG stream of a trial.
pub fn stream(trial_seed: u64, which: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(trial_seed);
    rng.set_stream(which as u64);
    rng
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn system_degenerate_and_dense() {
        let w = draw_system(16, 0, &mut rng(1)).unwrap();
        assert!(w.iter().all(|v| *v == 0.0));
        let w = draw_system(16, 16, &mut rng(1)).unwrap();
        assert!(w.iter().all(|v| v.abs() == 1.0));
    }

    #[test]
    fn system_has_requested_sparsity() {
        for seed in 0..50 {
            let w = draw_system(16, 4, &mut rng(seed)).unwrap();
            assert_eq!(w.nonzero_count(), 4);
            assert!(w.iter().all(|v| *v == 0.0 || v.abs() == 1.0));
        }
        assert!(draw_system(16, 17, &mut rng(0)).is_err());
    }

    #[test]
    fn white_input_length_one() {
        let x = gen_input(&InputModel::WhiteGaussian { variance: 4.0 }, 1, &mut rng(3)).unwrap();
        assert_eq!(x.len(), 1);
        assert!(x[0].is_finite());
    }

    #[test]
    fn non_stationary_ar_is_rejected() {
        let m = InputModel::Ar1Normalized {
            ar_coefficient: 1.0,
            innovation_variance: 0.01,
            output_variance: 1.0,
        };
        assert!(gen_input(&m, 10, &mut rng(0)).is_err());
    }

    #[test]
    fn regressor_windows() {
        let s = gen_regressor_stream(&[1.0, 2.0, 3.0], 2).unwrap();
        let windows: Vec<Vec<f64>> = s.iter().map(<[f64]>::to_vec).collect();
        assert_eq!(windows, vec![vec![2.0, 1.0], vec![3.0, 2.0]]);

        let s = gen_regressor_stream(&[1.0, 2.0, 3.0], 3).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s.get(0), &[3.0, 2.0, 1.0]);

        let s = gen_regressor_stream(&[5.0, 6.0], 1).unwrap();
        let windows: Vec<f64> = s.iter().map(|r| r[0]).collect();
        assert_eq!(windows, vec![5.0, 6.0]);

        assert!(gen_regressor_stream(&[1.0], 2).is_err());
    }

    #[test]
    fn noiseless_measurement() {
        let w = WeightVector::new(vec![1.0, 0.0]).unwrap();
        let y = measure_output(&w, &[3.0, 5.0], &NoiseModel { variance: 0.0 }, &mut rng(0));
        assert_eq!(y.unwrap(), 3.0);
        assert!(measure_output(&w, &[3.0], &NoiseModel { variance: 0.0 }, &mut rng(0)).is_err());
    }

    #[test]
    fn bundled_ecg_structure() {
        let w = bundled_ecg_ir();
        assert_eq!(w.len(), 256);
        assert_eq!(w.nonzero_count(), 28);
        let peak = w.iter().cloned().fold(f64::MIN, f64::max);
        assert_eq!(peak, 1.0);
    }

    #[test]
    fn parse_accepts_commas_and_comments() {
        let w = parse_taps("# header\n1, 2 3\n\n-4.5").unwrap();
        assert_eq!(w.as_slice(), &[1.0, 2.0, 3.0, -4.5]);
        assert!(parse_taps("1 two").is_err());
    }

    #[test]
    fn streams_are_distinct_and_repeatable() {
        let a: u64 = stream(7, Stream::Input).random();
        let b: u64 = stream(7, Stream::Noise).random();
        let c: u64 = stream(7, Stream::Input).random();
        assert_ne!(a, b);
        assert_eq!(a, c);
        assert_ne!(derive_seed(1, 0), derive_seed(1, 1));
        assert_ne!(derive_seed(1, 0), derive_seed(2, 0));
    }
}
