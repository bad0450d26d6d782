//! Gradient comparators that gate the zero attractor per tap.
//!
//! The instantaneous comparator opens tap `i` when the LMS correction
//! `e·x_i` points against the current weight `w_i`, i.e. when `sign(w_i)`
//! agrees with the sign of the gradient of `e²/2`. The windowed comparator
//! takes the sign of the mean of the last `S` instantaneous gates.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::filters::weights::sign;

/// Diagonal gate stored as its diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparatorMatrix(Vec<f64>);

impl ComparatorMatrix {
    pub fn from_diag(diag: Vec<f64>) -> Self {
        ComparatorMatrix(diag)
    }

    pub fn ones(len: usize) -> Self {
        ComparatorMatrix(vec![1.0; len])
    }

    pub fn zeros(len: usize) -> Self {
        ComparatorMatrix(vec![0.0; len])
    }

    pub fn diag(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Every entry is one of 0, 0.5, 1.
    pub fn is_instantaneous_valued(&self) -> bool {
        self.0.iter().all(|&g| g == 0.0 || g == 0.5 || g == 1.0)
    }

    /// Every entry is 0 or 1.
    pub fn is_binary(&self) -> bool {
        self.0.iter().all(|&g| g == 0.0 || g == 1.0)
    }
}

/// `diag_i = |sign(e·x_i) − sign(w_i)| / 2`.
pub fn gc_comparator(x: &[f64], e: f64, w: &[f64]) -> Result<ComparatorMatrix> {
    if x.len() != w.len() {
        return Err(Error::ShapeMismatch {
            expected: w.len(),
            actual: x.len(),
        });
    }
    let mut diag = vec![0.0; w.len()];
    gc_comparator_into(x, e, w, &mut diag);
    Ok(ComparatorMatrix(diag))
}

#[inline]
pub(crate) fn gc_comparator_into(x: &[f64], e: f64, w: &[f64], out: &mut [f64]) {
    for ((g, &xi), &wi) in out.iter_mut().zip(x).zip(w) {
        *g = (sign(e * xi) - sign(wi)).abs() * 0.5;
    }
}

/// Bounded FIFO of the most recent instantaneous comparators.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparatorWindow {
    capacity: usize,
    history: VecDeque<ComparatorMatrix>,
}

impl ComparatorWindow {
    pub const DEFAULT_CAPACITY: usize = 5;

    pub fn new(capacity: usize) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::param("window", "comparator window needs S >= 1"));
        }
        Ok(ComparatorWindow {
            capacity,
            history: VecDeque::with_capacity(capacity),
        })
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.history.len()
    }

    pub fn is_empty(&self) -> bool {
        self.history.is_empty()
    }

    /// Appends `g`, evicting the oldest entry once full.
    pub fn push(&mut self, g: ComparatorMatrix) {
        if self.history.len() == self.capacity {
            self.history.pop_front();
        }
        self.history.push_back(g);
    }

    pub fn iter(&self) -> impl Iterator<Item = &ComparatorMatrix> {
        self.history.iter()
    }

    /// Pushes `g`, reusing the storage of the evicted entry when possible.
    pub(crate) fn push_from(&mut self, g: &[f64]) {
        if self.history.len() == self.capacity {
            let mut recycled = self.history.pop_front().expect("capacity >= 1");
            recycled.0.copy_from_slice(g);
            self.history.push_back(recycled);
        } else {
            self.history.push_back(ComparatorMatrix(g.to_vec()));
        }
    }
}

/// `D = sign(mean of the stored gates)`, elementwise.
///
/// The mean is over however many gates are stored (fewer than `S` before the
/// window fills). Gate entries are non-negative, so an entry of `D` is 1
/// exactly when some stored gate had a nonzero entry there.
pub fn ngc_comparator(window: &ComparatorWindow) -> Result<ComparatorMatrix> {
    let first = window.history.front().ok_or(Error::EmptyWindow)?;
    let mut diag = vec![0.0; first.len()];
    ngc_comparator_into(window, &mut diag)?;
    Ok(ComparatorMatrix(diag))
}

pub(crate) fn ngc_comparator_into(window: &ComparatorWindow, out: &mut [f64]) -> Result<()> {
    if window.is_empty() {
        return Err(Error::EmptyWindow);
    }
    let count = window.len() as f64;
    out.iter_mut().for_each(|d| *d = 0.0);
    for g in &window.history {
        if g.len() != out.len() {
            return Err(Error::ShapeMismatch {
                expected: out.len(),
                actual: g.len(),
            });
        }
        for (d, v) in out.iter_mut().zip(&g.0) {
            *d += v;
        }
    }
    for d in out.iter_mut() {
        *d = sign(*d / count);
    }
    Ok(())
}
