//! Streaming FIR primitives.
//!
//! Every filter in the crate (channel, feed-forward, feedback) is a
//! [`TapWeights`] vector paired with a [`DelayLine`] of the same length.
//! Delay lines store samples newest first, so `samples()[0]` is the most
//! recent input and tap `k` multiplies the input from `k` steps ago.

use crate::error::{Error, Result};

/// Fixed-length coefficient vector of an FIR filter.
#[derive(Debug, Clone, PartialEq)]
pub struct TapWeights {
    coeffs: Vec<f64>,
}

impl TapWeights {
    /// Builds a weight vector from explicit coefficients. The vector must be
    /// non-empty and finite.
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::input(
                "tap weights must have at least one coefficient",
            ));
        }
        check_finite(&coeffs, "tap weight")?;
        Ok(Self { coeffs })
    }

    /// All-zero weights. `len == 0` is accepted so a DFE can run without a
    /// feedback section.
    pub fn zeros(len: usize) -> Self {
        Self {
            coeffs: vec![0.0; len],
        }
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.coeffs
    }

    /// Mutable access for in-place adaptation. Callers must keep entries finite.
    pub(crate) fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.coeffs
    }
}

/// Shift register of the most recent samples, newest first, zero-filled at
/// construction.
#[derive(Debug, Clone, PartialEq)]
pub struct DelayLine {
    samples: Vec<f64>,
}

impl DelayLine {
    pub fn new(capacity: usize) -> Self {
        Self {
            samples: vec![0.0; capacity],
        }
    }

    /// Builds a line with explicit contents (newest first).
    pub fn from_samples(samples: Vec<f64>) -> Result<Self> {
        check_finite(&samples, "delay line sample")?;
        Ok(Self { samples })
    }

    pub fn capacity(&self) -> usize {
        self.samples.len()
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    /// Pushes `sample` into the newest slot and drops the oldest one. A line
    /// of capacity zero ignores the sample.
    pub fn shift_in(&mut self, sample: f64) -> Result<()> {
        if !sample.is_finite() {
            return Err(Error::input(format!("non-finite sample {sample}")));
        }
        if let Some(last) = self.samples.len().checked_sub(1) {
            self.samples.copy_within(0..last, 1);
            self.samples[0] = sample;
        }
        Ok(())
    }

    pub fn clear(&mut self) {
        self.samples.fill(0.0);
    }
}

/// Inner product `sum_k weights[k] * line[k]`.
pub fn dot(weights: &TapWeights, line: &DelayLine) -> Result<f64> {
    if weights.len() != line.capacity() {
        return Err(Error::LengthMismatch {
            what: "delay line",
            got: line.capacity(),
            expected: weights.len(),
        });
    }
    Ok(weights
        .coeffs
        .iter()
        .zip(&line.samples)
        .map(|(w, x)| w * x)
        .sum())
}

/// One streaming step: shift `sample` in, then return the filter output.
pub fn fir_step(weights: &TapWeights, line: &mut DelayLine, sample: f64) -> Result<f64> {
    if weights.len() != line.capacity() {
        return Err(Error::LengthMismatch {
            what: "delay line",
            got: line.capacity(),
            expected: weights.len(),
        });
    }
    line.shift_in(sample)?;
    dot(weights, line)
}

/// Runs `fir_step` over a whole block from a zeroed delay line.
pub fn filter(weights: &TapWeights, input: &[f64]) -> Result<Vec<f64>> {
    let mut line = DelayLine::new(weights.len());
    input
        .iter()
        .map(|&x| fir_step(weights, &mut line, x))
        .collect()
}

fn check_finite(values: &[f64], what: &str) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(i) => Err(Error::input(format!(
            "{what} at index {i} is not finite ({})",
            values[i]
        ))),
        None => Ok(()),
    }
}
