//! Learning curves and comparison metrics.
//!
//! A learning curve is the per-iteration squared error, usually averaged
//! across an ensemble of seeds. From it we derive:
//!
//! * a moving-average curve over a window of `W` iterations;
//! * the steady-state MSE, the mean of the raw curve over its final
//!   `ceil(f * len)` iterations;
//! * the convergence iteration, the first window start `i` from which the
//!   smoothed curve stays at or below `rho * steady_state` for `W`
//!   consecutive points.

use crate::adapt::Algorithm;
use crate::error::{Error, Result};
use crate::txrx::Symbol;

/// Moving average with `smoothed[i] = mean(sq_errors[i..i + window])`.
pub fn smooth(sq_errors: &[f64], window: usize) -> Result<Vec<f64>> {
    if window == 0 {
        return Err(Error::input("smoothing window must be at least 1"));
    }
    if window > sq_errors.len() {
        return Err(Error::input(format!(
            "smoothing window {window} exceeds curve length {}",
            sq_errors.len()
        )));
    }
    Ok(sq_errors.windows(window).map(mean).collect())
}

/// Mean of a non-empty slice, taken as an offset from its first element so
/// constant runs come back exactly.
fn mean(v: &[f64]) -> f64 {
    let base = v[0];
    base + v.iter().map(|x| x - base).sum::<f64>() / v.len() as f64
}

/// Mean of the last `ceil(tail_fraction * len)` entries.
pub fn steady_state_mse(sq_errors: &[f64], tail_fraction: f64) -> Result<f64> {
    if sq_errors.is_empty() {
        return Err(Error::input("cannot take steady state of an empty curve"));
    }
    if !(tail_fraction > 0.0 && tail_fraction <= 1.0) {
        return Err(Error::input(format!(
            "tail fraction must lie in (0, 1], got {tail_fraction}"
        )));
    }
    let tail = tail_len(sq_errors.len(), tail_fraction);
    Ok(mean(&sq_errors[sq_errors.len() - tail..]))
}

pub(crate) fn tail_len(len: usize, tail_fraction: f64) -> usize {
    ((tail_fraction * len as f64).ceil() as usize).clamp(1, len)
}

/// First index `i` such that `smoothed[i..i + span]` all lie at or below
/// `ratio * steady_state`.
pub fn convergence_iteration(
    smoothed: &[f64],
    steady_state: f64,
    ratio: f64,
    span: usize,
) -> Option<usize> {
    let threshold = ratio * steady_state;
    let span = span.max(1);
    let mut run = 0usize;
    for (j, &v) in smoothed.iter().enumerate() {
        if v <= threshold {
            run += 1;
            if run == span {
                return Some(j + 1 - span);
            }
        } else {
            run = 0;
        }
    }
    None
}

/// `conventional / improved`, absent unless both converged at a positive
/// iteration.
pub fn speedup(conventional: Option<usize>, improved: Option<usize>) -> Option<f64> {
    match (conventional, improved) {
        (Some(c), Some(i)) if c > 0 && i > 0 => Some(c as f64 / i as f64),
        _ => None,
    }
}

/// Error and comparison counts for [`ber`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct BitErrors {
    pub errors: u64,
    pub compared: u64,
}

impl BitErrors {
    pub fn rate(&self) -> f64 {
        if self.compared == 0 {
            0.0
        } else {
            self.errors as f64 / self.compared as f64
        }
    }

    pub fn merge(self, other: BitErrors) -> BitErrors {
        BitErrors {
            errors: self.errors + other.errors,
            compared: self.compared + other.compared,
        }
    }
}

/// Counts indices `n >= skip` where `decisions[n] != transmitted[n - delay]`.
pub fn bit_errors(
    decisions: &[Symbol],
    transmitted: &[Symbol],
    delay: usize,
    skip: usize,
) -> Result<BitErrors> {
    if skip < delay {
        return Err(Error::input(format!(
            "skip {skip} is smaller than the decision delay {delay}"
        )));
    }
    if skip >= decisions.len() {
        return Err(Error::input(format!(
            "skip {skip} leaves no decisions out of {}",
            decisions.len()
        )));
    }
    if decisions.len() - delay > transmitted.len() {
        return Err(Error::input(format!(
            "transmitted sequence too short ({}) for {} decisions at delay {delay}",
            transmitted.len(),
            decisions.len()
        )));
    }
    let errors = (skip..decisions.len())
        .filter(|&n| decisions[n] != transmitted[n - delay])
        .count() as u64;
    Ok(BitErrors {
        errors,
        compared: (decisions.len() - skip) as u64,
    })
}

pub fn ber(decisions: &[Symbol], transmitted: &[Symbol], delay: usize, skip: usize) -> Result<f64> {
    bit_errors(decisions, transmitted, delay, skip).map(|b| b.rate())
}

/// Pointwise mean of equal-length curves, folded in the given order.
pub fn ensemble_average(curves: &[Vec<f64>]) -> Result<Vec<f64>> {
    let first = curves
        .first()
        .ok_or_else(|| Error::input("no curves to average"))?;
    let mut acc = vec![0.0; first.len()];
    for c in curves {
        if c.len() != acc.len() {
            return Err(Error::LengthMismatch {
                what: "learning curve",
                got: c.len(),
                expected: acc.len(),
            });
        }
        for (a, v) in acc.iter_mut().zip(c) {
            *a += v;
        }
    }
    let n = curves.len() as f64;
    acc.iter_mut().for_each(|a| *a /= n);
    Ok(acc)
}

/// Parameters of the convergence criterion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveCriteria {
    pub window: usize,
    pub ratio: f64,
    pub tail_fraction: f64,
}

impl Default for CurveCriteria {
    fn default() -> Self {
        Self {
            window: 50,
            ratio: 1.5,
            tail_fraction: 0.2,
        }
    }
}

impl CurveCriteria {
    pub fn validate(&self) -> Result<()> {
        if self.window == 0 {
            return Err(Error::config("window", "must be at least 1"));
        }
        if !(self.ratio.is_finite() && self.ratio > 0.0) {
            return Err(Error::config(
                "conv_ratio",
                format!("must be > 0, got {}", self.ratio),
            ));
        }
        if !(self.tail_fraction > 0.0 && self.tail_fraction <= 1.0) {
            return Err(Error::config(
                "tail_frac",
                format!("must lie in (0, 1], got {}", self.tail_fraction),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LearningCurve {
    pub sq_errors: Vec<f64>,
    pub smoothed: Vec<f64>,
    pub convergence_iter: Option<usize>,
    pub steady_state_mse: f64,
}

impl LearningCurve {
    pub fn new(sq_errors: Vec<f64>, criteria: &CurveCriteria) -> Result<Self> {
        criteria.validate()?;
        if let Some(v) = sq_errors.iter().find(|v| v.is_nan() || **v < 0.0) {
            return Err(Error::input(format!(
                "squared error {v} is negative or NaN"
            )));
        }
        let smoothed = smooth(&sq_errors, criteria.window)?;
        let steady_state_mse = steady_state_mse(&sq_errors, criteria.tail_fraction)?;
        let convergence_iter =
            convergence_iteration(&smoothed, steady_state_mse, criteria.ratio, criteria.window);
        Ok(Self {
            sq_errors,
            smoothed,
            convergence_iter,
            steady_state_mse,
        })
    }

    pub fn len(&self) -> usize {
        self.sq_errors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sq_errors.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlgoSummary {
    pub algo: Algorithm,
    pub steady_state_mse: f64,
    pub convergence_iter: Option<usize>,
    pub ber: f64,
    pub bit_errors: BitErrors,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub algos: Vec<AlgoSummary>,
    /// Conventional over improved convergence iteration.
    pub speedup: Option<f64>,
}

impl ComparisonReport {
    pub fn new(algos: Vec<AlgoSummary>) -> Self {
        let conv = |a: Algorithm| {
            algos
                .iter()
                .find(|s| s.algo == a)
                .and_then(|s| s.convergence_iter)
        };
        let speedup = speedup(conv(Algorithm::Conventional), conv(Algorithm::Improved));
        Self { algos, speedup }
    }

    pub fn get(&self, algo: Algorithm) -> Option<&AlgoSummary> {
        self.algos.iter().find(|s| s.algo == algo)
    }
}
