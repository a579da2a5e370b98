//! Weight adaptation rules.
//!
//! Both rules apply the stochastic-gradient update `w <- w + step * e * x`
//! to the feed-forward and feedback filters of a DFE. They differ only in
//! the step:
//!
//! * conventional LMS uses the fixed base step `mu`;
//! * the improved rule scales `mu` by `|e(n) - e(n-1)|`, the magnitude of the
//!   change between the two most recent errors, so adaptation is aggressive
//!   while the error is still moving and slows as it settles.
//!
//! The DFE output is `ff . x_ff - fb . x_fb`, so the feedback gradient is the
//! negated decision history. Both filters therefore descend the same squared
//! error surface.

use std::fmt;
use std::str::FromStr;

use crate::dsp::{DelayLine, TapWeights};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Algorithm {
    /// Fixed-step LMS.
    Conventional,
    /// LMS with the step scaled by the absolute difference of consecutive errors.
    Improved,
}

impl Algorithm {
    /// Short name used on the command line and in output files.
    pub fn tag(self) -> &'static str {
        match self {
            Algorithm::Conventional => "lms",
            Algorithm::Improved => "ilms",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "lms" | "conventional" => Ok(Algorithm::Conventional),
            "ilms" | "improved" => Ok(Algorithm::Improved),
            other => Err(Error::config(
                "algo",
                format!("unknown algorithm `{other}`"),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptParams {
    /// Base step size.
    pub mu: f64,
    /// Lower bound applied to `|e(n) - e(n-1)|` before scaling.
    pub step_floor: f64,
    /// Upper bound on the effective step of the improved rule.
    pub step_cap: Option<f64>,
}

impl AdaptParams {
    pub fn new(mu: f64) -> Result<Self> {
        let p = Self {
            mu,
            step_floor: 0.0,
            step_cap: None,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mu.is_finite() && self.mu > 0.0) {
            return Err(Error::config(
                "mu",
                format!("must be finite and > 0, got {}", self.mu),
            ));
        }
        if !(self.step_floor.is_finite() && self.step_floor >= 0.0) {
            return Err(Error::config(
                "step_floor",
                format!("must be finite and >= 0, got {}", self.step_floor),
            ));
        }
        if let Some(cap) = self.step_cap {
            if !(cap.is_finite() && cap > 0.0) {
                return Err(Error::config(
                    "step_cap",
                    format!("must be finite and > 0, got {cap}"),
                ));
            }
            if cap < self.mu * self.step_floor {
                return Err(Error::config(
                    "step_cap",
                    format!(
                        "{cap} is below mu * step_floor = {}",
                        self.mu * self.step_floor
                    ),
                ));
            }
        }
        Ok(())
    }
}

/// `w[k] += step * e * x[k]` for every tap.
pub fn lms_update(
    weights: &mut TapWeights,
    regressor: &DelayLine,
    e: f64,
    step: f64,
) -> Result<()> {
    if weights.len() != regressor.capacity() {
        return Err(Error::LengthMismatch {
            what: "regressor",
            got: regressor.capacity(),
            expected: weights.len(),
        });
    }
    if !e.is_finite() || !step.is_finite() {
        return Err(Error::input(format!(
            "non-finite update (e = {e}, step = {step})"
        )));
    }
    let gain = step * e;
    for (w, x) in weights.as_mut_slice().iter_mut().zip(regressor.samples()) {
        *w += gain * x;
    }
    Ok(())
}

/// `mu * max(|e_curr - e_prev|, step_floor)`, clamped to `step_cap` if set.
pub fn effective_step(params: &AdaptParams, e_curr: f64, e_prev: f64) -> f64 {
    let s = params.mu * (e_curr - e_prev).abs().max(params.step_floor);
    match params.step_cap {
        Some(cap) => s.min(cap),
        None => s,
    }
}

/// Mutable view of the parts of a DFE that adaptation touches. The delay
/// lines must hold the regressor that produced the current output.
pub struct AdaptView<'a> {
    pub ff_weights: &'a mut TapWeights,
    pub fb_weights: &'a mut TapWeights,
    pub ff_line: &'a DelayLine,
    pub fb_line: &'a DelayLine,
}

fn apply_step(view: AdaptView<'_>, e: f64, step: f64) -> Result<()> {
    lms_update(view.ff_weights, view.ff_line, e, step)?;
    lms_update(view.fb_weights, view.fb_line, -e, step)
}

/// Fixed-step update of both filters. Returns the step used.
pub fn conventional_step(params: &AdaptParams, view: AdaptView<'_>, e: f64) -> Result<f64> {
    apply_step(view, e, params.mu)?;
    Ok(params.mu)
}

/// Variable-step update of both filters; `e_prev` is the previous error
/// (0 before the first iteration). Returns the step used.
pub fn improved_step(
    params: &AdaptParams,
    view: AdaptView<'_>,
    e: f64,
    e_prev: f64,
) -> Result<f64> {
    let step = effective_step(params, e, e_prev);
    apply_step(view, e, step)?;
    Ok(step)
}

/// Dispatches to the rule selected by `algo`.
pub fn adapt(
    algo: Algorithm,
    params: &AdaptParams,
    view: AdaptView<'_>,
    e: f64,
    e_prev: f64,
) -> Result<f64> {
    match algo {
        Algorithm::Conventional => conventional_step(params, view, e),
        Algorithm::Improved => improved_step(params, view, e, e_prev),
    }
}
