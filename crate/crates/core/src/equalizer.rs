//! Decision-feedback equalizer.
//!
//! Per received sample `r`:
//!
//! 1. shift `r` into the feed-forward line and form
//!    `y = ff . x_ff - fb . x_fb`, where `x_fb` holds past decisions;
//! 2. quantize `y` to a symbol decision;
//! 3. take the reference (the true delayed symbol while training, otherwise
//!    the decision) and form `e = reference - y`;
//! 4. adapt both filters using the regressors that produced `y`;
//! 5. shift the decision into the feedback line and remember `e`.

use std::fmt;
use std::str::FromStr;

use crate::adapt::{self, AdaptParams, AdaptView, Algorithm};
use crate::dsp::{self, DelayLine, TapWeights};
use crate::error::{Error, Result};
use crate::txrx::{ReceivedSignal, Symbol, SymbolSequence};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// The quantizer output is always the error reference.
    DecisionDirected,
    /// Known symbols are the reference for the first `training_len` iterations.
    Trained,
}

impl Mode {
    pub fn tag(self) -> &'static str {
        match self {
            Mode::DecisionDirected => "dd",
            Mode::Trained => "trained",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "dd" | "decision_directed" => Ok(Mode::DecisionDirected),
            "trained" => Ok(Mode::Trained),
            other => Err(Error::config("mode", format!("unknown mode `{other}`"))),
        }
    }
}

/// Initial feed-forward weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FfInit {
    Zero,
    /// 1 at tap `decision_delay`, 0 elsewhere.
    CenterSpike,
}

impl FfInit {
    pub fn tag(self) -> &'static str {
        match self {
            FfInit::Zero => "zero",
            FfInit::CenterSpike => "spike",
        }
    }
}

impl fmt::Display for FfInit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for FfInit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "zero" => Ok(FfInit::Zero),
            "spike" | "center_spike" => Ok(FfInit::CenterSpike),
            other => Err(Error::config(
                "ff_init",
                format!("unknown initialization `{other}`"),
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DfeConfig {
    pub n_ff: usize,
    pub n_fb: usize,
    pub algo: Algorithm,
    pub adapt: AdaptParams,
    pub mode: Mode,
    pub training_len: usize,
    /// Lag `D` between the current received sample and the symbol being decided.
    pub decision_delay: usize,
    pub ff_init: FfInit,
}

impl DfeConfig {
    /// Decision-directed configuration with zero initial weights and the
    /// default decision delay `(n_ff - 1) / 2`.
    pub fn new(n_ff: usize, n_fb: usize, algo: Algorithm, mu: f64) -> Self {
        Self {
            n_ff,
            n_fb,
            algo,
            adapt: AdaptParams {
                mu,
                step_floor: 0.0,
                step_cap: None,
            },
            mode: Mode::DecisionDirected,
            training_len: 0,
            decision_delay: default_decision_delay(n_ff),
            ff_init: FfInit::Zero,
        }
    }

    pub fn trained(mut self, training_len: usize) -> Self {
        self.mode = Mode::Trained;
        self.training_len = training_len;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_ff == 0 {
            return Err(Error::config("n_ff", "need at least one feed-forward tap"));
        }
        self.adapt.validate()?;
        if self.mode == Mode::DecisionDirected && self.training_len != 0 {
            return Err(Error::config(
                "training_len",
                "must be 0 in decision-directed mode",
            ));
        }
        if self.ff_init == FfInit::CenterSpike && self.decision_delay >= self.n_ff {
            return Err(Error::config(
                "decision_delay",
                format!(
                    "spike initialization needs delay < n_ff ({} >= {})",
                    self.decision_delay, self.n_ff
                ),
            ));
        }
        Ok(())
    }

    /// Whether iteration `n` uses a known symbol as reference. Iterations
    /// before `decision_delay` have no transmitted symbol to align with and
    /// fall back to the decision.
    pub fn uses_training_reference(&self, n: usize) -> bool {
        self.mode == Mode::Trained && n >= self.decision_delay && n < self.training_len
    }
}

pub fn default_decision_delay(n_ff: usize) -> usize {
    n_ff.saturating_sub(1) / 2
}

#[derive(Debug, Clone, PartialEq)]
pub struct DfeState {
    pub ff_weights: TapWeights,
    pub fb_weights: TapWeights,
    pub ff_line: DelayLine,
    /// Past decisions, newest first.
    pub fb_line: DelayLine,
    pub prev_error: f64,
    pub iteration: usize,
}

/// Per-iteration record of the equalizer loop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepTrace {
    pub iteration: usize,
    pub output: f64,
    pub decision: Symbol,
    pub error: f64,
    pub effective_step: f64,
}

/// Sign decision; 0 maps to +1.
pub fn quantize(y: f64) -> Result<Symbol> {
    if !y.is_finite() {
        return Err(Error::input(format!(
            "cannot quantize non-finite value {y}"
        )));
    }
    Ok(if y < 0.0 { Symbol::Minus } else { Symbol::Plus })
}

pub fn form_error(y: f64, reference: Symbol) -> f64 {
    reference.value() - y
}

impl DfeState {
    pub fn new(cfg: &DfeConfig) -> Result<Self> {
        cfg.validate()?;
        let mut ff_weights = TapWeights::zeros(cfg.n_ff);
        if cfg.ff_init == FfInit::CenterSpike {
            ff_weights.as_mut_slice()[cfg.decision_delay] = 1.0;
        }
        Ok(Self {
            ff_weights,
            fb_weights: TapWeights::zeros(cfg.n_fb),
            ff_line: DelayLine::new(cfg.n_ff),
            fb_line: DelayLine::new(cfg.n_fb),
            prev_error: 0.0,
            iteration: 0,
        })
    }

    /// Shifts `r` into the feed-forward line and returns the combiner output.
    /// The feedback line is left untouched.
    pub fn combiner(&mut self, r: f64) -> Result<f64> {
        let ff = dsp::fir_step(&self.ff_weights, &mut self.ff_line, r)?;
        let fb = dsp::dot(&self.fb_weights, &self.fb_line)?;
        Ok(ff - fb)
    }

    /// One full equalizer iteration.
    pub fn step(
        &mut self,
        cfg: &DfeConfig,
        r: f64,
        true_symbol: Option<Symbol>,
    ) -> Result<StepTrace> {
        let n = self.iteration;
        let training = cfg.uses_training_reference(n);
        if training && true_symbol.is_none() {
            return Err(Error::input(format!(
                "iteration {n} is in the training phase but no reference symbol was given"
            )));
        }
        let output = self.combiner(r)?;
        let decision = quantize(output)?;
        let reference = match true_symbol {
            Some(s) if training => s,
            _ => decision,
        };
        let error = form_error(output, reference);
        let view = AdaptView {
            ff_weights: &mut self.ff_weights,
            fb_weights: &mut self.fb_weights,
            ff_line: &self.ff_line,
            fb_line: &self.fb_line,
        };
        let effective_step = adapt::adapt(cfg.algo, &cfg.adapt, view, error, self.prev_error)?;
        self.fb_line.shift_in(decision.value())?;
        self.prev_error = error;
        self.iteration += 1;
        Ok(StepTrace {
            iteration: n,
            output,
            decision,
            error,
            effective_step,
        })
    }
}

/// Owned configuration plus state.
#[derive(Debug, Clone)]
pub struct Dfe {
    config: DfeConfig,
    state: DfeState,
}

impl Dfe {
    pub fn new(config: DfeConfig) -> Result<Self> {
        let state = DfeState::new(&config)?;
        Ok(Self { config, state })
    }

    pub fn config(&self) -> &DfeConfig {
        &self.config
    }

    pub fn state(&self) -> &DfeState {
        &self.state
    }

    pub fn state_mut(&mut self) -> &mut DfeState {
        &mut self.state
    }

    pub fn step(&mut self, r: f64, true_symbol: Option<Symbol>) -> Result<StepTrace> {
        self.state.step(&self.config, r, true_symbol)
    }

    /// Equalizes a whole received block. When `transmitted` is given, the
    /// symbol `decision_delay` positions back is offered as the reference at
    /// every step (it is only used during training).
    pub fn run(
        &mut self,
        received: &ReceivedSignal,
        transmitted: Option<&SymbolSequence>,
    ) -> Result<Vec<StepTrace>> {
        if let Some(tx) = transmitted {
            if tx.len() != received.samples.len() {
                return Err(Error::LengthMismatch {
                    what: "transmitted sequence",
                    got: tx.len(),
                    expected: received.samples.len(),
                });
            }
        }
        let delay = self.config.decision_delay;
        received
            .samples
            .iter()
            .enumerate()
            .map(|(n, &r)| {
                let reference =
                    transmitted.and_then(|tx| n.checked_sub(delay).map(|k| tx.symbols[k]));
                self.step(r, reference)
            })
            .collect()
    }
}
