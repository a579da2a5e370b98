//! Decision-feedback equalization of BPSK over ISI channels, adapted either
//! by conventional LMS or by a variable-step LMS whose step follows the
//! change between consecutive errors.
//!
//! The modules build on each other bottom-up:
//!
//! * [`dsp`]: tap weights, delay lines and streaming FIR steps;
//! * [`txrx`]: BPSK source, ISI channel and AWGN;
//! * [`adapt`]: the two weight-update rules;
//! * [`equalizer`]: the DFE loop;
//! * [`metrics`]: learning curves, convergence and error rates;
//! * [`experiment`]: seeded batch runs and their CSV/summary outputs.

pub mod adapt;
pub mod dsp;
pub mod equalizer;
pub mod error;
pub mod experiment;
pub mod metrics;
pub mod txrx;

pub use adapt::{AdaptParams, Algorithm};
pub use dsp::{DelayLine, TapWeights};
pub use equalizer::{Dfe, DfeConfig, DfeState, FfInit, Mode, StepTrace};
pub use error::{Error, Result};
pub use experiment::{run_experiment, ExperimentConfig, RunRecord};
pub use metrics::{ComparisonReport, CurveCriteria, LearningCurve};
pub use txrx::{ChannelModel, ReceivedSignal, Symbol, SymbolSequence};
