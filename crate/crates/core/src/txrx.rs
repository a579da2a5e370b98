//! BPSK source, FIR ISI channel and additive white Gaussian noise.
//!
//! All randomness comes from ChaCha8 generators seeded with `seed_from_u64`.
//! Symbols are drawn from stream 0 and noise from stream 1, so a symbol
//! sequence and a noise sequence given the same numeric seed are still
//! independent.

use std::f64::consts::TAU;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dsp::{self, TapWeights};
use crate::error::{Error, Result};

/// Identifier of the Gaussian generator, echoed in run metadata.
pub const GAUSSIAN_ALGORITHM: &str = "box-muller/chacha8-stream1/v1";

/// Identifier of the symbol generator, echoed in run metadata.
pub const SYMBOL_ALGORITHM: &str = "u32-lsb/chacha8-stream0/v1";

const SYMBOL_STREAM: u64 = 0;
const NOISE_STREAM: u64 = 1;

/// Antipodal BPSK symbol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Symbol {
    Plus,
    Minus,
}

impl Symbol {
    pub fn value(self) -> f64 {
        match self {
            Symbol::Plus => 1.0,
            Symbol::Minus => -1.0,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Symbol::Plus => Symbol::Minus,
            Symbol::Minus => Symbol::Plus,
        }
    }
}

impl From<Symbol> for f64 {
    fn from(s: Symbol) -> f64 {
        s.value()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SymbolSequence {
    pub symbols: Vec<Symbol>,
    pub seed: u64,
}

impl SymbolSequence {
    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn values(&self) -> Vec<f64> {
        self.symbols.iter().map(|s| s.value()).collect()
    }
}

/// `n` equiprobable symbols. Each symbol is the low bit of one 32-bit draw:
/// 0 maps to +1, 1 maps to -1.
pub fn generate_bpsk(n: usize, seed: u64) -> Result<SymbolSequence> {
    if n == 0 {
        return Err(Error::input("symbol count must be at least 1"));
    }
    let mut rng = seeded(seed, SYMBOL_STREAM);
    let symbols = (0..n)
        .map(|_| {
            if rng.next_u32() & 1 == 0 {
                Symbol::Plus
            } else {
                Symbol::Minus
            }
        })
        .collect();
    Ok(SymbolSequence { symbols, seed })
}

/// `n` zero-mean Gaussian deviates with the given variance.
///
/// Basic Box-Muller: each pair of uniforms `u1 in (0, 1]`, `u2 in [0, 1)`
/// yields `r*cos(2 pi u2)` then `r*sin(2 pi u2)` with `r = sqrt(-2 ln u1)`.
/// An odd trailing request discards the sine half.
pub fn gaussian(n: usize, variance: f64, seed: u64) -> Result<Vec<f64>> {
    if !(variance.is_finite() && variance >= 0.0) {
        return Err(Error::input(format!(
            "noise variance must be finite and non-negative, got {variance}"
        )));
    }
    if variance == 0.0 {
        return Ok(vec![0.0; n]);
    }
    let sigma = variance.sqrt();
    let mut rng = seeded(seed, NOISE_STREAM);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let u1 = 1.0 - rng.gen::<f64>();
        let u2 = rng.gen::<f64>();
        let r = (-2.0 * u1.ln()).sqrt();
        out.push(sigma * r * (TAU * u2).cos());
        if out.len() < n {
            out.push(sigma * r * (TAU * u2).sin());
        }
    }
    Ok(out)
}

/// Noise variance for a given SNR in dB relative to unit symbol power.
pub fn snr_db_to_variance(snr_db: f64) -> f64 {
    10f64.powf(-snr_db / 10.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelModel {
    pub impulse: TapWeights,
    pub noise_variance: f64,
    pub noise_seed: u64,
}

impl ChannelModel {
    pub fn new(impulse: Vec<f64>, noise_variance: f64, noise_seed: u64) -> Result<Self> {
        if impulse.is_empty() {
            return Err(Error::config("channel", "impulse response is empty"));
        }
        let impulse =
            TapWeights::new(impulse).map_err(|e| Error::config("channel", e.to_string()))?;
        if !(noise_variance.is_finite() && noise_variance >= 0.0) {
            return Err(Error::config(
                "noise_variance",
                format!("must be finite and non-negative, got {noise_variance}"),
            ));
        }
        Ok(Self {
            impulse,
            noise_variance,
            noise_seed,
        })
    }

    pub fn noiseless(impulse: Vec<f64>) -> Result<Self> {
        Self::new(impulse, 0.0, 0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReceivedSignal {
    pub samples: Vec<f64>,
}

/// Convolves the symbols with the channel impulse response (zero history)
/// and adds seeded noise.
pub fn apply_channel(tx: &SymbolSequence, ch: &ChannelModel) -> Result<ReceivedSignal> {
    if tx.is_empty() {
        return Err(Error::input("transmitted sequence is empty"));
    }
    if ch.impulse.is_empty() {
        return Err(Error::config("channel", "impulse response is empty"));
    }
    let mut samples = dsp::filter(&ch.impulse, &tx.values())?;
    let noise = gaussian(samples.len(), ch.noise_variance, ch.noise_seed)?;
    for (s, g) in samples.iter_mut().zip(noise) {
        *s += g;
    }
    Ok(ReceivedSignal { samples })
}

fn seeded(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
