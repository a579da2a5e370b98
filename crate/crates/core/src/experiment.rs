//! Seeded batch experiments and their output files.
//!
//! A run draws one symbol sequence and one noise realization per seed,
//! equalizes it with every selected algorithm and averages the per-iteration
//! squared errors across seeds. Seeds may be simulated in parallel; the
//! averaging fold always walks the seeds in ascending list order, so the
//! output bytes do not depend on scheduling.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::adapt::{AdaptParams, Algorithm};
use crate::equalizer::{default_decision_delay, Dfe, DfeConfig, FfInit, Mode};
use crate::error::{Error, Result};
use crate::metrics::{
    self, AlgoSummary, BitErrors, ComparisonReport, CurveCriteria, LearningCurve,
};
use crate::txrx::{self, ChannelModel, Symbol};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

pub const CSV_HEADER: &str = "iteration,algo,inst_sq_error,smoothed_mse";

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub n_symbols: usize,
    pub channel: Vec<f64>,
    /// `None` runs a noiseless channel.
    pub snr_db: Option<f64>,
    pub n_ff: usize,
    pub n_fb: usize,
    pub mu: f64,
    pub algos: Vec<Algorithm>,
    pub mode: Mode,
    /// Preamble length; only used in trained mode.
    pub training_len: usize,
    /// `None` resolves to `(n_ff - 1) / 2`.
    pub decision_delay: Option<usize>,
    pub ff_init: FfInit,
    pub seed_count: usize,
    pub base_seed: u64,
    /// Explicit seeds; overrides `seed_count`/`base_seed` when set.
    pub seed_list: Option<Vec<u64>>,
    pub window: usize,
    pub conv_ratio: f64,
    pub tail_frac: f64,
    pub step_floor: f64,
    pub step_cap: Option<f64>,
    /// Leading fraction of each run excluded from the BER count.
    pub ber_skip_frac: f64,
    pub parallel: bool,
    pub out_curves: Option<PathBuf>,
    pub out_summary: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            n_symbols: 5000,
            channel: vec![0.407, 0.815, 0.407],
            snr_db: Some(20.0),
            n_ff: 11,
            n_fb: 5,
            mu: 0.01,
            algos: vec![Algorithm::Conventional, Algorithm::Improved],
            mode: Mode::Trained,
            training_len: 500,
            decision_delay: None,
            ff_init: FfInit::Zero,
            seed_count: 50,
            base_seed: 1,
            seed_list: None,
            window: 50,
            conv_ratio: 1.5,
            tail_frac: 0.2,
            step_floor: 0.0,
            step_cap: None,
            ber_skip_frac: 0.2,
            parallel: true,
            out_curves: None,
            out_summary: None,
        }
    }
}

fn parse<T: std::str::FromStr>(field: &'static str, value: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value
        .trim()
        .parse()
        .map_err(|e| Error::config(field, format!("cannot parse `{value}`: {e}")))
}

fn parse_list<T: std::str::FromStr>(field: &'static str, value: &str) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    value
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| parse(field, s))
        .collect()
}

fn parse_bool(field: &'static str, value: &str) -> Result<bool> {
    match value.trim() {
        "1" | "true" | "yes" | "on" => Ok(true),
        "0" | "false" | "no" | "off" => Ok(false),
        other => Err(Error::config(
            field,
            format!("expected a boolean, got `{other}`"),
        )),
    }
}

fn parse_optional_f64(field: &'static str, value: &str) -> Result<Option<f64>> {
    match value.trim() {
        "" | "none" => Ok(None),
        v => parse(field, v).map(Some),
    }
}

impl ExperimentConfig {
    /// Sets one field from its textual key and value. Keys accept `-` or `_`
    /// as separators and match the command-line flag names.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim().replace('-', "_");
        match key.as_str() {
            "n_symbols" => self.n_symbols = parse("n_symbols", value)?,
            "channel" => self.channel = parse_list("channel", value)?,
            "snr_db" => {
                self.snr_db = match value.trim() {
                    "none" | "inf" | "noiseless" => None,
                    v => Some(parse("snr_db", v)?),
                }
            }
            "noiseless" => {
                if parse_bool("noiseless", value)? {
                    self.snr_db = None;
                }
            }
            "ff" | "n_ff" => self.n_ff = parse("ff", value)?,
            "fb" | "n_fb" => self.n_fb = parse("fb", value)?,
            "mu" => self.mu = parse("mu", value)?,
            "algo" | "algos" => self.algos = parse_list("algo", value)?,
            "mode" => self.mode = value.parse()?,
            "train_len" | "training_len" => self.training_len = parse("train_len", value)?,
            "delay" | "decision_delay" => {
                self.decision_delay = match value.trim() {
                    "" | "auto" => None,
                    v => Some(parse("delay", v)?),
                }
            }
            "ff_init" => self.ff_init = value.parse()?,
            "seeds" => self.seed_count = parse("seeds", value)?,
            "base_seed" => self.base_seed = parse("base_seed", value)?,
            "seed_list" => self.seed_list = Some(parse_list("seed_list", value)?),
            "window" => self.window = parse("window", value)?,
            "conv_ratio" => self.conv_ratio = parse("conv_ratio", value)?,
            "tail_frac" => self.tail_frac = parse("tail_frac", value)?,
            "step_floor" => self.step_floor = parse("step_floor", value)?,
            "step_cap" => self.step_cap = parse_optional_f64("step_cap", value)?,
            "ber_skip_frac" => self.ber_skip_frac = parse("ber_skip_frac", value)?,
            "parallel" => self.parallel = parse_bool("parallel", value)?,
            "out_curves" => self.out_curves = Some(PathBuf::from(value.trim())),
            "out_summary" => self.out_summary = Some(PathBuf::from(value.trim())),
            _ => {
                return Err(Error::config("config", format!("unknown key `{key}`")));
            }
        }
        Ok(())
    }

    /// Applies a flat `key = value` text. `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::config("config", format!("line {}: expected key=value", lineno + 1))
            })?;
            self.set(key, value)?;
        }
        Ok(())
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        let mut cfg = Self::default();
        cfg.apply_text(&text)?;
        Ok(cfg)
    }

    pub fn seeds(&self) -> Vec<u64> {
        match &self.seed_list {
            Some(list) => list.clone(),
            None => (0..self.seed_count as u64)
                .map(|i| self.base_seed.wrapping_add(i))
                .collect(),
        }
    }

    pub fn resolved_delay(&self) -> usize {
        self.decision_delay
            .unwrap_or_else(|| default_decision_delay(self.n_ff))
    }

    pub fn noise_variance(&self) -> f64 {
        self.snr_db.map_or(0.0, txrx::snr_db_to_variance)
    }

    pub fn criteria(&self) -> CurveCriteria {
        CurveCriteria {
            window: self.window,
            ratio: self.conv_ratio,
            tail_fraction: self.tail_frac,
        }
    }

    /// Selected algorithms, deduplicated, in output order.
    pub fn algo_order(&self) -> Vec<Algorithm> {
        let mut algos = self.algos.clone();
        algos.sort_by_key(|a| a.tag());
        algos.dedup();
        algos
    }

    pub fn effective_training_len(&self) -> usize {
        match self.mode {
            Mode::Trained => self.training_len,
            Mode::DecisionDirected => 0,
        }
    }

    pub fn ber_skip(&self) -> usize {
        let skip = (self.ber_skip_frac * self.n_symbols as f64).floor() as usize;
        skip.max(self.resolved_delay())
    }

    pub fn dfe_config(&self, algo: Algorithm) -> DfeConfig {
        DfeConfig {
            n_ff: self.n_ff,
            n_fb: self.n_fb,
            algo,
            adapt: AdaptParams {
                mu: self.mu,
                step_floor: self.step_floor,
                step_cap: self.step_cap,
            },
            mode: self.mode,
            training_len: self.effective_training_len(),
            decision_delay: self.resolved_delay(),
            ff_init: self.ff_init,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_symbols == 0 {
            return Err(Error::config("n_symbols", "must be at least 1"));
        }
        if self.channel.is_empty() || self.channel.iter().any(|c| !c.is_finite()) {
            return Err(Error::config(
                "channel",
                "needs at least one finite coefficient",
            ));
        }
        if let Some(snr) = self.snr_db {
            if !snr.is_finite() {
                return Err(Error::config("snr_db", "must be finite (use --noiseless)"));
            }
        }
        if self.algos.is_empty() {
            return Err(Error::config("algo", "select at least one algorithm"));
        }
        if self.seeds().is_empty() {
            return Err(Error::config("seeds", "need at least one seed"));
        }
        if self.mode == Mode::Trained && self.training_len > self.n_symbols {
            return Err(Error::config(
                "train_len",
                format!("{} exceeds n_symbols {}", self.training_len, self.n_symbols),
            ));
        }
        self.criteria().validate()?;
        if self.window > self.n_symbols {
            return Err(Error::config(
                "window",
                format!("{} exceeds n_symbols {}", self.window, self.n_symbols),
            ));
        }
        if !(0.0..1.0).contains(&self.ber_skip_frac) {
            return Err(Error::config("ber_skip_frac", "must lie in [0, 1)"));
        }
        if self.ber_skip() >= self.n_symbols {
            return Err(Error::config(
                "ber_skip_frac",
                "leaves no symbols to compare",
            ));
        }
        // Per-algorithm validation covers n_ff, mu, floor/cap, training and delay.
        self.dfe_config(Algorithm::Conventional).validate()
    }
}

/// Per-seed, per-algorithm result.
#[derive(Debug, Clone, PartialEq)]
struct SeedRun {
    sq_errors: Vec<f64>,
    bit_errors: BitErrors,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub config: ExperimentConfig,
    pub seeds: Vec<u64>,
    /// Ensemble learning curves in output order.
    pub curves: Vec<(Algorithm, LearningCurve)>,
    pub report: ComparisonReport,
    pub tool_version: &'static str,
}

impl RunRecord {
    pub fn curve(&self, algo: Algorithm) -> Option<&LearningCurve> {
        self.curves.iter().find(|(a, _)| *a == algo).map(|(_, c)| c)
    }
}

fn simulate_seed(cfg: &ExperimentConfig, algos: &[Algorithm], seed: u64) -> Result<Vec<SeedRun>> {
    let tx = txrx::generate_bpsk(cfg.n_symbols, seed)?;
    let channel = ChannelModel::new(cfg.channel.clone(), cfg.noise_variance(), seed)?;
    let rx = txrx::apply_channel(&tx, &channel)?;
    let delay = cfg.resolved_delay();
    let skip = cfg.ber_skip();
    algos
        .iter()
        .map(|&algo| {
            let mut dfe = Dfe::new(cfg.dfe_config(algo))?;
            let traces = dfe.run(&rx, Some(&tx)).map_err(|e| match e {
                Error::Input(_) => Error::Diverged {
                    algo: algo.tag(),
                    seed,
                    iteration: dfe.state().iteration,
                },
                other => other,
            })?;
            let decisions: Vec<Symbol> = traces.iter().map(|t| t.decision).collect();
            Ok(SeedRun {
                sq_errors: traces.iter().map(|t| t.error * t.error).collect(),
                bit_errors: metrics::bit_errors(&decisions, &tx.symbols, delay, skip)?,
            })
        })
        .collect()
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<RunRecord> {
    config.validate()?;
    let seeds = config.seeds();
    let algos = config.algo_order();

    let per_seed: Vec<Vec<SeedRun>> = if config.parallel {
        seeds
            .par_iter()
            .map(|&s| simulate_seed(config, &algos, s))
            .collect::<Result<_>>()?
    } else {
        seeds
            .iter()
            .map(|&s| simulate_seed(config, &algos, s))
            .collect::<Result<_>>()?
    };

    let criteria = config.criteria();
    let mut curves = Vec::with_capacity(algos.len());
    let mut summaries = Vec::with_capacity(algos.len());
    for (k, &algo) in algos.iter().enumerate() {
        let runs: Vec<Vec<f64>> = per_seed.iter().map(|r| r[k].sq_errors.clone()).collect();
        let bit_errors = per_seed
            .iter()
            .fold(BitErrors::default(), |acc, r| acc.merge(r[k].bit_errors));
        let curve = LearningCurve::new(metrics::ensemble_average(&runs)?, &criteria)?;
        summaries.push(AlgoSummary {
            algo,
            steady_state_mse: curve.steady_state_mse,
            convergence_iter: curve.convergence_iter,
            ber: bit_errors.rate(),
            bit_errors,
        });
        curves.push((algo, curve));
    }

    Ok(RunRecord {
        config: config.clone(),
        seeds,
        curves,
        report: ComparisonReport::new(summaries),
        tool_version: TOOL_VERSION,
    })
}

/// Fixed 17-significant-digit scientific notation.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_curves_csv<W: Write>(record: &RunRecord, mut out: W) -> io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for (algo, curve) in &record.curves {
        for (i, sq) in curve.sq_errors.iter().enumerate() {
            let smoothed = curve
                .smoothed
                .get(i)
                .map(|&v| fmt_f64(v))
                .unwrap_or_default();
            writeln!(out, "{i},{},{},{}", algo.tag(), fmt_f64(*sq), smoothed)?;
        }
    }
    out.flush()
}

pub fn emit_curves_csv(record: &RunRecord, path: &Path) -> Result<()> {
    write_file(path, |f| write_curves_csv(record, f))
}

fn join<T: ToString>(v: &[T]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

/// Formats the key=value summary.
pub fn summary_text(record: &RunRecord) -> String {
    let cfg = &record.config;
    let mut s = String::new();
    let mut kv = |k: &str, v: String| {
        let _ = writeln!(s, "{k}={v}");
    };
    kv("tool_version", record.tool_version.to_string());
    kv("symbol_generator", txrx::SYMBOL_ALGORITHM.to_string());
    kv("gaussian_generator", txrx::GAUSSIAN_ALGORITHM.to_string());

    kv("config.n_symbols", cfg.n_symbols.to_string());
    kv(
        "config.channel",
        cfg.channel
            .iter()
            .map(|&c| fmt_f64(c))
            .collect::<Vec<_>>()
            .join(","),
    );
    kv(
        "config.snr_db",
        cfg.snr_db.map_or_else(|| "none".to_string(), fmt_f64),
    );
    kv("config.noise_variance", fmt_f64(cfg.noise_variance()));
    kv("config.ff", cfg.n_ff.to_string());
    kv("config.fb", cfg.n_fb.to_string());
    kv("config.mu", fmt_f64(cfg.mu));
    kv("config.algo", join(&cfg.algo_order()));
    kv("config.mode", cfg.mode.to_string());
    kv("config.train_len", cfg.effective_training_len().to_string());
    kv("config.delay", cfg.resolved_delay().to_string());
    kv("config.ff_init", cfg.ff_init.to_string());
    kv("config.step_floor", fmt_f64(cfg.step_floor));
    kv(
        "config.step_cap",
        cfg.step_cap.map_or_else(|| "none".to_string(), fmt_f64),
    );
    kv("config.ber_skip", cfg.ber_skip().to_string());
    kv("seeds", join(&record.seeds));
    kv("criterion.window", cfg.window.to_string());
    kv("criterion.conv_ratio", fmt_f64(cfg.conv_ratio));
    kv("criterion.tail_frac", fmt_f64(cfg.tail_frac));

    let mut departures = Vec::new();
    if cfg.step_floor > 0.0 {
        departures.push("step_floor");
    }
    if cfg.step_cap.is_some() {
        departures.push("step_cap");
    }
    kv(
        "departures",
        if departures.is_empty() {
            "none".to_string()
        } else {
            departures.join(",")
        },
    );

    for a in &record.report.algos {
        let tag = a.algo.tag();
        kv(
            &format!("{tag}.steady_state_mse"),
            fmt_f64(a.steady_state_mse),
        );
        kv(
            &format!("{tag}.convergence_iter"),
            a.convergence_iter
                .map_or_else(|| "none".to_string(), |c| c.to_string()),
        );
        kv(&format!("{tag}.ber"), fmt_f64(a.ber));
        kv(
            &format!("{tag}.bit_errors"),
            a.bit_errors.errors.to_string(),
        );
        kv(
            &format!("{tag}.bits_compared"),
            a.bit_errors.compared.to_string(),
        );
    }
    if let Some(sp) = record.report.speedup {
        kv("speedup", fmt_f64(sp));
    }
    s
}

pub fn emit_summary(record: &RunRecord, path: &Path) -> Result<()> {
    let text = summary_text(record);
    write_file(path, |mut f| {
        f.write_all(text.as_bytes())?;
        f.flush()
    })
}

fn write_file(
    path: &Path,
    body: impl FnOnce(io::BufWriter<fs::File>) -> io::Result<()>,
) -> Result<()> {
    let io_err = |source| Error::Io {
        path: path.display().to_string(),
        source,
    };
    let file = fs::File::create(path).map_err(io_err)?;
    body(io::BufWriter::new(file)).map_err(io_err)
}
