use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use equalab::experiment::{self, ExperimentConfig};
use equalab::Error;

#[derive(Parser)]
#[command(
    name = "equalab",
    version,
    about = "LMS / variable-step LMS decision-feedback equalizer simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a seeded comparison and write the learning curves and summary.
    Run(RunArgs),
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct RunArgs {
    /// Flat key=value configuration file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n_symbols: Option<String>,
    /// Channel impulse response, comma separated.
    #[arg(long, allow_hyphen_values = true)]
    channel: Option<String>,
    #[arg(long, conflicts_with = "noiseless")]
    snr_db: Option<String>,
    #[arg(long)]
    noiseless: bool,
    #[arg(long)]
    ff: Option<String>,
    #[arg(long)]
    fb: Option<String>,
    #[arg(long)]
    mu: Option<String>,
    /// Comma separated subset of `lms,ilms`.
    #[arg(long)]
    algo: Option<String>,
    /// `dd` or `trained`.
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    train_len: Option<String>,
    #[arg(long)]
    delay: Option<String>,
    /// `zero` or `spike`.
    #[arg(long)]
    ff_init: Option<String>,
    #[arg(long)]
    seeds: Option<String>,
    #[arg(long)]
    base_seed: Option<String>,
    #[arg(long)]
    window: Option<String>,
    #[arg(long)]
    conv_ratio: Option<String>,
    #[arg(long)]
    tail_frac: Option<String>,
    #[arg(long)]
    step_floor: Option<String>,
    #[arg(long)]
    step_cap: Option<String>,
    #[arg(long)]
    ber_skip_frac: Option<String>,
    /// Run seeds on a single thread.
    #[arg(long)]
    serial: bool,
    #[arg(long)]
    out_curves: Option<PathBuf>,
    #[arg(long)]
    out_summary: Option<PathBuf>,
}

impl RunArgs {
    fn into_config(self) -> Result<ExperimentConfig, Error> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::from_file(path)?,
            None => ExperimentConfig::default(),
        };
        let flags = [
            ("n_symbols", self.n_symbols),
            ("channel", self.channel),
            ("snr_db", self.snr_db),
            ("ff", self.ff),
            ("fb", self.fb),
            ("mu", self.mu),
            ("algo", self.algo),
            ("mode", self.mode),
            ("train_len", self.train_len),
            ("delay", self.delay),
            ("ff_init", self.ff_init),
            ("seeds", self.seeds),
            ("base_seed", self.base_seed),
            ("window", self.window),
            ("conv_ratio", self.conv_ratio),
            ("tail_frac", self.tail_frac),
            ("step_floor", self.step_floor),
            ("step_cap", self.step_cap),
            ("ber_skip_frac", self.ber_skip_frac),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                cfg.set(key, &v)?;
            }
        }
        if self.noiseless {
            cfg.snr_db = None;
        }
        if self.serial {
            cfg.parallel = false;
        }
        if let Some(p) = self.out_curves {
            cfg.out_curves = Some(p);
        }
        if let Some(p) = self.out_summary {
            cfg.out_summary = Some(p);
        }
        Ok(cfg)
    }
}

fn run(args: RunArgs) -> Result<(), Error> {
    let cfg = args.into_config()?;
    let record = experiment::run_experiment(&cfg)?;
    if let Some(path) = &cfg.out_curves {
        experiment::emit_curves_csv(&record, path)?;
    }
    match &cfg.out_summary {
        Some(path) => experiment::emit_summary(&record, path)?,
        None => print!("{}", experiment::summary_text(&record)),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => run(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("equalab: {e}");
            match e {
                Error::Config { .. } => ExitCode::from(2),
                _ => ExitCode::FAILURE,
            }
        }
    }
}
