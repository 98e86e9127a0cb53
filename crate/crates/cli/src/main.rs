//! `cavity-pat`: phantoms, synthetic measurements and time-reversal
//! reconstructions in a reflecting square cavity.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use cavity_core::io::{apply_config_file, RunConfig};
use cavity_core::Result;
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "cavity-pat", version, about)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

/// Options shared by every subcommand. Precedence: flag > config file >
/// built-in default (or demo preset).
#[derive(Args, Debug, Default)]
struct Common {
    /// `key = value` configuration file
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Noise seed
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Interior cells per side
    #[arg(long, global = true, allow_hyphen_values = true)]
    n: Option<String>,
    /// Measurement time
    #[arg(long = "T", global = true, allow_hyphen_values = true)]
    t_final: Option<String>,
    /// full, left_bottom or nodes
    #[arg(long, global = true)]
    gamma: Option<String>,
    /// Relative noise level in L2
    #[arg(long, global = true, allow_hyphen_values = true)]
    noise: Option<String>,
    /// Neumann series length
    #[arg(long, global = true, allow_hyphen_values = true)]
    iterations: Option<String>,
    /// H0 or H1
    #[arg(long, global = true)]
    subspace: Option<String>,
    /// Dissipation weight on the measurement surface
    #[arg(long, global = true, allow_hyphen_values = true)]
    lambda: Option<String>,
    /// Shrink dt so that T is a whole number of steps
    #[arg(long, global = true)]
    fit_dt: bool,
    /// Any configuration key, as KEY=VALUE (repeatable)
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Render the phantom as PGM and CSV
    Phantom,
    /// Synthesize the boundary trace spectrally, optionally with noise
    Forward,
    /// Reconstruct from a trace file
    Reconstruct {
        /// Trace CSV written by `forward`
        #[arg(long)]
        trace: PathBuf,
        /// Skip the error table against the configured phantom
        #[arg(long)]
        no_reference: bool,
    },
    /// Run one of the canned experiments end to end
    Demo {
        #[arg(value_enum)]
        name: Demo,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Demo {
    /// Full data, T = 5, one-shot
    Fig1Full,
    /// Left and bottom sides, T = 5, one-shot
    Fig1Partial,
    /// 50% noise, T = 5, full and partial data
    Fig2Noise,
    /// Full data, T = 1.6, five iterations
    Fig3IterFull,
    /// Left and bottom sides, T = 3, five iterations
    Fig4IterPartial,
}

impl Demo {
    pub fn name(self) -> &'static str {
        match self {
            Demo::Fig1Full => "fig1-full",
            Demo::Fig1Partial => "fig1-partial",
            Demo::Fig2Noise => "fig2-noise",
            Demo::Fig3IterFull => "fig3-iter-full",
            Demo::Fig4IterPartial => "fig4-iter-partial",
        }
    }

    /// Preset keys layered under the config file and flags.
    fn preset(self) -> &'static str {
        match self {
            Demo::Fig1Full => "T = 5\ngamma = full\niterations = 1",
            Demo::Fig1Partial => "T = 5\ngamma = left_bottom\niterations = 1",
            Demo::Fig2Noise => "T = 5\nnoise = 0.5\niterations = 1",
            Demo::Fig3IterFull => "T = 1.6\nfit_dt = true\ngamma = full\niterations = 5",
            Demo::Fig4IterPartial => "T = 3\ngamma = left_bottom\niterations = 5",
        }
    }
}

impl Common {
    fn resolve(&self, base: &str) -> Result<RunConfig> {
        let mut cfg = RunConfig::default();
        cfg.apply_text(base)?;
        if let Some(path) = &self.config {
            apply_config_file(&mut cfg, path)?;
        }
        let flags = [
            ("n", &self.n),
            ("T", &self.t_final),
            ("gamma", &self.gamma),
            ("noise", &self.noise),
            ("iterations", &self.iterations),
            ("subspace", &self.subspace),
            ("lambda", &self.lambda),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                cfg.set(key, v)?;
            }
        }
        if self.fit_dt {
            cfg.fit_dt = true;
        }
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(out) = &self.out {
            cfg.out = out.clone();
        }
        for kv in &self.set {
            let (k, v) = kv.split_once('=').ok_or_else(|| {
                cavity_core::Error::InvalidArgument(format!("--set expects KEY=VALUE, found `{kv}`"))
            })?;
            cfg.set(k.trim(), v)?;
        }
        cfg.check()?;
        Ok(cfg)
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Phantom => commands::phantom(&cli.common.resolve("")?),
        Command::Forward => commands::forward(&cli.common.resolve("")?),
        Command::Reconstruct { trace, no_reference } => {
            commands::reconstruct(&cli.common.resolve("")?, &trace, !no_reference)
        }
        Command::Demo { name } => commands::demo(name, &cli.common.resolve(name.preset())?),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
