//! `lstar-rnn`: train recurrent acceptors, extract automata from them, run
//! the baseline extractors and compare classifiers.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use config::ExperimentConfig;

#[derive(Debug, Parser)]
#[command(name = "lstar-rnn", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Train a network on a language and save its weights.
    Train(Common),
    /// Extract a DFA from trained weights.
    Extract {
        #[command(flatten)]
        common: Common,
        /// Weight file; defaults to `<out>/weights.json`.
        #[arg(long)]
        weights: Option<PathBuf>,
    },
    /// Run a baseline extractor on trained weights.
    Baseline {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        method: Method,
        #[arg(long)]
        weights: Option<PathBuf>,
        /// Intervals per dimension for `quant`.
        #[arg(long)]
        q: Option<usize>,
        /// Clusters for `kmeans`.
        #[arg(long)]
        k: Option<usize>,
    },
    /// Agreement of a DFA with a network, a language or another DFA.
    Eval {
        #[command(flatten)]
        common: Common,
        /// The DFA under evaluation.
        #[arg(long)]
        dfa: PathBuf,
        #[command(flatten)]
        reference: Reference,
        /// Comma-separated word lengths.
        #[arg(long, value_delimiter = ',')]
        lengths: Option<Vec<usize>>,
        /// Words per length.
        #[arg(long)]
        n: Option<usize>,
    },
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
struct Reference {
    #[arg(long)]
    weights: Option<PathBuf>,
    /// A registered language name, e.g. `tomita3`.
    #[arg(long)]
    against_language: Option<String>,
    #[arg(long)]
    against_dfa: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Method {
    Quant,
    Kmeans,
    Randsample,
}

/// Flags shared by all subcommands; they override the config file.
#[derive(Debug, Args)]
struct Common {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Wall-clock limit in seconds.
    #[arg(long)]
    time_limit: Option<f64>,
    #[arg(long)]
    initial_depth: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Language name, overriding the config.
    #[arg(long)]
    language: Option<String>,
}

impl Common {
    fn resolve(&self) -> Result<ExperimentConfig, CliError> {
        let mut cfg = match &self.config {
            Some(p) => ExperimentConfig::load(p)?,
            None => ExperimentConfig::default(),
        };
        if let Some(s) = self.seed {
            cfg.seed = Some(s);
        }
        if let Some(t) = self.time_limit {
            if !(t >= 0.0 && t.is_finite()) {
                return Err(CliError::config("--time-limit must be a non-negative number"));
            }
            cfg.extract.time_limit = t;
            cfg.baseline.time_limit = t;
        }
        if let Some(d) = self.initial_depth {
            cfg.extract.initial_depth = d;
        }
        if let Some(o) = &self.out {
            cfg.out = Some(o.clone());
        }
        if let Some(l) = &self.language {
            cfg.language = Some(l.clone());
            cfg.dfa_file = None;
        }
        if let Some(d) = &cfg.dfa_file {
            if !d.is_file() {
                return Err(CliError::config(format!("DFA file {} does not exist", d.display())));
            }
        }
        Ok(cfg)
    }
}

/// Error carrying its process exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub const CONFIG: u8 = 1;
    pub const TARGET_MISSED: u8 = 2;
    pub const CONTRACT: u8 = 3;

    pub fn config(message: impl Into<String>) -> Self {
        CliError {
            code: Self::CONFIG,
            message: message.into(),
        }
    }

    pub fn contract(message: impl Into<String>) -> Self {
        CliError {
            code: Self::CONTRACT,
            message: message.into(),
        }
    }
}

impl From<lstar_rnn::Error> for CliError {
    fn from(e: lstar_rnn::Error) -> Self {
        use lstar_rnn::Error as E;
        match e {
            E::Contract(_) | E::Dimension { .. } | E::NoOpRefinement(_) => CliError::contract(e.to_string()),
            _ => CliError::config(e.to_string()),
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Train(common) => commands::train(&common.resolve()?),
        Command::Extract { common, weights } => commands::extract(&common.resolve()?, weights),
        Command::Baseline {
            common,
            method,
            weights,
            q,
            k,
        } => {
            let mut cfg = common.resolve()?;
            if let Some(q) = q {
                cfg.baseline.q = q;
            }
            if let Some(k) = k {
                cfg.baseline.k = k;
            }
            commands::baseline(&cfg, method, weights)
        }
        Command::Eval {
            common,
            dfa,
            reference,
            lengths,
            n,
        } => {
            let mut cfg = common.resolve()?;
            if let Some(l) = lengths {
                cfg.eval.lengths = l;
            }
            if let Some(n) = n {
                cfg.eval.n = n;
            }
            let reference = match (reference.weights, reference.against_language, reference.against_dfa) {
                (Some(w), _, _) => commands::EvalReference::Weights(w),
                (_, Some(l), _) => commands::EvalReference::Language(l),
                (_, _, Some(d)) => commands::EvalReference::Dfa(d),
                _ => return Err(CliError::config("no reference given")),
            };
            commands::eval(&cfg, &dfa, reference)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { CliError::CONFIG } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
