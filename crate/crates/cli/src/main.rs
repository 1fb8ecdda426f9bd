//! `jointex` command-line front end.
//!
//! Exit status: 0 success, 1 failed checks or other errors, 2 unreadable or
//! invalid input, 3 a vanishing detuning, 4 an integration failure.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use jointex::{Error, Objective};

#[derive(Parser)]
#[command(name = "jointex", version, about = "Photon-mediated joint excitation of two atoms in a cavity")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form effective coupling, detunings and dispersive ratios.
    Chi {
        /// Config file, or the name of an embedded preset.
        config: String,
        /// Print the report as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Integrate the dynamics and write the standard traces as CSV.
    Evolve {
        config: String,
        #[command(flatten)]
        run: RunArgs,
        /// Use the dissipative master equation.
        #[arg(long)]
        dissipative: bool,
        /// CSV destination; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Search the resonance and report every evaluated point.
    Scan {
        config: String,
        /// Frequency window `lo:hi` in GHz; defaults to the config's.
        #[arg(long, value_parser = parse_range)]
        range: Option<(f64, f64)>,
        #[arg(long, value_enum)]
        objective: Option<ObjectiveArg>,
        #[arg(long, value_enum, default_value_t = ModelArg::Full)]
        model: ModelArg,
        #[arg(long)]
        n_max: Option<usize>,
        /// Scan report CSV destination.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a preset end to end and check its acceptance quantities.
    Scenario {
        #[arg(value_parser = parse_preset)]
        name: jointex::Preset,
        #[command(flatten)]
        run: RunArgs,
        /// Directory for the CSV bundle.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the invariant and oracle suite, optionally checking a config too.
    Validate { config: Option<String> },
    /// Print an embedded preset as JSON, or list them.
    Preset {
        #[arg(value_parser = parse_preset)]
        name: Option<jointex::Preset>,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, value_enum, default_value_t = ModelArg::Full)]
    model: ModelArg,
    /// Locate the resonance before evolving (default).
    #[arg(long, overrides_with = "no_scan")]
    scan: bool,
    /// Evolve at the configured frequencies.
    #[arg(long)]
    no_scan: bool,
    /// Photon-number cutoff.
    #[arg(long)]
    n_max: Option<usize>,
    /// Relative solver tolerance.
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    Full,
    Effective,
}

#[derive(Clone, Copy, ValueEnum)]
enum ObjectiveArg {
    PeakTransfer,
    MinGap,
}

impl From<ObjectiveArg> for Objective {
    fn from(o: ObjectiveArg) -> Self {
        match o {
            ObjectiveArg::PeakTransfer => Objective::PeakTransfer,
            ObjectiveArg::MinGap => Objective::MinGap,
        }
    }
}

impl From<ModelArg> for jointex::ModelKind {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::Full => jointex::ModelKind::Full,
            ModelArg::Effective => jointex::ModelKind::Effective,
        }
    }
}

impl RunArgs {
    fn options(&self, dissipative: Option<bool>) -> jointex::RunOptions {
        jointex::RunOptions {
            model: self.model.into(),
            dissipative,
            scan: !self.no_scan,
            n_max: self.n_max,
            rtol: self.tol,
            keep_states: false,
        }
    }
}

fn parse_range(s: &str) -> Result<(f64, f64), String> {
    let (lo, hi) = s.split_once(':').ok_or("expected lo:hi")?;
    let lo: f64 = lo.trim().parse().map_err(|e| format!("{lo}: {e}"))?;
    let hi: f64 = hi.trim().parse().map_err(|e| format!("{hi}: {e}"))?;
    if !(lo < hi) {
        return Err(format!("empty range {lo}:{hi}"));
    }
    Ok((lo, hi))
}

fn parse_preset(s: &str) -> Result<jointex::Preset, String> {
    commands::preset_named(s).ok_or_else(|| format!("unknown preset '{s}'"))
}

/// Failure carrying its exit status.
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn checks(message: impl Into<String>) -> Self {
        Self { code: 1, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Json(_) | Error::Io(_) | Error::Config(_) | Error::InvalidSpec(_) => 2,
            Error::Singular(_) => 3,
            Error::Integration { .. } => 4,
            _ => 1,
        };
        Self { code, message: e.to_string() }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e).into()
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Chi { config, json } => commands::chi(&config, json),
        Command::Evolve { config, run, dissipative, out } => {
            commands::evolve(&config, &run.options(dissipative.then_some(true)), out.as_deref())
        }
        Command::Scan { config, range, objective, model, n_max, out } => commands::scan(
            &config,
            commands::ScanArgs { range, objective: objective.map(Into::into), model: model.into(), n_max },
            out.as_deref(),
        ),
        Command::Scenario { name, run, out } => commands::scenario(name, &run.options(None), out.as_deref()),
        Command::Validate { config } => commands::validate(config.as_deref()),
        Command::Preset { name } => commands::preset(name),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
