//! The `knotnet` command line.
//!
//! Every command writes its report as TSV to stdout, or to `--out`.
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 verification
//! failure.

use std::ffi::OsString;
use std::fmt;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

mod certs;
mod data;
mod models;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_VERIFICATION: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "knotnet", version, about = "Knot invariant prediction from braid words")]
pub struct Cli {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Run single-threaded and bit-reproducibly.
    #[arg(long, global = true, default_value_t = true, num_args = 0..=1, default_missing_value = "true", action = clap::ArgAction::Set)]
    pub deterministic: bool,
    /// Training epochs; defaults to the target's preset.
    #[arg(long, global = true)]
    pub epochs: Option<usize>,
    #[arg(long, global = true, default_value_t = 32)]
    pub batch_size: usize,
    #[arg(long, global = true, default_value_t = 1e-3)]
    pub lr: f64,
    /// Dropout rate on every hidden layer.
    #[arg(long, global = true, default_value_t = 0.5)]
    pub dropout: f64,
    /// Hidden layer sizes, comma separated; defaults to the target's preset.
    #[arg(long, global = true, value_delimiter = ',')]
    pub hidden: Option<Vec<usize>>,
    /// Braid representatives per knot.
    #[arg(long, global = true, default_value_t = 32)]
    pub reps: usize,
    /// Knots held out per run.
    #[arg(long, global = true, default_value_t = 50)]
    pub test_knots: usize,
    /// Probability cutoff for quasipositivity.
    #[arg(long, global = true, default_value_t = 0.5)]
    pub cutoff: f64,
    /// Random rewrites tried per braid by certificate search.
    #[arg(long, global = true, default_value_t = 100)]
    pub budget: usize,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TargetArg {
    Qp,
    G4,
    Tau,
}

impl TargetArg {
    pub fn name(self) -> &'static str {
        match self {
            TargetArg::Qp => "qp",
            TargetArg::G4 => "g4",
            TargetArg::Tau => "tau",
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, ValueEnum)]
pub enum PaddingArg {
    #[default]
    Trailing,
    Leading,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Augment, split, train and evaluate a network for one invariant.
    Train {
        /// Input CSV.
        #[arg(long)]
        data: PathBuf,
        #[arg(long, value_enum)]
        target: TargetArg,
        /// Where to write the model JSON.
        #[arg(long)]
        model: PathBuf,
        /// Independent runs with seeds seed, seed+1, ...
        #[arg(long, default_value_t = 1)]
        repeats: usize,
        /// Save a final network trained on every labelled knot.
        #[arg(long)]
        final_full_data: bool,
        /// Fit feature normalization on all rows instead of training rows.
        #[arg(long)]
        normalize_all: bool,
        #[arg(long, value_enum, default_value_t)]
        padding: PaddingArg,
    },
    /// Mean and deviation of a model's predictions per knot.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
        /// Restrict the report to these knots, comma separated.
        #[arg(long, value_delimiter = ',')]
        knots: Option<Vec<String>>,
    },
    /// Order knots by how close their predicted slice genus is to 1.
    RankNonslice {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long, value_delimiter = ',')]
        knots: Option<Vec<String>>,
    },
    /// Verify band-center certificate tables; the bundled tables when no
    /// file is given.
    VerifyCerts { fixtures: Vec<PathBuf> },
    /// Search for certificates on representatives a model rates as likely
    /// quasipositive.
    SearchQp {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        model: PathBuf,
    },
    /// Audit rounded genus predictions against rounded τ predictions.
    CheckRelations {
        #[arg(long)]
        g_model: PathBuf,
        #[arg(long)]
        tau_model: PathBuf,
        #[arg(long)]
        data: PathBuf,
    },
    /// Write the augmented dataset as a cache table.
    Augment {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, value_enum, default_value_t)]
        padding: PaddingArg,
    },
    /// Print the slot one-hot encoding of braid words.
    Encode {
        #[arg(required = true)]
        braids: Vec<String>,
        #[arg(long, value_enum, default_value_t)]
        padding: PaddingArg,
    },
}

/// A failed command and its exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl fmt::Display) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.to_string(),
        }
    }

    pub fn data(message: impl fmt::Display) -> Self {
        Self {
            code: EXIT_DATA,
            message: message.to_string(),
        }
    }

    pub fn verification(message: impl fmt::Display) -> Self {
        Self {
            code: EXIT_VERIFICATION,
            message: message.to_string(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

pub type CliResult<T = ()> = Result<T, CliError>;

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::data(e)
    }
}

/// Where a command's report goes.
pub(crate) fn report_writer<'a>(out: Option<&Path>, stdout: &'a mut dyn Write) -> CliResult<Box<dyn Write + 'a>> {
    match out {
        Some(path) => {
            let file = File::create(path).map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
            Ok(Box::new(BufWriter::new(file)))
        }
        None => Ok(Box::new(stdout)),
    }
}

/// Parses `args` and runs the command, returning the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{}", e.render());
                    return EXIT_OK;
                }
                _ => EXIT_USAGE,
            };
            let _ = write!(stderr, "{}", e.render());
            return code;
        }
    };
    match dispatch(&cli, stdout, stderr) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.code
        }
    }
}

fn dispatch(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CliResult {
    let common = &cli.common;
    if !(0.0..1.0).contains(&common.dropout) {
        return Err(CliError::usage(format!("--dropout {} outside [0, 1)", common.dropout)));
    }
    if common.batch_size == 0 || common.reps == 0 {
        return Err(CliError::usage("--batch-size and --reps must be positive"));
    }
    if !(common.lr.is_finite() && common.lr > 0.0) {
        return Err(CliError::usage("--lr must be positive"));
    }
    let mut out = report_writer(common.out.as_deref(), stdout)?;
    let result = match &cli.command {
        Command::Train {
            data,
            target,
            model,
            repeats,
            final_full_data,
            normalize_all,
            padding,
        } => models::train(
            common,
            &models::TrainArgs {
                data,
                target: *target,
                model,
                repeats: *repeats,
                final_full_data: *final_full_data,
                normalize_all: *normalize_all,
                padding: *padding,
            },
            &mut out,
            stderr,
        ),
        Command::Predict { model, data, knots } => {
            models::predict(common, model, data, knots.as_deref(), &mut out, stderr)
        }
        Command::RankNonslice { model, data, knots } => {
            models::rank_nonslice(common, model, data, knots.as_deref(), &mut out, stderr)
        }
        Command::VerifyCerts { fixtures } => certs::verify_certs(fixtures, &mut out),
        Command::SearchQp { data, model } => certs::search_qp(common, data, model, &mut out, stderr),
        Command::CheckRelations {
            g_model,
            tau_model,
            data,
        } => models::check_relations(common, g_model, tau_model, data, &mut out, stderr),
        Command::Augment { data, padding } => data::augment(common, data, *padding, &mut out, stderr),
        Command::Encode { braids, padding } => data::encode(braids, *padding, &mut out),
    };
    out.flush()?;
    result
}
