use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use filament_core::andrews::PhasePolicy;
use filament_core::ingest::{ConstantRowPolicy, StandardizePolicy, StdConvention};
use filament_core::validate::{Suite, DEFAULT_SEED};

#[derive(Debug, Parser)]
#[command(
    name = "filament",
    version,
    about = "Optimally smooth 3D Andrews plots and filament plots of tabular data"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample one plane curve per data point and write them as JSON.
    Andrews(AndrewsArgs),
    /// Integrate one unit-length space curve per data point; writes PLY and JSON.
    Filament(FilamentArgs),
    /// Run the built-in property suites and print a pass/fail table.
    Validate(ValidateArgs),
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// CSV file with one data point per row.
    #[arg(long, short)]
    pub input: PathBuf,

    /// Column holding class labels: a header name or a 0-based index.
    #[arg(long)]
    pub label_column: Option<String>,

    /// Field delimiter: a single character, or `tab`.
    #[arg(long, default_value = ",")]
    pub delimiter: String,

    /// The first row is data, not a header.
    #[arg(long)]
    pub no_header: bool,

    /// Per-feature standardization before the decomposition.
    #[arg(long, value_enum, default_value_t = Standardize::Zscore)]
    pub standardize: Standardize,

    /// Standard deviation used by `zscore`.
    #[arg(long, value_enum, default_value_t = Convention::Population)]
    pub std_convention: Convention,

    /// What to do with features that are constant across all points.
    #[arg(long, value_enum, default_value_t = ConstantRows::Zero)]
    pub constant_rows: ConstantRows,

    /// Harmonic phase offsets.
    #[arg(long, value_enum, default_value_t = Phases::Quadratic)]
    pub phases: Phases,

    /// Curve samples per point; must be at least 4d+2 [default: max(1024, 4d+2)].
    #[arg(long)]
    pub samples: Option<usize>,

    /// Worker threads for per-point generation [default: available cores].
    #[arg(long)]
    pub threads: Option<usize>,

    /// Run report (JSON) path.
    #[arg(long, default_value = "report.json")]
    pub report: PathBuf,

    /// Also write the standardized data as CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AndrewsArgs {
    #[command(flatten)]
    pub input: InputArgs,

    /// Curves JSON path.
    #[arg(long, short, default_value = "curves.json")]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct FilamentArgs {
    #[command(flatten)]
    pub input: InputArgs,

    /// Integration steps per filament [default: the sample count].
    #[arg(long)]
    pub steps: Option<usize>,

    /// Filament polylines as JSON.
    #[arg(long, default_value = "filaments.json")]
    pub json: PathBuf,

    /// Filament polylines as ASCII PLY.
    #[arg(long, default_value = "filaments.ply")]
    pub ply: PathBuf,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(long, value_enum, default_value_t = SuiteArg::All)]
    pub suite: SuiteArg,

    /// Comma-separated dimensions for the time-slice and Gauss sum checks
    /// [default: 25,64,128 and 1,16,256,4096].
    #[arg(long, value_delimiter = ',')]
    pub d_list: Option<Vec<usize>>,

    /// Seed for the random fixtures.
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Standardize {
    None,
    Center,
    Zscore,
}

impl From<Standardize> for StandardizePolicy {
    fn from(s: Standardize) -> Self {
        match s {
            Standardize::None => StandardizePolicy::None,
            Standardize::Center => StandardizePolicy::Center,
            Standardize::Zscore => StandardizePolicy::Zscore,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Convention {
    Population,
    Sample,
}

impl From<Convention> for StdConvention {
    fn from(c: Convention) -> Self {
        match c {
            Convention::Population => StdConvention::Population,
            Convention::Sample => StdConvention::Sample,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ConstantRows {
    Zero,
    Error,
}

impl From<ConstantRows> for ConstantRowPolicy {
    fn from(c: ConstantRows) -> Self {
        match c {
            ConstantRows::Zero => ConstantRowPolicy::Zero,
            ConstantRows::Error => ConstantRowPolicy::Error,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Phases {
    Quadratic,
    None,
}

impl From<Phases> for PhasePolicy {
    fn from(p: Phases) -> Self {
        match p {
            Phases::Quadratic => PhasePolicy::Quadratic,
            Phases::None => PhasePolicy::None,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SuiteArg {
    All,
    Andrews,
    Bishop,
    Gauss,
}

impl From<SuiteArg> for Suite {
    fn from(s: SuiteArg) -> Self {
        match s {
            SuiteArg::All => Suite::All,
            SuiteArg::Andrews => Suite::Andrews,
            SuiteArg::Bishop => Suite::Bishop,
            SuiteArg::Gauss => Suite::Gauss,
        }
    }
}

pub fn parse_delimiter(s: &str) -> Option<u8> {
    match s {
        "tab" | "\\t" | "\t" => Some(b'\t'),
        _ if s.len() == 1 && s.is_ascii() => Some(s.as_bytes()[0]),
        _ => None,
    }
}
