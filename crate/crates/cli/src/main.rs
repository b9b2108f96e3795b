mod args;

use std::collections::BTreeMap;
use std::path::Path;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use filament_core::andrews::{default_samples, min_samples};
use filament_core::export::{
    write_csv, write_curves_json, write_ply, write_report, CurveSet, RunConfig,
};
use filament_core::ingest::{load_csv, CsvOptions, Dataset, LabelColumn};
use filament_core::pipeline::{self, PrepareOptions, Prepared};
use filament_core::validate::{self, ValidateOptions};
use filament_core::Error;

use args::{AndrewsArgs, Cli, Command, FilamentArgs, InputArgs, ValidateArgs};

const EXIT_VALIDATION: u8 = 1;
const EXIT_IO: u8 = 2;
const EXIT_USAGE: u8 = 3;

enum Failure {
    Validation(String),
    Io(String),
    Usage(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Validation(_) => EXIT_VALIDATION,
            Failure::Io(_) => EXIT_IO,
            Failure::Usage(_) => EXIT_USAGE,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Validation(m) | Failure::Io(m) | Failure::Usage(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let msg = e.to_string();
        match e {
            Error::InsufficientSamples { .. } | Error::InvalidArgument(_) => Failure::Usage(msg),
            Error::BoundViolated { .. } => Failure::Validation(msg),
            _ => Failure::Io(msg),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_USAGE),
            };
        }
    };
    let result = match cli.command {
        Command::Andrews(a) => cmd_andrews(a),
        Command::Filament(f) => cmd_filament(f),
        Command::Validate(v) => cmd_validate(v),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

/// RFC 3339 timestamp; honours `SOURCE_DATE_EPOCH` for reproducible reports.
fn timestamp() -> String {
    use chrono::{DateTime, SecondsFormat, Utc};
    let at = std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|s| s.trim().parse::<i64>().ok())
        .and_then(|secs| DateTime::<Utc>::from_timestamp(secs, 0))
        .unwrap_or_else(Utc::now);
    at.to_rfc3339_opts(SecondsFormat::Secs, true)
}

fn thread_pool(threads: Option<usize>) -> Result<rayon::ThreadPool, Failure> {
    if threads == Some(0) {
        return Err(Failure::Usage("--threads must be at least 1".into()));
    }
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    builder
        .build()
        .map_err(|e| Failure::Usage(format!("cannot start thread pool: {e}")))
}

struct Loaded {
    prepared: Prepared,
    samples: usize,
    config: RunConfig,
    pool: rayon::ThreadPool,
}

fn load(input: &InputArgs, command: &str) -> Result<Loaded, Failure> {
    let delimiter = args::parse_delimiter(&input.delimiter).ok_or_else(|| {
        Failure::Usage(format!(
            "--delimiter must be a single ASCII character or `tab`, got {:?}",
            input.delimiter
        ))
    })?;
    let pool = thread_pool(input.threads)?;
    let csv = CsvOptions {
        delimiter,
        has_header: !input.no_header,
        label_column: input.label_column.as_deref().map(LabelColumn::parse),
    };
    let raw: Dataset = load_csv(&input.input, &csv)?;
    let d = raw.d();
    let samples = input.samples.unwrap_or_else(|| default_samples(d));
    if samples < min_samples(d) {
        return Err(Error::InsufficientSamples {
            samples,
            required: min_samples(d),
            d,
        }
        .into());
    }
    let options = PrepareOptions {
        standardize: input.standardize.into(),
        convention: input.std_convention.into(),
        constant_rows: input.constant_rows.into(),
        phases: input.phases.into(),
    };
    let prepared = pipeline::prepare(&raw, &options)?;
    let mut outputs = BTreeMap::new();
    outputs.insert("report".into(), display(&input.report));
    if let Some(p) = &input.csv {
        outputs.insert("csv".into(), display(p));
    }
    let config = RunConfig {
        command: command.into(),
        input: display(&input.input),
        outputs,
        label_column: input.label_column.clone(),
        delimiter: input.delimiter.clone(),
        has_header: !input.no_header,
        samples,
        steps: None,
        standardize: options.standardize,
        std_convention: options.convention,
        phases: options.phases,
        threads: pool.current_num_threads(),
    };
    Ok(Loaded {
        prepared,
        samples,
        config,
        pool,
    })
}

fn display(p: &Path) -> String {
    p.display().to_string()
}

fn finish(
    input: &InputArgs,
    loaded: &Loaded,
    config: RunConfig,
    filaments: Option<&[filament_core::bishop::Filament]>,
) -> Result<(), Failure> {
    if let Some(p) = &input.csv {
        write_csv(p, &loaded.prepared.dataset)?;
    }
    let report = pipeline::build_report(
        config,
        timestamp(),
        &loaded.prepared,
        loaded.samples,
        filaments,
    )?;
    write_report(&input.report, &report)?;
    let failed: Vec<&str> = report
        .checks
        .iter()
        .filter(|c| !c.passed)
        .map(|c| c.name.as_str())
        .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Validation(format!(
            "report checks failed: {}",
            failed.join(", ")
        )))
    }
}

fn cmd_andrews(a: AndrewsArgs) -> Result<(), Failure> {
    let loaded = load(&a.input, "andrews")?;
    let curves = loaded
        .pool
        .install(|| pipeline::andrews_curves(&loaded.prepared, loaded.samples))?;
    let ds = &loaded.prepared.dataset;
    write_curves_json(&a.output, CurveSet::Andrews(&curves), ds.d(), ds.labels.as_deref())?;
    let mut config = loaded.config.clone();
    config.outputs.insert("curves".into(), display(&a.output));
    finish(&a.input, &loaded, config, None)
}

fn cmd_filament(f: FilamentArgs) -> Result<(), Failure> {
    let loaded = load(&f.input, "filament")?;
    let steps = f.steps.unwrap_or(loaded.samples);
    if steps == 0 {
        return Err(Failure::Usage("--steps must be at least 1".into()));
    }
    let fils = loaded
        .pool
        .install(|| pipeline::filaments(&loaded.prepared, steps))?;
    let ds = &loaded.prepared.dataset;
    let labels = ds.labels.as_deref();
    write_curves_json(&f.json, CurveSet::Filaments(&fils), ds.d(), labels)?;
    write_ply(&f.ply, &fils, labels)?;
    let mut config = loaded.config.clone();
    config.steps = Some(steps);
    config.outputs.insert("json".into(), display(&f.json));
    config.outputs.insert("ply".into(), display(&f.ply));
    finish(&f.input, &loaded, config, Some(&fils))
}

fn cmd_validate(v: ValidateArgs) -> Result<(), Failure> {
    if let Some(ds) = &v.d_list {
        if ds.is_empty() || ds.contains(&0) {
            return Err(Failure::Usage("--d-list entries must be positive".into()));
        }
    }
    let report = validate::run(&ValidateOptions {
        suite: v.suite.into(),
        d_list: v.d_list,
        seed: v.seed,
    });
    print!("{}", report.table());
    let failed: Vec<String> = report
        .failures()
        .map(|o| format!("{}/{}", o.suite, o.name))
        .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Validation(format!(
            "invariants violated: {}",
            failed.join(", ")
        )))
    }
}
