use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use livsic_core::error::{Error, Result};
use livsic_core::experiments::{self, emit, ExperimentConfig, Format, Report, Scenario};

const SCHEMA: &str = include_str!("../../../docs/config.schema.json");

#[derive(Parser)]
#[command(name = "livsic", version, about = "Holonomies, closing and transfer maps for twisted cocycles")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fiber-bunching certificate, or a margin sweep if the config has one.
    Certify(RunArgs),
    /// Holonomy increment decay against the certified rate.
    Holonomy(RunArgs),
    /// Recover a conjugacy from two cocycles with equal periodic data.
    Reconstruct(RunArgs),
    /// Periodic-data mismatch detection and s/u consistency.
    Periodic(RunArgs),
    /// Shadowing constants of the closing lemma.
    Closing(RunArgs),
    /// Run the built-in configs, or every `*.json` in a directory.
    Suite(SuiteArgs),
    /// Print the JSON schema of experiment configs.
    Schema,
}

#[derive(Args)]
struct Output {
    /// File or directory for the report; JSON goes to stdout without it.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutFormat::Json)]
    format: OutFormat,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Overrides the seed in the config.
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct SuiteArgs {
    /// Directory of configs; the built-in set when absent.
    #[arg(long)]
    configs: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    output: Output,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutFormat {
    Json,
    Csv,
}

impl From<OutFormat> for Format {
    fn from(f: OutFormat) -> Format {
        match f {
            OutFormat::Json => Format::Json,
            OutFormat::Csv => Format::Csv,
        }
    }
}

fn load(path: &Path, seed: Option<u64>) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let mut cfg = ExperimentConfig::from_json(&text).map_err(|e| Error::ConfigInvalid(format!("{}: {e}", path.display())))?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn run_one(args: &RunArgs, allowed: &[Scenario]) -> Result<Vec<Report>> {
    let cfg = load(&args.config, args.seed)?;
    if !allowed.contains(&cfg.scenario) {
        let names: Vec<&str> = allowed.iter().map(|s| s.as_str()).collect();
        return Err(Error::ConfigInvalid(format!(
            "{}: scenario {} does not belong to this command (expected {})",
            args.config.display(),
            cfg.scenario.as_str(),
            names.join(" or ")
        )));
    }
    let report = experiments::run(&cfg)
        .map_err(|e| with_context(e, &format!("{} (seed {})", cfg.scenario.as_str(), cfg.seed)))?;
    Ok(vec![report])
}

fn run_suite(args: &SuiteArgs) -> Result<Vec<Report>> {
    let mut configs = match &args.configs {
        None => experiments::builtin_configs()?,
        Some(dir) => {
            let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|x| x == "json"))
                .collect();
            paths.sort();
            paths.iter().map(|p| load(p, None)).collect::<Result<Vec<_>>>()?
        }
    };
    if let Some(s) = args.seed {
        configs.iter_mut().for_each(|c| c.seed = s);
    }
    configs
        .iter()
        .map(|c| experiments::run(c).map_err(|e| with_context(e, &format!("{} (seed {})", c.scenario.as_str(), c.seed))))
        .collect()
}

fn with_context(e: Error, what: &str) -> Error {
    match e {
        Error::ConfigInvalid(m) => Error::ConfigInvalid(format!("{what}: {m}")),
        Error::Io(m) => Error::Io(format!("{what}: {m}")),
        Error::SolveFailure(m) => Error::SolveFailure(format!("{what}: {m}")),
        other => {
            eprintln!("error in {what}");
            other
        }
    }
}

fn summarize(reports: &[Report]) {
    for r in reports {
        for v in &r.verdicts {
            eprintln!(
                "[{}] {} {}: measured {} bound {}",
                if v.passed { "PASS" } else { "FAIL" },
                r.scenario,
                v.name,
                serde_json::to_string(&v.measured).unwrap_or_default(),
                serde_json::to_string(&v.bound).unwrap_or_default()
            );
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (reports, output) = match &cli.command {
        Command::Schema => {
            print!("{SCHEMA}");
            return ExitCode::SUCCESS;
        }
        Command::Certify(a) => (run_one(a, &[Scenario::Certify, Scenario::MarginSweep]), &a.output),
        Command::Holonomy(a) => (run_one(a, &[Scenario::HolonomyRate]), &a.output),
        Command::Reconstruct(a) => (run_one(a, &[Scenario::Reconstruct]), &a.output),
        Command::Periodic(a) => (run_one(a, &[Scenario::PeriodicMismatch]), &a.output),
        Command::Closing(a) => (run_one(a, &[Scenario::Closing]), &a.output),
        Command::Suite(a) => (run_suite(a), &a.output),
    };
    let result = reports.and_then(|r| {
        emit(&r, output.format.into(), output.out.as_deref())?;
        Ok(r)
    });
    match result {
        Ok(reports) => {
            summarize(&reports);
            if reports.iter().all(|r| r.passed) {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            }
        }
        Err(e) => {
            eprintln!("error [{}]: {e}", e.code());
            ExitCode::from(3)
        }
    }
}
