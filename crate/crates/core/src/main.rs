use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::info;

use loglab::config::{Format, RunConfig};
use loglab::drift::{shifted_event_probability, witness_lower_bound, BumpProfile, DriftProfile};
use loglab::estimator::{estimate_z, MCConfig};
use loglab::output::{emit, estimate_table, scan_table, witness_table, EstimateOutput, WitnessOutput};
use loglab::scan::{run_scan, summarize};
use loglab::verify::{run_suite, SUITES};
use loglab::Error;

#[derive(Parser)]
#[command(name = "loglab", version, about = "Truncated focusing Gibbs measures on the torus")]
struct Cli {
    /// Master seed; overrides the config file.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (0 = all cores).
    #[arg(long, global = true, env = "LOGLAB_WORKERS")]
    workers: Option<usize>,
    /// Output base path; `.csv` / `.json` is appended. Prints to stdout if absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a named verification suite.
    Verify { suite: String },
    /// Estimate Z_N and its p-th moment.
    Estimate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Variational lower bound with a drift profile.
    Witness {
        #[arg(long)]
        config: PathBuf,
    },
    /// Parameter grid over couplings, cutoffs and schedules.
    Scan {
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

enum Failure {
    Usage(Error),
    Runtime(Error),
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn load(path: Option<&PathBuf>, cli: &Cli) -> Result<RunConfig, Failure> {
    let config = match path {
        Some(p) => RunConfig::load(p).map_err(Failure::Usage)?,
        None => RunConfig::default(),
    };
    Ok(config.with_overrides(cli.seed, cli.workers))
}

fn missing(section: &str) -> Failure {
    Failure::Usage(Error::Config(format!("config file has no [{section}] section")))
}

fn run(cli: Cli) -> Result<ExitCode, Failure> {
    match &cli.command {
        Command::Verify { suite } => {
            if !SUITES.contains(&suite.as_str()) {
                eprintln!("unknown suite '{suite}'; available suites:");
                for s in SUITES {
                    eprintln!("  {s}");
                }
                return Ok(ExitCode::from(2));
            }
            let seed = cli.seed.unwrap_or(loglab::config::DEFAULT_SEED);
            let report = run_suite(suite, seed, cli.workers.unwrap_or(0)).map_err(Failure::Runtime)?;
            print!("{}", report.render());
            Ok(if report.passed() { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Command::Estimate { config } => {
            let run_config = load(Some(config), &cli)?;
            let section = run_config.estimate.clone().ok_or_else(|| missing("estimate"))?;
            section.validate().map_err(Failure::Usage)?;
            let z1 = estimate_z(&MCConfig { p: 1.0, ..section.clone() }).map_err(Failure::Runtime)?;
            let zp = estimate_z(&section).map_err(Failure::Runtime)?;
            let out = EstimateOutput { config: section, z1, zp };
            write(&cli, "estimate", &run_config, &estimate_table(&out), &out)
        }
        Command::Witness { config } => {
            let run_config = load(Some(config), &cli)?;
            let section = run_config.witness.clone().ok_or_else(|| missing("witness"))?;
            section.validate().map_err(Failure::Usage)?;
            let profile = BumpProfile::new(section.d).map_err(Failure::Usage)?;
            let drift = DriftProfile::new(&profile, section.scale(), section.gamma, section.drift_cutoff())
                .map_err(Failure::Usage)?;
            let witness = witness_lower_bound(&section).map_err(Failure::Runtime)?;
            let (event, chebyshev) = shifted_event_probability(&section).map_err(Failure::Runtime)?;
            let out =
                WitnessOutput { config: section, witness, theta_cost: drift.theta_cost, event, chebyshev };
            write(&cli, "witness", &run_config, &witness_table(&out), &out)
        }
        Command::Scan { config } => {
            let mut run_config = load(config.as_ref(), &cli)?;
            if run_config.scan.is_none() {
                run_config.scan = Some(Default::default());
                run_config = run_config.with_overrides(None, None);
            }
            let section = run_config.scan.clone().expect("scan section present");
            section.validate().map_err(Failure::Usage)?;
            let rows = run_scan(&section).map_err(Failure::Runtime)?;
            match summarize(&rows) {
                Ok((labels, brackets)) => {
                    for l in &labels {
                        info!("{} c = {}: {}", l.schedule, l.c, l.label);
                    }
                    for (schedule, b) in &brackets {
                        info!("{schedule}: crossover bracket ({:?}, {:?})", b.lower, b.upper);
                    }
                }
                Err(e) => info!("no regime labels: {e}"),
            }
            write(&cli, "scan", &run_config, &scan_table(&rows), &rows)
        }
    }
}

fn write<T: serde::Serialize>(
    cli: &Cli,
    command: &str,
    config: &RunConfig,
    table: &loglab::output::Table,
    results: &T,
) -> Result<ExitCode, Failure> {
    let base = cli.out.clone().or_else(|| config.run.out.as_ref().map(PathBuf::from));
    let format = cli.format.or(config.run.format).unwrap_or_default();
    let paths = emit(command, config, table, results, base.as_deref(), format).map_err(Failure::Runtime)?;
    for p in paths {
        info!("wrote {}", p.display());
    }
    Ok(ExitCode::SUCCESS)
}
