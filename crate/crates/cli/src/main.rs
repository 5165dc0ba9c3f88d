use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::info;

mod config;
mod error;
mod report;
mod runner;

use config::ExperimentConfig;
use error::Result;
use report::{emit_plotdata, Report, Status};
use runner::Selection;

/// Exit status for config and usage errors.
const EXIT_USAGE: u8 = 2;

#[derive(Parser)]
#[command(name = "holoeq", version, about = "Deformed Dolbeault spectral experiments")]
struct Cli {
    /// Output directory; overrides the config and HOLOEQ_OUTPUT_ROOT.
    #[arg(short, long, global = true)]
    output: Option<PathBuf>,

    /// Worker threads for independent cells (default: all cores).
    #[arg(short = 'j', long, global = true)]
    jobs: Option<usize>,

    /// More log output; repeat for debug.
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate a config without running it.
    Validate { config: PathBuf },
    /// Run every experiment in a config.
    Run { config: PathBuf },
    /// Run only the sweep experiments.
    Sweep { config: PathBuf },
    /// Run only the local-model experiments.
    Oscillator { config: PathBuf },
    /// Print the verdicts of a finished run and regenerate its plot data.
    Report { dir: PathBuf },
}

fn print_verdicts(report: &Report) {
    for v in &report.verdicts {
        println!("[{}] criterion {} {}: {}", v.status, v.criterion, v.experiment, v.detail);
    }
    let summary: Vec<String> = report.summary.iter().map(|(k, s)| format!("{k}={s}")).collect();
    println!("summary: {} -> {}", summary.join(" "), report.worst);
}

fn run(config_path: &Path, output: Option<&Path>, selection: Selection) -> Result<Status> {
    let (config, bytes) = ExperimentConfig::load(config_path)?;
    let dir = config.output_dir(output);
    info!("running {} into {}", config.name, dir.display());
    let out = runner::execute(&config, &bytes, selection);
    runner::write_output(&config, &out, &dir)?;
    print_verdicts(&out.report);
    println!("report: {}", dir.join(report::REPORT_FILE).display());
    Ok(out.report.worst)
}

fn dispatch(cli: &Cli) -> Result<Status> {
    let out = cli.output.as_deref();
    match &cli.command {
        Command::Validate { config } => {
            let (c, bytes) = ExperimentConfig::load(config)?;
            println!(
                "{}: ok ({} sweeps, {} oscillator experiments, algebra {}), sha256 {}",
                c.name,
                c.sweeps.len(),
                c.oscillators.len(),
                if c.algebra.is_some() { "on" } else { "off" },
                runner::config_hash(&bytes)
            );
            Ok(Status::Pass)
        }
        Command::Run { config } => run(config, out, Selection::ALL),
        Command::Sweep { config } => run(config, out, Selection { algebra: false, sweeps: true, oscillators: false }),
        Command::Oscillator { config } => run(config, out, Selection { algebra: false, sweeps: false, oscillators: true }),
        Command::Report { dir } => {
            let r = Report::read(dir)?;
            print_verdicts(&r);
            for p in emit_plotdata(&r, out.unwrap_or(dir))? {
                println!("wrote {}", p.display());
            }
            Ok(r.worst)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    if let Some(j) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(j).build_global() {
            eprintln!("error: thread pool: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    }
    match dispatch(&cli) {
        Ok(status) => ExitCode::from(status.exit_code()),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}
