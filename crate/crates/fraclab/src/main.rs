//! `fraclab`: run experiment configs, the acceptance suite, convergence
//! tables, and path-ensemble exports.

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use fraclab_core::gaussian::{generate_paths, write_ensemble};
use fraclab_core::harness::{
    acceptance_suite, configure_threads, convergence_table, run_criterion, run_experiment,
    ExperimentConfig, Report,
};
use fraclab_core::TimeGrid;

#[derive(Parser)]
#[command(name = "fraclab", version, about = "Numerical lab for fractional Brownian motion")]
struct Cli {
    /// Directory for CSV and JSON outputs.
    #[arg(long, short, global = true, default_value = "fraclab-out")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one TOML experiment config, or `all` for the acceptance suite.
    Run { config: PathBuf },
    /// Run the default acceptance suite.
    Suite,
    /// Build a convergence table from the JSON reports in a directory.
    Table { dir: PathBuf },
    /// Generate a config's path ensemble and write it to the binary cache.
    Paths { config: PathBuf },
}

fn main() -> ExitCode {
    match real_main() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn real_main() -> Result<bool> {
    let cli = Cli::parse();
    let threads = configure_threads()?;
    eprintln!("fraclab: {threads} worker thread(s)");
    match cli.command {
        Command::Run { config } if config.as_os_str() == "all" => suite(&cli.out),
        Command::Run { config } => {
            let cfg = ExperimentConfig::load(&config)
                .with_context(|| format!("loading {}", config.display()))?;
            let report = run_experiment(&cfg)?;
            Ok(emit(&report, &cli.out)?)
        }
        Command::Suite => suite(&cli.out),
        Command::Table { dir } => table(&dir),
        Command::Paths { config } => {
            let cfg = ExperimentConfig::load(&config)
                .with_context(|| format!("loading {}", config.display()))?;
            cfg.validate()?;
            let grid = TimeGrid::new(cfg.horizon, cfg.n)?;
            let ens = generate_paths(&grid, cfg.hurst()?, cfg.paths, cfg.seed, cfg.method)?;
            std::fs::create_dir_all(&cli.out)?;
            let path = cli.out.join(format!("{}.paths", cfg.stem()));
            let mut w = BufWriter::new(File::create(&path)?);
            write_ensemble(&mut w, &ens)?;
            println!("{}", path.display());
            Ok(true)
        }
    }
}

fn emit(report: &Report, out: &Path) -> Result<bool> {
    let (csv, json) = report.write(out)?;
    println!(
        "{} {} ({:.1} s{})",
        if report.pass() { "PASS" } else { "FAIL" },
        report.config.stem(),
        report.wall_time_s,
        if report.non_standard { ", non-standard tolerance" } else { "" }
    );
    print!("{}", report.summary());
    println!("  -> {} | {}", csv.display(), json.display());
    Ok(report.pass())
}

fn suite(out: &Path) -> Result<bool> {
    let mut all = true;
    for criterion in acceptance_suite() {
        println!("== criterion {}: {}", criterion.number, criterion.title);
        let dir = out.join(format!("criterion-{:02}", criterion.number));
        for report in run_criterion(&criterion)? {
            all &= emit(&report, &dir)?;
        }
    }
    Ok(all)
}

fn table(dir: &Path) -> Result<bool> {
    let mut reports = Vec::new();
    for entry in std::fs::read_dir(dir).with_context(|| format!("reading {}", dir.display()))? {
        let path = entry?.path();
        if path.extension().is_some_and(|e| e == "json") {
            reports.push(Report::load(&path).with_context(|| format!("loading {}", path.display()))?);
        }
    }
    if reports.is_empty() {
        bail!("no JSON reports in {}", dir.display());
    }
    let t = convergence_table(&reports)?;
    print!("{}", String::from_utf8(t.to_csv()?)?);
    println!("# monotone: {}", t.monotone);
    Ok(true)
}
