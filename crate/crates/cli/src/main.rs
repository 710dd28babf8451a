//! `mixread`: batch runner for mixcoupling experiments.

mod config;
mod error;
mod experiments;
mod table;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use log::warn;
use rayon::prelude::*;

use crate::error::CliError;
use crate::experiments::CATALOG;
use crate::table::{Format, ResultTable, Row};

#[derive(Debug, Parser)]
#[command(name = "mixread", version, about = "Run mixed-coupling readout experiments from TOML configs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the experiment described by a config file.
    Run {
        config: PathBuf,
        /// Output file; overrides `output.path`. Defaults to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Overrides `output.format`.
        #[arg(long, value_enum)]
        format: Option<Format>,
        /// Worker threads; 0 uses every core.
        #[arg(long, env = "MIXREAD_JOBS", default_value_t = 0)]
        jobs: usize,
        /// Write the table even when grid points fail, recording the failures.
        #[arg(long)]
        keep_going: bool,
        /// Accepted for forward compatibility; every computation is deterministic.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// List the available experiments.
    List,
}

fn run(
    path: &PathBuf,
    out: Option<PathBuf>,
    format: Option<Format>,
    jobs: usize,
    keep_going: bool,
) -> Result<(), CliError> {
    let src = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let cfg = config::parse(&src).map_err(|e| match e {
        CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
        other => other,
    })?;
    let format = format.or(cfg.format).unwrap_or_default();
    let out = out.or_else(|| cfg.output_path.clone());

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::Config(format!("cannot start {jobs} workers: {e}")))?;
    let points = cfg.points();
    let started = Instant::now();
    let results: Vec<_> = pool.install(|| points.par_iter().map(|p| (cfg.experiment.eval)(p)).collect());
    let wall = started.elapsed().as_secs_f64();

    let mut rows = Vec::new();
    let mut failures = 0;
    for (index, (point, result)) in points.iter().zip(results).enumerate() {
        let axes: Vec<f64> = cfg.axes.iter().map(|a| point.num(a.spec.name)).collect();
        match result {
            Ok(cells) => rows.extend(cells.into_iter().map(|cells| Row {
                axes: axes.clone(),
                cells,
                error: None,
            })),
            Err(e) => {
                if !keep_going {
                    return Err(CliError::Numerical(format!("grid point {index}: {e}")));
                }
                warn!("grid point {index} failed: {e}");
                failures += 1;
                rows.push(Row {
                    axes,
                    cells: Vec::new(),
                    error: Some(e.to_string()),
                });
            }
        }
    }
    if failures > 0 {
        warn!("{failures} of {} grid points failed", points.len());
    }

    let table = ResultTable::new(&cfg, rows, wall);
    match out {
        Some(p) => {
            let f = File::create(&p).map_err(|e| CliError::Config(format!("cannot create {}: {e}", p.display())))?;
            let mut w = BufWriter::new(f);
            table.write(&mut w, format)?;
            w.flush()?;
        }
        None => {
            let stdout = io::stdout();
            table.write(stdout.lock(), format)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let result = match cli.command {
        Command::List => {
            for e in &CATALOG {
                println!("{}", e.catalog_line());
            }
            Ok(())
        }
        Command::Run {
            config,
            out,
            format,
            jobs,
            keep_going,
            seed: _,
        } => run(&config, out, format, jobs, keep_going),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("mixread: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
