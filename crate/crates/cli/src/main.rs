//! Benchmark harness for priced-comparison sorting.
//!
//! Subcommands: `gen` writes one instance as JSON, `run` executes a seeded
//! experiment spec into a CSV run table, `report` aggregates run tables into
//! a summary with ratio columns and log-log slopes.

use clap::{Parser, Subcommand};
use priced_sort::bench::{
    build_instance, report, rows_from_csv, rows_to_csv, run_experiment_with_stats,
    summary_to_csv, ExperimentSpec,
};
use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "psort", about = "priced-comparison sorting benchmark harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate one instance and write it as JSON.
    Gen {
        /// Generator: interleaved | two_block | balloon | random_bipartite | gk | four_level
        #[arg(long)]
        kind: String,
        /// Size parameter (per-color count for interleaved/balloon/two_block,
        /// total elements otherwise).
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Extra generator parameters as key=value.
        #[arg(long = "param", value_parser = parse_kv)]
        params: Vec<(String, String)>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run an experiment spec (JSON) into a CSV run table.
    Run {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Also write one stats record per run as JSON lines.
        #[arg(long)]
        stats_out: Option<PathBuf>,
    },
    /// Aggregate one or more run tables into a summary CSV.
    Report {
        #[arg(long = "in", required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn parse_kv(s: &str) -> Result<(String, String), String> {
    s.split_once('=')
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .ok_or_else(|| format!("expected key=value, got {s:?}"))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, String> {
    match cli.command {
        Command::Gen {
            kind,
            n,
            seed,
            params,
            out,
        } => {
            let params: BTreeMap<String, String> = params.into_iter().collect();
            let instance = build_instance(&kind, n, &params, seed).map_err(|e| e.to_string())?;
            let text =
                serde_json::to_string_pretty(&instance).map_err(|e| e.to_string())?;
            std::fs::write(&out, text).map_err(|e| e.to_string())?;
            eprintln!("wrote {} ({} elements)", out.display(), instance.len());
            Ok(ExitCode::SUCCESS)
        }
        Command::Run {
            spec,
            out,
            stats_out,
        } => {
            let text = std::fs::read_to_string(&spec).map_err(|e| e.to_string())?;
            let spec: ExperimentSpec = serde_json::from_str(&text).map_err(|e| e.to_string())?;
            let (rows, stats) = run_experiment_with_stats(&spec).map_err(|e| e.to_string())?;
            std::fs::write(&out, rows_to_csv(&rows)).map_err(|e| e.to_string())?;
            if let Some(path) = stats_out {
                let mut lines = String::new();
                for record in stats.iter().flatten() {
                    lines.push_str(&serde_json::to_string(record).map_err(|e| e.to_string())?);
                    lines.push('\n');
                }
                std::fs::write(&path, lines).map_err(|e| e.to_string())?;
            }
            let failed = rows.iter().filter(|r| r.status != "ok").count();
            eprintln!(
                "wrote {} rows to {} ({} not ok)",
                rows.len(),
                out.display(),
                failed
            );
            if failed > 0 && !spec.allow_failures {
                return Ok(ExitCode::FAILURE);
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Report { inputs, out } => {
            let mut tables = Vec::new();
            for path in &inputs {
                let text = std::fs::read_to_string(path).map_err(|e| e.to_string())?;
                tables.push(rows_from_csv(&text).map_err(|e| e.to_string())?);
            }
            let outcome = report(&tables).map_err(|e| e.to_string())?;
            std::fs::write(&out, summary_to_csv(&outcome)).map_err(|e| e.to_string())?;
            eprintln!(
                "wrote {} summary rows to {}",
                outcome.summaries.len(),
                out.display()
            );
            Ok(ExitCode::SUCCESS)
        }
    }
}
