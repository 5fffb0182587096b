mod args;
mod job;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::error::ErrorKind;
use clap::{CommandFactory, Parser};
use gibbsflow_core::rng::with_threads;
use serde_json::json;

use crate::args::Cli;
use crate::job::{RunConfig, Table, SCHEMA_VERSION};

/// `report.json` -> `report.config.json`.
fn config_path(out: &Path) -> PathBuf {
    out.with_extension("config.json")
}

fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let cfg: RunConfig =
        serde_json::from_str(&text).with_context(|| format!("{}: not a gibbsflow run configuration", path.display()))?;
    if cfg.schema_version != SCHEMA_VERSION {
        bail!(
            "{}: schema_version {} is not supported (expected {SCHEMA_VERSION})",
            path.display(),
            cfg.schema_version
        );
    }
    Ok(cfg)
}

fn write_json(path: &Path, value: &serde_json::Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn write_csv(path: &Path, table: &Table) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))?;
    w.write_record(table.header)?;
    for row in &table.rows {
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}

/// Returns whether the run flagged a statistical failure.
fn run(cli: Cli) -> Result<bool> {
    let (cfg, source) = match (cli.config, cli.command) {
        (Some(path), None) => (load_config(&path)?, Some(path)),
        (None, Some(cmd)) => (
            RunConfig {
                schema_version: SCHEMA_VERSION,
                job: cmd.resolve()?,
            },
            None,
        ),
        (Some(_), Some(_)) => bail!("--config replaces the subcommand; give one or the other"),
        (None, None) => bail!("missing subcommand (see --help)"),
    };
    let name = cfg.job.name();
    let outcome = with_threads(cli.threads, || cfg.job.run()).with_context(|| match &source {
        Some(path) => format!("{name} run from {}", path.display()),
        None => format!("{name} run"),
    })?;

    let mut envelope = serde_json::to_value(&cfg)?;
    envelope["csv_columns"] = json!(outcome.table.header);
    envelope["flagged"] = json!(outcome.flagged);
    envelope["report"] = outcome.report;
    match &cli.out {
        Some(out) => {
            write_json(out, &envelope)?;
            write_json(&config_path(out), &serde_json::to_value(&cfg)?)?;
        }
        None => println!("{}", serde_json::to_string_pretty(&envelope)?),
    }
    if let Some(path) = &cli.csv {
        write_csv(path, &outcome.table)?;
    }
    if outcome.flagged {
        eprintln!("gibbsflow {name}: run flagged a statistical failure; see the report");
    }
    Ok(outcome.flagged)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    if cli.config.is_none() && cli.command.is_none() {
        let _ = Cli::command().print_help();
        return ExitCode::from(1);
    }
    match run(cli) {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
