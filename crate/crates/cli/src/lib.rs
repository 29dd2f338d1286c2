//! Experiment harness over the prescription library: configuration,
//! subcommand drivers, and report emission.

pub mod commands;
pub mod config;
pub mod harness;
pub mod report;

use config::ExperimentConfig;
use prescriptor_core::{Error, Result};
use report::Report;
use std::fs;
use std::path::Path;
use std::time::Instant;

/// The CLI subcommands.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    GenData,
    Convergence,
    DimensionStudy,
    Prescriptiveness,
    CensoringStudy,
    ErmStudy,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::GenData => "gen-data",
            Command::Convergence => "convergence",
            Command::DimensionStudy => "dimension-study",
            Command::Prescriptiveness => "prescriptiveness",
            Command::CensoringStudy => "censoring-study",
            Command::ErmStudy => "erm-study",
        }
    }
}

/// Runs a subcommand and writes `{command}_rows.csv`,
/// `{command}_summary.json`, and optionally a plot script into `out`.
/// Timing lives in the JSON summary only, keeping the CSV byte-stable
/// across reruns.
pub fn run_command(
    command: Command,
    cfg: &ExperimentConfig,
    out: &Path,
    emit_plot_script: bool,
) -> Result<Report> {
    fs::create_dir_all(out)?;
    let start = Instant::now();
    let report = match command {
        Command::GenData => commands::cmd_gen_data(cfg, out)?,
        Command::Convergence => commands::cmd_convergence(cfg)?,
        Command::DimensionStudy => commands::cmd_dimension_study(cfg)?,
        Command::Prescriptiveness => commands::cmd_prescriptiveness(cfg)?,
        Command::CensoringStudy => commands::cmd_censoring_study(cfg)?,
        Command::ErmStudy => commands::cmd_erm_study(cfg)?,
    };
    let wall_ms = start.elapsed().as_millis();

    let csv_path = out.join(format!("{}_rows.csv", command.name()));
    let mut csv = fs::File::create(&csv_path)?;
    report.write_csv(&mut csv)?;

    let summary = serde_json::json!({
        "command": command.name(),
        "instance": report.instance,
        "config": cfg,
        "aggregates": report.aggregates,
        "wall_time_ms": wall_ms,
    });
    fs::write(
        out.join(format!("{}_summary.json", command.name())),
        serde_json::to_string_pretty(&summary).map_err(|e| Error::Parse(e.to_string()))?,
    )?;

    if emit_plot_script {
        fs::write(out.join("plot_report.py"), PLOT_SCRIPT)?;
    }
    Ok(report)
}

/// Generic plotting helper operating on the emitted CSV; kept dependency-free
/// on the Rust side.
const PLOT_SCRIPT: &str = r#"#!/usr/bin/env python3
"""Plot an experiment CSV: one line per method over N (log-log)."""
import csv
import sys
from collections import defaultdict

import matplotlib.pyplot as plt


def main(path, value="true_risk"):
    series = defaultdict(lambda: defaultdict(list))
    with open(path) as fh:
        for row in csv.DictReader(fh):
            if row[value]:
                series[row["method"]][int(row["n"])].append(float(row[value]))
    for method, by_n in sorted(series.items()):
        ns = sorted(by_n)
        means = [sum(by_n[n]) / len(by_n[n]) for n in ns]
        plt.plot(ns, means, marker="o", label=method)
    plt.xscale("log")
    if value == "true_risk":
        plt.yscale("symlog")
    plt.xlabel("N")
    plt.ylabel(value)
    plt.legend()
    plt.tight_layout()
    out = path.rsplit(".", 1)[0] + f"_{value}.png"
    plt.savefig(out, dpi=150)
    print(out)


if __name__ == "__main__":
    main(sys.argv[1], *(sys.argv[2:] or []))
"#;
