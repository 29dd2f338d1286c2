//! Experiment report rows, their CSV form, and aggregate summaries.
//!
//! Floats are written in shortest round-trip form and missing values as
//! empty fields, so reports parse back to exactly the in-memory values and
//! reruns with the same seed produce byte-identical files.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, Read, Write};

pub const CSV_HEADER: &str =
    "method,n,replication,pollution_dims,censor_rate,true_risk,p_coeff,full_info_value";

/// One experiment measurement.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub method: String,
    pub n: usize,
    pub replication: usize,
    pub pollution_dims: usize,
    pub censor_rate: Option<f64>,
    pub true_risk: Option<f64>,
    pub p_coeff: Option<f64>,
    pub full_info_value: Option<f64>,
}

/// Aggregate mean and standard error over replications.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Aggregate {
    pub method: String,
    pub n: usize,
    pub pollution_dims: usize,
    pub mean_true_risk: Option<f64>,
    pub se_true_risk: Option<f64>,
    pub mean_p: Option<f64>,
    pub se_p: Option<f64>,
    pub mean_full_info: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Report {
    pub command: String,
    pub instance: String,
    pub rows: Vec<Row>,
    pub aggregates: Vec<Aggregate>,
}

fn fmt_opt(v: Option<f64>) -> String {
    match v {
        Some(x) => format!("{x}"),
        None => String::new(),
    }
}

fn parse_opt(s: &str) -> Result<Option<f64>, String> {
    if s.is_empty() {
        Ok(None)
    } else {
        s.parse::<f64>().map(Some).map_err(|e| format!("bad float {s:?}: {e}"))
    }
}

impl Report {
    pub fn new(command: &str, instance: &str, rows: Vec<Row>) -> Self {
        let aggregates = aggregate(&rows);
        Report { command: command.into(), instance: instance.into(), rows, aggregates }
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{CSV_HEADER}")?;
        for r in &self.rows {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{}",
                r.method,
                r.n,
                r.replication,
                r.pollution_dims,
                fmt_opt(r.censor_rate),
                fmt_opt(r.true_risk),
                fmt_opt(r.p_coeff),
                fmt_opt(r.full_info_value),
            )?;
        }
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Vec<Row>, String> {
        let mut lines = BufReader::new(r).lines();
        let header = lines.next().ok_or("empty csv")?.map_err(|e| e.to_string())?;
        if header.trim_end() != CSV_HEADER {
            return Err(format!("unexpected header {header:?}"));
        }
        let mut rows = Vec::new();
        for line in lines {
            let line = line.map_err(|e| e.to_string())?;
            let line = line.trim_end();
            if line.is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 8 {
                return Err(format!("row has {} fields", f.len()));
            }
            rows.push(Row {
                method: f[0].to_string(),
                n: f[1].parse().map_err(|e| format!("{e}"))?,
                replication: f[2].parse().map_err(|e| format!("{e}"))?,
                pollution_dims: f[3].parse().map_err(|e| format!("{e}"))?,
                censor_rate: parse_opt(f[4])?,
                true_risk: parse_opt(f[5])?,
                p_coeff: parse_opt(f[6])?,
                full_info_value: parse_opt(f[7])?,
            });
        }
        Ok(rows)
    }
}

/// Group rows by (method, n, pollution) and reduce over replications in row
/// order.
fn aggregate(rows: &[Row]) -> Vec<Aggregate> {
    let mut groups: BTreeMap<(String, usize, usize), Vec<&Row>> = BTreeMap::new();
    for r in rows {
        groups.entry((r.method.clone(), r.n, r.pollution_dims)).or_default().push(r);
    }
    let stat = |vals: &[f64]| -> (Option<f64>, Option<f64>) {
        if vals.is_empty() {
            return (None, None);
        }
        let n = vals.len() as f64;
        let mean = vals.iter().sum::<f64>() / n;
        if vals.len() < 2 {
            return (Some(mean), None);
        }
        let var = vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
        (Some(mean), Some((var / n).sqrt()))
    };
    groups
        .into_iter()
        .map(|((method, n, pollution_dims), rs)| {
            let risks: Vec<f64> = rs.iter().filter_map(|r| r.true_risk).collect();
            let ps: Vec<f64> = rs.iter().filter_map(|r| r.p_coeff).collect();
            let fis: Vec<f64> = rs.iter().filter_map(|r| r.full_info_value).collect();
            let (mean_true_risk, se_true_risk) = stat(&risks);
            let (mean_p, se_p) = stat(&ps);
            let (mean_full_info, _) = stat(&fis);
            Aggregate {
                method,
                n,
                pollution_dims,
                mean_true_risk,
                se_true_risk,
                mean_p,
                se_p,
                mean_full_info,
            }
        })
        .collect()
}
