//! Paired covariate/outcome datasets and their CSV form.
//!
//! CSV layout: header `x1..x{dx},y1..y{dy}` (censored: `x1..x{dx},u,delta`),
//! comma separated, `.` decimal, one row per observation. Floats are written
//! in shortest round-trip form, so write-then-parse reproduces the in-memory
//! values exactly.

use crate::error::Error;
use crate::linalg::Mat;
use crate::Result;
use std::io::{BufRead, BufReader, Read, Write};

/// Paired observations `(x^i, y^i)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub x: Mat,
    pub y: Mat,
    pub seed: u64,
    /// Instance descriptor, e.g. `portfolio` or `shipment`.
    pub meta: String,
}

impl Dataset {
    pub fn new(x: Mat, y: Mat, seed: u64, meta: impl Into<String>) -> Result<Self> {
        if x.rows() != y.rows() {
            return Err(Error::DimensionMismatch(format!(
                "X has {} rows, Y has {}",
                x.rows(),
                y.rows()
            )));
        }
        if !x.is_finite() || !y.is_finite() {
            return Err(Error::InvalidArgument("dataset contains non-finite entries".into()));
        }
        Ok(Dataset { x, y, seed, meta: meta.into() })
    }

    pub fn len(&self) -> usize {
        self.x.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let mut header = Vec::new();
        for j in 0..self.x.cols() {
            header.push(format!("x{}", j + 1));
        }
        for j in 0..self.y.cols() {
            header.push(format!("y{}", j + 1));
        }
        writeln!(w, "{}", header.join(","))?;
        for i in 0..self.len() {
            let mut fields: Vec<String> = self.x.row(i).iter().map(|v| format!("{v}")).collect();
            fields.extend(self.y.row(i).iter().map(|v| format!("{v}")));
            writeln!(w, "{}", fields.join(","))?;
        }
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R, seed: u64, meta: impl Into<String>) -> Result<Self> {
        let (header, rows) = parse_numeric_csv(r)?;
        let dx = header.iter().filter(|h| h.starts_with('x')).count();
        let dy = header.len() - dx;
        if dy == 0 || !header[dx..].iter().all(|h| h.starts_with('y')) {
            return Err(Error::Parse("expected x1..xdx,y1..ydy header".into()));
        }
        let n = rows.len();
        let mut x = Mat::zeros(n, dx);
        let mut y = Mat::zeros(n, dy);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != dx + dy {
                return Err(Error::Parse(format!("row {} has {} fields", i + 2, row.len())));
            }
            x.row_mut(i).copy_from_slice(&row[..dx]);
            y.row_mut(i).copy_from_slice(&row[dx..]);
        }
        Dataset::new(x, y, seed, meta)
    }
}

/// Censored observations `(x^i, u^i, delta^i)` with `u = min(y, v)`.
#[derive(Clone, Debug, PartialEq)]
pub struct CensoredDataset {
    pub x: Mat,
    pub u: Vec<f64>,
    /// `true` iff the outcome was observed uncensored (`y <= v`).
    pub delta: Vec<bool>,
    /// Underlying outcomes, retained for oracle scoring only.
    pub true_y: Option<Vec<f64>>,
}

impl CensoredDataset {
    pub fn len(&self) -> usize {
        self.x.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Fraction of censored observations.
    pub fn censoring_rate(&self) -> f64 {
        if self.delta.is_empty() {
            return 0.0;
        }
        self.delta.iter().filter(|d| !**d).count() as f64 / self.delta.len() as f64
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let mut header = Vec::new();
        for j in 0..self.x.cols() {
            header.push(format!("x{}", j + 1));
        }
        header.push("u".into());
        header.push("delta".into());
        writeln!(w, "{}", header.join(","))?;
        for i in 0..self.len() {
            let mut fields: Vec<String> = self.x.row(i).iter().map(|v| format!("{v}")).collect();
            fields.push(format!("{}", self.u[i]));
            fields.push(if self.delta[i] { "1".into() } else { "0".into() });
            writeln!(w, "{}", fields.join(","))?;
        }
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let (header, rows) = parse_numeric_csv(r)?;
        if header.len() < 3 || header[header.len() - 2] != "u" || header[header.len() - 1] != "delta" {
            return Err(Error::Parse("expected x1..,u,delta header".into()));
        }
        let dx = header.len() - 2;
        let n = rows.len();
        let mut x = Mat::zeros(n, dx);
        let mut u = Vec::with_capacity(n);
        let mut delta = Vec::with_capacity(n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != dx + 2 {
                return Err(Error::Parse(format!("row {} has {} fields", i + 2, row.len())));
            }
            x.row_mut(i).copy_from_slice(&row[..dx]);
            u.push(row[dx]);
            delta.push(row[dx + 1] != 0.0);
        }
        Ok(CensoredDataset { x, u, delta, true_y: None })
    }
}

fn parse_numeric_csv<R: Read>(r: R) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut lines = BufReader::new(r).lines();
    let header = match lines.next() {
        Some(h) => h?,
        None => return Err(Error::Parse("empty csv".into())),
    };
    let header: Vec<String> = header.trim_end().split(',').map(|s| s.to_string()).collect();
    let mut rows = Vec::new();
    for line in lines {
        let line = line?;
        let line = line.trim_end();
        if line.is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .map(|f| f.parse::<f64>().map_err(|e| Error::Parse(format!("bad field {f:?}: {e}"))))
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok((header, rows))
}
