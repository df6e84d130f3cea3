//! Error metrics, probe selection and the metrics CSV.

use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const METRICS_SCHEMA: u32 = 1;

fn check_lengths(truth: &[f64], estimate: &[f64]) -> Result<()> {
    if truth.len() != estimate.len() || truth.is_empty() {
        return Err(Error::param(format!(
            "truth and estimate must be equally long and non-empty ({} vs {})",
            truth.len(),
            estimate.len()
        )));
    }
    Ok(())
}

/// `max_x |estimate_x - truth_x|` over the probed coordinates.
pub fn linf_error(truth: &[f64], estimate: &[f64]) -> Result<f64> {
    check_lengths(truth, estimate)?;
    Ok(truth.iter().zip(estimate).map(|(t, e)| (e - t).abs()).fold(0.0, f64::max))
}

/// Mean squared error over the probed coordinates.
pub fn mse(truth: &[f64], estimate: &[f64]) -> Result<f64> {
    check_lengths(truth, estimate)?;
    let total: f64 = truth.iter().zip(estimate).map(|(t, e)| (e - t) * (e - t)).sum();
    Ok(total / truth.len() as f64)
}

/// Which coordinates get estimated and scored.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProbePolicy {
    All,
    /// The `m` coordinates with the largest `|truth|`, lower index first on ties.
    Top(usize),
}

impl Default for ProbePolicy {
    fn default() -> Self {
        ProbePolicy::Top(100)
    }
}

impl ProbePolicy {
    /// Probe coordinates in ascending order.
    pub fn select(&self, truth: &[f64]) -> Vec<usize> {
        let m = match *self {
            ProbePolicy::All => return (0..truth.len()).collect(),
            ProbePolicy::Top(m) => m,
        };
        let mut order: Vec<usize> = (0..truth.len()).collect();
        order.sort_by(|&a, &b| truth[b].abs().total_cmp(&truth[a].abs()).then(a.cmp(&b)));
        order.truncate(m);
        order.sort_unstable();
        order
    }
}

impl FromStr for ProbePolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "all" {
            return Ok(ProbePolicy::All);
        }
        let m = s
            .strip_prefix("top:")
            .and_then(|m| m.parse::<usize>().ok())
            .filter(|&m| m > 0)
            .ok_or_else(|| Error::Config(format!("probe policy {s:?} is neither \"all\" nor \"top:<m>\"")))?;
        Ok(ProbePolicy::Top(m))
    }
}

/// One averaged cell of an experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub schema: u32,
    pub mechanism: String,
    /// `event`, `user` or `L=<value>`.
    pub regime: String,
    pub k: usize,
    pub d: usize,
    pub n: usize,
    pub epsilon: f64,
    pub delta: f64,
    pub beta: f64,
    pub bins: Option<usize>,
    pub linf: f64,
    pub mse: f64,
    /// Paper accounting: one seed plus payload.
    pub bytes_per_client: f64,
    pub wire_bytes_per_client: f64,
    pub wall_ms: f64,
    pub runs: usize,
    pub master_seed: u64,
    pub status: String,
    pub note: String,
}

impl MetricsRow {
    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }
}

fn header_line() -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "schema",
        "mechanism",
        "regime",
        "k",
        "d",
        "n",
        "epsilon",
        "delta",
        "beta",
        "bins",
        "linf",
        "mse",
        "bytes_per_client",
        "wire_bytes_per_client",
        "wall_ms",
        "runs",
        "master_seed",
        "status",
        "note",
    ])
    .map_err(|e| Error::Config(e.to_string()))?;
    let bytes = w.into_inner().map_err(|e| Error::Config(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("ascii header"))
}

/// Rows as CSV text, header included.
pub fn to_csv_string(rows: &[MetricsRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row).map_err(|e| Error::Config(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Config(e.to_string()))?;
    let body = String::from_utf8(bytes).expect("csv output is utf-8");
    if rows.is_empty() {
        header_line()
    } else {
        Ok(body)
    }
}

/// Appends rows to `path`, writing the header only into a new or empty
/// file. An existing header must match the current schema.
pub fn append_metrics(path: &Path, rows: &[MetricsRow]) -> Result<()> {
    let header = header_line()?;
    let fresh = match File::open(path) {
        Ok(f) => {
            let mut first = String::new();
            BufReader::new(f).read_line(&mut first)?;
            if !first.is_empty() && first != header {
                return Err(Error::Config(format!(
                    "{} has a different metrics header; refusing to append",
                    path.display()
                )));
            }
            first.is_empty()
        }
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => true,
        Err(e) => return Err(e.into()),
    };
    let text = to_csv_string(rows)?;
    let mut f = OpenOptions::new().create(true).append(true).open(path)?;
    if fresh {
        f.write_all(text.as_bytes())?;
    } else {
        f.write_all(text[header.len()..].as_bytes())?;
    }
    Ok(())
}

pub fn read_metrics(path: &Path) -> Result<Vec<MetricsRow>> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| Error::Config(e.to_string()))?;
    reader
        .deserialize()
        .map(|r| {
            r.map_err(|e| Error::Csv {
                path: path.to_path_buf(),
                line: e.position().map_or(0, |p| p.line()),
                message: e.to_string(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(linf: f64) -> MetricsRow {
        MetricsRow {
            schema: METRICS_SCHEMA,
            mechanism: "ours".into(),
            regime: "event".into(),
            k: 64,
            d: 1000,
            n: 10_000,
            epsilon: 1.0,
            delta: 0.0,
            beta: 0.05,
            bins: Some(16),
            linf,
            mse: linf * linf / 3.0,
            bytes_per_client: 69.0,
            wire_bytes_per_client: 77.0,
            wall_ms: 0.0,
            runs: 10,
            master_seed: 42,
            status: "ok".into(),
            note: "bounded-l, a \"quoted\" note".into(),
        }
    }

    #[test]
    fn metric_examples() {
        let truth = vec![0.5; 100];
        assert_eq!(linf_error(&truth, &truth).unwrap(), 0.0);
        assert_eq!(mse(&truth, &truth).unwrap(), 0.0);
        let mut est = truth.clone();
        est[37] += 0.2;
        assert!((linf_error(&truth, &est).unwrap() - 0.2).abs() < 1e-12);
        assert!((mse(&truth, &est).unwrap() - 0.0004).abs() < 1e-12);
        assert!(linf_error(&truth, &est[..3]).is_err());
    }

    #[test]
    fn top_probes_break_ties_by_index() {
        let truth = [0.1, -0.5, 0.5, 0.0, 0.3];
        assert_eq!(ProbePolicy::Top(2).select(&truth), vec![1, 2]);
        assert_eq!(ProbePolicy::Top(3).select(&truth), vec![1, 2, 4]);
        assert_eq!(ProbePolicy::Top(10).select(&truth).len(), 5);
        assert_eq!(ProbePolicy::All.select(&truth), vec![0, 1, 2, 3, 4]);
        assert_eq!("top:7".parse::<ProbePolicy>().unwrap(), ProbePolicy::Top(7));
        assert!("top:0".parse::<ProbePolicy>().is_err());
        assert!("most".parse::<ProbePolicy>().is_err());
    }

    #[test]
    fn csv_append_and_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.csv");
        append_metrics(&path, &[row(0.1)]).unwrap();
        let mut failed = row(0.0);
        failed.bins = None;
        failed.status = "failed".into();
        append_metrics(&path, &[row(0.25), failed.clone()]).unwrap();
        assert_eq!(read_metrics(&path).unwrap(), vec![row(0.1), row(0.25), failed]);
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().filter(|l| l.starts_with("schema,")).count(), 1);

        std::fs::write(&path, "other,header\n").unwrap();
        assert!(append_metrics(&path, &[row(0.1)]).is_err());
    }
}
