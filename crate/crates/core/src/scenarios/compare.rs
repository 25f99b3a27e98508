//! Gauge comparison against user-supplied reference series.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::timestepping::GaugeRecord;

/// Columns of a CSV file with a header row; blank lines are skipped.
pub fn read_csv_columns(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_csv_columns(&text, path)
}

pub fn parse_csv_columns(text: &str, path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or_else(|| Error::Parse {
        path: path.into(),
        line: 1,
        msg: "empty file".into(),
    })?;
    let names: Vec<String> = header.split(',').map(|s| s.trim().to_string()).collect();
    let mut cols = vec![Vec::new(); names.len()];
    for (i, line) in lines {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != names.len() {
            return Err(Error::Parse {
                path: path.into(),
                line: i + 1,
                msg: format!("expected {} fields, found {}", names.len(), fields.len()),
            });
        }
        for (c, f) in cols.iter_mut().zip(fields) {
            c.push(f.trim().parse().map_err(|_| Error::Parse {
                path: path.into(),
                line: i + 1,
                msg: format!("not a number: {f:?}"),
            })?);
        }
    }
    Ok((names, cols))
}

pub fn read_gauge_csv(path: &Path, id: &str) -> Result<GaugeRecord> {
    let (names, cols) = read_csv_columns(path)?;
    if names.len() < 2 || names[0] != "t" {
        return Err(Error::Parse {
            path: path.into(),
            line: 1,
            msg: "expected header t,eta".into(),
        });
    }
    Ok(GaugeRecord {
        id: id.into(),
        location: [f64::NAN, f64::NAN],
        times: cols[0].clone(),
        values: cols[1].clone(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GaugeDiscrepancy {
    pub id: String,
    /// `(∫ (run − ref)² dt)^{1/2}` over the overlap, trapezoidal in the reference samples.
    pub l2: f64,
    pub linf: f64,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GaugeComparison {
    pub gauges: Vec<GaugeDiscrepancy>,
    /// Reference times inside the overlap, with interleaved run/reference columns.
    pub merged_header: Vec<String>,
    pub merged: Vec<Vec<f64>>,
}

impl GaugeComparison {
    pub fn merged_csv(&self) -> String {
        let mut s = self.merged_header.join(",");
        s.push('\n');
        for row in &self.merged {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:.10e}")).collect();
            let _ = writeln!(s, "{}", cells.join(","));
        }
        s
    }
}

/// Compare run gauges with reference columns `t,<id>,<id>,…`; every
/// reference column must match a run gauge id.
pub fn compare_records(runs: &[GaugeRecord], ref_names: &[String], ref_cols: &[Vec<f64>]) -> Result<GaugeComparison> {
    if ref_names.first().map(String::as_str) != Some("t") {
        return Err(Error::Other("reference CSV must start with a 't' column".into()));
    }
    let times = &ref_cols[0];
    let mut gauges = Vec::new();
    let mut merged_header = vec!["t".to_string()];
    let mut series = Vec::new();
    let mut common: Option<Vec<bool>> = None;
    for (name, values) in ref_names.iter().zip(ref_cols).skip(1) {
        let run = runs
            .iter()
            .find(|r| &r.id == name)
            .ok_or_else(|| Error::Other(format!("reference column {name:?} has no matching run gauge")))?;
        let pairs: Vec<Option<f64>> = times.iter().map(|&t| run.interpolate(t)).collect();
        let inside: Vec<bool> = pairs.iter().map(Option::is_some).collect();
        let n_inside = inside.iter().filter(|&&b| b).count();
        if n_inside == 0 {
            return Err(Error::Other(format!(
                "gauge {name:?}: reference times do not overlap the run ({:?} vs {:?})",
                (times.first(), times.last()),
                (run.times.first(), run.times.last())
            )));
        }
        let mut linf = 0.0f64;
        let mut l2sq = 0.0;
        let mut prev: Option<(f64, f64)> = None;
        for (k, p) in pairs.iter().enumerate() {
            if let Some(v) = p {
                let d = v - values[k];
                linf = linf.max(d.abs());
                if let Some((tp, dp)) = prev {
                    l2sq += 0.5 * (times[k] - tp) * (d * d + dp * dp);
                }
                prev = Some((times[k], d));
            } else {
                prev = None;
            }
        }
        gauges.push(GaugeDiscrepancy {
            id: name.clone(),
            l2: l2sq.sqrt(),
            linf,
            samples: n_inside,
        });
        merged_header.push(format!("run_{name}"));
        merged_header.push(format!("ref_{name}"));
        series.push((pairs, values));
        common = Some(match common {
            None => inside,
            Some(c) => c.iter().zip(&inside).map(|(a, b)| *a && *b).collect(),
        });
    }
    let common = common.unwrap_or_default();
    let merged = (0..times.len())
        .filter(|&k| common[k])
        .map(|k| {
            let mut row = vec![times[k]];
            for (pairs, values) in &series {
                row.push(pairs[k].unwrap_or(f64::NAN));
                row.push(values[k]);
            }
            row
        })
        .collect();
    Ok(GaugeComparison {
        gauges,
        merged_header,
        merged,
    })
}

/// Compare the `gauge_<id>.csv` files in `run_dir` with a reference CSV.
/// Writes `comparison.csv` into the run directory.
pub fn compare_gauges(run_dir: &Path, reference: &Path) -> Result<GaugeComparison> {
    let (names, cols) = read_csv_columns(reference)?;
    let mut runs = Vec::new();
    for id in names.iter().skip(1) {
        runs.push(read_gauge_csv(&run_dir.join(format!("gauge_{id}.csv")), id)?);
    }
    let cmp = compare_records(&runs, &names, &cols)?;
    let out = run_dir.join("comparison.csv");
    std::fs::write(&out, cmp.merged_csv()).map_err(|e| Error::io(&out, e))?;
    Ok(cmp)
}
