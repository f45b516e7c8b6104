//! Count-series ingestion, CSV side tables and atomic file output.

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use gas_inar_core::diagnostics::AlphaBands;
use gas_inar_core::forecasting::ForecastDistribution;
use gas_inar_core::models::ModelPath;
use gas_inar_core::simulation::SimulatedSeries;
use gas_inar_core::CountSeries;
use serde::Serialize;

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    File { path: PathBuf, source: std::io::Error },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("input contains no counts")]
    Empty,
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

fn file_error(path: &Path) -> impl FnOnce(std::io::Error) -> IoError + '_ {
    move |source| IoError::File { path: path.to_path_buf(), source }
}

pub fn read_counts_csv(path: &Path) -> Result<CountSeries, IoError> {
    let mut text = String::new();
    fs::File::open(path).and_then(|mut f| f.read_to_string(&mut text)).map_err(file_error(path))?;
    parse_counts(&text)
}

/// Column names recognised as the count column in a header row.
const COUNT_COLUMNS: [&str; 4] = ["y", "count", "counts", "value"];

/// One count per row. A first row whose last cell is not numeric is a
/// header; the count column is then the one named `y`, `count`, `counts` or
/// `value`, else the last. Without a header the last column is used, so a
/// leading date column is ignored.
pub fn parse_counts(text: &str) -> Result<CountSeries, IoError> {
    let mut values = Vec::new();
    let mut column: Option<usize> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let row = raw.trim();
        if row.is_empty() {
            continue;
        }
        let cells: Vec<&str> = row.split(',').map(|c| c.trim().trim_matches('"')).collect();
        if line == 1 && cells.last().is_some_and(|c| c.parse::<f64>().is_err()) {
            column = cells.iter().position(|c| COUNT_COLUMNS.contains(&c.to_ascii_lowercase().as_str()));
            continue;
        }
        let cell = match column {
            Some(k) => cells.get(k).copied().ok_or_else(|| IoError::Parse {
                line,
                message: format!("row has {} cells, count column is {}", cells.len(), k + 1),
            })?,
            None => cells.last().copied().unwrap_or(""),
        };
        match cell.parse::<u64>() {
            Ok(v) => values.push(v),
            Err(_) => {
                let message = match cell.parse::<f64>() {
                    Ok(x) if x < 0.0 => format!("negative count {cell:?}"),
                    Ok(_) => format!("count {cell:?} is not an integer"),
                    Err(_) => format!("count {cell:?} is not numeric"),
                };
                return Err(IoError::Parse { line, message });
            }
        }
    }
    if values.is_empty() {
        return Err(IoError::Empty);
    }
    Ok(CountSeries::new(values))
}

fn csv_bytes<R: Serialize>(rows: impl IntoIterator<Item = R>) -> Result<Vec<u8>, IoError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row)?;
    }
    w.into_inner().map_err(|e| IoError::Csv(e.into_error().into()))
}

#[derive(Serialize)]
struct PathRow {
    t: usize,
    y: u64,
    alpha_hat: f64,
    logit_alpha_hat: f64,
    loglik: f64,
}

/// `t, y, alpha_hat, logit_alpha_hat, loglik` for `t = 1..=T`.
pub fn filter_path_csv(series: &CountSeries, path: &ModelPath) -> Result<Vec<u8>, IoError> {
    csv_bytes(path.lambda.iter().zip(&path.loglik_contrib).enumerate().map(|(i, (&l, &ll))| PathRow {
        t: i + 1,
        y: series[i + 1],
        alpha_hat: gas_inar_core::math::logistic(l),
        logit_alpha_hat: l,
        loglik: ll,
    }))
}

/// `t, alpha_hat, lo<level>, hi<level>, ...` with levels as percentages.
pub fn bands_csv(bands: &AlphaBands) -> Result<Vec<u8>, IoError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["t".to_string(), "alpha_hat".to_string()];
    for b in &bands.bands {
        let pct = (b.level * 100.0).round();
        header.push(format!("lo{pct}"));
        header.push(format!("hi{pct}"));
    }
    w.write_record(&header)?;
    for (t, a) in bands.alpha_hat.iter().enumerate() {
        let mut rec = vec![(t + 1).to_string(), a.to_string()];
        for b in &bands.bands {
            rec.push(b.lower[t].to_string());
            rec.push(b.upper[t].to_string());
        }
        w.write_record(&rec)?;
    }
    w.into_inner().map_err(|e| IoError::Csv(e.into_error().into()))
}

#[derive(Serialize)]
struct PmfRow {
    horizon: usize,
    x: usize,
    probability: f64,
}

/// Long format `horizon, x, probability`, zero cells omitted.
pub fn forecast_pmf_csv(forecasts: &[ForecastDistribution]) -> Result<Vec<u8>, IoError> {
    csv_bytes(forecasts.iter().flat_map(|f| {
        f.pmf.iter().enumerate().filter(|(_, p)| **p > 0.0).map(move |(x, &probability)| PmfRow {
            horizon: f.horizon,
            x,
            probability,
        })
    }))
}

#[derive(Serialize)]
struct SimRow {
    t: usize,
    y: u64,
    true_alpha: f64,
}

/// `t, y, true_alpha` with `t` starting at 0.
pub fn simulated_csv(sim: &SimulatedSeries) -> Result<Vec<u8>, IoError> {
    csv_bytes(sim.series.iter().zip(&sim.true_alpha).enumerate().map(|(t, (&y, &a))| SimRow { t, y, true_alpha: a }))
}

pub fn json_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>, IoError> {
    let mut out = serde_json::to_vec_pretty(value)?;
    out.push(b'\n');
    Ok(out)
}

/// Writes through a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), IoError> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(file_error(path))?;
    tmp.write_all(bytes).map_err(file_error(path))?;
    tmp.as_file().sync_all().map_err(file_error(path))?;
    tmp.persist(path).map_err(|e| IoError::File { path: path.to_path_buf(), source: e.error })?;
    Ok(())
}

/// A set of named output files, written only once all of them are ready.
#[derive(Debug, Default)]
pub struct OutputSet {
    files: Vec<(String, Vec<u8>)>,
}

impl OutputSet {
    pub fn add(&mut self, name: impl Into<String>, bytes: Vec<u8>) {
        self.files.push((name.into(), bytes));
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.files.iter().map(|(n, _)| n.as_str())
    }

    pub fn get(&self, name: &str) -> Option<&[u8]> {
        self.files.iter().find(|(n, _)| n == name).map(|(_, b)| b.as_slice())
    }

    pub fn write_to(&self, dir: &Path) -> Result<Vec<PathBuf>, IoError> {
        fs::create_dir_all(dir).map_err(file_error(dir))?;
        let mut written = Vec::with_capacity(self.files.len());
        for (name, bytes) in &self.files {
            let p = dir.join(name);
            write_atomic(&p, bytes)?;
            written.push(p);
        }
        Ok(written)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plain_column() {
        assert_eq!(parse_counts("3\n5\n2\n").unwrap().values(), &[3, 5, 2]);
    }

    #[test]
    fn header_and_date_column() {
        let s = parse_counts("date,count\n1995-01,12\n1995-02,9\n").unwrap();
        assert_eq!(s.values(), &[12, 9]);
    }

    #[test]
    fn named_count_column() {
        let s = parse_counts("t,y,true_alpha\n0,4,0.3\n1,6,0.31\n").unwrap();
        assert_eq!(s.values(), &[4, 6]);
        assert!(parse_counts("t,y,a\n0\n").is_err());
    }

    #[test]
    fn bad_cells_name_their_line() {
        let e = parse_counts("3\n2.5\n").unwrap_err();
        assert!(matches!(e, IoError::Parse { line: 2, .. }), "{e}");
        let e = parse_counts("count\n4\n-1\n").unwrap_err();
        assert!(matches!(e, IoError::Parse { line: 3, .. }), "{e}");
        assert!(e.to_string().contains("negative"));
        let e = parse_counts("4\nabc\n").unwrap_err();
        assert!(matches!(e, IoError::Parse { line: 2, .. }));
        assert!(matches!(parse_counts(""), Err(IoError::Empty)));
        assert!(matches!(parse_counts("count\n"), Err(IoError::Empty)));
    }

    #[test]
    fn atomic_write_replaces_contents() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.json");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(fs::read(&p).unwrap(), b"two");
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
