//! Time-series ingestion, windowing into joint vectors, train/test split,
//! and result files.

use std::io::Write;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use rand::seq::index;

use crate::filters::LinearFilter;
use crate::harness::ExperimentResult;
use crate::model::{seeded_rng, Partition, SampleSet};
use crate::{Error, Mat, Result};

/// Column order of every results CSV.
pub const RESULTS_HEADER: [&str; 10] = [
    "filter",
    "m",
    "n",
    "l",
    "norm_rms",
    "analytic_mse",
    "rho_l",
    "cond_cy",
    "max_inverse_dim",
    "wall_ms",
];

#[derive(Debug, Clone, PartialEq)]
pub struct RawSeries {
    pub dates: Vec<NaiveDate>,
    pub values: Vec<f64>,
    pub source: PathBuf,
}

impl RawSeries {
    /// A series with consecutive placeholder dates, for generated data.
    pub fn from_values(values: Vec<f64>) -> Self {
        let start = NaiveDate::from_ymd_opt(2000, 1, 1).expect("valid date");
        let dates = (0..values.len())
            .map(|i| start + chrono::Days::new(i as u64))
            .collect();
        Self {
            dates,
            values,
            source: PathBuf::from("<generated>"),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

fn parse_date(s: &str) -> Option<NaiveDate> {
    let s = s.trim();
    NaiveDate::parse_from_str(s, "%Y-%m-%d")
        .or_else(|_| NaiveDate::parse_from_str(s, "%m/%d/%Y"))
        .ok()
}

/// Reads a header-bearing UTF-8 CSV. Rows may be unsorted; the result is in
/// date order. Line numbers in errors are 1-based file lines.
pub fn load_csv(path: &Path, date_column: &str, value_column: &str) -> Result<RawSeries> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path)?;
    let headers = reader.headers()?.clone();
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h.eq_ignore_ascii_case(name))
            .ok_or_else(|| Error::MissingColumn {
                path: path.to_path_buf(),
                column: name.to_string(),
            })
    };
    let (di, vi) = (find(date_column)?, find(value_column)?);
    let mut rows: Vec<(NaiveDate, f64, usize)> = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let parse_err = |msg: String| Error::Parse {
            path: path.to_path_buf(),
            line,
            msg,
        };
        let date_str = record.get(di).unwrap_or("");
        let value_str = record.get(vi).unwrap_or("");
        let date = parse_date(date_str).ok_or_else(|| parse_err(format!("unparseable date `{date_str}`")))?;
        let value: f64 = value_str
            .parse()
            .map_err(|_| parse_err(format!("unparseable value `{value_str}`")))?;
        if !value.is_finite() {
            return Err(parse_err(format!("non-finite value `{value_str}`")));
        }
        rows.push((date, value, line));
    }
    rows.sort_by_key(|r| r.0);
    if let Some(w) = rows.windows(2).find(|w| w[0].0 == w[1].0) {
        return Err(Error::DuplicateDate {
            path: path.to_path_buf(),
            date: w[1].0.to_string(),
            line: w[0].2.max(w[1].2),
        });
    }
    Ok(RawSeries {
        dates: rows.iter().map(|r| r.0).collect(),
        values: rows.iter().map(|r| r.1).collect(),
        source: path.to_path_buf(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MeanMode {
    /// One scalar, the average of every entry of the training windows.
    #[default]
    ScalarGlobal,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeriesConfig {
    /// Prior-window length.
    pub m: usize,
    /// Prediction length.
    pub n: usize,
    pub test_fraction: f64,
    pub seed: u64,
    pub mean_mode: MeanMode,
}

impl SeriesConfig {
    pub fn new(m: usize, n: usize, seed: u64) -> Self {
        Self {
            m,
            n,
            test_fraction: 0.2,
            seed,
            mean_mode: MeanMode::ScalarGlobal,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 || self.n == 0 {
            return Err(Error::Config("m and n must be at least 1".into()));
        }
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return Err(Error::Config(format!(
                "test fraction {} not in (0, 1)",
                self.test_fraction
            )));
        }
        Ok(())
    }
}

/// Number of windows produced for a series of length `len`.
pub fn window_count(len: usize, m: usize, n: usize) -> usize {
    len.saturating_sub(m + n)
}

/// Cuts the series into `K = len − (m+n)` overlapping windows starting at
/// every index `0..K`. Each joint vector holds the `n` later values on top
/// (X) and the `m` earlier values below (Y). The windows are split with
/// [`split`], and the scalar mean of the training windows is subtracted from
/// every entry.
pub fn window_samples(series: &RawSeries, cfg: &SeriesConfig) -> Result<SampleSet> {
    cfg.validate()?;
    let (m, n) = (cfg.m, cfg.n);
    if series.len() < m + n + 1 {
        return Err(Error::InsufficientData(format!(
            "series of length {} is too short for m = {m}, n = {n}",
            series.len()
        )));
    }
    let k = window_count(series.len(), m, n);
    let v = &series.values;
    let data = Mat::from_fn(n + m, k, |r, c| {
        if r < n {
            v[c + m + r]
        } else {
            v[c + (r - n)]
        }
    });
    let mut set = SampleSet::new(n, data, 0.0)?;
    split(&mut set, cfg)?;
    let train = &set.partition().train;
    let mean = match cfg.mean_mode {
        MeanMode::ScalarGlobal => {
            let total: f64 = train.iter().map(|&c| set.data().column(c).sum()).sum();
            total / (train.len() * (n + m)) as f64
        }
    };
    set.shift_mean(mean);
    Ok(set)
}

/// Reserves `round(test_fraction · K)` samples, drawn uniformly without
/// replacement from a generator seeded by `cfg.seed`, for testing.
pub fn split(set: &mut SampleSet, cfg: &SeriesConfig) -> Result<()> {
    cfg.validate()?;
    let k = set.len();
    if k < 5 {
        return Err(Error::InsufficientData(format!(
            "need at least 5 samples to split, got {k}"
        )));
    }
    let n_test = ((cfg.test_fraction * k as f64).round() as usize).clamp(1, k - 1);
    let mut rng = seeded_rng(cfg.seed);
    let mut test = index::sample(&mut rng, k, n_test).into_vec();
    test.sort_unstable();
    let mut is_test = vec![false; k];
    for &i in &test {
        is_test[i] = true;
    }
    let train = (0..k).filter(|&i| !is_test[i]).collect();
    set.set_partition(Partition { train, test })
}

/// `sqrt(Σ‖A y_i − x_i‖² / K) / sqrt(Σ‖x_i + z̄‖² / K)` over the columns of
/// `test` (joint vectors, X on top), with the scalar mean `z̄` restored in
/// the denominator.
pub fn normalized_rms(filter: &LinearFilter, test: &Mat, mean: f64) -> Result<f64> {
    let (n, m) = (filter.n(), filter.m());
    if test.nrows() != n + m {
        return Err(Error::Dimension(format!(
            "test vectors have length {}, filter needs {}",
            test.nrows(),
            n + m
        )));
    }
    if test.ncols() == 0 {
        return Err(Error::InsufficientData("empty test set".into()));
    }
    let x = test.rows(0, n);
    let y = test.rows(n, m);
    let err = (&filter.matrix * y - x).norm_squared();
    let denom = x.add_scalar(mean).norm_squared();
    if denom <= 0.0 {
        return Err(Error::DegenerateData(
            "target vectors have zero RMS".into(),
        ));
    }
    // the 1/K factors cancel
    Ok((err / denom).sqrt())
}

fn fmt_opt_f64(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Writes results with [`RESULTS_HEADER`]. Missing values are empty fields.
pub fn write_results_csv<W: Write>(rows: &[ExperimentResult], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(RESULTS_HEADER)?;
    for r in rows {
        out.write_record([
            r.filter.clone(),
            r.m.to_string(),
            r.n.to_string(),
            r.l.map(|l| l.to_string()).unwrap_or_default(),
            fmt_opt_f64(r.norm_rms),
            fmt_opt_f64(r.analytic_mse),
            fmt_opt_f64(r.rho_l),
            fmt_opt_f64(r.cond_cy),
            r.max_inverse_dim.map(|d| d.to_string()).unwrap_or_default(),
            fmt_opt_f64(r.wall_ms),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// The same rows as a JSON array of objects keyed like the CSV header, plus
/// an `error` key on rows whose construction failed.
pub fn write_results_json<W: Write>(rows: &[ExperimentResult], mut w: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut w, rows)?;
    writeln!(w)?;
    Ok(())
}

/// Writes CSV, or JSON when the path ends in `.json`.
pub fn write_results(rows: &[ExperimentResult], path: &Path) -> Result<()> {
    let f = std::io::BufWriter::new(std::fs::File::create(path)?);
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) {
        write_results_json(rows, f)
    } else {
        write_results_csv(rows, f)
    }
}

pub fn read_results_csv(path: &Path) -> Result<Vec<ExperimentResult>> {
    let mut reader = csv::Reader::from_path(path)?;
    let headers = reader.headers()?.clone();
    if headers.iter().ne(RESULTS_HEADER.iter().copied()) {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: 1,
            msg: "unexpected results header".into(),
        });
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let bad = |field: &str| Error::Parse {
            path: path.to_path_buf(),
            line,
            msg: format!("bad `{field}` field"),
        };
        let opt_f = |i: usize| -> Result<Option<f64>> {
            let s = &record[i];
            if s.is_empty() {
                Ok(None)
            } else {
                s.parse().map(Some).map_err(|_| bad(RESULTS_HEADER[i]))
            }
        };
        let opt_u = |i: usize| -> Result<Option<usize>> {
            let s = &record[i];
            if s.is_empty() {
                Ok(None)
            } else {
                s.parse().map(Some).map_err(|_| bad(RESULTS_HEADER[i]))
            }
        };
        rows.push(ExperimentResult {
            filter: record[0].to_string(),
            m: record[1].parse().map_err(|_| bad("m"))?,
            n: record[2].parse().map_err(|_| bad("n"))?,
            l: opt_u(3)?,
            norm_rms: opt_f(4)?,
            analytic_mse: opt_f(5)?,
            rho_l: opt_f(6)?,
            cond_cy: opt_f(7)?,
            max_inverse_dim: opt_u(8)?,
            wall_ms: opt_f(9)?,
            error: None,
        });
    }
    Ok(rows)
}
