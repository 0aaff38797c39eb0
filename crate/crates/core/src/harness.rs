//! Experiment sweeps: condition numbers over M, normalized RMS over L and M,
//! scaling studies, and the covariance-perturbation experiment.
//!
//! Sweep cells that fail (typically a singular `c_y`) are recorded as rows
//! with an error instead of aborting the sweep. Rows are sorted by
//! `(filter, m, l)` before they are returned, so output never depends on the
//! order in which cells ran.

use std::time::Instant;

use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::dataio::{self, RawSeries, SeriesConfig};
use crate::diagnostics::{self, ScalingStudy, TruncationFlavor};
use crate::filters::{self, FilterKind, LinearFilter, SpectralCache};
use crate::linalg::{self, MatrixNorm};
use crate::model::{self, seeded_rng, CovarianceModel};
use crate::{Error, Mat, Result};

/// Number of test vectors drawn per cell when the source is a model.
pub const DEFAULT_MODEL_TEST_SAMPLES: usize = 2000;

/// One `(filter, m, l)` cell of a sweep.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ExperimentResult {
    pub filter: String,
    pub m: usize,
    pub n: usize,
    pub l: Option<usize>,
    pub norm_rms: Option<f64>,
    pub analytic_mse: Option<f64>,
    pub rho_l: Option<f64>,
    pub cond_cy: Option<f64>,
    pub max_inverse_dim: Option<usize>,
    pub wall_ms: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Where covariances and test vectors come from.
#[derive(Debug, Clone)]
pub enum Source {
    /// A time series: windowed, split, and estimated per `m`.
    Series {
        series: RawSeries,
        test_fraction: f64,
    },
    /// A known joint covariance. Covariances are exact; test vectors are
    /// drawn from it. Smaller `m` keeps the most recent inputs.
    Model {
        model: CovarianceModel,
        test_samples: usize,
    },
}

impl Source {
    pub fn series(series: RawSeries) -> Self {
        Source::Series {
            series,
            test_fraction: 0.2,
        }
    }

    pub fn model(model: CovarianceModel) -> Self {
        Source::Model {
            model,
            test_samples: DEFAULT_MODEL_TEST_SAMPLES,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RunOptions {
    pub seed: u64,
    /// Record wall-clock time per cell. Off by default so that repeated runs
    /// produce identical bytes.
    pub timing: bool,
}

/// Training covariance and held-out test vectors for one `(m, n)`.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub model: CovarianceModel,
    pub test: Mat,
    pub mean: f64,
}

impl Prepared {
    pub fn new(source: &Source, m: usize, n: usize, seed: u64) -> Result<Self> {
        match source {
            Source::Series {
                series,
                test_fraction,
            } => {
                let cfg = SeriesConfig {
                    test_fraction: *test_fraction,
                    ..SeriesConfig::new(m, n, seed)
                };
                let set = dataio::window_samples(series, &cfg)?;
                let model = model::estimate_covariance(&set.train_matrix(), n)?;
                Ok(Self {
                    model,
                    test: set.test_matrix(),
                    mean: set.mean(),
                })
            }
            Source::Model {
                model: full,
                test_samples,
            } => {
                if n != full.n() {
                    return Err(Error::Config(format!(
                        "model predicts n = {} values, requested n = {n}",
                        full.n()
                    )));
                }
                let model = full.with_recent_inputs(m)?;
                let set = model::sample_from_model(&model, *test_samples, seed.wrapping_add(1))?;
                Ok(Self {
                    model,
                    test: set.data().clone(),
                    mean: 0.0,
                })
            }
        }
    }
}

fn default_n(source: &Source, n: Option<usize>) -> usize {
    match (source, n) {
        (_, Some(n)) => n,
        (Source::Model { model, .. }, None) => model.n(),
        (Source::Series { .. }, None) => 7,
    }
}

struct Cell {
    kind: FilterKind,
    l: Option<usize>,
}

fn error_row(kind: FilterKind, m: usize, n: usize, l: Option<usize>, cond: Option<f64>, e: &Error) -> ExperimentResult {
    ExperimentResult {
        filter: kind.to_string(),
        m,
        n,
        l,
        norm_rms: None,
        analytic_mse: None,
        rho_l: None,
        cond_cy: cond,
        max_inverse_dim: None,
        wall_ms: None,
        error: Some(e.to_string()),
    }
}

/// Timed pieces of the shared spectral work, charged to the rows that use it.
struct SharedCost {
    eig_ms: f64,
    whiten_ms: f64,
}

fn evaluate_cell(
    prep: &Prepared,
    cache: &SpectralCache,
    shared: &SharedCost,
    cell: &Cell,
    cond: Option<f64>,
    timing: bool,
) -> ExperimentResult {
    let (m, n) = (prep.model.m(), prep.model.n());
    let l = cell.l.unwrap_or(m);
    let start = Instant::now();
    let built: Result<(LinearFilter, f64)> = filters::build(cell.kind, cache, &prep.model, l).and_then(|f| {
        let rms = dataio::normalized_rms(&f, &prep.test, prep.mean)?;
        Ok((f, rms))
    });
    let elapsed = start.elapsed().as_secs_f64() * 1e3;
    let (f, rms) = match built {
        Ok(v) => v,
        Err(e) => return error_row(cell.kind, m, n, cell.l, cond, &e),
    };
    let extra = match cell.kind {
        FilterKind::Wiener | FilterKind::Csw => 0.0,
        FilterKind::Lrw => shared.whiten_ms,
        _ => shared.eig_ms,
    };
    let rho = match cell.kind {
        FilterKind::Wiener => Ok(0.0),
        kind => diagnostics::truncation_loss_for(TruncationFlavor::for_kind(kind), cache, &prep.model, l),
    };
    ExperimentResult {
        filter: f.label(),
        m,
        n,
        l: cell.l,
        norm_rms: Some(rms),
        analytic_mse: diagnostics::analytic_mse(&prep.model, &f).ok(),
        rho_l: rho.ok(),
        cond_cy: cond,
        max_inverse_dim: Some(f.max_inverse_dim),
        wall_ms: timing.then_some(elapsed + extra),
        error: None,
    }
}

fn sort_rows(rows: &mut [ExperimentResult]) {
    rows.sort_by(|a, b| (&a.filter, a.m, a.l).cmp(&(&b.filter, b.m, b.l)));
}

fn run_cells(prep: &Prepared, cells: &[Cell], opts: RunOptions) -> Result<Vec<ExperimentResult>> {
    let t0 = Instant::now();
    let cache = SpectralCache::new(&prep.model)?;
    let eig_ms = t0.elapsed().as_secs_f64() * 1e3;
    let mut whiten_ms = 0.0;
    if cells.iter().any(|c| c.kind == FilterKind::Lrw) {
        let t1 = Instant::now();
        // failure surfaces again, per row, when LRW is built
        let _ = cache.whitened_svd(&prep.model);
        whiten_ms = t1.elapsed().as_secs_f64() * 1e3;
    }
    let shared = SharedCost { eig_ms, whiten_ms };
    let cond = linalg::condition_number(prep.model.c_y()).ok();
    let mut rows: Vec<ExperimentResult> = if opts.timing {
        cells
            .iter()
            .map(|c| evaluate_cell(prep, &cache, &shared, c, cond, true))
            .collect()
    } else {
        cells
            .par_iter()
            .map(|c| evaluate_cell(prep, &cache, &shared, c, cond, false))
            .collect()
    };
    sort_rows(&mut rows);
    Ok(rows)
}

/// Normalized RMS and diagnostics for each filter over an l-grid at fixed
/// `m`. Wiener appears once, without `l`.
pub fn run_l_sweep(
    source: &Source,
    m: usize,
    n: Option<usize>,
    l_grid: &[usize],
    kinds: &[FilterKind],
    opts: RunOptions,
) -> Result<Vec<ExperimentResult>> {
    let n = default_n(source, n);
    let prep = Prepared::new(source, m, n, opts.seed)?;
    let mut cells = Vec::new();
    for &kind in kinds {
        if kind == FilterKind::WienerStructured {
            return Err(Error::Config("wiener-structured needs an explicit prefilter".into()));
        }
        if kind.is_truncated() {
            cells.extend(l_grid.iter().filter(|&&l| l <= m).map(|&l| Cell { kind, l: Some(l) }));
        } else {
            cells.push(Cell { kind, l: None });
        }
    }
    run_cells(&prep, &cells, opts)
}

/// How `l` is chosen per `m` in an M-sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LPolicy {
    Fixed(usize),
    /// Line search on training MSE; `step = None` scans about 16 points.
    Best {
        l_min: usize,
        l_max: Option<usize>,
        step: Option<usize>,
    },
}

impl std::str::FromStr for LPolicy {
    type Err = Error;

    /// `fixed:L`, `best`, or `best:lmin:lmax:step`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("bad l-policy `{s}`"));
        let parts: Vec<&str> = s.split(':').collect();
        match parts.as_slice() {
            ["best"] => Ok(LPolicy::Best {
                l_min: 1,
                l_max: None,
                step: None,
            }),
            ["best", a, b, c] => Ok(LPolicy::Best {
                l_min: a.parse().map_err(|_| bad())?,
                l_max: Some(b.parse().map_err(|_| bad())?),
                step: Some(c.parse().map_err(|_| bad())?),
            }),
            ["fixed", l] => Ok(LPolicy::Fixed(l.parse().map_err(|_| bad())?)),
            _ => Err(bad()),
        }
    }
}

/// Normalized RMS per filter as `m` grows, with `l` set by `policy`.
pub fn run_m_sweep(
    source: &Source,
    m_grid: &[usize],
    n: Option<usize>,
    kinds: &[FilterKind],
    policy: LPolicy,
    opts: RunOptions,
) -> Result<Vec<ExperimentResult>> {
    let n = default_n(source, n);
    let mut rows = Vec::new();
    for &m in m_grid {
        let prep = Prepared::new(source, m, n, opts.seed)?;
        let cache = SpectralCache::new(&prep.model)?;
        let mut cells = Vec::new();
        let mut failed = Vec::new();
        for &kind in kinds {
            if !kind.is_truncated() {
                cells.push(Cell { kind, l: None });
                continue;
            }
            let l = match policy {
                LPolicy::Fixed(l) => Ok(l.min(m)),
                LPolicy::Best { l_min, l_max, step } => {
                    let hi = l_max.unwrap_or(m).min(m);
                    let step = step.unwrap_or((hi / 16).max(1));
                    diagnostics::best_l_search_with(&cache, &prep.model, kind, l_min, hi, step).map(|(l, _)| l)
                }
            };
            match l {
                Ok(l) => cells.push(Cell { kind, l: Some(l) }),
                Err(e) => failed.push(error_row(kind, m, n, None, None, &e)),
            }
        }
        drop(cache);
        rows.extend(run_cells(&prep, &cells, opts)?);
        rows.extend(failed);
    }
    sort_rows(&mut rows);
    Ok(rows)
}

/// `(m, cond(c_y))` over the grid.
pub fn run_condition_report(source: &Source, m_grid: &[usize], n: Option<usize>, seed: u64) -> Result<Vec<(usize, f64)>> {
    let n = default_n(source, n);
    m_grid
        .iter()
        .map(|&m| {
            let model = match source {
                Source::Model { model, .. } => model.with_recent_inputs(m)?,
                Source::Series { .. } => Prepared::new(source, m, n, seed)?.model,
            };
            Ok((m, linalg::condition_number(model.c_y())?))
        })
        .collect()
}

/// Condition report rows in the results schema (`filter` = `cond`).
pub fn condition_rows(report: &[(usize, f64)], n: usize) -> Vec<ExperimentResult> {
    report
        .iter()
        .map(|&(m, c)| ExperimentResult {
            filter: "cond".into(),
            m,
            n,
            l: None,
            norm_rms: None,
            analytic_mse: None,
            rho_l: None,
            cond_cy: Some(c),
            max_inverse_dim: None,
            wall_ms: None,
            error: None,
        })
        .collect()
}

pub fn run_scaling_report(
    model: &CovarianceModel,
    kind: FilterKind,
    l_grid: &[usize],
    norm: MatrixNorm,
    floor: Option<f64>,
) -> Result<ScalingStudy> {
    let cache = SpectralCache::new(model)?.with_floor(floor);
    diagnostics::scaling_study_with(&cache, model, kind, l_grid, norm)
}

/// Header of the scaling CSV.
pub const SCALING_HEADER: [&str; 7] = ["filter", "l", "rho_l", "dist_to_wiener", "mse_gap", "gram_defect", "ratio"];

pub fn write_scaling_csv<W: std::io::Write>(study: &ScalingStudy, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(SCALING_HEADER)?;
    for r in &study.rows {
        out.write_record([
            study.kind.to_string(),
            r.l.to_string(),
            r.rho_l.to_string(),
            r.dist_to_wiener.to_string(),
            r.mse_gap.to_string(),
            r.gram_defect.to_string(),
            r.ratio().map(|x| x.to_string()).unwrap_or_default(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// Outcome of estimating filters from a perturbed covariance and scoring
/// them on the true one.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct PerturbationReport {
    pub cond_cy: f64,
    /// Analytic MSE of the Wiener filter built from the true model.
    pub optimal_mse: f64,
    pub wiener_clean_mse: f64,
    pub wiener_perturbed_mse: f64,
    pub jpc_clean_mse: f64,
    pub jpc_perturbed_mse: f64,
}

impl PerturbationReport {
    /// `MSE − optimal` for the Wiener filter from perturbed covariances.
    pub fn wiener_excess(&self) -> f64 {
        self.wiener_perturbed_mse - self.optimal_mse
    }

    pub fn jpc_clean_excess(&self) -> f64 {
        self.jpc_clean_mse - self.optimal_mse
    }

    pub fn jpc_perturbed_excess(&self) -> f64 {
        self.jpc_perturbed_mse - self.optimal_mse
    }
}

/// Multiplies every entry of `c_y` and `c_xy` by `1 + rel·g` with standard
/// normal `g`, keeping `c_y` symmetric. `c_x` is unchanged.
pub fn perturb_model(model: &CovarianceModel, rel: f64, seed: u64) -> Result<CovarianceModel> {
    let mut rng = seeded_rng(seed);
    let m = model.m();
    let mut c_y = model.c_y().clone();
    for j in 0..m {
        for i in 0..=j {
            let g: f64 = StandardNormal.sample(&mut rng);
            let v = c_y[(i, j)] * (1.0 + rel * g);
            c_y[(i, j)] = v;
            c_y[(j, i)] = v;
        }
    }
    let c_xy = model.c_xy().map(|v| {
        let g: f64 = StandardNormal.sample(&mut rng);
        v * (1.0 + rel * g)
    });
    CovarianceModel::from_blocks(model.c_x().clone(), c_y, c_xy)
}

/// Builds Wiener and JPC(l) from clean and perturbed covariances and scores
/// all four on the true model.
pub fn perturbation_experiment(model: &CovarianceModel, rel: f64, l: usize, seed: u64) -> Result<PerturbationReport> {
    let noisy = perturb_model(model, rel, seed)?;
    let w_clean = filters::wiener(model)?;
    let w_noisy = filters::wiener(&noisy)?;
    let j_clean = filters::jpc(model, l)?;
    let j_noisy = filters::jpc(&noisy, l)?;
    let mse = |f: &LinearFilter| diagnostics::analytic_mse(model, f);
    let optimal_mse = mse(&w_clean)?;
    Ok(PerturbationReport {
        cond_cy: linalg::condition_number(model.c_y())?,
        optimal_mse,
        wiener_clean_mse: optimal_mse,
        wiener_perturbed_mse: mse(&w_noisy)?,
        jpc_clean_mse: mse(&j_clean)?,
        jpc_perturbed_mse: mse(&j_noisy)?,
    })
}

/// Parses `start:end:step` (inclusive) or a comma list.
pub fn parse_grid(s: &str) -> Result<Vec<usize>> {
    let bad = || Error::Config(format!("bad grid `{s}`"));
    if s.contains(':') {
        let p: Vec<usize> = s
            .split(':')
            .map(|t| t.trim().parse().map_err(|_| bad()))
            .collect::<Result<_>>()?;
        match p.as_slice() {
            [a, b, step] => diagnostics::l_grid(*a, *b, *step),
            [a, b] => diagnostics::l_grid(*a, *b, 1),
            _ => Err(bad()),
        }
    } else {
        let v: Vec<usize> = s
            .split(',')
            .map(|t| t.trim().parse().map_err(|_| bad()))
            .collect::<Result<_>>()?;
        if v.is_empty() {
            Err(bad())
        } else {
            Ok(v)
        }
    }
}

pub fn parse_filters(s: &str) -> Result<Vec<FilterKind>> {
    s.split(',').map(str::parse).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{synthetic_model, Spectrum};

    fn source(m: usize) -> Source {
        Source::model(synthetic_model(2, m, &Spectrum::Geometric { a: 1.0, r: 0.8 }, 3).unwrap())
    }

    #[test]
    fn l_sweep_shape_and_certificates() {
        let kinds = [FilterKind::Wiener, FilterKind::Lrw, FilterKind::Jpc, FilterKind::Lsjpc];
        let rows = run_l_sweep(&source(6), 6, None, &[1, 2, 3, 4, 5, 6], &kinds, RunOptions::default()).unwrap();
        assert_eq!(rows.len(), 1 + 3 * 6);
        assert_eq!(rows.iter().filter(|r| r.filter == "wiener").count(), 1);
        for r in &rows {
            assert!(r.error.is_none());
            assert!(r.norm_rms.unwrap() >= 0.0);
            match r.filter.as_str() {
                "jpc" | "lsjpc" => assert!(r.max_inverse_dim.unwrap() <= r.l.unwrap()),
                _ => assert_eq!(r.max_inverse_dim, Some(6)),
            }
            assert!(r.wall_ms.is_none());
        }
        let sorted = rows.windows(2).all(|w| (&w[0].filter, w[0].l) <= (&w[1].filter, w[1].l));
        assert!(sorted);
    }

    #[test]
    fn jpc_at_full_l_matches_wiener_rms() {
        let rows = run_l_sweep(&source(6), 6, None, &[6], &[FilterKind::Wiener, FilterKind::Jpc], RunOptions::default()).unwrap();
        let w = rows.iter().find(|r| r.filter == "wiener").unwrap().norm_rms.unwrap();
        let j = rows.iter().find(|r| r.filter == "jpc").unwrap().norm_rms.unwrap();
        assert!((w - j).abs() <= 0.01 * w);
    }

    #[test]
    fn failures_are_rows_not_aborts() {
        // singular c_y: Y duplicates a coordinate
        let c_y = Mat::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let model = CovarianceModel::from_blocks(Mat::identity(1, 1), c_y, Mat::from_row_slice(1, 2, &[0.5, 0.5])).unwrap();
        let rows = run_l_sweep(&Source::model(model), 2, None, &[1, 2], &[FilterKind::Wiener, FilterKind::Lsjpc], RunOptions::default());
        // sampling the singular model is fine; the Wiener row records the failure
        let rows = rows.unwrap();
        let w = rows.iter().find(|r| r.filter == "wiener").unwrap();
        assert!(w.error.as_deref().unwrap().contains("singular"));
        assert!(rows.iter().any(|r| r.filter == "lsjpc" && r.error.is_none()));
    }

    #[test]
    fn timing_is_opt_in() {
        let opts = RunOptions { seed: 0, timing: true };
        let rows = run_l_sweep(&source(4), 4, None, &[2], &[FilterKind::Jpc], opts).unwrap();
        assert!(rows[0].wall_ms.unwrap() >= 0.0);
    }

    #[test]
    fn m_sweep_fixed_and_best() {
        let src = source(8);
        let kinds = [FilterKind::Wiener, FilterKind::Jpc];
        let rows = run_m_sweep(&src, &[4, 8], None, &kinds, LPolicy::Fixed(3), RunOptions::default()).unwrap();
        assert_eq!(rows.len(), 4);
        assert!(rows.iter().filter(|r| r.filter == "jpc").all(|r| r.l == Some(3)));
        let best = run_m_sweep(&src, &[8], None, &kinds, "best".parse().unwrap(), RunOptions::default()).unwrap();
        assert_eq!(best.iter().find(|r| r.filter == "jpc").unwrap().l, Some(8));
    }

    #[test]
    fn isotropic_condition_report() {
        let src = Source::model(synthetic_model(1, 8, &Spectrum::Constant(2.0), 0).unwrap());
        for (_, c) in run_condition_report(&src, &[2, 4, 8], None, 0).unwrap() {
            assert_eq!(c, 1.0);
        }
    }

    #[test]
    fn series_source_round_trip() {
        let values: Vec<f64> = (0..400).map(|i| 20.0 + 3.0 * (i as f64 * 0.05).sin() + 0.1 * (i as f64 * 1.7).cos()).collect();
        let src = Source::series(RawSeries::from_values(values));
        let rows = run_l_sweep(&src, 20, Some(3), &[2, 5], &[FilterKind::Wiener, FilterKind::Jpc], RunOptions::default()).unwrap();
        assert_eq!(rows.len(), 3);
        assert!(rows.iter().all(|r| r.n == 3 && r.m == 20));
    }

    #[test]
    fn perturbation_preserves_symmetry() {
        let model = synthetic_model(2, 5, &Spectrum::Geometric { a: 1.0, r: 0.5 }, 1).unwrap();
        let p = perturb_model(&model, 1e-3, 2).unwrap();
        assert_eq!(p.c_y(), &p.c_y().transpose());
        assert_eq!(p.c_x(), model.c_x());
        assert!((p.c_y() - model.c_y()).amax() > 0.0);
    }

    #[test]
    fn grid_and_policy_parsing() {
        assert_eq!(parse_grid("400:1200:400").unwrap(), vec![400, 800, 1200]);
        assert_eq!(parse_grid("1,3,5").unwrap(), vec![1, 3, 5]);
        assert!(parse_grid("a:b").is_err());
        assert_eq!("fixed:12".parse::<LPolicy>().unwrap(), LPolicy::Fixed(12));
        assert_eq!(
            "best:1:100:5".parse::<LPolicy>().unwrap(),
            LPolicy::Best { l_min: 1, l_max: Some(100), step: Some(5) }
        );
        assert!("sometimes".parse::<LPolicy>().is_err());
        assert_eq!(parse_filters("wiener,lrw,jpc,lsjpc").unwrap().len(), 4);
    }
}
