//! Objectives, truncation-power loss, convergence studies and the L search.

use rayon::prelude::*;

use crate::filters::{self, FilterKind, LinearFilter, SpectralCache};
use crate::linalg::{self, MatrixNorm};
use crate::model::{CovarianceModel, PSD_TOL};
use crate::{Error, Mat, Result};

fn check_conformable(model: &CovarianceModel, filter: &LinearFilter) -> Result<()> {
    if filter.matrix.shape() != (model.n(), model.m()) {
        return Err(Error::Dimension(format!(
            "filter is {:?}, model expects {}×{}",
            filter.matrix.shape(),
            model.n(),
            model.m()
        )));
    }
    Ok(())
}

/// `C_err = c_x − A c_xy' − c_xy A' + A c_y A'`, symmetrized.
pub fn error_covariance(model: &CovarianceModel, filter: &LinearFilter) -> Result<Mat> {
    check_conformable(model, filter)?;
    let a = &filter.matrix;
    let cross = a * model.c_xy().transpose();
    let c = model.c_x() - &cross - cross.transpose() + a * model.c_y() * a.transpose();
    Ok(linalg::symmetrize(&c))
}

/// `tr(c_x) − 2 tr(c_xy A') + tr(A c_y A')`.
pub fn analytic_mse(model: &CovarianceModel, filter: &LinearFilter) -> Result<f64> {
    check_conformable(model, filter)?;
    let a = &filter.matrix;
    let cross = model.c_xy().dot(a);
    let quad = (a * model.c_y()).dot(a);
    Ok(model.c_x().trace() - 2.0 * cross + quad)
}

/// Weighted trace `tr(g'g C_err)`.
pub fn weighted_trace_objective(model: &CovarianceModel, filter: &LinearFilter, g: &Mat) -> Result<f64> {
    if g.ncols() != model.n() {
        return Err(Error::Dimension(format!(
            "weight has {} columns, model has n = {}",
            g.ncols(),
            model.n()
        )));
    }
    let err = error_covariance(model, filter)?;
    Ok((g.transpose() * g).dot(&err))
}

/// `det(C_err)` as a product of eigenvalues.
pub fn det_objective(model: &CovarianceModel, filter: &LinearFilter) -> Result<f64> {
    linalg::psd_determinant(&error_covariance(model, filter)?, PSD_TOL)
}

/// Which spectrum a truncation discards.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TruncationFlavor {
    /// Singular values of `c_xy c_y^{-1/2}`.
    Lrw,
    /// Eigenvalues of `c_z`.
    Jpc,
}

impl TruncationFlavor {
    pub fn for_kind(kind: FilterKind) -> Self {
        match kind {
            FilterKind::Lrw | FilterKind::Csw => TruncationFlavor::Lrw,
            _ => TruncationFlavor::Jpc,
        }
    }

    pub fn spectrum(self, cache: &SpectralCache, model: &CovarianceModel) -> Result<Vec<f64>> {
        Ok(match self {
            TruncationFlavor::Lrw => cache.whitened_svd(model)?.singular_values.as_slice().to_vec(),
            TruncationFlavor::Jpc => cache.eig_z().values.as_slice().to_vec(),
        })
    }
}

/// Power discarded by keeping the first `l` entries of a descending
/// spectrum. Negative rounding residue in the tail counts as zero.
pub fn truncation_power_loss(spectrum: &[f64], l: usize) -> Result<f64> {
    if l == 0 || l > spectrum.len() {
        return Err(Error::OutOfRange(format!(
            "l = {l} not in 1..={}",
            spectrum.len()
        )));
    }
    Ok(spectrum[l..].iter().map(|v| v.max(0.0)).sum())
}

/// `ρ_L` for a filter family. For LRW only `min(l, N)` singular values are
/// kept, so `l` past the spectrum length loses nothing.
pub fn truncation_loss_for(
    flavor: TruncationFlavor,
    cache: &SpectralCache,
    model: &CovarianceModel,
    l: usize,
) -> Result<f64> {
    let spectrum = flavor.spectrum(cache, model)?;
    let l = match flavor {
        TruncationFlavor::Lrw if l >= 1 => l.min(spectrum.len()),
        _ => l,
    };
    truncation_power_loss(&spectrum, l)
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ScalingRow {
    pub l: usize,
    pub rho_l: f64,
    pub dist_to_wiener: f64,
    pub mse_gap: f64,
    pub gram_defect: f64,
}

impl ScalingRow {
    /// `dist / ρ_L`, or `None` when nothing was truncated.
    pub fn ratio(&self) -> Option<f64> {
        (self.rho_l > 0.0).then(|| self.dist_to_wiener / self.rho_l)
    }
}

/// Distance of a truncated filter family from the Wiener filter over an
/// l-grid, against the truncation-power loss.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ScalingStudy {
    pub kind: FilterKind,
    pub norm: MatrixNorm,
    pub rows: Vec<ScalingRow>,
    /// Least-squares slope of `dist` against `ρ_L` through the origin.
    pub slope: f64,
    /// Largest `dist / ρ_L` over rows with `ρ_L > 0`.
    pub max_ratio: f64,
}

/// Relative gap under which two adjacent eigenvalues count as tied.
const TIE_TOL: f64 = 1e-12;

pub fn scaling_study(
    model: &CovarianceModel,
    kind: FilterKind,
    l_grid: &[usize],
    norm: MatrixNorm,
) -> Result<ScalingStudy> {
    scaling_study_with(&SpectralCache::new(model)?, model, kind, l_grid, norm)
}

pub fn scaling_study_with(
    cache: &SpectralCache,
    model: &CovarianceModel,
    kind: FilterKind,
    l_grid: &[usize],
    norm: MatrixNorm,
) -> Result<ScalingStudy> {
    if l_grid.is_empty() {
        return Err(Error::Config("empty l grid".into()));
    }
    if l_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Config("l grid must be strictly increasing".into()));
    }
    let reference = filters::wiener(model)?;
    let mse_w = analytic_mse(model, &reference)?;
    let flavor = TruncationFlavor::for_kind(kind);
    let spectrum = flavor.spectrum(cache, model)?;
    let joint = cache.eig_z().values.as_slice();
    let tied = |l: usize| {
        l < joint.len() && (joint[l - 1] - joint[l]).abs() <= TIE_TOL * joint[0].abs()
    };
    let grid: Vec<usize> = l_grid
        .iter()
        .copied()
        .filter(|&l| flavor == TruncationFlavor::Lrw || !tied(l))
        .collect();
    let rows = grid
        .par_iter()
        .map(|&l| {
            let f = filters::build(kind, cache, model, l)?;
            let kept = match flavor {
                TruncationFlavor::Lrw => l.min(spectrum.len()),
                TruncationFlavor::Jpc => l,
            };
            Ok(ScalingRow {
                l,
                rho_l: truncation_power_loss(&spectrum, kept)?,
                dist_to_wiener: norm.eval(&(&f.matrix - &reference.matrix))?,
                mse_gap: analytic_mse(model, &f)? - mse_w,
                gram_defect: cache.gram_defect(l),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let (num, den) = rows
        .iter()
        .fold((0.0, 0.0), |(n, d), r| (n + r.rho_l * r.dist_to_wiener, d + r.rho_l * r.rho_l));
    let slope = if den > 0.0 { num / den } else { 0.0 };
    let max_ratio = rows
        .iter()
        .filter_map(ScalingRow::ratio)
        .fold(0.0, f64::max);
    Ok(ScalingStudy {
        kind,
        norm,
        rows,
        slope,
        max_ratio,
    })
}

/// Inclusive grid `l_min, l_min + step, ...` up to `l_max`.
pub fn l_grid(l_min: usize, l_max: usize, step: usize) -> Result<Vec<usize>> {
    if step == 0 || l_min > l_max {
        return Err(Error::Config(format!(
            "empty l grid {l_min}..={l_max} step {step}"
        )));
    }
    Ok((l_min..=l_max).step_by(step).collect())
}

/// Scans the l-grid by analytic MSE on the given (training) covariances and
/// returns the minimizer. Ties go to the smaller l. Values of l whose
/// construction fails are skipped; if all fail the first error is returned.
pub fn best_l_search(
    model: &CovarianceModel,
    kind: FilterKind,
    l_min: usize,
    l_max: usize,
    step: usize,
) -> Result<(usize, f64)> {
    best_l_search_with(&SpectralCache::new(model)?, model, kind, l_min, l_max, step)
}

pub fn best_l_search_with(
    cache: &SpectralCache,
    model: &CovarianceModel,
    kind: FilterKind,
    l_min: usize,
    l_max: usize,
    step: usize,
) -> Result<(usize, f64)> {
    let grid = l_grid(l_min.max(1), l_max, step)?;
    let mut best: Option<(usize, f64)> = None;
    let mut first_err = None;
    for l in grid {
        match filters::build(kind, cache, model, l).and_then(|f| analytic_mse(model, &f)) {
            Ok(mse) if mse.is_finite() => {
                if best.is_none_or(|(_, b)| mse < b) {
                    best = Some((l, mse));
                }
            }
            Ok(_) => {}
            Err(e) => {
                first_err.get_or_insert(e);
            }
        }
    }
    best.ok_or_else(|| first_err.unwrap_or_else(|| Error::Config("no finite MSE on the l grid".into())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filters::{jpc, lrw, wiener};
    use crate::model::{synthetic_model, Spectrum};
    use crate::Vector;

    fn diag(v: &[f64]) -> Mat {
        Mat::from_diagonal(&Vector::from_vec(v.to_vec()))
    }

    fn model(seed: u64) -> CovarianceModel {
        synthetic_model(2, 5, &Spectrum::Geometric { a: 1.0, r: 0.7 }, seed).unwrap()
    }

    fn zero_filter(m: &CovarianceModel) -> LinearFilter {
        LinearFilter {
            matrix: Mat::zeros(m.n(), m.m()),
            kind: FilterKind::Wiener,
            weighted: false,
            l: None,
            max_inverse_dim: 0,
        }
    }

    #[test]
    fn mse_of_zero_filter_is_trace() {
        let m = model(1);
        assert_eq!(analytic_mse(&m, &zero_filter(&m)).unwrap(), m.c_x().trace());
    }

    #[test]
    fn wiener_mse_simplifies() {
        let m = model(2);
        let w = wiener(&m).unwrap();
        let simplified = m.c_x().trace() - (&w.matrix * m.c_xy().transpose()).trace();
        assert!((analytic_mse(&m, &w).unwrap() - simplified).abs() < 1e-12);
    }

    #[test]
    fn mse_rejects_wrong_shape() {
        let m = model(3);
        let mut f = zero_filter(&m);
        f.matrix = Mat::zeros(3, 5);
        assert!(matches!(analytic_mse(&m, &f), Err(Error::Dimension(_))));
    }

    #[test]
    fn weighted_trace_examples() {
        let m = model(4);
        let f = lrw(&m, 1).unwrap();
        let mse = analytic_mse(&m, &f).unwrap();
        let id = weighted_trace_objective(&m, &f, &Mat::identity(2, 2)).unwrap();
        assert!((id - mse).abs() <= 1e-12 * mse.abs());
        let g = Mat::from_row_slice(2, 2, &[1.0, 0.5, -0.3, 2.0]);
        let z = weighted_trace_objective(&m, &zero_filter(&m), &g).unwrap();
        assert!((z - (g.transpose() * &g * m.c_x()).trace()).abs() < 1e-12);
    }

    #[test]
    fn weighted_trace_equals_transformed_mse() {
        let m = model(5);
        let f = jpc(&m, 3).unwrap();
        let g = Mat::from_row_slice(2, 2, &[1.5, 0.2, 0.1, 0.7]);
        let transformed = filters::weighted_model(&m, &g).unwrap();
        let mut ga = f.clone();
        ga.matrix = &g * &f.matrix;
        let lhs = weighted_trace_objective(&m, &f, &g).unwrap();
        let rhs = analytic_mse(&transformed, &ga).unwrap();
        assert!((lhs - rhs).abs() < 1e-12 * lhs.abs().max(1.0));
    }

    fn det3(a: &Mat) -> f64 {
        // cofactor expansion along the first row
        match a.nrows() {
            1 => a[(0, 0)],
            2 => a[(0, 0)] * a[(1, 1)] - a[(0, 1)] * a[(1, 0)],
            3 => {
                a[(0, 0)] * (a[(1, 1)] * a[(2, 2)] - a[(1, 2)] * a[(2, 1)])
                    - a[(0, 1)] * (a[(1, 0)] * a[(2, 2)] - a[(1, 2)] * a[(2, 0)])
                    + a[(0, 2)] * (a[(1, 0)] * a[(2, 1)] - a[(1, 1)] * a[(2, 0)])
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn det_objective_examples() {
        let m = CovarianceModel::from_blocks(diag(&[2.0, 3.0]), Mat::identity(2, 2), Mat::zeros(2, 2)).unwrap();
        assert!((det_objective(&m, &zero_filter(&m)).unwrap() - 6.0).abs() < 1e-12);

        let c = diag(&[2.0, 1.0]);
        let copy = CovarianceModel::from_blocks(c.clone(), c.clone(), c).unwrap();
        let mut id = zero_filter(&copy);
        id.matrix = Mat::identity(2, 2);
        assert!(det_objective(&copy, &id).unwrap().abs() < 1e-14);

        let m3 = synthetic_model(3, 2, &Spectrum::Geometric { a: 1.0, r: 0.6 }, 6).unwrap();
        let f = lrw(&m3, 1).unwrap();
        let oracle = det3(&error_covariance(&m3, &f).unwrap());
        let got = det_objective(&m3, &f).unwrap();
        assert!((got - oracle).abs() <= 1e-10 * oracle.abs().max(1e-12));
    }

    #[test]
    fn truncation_loss_examples() {
        assert_eq!(truncation_power_loss(&[3.0, 2.0, 1.0], 1).unwrap(), 3.0);
        assert_eq!(truncation_power_loss(&[3.0, 2.0, 1.0], 3).unwrap(), 0.0);
        assert!(truncation_power_loss(&[3.0, 2.0, 1.0], 0).is_err());
        assert!(truncation_power_loss(&[3.0, 2.0, 1.0], 4).is_err());
    }

    #[test]
    fn truncation_loss_geometric_tail() {
        let (a, r, d) = (2.0, 0.5, 12usize);
        let m = synthetic_model(3, 9, &Spectrum::Geometric { a, r }, 7).unwrap();
        let cache = SpectralCache::new(&m).unwrap();
        for l in 1..=d {
            let closed = a * r.powi(l as i32) * (1.0 - r.powi((d - l) as i32)) / (1.0 - r);
            let got = truncation_loss_for(TruncationFlavor::Jpc, &cache, &m, l).unwrap();
            assert!((got - closed).abs() <= 1e-10 * a, "l={l}: {got} vs {closed}");
        }
    }

    #[test]
    fn scaling_study_recovers_wiener_at_full_l() {
        let m = model(8);
        let study = scaling_study(&m, FilterKind::Jpc, &[1, 2, 3, 4, 5], MatrixNorm::Nuclear).unwrap();
        let last = study.rows.last().unwrap();
        assert_eq!(last.l, 5);
        assert!(last.dist_to_wiener <= 1e-8);
        for w in study.rows.windows(2) {
            assert!(w[1].rho_l <= w[0].rho_l);
        }
        assert!(study.max_ratio.is_finite());
    }

    #[test]
    fn scaling_study_rejects_bad_grid() {
        let m = model(9);
        assert!(scaling_study(&m, FilterKind::Jpc, &[], MatrixNorm::Nuclear).is_err());
        assert!(scaling_study(&m, FilterKind::Jpc, &[3, 2], MatrixNorm::Nuclear).is_err());
    }

    #[test]
    fn best_l_examples() {
        let m = model(10);
        assert_eq!(best_l_search(&m, FilterKind::Jpc, 3, 3, 1).unwrap().0, 3);
        assert!(best_l_search(&m, FilterKind::Jpc, 4, 3, 1).is_err());
        assert!(best_l_search(&m, FilterKind::Jpc, 1, 3, 0).is_err());
        // LRW keeps min(l, n) = 2 triplets for every l ≥ 2: a plateau
        assert_eq!(best_l_search(&m, FilterKind::Lrw, 1, 5, 1).unwrap().0, 2);
    }

    #[test]
    fn best_l_is_largest_on_well_conditioned_model() {
        let m = synthetic_model(2, 6, &Spectrum::Geometric { a: 1.0, r: 0.8 }, 11).unwrap();
        let cache = SpectralCache::new(&m).unwrap();
        let mses: Vec<f64> = (1..=6)
            .map(|l| analytic_mse(&m, &filters::jpc_with(&cache, &m, l).unwrap()).unwrap())
            .collect();
        for w in mses.windows(2) {
            assert!(w[1] <= w[0] + 1e-12, "{mses:?}");
        }
        let (l, mse) = best_l_search(&m, FilterKind::Jpc, 1, 6, 1).unwrap();
        assert_eq!(l, 6);
        assert!((mse - analytic_mse(&m, &wiener(&m).unwrap()).unwrap()).abs() < 1e-10);
    }
}
