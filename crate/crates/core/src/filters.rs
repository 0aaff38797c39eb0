//! Filter constructors.
//!
//! Every filter is an `N×M` matrix `A` estimating `X` from `Y` as `A·y`.
//! Constructors never form explicit inverses: each `(·)^{-1}` is a linear
//! solve through [`InverseAudit`], and the largest system solved is kept on
//! the filter as `max_inverse_dim`. A filter is L-well-conditioned when that
//! number is at most `L`.

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use nalgebra::linalg::LU;

use crate::linalg::{self, InverseAudit, Svd, SymEig};
use crate::model::CovarianceModel;
use crate::{Error, Mat, Result, Vector};

/// Singular values below this fraction of `σ_max` count as zero when checking
/// that a prefilter has full row rank.
pub const RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FilterKind {
    Wiener,
    WienerStructured,
    Lrw,
    Csw,
    Jpc,
    Lsjpc,
    JpcSimplified,
    LsjpcSimplified,
}

impl FilterKind {
    pub const ALL: [FilterKind; 8] = [
        FilterKind::Wiener,
        FilterKind::WienerStructured,
        FilterKind::Lrw,
        FilterKind::Csw,
        FilterKind::Jpc,
        FilterKind::Lsjpc,
        FilterKind::JpcSimplified,
        FilterKind::LsjpcSimplified,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FilterKind::Wiener => "wiener",
            FilterKind::WienerStructured => "wiener-structured",
            FilterKind::Lrw => "lrw",
            FilterKind::Csw => "csw",
            FilterKind::Jpc => "jpc",
            FilterKind::Lsjpc => "lsjpc",
            FilterKind::JpcSimplified => "jpc-simplified",
            FilterKind::LsjpcSimplified => "lsjpc-simplified",
        }
    }

    /// Whether the construction takes a truncation parameter.
    pub fn is_truncated(self) -> bool {
        !matches!(self, FilterKind::Wiener)
    }

    /// Kinds that are built without any solve larger than `l × l`.
    pub fn is_well_conditioned_family(self) -> bool {
        matches!(
            self,
            FilterKind::Jpc | FilterKind::Lsjpc | FilterKind::JpcSimplified | FilterKind::LsjpcSimplified
        )
    }
}

impl fmt::Display for FilterKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FilterKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase().replace('_', "-");
        FilterKind::ALL
            .into_iter()
            .find(|k| k.as_str() == lower)
            .or(match lower.as_str() {
                "lmmse" | "w" => Some(FilterKind::Wiener),
                "ws" => Some(FilterKind::WienerStructured),
                _ => None,
            })
            .ok_or_else(|| Error::Config(format!("unknown filter `{s}`")))
    }
}

/// An `N×M` estimator matrix with the facts about how it was built.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearFilter {
    pub matrix: Mat,
    pub kind: FilterKind,
    /// Built through [`weighted_filter`].
    pub weighted: bool,
    pub l: Option<usize>,
    /// Dimension of the largest linear system solved during construction.
    pub max_inverse_dim: usize,
}

impl LinearFilter {
    pub fn n(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn m(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn apply(&self, y: &Vector) -> Vector {
        &self.matrix * y
    }

    /// Applies the filter to every column of `ys`.
    pub fn apply_columns(&self, ys: &Mat) -> Mat {
        &self.matrix * ys
    }

    pub fn label(&self) -> String {
        if self.weighted {
            format!("weighted-{}", self.kind)
        } else {
            self.kind.to_string()
        }
    }
}

/// `filter.max_inverse_dim ≤ l`.
pub fn is_l_well_conditioned(filter: &LinearFilter, l: usize) -> bool {
    filter.max_inverse_dim <= l
}

/// A full-row-rank `L×M` matrix applied to `Y` ahead of a second stage.
#[derive(Debug, Clone, PartialEq)]
pub struct Prefilter {
    matrix: Mat,
}

impl Prefilter {
    pub fn new(matrix: Mat) -> Result<Self> {
        let (l, m) = matrix.shape();
        if l == 0 || l > m {
            return Err(Error::Dimension(format!(
                "prefilter must be L×M with 1 ≤ L ≤ M, got {l}×{m}"
            )));
        }
        let rank = linalg::numerical_rank(&matrix, RANK_TOL)?;
        if rank < l {
            return Err(Error::Rank { expected: l, found: rank });
        }
        Ok(Self { matrix })
    }

    pub fn l(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &Mat {
        &self.matrix
    }

    /// `T · B`; `T` must be invertible for the result to stay full rank.
    pub fn premultiply(&self, t: &Mat) -> Result<Self> {
        if t.shape() != (self.l(), self.l()) {
            return Err(Error::Dimension("premultiplier must be L×L".into()));
        }
        Self::new(t * &self.matrix)
    }
}

/// Whitened cross-covariance and its SVD, used by LRW.
#[derive(Debug, Clone)]
struct Whitened {
    inv_sqrt_cy: Mat,
    svd: Svd,
}

/// Eigendecomposition of the joint covariance and the derived partitions,
/// shared by every JPC-family construction on the same model.
#[derive(Debug)]
pub struct SpectralCache {
    n: usize,
    m: usize,
    eig_z: SymEig,
    floor: Option<f64>,
    whitened: OnceLock<Whitened>,
}

impl SpectralCache {
    pub fn new(model: &CovarianceModel) -> Result<Self> {
        let eig_z = linalg::sym_eig(model.c_z())?;
        Ok(Self::from_eig(model.n(), model.m(), eig_z))
    }

    pub fn from_eig(n: usize, m: usize, eig_z: SymEig) -> Self {
        assert_eq!(eig_z.dim(), n + m, "joint eigendecomposition size");
        Self {
            n,
            m,
            eig_z,
            floor: None,
            whitened: OnceLock::new(),
        }
    }

    /// Overrides the singularity floor used when whitening `c_y`
    /// (default `1e-12 · λ_max`).
    pub fn with_floor(mut self, floor: Option<f64>) -> Self {
        self.floor = floor;
        self
    }

    pub fn floor(&self) -> Option<f64> {
        self.floor
    }

    pub fn eig_z(&self) -> &SymEig {
        &self.eig_z
    }

    /// Top `n` rows of `V_Z`.
    pub fn v_x(&self) -> Mat {
        self.eig_z.vectors.rows(0, self.n).into_owned()
    }

    /// Bottom `m` rows of `V_Z`.
    pub fn v_y(&self) -> Mat {
        self.eig_z.vectors.rows(self.n, self.m).into_owned()
    }

    pub fn v_xl(&self, l: usize) -> Mat {
        self.eig_z.vectors.view((0, 0), (self.n, l)).into_owned()
    }

    pub fn v_yl(&self, l: usize) -> Mat {
        self.eig_z.vectors.view((self.n, 0), (self.m, l)).into_owned()
    }

    /// Leading `l` eigenvalues of `c_z`.
    pub fn s_zl(&self, l: usize) -> Vector {
        self.eig_z.values.rows(0, l).into_owned()
    }

    /// `‖V_YL' V_YL − I‖_F`.
    pub fn gram_defect(&self, l: usize) -> f64 {
        let v = self.v_yl(l);
        (v.transpose() * &v - Mat::identity(l, l)).norm()
    }

    fn check_l(&self, l: usize) -> Result<()> {
        if l == 0 || l > self.m {
            return Err(Error::OutOfRange(format!("l = {l} not in 1..={}", self.m)));
        }
        Ok(())
    }

    fn whitened(&self, model: &CovarianceModel) -> Result<&Whitened> {
        if let Some(w) = self.whitened.get() {
            return Ok(w);
        }
        let inv_sqrt_cy = linalg::inv_sqrt_spd(model.c_y(), self.floor)?;
        let svd = linalg::svd(&(model.c_xy() * &inv_sqrt_cy))?;
        Ok(self.whitened.get_or_init(|| Whitened { inv_sqrt_cy, svd }))
    }

    /// SVD of `c_xy · c_y^{-1/2}`, computed on first use.
    pub fn whitened_svd(&self, model: &CovarianceModel) -> Result<&Svd> {
        Ok(&self.whitened(model)?.svd)
    }
}

fn check_model_cache(model: &CovarianceModel, cache: &SpectralCache) -> Result<()> {
    if model.n() != cache.n || model.m() != cache.m {
        return Err(Error::Dimension(format!(
            "cache built for n={}, m={} but model has n={}, m={}",
            cache.n,
            cache.m,
            model.n(),
            model.m()
        )));
    }
    Ok(())
}

fn check_l(l: usize, m: usize) -> Result<()> {
    if l == 0 || l > m {
        return Err(Error::OutOfRange(format!("l = {l} not in 1..={m}")));
    }
    Ok(())
}

/// Unconstrained LMMSE filter `c_xy · c_y^{-1}`.
pub fn wiener(model: &CovarianceModel) -> Result<LinearFilter> {
    let mut audit = InverseAudit::new();
    // A c_y = c_xy  <=>  c_y A' = c_xy'
    let at = audit.solve_spd(model.c_y(), &model.c_xy().transpose())?;
    Ok(LinearFilter {
        matrix: at.transpose(),
        kind: FilterKind::Wiener,
        weighted: false,
        l: None,
        max_inverse_dim: audit.max_dim(),
    })
}

/// `c_xy B' (B c_y B')^{-1} B` with a single `L×L` solve.
fn structured(model: &CovarianceModel, b: &Mat, audit: &mut InverseAudit) -> Result<Mat> {
    let bt = b.transpose();
    let reduced = b * model.c_y() * &bt;
    let resolved = audit.solve_spd(&reduced, b)?;
    Ok(model.c_xy() * bt * resolved)
}

/// The LMMSE-optimal filter among all filters of the form `D · B`.
pub fn wiener_structured(model: &CovarianceModel, b: &Prefilter) -> Result<LinearFilter> {
    if b.matrix().ncols() != model.m() {
        return Err(Error::Dimension(format!(
            "prefilter has {} columns, model has m = {}",
            b.matrix().ncols(),
            model.m()
        )));
    }
    let mut audit = InverseAudit::new();
    let matrix = structured(model, b.matrix(), &mut audit)?;
    Ok(LinearFilter {
        matrix,
        kind: FilterKind::WienerStructured,
        weighted: false,
        l: Some(b.l()),
        max_inverse_dim: audit.max_dim(),
    })
}

/// Low-rank Wiener filter `U_L S_L V_L' c_y^{-1/2}` keeping `min(l, N)`
/// singular triplets of `c_xy c_y^{-1/2}`.
pub fn lrw(model: &CovarianceModel, l: usize) -> Result<LinearFilter> {
    lrw_with(&SpectralCache::new(model)?, model, l)
}

pub fn lrw_with(cache: &SpectralCache, model: &CovarianceModel, l: usize) -> Result<LinearFilter> {
    check_model_cache(model, cache)?;
    check_l(l, model.m())?;
    let mut audit = InverseAudit::new();
    audit.record(model.m());
    let w = cache.whitened(model)?;
    let matrix = w.svd.truncated(l.min(model.n())) * &w.inv_sqrt_cy;
    Ok(LinearFilter {
        matrix,
        kind: FilterKind::Lrw,
        weighted: false,
        l: Some(l),
        max_inverse_dim: audit.max_dim(),
    })
}

/// Cross-spectral scores `‖c_xy q_i‖² / λ_i` over the eigenbasis of `c_y`,
/// returned with the eigendecomposition. Fails if any eigenvalue is at or
/// below the floor.
pub fn cross_spectral_powers(model: &CovarianceModel, floor: Option<f64>) -> Result<(SymEig, Vec<f64>)> {
    let eig = linalg::sym_eig(model.c_y())?;
    let floor = floor.unwrap_or(linalg::DEFAULT_RELATIVE_FLOOR * eig.values[0].max(0.0));
    if let Some(index) = eig.values.iter().position(|&v| v <= floor) {
        let lmin = eig.values[eig.dim() - 1];
        return Err(Error::Singular {
            index,
            value: eig.values[index],
            floor,
            condition: if lmin > 0.0 { eig.values[0] / lmin } else { f64::INFINITY },
        });
    }
    let projected = model.c_xy() * &eig.vectors;
    let scores = projected
        .column_iter()
        .zip(eig.values.iter())
        .map(|(c, &lam)| c.norm_squared() / lam)
        .collect();
    Ok((eig, scores))
}

/// Cross-spectral Wiener filter: keeps the `l` eigen-directions of `c_y` with
/// the largest cross-spectral power, `c_xy Q_L Λ_L^{-1} Q_L'`. The rank of the
/// result is at most `min(l, N)`.
pub fn csw(model: &CovarianceModel, l: usize) -> Result<LinearFilter> {
    csw_with_floor(model, l, None)
}

pub fn csw_with_floor(model: &CovarianceModel, l: usize, floor: Option<f64>) -> Result<LinearFilter> {
    check_l(l, model.m())?;
    let mut audit = InverseAudit::new();
    audit.record(model.m());
    let (eig, scores) = cross_spectral_powers(model, floor)?;
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&i, &j| scores[j].total_cmp(&scores[i]));
    let keep = &order[..l];
    let m = model.m();
    let q_l = Mat::from_fn(m, l, |r, c| eig.vectors[(r, keep[c])]);
    let mut scaled = q_l.clone();
    for (c, mut col) in scaled.column_iter_mut().enumerate() {
        col /= eig.values[keep[c]];
    }
    let matrix = model.c_xy() * scaled * q_l.transpose();
    Ok(LinearFilter {
        matrix,
        kind: FilterKind::Csw,
        weighted: false,
        l: Some(l),
        max_inverse_dim: audit.max_dim(),
    })
}

/// Fails unless `V_YL` has full column rank, judged on the `l×l` Gram matrix.
fn check_v_yl_rank(v_yl: &Mat) -> Result<Mat> {
    let l = v_yl.ncols();
    let gram = v_yl.transpose() * v_yl;
    let eig = linalg::sym_eig(&gram)?;
    let top = eig.values[0].max(0.0);
    let found = eig
        .values
        .iter()
        .filter(|&&v| v > RANK_TOL * RANK_TOL * top)
        .count();
    if top == 0.0 || found < l {
        return Err(Error::Rank { expected: l, found: if top == 0.0 { 0 } else { found } });
    }
    Ok(gram)
}

/// Joint-principal-component filter: the Wiener-structured filter with
/// prefilter `V_YL'`.
pub fn jpc(model: &CovarianceModel, l: usize) -> Result<LinearFilter> {
    jpc_with(&SpectralCache::new(model)?, model, l)
}

pub fn jpc_with(cache: &SpectralCache, model: &CovarianceModel, l: usize) -> Result<LinearFilter> {
    check_model_cache(model, cache)?;
    cache.check_l(l)?;
    if model.c_xy().iter().all(|&x| x == 0.0) {
        // every Wiener-structured filter vanishes without cross-covariance
        return Ok(LinearFilter {
            matrix: Mat::zeros(model.n(), model.m()),
            kind: FilterKind::Jpc,
            weighted: false,
            l: Some(l),
            max_inverse_dim: 0,
        });
    }
    let v_yl = cache.v_yl(l);
    check_v_yl_rank(&v_yl)?;
    let mut audit = InverseAudit::new();
    let matrix = structured(model, &v_yl.transpose(), &mut audit)?;
    Ok(LinearFilter {
        matrix,
        kind: FilterKind::Jpc,
        weighted: false,
        l: Some(l),
        max_inverse_dim: audit.max_dim(),
    })
}

/// Least-squares JPC filter `V_XL (V_YL' V_YL)^{-1} V_YL'`.
pub fn lsjpc(model: &CovarianceModel, l: usize) -> Result<LinearFilter> {
    lsjpc_with(&SpectralCache::new(model)?, model, l)
}

pub fn lsjpc_with(cache: &SpectralCache, model: &CovarianceModel, l: usize) -> Result<LinearFilter> {
    check_model_cache(model, cache)?;
    cache.check_l(l)?;
    let v_yl = cache.v_yl(l);
    let gram = check_v_yl_rank(&v_yl)?;
    let mut audit = InverseAudit::new();
    let resolution = audit.solve_spd(&gram, &v_yl.transpose())?;
    Ok(LinearFilter {
        matrix: cache.v_xl(l) * resolution,
        kind: FilterKind::Lsjpc,
        weighted: false,
        l: Some(l),
        max_inverse_dim: audit.max_dim(),
    })
}

/// JPC with `c_y^{-1}` replaced by `V_YL S_ZL^{-1} V_YL'`; no solve at all.
pub fn jpc_simplified(model: &CovarianceModel, l: usize) -> Result<LinearFilter> {
    jpc_simplified_with(&SpectralCache::new(model)?, model, l)
}

pub fn jpc_simplified_with(cache: &SpectralCache, model: &CovarianceModel, l: usize) -> Result<LinearFilter> {
    check_model_cache(model, cache)?;
    cache.check_l(l)?;
    let s = cache.s_zl(l);
    if let Some(index) = s.iter().position(|&v| v <= 0.0) {
        return Err(Error::Singular {
            index,
            value: s[index],
            floor: 0.0,
            condition: f64::INFINITY,
        });
    }
    let v_yl = cache.v_yl(l);
    let mut scaled = v_yl.clone();
    for (c, mut col) in scaled.column_iter_mut().enumerate() {
        col /= s[c];
    }
    Ok(LinearFilter {
        matrix: model.c_xy() * scaled * v_yl.transpose(),
        kind: FilterKind::JpcSimplified,
        weighted: false,
        l: Some(l),
        max_inverse_dim: 0,
    })
}

/// LSJPC with `V_YL' V_YL` replaced by the identity: `V_XL V_YL'`.
pub fn lsjpc_simplified(model: &CovarianceModel, l: usize) -> Result<LinearFilter> {
    lsjpc_simplified_with(&SpectralCache::new(model)?, model, l)
}

pub fn lsjpc_simplified_with(cache: &SpectralCache, model: &CovarianceModel, l: usize) -> Result<LinearFilter> {
    check_model_cache(model, cache)?;
    cache.check_l(l)?;
    Ok(LinearFilter {
        matrix: cache.v_xl(l) * cache.v_yl(l).transpose(),
        kind: FilterKind::LsjpcSimplified,
        weighted: false,
        l: Some(l),
        max_inverse_dim: 0,
    })
}

/// Builds any kind that is parameterized by `(model, l)`.
/// `WienerStructured` needs an explicit prefilter and is rejected here.
pub fn build(kind: FilterKind, cache: &SpectralCache, model: &CovarianceModel, l: usize) -> Result<LinearFilter> {
    match kind {
        FilterKind::Wiener => wiener(model),
        FilterKind::Lrw => lrw_with(cache, model, l),
        FilterKind::Csw => csw_with_floor(model, l, cache.floor()),
        FilterKind::Jpc => jpc_with(cache, model, l),
        FilterKind::Lsjpc => lsjpc_with(cache, model, l),
        FilterKind::JpcSimplified => jpc_simplified_with(cache, model, l),
        FilterKind::LsjpcSimplified => lsjpc_simplified_with(cache, model, l),
        FilterKind::WienerStructured => Err(Error::Config(
            "wiener-structured filters need an explicit prefilter".into(),
        )),
    }
}

/// Model of `(gX, Y)`: `c_x → g c_x g'`, `c_xy → g c_xy`, `c_y` unchanged.
pub fn weighted_model(model: &CovarianceModel, g: &Mat) -> Result<CovarianceModel> {
    if g.shape() != (model.n(), model.n()) {
        return Err(Error::Dimension(format!(
            "weight must be {n}×{n}, got {:?}",
            g.shape(),
            n = model.n()
        )));
    }
    let c_x = linalg::symmetrize(&(g * model.c_x() * g.transpose()));
    CovarianceModel::from_blocks(c_x, model.c_y().clone(), g * model.c_xy())
}

/// Minimizer of the weighted trace `tr(g'g C_err)` within the family `base`:
/// the base filter built for `(gX, Y)` and mapped back by `g^{-1}`.
pub fn weighted_filter(model: &CovarianceModel, g: &Mat, base: FilterKind, l: usize) -> Result<LinearFilter> {
    linalg::check_finite(g, "weight")?;
    let n = model.n();
    if g.shape() != (n, n) {
        return Err(Error::InvalidWeight(format!("expected {n}×{n}, got {:?}", g.shape())));
    }
    let lu = LU::new(g.clone());
    if !lu.is_invertible() || linalg::numerical_rank(g, RANK_TOL)? < n {
        return Err(Error::InvalidWeight("weight matrix is singular".into()));
    }
    let transformed = weighted_model(model, g)?;
    let cache = SpectralCache::new(&transformed)?;
    let inner = build(base, &cache, &transformed, l)?;
    let matrix = lu
        .solve(&inner.matrix)
        .ok_or_else(|| Error::InvalidWeight("weight matrix is singular".into()))?;
    Ok(LinearFilter {
        matrix,
        kind: base,
        weighted: true,
        l: inner.l,
        max_inverse_dim: inner.max_inverse_dim.max(n),
    })
}

/// `c_x^{-1/2}`: with this weight the weighted trace and the error-covariance
/// determinant share their minimizer.
pub fn det_optimal_weight(model: &CovarianceModel) -> Result<Mat> {
    linalg::inv_sqrt_spd(model.c_x(), None)
}
