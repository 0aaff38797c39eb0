//! Dense real linear-algebra kernels.
//!
//! Every routine here is a pure function of its inputs. Eigen- and singular
//! vectors are returned in descending order of their values and with a fixed
//! sign convention (largest-magnitude entry positive) so that repeated runs on
//! the same bits produce the same output.

use nalgebra::linalg::{Cholesky, SymmetricEigen, LU, SVD};

use crate::{Error, Mat, Result, Vector};

/// Default singularity floor, relative to the largest eigenvalue.
pub const DEFAULT_RELATIVE_FLOOR: f64 = 1e-12;

/// Eigendecomposition of a symmetric matrix, values descending.
#[derive(Debug, Clone, PartialEq)]
pub struct SymEig {
    pub values: Vector,
    /// Orthonormal columns aligned with `values`.
    pub vectors: Mat,
}

impl SymEig {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// `V diag(f(λ)) V'`.
    pub fn compose<F: Fn(f64) -> f64>(&self, f: F) -> Mat {
        let mut scaled = self.vectors.clone();
        for (j, mut col) in scaled.column_iter_mut().enumerate() {
            col *= f(self.values[j]);
        }
        &scaled * self.vectors.transpose()
    }
}

/// Thin singular value decomposition `A = U diag(σ) V'`, `σ` descending.
#[derive(Debug, Clone, PartialEq)]
pub struct Svd {
    pub u: Mat,
    pub singular_values: Vector,
    pub v: Mat,
}

impl Svd {
    pub fn rank_count(&self) -> usize {
        self.singular_values.len()
    }

    /// Rank-`k` reconstruction `U_k diag(σ_k) V_k'`.
    pub fn truncated(&self, k: usize) -> Mat {
        let k = k.min(self.rank_count());
        let mut us = self.u.columns(0, k).into_owned();
        for (j, mut col) in us.column_iter_mut().enumerate() {
            col *= self.singular_values[j];
        }
        us * self.v.columns(0, k).transpose()
    }
}

/// Submultiplicative norms offered by the scaling diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatrixNorm {
    #[default]
    Nuclear,
    Frobenius,
}

impl MatrixNorm {
    pub fn eval(self, a: &Mat) -> Result<f64> {
        match self {
            MatrixNorm::Nuclear => nuclear_norm(a),
            MatrixNorm::Frobenius => {
                check_finite(a, "matrix")?;
                Ok(a.norm())
            }
        }
    }
}

impl std::str::FromStr for MatrixNorm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "nuclear" => Ok(MatrixNorm::Nuclear),
            "frobenius" | "fro" => Ok(MatrixNorm::Frobenius),
            other => Err(Error::Config(format!("unknown norm `{other}`"))),
        }
    }
}

pub(crate) fn check_finite(a: &Mat, what: &'static str) -> Result<()> {
    if a.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}

fn check_square(a: &Mat, what: &str) -> Result<()> {
    if a.is_square() {
        Ok(())
    } else {
        Err(Error::Dimension(format!(
            "{what} must be square, got {}x{}",
            a.nrows(),
            a.ncols()
        )))
    }
}

/// `(A + A') / 2`.
pub fn symmetrize(a: &Mat) -> Mat {
    (a + a.transpose()) * 0.5
}

/// Flip each column so that its largest-magnitude entry is positive.
/// Ties on magnitude resolve to the first index.
pub fn normalize_column_signs(v: &mut Mat) {
    for mut col in v.column_iter_mut() {
        let mut best = 0usize;
        let mut best_abs = -1.0;
        for (i, x) in col.iter().enumerate() {
            if x.abs() > best_abs {
                best_abs = x.abs();
                best = i;
            }
        }
        if col.len() > 0 && col[best] < 0.0 {
            col.neg_mut();
        }
    }
}

fn descending_order(values: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    // stable: equal values keep backend order
    idx.sort_by(|&i, &j| values[j].total_cmp(&values[i]));
    idx
}

/// Symmetric eigendecomposition of `(A + A')/2`, values descending.
pub fn sym_eig(a: &Mat) -> Result<SymEig> {
    check_square(a, "eigendecomposition input")?;
    check_finite(a, "eigendecomposition input")?;
    let n = a.nrows();
    if n == 0 {
        return Ok(SymEig {
            values: Vector::zeros(0),
            vectors: Mat::zeros(0, 0),
        });
    }
    let eig = SymmetricEigen::new(symmetrize(a));
    let order = descending_order(eig.eigenvalues.as_slice());
    let values = Vector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut vectors = Mat::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    normalize_column_signs(&mut vectors);
    Ok(SymEig { values, vectors })
}

/// Thin SVD with `min(rows, cols)` triplets, singular values descending.
pub fn svd(a: &Mat) -> Result<Svd> {
    check_finite(a, "SVD input")?;
    let (rows, cols) = a.shape();
    let r = rows.min(cols);
    if r == 0 {
        return Ok(Svd {
            u: Mat::zeros(rows, 0),
            singular_values: Vector::zeros(0),
            v: Mat::zeros(cols, 0),
        });
    }
    let dec = SVD::new(a.clone(), true, true);
    let u_raw = dec.u.expect("requested U");
    let vt_raw = dec.v_t.expect("requested V'");
    let order = descending_order(dec.singular_values.as_slice());
    let singular_values = Vector::from_iterator(r, order.iter().map(|&i| dec.singular_values[i]));
    let mut u = Mat::from_fn(rows, r, |i, c| u_raw[(i, order[c])]);
    let mut v = Mat::from_fn(cols, r, |i, c| vt_raw[(order[c], i)]);
    // sign convention on V, carried over to U so the product is unchanged
    for c in 0..r {
        let col = v.column(c);
        let (mut best, mut best_abs) = (0usize, -1.0);
        for (i, x) in col.iter().enumerate() {
            if x.abs() > best_abs {
                best_abs = x.abs();
                best = i;
            }
        }
        if v[(best, c)] < 0.0 {
            v.column_mut(c).neg_mut();
            u.column_mut(c).neg_mut();
        }
    }
    Ok(Svd {
        u,
        singular_values,
        v,
    })
}

/// Numerical rank: singular values above `rel_tol · σ_max`.
pub fn numerical_rank(a: &Mat, rel_tol: f64) -> Result<usize> {
    let s = svd(a)?;
    let smax = s.singular_values.iter().copied().fold(0.0, f64::max);
    if smax == 0.0 {
        return Ok(0);
    }
    Ok(s.singular_values.iter().filter(|&&x| x > rel_tol * smax).count())
}

fn default_floor(lambda_max: f64) -> f64 {
    DEFAULT_RELATIVE_FLOOR * lambda_max.max(0.0)
}

fn spectrum_condition(values: &Vector) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    if min <= 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Inverse square root `V diag(λ^{-1/2}) V'` of a symmetric positive definite
/// matrix. `floor = None` uses `1e-12 · λ_max`; any eigenvalue at or below the
/// floor is reported as a [`Error::Singular`].
pub fn inv_sqrt_spd(a: &Mat, floor: Option<f64>) -> Result<Mat> {
    let eig = sym_eig(a)?;
    if eig.dim() == 0 {
        return Ok(Mat::zeros(0, 0));
    }
    let floor = floor.unwrap_or_else(|| default_floor(eig.values[0]));
    if let Some(index) = eig.values.iter().position(|&l| l <= floor) {
        return Err(Error::Singular {
            index,
            value: eig.values[index],
            floor,
            condition: spectrum_condition(&eig.values),
        });
    }
    Ok(symmetrize(&eig.compose(|l| 1.0 / l.sqrt())))
}

/// Square root of a symmetric PSD matrix, clamping eigenvalues within
/// `-tol · λ_max` of zero. More negative eigenvalues are a model error.
pub fn sqrt_psd(a: &Mat, tol: f64) -> Result<Mat> {
    let eig = sym_eig(a)?;
    if eig.dim() == 0 {
        return Ok(Mat::zeros(0, 0));
    }
    let lmax = eig.values[0].max(0.0);
    let lmin = eig.values[eig.dim() - 1];
    if lmin < -tol * lmax {
        return Err(Error::Model(format!(
            "matrix is not PSD: smallest eigenvalue {lmin:e} below -{tol:e}·{lmax:e}"
        )));
    }
    Ok(eig.compose(|l| l.max(0.0).sqrt()))
}

/// `λ_max / λ_min` of a symmetric PSD matrix; `+∞` when `λ_min ≤ 0`.
pub fn condition_number(a: &Mat) -> Result<f64> {
    let eig = sym_eig(a)?;
    if eig.dim() == 0 || eig.values.iter().all(|&l| l == 0.0) {
        return Err(Error::UndefinedCondition);
    }
    Ok(spectrum_condition(&eig.values))
}

fn singular_error(a: &Mat) -> Error {
    match sym_eig(a) {
        Ok(eig) if eig.dim() > 0 => {
            let index = eig.dim() - 1;
            Error::Singular {
                index,
                value: eig.values[index],
                floor: default_floor(eig.values[0]),
                condition: spectrum_condition(&eig.values),
            }
        }
        Ok(_) => Error::Dimension("empty system".into()),
        Err(e) => e,
    }
}

/// Solves `A X = B` for symmetric `A` without forming `A^{-1}`.
///
/// Cholesky is tried first. When it breaks down (an ill-conditioned empirical
/// covariance can be slightly indefinite in floating point) the solve falls
/// back to LU with partial pivoting, so the result carries whatever error
/// amplification the conditioning implies. Only an exactly singular pivot or
/// a non-finite result is reported as [`Error::Singular`].
pub fn solve_spd(a: &Mat, b: &Mat) -> Result<Mat> {
    check_square(a, "system matrix")?;
    if a.nrows() != b.nrows() {
        return Err(Error::Dimension(format!(
            "system is {}x{} but right-hand side has {} rows",
            a.nrows(),
            a.ncols(),
            b.nrows()
        )));
    }
    check_finite(a, "system matrix")?;
    check_finite(b, "right-hand side")?;
    if a.nrows() == 0 {
        return Ok(b.clone());
    }
    let sym = symmetrize(a);
    let x = match Cholesky::new(sym.clone()) {
        Some(ch) => ch.solve(b),
        None => LU::new(sym.clone())
            .solve(b)
            .ok_or_else(|| singular_error(&sym))?,
    };
    if x.iter().all(|v| v.is_finite()) {
        Ok(x)
    } else {
        Err(singular_error(&sym))
    }
}

/// Records the largest linear system solved while building a filter.
///
/// Filters route every `(·)^{-1}` through [`InverseAudit::solve_spd`], so
/// `max_dim` certifies the largest inverse the construction needed.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct InverseAudit {
    max_dim: usize,
}

impl InverseAudit {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn max_dim(&self) -> usize {
        self.max_dim
    }

    pub fn record(&mut self, dim: usize) {
        self.max_dim = self.max_dim.max(dim);
    }

    pub fn solve_spd(&mut self, a: &Mat, b: &Mat) -> Result<Mat> {
        self.record(a.nrows());
        solve_spd(a, b)
    }

    pub fn inv_sqrt_spd(&mut self, a: &Mat, floor: Option<f64>) -> Result<Mat> {
        self.record(a.nrows());
        inv_sqrt_spd(a, floor)
    }
}

/// Sum of singular values.
pub fn nuclear_norm(a: &Mat) -> Result<f64> {
    Ok(svd(a)?.singular_values.sum())
}

/// Determinant of a symmetric PSD matrix as the product of its eigenvalues.
/// Eigenvalues within `-tol · λ_max` of zero are clamped to zero.
pub fn psd_determinant(a: &Mat, tol: f64) -> Result<f64> {
    let eig = sym_eig(a)?;
    if eig.dim() == 0 {
        return Ok(1.0);
    }
    let lmax = eig.values[0].max(0.0);
    let lmin = eig.values[eig.dim() - 1];
    if lmin < -tol * lmax {
        return Err(Error::Model(format!(
            "error covariance is not PSD: eigenvalue {lmin:e}"
        )));
    }
    Ok(eig.values.iter().map(|&l| l.max(0.0)).product())
}
