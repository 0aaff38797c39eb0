//! Joint covariance model of `Z = [X; Y]`, empirical estimation, and
//! synthetic generators for desk-scale experiments.
//!
//! Block convention: X occupies the top `n` coordinates of every joint
//! vector and covariance, Y the bottom `m`. [`split_joint`] and
//! [`assemble_joint`] are the only places that index blocks.

use std::io::{Read, Write};
use std::str::FromStr;

use nalgebra::linalg::QR;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::linalg::{self, symmetrize};
use crate::{Error, Mat, Result};

const SYMMETRY_TOL: f64 = 1e-10;
/// Eigenvalues down to `-PSD_TOL · λ_max` are treated as rounding noise.
pub const PSD_TOL: f64 = 1e-10;

const MODEL_MAGIC: &[u8; 8] = b"WCLMMSE\0";
const MODEL_VERSION: u32 = 1;

pub(crate) fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Splits a joint `(n+m)×(n+m)` covariance into `(c_x, c_xy, c_y)`.
pub fn split_joint(c_z: &Mat, n: usize) -> (Mat, Mat, Mat) {
    let d = c_z.nrows();
    let m = d - n;
    (
        c_z.view((0, 0), (n, n)).into_owned(),
        c_z.view((0, n), (n, m)).into_owned(),
        c_z.view((n, n), (m, m)).into_owned(),
    )
}

/// Inverse of [`split_joint`]: `[[c_x, c_xy], [c_xy', c_y]]`.
pub fn assemble_joint(c_x: &Mat, c_xy: &Mat, c_y: &Mat) -> Mat {
    let (n, m) = (c_x.nrows(), c_y.nrows());
    let mut c_z = Mat::zeros(n + m, n + m);
    c_z.view_mut((0, 0), (n, n)).copy_from(c_x);
    c_z.view_mut((0, n), (n, m)).copy_from(c_xy);
    c_z.view_mut((n, 0), (m, n)).copy_from(&c_xy.transpose());
    c_z.view_mut((n, n), (m, m)).copy_from(c_y);
    c_z
}

fn check_symmetric(a: &Mat, what: &str) -> Result<()> {
    let scale = a.norm().max(f64::MIN_POSITIVE);
    if (a - a.transpose()).norm() > SYMMETRY_TOL * scale {
        return Err(Error::Model(format!("{what} is not symmetric")));
    }
    Ok(())
}

/// The covariance triple `(c_x, c_y, c_xy)` and the joint `c_z` assembled
/// from it.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceModel {
    c_x: Mat,
    c_y: Mat,
    c_xy: Mat,
    c_z: Mat,
}

impl CovarianceModel {
    pub fn from_blocks(c_x: Mat, c_y: Mat, c_xy: Mat) -> Result<Self> {
        let (n, m) = (c_x.nrows(), c_y.nrows());
        if n == 0 || m == 0 || !c_x.is_square() || !c_y.is_square() {
            return Err(Error::Dimension(format!(
                "c_x must be n×n and c_y m×m with n, m ≥ 1 (got {:?}, {:?})",
                c_x.shape(),
                c_y.shape()
            )));
        }
        if c_xy.shape() != (n, m) {
            return Err(Error::Dimension(format!(
                "c_xy must be {n}×{m}, got {:?}",
                c_xy.shape()
            )));
        }
        linalg::check_finite(&c_x, "c_x")?;
        linalg::check_finite(&c_y, "c_y")?;
        linalg::check_finite(&c_xy, "c_xy")?;
        check_symmetric(&c_x, "c_x")?;
        check_symmetric(&c_y, "c_y")?;
        let c_z = assemble_joint(&c_x, &c_xy, &c_y);
        Ok(Self { c_x, c_y, c_xy, c_z })
    }

    /// Partitions a joint covariance with X in the top `n` coordinates.
    pub fn from_joint(c_z: Mat, n: usize) -> Result<Self> {
        if !c_z.is_square() || n == 0 || n >= c_z.nrows() {
            return Err(Error::Dimension(format!(
                "joint covariance {:?} cannot hold n = {n} and m ≥ 1",
                c_z.shape()
            )));
        }
        linalg::check_finite(&c_z, "c_z")?;
        check_symmetric(&c_z, "c_z")?;
        let (c_x, c_xy, c_y) = split_joint(&c_z, n);
        Ok(Self { c_x, c_y, c_xy, c_z })
    }

    pub fn n(&self) -> usize {
        self.c_x.nrows()
    }

    pub fn m(&self) -> usize {
        self.c_y.nrows()
    }

    pub fn c_x(&self) -> &Mat {
        &self.c_x
    }

    pub fn c_y(&self) -> &Mat {
        &self.c_y
    }

    pub fn c_xy(&self) -> &Mat {
        &self.c_xy
    }

    pub fn c_z(&self) -> &Mat {
        &self.c_z
    }

    /// Fails unless the smallest eigenvalue of `c_z` is ≥ `-PSD_TOL · λ_max`.
    pub fn check_psd(&self) -> Result<()> {
        let eig = linalg::sym_eig(&self.c_z)?;
        let lmax = eig.values[0].max(0.0);
        let lmin = eig.values[eig.dim() - 1];
        if lmin < -PSD_TOL * lmax {
            return Err(Error::Model(format!(
                "joint covariance is not PSD: smallest eigenvalue {lmin:e}"
            )));
        }
        Ok(())
    }

    /// Restricts Y to its last `m` coordinates (the `m` most recent values
    /// for a time-series model). X is unchanged.
    pub fn with_recent_inputs(&self, m: usize) -> Result<Self> {
        if m == 0 || m > self.m() {
            return Err(Error::OutOfRange(format!(
                "input length {m} not in 1..={}",
                self.m()
            )));
        }
        let off = self.m() - m;
        Self::from_blocks(
            self.c_x.clone(),
            self.c_y.view((off, off), (m, m)).into_owned(),
            self.c_xy.view((0, off), (self.n(), m)).into_owned(),
        )
    }

    /// Binary model file: 8-byte magic, little-endian `u32` version, `n`, `m`,
    /// then `c_z` row-major as little-endian `f64`.
    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(MODEL_MAGIC)?;
        w.write_all(&MODEL_VERSION.to_le_bytes())?;
        w.write_all(&(self.n() as u32).to_le_bytes())?;
        w.write_all(&(self.m() as u32).to_le_bytes())?;
        let d = self.n() + self.m();
        for i in 0..d {
            for j in 0..d {
                w.write_all(&self.c_z[(i, j)].to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != MODEL_MAGIC {
            return Err(Error::Model("not a model file (bad magic)".into()));
        }
        let mut word = [0u8; 4];
        let mut next_u32 = |r: &mut R| -> Result<u32> {
            r.read_exact(&mut word)?;
            Ok(u32::from_le_bytes(word))
        };
        let version = next_u32(&mut r)?;
        if version != MODEL_VERSION {
            return Err(Error::Model(format!("unsupported model version {version}")));
        }
        let n = next_u32(&mut r)? as usize;
        let m = next_u32(&mut r)? as usize;
        let d = n + m;
        let mut buf = [0u8; 8];
        let mut data = Vec::with_capacity(d * d);
        for _ in 0..d * d {
            r.read_exact(&mut buf)?;
            data.push(f64::from_le_bytes(buf));
        }
        Self::from_joint(Mat::from_row_slice(d, d, &data), n)
    }

    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        let f = std::fs::File::create(path)?;
        let mut w = std::io::BufWriter::new(f);
        self.write_to(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let f = std::fs::File::open(path)?;
        Self::read_from(std::io::BufReader::new(f))
    }
}

/// Disjoint train/test index sets over the samples of a [`SampleSet`].
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Partition {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Mean-subtracted joint data vectors `z_i = [x_i; y_i]`, stored as the
/// columns of a `(n+m)×K` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    n: usize,
    m: usize,
    data: Mat,
    mean: f64,
    partition: Partition,
}

impl SampleSet {
    /// All samples start in the training partition.
    pub fn new(n: usize, data: Mat, mean: f64) -> Result<Self> {
        if n == 0 || n >= data.nrows() {
            return Err(Error::Dimension(format!(
                "sample length {} cannot hold n = {n} and m ≥ 1",
                data.nrows()
            )));
        }
        let m = data.nrows() - n;
        let partition = Partition {
            train: (0..data.ncols()).collect(),
            test: Vec::new(),
        };
        Ok(Self {
            n,
            m,
            data,
            mean,
            partition,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn len(&self) -> usize {
        self.data.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.data.ncols() == 0
    }

    /// Scalar mean that was subtracted from every entry.
    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn data(&self) -> &Mat {
        &self.data
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn set_partition(&mut self, partition: Partition) -> Result<()> {
        let k = self.len();
        let mut seen = vec![false; k];
        for &i in partition.train.iter().chain(&partition.test) {
            if i >= k {
                return Err(Error::OutOfRange(format!("sample index {i} ≥ {k}")));
            }
            if seen[i] {
                return Err(Error::Config(format!(
                    "sample index {i} appears twice in the partition"
                )));
            }
            seen[i] = true;
        }
        self.partition = partition;
        Ok(())
    }

    /// Subtracts `delta` from every entry and adds it to the stored mean.
    pub(crate) fn shift_mean(&mut self, delta: f64) {
        self.data.add_scalar_mut(-delta);
        self.mean += delta;
    }

    fn gather(&self, idx: &[usize]) -> Mat {
        Mat::from_fn(self.data.nrows(), idx.len(), |r, c| self.data[(r, idx[c])])
    }

    /// Training samples as columns.
    pub fn train_matrix(&self) -> Mat {
        self.gather(&self.partition.train)
    }

    /// Test samples as columns.
    pub fn test_matrix(&self) -> Mat {
        self.gather(&self.partition.test)
    }
}

/// Empirical covariance `Σ z_i z_i' / (K − 1)` of mean-subtracted samples
/// (the columns of `samples`), partitioned with X in the top `n` rows.
pub fn estimate_covariance(samples: &Mat, n: usize) -> Result<CovarianceModel> {
    let k = samples.ncols();
    if k < 2 {
        return Err(Error::InsufficientData(format!(
            "covariance needs at least 2 samples, got {k}"
        )));
    }
    linalg::check_finite(samples, "samples")?;
    let c_z = symmetrize(&(samples * samples.transpose())) / (k as f64 - 1.0);
    CovarianceModel::from_joint(c_z, n)
}

/// Same as [`estimate_covariance`] for a list of equal-length vectors.
pub fn estimate_covariance_from_vectors(samples: &[crate::Vector], n: usize) -> Result<CovarianceModel> {
    let d = samples.first().map_or(0, |s| s.len());
    if let Some(bad) = samples.iter().find(|s| s.len() != d) {
        return Err(Error::Dimension(format!(
            "sample lengths differ: {d} vs {}",
            bad.len()
        )));
    }
    let data = Mat::from_fn(d, samples.len(), |r, c| samples[c][r]);
    estimate_covariance(&data, n)
}

/// Eigenvalue profile for [`synthetic_model`].
#[derive(Debug, Clone, PartialEq)]
pub enum Spectrum {
    /// `λ_i = a` for every i.
    Constant(f64),
    /// `λ_i = a · r^i`, i = 0, 1, ...
    Geometric { a: f64, r: f64 },
    Explicit(Vec<f64>),
}

impl Spectrum {
    pub fn values(&self, len: usize) -> Vec<f64> {
        match self {
            Spectrum::Constant(a) => vec![*a; len],
            Spectrum::Geometric { a, r } => (0..len).map(|i| a * r.powi(i as i32)).collect(),
            Spectrum::Explicit(v) => v.clone(),
        }
    }
}

impl FromStr for Spectrum {
    type Err = Error;

    /// `geometric:a,r`, `constant:a`, or `explicit:l1,l2,...`.
    fn from_str(s: &str) -> Result<Self> {
        let (kind, args) = s
            .split_once(':')
            .ok_or_else(|| Error::Config(format!("spectrum `{s}` needs the form kind:args")))?;
        let nums = args
            .split(',')
            .map(|t| t.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::Config(format!("spectrum `{s}`: {e}")))?;
        match (kind, nums.as_slice()) {
            ("geometric", [a, r]) => Ok(Spectrum::Geometric { a: *a, r: *r }),
            ("constant", [a]) => Ok(Spectrum::Constant(*a)),
            ("explicit", v) if !v.is_empty() => Ok(Spectrum::Explicit(v.to_vec())),
            _ => Err(Error::Config(format!("unrecognized spectrum `{s}`"))),
        }
    }
}

/// Haar-like random orthogonal matrix: QR of a Gaussian matrix with the
/// signs of `R`'s diagonal folded into `Q`.
pub fn random_orthogonal(dim: usize, seed: u64) -> Mat {
    let mut rng = seeded_rng(seed);
    let g = Mat::from_fn(dim, dim, |_, _| StandardNormal.sample(&mut rng));
    let qr = QR::new(g);
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..dim {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// Synthetic joint covariance `V_Z S_Z V_Z'` with a seeded random orthogonal
/// `V_Z` and the requested eigenvalues, partitioned into blocks.
///
/// A constant spectrum yields exactly `a·I` (the rotation is skipped).
pub fn synthetic_model(n: usize, m: usize, spectrum: &Spectrum, seed: u64) -> Result<CovarianceModel> {
    if n == 0 || m == 0 {
        return Err(Error::Dimension("n and m must be at least 1".into()));
    }
    let d = n + m;
    let values = spectrum.values(d);
    if values.len() != d {
        return Err(Error::InvalidSpectrum(format!(
            "expected {d} eigenvalues, got {}",
            values.len()
        )));
    }
    if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| !(**v > 0.0 && v.is_finite())) {
        return Err(Error::InvalidSpectrum(format!(
            "eigenvalue #{i} = {v} is not positive"
        )));
    }
    let c_z = if values.iter().all(|&v| v == values[0]) {
        Mat::identity(d, d) * values[0]
    } else {
        let v = random_orthogonal(d, seed);
        let mut vs = v.clone();
        for (j, mut col) in vs.column_iter_mut().enumerate() {
            col *= values[j];
        }
        symmetrize(&(vs * v.transpose()))
    };
    CovarianceModel::from_joint(c_z, n)
}

/// `k` i.i.d. zero-mean Gaussian joint vectors with covariance `c_z`,
/// drawn as `c_z^{1/2} w` with standard-normal `w`.
pub fn sample_from_model(model: &CovarianceModel, k: usize, seed: u64) -> Result<SampleSet> {
    let root = linalg::sqrt_psd(model.c_z(), PSD_TOL)?;
    let d = model.n() + model.m();
    let mut rng = seeded_rng(seed);
    let w = Mat::from_fn(d, k, |_, _| StandardNormal.sample(&mut rng));
    SampleSet::new(model.n(), root * w, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Vector;

    #[test]
    fn two_sample_covariance() {
        let s = vec![Vector::from_vec(vec![1.0, 0.5]), Vector::from_vec(vec![-1.0, -0.5])];
        let model = estimate_covariance_from_vectors(&s, 1).unwrap();
        assert_eq!(model.c_x()[(0, 0)], 2.0);
        assert_eq!(model.c_xy()[(0, 0)], 1.0);
        assert_eq!(model.c_y()[(0, 0)], 0.5);
    }

    #[test]
    fn one_dim_two_samples_gives_two() {
        // the joint vector has length 1: only the raw c_z arithmetic applies
        let data = Mat::from_row_slice(1, 2, &[1.0, -1.0]);
        let c_z = symmetrize(&(&data * data.transpose())) / 1.0;
        assert_eq!(c_z[(0, 0)], 2.0);
    }

    #[test]
    fn zero_samples_give_zero_covariance() {
        let model = estimate_covariance(&Mat::zeros(3, 5), 1).unwrap();
        assert_eq!(model.c_z(), &Mat::zeros(3, 3));
    }

    #[test]
    fn covariance_errors() {
        assert!(matches!(
            estimate_covariance(&Mat::zeros(3, 1), 1),
            Err(Error::InsufficientData(_))
        ));
        let s = vec![Vector::zeros(3), Vector::zeros(2)];
        assert!(matches!(
            estimate_covariance_from_vectors(&s, 1),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn estimate_is_exactly_symmetric_and_blocks_round_trip() {
        let set = sample_from_model(
            &synthetic_model(2, 3, &Spectrum::Geometric { a: 2.0, r: 0.7 }, 1).unwrap(),
            50,
            2,
        )
        .unwrap();
        let model = estimate_covariance(set.data(), 2).unwrap();
        assert_eq!(model.c_z(), &model.c_z().transpose());
        let (cx, cxy, cy) = split_joint(model.c_z(), 2);
        assert_eq!(&assemble_joint(&cx, &cxy, &cy), model.c_z());
    }

    #[test]
    fn monte_carlo_covariance_within_standard_errors() {
        let truth = synthetic_model(1, 3, &Spectrum::Explicit(vec![4.0, 2.0, 1.0, 0.5]), 3).unwrap();
        let k = 1000;
        let set = sample_from_model(&truth, k, 4).unwrap();
        let est = estimate_covariance(set.data(), 1).unwrap();
        let c = truth.c_z();
        for i in 0..4 {
            for j in 0..4 {
                // var(z_i z_j) = c_ii c_jj + c_ij² for Gaussian z
                let se = ((c[(i, i)] * c[(j, j)] + c[(i, j)].powi(2)) / k as f64).sqrt();
                let err = (est.c_z()[(i, j)] - c[(i, j)]).abs();
                assert!(err <= 5.0 * se, "entry ({i},{j}): err {err} > 5·{se}");
            }
        }
    }

    #[test]
    fn isotropic_synthetic_model() {
        let model = synthetic_model(2, 3, &Spectrum::Constant(1.0), 9).unwrap();
        assert_eq!(model.c_z(), &Mat::identity(5, 5));
        assert_eq!(model.c_xy(), &Mat::zeros(2, 3));
    }

    #[test]
    fn synthetic_is_reproducible_per_seed() {
        let spec = Spectrum::Geometric { a: 1.0, r: 0.5 };
        let a = synthetic_model(2, 4, &spec, 42).unwrap();
        let b = synthetic_model(2, 4, &spec, 42).unwrap();
        assert_eq!(a, b);
        let ca = linalg::condition_number(a.c_y()).unwrap();
        let cb = linalg::condition_number(b.c_y()).unwrap();
        assert!(ca.is_finite());
        assert_eq!(ca.to_bits(), cb.to_bits());
        assert_ne!(a, synthetic_model(2, 4, &spec, 43).unwrap());
    }

    #[test]
    fn faster_decay_is_worse_conditioned() {
        let fast = synthetic_model(2, 4, &Spectrum::Geometric { a: 1.0, r: 0.1 }, 5).unwrap();
        let slow = synthetic_model(2, 4, &Spectrum::Geometric { a: 1.0, r: 0.9 }, 5).unwrap();
        assert!(
            linalg::condition_number(fast.c_y()).unwrap()
                > linalg::condition_number(slow.c_y()).unwrap()
        );
    }

    #[test]
    fn synthetic_spectrum_is_reproduced() {
        let spec = Spectrum::Geometric { a: 3.0, r: 0.8 };
        let model = synthetic_model(3, 5, &spec, 17).unwrap();
        let eig = linalg::sym_eig(model.c_z()).unwrap();
        for (got, want) in eig.values.iter().zip(spec.values(8)) {
            assert!((got - want).abs() <= 1e-10 * want);
        }
    }

    #[test]
    fn invalid_spectrum_rejected() {
        let bad = Spectrum::Explicit(vec![1.0, 0.0, 1.0]);
        assert!(matches!(
            synthetic_model(1, 2, &bad, 0),
            Err(Error::InvalidSpectrum(_))
        ));
        assert!(matches!(
            synthetic_model(1, 2, &Spectrum::Explicit(vec![1.0]), 0),
            Err(Error::InvalidSpectrum(_))
        ));
    }

    #[test]
    fn spectrum_parsing() {
        assert_eq!(
            "geometric:2,0.5".parse::<Spectrum>().unwrap(),
            Spectrum::Geometric { a: 2.0, r: 0.5 }
        );
        assert_eq!("constant:1".parse::<Spectrum>().unwrap(), Spectrum::Constant(1.0));
        assert!("geometric:1".parse::<Spectrum>().is_err());
        assert!("nope".parse::<Spectrum>().is_err());
    }

    #[test]
    fn sampling_edge_cases() {
        let model = synthetic_model(1, 2, &Spectrum::Constant(1.0), 0).unwrap();
        assert!(sample_from_model(&model, 0, 1).unwrap().is_empty());
        let a = sample_from_model(&model, 20, 5).unwrap();
        let b = sample_from_model(&model, 20, 5).unwrap();
        let bits = |s: &SampleSet| s.data().iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a), bits(&b));
    }

    #[test]
    fn identity_samples_estimate_identity() {
        let model = synthetic_model(1, 2, &Spectrum::Constant(1.0), 0).unwrap();
        let k = 20_000;
        let set = sample_from_model(&model, k, 8).unwrap();
        let est = estimate_covariance(set.data(), 1).unwrap();
        // entry standard error ≤ sqrt(2/k)
        let se = (2.0 / k as f64).sqrt();
        assert!((est.c_z() - Mat::identity(3, 3)).amax() <= 5.0 * se);
    }

    #[test]
    fn non_psd_model_rejected_for_sampling() {
        let c_z = Mat::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        let model = CovarianceModel::from_joint(c_z, 1).unwrap();
        assert!(model.check_psd().is_err());
        assert!(matches!(sample_from_model(&model, 3, 0), Err(Error::Model(_))));
    }

    #[test]
    fn model_file_round_trip() {
        let model = synthetic_model(2, 3, &Spectrum::Geometric { a: 1.0, r: 0.6 }, 4).unwrap();
        let mut buf = Vec::new();
        model.write_to(&mut buf).unwrap();
        assert_eq!(buf.len(), 8 + 12 + 25 * 8);
        assert_eq!(CovarianceModel::read_from(buf.as_slice()).unwrap(), model);
        buf[0] = b'X';
        assert!(CovarianceModel::read_from(buf.as_slice()).is_err());
    }

    #[test]
    fn recent_inputs_restriction() {
        let model = synthetic_model(1, 4, &Spectrum::Geometric { a: 1.0, r: 0.6 }, 4).unwrap();
        let sub = model.with_recent_inputs(2).unwrap();
        assert_eq!(sub.m(), 2);
        assert_eq!(sub.c_y()[(0, 0)], model.c_y()[(2, 2)]);
        assert_eq!(sub.c_xy()[(0, 1)], model.c_xy()[(0, 3)]);
        assert!(model.with_recent_inputs(5).is_err());
    }

    #[test]
    fn partition_validation() {
        let mut set = SampleSet::new(1, Mat::zeros(3, 4), 0.0).unwrap();
        assert!(set
            .set_partition(Partition { train: vec![0, 1], test: vec![1] })
            .is_err());
        assert!(set
            .set_partition(Partition { train: vec![0, 1], test: vec![9] })
            .is_err());
        set.set_partition(Partition { train: vec![0, 2], test: vec![3] }).unwrap();
        assert_eq!(set.train_matrix().ncols(), 2);
        assert_eq!(set.test_matrix().ncols(), 1);
    }
}
