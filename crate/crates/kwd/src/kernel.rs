//! Kernel evaluation, Gram matrices, centering operators, and the spectral
//! primitives (PSD square root, nuclear norm, product spectrum) the distance
//! modules are built on.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Relative tolerance below which eigenvalues / squared singular values are
/// treated as zero. Values in `[-tol*scale, tol*scale]` clamp to zero; more
/// negative values signal a non-PSD input.
pub const SPECTRAL_TOL: f64 = 1e-10;

/// Relative tolerance for symmetry checks.
pub const SYMMETRY_TOL: f64 = 1e-8;

/// Kernel family and parameters.
///
/// The RBF kernel is k(x, y) = exp(-gamma * ||x - y||^2). The linear kernel
/// k(x, y) = <x, y> makes the feature space coincide with input space, which
/// is what every finite-dimensional oracle in the test suites relies on.
#[derive(Debug, Clone, PartialEq)]
pub enum KernelSpec {
    Rbf { gamma: f64 },
    Linear,
    Polynomial { degree: f64, offset: f64 },
}

impl KernelSpec {
    /// RBF kernel with width parameter `gamma > 0`.
    pub fn rbf(gamma: f64) -> Result<Self> {
        if !(gamma > 0.0) || !gamma.is_finite() {
            return Err(Error::InvalidKernel(format!(
                "rbf gamma must be positive and finite, got {gamma}"
            )));
        }
        Ok(KernelSpec::Rbf { gamma })
    }

    /// Polynomial kernel (<x, y> + offset)^degree. PSD requires an integral
    /// degree >= 1 and offset >= 0.
    pub fn polynomial(degree: f64, offset: f64) -> Result<Self> {
        if !(degree >= 1.0) || !degree.is_finite() || degree.fract() != 0.0 {
            return Err(Error::InvalidKernel(format!(
                "polynomial degree must be a positive integer, got {degree}"
            )));
        }
        if !(offset >= 0.0) || !offset.is_finite() {
            return Err(Error::InvalidKernel(format!(
                "polynomial offset must be nonnegative, got {offset}"
            )));
        }
        Ok(KernelSpec::Polynomial { degree, offset })
    }

    /// Evaluate k(x, y) for two points of equal dimension.
    pub fn eval(&self, x: &[f64], y: &[f64]) -> f64 {
        match *self {
            KernelSpec::Rbf { gamma } => {
                let sq: f64 = x
                    .iter()
                    .zip(y.iter())
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum();
                (-gamma * sq).exp()
            }
            KernelSpec::Linear => x.iter().zip(y.iter()).map(|(a, b)| a * b).sum(),
            KernelSpec::Polynomial { degree, offset } => {
                let dot: f64 = x.iter().zip(y.iter()).map(|(a, b)| a * b).sum();
                (dot + offset).powi(degree as i32)
            }
        }
    }
}

/// A sample of n points with d features, optionally labeled by mixture
/// component.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    points: DMatrix<f64>,
    labels: Option<Vec<usize>>,
}

impl Dataset {
    /// Build a dataset from an n x d point matrix.
    pub fn new(points: DMatrix<f64>) -> Result<Self> {
        if points.nrows() == 0 {
            return Err(Error::Empty("dataset must contain at least one point"));
        }
        if points.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("dataset points"));
        }
        Ok(Dataset {
            points,
            labels: None,
        })
    }

    /// Build a labeled dataset; every distinct label must index a nonempty
    /// group, i.e. labels must be exactly 0..=max(labels).
    pub fn with_labels(points: DMatrix<f64>, labels: Vec<usize>) -> Result<Self> {
        if labels.len() != points.nrows() {
            return Err(Error::DimensionMismatch {
                left: points.nrows(),
                right: labels.len(),
            });
        }
        let mut ds = Self::new(points)?;
        let max = *labels.iter().max().expect("nonempty");
        for l in 0..=max {
            if !labels.contains(&l) {
                return Err(Error::EmptyGroup { label: l });
            }
        }
        ds.labels = Some(labels);
        Ok(ds)
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Empty("dataset must contain at least one point"));
        }
        let d = rows[0].len();
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::ShapeMismatch {
                rows: rows.len(),
                cols: d,
                expected: "rows of equal length".into(),
            });
        }
        Self::new(DMatrix::from_fn(rows.len(), d, |i, j| rows[i][j]))
    }

    /// 1-D convenience constructor.
    pub fn from_column(values: &[f64]) -> Result<Self> {
        Self::new(DMatrix::from_fn(values.len(), 1, |i, _| values[i]))
    }

    pub fn n(&self) -> usize {
        self.points.nrows()
    }

    pub fn dim(&self) -> usize {
        self.points.ncols()
    }

    pub fn points(&self) -> &DMatrix<f64> {
        &self.points
    }

    pub fn labels(&self) -> Option<&[usize]> {
        self.labels.as_deref()
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        self.points.row(i).iter().copied().collect()
    }

    /// Split a labeled dataset into one unlabeled dataset per label, ordered
    /// by label value.
    pub fn groups(&self) -> Result<Vec<Dataset>> {
        let labels = self
            .labels
            .as_ref()
            .ok_or(Error::Empty("dataset has no labels"))?;
        let max = *labels.iter().max().expect("nonempty");
        let mut out = Vec::with_capacity(max + 1);
        for l in 0..=max {
            let idx: Vec<usize> = (0..self.n()).filter(|&i| labels[i] == l).collect();
            if idx.is_empty() {
                return Err(Error::EmptyGroup { label: l });
            }
            let pts = DMatrix::from_fn(idx.len(), self.dim(), |i, j| self.points[(idx[i], j)]);
            out.push(Dataset {
                points: pts,
                labels: None,
            });
        }
        Ok(out)
    }

    /// Select a subset of rows (labels are carried along if present).
    pub fn select(&self, indices: &[usize]) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::Empty("selection must contain at least one point"));
        }
        let pts = DMatrix::from_fn(indices.len(), self.dim(), |i, j| {
            self.points[(indices[i], j)]
        });
        let labels = self
            .labels
            .as_ref()
            .map(|l| indices.iter().map(|&i| l[i]).collect());
        Ok(Dataset {
            points: pts,
            labels,
        })
    }

    /// Biased empirical mean and covariance (normalized by n, no Bessel
    /// correction).
    pub fn empirical_moments(&self) -> (DVector<f64>, DMatrix<f64>) {
        let n = self.n() as f64;
        let d = self.dim();
        let mean = DVector::from_fn(d, |j, _| self.points.column(j).sum() / n);
        let mut cov = DMatrix::zeros(d, d);
        for i in 0..self.n() {
            let x = self.points.row(i).transpose() - &mean;
            cov += &x * x.transpose();
        }
        cov /= n;
        (mean, cov)
    }
}

/// The centering operator J = (1/sqrt(n)) (I_n - s 1^T) with s = (1/n) 1,
/// so that JJ^T = (1/n)(I_n - (1/n) 1 1^T). Applying JJ^T subtracts the
/// mean and scales by 1/n, which is exactly the biased covariance
/// normalization.
#[derive(Debug, Clone)]
pub struct CenteringOperator {
    n: usize,
    j: DMatrix<f64>,
    s: DVector<f64>,
}

impl CenteringOperator {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Empty("centering operator needs n >= 1"));
        }
        let nf = n as f64;
        let scale = 1.0 / nf.sqrt();
        let j = DMatrix::from_fn(n, n, |i, k| {
            let delta = if i == k { 1.0 } else { 0.0 };
            scale * (delta - 1.0 / nf)
        });
        let s = DVector::from_element(n, 1.0 / nf);
        Ok(CenteringOperator { n, j, s })
    }

    pub fn size(&self) -> usize {
        self.n
    }

    /// The materialized J matrix (symmetric).
    pub fn j(&self) -> &DMatrix<f64> {
        &self.j
    }

    /// The rank-one mean vector s = (1/n) 1.
    pub fn s(&self) -> &DVector<f64> {
        &self.s
    }

    /// JJ^T = (1/n)(I - (1/n) 1 1^T).
    pub fn jjt(&self) -> DMatrix<f64> {
        &self.j * self.j.transpose()
    }
}

/// Construct the order-n centering operator (errors when n = 0).
pub fn centering(n: usize) -> Result<CenteringOperator> {
    CenteringOperator::new(n)
}

/// Gram matrix of kernel evaluations: entry (i, j) = k(a_i, b_j).
pub fn gram(a: &Dataset, b: &Dataset, spec: &KernelSpec) -> Result<DMatrix<f64>> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            left: a.dim(),
            right: b.dim(),
        });
    }
    let pa = a.points();
    let pb = b.points();
    let mut k = DMatrix::zeros(a.n(), b.n());
    for i in 0..a.n() {
        let xi: Vec<f64> = pa.row(i).iter().copied().collect();
        for j in 0..b.n() {
            let yj: Vec<f64> = pb.row(j).iter().copied().collect();
            k[(i, j)] = spec.eval(&xi, &yj);
        }
    }
    Ok(k)
}

fn check_finite(m: &DMatrix<f64>, context: &'static str) -> Result<()> {
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite(context));
    }
    Ok(())
}

/// Singular values of an arbitrary rectangular matrix, sorted descending.
pub fn singular_values(m: &DMatrix<f64>) -> Result<Vec<f64>> {
    check_finite(m, "singular value input")?;
    let svd = m
        .clone()
        .try_svd(false, false, f64::EPSILON, 0)
        .ok_or(Error::DecompositionFailed("SVD did not converge"))?;
    let mut sv: Vec<f64> = svd.singular_values.iter().copied().collect();
    sv.sort_by(|a, b| b.partial_cmp(a).expect("singular values are finite"));
    Ok(sv)
}

/// Nuclear norm: the sum of singular values.
///
/// This is the stable route to tr(K01 J1 J1^T K10 J0 J0^T)^{1/2}: with
/// B = J1^T K10 J0 the nonzero eigenvalues of that product equal the squared
/// singular values of B, so the trace of its square root is the nuclear norm
/// of B.
pub fn nuclear_norm(m: &DMatrix<f64>) -> Result<f64> {
    Ok(singular_values(m)?.iter().sum())
}

/// Symmetric eigendecomposition returning (eigenvalues, eigenvectors).
fn symmetric_eigen(m: &DMatrix<f64>) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let eig = m
        .clone()
        .try_symmetric_eigen(f64::EPSILON, 0)
        .ok_or(Error::DecompositionFailed("symmetric eigen did not converge"))?;
    Ok((eig.eigenvalues, eig.eigenvectors))
}

fn check_symmetric(m: &DMatrix<f64>) -> Result<()> {
    if !m.is_square() {
        return Err(Error::ShapeMismatch {
            rows: m.nrows(),
            cols: m.ncols(),
            expected: "square matrix".into(),
        });
    }
    let mut dev: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for i in 0..m.nrows() {
        for j in (i + 1)..m.ncols() {
            dev = dev.max((m[(i, j)] - m[(j, i)]).abs());
            scale = scale.max(m[(i, j)].abs()).max(m[(j, i)].abs());
        }
        scale = scale.max(m[(i, i)].abs());
    }
    if dev > SYMMETRY_TOL * scale.max(1.0) {
        return Err(Error::NotSymmetric { deviation: dev });
    }
    Ok(())
}

/// The unique PSD square root of a symmetric PSD matrix.
///
/// Eigenvalues in [-SPECTRAL_TOL*scale, 0) are clamped to zero; anything
/// more negative is rejected as a non-PSD input.
pub fn psd_sqrt(c: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    check_finite(c, "psd_sqrt input")?;
    check_symmetric(c)?;
    let (vals, vecs) = symmetric_eigen(c)?;
    let scale = vals.iter().fold(0.0_f64, |a, &v| a.max(v.abs()));
    let mut sq = DVector::zeros(vals.len());
    for (i, &v) in vals.iter().enumerate() {
        if v < -SPECTRAL_TOL * scale {
            return Err(Error::NotPsd { eigenvalue: v });
        }
        sq[i] = v.max(0.0).sqrt();
    }
    let root = &vecs * DMatrix::from_diagonal(&sq) * vecs.transpose();
    // Exact symmetry survives the recomposition only up to rounding.
    Ok(symmetrize(&root))
}

/// Average a nearly-symmetric matrix with its transpose.
pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    0.5 * (m + m.transpose())
}

/// Eigenvalues of a symmetric PSD matrix with the same clamping policy as
/// [`psd_sqrt`]: small negatives go to zero, larger ones are an error.
pub fn psd_eigenvalues(c: &DMatrix<f64>) -> Result<Vec<f64>> {
    check_finite(c, "psd_eigenvalues input")?;
    check_symmetric(c)?;
    let (vals, _) = symmetric_eigen(c)?;
    let scale = vals.iter().fold(0.0_f64, |a, &v| a.max(v.abs()));
    let mut out = Vec::with_capacity(vals.len());
    for &v in vals.iter() {
        if v < -SPECTRAL_TOL * scale {
            return Err(Error::NotPsd { eigenvalue: v });
        }
        out.push(v.max(0.0));
    }
    out.sort_by(|a, b| b.partial_cmp(a).expect("finite"));
    Ok(out)
}

/// Nonzero eigenvalues of the feature-space covariance product Sigma_0
/// Sigma_1, expressed purely through Gram matrices.
///
/// With S_i = Phi_i J_i the covariances factor as Sigma_i = S_i S_i^T, so the
/// nonzero spectrum of Sigma_1 Sigma_0 equals the squared singular values of
/// S_1^T S_0 = J_1^T K10 J_0. Values below SPECTRAL_TOL relative to the
/// largest are dropped; the all-constant Gram block therefore yields an
/// empty spectrum.
pub fn product_spectrum(
    k10: &DMatrix<f64>,
    j0: &CenteringOperator,
    j1: &CenteringOperator,
) -> Result<Vec<f64>> {
    if k10.nrows() != j1.size() || k10.ncols() != j0.size() {
        return Err(Error::ShapeMismatch {
            rows: k10.nrows(),
            cols: k10.ncols(),
            expected: format!("{}x{} (J1 size x J0 size)", j1.size(), j0.size()),
        });
    }
    let b = j1.j().transpose() * k10 * j0.j();
    let sv = singular_values(&b)?;
    let lambda: Vec<f64> = sv.iter().map(|s| s * s).collect();
    let scale = lambda.first().copied().unwrap_or(0.0);
    Ok(lambda
        .into_iter()
        .take_while(|&l| l > SPECTRAL_TOL * scale && l > 0.0)
        .collect())
}
