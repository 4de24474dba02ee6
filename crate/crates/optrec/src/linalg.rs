//! Dense real linear algebra for desk-scale symmetric problems.
//!
//! The solvers in this crate live entirely in low dimensions (a few dozen at
//! most), where a self-contained kernel beats a heavyweight dependency: we
//! control determinism, eigenvector sign conventions, and error reporting.
//!
//! * [`sym_eigen`] — full eigendecomposition by cyclic Jacobi rotations.
//!   Eigenvalues come back in ascending order; each eigenvector is
//!   sign-normalized so that its first component of magnitude above `1e-12`
//!   is positive. Two calls on identical input return bit-identical output.
//! * [`solve_spd`] — symmetric positive definite solve via the spectral
//!   decomposition, with one step of iterative refinement.
//! * [`inv_sqrt_psd`] — inverse square root of a positive definite matrix,
//!   used to re-orthonormalize observation maps.

use crate::error::{Error, Result};

/// Row-major dense matrix of `f64`.
#[derive(Clone, Debug, PartialEq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    /// Builds a matrix from row slices. Panics if the rows are ragged;
    /// callers that accept external data validate shapes first.
    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend_from_slice(row);
        }
        Mat {
            rows: r,
            cols: c,
            data,
        }
    }

    /// Builds an `n x k` matrix from `k` column slices of length `n`.
    pub fn from_cols(n: usize, cols: &[Vec<f64>]) -> Self {
        let mut m = Mat::zeros(n, cols.len());
        for (j, col) in cols.iter().enumerate() {
            assert_eq!(col.len(), n, "column length mismatch");
            for i in 0..n {
                m[(i, j)] = col[i];
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn set_col(&mut self, j: usize, v: &[f64]) {
        assert_eq!(v.len(), self.rows);
        for i in 0..self.rows {
            self[(i, j)] = v[i];
        }
    }

    pub fn transpose(&self) -> Mat {
        let mut t = Mat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matmul(&self, other: &Mat) -> Mat {
        assert_eq!(self.cols, other.rows, "inner dimensions differ");
        let mut out = Mat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, x.len(), "matvec length mismatch");
        (0..self.rows).map(|i| dot(self.row(i), x)).collect()
    }

    /// `self^T x` without forming the transpose.
    pub fn tr_matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(self.rows, x.len(), "tr_matvec length mismatch");
        let mut out = vec![0.0; self.cols];
        for i in 0..self.rows {
            let xi = x[i];
            if xi == 0.0 {
                continue;
            }
            for j in 0..self.cols {
                out[j] += self[(i, j)] * xi;
            }
        }
        out
    }

    pub fn scaled(&self, s: f64) -> Mat {
        let mut out = self.clone();
        for v in &mut out.data {
            *v *= s;
        }
        out
    }

    pub fn add(&self, other: &Mat) -> Mat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for (v, w) in out.data.iter_mut().zip(&other.data) {
            *v += w;
        }
        out
    }

    pub fn sub(&self, other: &Mat) -> Mat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for (v, w) in out.data.iter_mut().zip(&other.data) {
            *v -= w;
        }
        out
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |acc, v| acc.max(v.abs()))
    }

    /// `(self + self^T) / 2`, for products that are symmetric in exact
    /// arithmetic but carry rounding noise.
    pub fn symmetrized(&self) -> Mat {
        assert_eq!(self.rows, self.cols);
        let mut out = self.clone();
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                let avg = 0.5 * (self[(i, j)] + self[(j, i)]);
                out[(i, j)] = avg;
                out[(j, i)] = avg;
            }
        }
        out
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

impl std::ops::Index<(usize, usize)> for Mat {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Mat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Relative asymmetry allowed when wrapping a matrix as symmetric.
const SYM_REL_TOL: f64 = 1e-12;

/// A square matrix checked (or forced) to be symmetric.
#[derive(Clone, Debug)]
pub struct SymMatrix {
    mat: Mat,
}

impl SymMatrix {
    /// Wraps `mat`, rejecting it when `|m_ij - m_ji|` exceeds
    /// `1e-12 * max(1, max |entry|)` anywhere.
    pub fn new(mat: Mat) -> Result<Self> {
        if mat.rows() != mat.cols() {
            return Err(Error::Domain(format!(
                "symmetric matrix must be square, got {}x{}",
                mat.rows(),
                mat.cols()
            )));
        }
        let scale = mat.max_abs().max(1.0);
        let mut max_asym = 0.0f64;
        for i in 0..mat.rows() {
            for j in (i + 1)..mat.cols() {
                max_asym = max_asym.max((mat[(i, j)] - mat[(j, i)]).abs());
            }
        }
        if max_asym > SYM_REL_TOL * scale {
            return Err(Error::NotSymmetric { max_asym });
        }
        Ok(SymMatrix {
            mat: mat.symmetrized(),
        })
    }

    /// Averages `mat` with its transpose and wraps the result. For products
    /// like `A^T A` that are symmetric up to rounding.
    pub fn from_symmetrized(mat: Mat) -> Self {
        assert_eq!(mat.rows(), mat.cols());
        SymMatrix {
            mat: mat.symmetrized(),
        }
    }

    pub fn dim(&self) -> usize {
        self.mat.rows()
    }

    pub fn mat(&self) -> &Mat {
        &self.mat
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.mat[(i, j)]
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        self.mat.matvec(x)
    }

    /// `x^T M x`.
    pub fn quad(&self, x: &[f64]) -> f64 {
        dot(&self.mat.matvec(x), x)
    }
}

/// Full eigendecomposition of a symmetric matrix.
#[derive(Clone, Debug)]
pub struct Spectrum {
    /// Eigenvalues in ascending order.
    pub eigenvalues: Vec<f64>,
    /// Orthonormal eigenvectors as columns, in the same order.
    pub eigenvectors: Mat,
}

impl Spectrum {
    pub fn lambda_min(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn lambda_max(&self) -> f64 {
        *self.eigenvalues.last().unwrap()
    }

    /// Eigenvector for the smallest eigenvalue.
    pub fn min_vector(&self) -> Vec<f64> {
        self.eigenvectors.col(0)
    }
}

const MAX_EIGEN_DIM: usize = 64;
const MAX_JACOBI_SWEEPS: usize = 64;

/// Eigendecomposition by cyclic Jacobi rotations.
///
/// Converges quadratically for symmetric input and, unlike iterative
/// tridiagonal methods, computes eigenvectors to full accuracy without a
/// separate inverse-iteration pass. Intended for dimensions up to 64.
pub fn sym_eigen(m: &SymMatrix) -> Result<Spectrum> {
    let n = m.dim();
    if n == 0 {
        return Err(Error::Domain(
            "eigendecomposition of an empty matrix".into(),
        ));
    }
    if n > MAX_EIGEN_DIM {
        return Err(Error::Domain(format!(
            "eigendecomposition limited to dimension {MAX_EIGEN_DIM}, got {n}"
        )));
    }

    let mut a = m.mat.clone();
    let mut v = Mat::identity(n);
    let stop = 1e-15 * a.frobenius().max(f64::MIN_POSITIVE);

    for _sweep in 0..MAX_JACOBI_SWEEPS {
        let mut off = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                off += a[(i, j)] * a[(i, j)];
            }
        }
        if (2.0 * off).sqrt() <= stop {
            break;
        }
        for p in 0..n - 1 {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq.abs() <= f64::MIN_POSITIVE {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;

                // Rotate rows/columns p and q of `a`.
                let app = a[(p, p)];
                let aqq = a[(q, q)];
                a[(p, p)] = app - t * apq;
                a[(q, q)] = aqq + t * apq;
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;
                for k in 0..n {
                    if k != p && k != q {
                        let akp = a[(k, p)];
                        let akq = a[(k, q)];
                        a[(k, p)] = c * akp - s * akq;
                        a[(p, k)] = a[(k, p)];
                        a[(k, q)] = s * akp + c * akq;
                        a[(q, k)] = a[(k, q)];
                    }
                }
                // Accumulate the rotation into the eigenvector columns.
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }

    // Ascending eigenvalue order with a matching column permutation.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].partial_cmp(&a[(j, j)]).unwrap());

    let mut eigenvalues = Vec::with_capacity(n);
    let mut eigenvectors = Mat::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        eigenvalues.push(a[(src, src)]);
        let mut col = v.col(src);
        // Sign convention: first component with |x| > 1e-12 is positive.
        for &x in &col {
            if x.abs() > 1e-12 {
                if x < 0.0 {
                    for y in &mut col {
                        *y = -*y;
                    }
                }
                break;
            }
        }
        eigenvectors.set_col(dst, &col);
    }

    Ok(Spectrum {
        eigenvalues,
        eigenvectors,
    })
}

/// Relative eigenvalue floor below which a matrix counts as rank deficient.
const SPD_REL_TOL: f64 = 1e-12;

pub(crate) fn spd_spectrum(m: &SymMatrix, what: &str) -> Result<Spectrum> {
    let spec = sym_eigen(m)?;
    let lam_min = spec.lambda_min();
    let lam_max = spec.lambda_max();
    // NaN anywhere in the spectrum must count as deficient too.
    let spd = lam_max > 0.0 && lam_min > SPD_REL_TOL * lam_max;
    if !spd {
        return Err(Error::RankDeficient {
            lambda_min: lam_min,
            what: what.to_string(),
        });
    }
    Ok(spec)
}

/// Applies `f` to the spectrum: computes `Q f(D) Q^T x`.
pub(crate) fn spectral_apply(spec: &Spectrum, f: impl Fn(f64) -> f64, x: &[f64]) -> Vec<f64> {
    let q = &spec.eigenvectors;
    let mut coeffs = q.tr_matvec(x);
    for (c, &lam) in coeffs.iter_mut().zip(&spec.eigenvalues) {
        *c *= f(lam);
    }
    q.matvec(&coeffs)
}

/// Solves `M x = b` for symmetric positive definite `M`. `what` names the
/// matrix in the rank-deficiency error, so callers read which geometric
/// object degenerated rather than "a matrix was singular".
///
/// Definiteness is checked against `lambda_min > 1e-12 * lambda_max`; the
/// spectral solve is followed by one step of iterative refinement, which
/// keeps the residual at rounding level for the conditioning this crate
/// encounters.
pub fn solve_spd(m: &SymMatrix, b: &[f64], what: &str) -> Result<Vec<f64>> {
    if b.len() != m.dim() {
        return Err(Error::Domain(format!(
            "solve_spd: length {} does not match dimension {}",
            b.len(),
            m.dim()
        )));
    }
    let spec = spd_spectrum(m, what)?;
    let mut x = spectral_apply(&spec, |l| 1.0 / l, b);
    let mut r = b.to_vec();
    let mx = m.matvec(&x);
    for i in 0..r.len() {
        r[i] -= mx[i];
    }
    let corr = spectral_apply(&spec, |l| 1.0 / l, &r);
    for i in 0..x.len() {
        x[i] += corr[i];
    }
    Ok(x)
}

/// Golden-section minimization of a scalar function on `[lo, hi]`.
///
/// Assumes `f` is unimodal on the interval (the callers first localize the
/// minimum with a coarse grid, which makes that assumption safe). Returns
/// the final midpoint and its value. Non-finite values are treated as
/// `+inf`, so the search backs away from poles instead of chasing them.
pub(crate) fn golden_min(
    mut f: impl FnMut(f64) -> f64,
    lo: f64,
    hi: f64,
    iters: usize,
) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let guard = |v: f64| if v.is_finite() { v } else { f64::INFINITY };
    let mut a = lo;
    let mut b = hi;
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = guard(f(x1));
    let mut f2 = guard(f(x2));
    for _ in 0..iters {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = guard(f(x1));
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = guard(f(x2));
        }
    }
    let mid = 0.5 * (a + b);
    (mid, guard(f(mid)))
}

/// Inverse square root `M^{-1/2}` of a symmetric positive definite matrix.
pub fn inv_sqrt_psd(m: &SymMatrix) -> Result<SymMatrix> {
    let spec = spd_spectrum(
        m,
        "matrix has no inverse square root; observation functionals are linearly dependent",
    )?;
    let n = m.dim();
    let q = &spec.eigenvectors;
    let mut out = Mat::zeros(n, n);
    for k in 0..n {
        let w = spec.eigenvalues[k].sqrt().recip();
        for i in 0..n {
            let qik = q[(i, k)];
            if qik == 0.0 {
                continue;
            }
            for j in 0..n {
                out[(i, j)] += w * qik * q[(j, k)];
            }
        }
    }
    Ok(SymMatrix::from_symmetrized(out))
}
