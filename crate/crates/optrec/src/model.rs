//! Problem data and its derived geometry.
//!
//! An instance pairs an observation map `Lambda` (one functional per row)
//! with an approximation space `V` (one basis vector per column of
//! `v_basis`), an approximability budget `epsilon`, an observation error
//! budget `eta`, and the observed data `y`. Every solver consumes the
//! [`Geometry`] produced by [`validate`], which caches the projector onto
//! the orthogonal complement of `V` and related products.

use crate::error::{Error, Result};
use crate::linalg::{self, Mat, SymMatrix};

/// One recovery problem: observations, approximation space, budgets, data.
#[derive(Clone, Debug)]
pub struct ProblemInstance {
    /// `m x N`; row `i` is the Riesz representer of the i-th observation.
    pub lambda: Mat,
    /// `N x n`; column `j` is the j-th basis vector of `V`. May have zero
    /// columns, which means `V = {0}`.
    pub v_basis: Mat,
    /// Approximability budget: elements satisfy `dist(f, V) <= epsilon`.
    pub epsilon: f64,
    /// Observation error budget in the Euclidean norm.
    pub eta: f64,
    /// Observed data, length `m`.
    pub y: Vec<f64>,
}

impl ProblemInstance {
    pub fn ambient_dim(&self) -> usize {
        self.lambda.cols()
    }

    pub fn n_obs(&self) -> usize {
        self.lambda.rows()
    }

    pub fn subspace_dim(&self) -> usize {
        self.v_basis.cols()
    }

    /// Parses the instance JSON object with keys `lambda`, `v_basis`,
    /// `epsilon`, `eta`, `y`. Errors name the offending key.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| Error::Parse(format!("not valid JSON: {e}")))?;
        let obj = value
            .as_object()
            .ok_or_else(|| Error::Parse("top level must be a JSON object".into()))?;

        for key in obj.keys() {
            if !matches!(key.as_str(), "lambda" | "v_basis" | "epsilon" | "eta" | "y") {
                return Err(Error::Parse(format!("unknown key \"{key}\"")));
            }
        }

        let lambda_rows = parse_vector_list(obj, "lambda", None)?;
        if lambda_rows.is_empty() {
            return Err(Error::Parse(
                "key \"lambda\" must contain at least one row".into(),
            ));
        }
        let n_dim = lambda_rows[0].len();
        if n_dim == 0 {
            return Err(Error::Parse("key \"lambda\" has empty rows".into()));
        }
        for (i, row) in lambda_rows.iter().enumerate() {
            if row.len() != n_dim {
                return Err(Error::Parse(format!(
                    "key \"lambda\" row {i} has length {}, expected {n_dim}",
                    row.len()
                )));
            }
        }
        let lambda = Mat::from_rows(&lambda_rows);

        let v_cols = parse_vector_list(obj, "v_basis", Some(n_dim))?;
        let v_basis = Mat::from_cols(n_dim, &v_cols);

        let epsilon = parse_number(obj, "epsilon")?;
        let eta = parse_number(obj, "eta")?;

        let y = match obj.get("y") {
            Some(serde_json::Value::Array(items)) => parse_numbers(items, "y")?,
            Some(_) => return Err(Error::Parse("key \"y\" must be an array of numbers".into())),
            None => return Err(Error::Parse("missing key \"y\"".into())),
        };

        Ok(ProblemInstance {
            lambda,
            v_basis,
            epsilon,
            eta,
            y,
        })
    }
}

fn parse_number(obj: &serde_json::Map<String, serde_json::Value>, key: &str) -> Result<f64> {
    match obj.get(key) {
        Some(v) => v
            .as_f64()
            .ok_or_else(|| Error::Parse(format!("key \"{key}\" must be a number"))),
        None => Err(Error::Parse(format!("missing key \"{key}\""))),
    }
}

fn parse_numbers(items: &[serde_json::Value], key: &str) -> Result<Vec<f64>> {
    items
        .iter()
        .enumerate()
        .map(|(i, v)| {
            v.as_f64()
                .ok_or_else(|| Error::Parse(format!("key \"{key}\" entry {i} is not a number")))
        })
        .collect()
}

fn parse_vector_list(
    obj: &serde_json::Map<String, serde_json::Value>,
    key: &str,
    expect_len: Option<usize>,
) -> Result<Vec<Vec<f64>>> {
    let items = match obj.get(key) {
        Some(serde_json::Value::Array(items)) => items,
        Some(_) => return Err(Error::Parse(format!("key \"{key}\" must be an array"))),
        None => return Err(Error::Parse(format!("missing key \"{key}\""))),
    };
    let mut out = Vec::with_capacity(items.len());
    for (i, item) in items.iter().enumerate() {
        let inner = item
            .as_array()
            .ok_or_else(|| Error::Parse(format!("key \"{key}\" entry {i} must be an array")))?;
        let vec = parse_numbers(inner, key)?;
        if let Some(len) = expect_len {
            if vec.len() != len {
                return Err(Error::Parse(format!(
                    "key \"{key}\" entry {i} has length {}, expected {len}",
                    vec.len()
                )));
            }
        }
        out.push(vec);
    }
    Ok(out)
}

/// Derived quantities shared by all solvers.
#[derive(Clone, Debug)]
pub struct Geometry {
    /// Orthogonal projector onto the complement of `V` (`N x N`).
    pub p: SymMatrix,
    /// `Lambda^T Lambda` (`N x N`).
    pub ltl: SymMatrix,
    /// Cross-Gramian `Lambda * v_basis` (`m x n`), in the user's basis.
    pub cross_gramian: Mat,
    /// Orthonormalized copy of `v_basis` (`N x n`).
    pub v_orthonormal: Mat,
    /// Whether `Lambda Lambda^T = Id` within `1e-10` entrywise.
    pub orthonormal: bool,
}

/// Singular value below which `V` is treated as meeting `ker(Lambda)`.
const KERNEL_OVERLAP_TOL: f64 = 1e-10;

/// Checks shapes and the standing assumptions, and builds the geometry.
pub fn validate(p: &ProblemInstance) -> Result<Geometry> {
    let n_dim = p.ambient_dim();
    let m = p.n_obs();
    let n_sub = p.subspace_dim();

    if m == 0 || n_dim == 0 {
        return Err(Error::Validation("lambda must be a nonempty matrix".into()));
    }
    if p.y.len() != m {
        return Err(Error::Validation(format!(
            "y has length {}, expected one entry per observation ({m})",
            p.y.len()
        )));
    }
    if n_sub > 0 && p.v_basis.rows() != n_dim {
        return Err(Error::Validation(format!(
            "v_basis columns have length {}, expected {n_dim}",
            p.v_basis.rows()
        )));
    }
    if !p.lambda.is_finite() || !p.v_basis.is_finite() {
        return Err(Error::Validation(
            "lambda and v_basis must be finite".into(),
        ));
    }
    if !p.y.iter().all(|v| v.is_finite()) {
        return Err(Error::Validation("y must be finite".into()));
    }
    if p.epsilon <= 0.0 || !p.epsilon.is_finite() {
        return Err(Error::Validation(format!(
            "epsilon must be positive, got {}",
            p.epsilon
        )));
    }
    if p.eta < 0.0 || !p.eta.is_finite() {
        return Err(Error::Validation(format!(
            "eta must be nonnegative, got {}",
            p.eta
        )));
    }
    if n_sub > m {
        // dim V > m forces V to meet ker(Lambda).
        return Err(Error::InfiniteWorstCase { sigma_min: 0.0 });
    }

    let v_orthonormal = orthonormal_columns(&p.v_basis)?;

    if n_sub > 0 {
        let lb = p.lambda.matmul(&v_orthonormal);
        let gram = SymMatrix::from_symmetrized(lb.transpose().matmul(&lb));
        let spec = linalg::sym_eigen(&gram)?;
        let sigma_min = spec.lambda_min().max(0.0).sqrt();
        if sigma_min <= KERNEL_OVERLAP_TOL {
            return Err(Error::InfiniteWorstCase { sigma_min });
        }
    }

    let mut proj = Mat::identity(n_dim);
    let bbt = v_orthonormal.matmul(&v_orthonormal.transpose());
    proj = proj.sub(&bbt);
    let p_mat = SymMatrix::from_symmetrized(proj);

    let ltl = SymMatrix::from_symmetrized(p.lambda.transpose().matmul(&p.lambda));
    let cross_gramian = p.lambda.matmul(&p.v_basis);

    let llt = p.lambda.matmul(&p.lambda.transpose());
    let orthonormal = llt.sub(&Mat::identity(m)).max_abs() <= 1e-10;

    Ok(Geometry {
        p: p_mat,
        ltl,
        cross_gramian,
        v_orthonormal,
        orthonormal,
    })
}

/// Modified Gram-Schmidt with one re-orthogonalization pass. Columns whose
/// remainder shrinks below `1e-12` of their original norm are rejected as
/// linearly dependent.
fn orthonormal_columns(basis: &Mat) -> Result<Mat> {
    let n = basis.rows();
    let k = basis.cols();
    let mut out = Mat::zeros(n, k);
    let mut kept: Vec<Vec<f64>> = Vec::with_capacity(k);
    for j in 0..k {
        let mut v = basis.col(j);
        let original = linalg::norm(&v);
        if original <= 0.0 {
            return Err(Error::Validation(format!("v_basis column {j} is zero")));
        }
        for _pass in 0..2 {
            for u in &kept {
                let c = linalg::dot(u, &v);
                for i in 0..n {
                    v[i] -= c * u[i];
                }
            }
        }
        let rem = linalg::norm(&v);
        if rem <= 1e-12 * original {
            return Err(Error::Validation(format!(
                "v_basis column {j} is linearly dependent on the previous columns"
            )));
        }
        for x in &mut v {
            *x /= rem;
        }
        out.set_col(j, &v);
        kept.push(v);
    }
    Ok(out)
}

/// Replaces `Lambda` by `T Lambda` and `y` by `T y` with
/// `T = (Lambda Lambda^T)^{-1/2}`, so the new observation rows are
/// orthonormal. Returns the new instance together with `T`.
///
/// The error budget `eta` is carried over verbatim, which changes its
/// meaning: after the transform it bounds `||T e||`, the observation error
/// measured in the re-weighted coordinates, not the original `||e||`.
/// Callers that need the original error geometry must rescale `eta`
/// themselves before or after this call.
pub fn orthonormalize(p: &ProblemInstance) -> Result<(ProblemInstance, Mat)> {
    let m = p.n_obs();
    let llt = SymMatrix::from_symmetrized(p.lambda.matmul(&p.lambda.transpose()));
    let t = match linalg::inv_sqrt_psd(&llt) {
        Ok(t) => t,
        Err(Error::RankDeficient { lambda_min, .. }) => {
            let spec = linalg::sym_eigen(&llt)?;
            let coeffs: Vec<String> = spec
                .min_vector()
                .iter()
                .map(|c| format!("{c:.6}"))
                .collect();
            return Err(Error::RankDeficient {
                lambda_min,
                what: format!(
                    "observation rows are linearly dependent; the combination ({}) of rows is numerically zero",
                    coeffs.join(", ")
                ),
            });
        }
        Err(e) => return Err(e),
    };
    let lambda = t.mat().matmul(&p.lambda);
    let y = t.matvec(&p.y);
    debug_assert_eq!(y.len(), m);
    let inst = ProblemInstance {
        lambda,
        v_basis: p.v_basis.clone(),
        epsilon: p.epsilon,
        eta: p.eta,
        y,
    };
    Ok((inst, t.mat().clone()))
}
