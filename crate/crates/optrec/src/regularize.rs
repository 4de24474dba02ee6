//! The regularization path that threads every solver in this crate.
//!
//! For a trade-off parameter `tau` in `[0, 1]`, the regularized element
//! minimizes `(1 - tau) ||P f||^2 + tau ||Lambda f - y||^2`, which is the
//! linear system `A(tau) f = tau Lambda^T y` with
//! `A(tau) = (1 - tau) P + tau Lambda^T Lambda`. The endpoints are the two
//! interpolants: `f_0` fits the data as well as possible inside `V`, and
//! `f_1` matches the data exactly while staying as close to `V` as
//! possible. Both the local and the global solvers pick their answers on
//! this path; only the rule selecting `tau` differs.

use crate::error::{Error, Result};
use crate::linalg::{self, Mat, SymMatrix};
use crate::model::{Geometry, ProblemInstance};

/// The endpoints of the regularization path and the gap between them.
#[derive(Clone, Debug)]
pub struct Interpolants {
    /// Best data fit within `V` (equals `0` when `V = {0}`).
    pub f0: Vec<f64>,
    /// Exact data fit with minimal distance to `V`.
    pub f1: Vec<f64>,
    /// `||f1 - f0||`; the incompatibility between model and data.
    pub delta: f64,
}

/// One point on the regularization path.
#[derive(Clone, Debug)]
pub struct RegularizedSolution {
    pub tau: f64,
    pub f: Vec<f64>,
    /// `||P f||`, the distance from `f` to `V`.
    pub model_misfit: f64,
    /// `||Lambda f - y||`.
    pub data_misfit: f64,
    /// `Lambda f - y`.
    pub data_residual: Vec<f64>,
}

/// `A(tau) = (1 - tau) P + tau Lambda^T Lambda`.
pub(crate) fn a_matrix(g: &Geometry, tau: f64) -> SymMatrix {
    let sum = g.p.mat().scaled(1.0 - tau).add(&g.ltl.mat().scaled(tau));
    SymMatrix::from_symmetrized(sum)
}

pub fn interpolants(p: &ProblemInstance, g: &Geometry) -> Result<Interpolants> {
    interpolants_for(p, g, &p.y)
}

pub(crate) fn interpolants_for(
    p: &ProblemInstance,
    g: &Geometry,
    y: &[f64],
) -> Result<Interpolants> {
    let f0 = fit_in_subspace(p, g, y)?;
    let f1 = interpolant_min_model(p, g, y)?;
    let diff: Vec<f64> = f1.iter().zip(&f0).map(|(a, b)| a - b).collect();
    let delta = linalg::norm(&diff);
    Ok(Interpolants { f0, f1, delta })
}

pub fn regularize(p: &ProblemInstance, g: &Geometry, tau: f64) -> Result<RegularizedSolution> {
    regularize_for(p, g, tau, &p.y)
}

pub(crate) fn regularize_for(
    p: &ProblemInstance,
    g: &Geometry,
    tau: f64,
    y: &[f64],
) -> Result<RegularizedSolution> {
    if !tau.is_finite() || !(0.0..=1.0).contains(&tau) {
        return Err(Error::Validation(format!(
            "tau must lie in [0, 1], got {tau}"
        )));
    }
    // A(0) and A(1) are singular whenever V and ker(Lambda) are nontrivial;
    // the endpoints are served by their interpolant limits instead.
    let f = if tau == 0.0 {
        fit_in_subspace(p, g, y)?
    } else if tau == 1.0 {
        interpolant_min_model(p, g, y)?
    } else {
        let a = a_matrix(g, tau);
        let rhs = scaled_tr_matvec(&p.lambda, y, tau);
        linalg::solve_spd(&a, &rhs, "regularization operator A(tau)")?
    };
    Ok(describe(p, g, tau, y, f))
}

fn describe(
    p: &ProblemInstance,
    g: &Geometry,
    tau: f64,
    y: &[f64],
    f: Vec<f64>,
) -> RegularizedSolution {
    let pf = g.p.matvec(&f);
    let mut data_residual = p.lambda.matvec(&f);
    for (r, yi) in data_residual.iter_mut().zip(y) {
        *r -= yi;
    }
    RegularizedSolution {
        tau,
        model_misfit: linalg::norm(&pf),
        data_misfit: linalg::norm(&data_residual),
        data_residual,
        f,
    }
}

fn scaled_tr_matvec(lambda: &Mat, y: &[f64], scale: f64) -> Vec<f64> {
    lambda.tr_matvec(y).into_iter().map(|v| v * scale).collect()
}

/// Closed form for instances with orthonormal observation rows and a
/// nontrivial `V`: split `y` against the cross-Gramian `C = Lambda v_basis`
/// into a subspace part `b` and a leftover `a = y - C b`, then
/// `f_tau = tau Lambda^T a + v_basis b`. Agrees with [`regularize`] but
/// costs one small `n x n` solve instead of an `N x N` eigendecomposition.
pub fn regularize_cross_gramian(
    p: &ProblemInstance,
    g: &Geometry,
    tau: f64,
) -> Result<RegularizedSolution> {
    if !g.orthonormal {
        return Err(Error::Validation(
            "the cross-Gramian shortcut needs orthonormal observation rows".into(),
        ));
    }
    if p.subspace_dim() == 0 {
        return Err(Error::Validation(
            "the cross-Gramian shortcut needs a nontrivial subspace".into(),
        ));
    }
    if !tau.is_finite() || !(0.0..=1.0).contains(&tau) {
        return Err(Error::Validation(format!(
            "tau must lie in [0, 1], got {tau}"
        )));
    }
    let c = &g.cross_gramian;
    let gram = SymMatrix::from_symmetrized(c.transpose().matmul(c));
    let b = linalg::solve_spd(&gram, &c.tr_matvec(&p.y), "cross-Gramian normal matrix")?;
    let mut a = p.y.clone();
    let cb = c.matvec(&b);
    for (ai, ci) in a.iter_mut().zip(&cb) {
        *ai -= ci;
    }
    let mut f = p.v_basis.matvec(&b);
    let lt_a = p.lambda.tr_matvec(&a);
    for (fi, li) in f.iter_mut().zip(&lt_a) {
        *fi += tau * li;
    }
    Ok(describe(p, g, tau, &p.y, f))
}

/// `argmin_{f in V} ||Lambda f - y||`; zero when `V = {0}`.
fn fit_in_subspace(p: &ProblemInstance, g: &Geometry, y: &[f64]) -> Result<Vec<f64>> {
    let n_dim = p.ambient_dim();
    if p.subspace_dim() == 0 {
        return Ok(vec![0.0; n_dim]);
    }
    let c = &g.cross_gramian;
    let gram = SymMatrix::from_symmetrized(c.transpose().matmul(c));
    let b = linalg::solve_spd(&gram, &c.tr_matvec(y), "cross-Gramian normal matrix")?;
    Ok(p.v_basis.matvec(&b))
}

/// `argmin_{Lambda f = y} ||P f||`. Splits `f = f_p + Z t` with `f_p` the
/// minimum-norm interpolant and `Z` an orthonormal kernel basis, then
/// minimizes the quadratic in `t`.
fn interpolant_min_model(p: &ProblemInstance, g: &Geometry, y: &[f64]) -> Result<Vec<f64>> {
    let llt = SymMatrix::from_symmetrized(p.lambda.matmul(&p.lambda.transpose()));
    let w = linalg::solve_spd(&llt, y, "observation Gramian Lambda Lambda^T")?;
    let f_p = p.lambda.tr_matvec(&w);

    let z = kernel_basis(g)?;
    if z.cols() == 0 {
        return Ok(f_p);
    }
    let pz = g.p.mat().matmul(&z);
    let ztpz = SymMatrix::from_symmetrized(z.transpose().matmul(&pz));
    let pf = g.p.matvec(&f_p);
    let rhs: Vec<f64> = z.tr_matvec(&pf).into_iter().map(|v| -v).collect();
    let t = match linalg::solve_spd(&ztpz, &rhs, "kernel-restricted projector") {
        Ok(t) => t,
        Err(Error::RankDeficient { lambda_min, .. }) => {
            // A singular Z^T P Z means some unobserved direction lies in V,
            // so the model constraint cannot pin the interpolant down.
            return Err(Error::RankDeficient {
                lambda_min,
                what: "kernel-restricted projector; V meets ker(Lambda) numerically".into(),
            });
        }
        Err(e) => return Err(e),
    };
    let zt = z.matvec(&t);
    Ok(f_p.iter().zip(&zt).map(|(a, b)| a + b).collect())
}

/// Orthonormal basis of `ker(Lambda)` from the small eigenvalues of
/// `Lambda^T Lambda`.
pub(crate) fn kernel_basis(g: &Geometry) -> Result<Mat> {
    let spec = linalg::sym_eigen(&g.ltl)?;
    let lam_max = spec.lambda_max().max(0.0);
    let tol = 1e-12 * lam_max.max(1.0);
    let idx: Vec<usize> = spec
        .eigenvalues
        .iter()
        .enumerate()
        .filter(|(_, &l)| l <= tol)
        .map(|(i, _)| i)
        .collect();
    let n_dim = g.ltl.dim();
    let mut z = Mat::zeros(n_dim, idx.len());
    for (k, &i) in idx.iter().enumerate() {
        z.set_col(k, &spec.eigenvectors.col(i));
    }
    Ok(z)
}
