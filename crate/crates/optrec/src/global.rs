//! Globally optimal recovery: one linear map that is worst-case optimal
//! for every data vector at once.
//!
//! The benchmark is the global worst-case error
//! `gwce(R) = sup { ||f - R(Lambda f + e)|| : ||P f|| <= epsilon, ||e|| <=
//! eta }`. Two facts drive this module:
//!
//! * Every recovery map, linear or not, satisfies `gwce(R) >= r0`, where
//!   `r0` is the worst-case norm over the zero-data consistent set. By the
//!   S-procedure, `r0^2 = min_tau phi(tau)` with
//!   `phi(tau) = ((1-tau) eps^2 + tau eta^2) / lambda_min(A(tau))`.
//! * The regularization map at the minimizing `tau_flat` attains that bound
//!   when the observation rows are orthonormal, so a linear map is globally
//!   optimal and [`solve_global`] returns it together with the multipliers
//!   `(c_flat, d_flat)` certifying the value.
//!
//! [`gwce_linear_bound`] evaluates the exact worst-case error of an
//! arbitrary given linear map through a small two-block eigenvalue search,
//! which is how optimality claims are cross-checked.

use crate::error::{Error, Result};
use crate::linalg::{self, Mat, SymMatrix};
use crate::model::{Geometry, ProblemInstance};
use crate::regularize::{self, a_matrix};

/// A globally optimal (or, with a user-chosen `tau`, certified) linear
/// recovery map.
#[derive(Clone, Debug)]
pub struct GlobalSolution {
    /// Trade-off weight defining the map.
    pub tau_flat: f64,
    /// Multiplier on `epsilon^2` in the certified bound.
    pub c_flat: f64,
    /// Multiplier on `eta^2` in the certified bound.
    pub d_flat: f64,
    /// `sqrt(c_flat eps^2 + d_flat eta^2)`. At the optimal `tau_flat` this
    /// is a lower bound on the worst-case error of every recovery map, and
    /// for orthonormal observation rows it equals the worst-case error of
    /// the returned map.
    pub lb: f64,
    /// `N x m`; the recovery estimate is `map * y`.
    pub map: Mat,
}

/// Minimizes `phi(tau) = ((1-tau) eps^2 + tau eta^2) / lambda_min(A(tau))`
/// over `(0, 1)`. Returns `(tau, lambda_min(A(tau)), phi(tau))`.
pub(crate) fn minimize_phi(g: &Geometry, eps: f64, eta: f64) -> Result<(f64, f64, f64)> {
    let e2 = eps * eps;
    let h2 = eta * eta;
    let lam_at = |tau: f64| -> f64 {
        match linalg::sym_eigen(&a_matrix(g, tau)) {
            Ok(spec) => spec.lambda_min(),
            Err(_) => f64::NAN,
        }
    };
    let phi = |tau: f64| -> f64 {
        let lam = lam_at(tau);
        // NaN (failed eigensolve) must also take this branch.
        if lam <= 1e-13 || lam.is_nan() {
            return f64::INFINITY;
        }
        ((1.0 - tau) * e2 + tau * h2) / lam
    };
    const GRID: usize = 1000;
    let lo = 1e-8;
    let hi = 1.0 - 1e-8;
    let mut best_k = 0;
    let mut best_v = f64::INFINITY;
    for k in 0..=GRID {
        let tau = lo + (hi - lo) * k as f64 / GRID as f64;
        let v = phi(tau);
        if v < best_v {
            best_v = v;
            best_k = k;
        }
    }
    if !best_v.is_finite() {
        return Err(Error::NumericalGuard(
            "the worst-case bound was not finite anywhere on the tau grid".into(),
        ));
    }
    let cell = (hi - lo) / GRID as f64;
    let a = (lo + cell * best_k.saturating_sub(1) as f64).max(lo);
    let b = (lo + cell * (best_k + 1) as f64).min(hi);
    let (tau, value) = linalg::golden_min(phi, a, b, 90);
    // Keep the grid point if golden section did not improve on it.
    let (tau, value) = if value <= best_v {
        (tau, value)
    } else {
        (lo + cell * best_k as f64, best_v)
    };
    Ok((tau, lam_at(tau), value))
}

/// The sharpest data-independent lower bound on the worst-case error of
/// any recovery map. Returns `(bound, tau_flat, lambda_flat)`.
pub fn lower_bound(p: &ProblemInstance, g: &Geometry) -> Result<(f64, f64, f64)> {
    if p.subspace_dim() == 0 && p.n_obs() < p.ambient_dim() {
        // With V = {0} the bound degenerates: tau = 0 gives phi = eps^2
        // and any tau > 0 only adds eta^2 weight against the same kernel.
        return Ok((p.epsilon, 0.0, 1.0));
    }
    let (tau, lam, phi) = minimize_phi(g, p.epsilon, p.eta)?;
    Ok((phi.sqrt(), tau, lam))
}

/// Computes the globally optimal linear recovery map, or the certified map
/// at a caller-chosen `tau`.
pub fn solve_global(
    p: &ProblemInstance,
    g: &Geometry,
    tau_override: Option<f64>,
    _tol: f64,
) -> Result<GlobalSolution> {
    if let Some(tau) = tau_override {
        if !tau.is_finite() || !(0.0..=1.0).contains(&tau) {
            return Err(Error::Validation(format!(
                "tau must lie in [0, 1], got {tau}"
            )));
        }
    }

    if p.subspace_dim() == 0 && p.n_obs() < p.ambient_dim() && tau_override.is_none() {
        let map = Mat::zeros(p.ambient_dim(), p.n_obs());
        return Ok(GlobalSolution {
            tau_flat: 0.0,
            c_flat: 1.0,
            d_flat: 0.0,
            lb: p.epsilon,
            map,
        });
    }

    let (tau, lam) = match tau_override {
        Some(tau) => {
            let lam = linalg::sym_eigen(&a_matrix(g, tau))?.lambda_min();
            if lam <= 1e-13 || lam.is_nan() {
                return Err(Error::NumericalGuard(format!(
                    "lambda_min(A(tau)) = {lam:.3e} at tau = {tau}; no finite bound \
                     is certified there"
                )));
            }
            (tau, lam)
        }
        None => {
            let (tau, lam, _phi) = minimize_phi(g, p.epsilon, p.eta)?;
            (tau, lam)
        }
    };
    let c = (1.0 - tau) / lam;
    let d = tau / lam;
    let lb = (c * p.epsilon * p.epsilon + d * p.eta * p.eta).sqrt();
    let map = regularization_map(p, g, tau)?;
    Ok(GlobalSolution {
        tau_flat: tau,
        c_flat: c,
        d_flat: d,
        lb,
        map,
    })
}

/// The linear map `y -> f_tau(y)`, assembled column by column from the
/// regularized solutions for the canonical data vectors.
pub fn regularization_map(p: &ProblemInstance, g: &Geometry, tau: f64) -> Result<Mat> {
    let n_dim = p.ambient_dim();
    let m = p.n_obs();
    let mut map = Mat::zeros(n_dim, m);
    let mut e = vec![0.0; m];
    for i in 0..m {
        e[i] = 1.0;
        let sol = regularize::regularize_for(p, g, tau, &e)?;
        map.set_col(i, &sol.f);
        e[i] = 0.0;
    }
    Ok(map)
}

/// Worst-case error of the optimal map for orthonormal observation rows,
/// computed through the scalar trade-off equation with `delta = 0` (the
/// globally hardest data are the compatible ones). Returns
/// `(value, tau_flat, lambda_flat)`.
///
/// Degenerate budgets fall back on the direct minimization of `phi`:
/// `eta = 0` pushes `tau` to 1 where the multiplier parametrization blows
/// up, and `eps = eta` cancels the factor that the equation divides by.
pub fn gwce_orthonormal(p: &ProblemInstance, g: &Geometry, tol: f64) -> Result<(f64, f64, f64)> {
    if !g.orthonormal {
        return Err(Error::Validation(
            "the trade-off equation needs orthonormal observation rows; \
             whiten the rows first or use gwce_linear_bound"
                .into(),
        ));
    }
    if p.subspace_dim() == 0 {
        return lower_bound(p, g);
    }
    if p.eta == 0.0 {
        let (value, _tau, _lam) = lower_bound(p, g)?;
        return Ok((value, 1.0, 0.0));
    }
    if (p.epsilon - p.eta).abs() <= 1e-12 * (p.epsilon + p.eta) {
        let (tau, lam, phi) = minimize_phi(g, p.epsilon, p.eta)?;
        return Ok((phi.sqrt(), tau, lam));
    }
    let (tau, lam) = crate::local::solve_tau_equation_core(g, p.epsilon, p.eta, 0.0, tol)?;
    let e2 = p.epsilon * p.epsilon;
    let h2 = p.eta * p.eta;
    let value = (((1.0 - tau) * e2 + tau * h2) / lam).sqrt();
    Ok((value, tau, lam))
}

/// An element realizing the global worst case for the optimal map:
/// the minimal eigenvector of `A(tau)` scaled so its model misfit uses the
/// whole budget. At the optimal `tau` its observation misfit then uses the
/// whole `eta` budget as well.
pub fn gwce_extremal(g: &Geometry, tau: f64, eps: f64) -> Result<Vec<f64>> {
    let spec = linalg::sym_eigen(&a_matrix(g, tau))?;
    let v = spec.min_vector();
    let pv = linalg::norm(&g.p.matvec(&v));
    if pv <= 1e-14 {
        return Err(Error::NumericalGuard(
            "the extremal direction has no component outside the approximation space".into(),
        ));
    }
    let s = eps / pv;
    Ok(v.into_iter().map(|x| x * s).collect())
}

/// Exact worst-case error of an arbitrary linear map `map` (an `N x m`
/// matrix applied to the data).
///
/// Writing `G = [Id - map Lambda | -map]` for the joint action on `(f, e)`,
/// the squared worst case is the smallest `s ((1-tau) eps^2 + tau eta^2)`
/// over `tau` such that `s D_tau - G^T G` is positive semidefinite, with
/// `D_tau = diag((1-tau) P, tau Id_m)`; the S-procedure makes this bound
/// tight. For each `tau` the smallest feasible `s` is found by a Newton
/// iteration from below on `lambda_min(s D_tau - G^T G)`, which is concave
/// and increasing in `s`.
///
/// The map must reproduce the approximation space (`map Lambda b = b` on
/// `V`); otherwise scaling `f` inside `V` drives the error to infinity and
/// the function reports [`Error::UnboundedGwce`].
pub fn gwce_linear_bound(p: &ProblemInstance, g: &Geometry, map: &Mat) -> Result<f64> {
    let n_dim = p.ambient_dim();
    let m = p.n_obs();
    if map.rows() != n_dim || map.cols() != m {
        return Err(Error::Validation(format!(
            "map has shape {}x{}, expected {}x{}",
            map.rows(),
            map.cols(),
            n_dim,
            m
        )));
    }

    for j in 0..g.v_orthonormal.cols() {
        let bj = g.v_orthonormal.col(j);
        let mut r = map.matvec(&p.lambda.matvec(&bj));
        for (ri, bi) in r.iter_mut().zip(&bj) {
            *ri = bi - *ri;
        }
        if linalg::norm(&r) > 1e-8 {
            return Err(Error::UnboundedGwce);
        }
    }

    // K = G^T G on the joint variable (f, e).
    let dim = n_dim + m;
    let mut gmat = Mat::zeros(n_dim, dim);
    let ml = map.matmul(&p.lambda);
    for i in 0..n_dim {
        for j in 0..n_dim {
            gmat[(i, j)] = if i == j { 1.0 } else { 0.0 } - ml[(i, j)];
        }
        for j in 0..m {
            gmat[(i, n_dim + j)] = -map[(i, j)];
        }
    }
    let k = SymMatrix::from_symmetrized(gmat.transpose().matmul(&gmat));
    let k_scale = {
        let spec = linalg::sym_eigen(&k)?;
        spec.lambda_max().abs().max(1.0)
    };

    let d_blocks = |tau: f64| -> SymMatrix {
        let mut d = Mat::zeros(dim, dim);
        for i in 0..n_dim {
            for j in 0..n_dim {
                d[(i, j)] = (1.0 - tau) * g.p.get(i, j);
            }
        }
        for i in 0..m {
            d[(n_dim + i, n_dim + i)] = tau;
        }
        SymMatrix::from_symmetrized(d)
    };

    // Smallest s with s D_tau - K >= 0 (within the shared-kernel floor).
    let s_star = |tau: f64| -> f64 {
        let d = d_blocks(tau);
        let mut s = 0.0f64;
        for _ in 0..200 {
            let mut ms = d.mat().scaled(s);
            ms = ms.sub(k.mat());
            let Ok(spec) = linalg::sym_eigen(&SymMatrix::from_symmetrized(ms)) else {
                return f64::INFINITY;
            };
            let fv = spec.lambda_min();
            // Directions in V x {0} lie in the kernel of both D and K, so
            // lambda_min floors around -1e-16 * scale rather than at zero.
            if fv >= -1e-13 * k_scale {
                return s;
            }
            let h = spec.min_vector();
            let slope = d.quad(&h);
            if slope <= 1e-14 {
                // K acts on a direction D cannot penalize: no finite s works.
                return f64::INFINITY;
            }
            s += -fv / slope;
        }
        f64::INFINITY
    };

    let e2 = p.epsilon * p.epsilon;
    let h2 = p.eta * p.eta;
    let objective = |tau: f64| -> f64 { s_star(tau) * ((1.0 - tau) * e2 + tau * h2) };

    const GRID: usize = 100;
    let lo = 1e-6;
    let hi = 1.0 - 1e-6;
    let mut best_k = 0;
    let mut best_v = f64::INFINITY;
    for kk in 0..=GRID {
        let tau = lo + (hi - lo) * kk as f64 / GRID as f64;
        let v = objective(tau);
        if v < best_v {
            best_v = v;
            best_k = kk;
        }
    }
    if !best_v.is_finite() {
        return Err(Error::NumericalGuard(
            "no tau certified a finite worst-case error for the given map".into(),
        ));
    }
    let cell = (hi - lo) / GRID as f64;
    let a = (lo + cell * best_k.saturating_sub(1) as f64).max(lo);
    let b = (lo + cell * (best_k + 1) as f64).min(hi);
    let (_tau, value) = linalg::golden_min(objective, a, b, 80);
    Ok(value.min(best_v).max(0.0).sqrt())
}
