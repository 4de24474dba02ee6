//! Pointwise optimal recovery: the Chebyshev center of the set of elements
//! consistent with one observed data vector.
//!
//! The consistent set is `K = { f : ||P f|| <= epsilon, ||Lambda f - y|| <=
//! eta }`. Its Chebyshev center is the estimate whose worst-case error over
//! `K` is smallest, and that worst-case error is the Chebyshev radius.
//! Three routes compute it:
//!
//! * [`chebyshev_center_orthonormal`] (route `eigen_equation`): for
//!   orthonormal observation rows, the center lies on the regularization
//!   path and the optimal `tau` solves a scalar equation matching
//!   `lambda_min(A(tau))` against an explicit rational function. Exact up
//!   to root-finding tolerance, and produces a checkable optimality
//!   certificate.
//! * [`chebyshev_center_ball`] (route `ball`): closed form for the special
//!   case `V = {0}` with orthonormal rows.
//! * [`chebyshev_center_sdp`] (route `reduced_sdp`): the general case. The
//!   full semidefinite formulation collapses to a one-dimensional
//!   minimization of `sigma(tau) / lambda_min(A(tau))` over `tau`, which is
//!   solved by a grid scan plus golden-section refinement. Needs a strictly
//!   feasible instance.

use crate::error::{Error, Result};
use crate::global;
use crate::linalg::{self, SymMatrix};
use crate::model::{Geometry, ProblemInstance};
use crate::regularize::{self, a_matrix};

/// Route selection for [`solve_local`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LocalMethod {
    /// Pick the cheapest applicable route.
    Auto,
    Eigen,
    Ball,
    Sdp,
}

impl std::str::FromStr for LocalMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(LocalMethod::Auto),
            "eigen" => Ok(LocalMethod::Eigen),
            "ball" => Ok(LocalMethod::Ball),
            "sdp" => Ok(LocalMethod::Sdp),
            other => Err(Error::Validation(format!(
                "unknown method \"{other}\"; expected auto, eigen, ball, or sdp"
            ))),
        }
    }
}

/// Which route produced a [`LocalSolution`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LocalRoute {
    EigenEquation,
    Ball,
    ReducedSdp,
}

impl LocalRoute {
    pub fn as_str(&self) -> &'static str {
        match self {
            LocalRoute::EigenEquation => "eigen_equation",
            LocalRoute::Ball => "ball",
            LocalRoute::ReducedSdp => "reduced_sdp",
        }
    }
}

impl std::str::FromStr for LocalRoute {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "eigen_equation" => Ok(LocalRoute::EigenEquation),
            "ball" => Ok(LocalRoute::Ball),
            "reduced_sdp" => Ok(LocalRoute::ReducedSdp),
            other => Err(Error::Parse(format!("unknown route \"{other}\" in report"))),
        }
    }
}

/// Optimality certificate `(h, a, b)` for a center `c` with radius `r`:
///
/// * `c + h` lies on both constraint boundaries (saturation),
/// * `a P c + b (Lambda^T Lambda c - Lambda^T y) = 0` (stationarity),
/// * `a P + b Lambda^T Lambda - Id` is positive semidefinite and kills `h`.
///
/// Together these force `sup_{f in K} ||f - c|| = ||h|| = r` and rule out
/// any better center, so a verifier can confirm optimality without re-running
/// the solver. [`crate::oracle::check_center_certificate`] performs the check.
#[derive(Clone, Debug)]
pub struct Certificate {
    /// Worst-case perturbation; `||h||` equals the radius.
    pub h: Vec<f64>,
    /// Multiplier on the model constraint.
    pub a: f64,
    /// Multiplier on the data constraint.
    pub b: f64,
}

/// Chebyshev center, radius, and the diagnostics of the route that found it.
#[derive(Clone, Debug)]
pub struct LocalSolution {
    pub route: LocalRoute,
    /// Trade-off weight at the solution.
    pub tau_sharp: f64,
    /// `lambda_min(A(tau_sharp))` when the route computes it.
    pub lambda_sharp: Option<f64>,
    pub center: Vec<f64>,
    pub radius: f64,
    pub certificate: Option<Certificate>,
}

/// Relative slack treated as "equal" when comparing budgets.
const BUDGET_REL_TOL: f64 = 1e-12;

/// Dispatches to a route, checking its applicability first.
pub fn solve_local(
    p: &ProblemInstance,
    g: &Geometry,
    method: LocalMethod,
    tol: f64,
) -> Result<LocalSolution> {
    let trivial_v = p.subspace_dim() == 0;
    let underdetermined = p.n_obs() < p.ambient_dim();
    match method {
        LocalMethod::Auto => {
            if g.orthonormal && trivial_v && underdetermined {
                chebyshev_center_ball(p, g)
            } else if g.orthonormal && !trivial_v && underdetermined {
                chebyshev_center_orthonormal(p, g, tol)
            } else {
                chebyshev_center_sdp(p, g, tol)
            }
        }
        LocalMethod::Eigen => chebyshev_center_orthonormal(p, g, tol),
        LocalMethod::Ball => chebyshev_center_ball(p, g),
        LocalMethod::Sdp => chebyshev_center_sdp(p, g, tol),
    }
}

/// Solves the trade-off equation for orthonormal observation rows and
/// returns `(tau_sharp, lambda_min(A(tau_sharp)))`.
///
/// The equation is `lambda_min(A(tau)) = N(tau) / D(tau)` with
/// `N = (1-tau)^2 eps^2 - tau^2 eta^2` and
/// `D = (1-tau) eps^2 - tau eta^2 + (1-tau) tau (1-2tau) delta^2`.
/// A root is bracketed between `1/2` (where `N/D = 1/2 >=
/// lambda_min(A(1/2))`) and `eps/(eps+eta)` (where `N = 0 <
/// lambda_min`), in whichever order those endpoints come.
pub fn solve_tau_equation(p: &ProblemInstance, g: &Geometry, tol: f64) -> Result<(f64, f64)> {
    let ip = regularize::interpolants(p, g)?;
    solve_tau_equation_core(g, p.epsilon, p.eta, ip.delta, tol)
}

pub(crate) fn solve_tau_equation_core(
    g: &Geometry,
    eps: f64,
    eta: f64,
    delta: f64,
    tol: f64,
) -> Result<(f64, f64)> {
    let e2 = eps * eps;
    let h2 = eta * eta;
    let d2 = delta * delta;
    let lam_min_at =
        |tau: f64| -> Result<f64> { Ok(linalg::sym_eigen(&a_matrix(g, tau))?.lambda_min()) };

    if (eps - eta).abs() <= BUDGET_REL_TOL * (eps + eta) {
        return solve_tau_equation_balanced(g, eps, delta, lam_min_at);
    }

    let theta = |tau: f64| -> Result<f64> {
        let n = (1.0 - tau) * (1.0 - tau) * e2 - tau * tau * h2;
        let d = (1.0 - tau) * e2 - tau * h2 + (1.0 - tau) * tau * (1.0 - 2.0 * tau) * d2;
        Ok(lam_min_at(tau)? - n / d)
    };

    // theta <= 0 at tau = 1/2 and theta > 0 at tau = eps/(eps+eta).
    let mut t_neg = 0.5;
    let mut t_pos = eps / (eps + eta);
    if theta(t_neg)? >= 0.0 {
        // lambda_min(A(1/2)) already matches the rational side.
        let lam = lam_min_at(t_neg)?;
        return Ok((t_neg, lam));
    }
    debug_assert!(theta(t_pos)? > 0.0);

    let tol_tau = tol.max(4.0 * f64::EPSILON);
    let mut iter = 0;
    while (t_pos - t_neg).abs() > tol_tau && iter < 200 {
        let mid = 0.5 * (t_neg + t_pos);
        let val = theta(mid)?;
        if !val.is_finite() {
            return Err(Error::RootNotFound(format!(
                "the trade-off equation is not finite at tau = {mid}"
            )));
        }
        if val > 0.0 {
            t_pos = mid;
        } else {
            t_neg = mid;
        }
        iter += 1;
    }
    let tau = 0.5 * (t_neg + t_pos);
    let lam = lam_min_at(tau)?;
    let residual = theta(tau)?;
    if residual.abs() > 1e-6 * lam.max(1.0) {
        // The sign change was a pole of N/D, not a root.
        return Err(Error::RootNotFound(format!(
            "bisection converged to tau = {tau} with residual {residual:.3e}; \
             the bracketed sign change is a pole of the rational side"
        )));
    }
    Ok((tau, lam))
}

/// The `eps == eta` degenerations of the trade-off equation.
///
/// The factor `(1 - 2 tau)` then cancels from both sides. For compatible
/// data (`delta ~ 0`) the optimal `tau` maximizes `lambda_min(A(tau))`
/// instead, which is the stationarity condition of the worst-case error.
/// For incompatible data the reduced equation
/// `lambda_min(A(tau)) = eps^2 / (eps^2 + tau (1-tau) delta^2)` usually has
/// no root (for `delta < 2 eps` the right side stays above `1/2`), and the
/// honest outcome is a `RootNotFound` pointing at the reduced SDP route.
fn solve_tau_equation_balanced(
    g: &Geometry,
    eps: f64,
    delta: f64,
    lam_min_at: impl Fn(f64) -> Result<f64>,
) -> Result<(f64, f64)> {
    let e2 = eps * eps;
    let d2 = delta * delta;
    if delta <= 1e-8 * 2.0 * eps {
        let (tau, lam, _phi) = global::minimize_phi(g, eps, eps)?;
        return Ok((tau, lam));
    }
    let theta =
        |tau: f64| -> Result<f64> { Ok(lam_min_at(tau)? - e2 / (e2 + tau * (1.0 - tau) * d2)) };
    let mut prev: Option<(f64, f64)> = None;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for k in 0..=98 {
        let tau = 0.01 + 0.98 * k as f64 / 98.0;
        let val = theta(tau)?;
        lo = lo.min(val);
        hi = hi.max(val);
        if let Some((pt, pv)) = prev {
            if pv.signum() != val.signum() {
                // Rare but possible: refine the crossing by bisection.
                let (mut a, mut b) = (pt, tau);
                let mut fa = pv;
                for _ in 0..200 {
                    let mid = 0.5 * (a + b);
                    let fm = theta(mid)?;
                    if fm.signum() == fa.signum() {
                        a = mid;
                        fa = fm;
                    } else {
                        b = mid;
                    }
                    if (b - a).abs() < 4.0 * f64::EPSILON {
                        break;
                    }
                }
                let tau = 0.5 * (a + b);
                return Ok((tau, lam_min_at(tau)?));
            }
        }
        prev = Some((tau, val));
    }
    Err(Error::RootNotFound(format!(
        "with eps = eta = {eps} and incompatible data (delta = {delta:.6e}) the reduced \
         trade-off equation has no sign change on (0, 1) (range [{lo:.3e}, {hi:.3e}]); \
         use method=sdp, which does not rely on this parametrization"
    )))
}

/// Chebyshev center via the trade-off equation. Needs orthonormal
/// observation rows, a nontrivial approximation space, and `m < N`.
pub fn chebyshev_center_orthonormal(
    p: &ProblemInstance,
    g: &Geometry,
    tol: f64,
) -> Result<LocalSolution> {
    require_orthonormal(g, "the trade-off equation")?;
    if p.n_obs() >= p.ambient_dim() {
        return Err(Error::Validation(
            "the trade-off equation needs unobserved directions (m < N); use method=sdp".into(),
        ));
    }
    if p.subspace_dim() == 0 {
        return Err(Error::Validation(
            "the approximation space is trivial; use method=ball".into(),
        ));
    }

    let eps = p.epsilon;
    let eta = p.eta;
    let ip = regularize::interpolants(p, g)?;
    let budget = eps + eta;
    if ip.delta > budget * (1.0 + BUDGET_REL_TOL) {
        return Err(Error::EmptyConsistentSet {
            delta: ip.delta,
            budget,
        });
    }
    if ip.delta >= budget * (1.0 - BUDGET_REL_TOL) {
        // The consistent set is the single point where both budgets bind.
        let tau = eps / (eps + eta);
        let center = regularize::regularize(p, g, tau)?.f;
        let lam = linalg::sym_eigen(&a_matrix(g, tau))?.lambda_min();
        return Ok(LocalSolution {
            route: LocalRoute::EigenEquation,
            tau_sharp: tau,
            lambda_sharp: Some(lam),
            center,
            radius: 0.0,
            certificate: None,
        });
    }
    if eta == 0.0 {
        return exact_data_center(p, g, &ip);
    }

    let (tau, lam) = solve_tau_equation_core(g, eps, eta, ip.delta, tol)?;
    let radius = radius_from(tau, lam, eps, eta, ip.delta)?;
    let center = regularize::regularize(p, g, tau)?.f;
    let certificate = Some(certificate_at(g, tau, lam, radius)?);
    Ok(LocalSolution {
        route: LocalRoute::EigenEquation,
        tau_sharp: tau,
        lambda_sharp: Some(lam),
        center,
        radius,
        certificate,
    })
}

/// `eta == 0` limit of the orthonormal route: the data pin `f` to the
/// affine space `Lambda f = y`, the center is the interpolant closest to
/// `V`, and the worst case lives in `ker(Lambda)`:
/// `radius^2 = (eps^2 - delta^2) / lambda_min(Z^T P Z)` for an orthonormal
/// kernel basis `Z`. The multiplier `b` diverges in this limit, so no
/// finite certificate exists and none is attached.
fn exact_data_center(
    p: &ProblemInstance,
    g: &Geometry,
    ip: &regularize::Interpolants,
) -> Result<LocalSolution> {
    let z = regularize::kernel_basis(g)?;
    debug_assert!(z.cols() > 0);
    let pz = g.p.mat().matmul(&z);
    let ztpz = SymMatrix::from_symmetrized(z.transpose().matmul(&pz));
    let mu0 = linalg::spd_spectrum(&ztpz, "kernel-restricted projector")?.lambda_min();
    let num = p.epsilon * p.epsilon - ip.delta * ip.delta;
    let radius = (num.max(0.0) / mu0).sqrt();
    Ok(LocalSolution {
        route: LocalRoute::EigenEquation,
        tau_sharp: 1.0,
        lambda_sharp: Some(0.0),
        center: ip.f1.clone(),
        radius,
        certificate: None,
    })
}

fn radius_from(tau: f64, lam: f64, eps: f64, eta: f64, delta: f64) -> Result<f64> {
    let num = (1.0 - tau) * eps * eps + tau * eta * eta - (1.0 - tau) * tau * delta * delta;
    let scale = eps * eps + eta * eta;
    if num < -1e-12 * scale {
        return Err(Error::NumericalGuard(format!(
            "squared radius numerator is negative ({num:.3e}) at tau = {tau}"
        )));
    }
    if lam <= 0.0 {
        return Err(Error::NumericalGuard(format!(
            "lambda_min(A(tau)) = {lam:.3e} is not positive at tau = {tau}"
        )));
    }
    Ok((num.max(0.0) / lam).sqrt())
}

fn certificate_at(g: &Geometry, tau: f64, lam: f64, radius: f64) -> Result<Certificate> {
    let spec = linalg::sym_eigen(&a_matrix(g, tau))?;
    let v = spec.min_vector();
    let h: Vec<f64> = v.iter().map(|x| x * radius).collect();
    Ok(Certificate {
        h,
        a: (1.0 - tau) / lam,
        b: tau / lam,
    })
}

/// Closed-form Chebyshev center for `V = {0}` with orthonormal rows and
/// `m < N`: the consistent set is the intersection of the centered ball of
/// radius `epsilon` with the data slab, the center is `tau Lambda^T y` with
/// `tau = max(0, 1 - eta/||y||)`, and the worst case points into
/// `ker(Lambda)`.
pub fn chebyshev_center_ball(p: &ProblemInstance, g: &Geometry) -> Result<LocalSolution> {
    require_orthonormal(g, "the ball route")?;
    if p.subspace_dim() != 0 {
        return Err(Error::Validation(
            "the ball route applies only to a trivial approximation space".into(),
        ));
    }
    if p.n_obs() >= p.ambient_dim() {
        return Err(Error::Validation(
            "the ball route needs unobserved directions (m < N); use method=sdp".into(),
        ));
    }
    let eps = p.epsilon;
    let eta = p.eta;
    let ynorm = linalg::norm(&p.y);
    let budget = eps + eta;
    if ynorm > budget * (1.0 + BUDGET_REL_TOL) {
        return Err(Error::EmptyConsistentSet {
            delta: ynorm,
            budget,
        });
    }
    let tau = if ynorm <= eta { 0.0 } else { 1.0 - eta / ynorm };
    let lty = p.lambda.tr_matvec(&p.y);
    let center: Vec<f64> = lty.iter().map(|v| v * tau).collect();
    let radius = (eps * eps - tau * tau * ynorm * ynorm).max(0.0).sqrt();
    let certificate = if tau > 0.0 && tau < 1.0 {
        // Any unit kernel direction realizes the worst case; take the
        // deterministic one from the spectrum of Lambda^T Lambda.
        let spec = linalg::sym_eigen(&g.ltl)?;
        let z = spec.min_vector();
        let h: Vec<f64> = z.iter().map(|x| x * radius).collect();
        Some(Certificate {
            h,
            a: 1.0,
            b: tau / (1.0 - tau),
        })
    } else {
        None
    };
    Ok(LocalSolution {
        route: LocalRoute::Ball,
        tau_sharp: tau,
        lambda_sharp: None,
        center,
        radius,
        certificate,
    })
}

/// Chebyshev center for general instances via the reduced semidefinite
/// formulation.
///
/// For each `tau` the smallest worst-case bound certified by the
/// multipliers `(a, b) = ((1-tau)/lam, tau/lam)`, `lam =
/// lambda_min(A(tau))`, is `phi(tau) = sigma(tau) / lam` with
/// `sigma(tau) = (1-tau) eps^2 + tau (eta^2 - ||y||^2) + tau^2 y^T Lambda
/// A(tau)^{-1} Lambda^T y`, and the candidate center is the regularized
/// element at `tau`. Minimizing over `tau` recovers the optimum of the full
/// semidefinite program; strong duality needs a strictly feasible instance,
/// which is checked up front by scanning the regularization path.
pub fn chebyshev_center_sdp(p: &ProblemInstance, g: &Geometry, tol: f64) -> Result<LocalSolution> {
    let eps = p.epsilon;
    let eta = p.eta;
    let scale = eps.max(eta).max(1.0);

    let (shortfall, _tau_at) = path_shortfall(p, g);
    if shortfall > 1e-8 * scale {
        let delta = regularize::interpolants(p, g)
            .map(|ip| ip.delta)
            .unwrap_or(shortfall);
        return Err(Error::EmptyConsistentSet {
            delta,
            budget: eps + eta,
        });
    }
    if shortfall > -1e-10 * scale {
        return Err(Error::StrictFeasibility(format!(
            "no point on the regularization path clears both budgets by a margin \
             (best shortfall {shortfall:.3e}); the reduced formulation needs strict \
             feasibility. For eta = 0 use the orthonormal eigen route instead"
        )));
    }

    let e2 = eps * eps;
    let h2 = eta * eta;
    let y2 = linalg::dot(&p.y, &p.y);
    let lty = p.lambda.tr_matvec(&p.y);
    let eval = |tau: f64| -> f64 {
        let a = a_matrix(g, tau);
        let Ok(spec) = linalg::sym_eigen(&a) else {
            return f64::INFINITY;
        };
        let lam = spec.lambda_min();
        if lam <= 1e-13 {
            return f64::INFINITY;
        }
        let w = linalg::spectral_apply(&spec, |l| 1.0 / l, &lty);
        let quad = linalg::dot(&lty, &w);
        let sigma = (1.0 - tau) * e2 + tau * (h2 - y2) + tau * tau * quad;
        sigma / lam
    };

    const GRID: usize = 400;
    let lo = 1e-6;
    let hi = 1.0 - 1e-6;
    let mut best_k = 0;
    let mut best_v = f64::INFINITY;
    for k in 0..=GRID {
        let tau = lo + (hi - lo) * k as f64 / GRID as f64;
        let v = eval(tau);
        if v < best_v {
            best_v = v;
            best_k = k;
        }
    }
    if !best_v.is_finite() {
        return Err(Error::NumericalGuard(
            "the reduced objective was not finite anywhere on the tau grid".into(),
        ));
    }
    let cell = (hi - lo) / GRID as f64;
    let a = (lo + cell * best_k.saturating_sub(1) as f64).max(lo);
    let b = (lo + cell * (best_k + 1) as f64).min(hi);
    let iters = golden_iters(b - a, tol);
    let (mut tau_sharp, mut phi) = linalg::golden_min(eval, a, b, iters);

    // The objective is quadratically flat at its minimum, so golden section
    // settles the value long before the argmin, and the center moves
    // first-order in that slack. The derivative changes sign there, which
    // bisection resolves to machine precision. `B = Lambda^T Lambda - P` is
    // the tau-derivative of `A`.
    let b_apply = |x: &[f64]| -> Vec<f64> {
        let sx = g.ltl.matvec(x);
        let px = g.p.matvec(x);
        sx.into_iter().zip(px).map(|(s, pp)| s - pp).collect()
    };
    let deriv = |tau: f64| -> Option<f64> {
        let spec = linalg::sym_eigen(&a_matrix(g, tau)).ok()?;
        let lam = spec.lambda_min();
        if lam <= 1e-13 {
            return None;
        }
        let w = linalg::spectral_apply(&spec, |l| 1.0 / l, &lty);
        let quad = linalg::dot(&lty, &w);
        let q_prime = -linalg::dot(&w, &b_apply(&w));
        let u = spec.min_vector();
        let lam_prime = linalg::dot(&u, &b_apply(&u));
        let sigma = (1.0 - tau) * e2 + tau * (h2 - y2) + tau * tau * quad;
        let sigma_prime = -e2 + (h2 - y2) + 2.0 * tau * quad + tau * tau * q_prime;
        Some(sigma_prime * lam - sigma * lam_prime)
    };
    let mut bracket = None;
    let mut width = 1e-7;
    while width <= 1e-2 {
        let a_lo = (tau_sharp - width).max(lo);
        let b_hi = (tau_sharp + width).min(hi);
        match (deriv(a_lo), deriv(b_hi)) {
            (Some(da), Some(db)) if da.signum() != db.signum() => {
                bracket = Some((a_lo, b_hi, da.signum()));
                break;
            }
            (Some(_), Some(_)) => width *= 10.0,
            _ => break,
        }
    }
    if let Some((mut a_lo, mut b_hi, sa)) = bracket {
        for _ in 0..100 {
            let mid = 0.5 * (a_lo + b_hi);
            match deriv(mid) {
                Some(dm) if dm != 0.0 => {
                    if dm.signum() == sa {
                        a_lo = mid;
                    } else {
                        b_hi = mid;
                    }
                }
                _ => break,
            }
        }
        tau_sharp = 0.5 * (a_lo + b_hi);
        phi = eval(tau_sharp);
    } else {
        // One-sided slope everywhere near the argmin: the true optimum sits
        // on a boundary. That needs `A` definite there, which only happens
        // with a trivial subspace (tau = 0) or full-rank observations
        // (tau = 1); otherwise the grid point stands.
        let one_sided = deriv(tau_sharp);
        let snap = |t: f64, v: f64| -> Option<(f64, f64)> { v.is_finite().then_some((t, v)) };
        if let Some(d) = one_sided {
            let snapped = if d > 0.0 {
                snap(0.0, eval(0.0))
            } else {
                snap(1.0, eval(1.0))
            };
            if let Some((t, v)) = snapped {
                if v <= phi + 1e-12 * scale * scale {
                    tau_sharp = t;
                    phi = v;
                }
            }
        }
    }

    if phi < -1e-10 * scale * scale {
        return Err(Error::NumericalGuard(format!(
            "the certified squared radius is negative ({phi:.3e}) at tau = {tau_sharp}"
        )));
    }
    let center = regularize::regularize(p, g, tau_sharp)?.f;
    Ok(LocalSolution {
        route: LocalRoute::ReducedSdp,
        tau_sharp,
        lambda_sharp: None,
        center,
        radius: phi.max(0.0).sqrt(),
        certificate: None,
    })
}

/// Iterations for golden-section search to shrink `width` below `tol`.
pub(crate) fn golden_iters(width: f64, tol: f64) -> usize {
    let tol = tol.max(1e-14);
    if width <= tol {
        return 8;
    }
    // Each iteration contracts by 1/phi ~ 0.618.
    let n = ((width / tol).ln() / 0.618_033_988_749_894_9f64.recip().ln()).ceil();
    (n as usize).clamp(8, 120)
}

/// Minimum over the regularization path of the largest budget violation
/// `max(||P f|| - eps, ||Lambda f - y|| - eta)`. Negative means strictly
/// feasible; positive at the minimum means the consistent set is empty.
/// The two misfits move monotonically in opposite directions along the
/// path, so the max is unimodal and the coarse grid plus golden refinement
/// finds the true minimum.
fn path_shortfall(p: &ProblemInstance, g: &Geometry) -> (f64, f64) {
    let eval = |tau: f64| -> f64 {
        match regularize::regularize(p, g, tau) {
            Ok(sol) => (sol.model_misfit - p.epsilon).max(sol.data_misfit - p.eta),
            Err(_) => f64::INFINITY,
        }
    };
    const GRID: usize = 200;
    let mut best_k = 0;
    let mut best_v = f64::INFINITY;
    for k in 0..=GRID {
        let tau = k as f64 / GRID as f64;
        let v = eval(tau);
        if v < best_v {
            best_v = v;
            best_k = k;
        }
    }
    let a = (best_k.saturating_sub(1) as f64 / GRID as f64).max(0.0);
    let b = ((best_k + 1) as f64 / GRID as f64).min(1.0);
    let (tau, v) = linalg::golden_min(eval, a, b, 70);
    if v <= best_v {
        (v, tau)
    } else {
        (best_v, best_k as f64 / GRID as f64)
    }
}

fn require_orthonormal(g: &Geometry, what: &str) -> Result<()> {
    if g.orthonormal {
        Ok(())
    } else {
        Err(Error::Validation(format!(
            "{what} needs orthonormal observation rows (Lambda Lambda^T = Id); \
             whiten the rows first or use method=sdp"
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Mat;
    use crate::model::validate;

    fn d1() -> (ProblemInstance, Geometry) {
        let p = ProblemInstance {
            lambda: Mat::from_rows(&[vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]]),
            v_basis: Mat::from_cols(3, &[vec![0.5f64.sqrt(), 0.5f64.sqrt(), 0.0]]),
            epsilon: 1.0,
            eta: 0.5,
            y: vec![1.0, 0.3],
        };
        let g = validate(&p).unwrap();
        (p, g)
    }

    #[test]
    fn eigen_route_on_the_running_example() {
        let (p, g) = d1();
        let sol = chebyshev_center_orthonormal(&p, &g, 1e-12).unwrap();
        assert_eq!(sol.route, LocalRoute::EigenEquation);
        assert!((sol.tau_sharp - 0.6416859904844329).abs() < 1e-9);
        assert!((sol.lambda_sharp.unwrap() - 0.13252556558343087).abs() < 1e-9);
        assert!((sol.radius - 1.9385779115930444).abs() < 1e-9);
        let expect = [1.0, 1.0, 0.19250579714532986];
        for (a, b) in sol.center.iter().zip(&expect) {
            assert!((a - b).abs() < 1e-9);
        }
        let cert = sol.certificate.as_ref().unwrap();
        assert!((cert.a - 2.7037349958713603).abs() < 1e-7);
        assert!((cert.b - 4.841978886560287).abs() < 1e-7);
        assert!((linalg::norm(&cert.h) - sol.radius).abs() < 1e-9);
    }

    #[test]
    fn eigen_lambda_matches_closed_form_on_the_example() {
        // For the running example lambda_min(A(tau)) has the closed form
        // (1 - sqrt(tau^2 + (1-tau)^2)) / 2.
        let (_p, g) = d1();
        for k in 1..20 {
            let tau = k as f64 / 20.0;
            let lam = linalg::sym_eigen(&a_matrix(&g, tau)).unwrap().lambda_min();
            let closed = (1.0 - (tau * tau + (1.0 - tau) * (1.0 - tau)).sqrt()) / 2.0;
            assert!((lam - closed).abs() < 1e-12, "tau={tau}");
        }
    }

    #[test]
    fn empty_set_is_reported() {
        let (mut p, g) = d1();
        p.y = vec![1.0, 2.0];
        match chebyshev_center_orthonormal(&p, &g, 1e-10) {
            Err(Error::EmptyConsistentSet { delta, budget }) => {
                assert!((delta - 2.0).abs() < 1e-12);
                assert!((budget - 1.5).abs() < 1e-12);
            }
            other => panic!("expected EmptyConsistentSet, got {other:?}"),
        }
        match chebyshev_center_sdp(&p, &g, 1e-10) {
            Err(Error::EmptyConsistentSet { .. }) => {}
            other => panic!("expected EmptyConsistentSet, got {other:?}"),
        }
    }

    #[test]
    fn boundary_delta_collapses_to_a_point() {
        let (mut p, g) = d1();
        p.y = vec![1.0, 1.5]; // delta = 1.5 = eps + eta
        let sol = chebyshev_center_orthonormal(&p, &g, 1e-10).unwrap();
        assert_eq!(sol.radius, 0.0);
        assert!((sol.tau_sharp - 1.0 / 1.5).abs() < 1e-12);
        assert!(sol.certificate.is_none());
    }

    #[test]
    fn exact_data_limit_matches_kernel_formula() {
        let (mut p, g) = d1();
        p.eta = 0.0;
        let sol = chebyshev_center_orthonormal(&p, &g, 1e-10).unwrap();
        assert!((sol.radius - 1.82f64.sqrt()).abs() < 1e-12);
        for (a, b) in sol.center.iter().zip(&[1.0, 1.0, 0.3]) {
            assert!((a - b).abs() < 1e-12);
        }
        assert_eq!(sol.tau_sharp, 1.0);
        assert!(sol.certificate.is_none());
    }

    #[test]
    fn ball_route_on_the_trivial_subspace_variant() {
        let (mut p, _) = d1();
        p.v_basis = Mat::zeros(3, 0);
        let g = validate(&p).unwrap();
        let sol = chebyshev_center_ball(&p, &g).unwrap();
        assert!((sol.tau_sharp - 0.5210868573894243).abs() < 1e-12);
        assert!((sol.radius - 0.8390653436360335).abs() < 1e-12);
        let expect = [0.0, 0.5210868573894243, 0.15632605721682732];
        for (a, b) in sol.center.iter().zip(&expect) {
            assert!((a - b).abs() < 1e-12);
        }
        let cert = sol.certificate.as_ref().unwrap();
        assert!((cert.a - 1.0).abs() < 1e-12);
        // h points into ker(Lambda) = span(e1).
        assert!(cert.h[1].abs() < 1e-10 && cert.h[2].abs() < 1e-10);
        assert!((cert.h[0].abs() - sol.radius).abs() < 1e-10);
    }

    #[test]
    fn ball_route_with_small_data_keeps_the_origin() {
        let (mut p, _) = d1();
        p.v_basis = Mat::zeros(3, 0);
        p.y = vec![0.3, 0.0];
        let g = validate(&p).unwrap();
        let sol = chebyshev_center_ball(&p, &g).unwrap();
        assert_eq!(sol.tau_sharp, 0.0);
        assert_eq!(sol.radius, p.epsilon);
        assert!(sol.center.iter().all(|&c| c == 0.0));
        assert!(sol.certificate.is_none());
    }

    #[test]
    fn sdp_route_agrees_with_the_eigen_route() {
        let (p, g) = d1();
        let eig = chebyshev_center_orthonormal(&p, &g, 1e-12).unwrap();
        let sdp = chebyshev_center_sdp(&p, &g, 1e-12).unwrap();
        assert_eq!(sdp.route, LocalRoute::ReducedSdp);
        assert!(
            (sdp.radius - eig.radius).abs() < 1e-7,
            "{} vs {}",
            sdp.radius,
            eig.radius
        );
        for (a, b) in sdp.center.iter().zip(&eig.center) {
            assert!((a - b).abs() < 1e-6);
        }
        assert!((sdp.tau_sharp - eig.tau_sharp).abs() < 1e-6);
    }

    #[test]
    fn sdp_route_rejects_exact_data() {
        let (mut p, g) = d1();
        p.eta = 0.0;
        assert!(matches!(
            chebyshev_center_sdp(&p, &g, 1e-10),
            Err(Error::StrictFeasibility(_))
        ));
    }

    #[test]
    fn sdp_route_handles_scaled_rows() {
        // Scale the observation rows; the consistent set in f-space changes,
        // so solve the same geometry by whitening and compare.
        let (p, g) = d1();
        let mut q = p.clone();
        q.lambda = Mat::from_rows(&[vec![0.0, 2.0, 0.0], vec![0.0, 0.0, 2.0]]);
        q.y = vec![2.0, 0.6];
        q.eta = 1.0; // scaled rows double the residual of any f
        let gq = validate(&q).unwrap();
        assert!(!gq.orthonormal);
        let sdp = chebyshev_center_sdp(&q, &gq, 1e-12).unwrap();
        let eig = chebyshev_center_orthonormal(&p, &g, 1e-12).unwrap();
        assert!((sdp.radius - eig.radius).abs() < 1e-6);
        for (a, b) in sdp.center.iter().zip(&eig.center) {
            assert!((a - b).abs() < 1e-5);
        }
    }

    #[test]
    fn balanced_budgets_with_compatible_data_balance_the_misfits() {
        let (mut p, g) = d1();
        p.eta = 1.0;
        p.y = vec![1.0, 0.0]; // delta = 0: y is exactly attainable from V
        let sol = chebyshev_center_orthonormal(&p, &g, 1e-10).unwrap();
        // center = f0 and the radius comes from maximizing lambda_min.
        for (a, b) in sol.center.iter().zip(&[1.0, 1.0, 0.0]) {
            assert!((a - b).abs() < 1e-6);
        }
        let lam = sol.lambda_sharp.unwrap();
        assert!((sol.radius - 1.0 / lam.sqrt()).abs() < 1e-7);
    }

    #[test]
    fn balanced_budgets_with_incompatible_data_report_no_root() {
        let (mut p, g) = d1();
        p.eta = 1.0;
        match chebyshev_center_orthonormal(&p, &g, 1e-10) {
            Err(Error::RootNotFound(msg)) => assert!(msg.contains("sdp"), "{msg}"),
            other => panic!("expected RootNotFound, got {other:?}"),
        }
        // The reduced route still solves it.
        let sol = chebyshev_center_sdp(&p, &g, 1e-10).unwrap();
        assert!(sol.radius > 0.0);
    }

    #[test]
    fn dispatcher_picks_routes_by_shape() {
        let (p, g) = d1();
        let sol = solve_local(&p, &g, LocalMethod::Auto, 1e-10).unwrap();
        assert_eq!(sol.route, LocalRoute::EigenEquation);

        let mut q = p.clone();
        q.v_basis = Mat::zeros(3, 0);
        let gq = validate(&q).unwrap();
        let sol = solve_local(&q, &gq, LocalMethod::Auto, 1e-10).unwrap();
        assert_eq!(sol.route, LocalRoute::Ball);

        let mut r = p.clone();
        r.lambda = Mat::from_rows(&[vec![0.0, 2.0, 0.0], vec![0.0, 0.0, 1.0]]);
        let gr = validate(&r).unwrap();
        let sol = solve_local(&r, &gr, LocalMethod::Auto, 1e-10).unwrap();
        assert_eq!(sol.route, LocalRoute::ReducedSdp);
    }

    #[test]
    fn center_map_is_nonlinear_in_the_data() {
        let (p, g) = d1();
        let c1 = chebyshev_center_orthonormal(&p, &g, 1e-12).unwrap().center;
        let mut p2 = p.clone();
        p2.y = vec![2.0, 0.6];
        let c2 = chebyshev_center_orthonormal(&p2, &g, 1e-12).unwrap().center;
        let gap: f64 = c2
            .iter()
            .zip(&c1)
            .map(|(a, b)| (a - 2.0 * b) * (a - 2.0 * b))
            .sum::<f64>()
            .sqrt();
        assert!(
            gap > 1e-4,
            "doubling the data scaled the center linearly (gap {gap:.3e})"
        );
    }
}
