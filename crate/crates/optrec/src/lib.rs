//! Worst-case optimal recovery in finite-dimensional Hilbert spaces.
//!
//! The unknown is a vector `f` in `R^N` that (a) nearly lies in a known
//! subspace `V` (`||P f|| <= epsilon`, with `P` the orthogonal projector
//! onto the complement of `V`) and (b) was observed through a linear map
//! `Lambda` with bounded noise (`||Lambda f - y|| <= eta`). This crate
//! computes, exactly up to numerical tolerance:
//!
//! * [`local::solve_local`]: the Chebyshev center and radius of the set of
//!   vectors consistent with one data vector `y`, with an optimality
//!   certificate that a third party can check independently;
//! * [`global::solve_global`]: a linear recovery map that is worst-case
//!   optimal over all data (for orthonormal observation rows), together
//!   with the matching lower bound that no map can beat;
//! * [`global::gwce_linear_bound`]: the certified worst-case error of any
//!   user-supplied linear map;
//! * [`oracle`]: randomized lower bounds on radii and worst-case errors,
//!   plus a certificate checker, so every reported value can be bracketed
//!   without trusting the solver.
//!
//! The central object is the one-parameter family
//! `A(tau) = (1 - tau) P + tau Lambda^T Lambda` for `tau` in `[0, 1]`; both
//! centers and optimal maps arise from the regularized solutions
//! `A(tau) f = tau Lambda^T y` at specially chosen weights
//! ([`regularize`]). Everything is deterministic: the same input bytes and
//! seed produce the same output bytes.
//!
//! ```
//! use optrec::{global, local, model, oracle};
//!
//! let json = r#"{
//!     "lambda":  [[0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
//!     "v_basis": [[0.7071067811865475, 0.7071067811865475, 0.0]],
//!     "epsilon": 1.0,
//!     "eta":     0.5,
//!     "y":       [1.0, 0.3]
//! }"#;
//! let p = model::ProblemInstance::from_json_str(json).unwrap();
//! let g = model::validate(&p).unwrap();
//!
//! let sol = local::solve_local(&p, &g, local::LocalMethod::Auto, 1e-10).unwrap();
//! assert!((sol.radius - 1.9385779115930444).abs() < 1e-9);
//! let check = oracle::check_center_certificate(&p, &g, &sol).unwrap();
//! assert!(check.passed);
//!
//! let glob = global::solve_global(&p, &g, None, 1e-10).unwrap();
//! let bound = global::gwce_linear_bound(&p, &g, &glob.map).unwrap();
//! assert!(bound <= glob.lb * (1.0 + 1e-6));
//! ```

pub mod cli;
pub mod error;
pub mod global;
pub mod linalg;
pub mod local;
pub mod model;
pub mod oracle;
pub mod regularize;
pub mod report;

pub use error::{Error, Result};
