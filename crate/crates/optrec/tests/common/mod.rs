//! Shared fixtures and instance generators for the integration suites.
//!
//! Generators are deterministic in their seed and independent of the
//! library's solvers: orthonormalization is done here with plain
//! Gram-Schmidt rather than through the crate's validation machinery.

#![allow(dead_code)]

use optrec::linalg::{self, Mat};
use optrec::model::{self, Geometry, ProblemInstance};
use optrec::oracle::Rng;
use optrec::regularize;

/// The worked 3-dimensional example: observations of the second and third
/// coordinates, approximation space spanned by (1, 1, 0).
pub fn d1() -> (ProblemInstance, Geometry) {
    let p = ProblemInstance {
        lambda: Mat::from_rows(&[vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]]),
        v_basis: Mat::from_cols(3, &[vec![1.0, 1.0, 0.0]]),
        epsilon: 1.0,
        eta: 0.5,
        y: vec![1.0, 0.3],
    };
    let g = model::validate(&p).expect("the running example validates");
    (p, g)
}

fn gaussian_vec(rng: &mut Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.normal()).collect()
}

/// Plain Gram-Schmidt on random Gaussian rows; `None` when a draw is too
/// close to dependent to normalize safely.
fn random_orthonormal_rows(rng: &mut Rng, m: usize, n_dim: usize) -> Option<Vec<Vec<f64>>> {
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(m);
    for _ in 0..m {
        let mut v = gaussian_vec(rng, n_dim);
        for prev in &rows {
            let c = linalg::dot(&v, prev);
            for (vi, pi) in v.iter_mut().zip(prev) {
                *vi -= c * pi;
            }
        }
        let nv = linalg::norm(&v);
        if nv < 1e-6 {
            return None;
        }
        for vi in &mut v {
            *vi /= nv;
        }
        rows.push(v);
    }
    Some(rows)
}

fn in_range(rng: &mut Rng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.uniform()
}

/// Scales `y` so that the minimal data misfit over `V` equals `target`.
/// The misfit is positively homogeneous in `y`, so one measurement and one
/// rescale suffice. Returns `None` when the drawn `y` is (numerically)
/// interpolable exactly, which would make the scale degenerate.
fn scale_y_to_delta(p: &mut ProblemInstance, g: &Geometry, target: f64) -> Option<()> {
    let ints = regularize::interpolants(p, g).ok()?;
    if ints.delta <= 1e-9 {
        return None;
    }
    let s = target / ints.delta;
    for yi in &mut p.y {
        *yi *= s;
    }
    Some(())
}

/// Random instance with orthonormal observation rows, a nontrivial
/// approximation space, distinct budgets, and data strictly inside the
/// feasibility region (`delta <= 0.9 (eps + eta)`). `N <= 6`.
pub fn random_orthonormal(seed: u64) -> (ProblemInstance, Geometry) {
    let mut rng = Rng::new(seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(0x51));
    loop {
        let n_dim = 3 + (rng.next_u64() % 4) as usize;
        let m = 1 + (rng.next_u64() % (n_dim as u64 - 1)) as usize;
        let n_sub = 1 + (rng.next_u64() % m.min(n_dim - m) as u64) as usize;
        let Some(rows) = random_orthonormal_rows(&mut rng, m, n_dim) else {
            continue;
        };
        let cols: Vec<Vec<f64>> = (0..n_sub).map(|_| gaussian_vec(&mut rng, n_dim)).collect();
        let epsilon = in_range(&mut rng, 0.3, 2.0);
        let eta = in_range(&mut rng, 0.3, 2.0);
        if (epsilon - eta).abs() < 0.05 {
            continue;
        }
        let mut p = ProblemInstance {
            lambda: Mat::from_rows(&rows),
            v_basis: Mat::from_cols(n_dim, &cols),
            epsilon,
            eta,
            y: gaussian_vec(&mut rng, m),
        };
        let Ok(g) = model::validate(&p) else { continue };
        if !g.orthonormal {
            continue;
        }
        let target = in_range(&mut rng, 0.05, 0.9) * (epsilon + eta);
        if scale_y_to_delta(&mut p, &g, target).is_none() {
            continue;
        }
        return (p, g);
    }
}

/// Random orthonormal instance with exact data (`eta = 0`) and a feasible
/// misfit `delta < 0.8 eps`.
pub fn random_eta_zero(seed: u64) -> (ProblemInstance, Geometry) {
    let mut rng = Rng::new(seed.wrapping_mul(0xD134_2543_DE82_EF95).wrapping_add(0x97));
    loop {
        let n_dim = 3 + (rng.next_u64() % 4) as usize;
        let m = 1 + (rng.next_u64() % (n_dim as u64 - 1)) as usize;
        let n_sub = 1 + (rng.next_u64() % m.min(n_dim - m) as u64) as usize;
        let Some(rows) = random_orthonormal_rows(&mut rng, m, n_dim) else {
            continue;
        };
        let cols: Vec<Vec<f64>> = (0..n_sub).map(|_| gaussian_vec(&mut rng, n_dim)).collect();
        let epsilon = in_range(&mut rng, 0.3, 2.0);
        let mut p = ProblemInstance {
            lambda: Mat::from_rows(&rows),
            v_basis: Mat::from_cols(n_dim, &cols),
            epsilon,
            eta: 0.0,
            y: gaussian_vec(&mut rng, m),
        };
        let Ok(g) = model::validate(&p) else { continue };
        if !g.orthonormal {
            continue;
        }
        let target = in_range(&mut rng, 0.05, 0.8) * epsilon;
        if scale_y_to_delta(&mut p, &g, target).is_none() {
            continue;
        }
        return (p, g);
    }
}

/// Random instance with `V = {0}`: orthonormal rows, `m < N`, and data
/// inside the consistency bound `||y|| < eps + eta`. Roughly a third of the
/// draws put `||y|| <= eta` (the tau = 0 regime) and a sixth use `eta = 0`.
pub fn random_ball(seed: u64) -> (ProblemInstance, Geometry) {
    let mut rng = Rng::new(seed.wrapping_mul(0xA076_1D64_78BD_642F).wrapping_add(0x2B));
    loop {
        let n_dim = 3 + (rng.next_u64() % 4) as usize;
        let m = 1 + (rng.next_u64() % (n_dim as u64 - 1)) as usize;
        let Some(rows) = random_orthonormal_rows(&mut rng, m, n_dim) else {
            continue;
        };
        let epsilon = in_range(&mut rng, 0.3, 2.0);
        let eta = match rng.next_u64() % 6 {
            0 => 0.0,
            _ => in_range(&mut rng, 0.1, 1.5),
        };
        let mut y = gaussian_vec(&mut rng, m);
        let ny = linalg::norm(&y);
        if ny < 1e-9 {
            continue;
        }
        let target = match rng.next_u64() % 3 {
            0 if eta > 0.0 => in_range(&mut rng, 0.05, 0.95) * eta,
            _ => in_range(&mut rng, 0.05, 0.95) * (epsilon + eta),
        };
        for yi in &mut y {
            *yi *= target / ny;
        }
        let p = ProblemInstance {
            lambda: Mat::from_rows(&rows),
            v_basis: Mat::zeros(n_dim, 0),
            epsilon,
            eta,
            y,
        };
        let Ok(g) = model::validate(&p) else { continue };
        return (p, g);
    }
}

/// Euclidean distance between two vectors.
pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}
