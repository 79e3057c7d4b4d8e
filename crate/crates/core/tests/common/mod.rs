//! Reference implementations used as test oracles. None of them goes through
//! the library's spectral calculus.

#![allow(dead_code)]

use entrolab_core::linalg::{c, identity, CMatrix, DensityOperator};
use nalgebra::SymmetricEigen;

/// Largest singular value by power iteration on `X^dagger X`.
pub fn power_iteration_norm(x: &CMatrix) -> f64 {
    let n = x.ncols();
    let gram = x.adjoint() * x;
    let mut v = nalgebra::DVector::from_fn(n, |i, _| c(1.0 + 0.37 * i as f64, 0.11 * i as f64));
    let mut estimate = 0.0;
    for _ in 0..2000 {
        let w = &gram * &v;
        let norm = w.norm();
        if norm == 0.0 {
            return 0.0;
        }
        estimate = norm / v.norm();
        v = w / c(norm, 0.0);
    }
    estimate.sqrt()
}

/// `exp(x)` by scaling and squaring a truncated Taylor series.
pub fn expm_taylor(x: &CMatrix) -> CMatrix {
    let norm = x.iter().map(|z| z.norm()).sum::<f64>().max(1e-300);
    let squarings = norm.log2().ceil().max(0.0) as i32 + 4;
    let scaled = x / c(2f64.powi(squarings), 0.0);
    let n = x.nrows();
    let mut term = identity(n);
    let mut sum = identity(n);
    for k in 1..30 {
        term = &term * &scaled / c(k as f64, 0.0);
        sum += &term;
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

/// Partial trace by explicit index sums (A-major ordering).
pub fn partial_trace_loops(x: &CMatrix, da: usize, db: usize, keep_a: bool) -> CMatrix {
    if keep_a {
        CMatrix::from_fn(da, da, |i, j| (0..db).map(|k| x[(i * db + k, j * db + k)]).sum())
    } else {
        CMatrix::from_fn(db, db, |i, j| (0..da).map(|k| x[(k * db + i, k * db + j)]).sum())
    }
}

/// `sum_i p_i log(p_i / q_i)`.
pub fn kl(p: &[f64], q: &[f64]) -> f64 {
    p.iter()
        .zip(q)
        .filter(|(pi, _)| **pi > 0.0)
        .map(|(pi, qi)| pi * (pi / qi).ln())
        .sum()
}

pub fn diagonal(state: &DensityOperator) -> Vec<f64> {
    (0..state.dim()).map(|i| state.matrix()[(i, i)].re).collect()
}

/// `sum_i l_i log l_i - sum_ij l_i |<u_i|v_j>|^2 log m_j` from raw
/// eigendecompositions of both states.
pub fn relative_entropy_double_sum(rho: &DensityOperator, sigma: &DensityOperator) -> f64 {
    let r = SymmetricEigen::new(rho.matrix().clone());
    let s = SymmetricEigen::new(sigma.matrix().clone());
    let n = rho.dim();
    let mut total = 0.0;
    for i in 0..n {
        let li = r.eigenvalues[i];
        if li <= 1e-15 {
            continue;
        }
        total += li * li.ln();
        for j in 0..n {
            let overlap = r.eigenvectors.column(i).dotc(&s.eigenvectors.column(j)).norm_sqr();
            total -= li * overlap * s.eigenvalues[j].ln();
        }
    }
    total
}

/// Principal logarithm of a positive definite matrix from a raw
/// eigendecomposition.
pub fn logm(x: &CMatrix) -> CMatrix {
    let e = SymmetricEigen::new(x.clone());
    let d = nalgebra::DVector::from_iterator(e.eigenvalues.len(), e.eigenvalues.iter().map(|l| c(l.ln(), 0.0)));
    &e.eigenvectors * CMatrix::from_diagonal(&d) * e.eigenvectors.adjoint()
}

/// Central difference `(log(g + h f) - log(g - h f)) / 2h`, the directional
/// derivative of `log` at `g`.
pub fn log_derivative_fd(g: &CMatrix, f: &CMatrix, h: f64) -> CMatrix {
    let step = f * c(h, 0.0);
    (logm(&(g + &step)) - logm(&(g - &step))) / c(2.0 * h, 0.0)
}
