#![allow(dead_code)]

use conceptor_debias::synthetic::gaussian;
use conceptor_debias::{Conceptor, DataMatrix};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_data(rng: &mut impl Rng, dim: usize, count: usize) -> DataMatrix {
    let cols: Vec<Vec<f64>> = (0..count).map(|_| gaussian(rng, dim, 1.0)).collect();
    DataMatrix::from_columns(&cols).unwrap()
}

pub fn random_orthogonal(rng: &mut impl Rng, dim: usize) -> DMatrix<f64> {
    let g = DMatrix::from_fn(dim, dim, |_, _| rng.sample::<f64, _>(rand_distr::StandardNormal));
    g.qr().q()
}

/// `Q diag(s) Qᵀ` with `s` uniform in `[lo, hi]`.
pub fn random_conceptor(rng: &mut impl Rng, dim: usize, lo: f64, hi: f64) -> Conceptor {
    let q = random_orthogonal(rng, dim);
    let s = DVector::from_fn(dim, |_, _| rng.random_range(lo..=hi));
    let m = &q * DMatrix::from_diagonal(&s) * q.transpose();
    Conceptor::from_matrix((&m + m.transpose()) * 0.5, 1.0).unwrap()
}

/// Minimizes the conceptor objective by plain gradient descent over all
/// N² entries, using per-sample residuals for the gradient:
/// `∇ = −(2/n) Σ (xᵢ − C xᵢ) xᵢᵀ + 2α⁻² C`.
pub fn gradient_descent_conceptor(data: &DataMatrix, aperture: f64) -> DMatrix<f64> {
    let x = data.matrix();
    let (dim, n) = (x.nrows(), x.ncols());
    let reg = aperture.powi(-2);
    // Lipschitz bound: 2 (‖X‖²_F / n + α⁻²).
    let lip = 2.0 * (x.norm_squared() / n as f64 + reg);
    let step = 1.0 / lip;
    let mut c = DMatrix::<f64>::zeros(dim, dim);
    for _ in 0..200_000 {
        let mut grad = &c * (2.0 * reg);
        for j in 0..n {
            let col = x.column(j);
            let r = col - &c * col;
            grad -= (r * col.transpose()) * (2.0 / n as f64);
        }
        if grad.norm() < 1e-11 {
            break;
        }
        c -= grad * step;
    }
    c
}

/// Frobenius-norm-`scale` random symmetric perturbation.
pub fn random_perturbation(rng: &mut impl Rng, dim: usize, scale: f64) -> DMatrix<f64> {
    let g = DMatrix::from_fn(dim, dim, |_, _| rng.sample::<f64, _>(rand_distr::StandardNormal));
    let n = g.norm();
    g * (scale / n)
}
