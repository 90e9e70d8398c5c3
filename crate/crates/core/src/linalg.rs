//! Small symmetric-matrix helpers on top of nalgebra.

use nalgebra::DMatrix;

/// Eigendecomposition of a symmetric matrix with eigenvalues sorted in
/// descending order; column `k` of `vectors` belongs to `values[k]`.
#[derive(Debug, Clone)]
pub struct SortedEigen {
    pub values: Vec<f64>,
    pub vectors: DMatrix<f64>,
}

impl SortedEigen {
    pub fn new(m: &DMatrix<f64>) -> Self {
        let eig = symmetrize(m).symmetric_eigen();
        let n = eig.eigenvalues.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));

        let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let mut vectors = DMatrix::zeros(n, n);
        for (dst, &src) in order.iter().enumerate() {
            vectors.set_column(dst, &eig.eigenvectors.column(src));
        }
        SortedEigen { values, vectors }
    }

    /// Rebuilds `U diag(f(λ)) Uᵀ`.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
        let mapped: Vec<f64> = self.values.iter().map(|&v| f(v)).collect();
        compose(&self.vectors, &mapped)
    }

    /// First `k` eigenvectors as columns.
    pub fn leading(&self, k: usize) -> DMatrix<f64> {
        self.vectors.columns(0, k).into_owned()
    }
}

/// `U diag(values) Uᵀ`, symmetrized.
pub fn compose(vectors: &DMatrix<f64>, values: &[f64]) -> DMatrix<f64> {
    let mut scaled = vectors.clone();
    for (k, &v) in values.iter().enumerate() {
        scaled.column_mut(k).scale_mut(v);
    }
    symmetrize(&(scaled * vectors.transpose()))
}

pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Largest `|m[i,j] - m[j,i]|`.
pub fn max_asymmetry(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in (i + 1)..n {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst
}

pub fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// `(M + εI)⁻¹` for symmetric `M`, computed through the eigendecomposition.
pub fn regularized_inverse(m: &DMatrix<f64>, eps: f64) -> DMatrix<f64> {
    SortedEigen::new(m).reconstruct_with(|v| 1.0 / (v + eps))
}

/// Largest principal angle (radians) between the column spaces of two
/// matrices with orthonormal columns.
///
/// Uses `asin(‖(I − AAᵀ)B‖₂)`, which stays accurate for tiny angles where the
/// `acos` of the cosine would lose precision.
pub fn max_subspace_angle(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    assert_eq!(a.nrows(), b.nrows());
    assert_eq!(a.ncols(), b.ncols());
    let residual = b - a * (a.transpose() * b);
    let sv = residual.singular_values();
    let top = sv.iter().cloned().fold(0.0, f64::max);
    top.min(1.0).asin()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
