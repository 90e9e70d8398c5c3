//! Conceptors: regularized identity maps over a data collection, plus the
//! Boolean algebra (NOT / AND / OR) and the projection used for debiasing.
//!
//! A conceptor for columns `x₁ … xₙ` of `X` minimizes
//! `(1/n) Σ ‖xᵢ − C xᵢ‖² + α⁻² ‖C‖²_F`, with closed form
//! `C = R (R + α⁻² I)⁻¹` where `R = (1/n) X Xᵀ`. It is evaluated through the
//! eigendecomposition of `R`: `C = U diag(σᵢ / (σᵢ + α⁻²)) Uᵀ`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, SortedEigen};

/// Regularizer added before every inversion in AND / OR.
pub const INVERSION_EPS: f64 = 1e-10;

/// Slack allowed on the symmetry and spectrum checks.
pub const VALIDATION_TOL: f64 = 1e-9;

pub const DEFAULT_APERTURE: f64 = 1.0;

/// How the correlation matrix is scaled before the closed form is applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GramScaling {
    /// `R = (1/n) X Xᵀ`; invariant to the number of samples.
    #[default]
    Mean,
    /// `R = X Xᵀ`, the unnormalized variant.
    Sum,
}

/// Stacked embeddings, one column per sample (`dim × count`).
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    columns: DMatrix<f64>,
}

impl DataMatrix {
    pub fn new(columns: DMatrix<f64>) -> Result<Self> {
        if columns.nrows() == 0 {
            return Err(Error::param("data matrix needs dim >= 1"));
        }
        if columns.ncols() == 0 {
            return Err(Error::data("data matrix needs at least one column"));
        }
        if let Some(pos) = columns.iter().position(|v| !v.is_finite()) {
            let (row, col) = (pos % columns.nrows(), pos / columns.nrows());
            return Err(Error::data(format!("non-finite entry at row {row}, column {col}")));
        }
        Ok(DataMatrix { columns })
    }

    /// Builds from a list of equally long vectors.
    pub fn from_columns<V: AsRef<[f64]>>(cols: &[V]) -> Result<Self> {
        let first = cols
            .first()
            .ok_or_else(|| Error::data("data matrix needs at least one column"))?;
        let dim = first.as_ref().len();
        let mut m = DMatrix::zeros(dim, cols.len());
        for (j, c) in cols.iter().enumerate() {
            let c = c.as_ref();
            if c.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    actual: c.len(),
                });
            }
            m.column_mut(j).copy_from_slice(c);
        }
        DataMatrix::new(m)
    }

    pub fn dim(&self) -> usize {
        self.columns.nrows()
    }

    pub fn count(&self) -> usize {
        self.columns.ncols()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.columns
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.columns.column(j).iter().copied().collect()
    }

    pub fn into_columns(self) -> Vec<Vec<f64>> {
        (0..self.count()).map(|j| self.column(j)).collect()
    }

    /// Correlation matrix `X Xᵀ`, scaled per `scaling`.
    pub fn correlation(&self, scaling: GramScaling) -> DMatrix<f64> {
        let gram = &self.columns * self.columns.transpose();
        match scaling {
            GramScaling::Mean => gram / self.count() as f64,
            GramScaling::Sum => gram,
        }
    }
}

/// Symmetric matrix with spectrum in `[0, 1]`.
///
/// Conceptors computed from data have spectrum strictly below 1; negations,
/// the identity and results of AND / OR may touch 1.
#[derive(Debug, Clone, PartialEq)]
pub struct Conceptor {
    matrix: DMatrix<f64>,
    aperture: f64,
}

impl Conceptor {
    /// Validates symmetry and spectrum (both within [`VALIDATION_TOL`]).
    pub fn from_matrix(matrix: DMatrix<f64>, aperture: f64) -> Result<Self> {
        check_aperture(aperture)?;
        if !matrix.is_square() || matrix.nrows() == 0 {
            return Err(Error::data(format!(
                "conceptor matrix must be square and non-empty, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if matrix.iter().any(|v| !v.is_finite()) {
            return Err(Error::data("conceptor matrix has non-finite entries"));
        }
        let asym = linalg::max_asymmetry(&matrix);
        if asym > VALIDATION_TOL {
            return Err(Error::data(format!(
                "conceptor matrix is not symmetric (max asymmetry {asym:e})"
            )));
        }
        let eig = SortedEigen::new(&matrix);
        let (hi, lo) = (eig.values[0], *eig.values.last().unwrap());
        if lo < -VALIDATION_TOL || hi > 1.0 + VALIDATION_TOL {
            return Err(Error::data(format!(
                "conceptor spectrum [{lo}, {hi}] lies outside [0, 1]"
            )));
        }
        Ok(Conceptor { matrix, aperture })
    }

    pub(crate) fn from_trusted(matrix: DMatrix<f64>, aperture: f64) -> Self {
        debug_assert!(linalg::max_asymmetry(&matrix) <= VALIDATION_TOL);
        Conceptor { matrix, aperture }
    }

    pub fn identity(dim: usize) -> Self {
        Conceptor::from_trusted(DMatrix::identity(dim, dim), DEFAULT_APERTURE)
    }

    pub fn zero(dim: usize) -> Self {
        Conceptor::from_trusted(DMatrix::zeros(dim, dim), DEFAULT_APERTURE)
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.matrix
    }

    pub fn aperture(&self) -> f64 {
        self.aperture
    }

    /// Eigenvalues, descending.
    pub fn spectrum(&self) -> Vec<f64> {
        SortedEigen::new(&self.matrix).values
    }

    pub fn eigen(&self) -> SortedEigen {
        SortedEigen::new(&self.matrix)
    }

    pub fn not(&self) -> Conceptor {
        negate(self)
    }

    pub fn and(&self, other: &Conceptor) -> Result<Conceptor> {
        and_op(self, other)
    }

    pub fn or(&self, other: &Conceptor) -> Result<Conceptor> {
        or_op(self, other)
    }

    /// Applies `C` to one vector.
    pub fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: v.len(),
            });
        }
        let n = self.dim();
        Ok((0..n)
            .map(|i| (0..n).map(|j| self.matrix[(i, j)] * v[j]).sum())
            .collect())
    }
}

fn check_aperture(aperture: f64) -> Result<()> {
    if aperture.is_finite() && aperture > 0.0 {
        Ok(())
    } else {
        Err(Error::param(format!("aperture must be > 0, got {aperture}")))
    }
}

fn check_dims(a: &Conceptor, b: &Conceptor) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            actual: b.dim(),
        });
    }
    Ok(())
}

/// Closed-form conceptor with `R = (1/n) X Xᵀ`.
pub fn compute_conceptor(data: &DataMatrix, aperture: f64) -> Result<Conceptor> {
    compute_conceptor_with(data, aperture, GramScaling::Mean)
}

pub fn compute_conceptor_with(data: &DataMatrix, aperture: f64, scaling: GramScaling) -> Result<Conceptor> {
    check_aperture(aperture)?;
    let reg = aperture.powi(-2);
    let eig = SortedEigen::new(&data.correlation(scaling));
    let matrix = eig.reconstruct_with(|s| {
        // R is PSD; negative values are round-off.
        let s = s.max(0.0);
        s / (s + reg)
    });
    Ok(Conceptor::from_trusted(matrix, aperture))
}

/// `¬C = I − C`.
pub fn negate(c: &Conceptor) -> Conceptor {
    let n = c.dim();
    let m = DMatrix::identity(n, n) - &c.matrix;
    Conceptor::from_trusted(m, c.aperture)
}

/// `(A⁻¹ + B⁻¹ − I)⁻¹` with each inversion taken as `(M + εI)⁻¹`, the
/// result symmetrized and its eigenvalues clamped to `[0, 1]`.
fn conjunction(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    let sum = linalg::regularized_inverse(a, INVERSION_EPS) + linalg::regularized_inverse(b, INVERSION_EPS)
        - DMatrix::<f64>::identity(n, n);
    SortedEigen::new(&sum).reconstruct_with(|v| (1.0 / (v + INVERSION_EPS)).clamp(0.0, 1.0))
}

/// `C₁ ∧ C₂ = (C₁⁻¹ + C₂⁻¹ − I)⁻¹`.
pub fn and_op(c1: &Conceptor, c2: &Conceptor) -> Result<Conceptor> {
    check_dims(c1, c2)?;
    Ok(Conceptor::from_trusted(
        conjunction(&c1.matrix, &c2.matrix),
        c1.aperture,
    ))
}

/// `C₁ ∨ C₂ = I − ((I − C₁)⁻¹ + (I − C₂)⁻¹ − I)⁻¹`.
pub fn or_op(c1: &Conceptor, c2: &Conceptor) -> Result<Conceptor> {
    check_dims(c1, c2)?;
    let n = c1.dim();
    let id = DMatrix::<f64>::identity(n, n);
    let inner = conjunction(&(&id - &c1.matrix), &(&id - &c2.matrix));
    let m = SortedEigen::new(&(id - inner)).reconstruct_with(|v| v.clamp(0.0, 1.0));
    Ok(Conceptor::from_trusted(m, c1.aperture))
}

/// Replaces every column `t` with `C t`. Debiasing passes `¬C`.
pub fn apply_projection(c: &Conceptor, vectors: &DataMatrix) -> Result<DataMatrix> {
    if c.dim() != vectors.dim() {
        return Err(Error::DimensionMismatch {
            expected: c.dim(),
            actual: vectors.dim(),
        });
    }
    Ok(DataMatrix {
        columns: &c.matrix * vectors.matrix(),
    })
}

/// Value of the conceptor objective `(1/n) Σ ‖xᵢ − C xᵢ‖² + α⁻² ‖C‖²_F`,
/// summed sample by sample.
pub fn objective(c: &DMatrix<f64>, data: &DataMatrix, aperture: f64) -> f64 {
    let x = data.matrix();
    let n = x.ncols();
    let mut fit = 0.0;
    for j in 0..n {
        let col = x.column(j);
        let r = col - c * col;
        fit += r.norm_squared();
    }
    fit / n as f64 + aperture.powi(-2) * c.norm_squared()
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DVector;

    fn diag(v: &[f64]) -> DMatrix<f64> {
        DMatrix::from_diagonal(&DVector::from_row_slice(v))
    }

    fn close(a: &DMatrix<f64>, b: &DMatrix<f64>, tol: f64) -> bool {
        linalg::max_abs_diff(a, b) <= tol
    }

    #[test]
    fn zero_data_gives_zero_conceptor() {
        let x = DataMatrix::new(DMatrix::zeros(4, 6)).unwrap();
        let c = compute_conceptor(&x, 1.0).unwrap();
        assert!(close(c.matrix(), &DMatrix::zeros(4, 4), 0.0));
    }

    #[test]
    fn rank_one_unit_vector() {
        let x = DataMatrix::from_columns(&[[1.0, 0.0, 0.0]]).unwrap();
        let c = compute_conceptor(&x, 1.0).unwrap();
        assert!(close(c.matrix(), &diag(&[0.5, 0.0, 0.0]), 1e-15));
        let nc = negate(&c);
        assert!(close(nc.matrix(), &diag(&[0.5, 1.0, 1.0]), 1e-15));
    }

    #[test]
    fn sum_scaling_differs_from_mean() {
        let x = DataMatrix::from_columns(&[[1.0, 0.0], [1.0, 0.0]]).unwrap();
        let mean = compute_conceptor_with(&x, 1.0, GramScaling::Mean).unwrap();
        let sum = compute_conceptor_with(&x, 1.0, GramScaling::Sum).unwrap();
        assert!((mean.matrix()[(0, 0)] - 0.5).abs() < 1e-15);
        assert!((sum.matrix()[(0, 0)] - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_aperture_and_data() {
        let x = DataMatrix::from_columns(&[[1.0, 0.0]]).unwrap();
        assert!(matches!(compute_conceptor(&x, 0.0), Err(Error::Parameter(_))));
        assert!(matches!(compute_conceptor(&x, -1.0), Err(Error::Parameter(_))));
        assert!(matches!(
            DataMatrix::from_columns(&[[1.0, f64::NAN]]),
            Err(Error::Data(_))
        ));
        assert!(matches!(DataMatrix::from_columns::<[f64; 2]>(&[]), Err(Error::Data(_))));
    }

    #[test]
    fn negate_zero_is_identity_and_involutive() {
        assert_eq!(negate(&Conceptor::zero(3)).matrix(), &DMatrix::identity(3, 3));
        let c = Conceptor::from_matrix(diag(&[0.3, 0.7]), 1.0).unwrap();
        assert!(close(negate(&negate(&c)).matrix(), c.matrix(), 1e-15));
    }

    #[test]
    fn and_or_with_units() {
        let c = Conceptor::from_matrix(diag(&[0.5, 0.0, 0.0]), 1.0).unwrap();
        let id = Conceptor::identity(3);
        let zero = Conceptor::zero(3);
        assert!(close(and_op(&c, &id).unwrap().matrix(), c.matrix(), 1e-6));
        assert!(close(and_op(&id, &id).unwrap().matrix(), id.matrix(), 1e-6));
        assert!(close(or_op(&c, &zero).unwrap().matrix(), c.matrix(), 1e-6));
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let a = Conceptor::identity(2);
        let b = Conceptor::identity(3);
        assert!(matches!(and_op(&a, &b), Err(Error::DimensionMismatch { .. })));
        assert!(matches!(or_op(&a, &b), Err(Error::DimensionMismatch { .. })));
        let v = DataMatrix::from_columns(&[[1.0, 2.0, 3.0]]).unwrap();
        assert!(apply_projection(&a, &v).is_err());
    }

    #[test]
    fn projection_by_identity_and_zero() {
        let v = DataMatrix::from_columns(&[[1.0, -2.0], [0.25, 4.0]]).unwrap();
        let same = apply_projection(&Conceptor::identity(2), &v).unwrap();
        assert_eq!(same, v);
        let zero = apply_projection(&Conceptor::zero(2), &v).unwrap();
        assert!(zero.matrix().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn from_matrix_validates() {
        assert!(Conceptor::from_matrix(diag(&[1.5, 0.0]), 1.0).is_err());
        assert!(Conceptor::from_matrix(diag(&[-0.1, 0.0]), 1.0).is_err());
        let asym = DMatrix::from_row_slice(2, 2, &[0.5, 0.1, 0.0, 0.5]);
        assert!(Conceptor::from_matrix(asym, 1.0).is_err());
        assert!(Conceptor::from_matrix(diag(&[0.5, 0.5]), 0.0).is_err());
    }

    // C ∨ C is the aperture-adapted conceptor: eigenvalue c maps to 2c/(1+c).
    #[test]
    fn self_disjunction_adapts_aperture() {
        let c = Conceptor::from_matrix(diag(&[0.5, 0.2, 0.0]), 1.0).unwrap();
        let or = or_op(&c, &c).unwrap();
        let expect = diag(&[2.0 * 0.5 / 1.5, 2.0 * 0.2 / 1.2, 0.0]);
        assert!(close(or.matrix(), &expect, 1e-9));
        let and = and_op(&c, &c).unwrap();
        let expect = diag(&[0.5 / 1.5, 0.2 / 1.8, 0.0]);
        assert!(close(and.matrix(), &expect, 1e-9));
    }

    #[test]
    fn self_disjunction_of_projector_is_idempotent() {
        let p = Conceptor::from_matrix(diag(&[1.0, 0.0, 1.0]), 1.0).unwrap();
        assert!(close(or_op(&p, &p).unwrap().matrix(), p.matrix(), 1e-6));
        assert!(close(and_op(&p, &p).unwrap().matrix(), p.matrix(), 1e-6));
    }
}
