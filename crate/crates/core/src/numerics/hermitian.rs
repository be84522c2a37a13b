//! Hermitian factorization, trace normalization and whitened least squares.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::array::{CMatrix, CVector};
use crate::error::{Error, Result};
use crate::noise::SpeckleCovariance;

/// Eigendecomposition-backed factor bundle for a Hermitian positive definite Q:
/// the inverse square root used for whitening, the inverse, and ln|Q|.
#[derive(Debug, Clone)]
pub struct HermitianFactor {
    original: CMatrix,
    inv_sqrt: CMatrix,
    inverse: CMatrix,
    log_det: f64,
}

impl HermitianFactor {
    pub fn original(&self) -> &CMatrix {
        &self.original
    }

    /// Q^{-1/2}; Hermitian by construction (U diag(lambda^{-1/2}) U^H).
    pub fn inv_sqrt(&self) -> &CMatrix {
        &self.inv_sqrt
    }

    pub fn inverse(&self) -> &CMatrix {
        &self.inverse
    }

    pub fn log_det(&self) -> f64 {
        self.log_det
    }
}

/// Factor a Hermitian positive definite covariance.
///
/// Eigenvalues at or below `1e-10 * lambda_max` are treated as a hard failure
/// rather than clamped; the offending eigenvalue is reported.
pub fn hermitian_factor(covariance: &SpeckleCovariance) -> Result<HermitianFactor> {
    let q = covariance.matrix();
    let eig = SymmetricEigen::new(q.clone());
    let lambda_max = eig.eigenvalues.max();
    let lambda_min = eig.eigenvalues.min();
    if !(lambda_max > 0.0) || lambda_min <= 1e-10 * lambda_max {
        return Err(Error::Singular(format!(
            "covariance not positive definite: eigenvalue {lambda_min:.6e} \
             below threshold {:.6e}",
            1e-10 * lambda_max
        )));
    }
    let u = &eig.eigenvectors;
    let inv_sqrt_diag =
        DMatrix::from_diagonal(&eig.eigenvalues.map(|l| Complex64::from(1.0 / l.sqrt())));
    let inv_sqrt = u * inv_sqrt_diag * u.adjoint();
    let inverse = inv_sqrt.adjoint() * &inv_sqrt;
    let log_det = eig.eigenvalues.iter().map(|l| l.ln()).sum();
    Ok(HermitianFactor {
        original: q.clone(),
        inv_sqrt,
        inverse,
        log_det,
    })
}

/// Q_n = N * Q / tr(Q).
pub fn normalize_trace(covariance: &SpeckleCovariance) -> Result<SpeckleCovariance> {
    let tr = covariance.trace();
    if !(tr > 0.0) {
        return Err(Error::Domain(format!(
            "trace must be positive to normalize (tr = {tr})"
        )));
    }
    let n = covariance.dim() as f64;
    SpeckleCovariance::new(covariance.matrix() * Complex64::from(n / tr))
}

/// Thin-QR least-squares solver for a fixed (whitened) steering matrix,
/// reused across the snapshots of a block.
#[derive(Debug, Clone)]
pub struct LsSolver {
    thin_q: CMatrix,
    r: CMatrix,
}

impl LsSolver {
    pub fn new(matrix: &CMatrix) -> Result<Self> {
        if matrix.nrows() < matrix.ncols() {
            return Err(Error::Dimension(format!(
                "least squares needs a tall matrix ({}x{})",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let qr = matrix.clone().qr();
        let thin_q = qr.q();
        let r = qr.r();
        let mut diag_max: f64 = 0.0;
        for i in 0..r.nrows() {
            diag_max = diag_max.max(r[(i, i)].norm());
        }
        for i in 0..r.nrows() {
            if r[(i, i)].norm() <= 1e-12 * diag_max.max(f64::MIN_POSITIVE) {
                return Err(Error::Singular(format!(
                    "rank-deficient matrix in least squares (|r_{i}{i}| = {:.3e})",
                    r[(i, i)].norm()
                )));
            }
        }
        Ok(Self { thin_q, r })
    }

    /// Coefficients minimizing ||matrix * c - rhs||.
    pub fn solve(&self, rhs: &CVector) -> CVector {
        let projected = self.thin_q.adjoint() * rhs;
        self.r
            .solve_upper_triangular(&projected)
            .expect("R verified nonsingular at construction")
    }

    /// Squared norm of the residual after projecting `rhs` onto the column
    /// space, computed through the orthonormal factor (never an explicit
    /// projector).
    pub fn residual_norm_sq(&self, rhs: &CVector) -> f64 {
        let coords = self.thin_q.adjoint() * rhs;
        let resid = rhs - &self.thin_q * coords;
        resid.norm_squared()
    }
}

/// ||P_perp x||^2 for the orthogonal complement of the columns of `matrix`.
pub fn projection_residual(matrix: &CMatrix, x: &CVector) -> Result<f64> {
    if matrix.nrows() != x.nrows() {
        return Err(Error::Dimension(format!(
            "matrix has {} rows, vector has {}",
            matrix.nrows(),
            x.nrows()
        )));
    }
    Ok(LsSolver::new(matrix)?.residual_norm_sq(x))
}
