//! Thin wrappers around the LAPACK-backed decompositions used by the GEP
//! solver, the oracle, and readout mitigation.

use ndarray::{Array1, Array2};
use ndarray_linalg::{Eig, Eigh, Solve, UPLO};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Eigendecomposition of a Hermitian matrix; eigenvalues ascending,
/// eigenvectors as columns satisfying `m v_j = w_j v_j`.
///
/// The backend hands back the eigenvectors of the transposed (= conjugated)
/// matrix for complex Hermitian input, so the columns are conjugated here;
/// real input is unaffected. See the convention test below.
pub fn eigh(m: &Array2<Complex64>) -> Result<(Array1<f64>, Array2<Complex64>)> {
    let (w, v) = m
        .eigh(UPLO::Lower)
        .map_err(|e| Error::Numerical(format!("hermitian eigensolver: {e}")))?;
    Ok((w, v.map(|c| c.conj())))
}

/// Eigendecomposition of a general complex matrix; eigenvectors as columns.
pub fn eig(m: &Array2<Complex64>) -> Result<(Array1<Complex64>, Array2<Complex64>)> {
    m.eig()
        .map_err(|e| Error::Numerical(format!("general eigensolver: {e}")))
}

/// Solves the real linear system `a x = b`.
pub fn solve(a: &Array2<f64>, b: &Array1<f64>) -> Result<Array1<f64>> {
    a.solve(b)
        .map_err(|e| Error::Numerical(format!("linear solve: {e}")))
}

/// Spectral norm of a Hermitian matrix.
pub fn hermitian_norm2(m: &Array2<Complex64>) -> Result<f64> {
    let (w, _) = eigh(m)?;
    Ok(w.iter().fold(0.0f64, |acc, x| acc.max(x.abs())))
}

/// Largest absolute deviation from Hermiticity.
pub fn hermiticity_defect(m: &Array2<Complex64>) -> f64 {
    let mut defect = 0.0f64;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            defect = defect.max((m[[i, j]] - m[[j, i]].conj()).norm());
        }
    }
    defect
}
