//! Small dense symmetric helpers. Every matrix here is at most
//! `max_degree x max_degree`, so a full eigendecomposition is cheap.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

/// Eigenvalue floor for positive semidefiniteness.
pub const PSD_FLOOR: f64 = -1e-9;

const EIGEN_EPS: f64 = 1e-11;
const EIGEN_MAX_ITER: usize = 10_000;

fn decompose(m: &DMatrix<f64>) -> SymmetricEigen<f64, nalgebra::Dyn> {
    // Symmetrize first so tiny asymmetries from float assembly cannot leak in.
    let sym = (m + m.transpose()) * 0.5;
    SymmetricEigen::try_new(sym.clone(), EIGEN_EPS, EIGEN_MAX_ITER)
        .unwrap_or_else(|| SymmetricEigen::new(sym))
}

/// Smallest eigenvalue of a symmetric matrix; `+inf` for the empty matrix.
pub fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return f64::INFINITY;
    }
    decompose(m).eigenvalues.min()
}

/// Smallest eigenvalue together with a unit eigenvector.
pub fn min_eigenpair(m: &DMatrix<f64>) -> Option<(f64, DVector<f64>)> {
    if m.is_empty() {
        return None;
    }
    let eig = decompose(m);
    let i = eig.eigenvalues.argmin().0;
    Some((eig.eigenvalues[i], eig.eigenvectors.column(i).into_owned()))
}

pub fn is_psd(m: &DMatrix<f64>) -> bool {
    min_eigenvalue(m) >= PSD_FLOOR
}

pub fn inf_norm(v: impl IntoIterator<Item = f64>) -> f64 {
    v.into_iter().fold(0.0, |acc, x| acc.max(x.abs()))
}
