use nalgebra::{DMatrix, SymmetricEigen};
use ndarray::Array2;
use num_complex::Complex64;

use super::AoaError;

/// Hermitian spatial covariance and the number of snapshots behind it.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix {
    matrix: DMatrix<Complex64>,
    n_snapshots: usize,
}

/// Eigenpairs sorted by descending eigenvalue. Column `i` of `vectors`
/// belongs to `values[i]` and has its first nonzero component real positive.
#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: DMatrix<Complex64>,
}

/// `R = (1/n) sum x_i x_i^H + loading * (trace / MN) * I` over the rows of
/// `snapshots` (`n_snapshots x MN`).
pub fn covariance(snapshots: &Array2<Complex64>, loading: f64) -> Result<CovarianceMatrix, AoaError> {
    let (n, m) = snapshots.dim();
    if n == 0 || m == 0 {
        return Err(AoaError::Shape(format!("snapshot matrix {n}x{m} is empty")));
    }
    if !(loading.is_finite() && loading >= 0.0) {
        return Err(AoaError::Shape(format!("loading {loading} must be finite and >= 0")));
    }
    let x = DMatrix::from_fn(m, n, |i, k| snapshots[[k, i]]);
    let mut r = (&x * x.adjoint()).unscale(n as f64);
    r = (&r + r.adjoint()).unscale(2.0);
    if loading > 0.0 {
        let bump = loading * r.trace().re / m as f64;
        for i in 0..m {
            r[(i, i)] += bump;
        }
    }
    Ok(CovarianceMatrix {
        matrix: r,
        n_snapshots: n,
    })
}

impl CovarianceMatrix {
    /// Wraps a square matrix that is Hermitian to 1e-12 (relative to its
    /// largest entry).
    pub fn from_matrix(matrix: DMatrix<Complex64>, n_snapshots: usize) -> Result<Self, AoaError> {
        if !matrix.is_square() || matrix.is_empty() {
            return Err(AoaError::Shape(format!("{}x{} is not square", matrix.nrows(), matrix.ncols())));
        }
        let scale = matrix.iter().map(|v| v.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        let asym = (&matrix - matrix.adjoint()).iter().map(|v| v.norm()).fold(0.0, f64::max);
        if asym > 1e-12 * scale {
            return Err(AoaError::Shape("matrix is not Hermitian".into()));
        }
        Ok(Self {
            matrix,
            n_snapshots,
        })
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn n_snapshots(&self) -> usize {
        self.n_snapshots
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            matrix: self.matrix.scale(c),
            n_snapshots: self.n_snapshots,
        }
    }

    pub fn eigen(&self) -> Eigen {
        let se = SymmetricEigen::new(self.matrix.clone());
        let mut order: Vec<usize> = (0..se.eigenvalues.len()).collect();
        order.sort_by(|&a, &b| se.eigenvalues[b].total_cmp(&se.eigenvalues[a]));
        let m = self.dim();
        let mut vectors = DMatrix::zeros(m, m);
        for (dst, &src) in order.iter().enumerate() {
            let mut col = se.eigenvectors.column(src).into_owned();
            let peak = col.iter().map(|v| v.norm()).fold(0.0, f64::max);
            if let Some(first) = col.iter().find(|v| v.norm() > 1e-12 * peak).copied() {
                col *= first.conj() / first.norm();
            }
            vectors.set_column(dst, &col);
        }
        Eigen {
            values: order.iter().map(|&i| se.eigenvalues[i]).collect(),
            vectors,
        }
    }
}
