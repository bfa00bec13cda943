//! Dense complex linear algebra helpers shared across the crate.

use nalgebra::{Complex, DMatrix, DVector};

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Ordering policy for Hermitian eigendecompositions. The default is
/// descending with ties broken by original index, which makes every
/// factorization in the crate deterministic.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EigenOrder {
    Descending,
    Ascending,
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues sorted per the
/// requested order and eigenvector columns permuted to match.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

/// Decomposes `(m + m*)/2`. The caller is responsible for checking how far
/// `m` is from Hermitian when that matters.
pub fn hermitian_eigen(m: &CMatrix, order: EigenOrder) -> HermitianEigen {
    let n = m.nrows();
    assert_eq!(n, m.ncols(), "hermitian_eigen needs a square matrix");
    if n == 0 {
        return HermitianEigen {
            values: Vec::new(),
            vectors: CMatrix::zeros(0, 0),
        };
    }
    let sym = (m + m.adjoint()).scale(0.5);
    let eig = sym.symmetric_eigen();
    let mut idx: Vec<usize> = (0..n).collect();
    match order {
        EigenOrder::Descending => idx.sort_by(|&a, &b| {
            eig.eigenvalues[b]
                .partial_cmp(&eig.eigenvalues[a])
                .unwrap()
                .then(a.cmp(&b))
        }),
        EigenOrder::Ascending => idx.sort_by(|&a, &b| {
            eig.eigenvalues[a]
                .partial_cmp(&eig.eigenvalues[b])
                .unwrap()
                .then(a.cmp(&b))
        }),
    }
    let values: Vec<f64> = idx.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_columns(
        &idx.iter()
            .map(|&i| eig.eigenvectors.column(i).into_owned())
            .collect::<Vec<_>>(),
    );
    HermitianEigen { values, vectors }
}

/// Operator norm (largest singular value). Zero for empty matrices.
pub fn opnorm(m: &CMatrix) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    m.clone()
        .singular_values()
        .iter()
        .cloned()
        .fold(0.0, f64::max)
}

/// Smallest singular value. Zero for empty matrices (so only a 0x0 matrix
/// should be treated as invertible by convention).
pub fn min_singular_value(m: &CMatrix) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    m.clone()
        .singular_values()
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min)
}

/// Numerical rank: count of singular values above `rel_tol` times the largest.
pub fn svd_rank(m: &CMatrix, rel_tol: f64) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let sv = m.clone().singular_values();
    let max = sv.iter().cloned().fold(0.0, f64::max);
    if max == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel_tol * max).count()
}

/// Distance from Hermitian, `|m - m*|` in operator norm.
pub fn hermitian_defect(m: &CMatrix) -> f64 {
    opnorm(&(m - m.adjoint()))
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}
