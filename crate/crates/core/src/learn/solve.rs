use nalgebra::{DMatrix, DVector};

/// Eigenvalues below this fraction of the largest are treated as zero.
const EIG_DROP: f64 = 1e-12;

/// `(A + λI)^+ b` for symmetric PSD `A`, through its eigendecomposition.
/// Directions with negligible eigenvalues are dropped, so primal (`XᵀX`) and
/// dual (`XXᵀ`) systems give the same fitted values.
pub(crate) fn ridge_solve(a: DMatrix<f64>, b: &DVector<f64>, lambda: f64) -> DVector<f64> {
    let dim = b.len();
    if dim == 0 {
        return DVector::zeros(0);
    }
    let eig = a.symmetric_eigen();
    let top = eig.eigenvalues.iter().fold(0.0_f64, |m, &v| m.max(v));
    let mut out = DVector::zeros(dim);
    if top <= 0.0 {
        return out;
    }
    for (i, &mu) in eig.eigenvalues.iter().enumerate() {
        if mu <= EIG_DROP * top {
            continue;
        }
        let u = eig.eigenvectors.column(i);
        out += u * (u.dot(b) / (mu + lambda));
    }
    out
}

/// Gram block `K[rows, rows]`.
pub(crate) fn sub_gram(k: &DMatrix<f64>, rows: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), rows.len(), |i, j| k[(rows[i], rows[j])])
}
