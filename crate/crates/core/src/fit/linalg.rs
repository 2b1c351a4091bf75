use nalgebra::{DMatrix, DVector};

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| if *y == 0.0 { 0.0 } else { x * y })
        .sum()
}

pub(crate) fn log_sum_exp(v: &[f64]) -> f64 {
    let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// Pseudo-inverse of a symmetric positive semidefinite matrix, dropping
/// eigenvalues below a relative tolerance.
pub(crate) fn pinv_sym(a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    if n == 0 {
        return DMatrix::zeros(0, 0);
    }
    let sym = (a + a.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    let top = eig.eigenvalues.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let tol = top * 1e-10 * n as f64;
    let mut inv = DMatrix::zeros(n, n);
    for k in 0..n {
        let l = eig.eigenvalues[k];
        if l > tol {
            let v = eig.eigenvectors.column(k);
            inv += (v * v.transpose()) / l;
        }
    }
    inv
}

/// Whether a symmetric matrix is numerically positive definite.
pub(crate) fn is_pd(a: &DMatrix<f64>) -> bool {
    a.clone().cholesky().is_some()
}

pub(crate) fn col_means(s: &DMatrix<f64>) -> DVector<f64> {
    let m = s.nrows().max(1) as f64;
    DVector::from_iterator(s.ncols(), s.column_iter().map(|c| c.sum() / m))
}

pub(crate) fn covariance(s: &DMatrix<f64>) -> DMatrix<f64> {
    let mu = col_means(s);
    let mut c = s.clone();
    for mut row in c.row_iter_mut() {
        row -= mu.transpose();
    }
    let denom = (s.nrows().max(2) - 1) as f64;
    c.transpose() * &c / denom
}

/// Covariance of the sample mean by non-overlapping batch means, which
/// accounts for autocorrelation along the chain.
pub(crate) fn mean_covariance(s: &DMatrix<f64>) -> DMatrix<f64> {
    let m = s.nrows();
    let batches = ((m as f64).sqrt() as usize).clamp(2, m.max(2));
    let size = m / batches;
    if size == 0 {
        return covariance(s) / m.max(1) as f64;
    }
    let means = DMatrix::from_fn(batches, s.ncols(), |b, k| {
        s.view((b * size, k), (size, 1)).sum() / size as f64
    });
    covariance(&means) / batches as f64
}
