//! Hermitian eigendecomposition with tolerance-based eigenvalue clustering.

use nalgebra::DMatrix;
use num_complex::Complex64;

/// Eigen-decomposition of a Hermitian matrix with eigenvalues grouped into
/// clusters of (relatively) equal values.
pub struct HermitianSplit {
    pub eigenvectors: DMatrix<Complex64>,
    /// Cluster mean eigenvalues, ascending.
    pub values: Vec<f64>,
    /// Column indices of `eigenvectors` per cluster.
    pub clusters: Vec<Vec<usize>>,
    /// Smallest distance between neighbouring clusters, relative to `scale`.
    pub min_gap: f64,
    /// `max(1, max |eigenvalue|)`.
    pub scale: f64,
}

/// Diagonalizes `a` (assumed Hermitian) and groups eigenvalues whose
/// consecutive distance is at most `tol * scale`.
pub fn split_hermitian(a: DMatrix<Complex64>, tol: f64) -> HermitianSplit {
    let eig = a.symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let scale = eig.eigenvalues.iter().fold(1.0f64, |m, v| m.max(v.abs()));

    let mut clusters: Vec<Vec<usize>> = Vec::new();
    let mut min_gap = f64::INFINITY;
    let mut last = f64::NEG_INFINITY;
    for &i in &order {
        let v = eig.eigenvalues[i];
        if clusters.is_empty() || v - last > tol * scale {
            if !clusters.is_empty() {
                min_gap = min_gap.min((v - last) / scale);
            }
            clusters.push(vec![i]);
        } else {
            clusters.last_mut().unwrap().push(i);
        }
        last = v;
    }
    let values = clusters.iter().map(|c| c.iter().map(|&i| eig.eigenvalues[i]).sum::<f64>() / c.len() as f64).collect();
    HermitianSplit { eigenvectors: eig.eigenvectors, values, clusters, min_gap, scale }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clusters_repeated_eigenvalues() {
        // diag(1, 1, 3) conjugated by a unitary stays clustered as {1, 1}, {3}.
        let c = |re: f64, im: f64| Complex64::new(re, im);
        let s = 0.5f64.sqrt();
        let u = DMatrix::from_row_slice(
            3,
            3,
            &[
                c(s, 0.0),
                c(0.0, s),
                c(0.0, 0.0),
                c(0.0, s),
                c(s, 0.0),
                c(0.0, 0.0),
                c(0.0, 0.0),
                c(0.0, 0.0),
                c(1.0, 0.0),
            ],
        );
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(1.0, 0.0), c(1.0, 0.0), c(3.0, 0.0)]));
        let a = &u * d * u.adjoint();
        let split = split_hermitian(a, 1e-8);
        assert_eq!(split.clusters.len(), 2);
        assert_eq!(split.clusters[0].len(), 2);
        assert!((split.values[1] - 3.0).abs() < 1e-12);
        assert!((split.min_gap - 2.0 / 3.0).abs() < 1e-12);
    }
}
