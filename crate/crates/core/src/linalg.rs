//! Small dense linear-algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{degenerate, Result};

/// Smallest eigenvalue threshold for "non-degenerate" covariances.
pub const NONDEGENERACY_TOL: f64 = 1e-12;

/// Pivoted Cholesky factor of a symmetric PSD matrix.
///
/// Returns `L` (n × r) with `L Lᵀ ≈ c`, stopping once the largest remaining
/// diagonal entry drops below `tol · max diag`. Negative round-off on the
/// diagonal is clamped to zero so singular covariances factor without special
/// cases.
pub fn pivoted_cholesky(c: &DMatrix<f64>, tol: f64) -> DMatrix<f64> {
    let n = c.nrows();
    assert_eq!(n, c.ncols(), "pivoted_cholesky needs a square matrix");
    let mut diag: Vec<f64> = (0..n).map(|i| c[(i, i)].max(0.0)).collect();
    let scale = diag.iter().cloned().fold(0.0, f64::max);
    let mut cols: Vec<DVector<f64>> = Vec::new();
    let mut used = vec![false; n];
    if scale == 0.0 {
        return DMatrix::zeros(n, 0);
    }
    for _ in 0..n {
        let (piv, &dmax) = diag
            .iter()
            .enumerate()
            .filter(|(i, _)| !used[*i])
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap();
        if dmax <= tol * scale {
            break;
        }
        used[piv] = true;
        let root = dmax.sqrt();
        let mut col = DVector::zeros(n);
        for i in 0..n {
            if used[i] && i != piv {
                continue;
            }
            let mut v = c[(i, piv)];
            for prev in &cols {
                v -= prev[i] * prev[piv];
            }
            col[i] = v / root;
        }
        col[piv] = root;
        for i in 0..n {
            if !used[i] {
                diag[i] = (diag[i] - col[i] * col[i]).max(0.0);
            }
        }
        diag[piv] = 0.0;
        cols.push(col);
    }
    if cols.is_empty() {
        DMatrix::zeros(n, 0)
    } else {
        DMatrix::from_columns(&cols)
    }
}

/// Symmetrizes `a` in place: (a + aᵀ)/2.
pub fn symmetrize(a: &DMatrix<f64>) -> DMatrix<f64> {
    (a + a.transpose()) * 0.5
}

pub fn min_eigenvalue(a: &DMatrix<f64>) -> f64 {
    if a.nrows() == 0 {
        return f64::INFINITY;
    }
    SymmetricEigen::new(symmetrize(a))
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min)
}

/// Checks symmetric positive definiteness by attempting a Cholesky factorization.
pub fn require_spd(a: &DMatrix<f64>, what: &str) -> Result<()> {
    if a.nrows() != a.ncols() {
        return degenerate(format!("{what} is not square"));
    }
    if a.iter().any(|x| !x.is_finite()) {
        return degenerate(format!("{what} has non-finite entries"));
    }
    let asym = (a - a.transpose()).abs().max();
    if asym > 1e-10 * a.abs().max().max(1.0) {
        return degenerate(format!("{what} is not symmetric"));
    }
    match nalgebra::Cholesky::new(symmetrize(a)) {
        Some(_) => Ok(()),
        None => degenerate(format!("{what} is not positive definite")),
    }
}

/// Requires the smallest eigenvalue of a covariance to exceed [`NONDEGENERACY_TOL`].
pub fn require_nondegenerate(a: &DMatrix<f64>, what: &str) -> Result<()> {
    let lam = min_eigenvalue(a);
    if !(lam > NONDEGENERACY_TOL) {
        return degenerate(format!("{what} has smallest eigenvalue {lam:e}"));
    }
    Ok(())
}

/// Inverse of an SPD matrix via Cholesky.
pub fn spd_inverse(a: &DMatrix<f64>, what: &str) -> Result<DMatrix<f64>> {
    match nalgebra::Cholesky::new(symmetrize(a)) {
        Some(ch) => Ok(ch.inverse()),
        None => degenerate(format!("{what} is not positive definite")),
    }
}

/// Density of N(0, cov) at `y`.
pub fn gaussian_density(y: &DVector<f64>, cov: &DMatrix<f64>) -> Result<f64> {
    let k = y.len();
    if k == 0 {
        return Ok(1.0);
    }
    let ch = match nalgebra::Cholesky::new(symmetrize(cov)) {
        Some(ch) => ch,
        None => return degenerate("covariance of X(p) is not positive definite"),
    };
    let det: f64 = ch.l_dirty().diagonal().iter().map(|d| d * d).product();
    let quad = y.dot(&ch.solve(y));
    Ok((-0.5 * quad).exp() / ((2.0 * std::f64::consts::PI).powf(k as f64 / 2.0) * det.sqrt()))
}

/// Determinant of a square matrix; `1` for the empty matrix.
pub fn det(a: &DMatrix<f64>) -> f64 {
    if a.nrows() == 0 {
        1.0
    } else {
        a.clone().lu().determinant()
    }
}

/// Singular values in decreasing order; handles empty matrices.
pub fn singular_values(a: &DMatrix<f64>) -> Vec<f64> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = a.clone().svd(false, false).singular_values.iter().cloned().collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pivoted_cholesky_reconstructs_singular_matrix() {
        let b = DMatrix::from_row_slice(3, 2, &[1.0, 2.0, 0.5, -1.0, 3.0, 0.0]);
        let c = &b * b.transpose();
        let l = pivoted_cholesky(&c, 1e-14);
        assert_eq!(l.ncols(), 2);
        assert!((&l * l.transpose() - &c).abs().max() < 1e-12);
    }

    #[test]
    fn pivoted_cholesky_of_zero_is_empty() {
        let l = pivoted_cholesky(&DMatrix::zeros(4, 4), 1e-14);
        assert_eq!(l.ncols(), 0);
    }

    #[test]
    fn gaussian_density_standard_normal() {
        let d = gaussian_density(&DVector::from_vec(vec![0.0]), &DMatrix::identity(1, 1)).unwrap();
        assert!((d - 1.0 / (2.0 * std::f64::consts::PI).sqrt()).abs() < 1e-15);
        let d2 = gaussian_density(&DVector::from_vec(vec![1.0, 1.0]), &DMatrix::identity(2, 2)).unwrap();
        assert!((d2 - (-1.0f64).exp() / (2.0 * std::f64::consts::PI)).abs() < 1e-15);
    }

    #[test]
    fn require_spd_rejects_indefinite() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(require_spd(&a, "a").is_err());
        assert!(require_spd(&DMatrix::identity(3, 3), "i").is_ok());
    }
}
