//! Euclidean linear geometry: frame volumes, angles between subspaces,
//! Jacobians of linear maps between metric spaces, orthogonal projections.
//!
//! Subspaces are always stored through orthonormal bases. Numerical rank and
//! intersections are decided by singular values relative to the largest one,
//! at [`TAU_RANK`].

mod integral;

pub use integral::{
    area_formula_check, coarea_formula_check, AreaCheck, CoareaCheck, CoareaOptions, Region2,
    AREA_GRID_CELLS,
};

use nalgebra::{DMatrix, DVector};

use crate::error::{domain, Error, Result};
use crate::linalg;

/// Relative singular-value threshold for rank and intersection decisions.
pub const TAU_RANK: f64 = 1e-10;
/// Maximum deviation of a stored basis Gram matrix from the identity.
pub const TAU_ORTH: f64 = 1e-12;

/// Ordered tuple of vectors in ℝⁿ, stored as the columns of an n × k matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    vectors: DMatrix<f64>,
}

impl Frame {
    pub fn new(ambient_dim: usize, vectors: &[Vec<f64>]) -> Result<Self> {
        if let Some(v) = vectors.iter().find(|v| v.len() != ambient_dim) {
            return domain(format!(
                "frame vector of length {} in ambient dimension {ambient_dim}",
                v.len()
            ));
        }
        let mut m = DMatrix::zeros(ambient_dim, vectors.len());
        for (j, v) in vectors.iter().enumerate() {
            for (i, x) in v.iter().enumerate() {
                m[(i, j)] = *x;
            }
        }
        Ok(Frame { vectors: m })
    }

    pub fn from_columns(vectors: DMatrix<f64>) -> Self {
        Frame { vectors }
    }

    pub fn len(&self) -> usize {
        self.vectors.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.ncols() == 0
    }

    pub fn ambient_dim(&self) -> usize {
        self.vectors.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.vectors
    }

    /// ⟨fᵀ, f⟩
    pub fn gram(&self) -> DMatrix<f64> {
        self.vectors.transpose() * &self.vectors
    }

    /// The tuple (self, other).
    pub fn concat(&self, other: &Frame) -> Result<Frame> {
        if self.ambient_dim() != other.ambient_dim() {
            return domain("concatenating frames of different ambient dimension");
        }
        let n = self.ambient_dim();
        let mut m = DMatrix::zeros(n, self.len() + other.len());
        m.columns_mut(0, self.len()).copy_from(&self.vectors);
        m.columns_mut(self.len(), other.len()).copy_from(&other.vectors);
        Ok(Frame { vectors: m })
    }

    /// Numerical rank at [`TAU_RANK`].
    pub fn rank(&self) -> usize {
        numerical_rank(&linalg::singular_values(&self.vectors))
    }
}

fn numerical_rank(sv: &[f64]) -> usize {
    let smax = sv.first().cloned().unwrap_or(0.0);
    if smax == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > TAU_RANK * smax).count()
}

/// √det⟨fᵀ,f⟩ as the product of singular values, with no rank clamping.
fn raw_volume(m: &DMatrix<f64>) -> f64 {
    if m.ncols() == 0 {
        return 1.0;
    }
    linalg::singular_values(m).iter().product()
}

/// Volume √det⟨fᵀ,f⟩ of a frame; zero when its vectors are dependent at [`TAU_RANK`].
pub fn frame_volume(f: &Frame) -> Result<f64> {
    if f.is_empty() {
        return domain("volume of an empty frame");
    }
    if f.len() > f.ambient_dim() {
        return domain(format!(
            "{} vectors cannot be independent in dimension {}",
            f.len(),
            f.ambient_dim()
        ));
    }
    let sv = linalg::singular_values(f.matrix());
    if numerical_rank(&sv) < f.len() {
        return Ok(0.0);
    }
    Ok(sv.iter().product())
}

/// Linear subspace of ℝⁿ held by an orthonormal basis.
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace {
    basis: DMatrix<f64>,
}

impl Subspace {
    /// Span of the columns of `vectors` (n × k), orthonormalized by modified
    /// Gram–Schmidt with one reorthogonalization pass. Columns whose residual
    /// falls below `TAU_RANK` times the largest column norm are dropped.
    pub fn span(vectors: &DMatrix<f64>) -> Self {
        let n = vectors.nrows();
        let scale = vectors
            .column_iter()
            .map(|c| c.norm())
            .fold(0.0, f64::max);
        let mut basis: Vec<DVector<f64>> = Vec::new();
        if scale > 0.0 {
            for col in vectors.column_iter() {
                let mut v = col.into_owned();
                for _ in 0..2 {
                    for q in &basis {
                        let c = q.dot(&v);
                        v.axpy(-c, q, 1.0);
                    }
                }
                let norm = v.norm();
                if norm > TAU_RANK * scale {
                    basis.push(v / norm);
                }
            }
        }
        let basis = if basis.is_empty() {
            DMatrix::zeros(n, 0)
        } else {
            DMatrix::from_columns(&basis)
        };
        Subspace { basis }
    }

    /// Span of a list of vectors of length `ambient_dim`.
    pub fn from_vectors(ambient_dim: usize, vectors: &[Vec<f64>]) -> Result<Self> {
        Ok(Self::span(Frame::new(ambient_dim, vectors)?.matrix()))
    }

    /// Wraps an already orthonormal frame, checking ‖gram − I‖_max < [`TAU_ORTH`].
    pub fn from_orthonormal(frame: Frame) -> Result<Self> {
        let k = frame.len();
        let dev = (frame.gram() - DMatrix::<f64>::identity(k, k)).abs().max();
        if k > 0 && dev >= TAU_ORTH {
            return domain(format!("basis is not orthonormal (deviation {dev:e})"));
        }
        Ok(Subspace {
            basis: frame.vectors,
        })
    }

    pub fn zero(ambient_dim: usize) -> Self {
        Subspace {
            basis: DMatrix::zeros(ambient_dim, 0),
        }
    }

    pub fn whole(ambient_dim: usize) -> Self {
        Subspace {
            basis: DMatrix::identity(ambient_dim, ambient_dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    pub fn frame(&self) -> Frame {
        Frame::from_columns(self.basis.clone())
    }

    /// Π_V applied to every column of `m`.
    pub fn project_columns(&self, m: &DMatrix<f64>) -> DMatrix<f64> {
        &self.basis * (self.basis.transpose() * m)
    }

    /// V⊥
    pub fn complement(&self) -> Subspace {
        let n = self.ambient_dim();
        let residual = DMatrix::<f64>::identity(n, n) - self.project_columns(&DMatrix::identity(n, n));
        // the residual columns have norms of order one, so dropping is safe
        Subspace::span(&residual)
    }

    /// V ∩ W from the null space of the stacked bases [Q_V  Q_W].
    ///
    /// The singular values of the stack are √(1 − cos θᵢ) over the principal
    /// angles, so thresholding them resolves small angles far better than
    /// thresholding the cosines.
    pub fn intersection(&self, other: &Subspace) -> Result<Subspace> {
        check_same_ambient(self, other)?;
        let (a, b) = (self.dim(), other.dim());
        let n = self.ambient_dim();
        if a == 0 || b == 0 {
            return Ok(Subspace::zero(n));
        }
        let rows = n.max(a + b);
        let mut stack = DMatrix::zeros(rows, a + b);
        stack.view_mut((0, 0), (n, a)).copy_from(&self.basis);
        stack.view_mut((0, a), (n, b)).copy_from(&other.basis);
        let svd = stack.svd(false, true);
        let vt = svd.v_t.expect("requested right singular vectors");
        let smax = svd.singular_values.max();
        let mut dirs = Vec::new();
        for (i, &s) in svd.singular_values.iter().enumerate() {
            if s <= TAU_RANK * smax {
                let x = vt.row(i).transpose();
                let xa = x.rows(0, a).into_owned();
                let xb = x.rows(a, b).into_owned();
                let d = (&self.basis * xa - &other.basis * xb) * 0.5;
                dirs.push(d);
            }
        }
        if dirs.is_empty() {
            return Ok(Subspace::zero(n));
        }
        Ok(Subspace::span(&DMatrix::from_columns(&dirs)))
    }

    /// Whether `other ⊆ self` at the intersection threshold.
    pub fn contains(&self, other: &Subspace) -> Result<bool> {
        Ok(self.intersection(other)?.dim() == other.dim())
    }

    /// Basis of V ∩ I⊥ for a subspace I ⊆ V.
    fn reduce_by(&self, inter: &Subspace) -> Subspace {
        if inter.dim() == 0 {
            return self.clone();
        }
        let residual = &self.basis - inter.project_columns(&self.basis);
        Subspace::span(&residual)
    }
}

fn check_same_ambient(v: &Subspace, w: &Subspace) -> Result<()> {
    if v.ambient_dim() != w.ambient_dim() {
        return domain(format!(
            "subspaces live in dimensions {} and {}",
            v.ambient_dim(),
            w.ambient_dim()
        ));
    }
    Ok(())
}

/// Angle σ(V, W): vol(v w)/(vol(v) vol(w)) for bases v, w of V ∩ (V∩W)⊥ and
/// W ∩ (V∩W)⊥, and 1 when one subspace contains the other.
///
/// Equals the product of the sines of the nontrivial principal angles.
pub fn principal_angle(v: &Subspace, w: &Subspace) -> Result<f64> {
    check_same_ambient(v, w)?;
    let inter = v.intersection(w)?;
    if inter.dim() == v.dim() || inter.dim() == w.dim() {
        return Ok(1.0);
    }
    let vr = v.reduce_by(&inter);
    let wr = w.reduce_by(&inter);
    // near-inclusions collapse a reduced frame: take the inclusion branch
    if vr.dim() == 0 || wr.dim() == 0 {
        return Ok(1.0);
    }
    let joint = vr.frame().concat(&wr.frame())?;
    Ok(raw_volume(joint.matrix()) / (raw_volume(vr.basis()) * raw_volume(wr.basis())))
}

/// σ(V, W) as vol(Π_{V⊥} w)/vol(w), w a basis of W ∩ (V∩W)⊥. Requires W ⊄ V.
pub fn angle_via_projection(v: &Subspace, w: &Subspace) -> Result<f64> {
    check_same_ambient(v, w)?;
    let inter = v.intersection(w)?;
    if inter.dim() == w.dim() {
        return domain("angle_via_projection needs W not contained in V");
    }
    let wr = w.reduce_by(&inter);
    if wr.dim() == 0 {
        return domain("angle_via_projection needs W not contained in V");
    }
    let projected = wr.basis() - v.project_columns(wr.basis());
    Ok(raw_volume(&projected) / raw_volume(wr.basis()))
}

/// Π_V x
pub fn orthogonal_projection(v: &Subspace, x: &DVector<f64>) -> Result<DVector<f64>> {
    if x.len() != v.ambient_dim() {
        return domain(format!(
            "vector of length {} projected in dimension {}",
            x.len(),
            v.ambient_dim()
        ));
    }
    Ok(v.basis() * (v.basis().transpose() * x))
}

/// Linear map A: (ℝᵐ, g₁) → (ℝⁿ, g₂).
#[derive(Debug, Clone, PartialEq)]
pub struct LinearMapMetric {
    matrix: DMatrix<f64>,
    domain_metric: DMatrix<f64>,
    codomain_metric: DMatrix<f64>,
}

impl LinearMapMetric {
    pub fn new(
        matrix: DMatrix<f64>,
        domain_metric: DMatrix<f64>,
        codomain_metric: DMatrix<f64>,
    ) -> Result<Self> {
        let (n, m) = matrix.shape();
        if domain_metric.shape() != (m, m) || codomain_metric.shape() != (n, n) {
            return domain("metric shapes do not match the map");
        }
        for (g, what) in [(&domain_metric, "domain metric"), (&codomain_metric, "codomain metric")] {
            linalg::require_spd(g, what).map_err(|e| Error::Domain(e.to_string()))?;
        }
        Ok(LinearMapMetric {
            matrix,
            domain_metric,
            codomain_metric,
        })
    }

    pub fn euclidean(matrix: DMatrix<f64>) -> Self {
        let (n, m) = matrix.shape();
        LinearMapMetric {
            matrix,
            domain_metric: DMatrix::identity(m, m),
            codomain_metric: DMatrix::identity(n, n),
        }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }
}

/// Jacobian of a linear map between metric spaces; zero unless the rank is maximal.
pub fn jacobian(l: &LinearMapMetric) -> Result<f64> {
    let a = &l.matrix;
    let (n, m) = a.shape();
    if n == 0 || m == 0 {
        return Ok(1.0);
    }
    if numerical_rank(&linalg::singular_values(a)) < n.min(m) {
        return Ok(0.0);
    }
    // With gᵢ = LᵢLᵢᵀ, J is the product of the singular values of L₂ᵀ A L₁⁻ᵀ.
    // Working with singular values avoids squaring the condition number.
    let l1 = cholesky_factor(&l.domain_metric, "domain metric")?;
    let l2 = cholesky_factor(&l.codomain_metric, "codomain metric")?;
    let l1_inv_t = l1
        .try_inverse()
        .ok_or_else(|| Error::Domain("domain metric is singular".into()))?
        .transpose();
    let b = l2.transpose() * a * l1_inv_t;
    Ok(linalg::singular_values(&b).iter().product())
}

fn cholesky_factor(g: &DMatrix<f64>, what: &str) -> Result<DMatrix<f64>> {
    g.clone()
        .cholesky()
        .map(|c| c.l())
        .ok_or_else(|| Error::Domain(format!("{what} is not positive definite")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn line(n: usize, v: &[f64]) -> Subspace {
        Subspace::from_vectors(n, &[v.to_vec()]).unwrap()
    }

    #[test]
    fn frame_volume_examples() {
        let f = Frame::new(3, &[vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]]).unwrap();
        assert!((frame_volume(&f).unwrap() - 1.0).abs() < 1e-15);
        let f = Frame::new(2, &[vec![3.0, 4.0]]).unwrap();
        assert!((frame_volume(&f).unwrap() - 5.0).abs() < 1e-14);
        // det [[1,1],[1,2]] = 1
        let f = Frame::new(2, &[vec![1.0, 0.0], vec![1.0, 1.0]]).unwrap();
        assert!((frame_volume(&f).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn frame_volume_errors_and_degenerate() {
        assert!(frame_volume(&Frame::new(3, &[]).unwrap()).is_err());
        let f = Frame::new(2, &[vec![1.0, 2.0], vec![2.0, 4.0]]).unwrap();
        assert_eq!(frame_volume(&f).unwrap(), 0.0);
        let f = Frame::new(1, &[vec![1.0], vec![2.0]]).unwrap();
        assert!(frame_volume(&f).is_err());
        assert!(Frame::new(2, &[vec![1.0]]).is_err());
    }

    #[test]
    fn angle_between_lines() {
        let v = line(2, &[1.0, 0.0]);
        let w = line(2, &[0.0, 1.0]);
        assert!((principal_angle(&v, &w).unwrap() - 1.0).abs() < 1e-15);
        let w = line(2, &[(PI / 6.0).cos(), (PI / 6.0).sin()]);
        assert!((principal_angle(&v, &w).unwrap() - 0.5).abs() < 1e-14);
        let w = line(2, &[(PI / 4.0).cos(), (PI / 4.0).sin()]);
        assert!((angle_via_projection(&v, &w).unwrap() - 0.5f64.sqrt()).abs() < 1e-14);
        assert!((angle_via_projection(&line(2, &[1.0, 0.0]), &line(2, &[0.0, 1.0])).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn inclusion_gives_one() {
        let v = Subspace::from_vectors(3, &[vec![1.0, 0.0, 0.0]]).unwrap();
        let w = Subspace::from_vectors(3, &[vec![1.0, 1.0, 0.0], vec![0.0, 1.0, 0.0]]).unwrap();
        assert_eq!(principal_angle(&v, &w).unwrap(), 1.0);
        assert_eq!(principal_angle(&w, &v).unwrap(), 1.0);
        assert!(angle_via_projection(&w, &v).is_err());
        assert_eq!(principal_angle(&v, &v).unwrap(), 1.0);
    }

    #[test]
    fn dimension_mismatch_is_domain_error() {
        let v = line(2, &[1.0, 0.0]);
        let w = line(3, &[1.0, 0.0, 0.0]);
        assert!(matches!(principal_angle(&v, &w), Err(Error::Domain(_))));
    }

    #[test]
    fn shared_direction_is_factored_out() {
        // V = span(e1, e2), W = span(e1, cos t e2 + sin t e3): σ = sin t
        let t = 0.3f64;
        let v = Subspace::from_vectors(3, &[vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]]).unwrap();
        let w = Subspace::from_vectors(3, &[vec![1.0, 0.0, 0.0], vec![0.0, t.cos(), t.sin()]]).unwrap();
        assert!((principal_angle(&v, &w).unwrap() - t.sin()).abs() < 1e-13);
        assert!((angle_via_projection(&v, &w).unwrap() - t.sin()).abs() < 1e-13);
    }

    #[test]
    fn complement_is_orthogonal() {
        let v = Subspace::from_vectors(4, &[vec![1.0, 2.0, 0.0, 1.0], vec![0.0, 1.0, 1.0, -1.0]]).unwrap();
        let c = v.complement();
        assert_eq!(c.dim(), 2);
        assert!((v.basis().transpose() * c.basis()).abs().max() < 1e-14);
    }

    #[test]
    fn projection_examples() {
        let v = line(2, &[1.0, 0.0]);
        let p = orthogonal_projection(&v, &DVector::from_vec(vec![3.0, 4.0])).unwrap();
        assert!((p - DVector::from_vec(vec![3.0, 0.0])).norm() < 1e-15);
        let x = DVector::from_vec(vec![1.0, -2.0, 0.5]);
        let p = orthogonal_projection(&Subspace::whole(3), &x).unwrap();
        assert!((p - &x).norm() < 1e-15);
    }

    #[test]
    fn jacobian_examples() {
        let a = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 3.0]);
        assert!((jacobian(&LinearMapMetric::euclidean(a)).unwrap() - 6.0).abs() < 1e-13);
        let a = DMatrix::from_row_slice(2, 1, &[3.0, 4.0]);
        assert!((jacobian(&LinearMapMetric::euclidean(a)).unwrap() - 5.0).abs() < 1e-13);
        let a = DMatrix::from_row_slice(1, 2, &[3.0, 4.0]);
        assert!((jacobian(&LinearMapMetric::euclidean(a)).unwrap() - 5.0).abs() < 1e-13);
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        assert_eq!(jacobian(&LinearMapMetric::euclidean(a)).unwrap(), 0.0);
    }

    #[test]
    fn jacobian_with_metrics() {
        // scaling the codomain metric by 4 doubles lengths in ℝ¹ → ℝ¹
        let a = DMatrix::from_element(1, 1, 3.0);
        let l = LinearMapMetric::new(a, DMatrix::identity(1, 1), DMatrix::from_element(1, 1, 4.0)).unwrap();
        assert!((jacobian(&l).unwrap() - 6.0).abs() < 1e-13);
        let bad = LinearMapMetric::new(
            DMatrix::identity(2, 2),
            DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]),
            DMatrix::identity(2, 2),
        );
        assert!(matches!(bad, Err(Error::Domain(_))));
    }
}
