use kacrice_core::geomcore::{
    angle_via_projection, jacobian, orthogonal_projection, principal_angle, LinearMapMetric, Subspace,
};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

fn matrix(n: usize, cols: usize) -> impl Strategy<Value = DMatrix<f64>> {
    prop::collection::vec(-1.0..1.0f64, n * cols).prop_map(move |v| DMatrix::from_vec(n, cols, v))
}

/// Ambient dimension n ∈ [5, 8] and two generic subspaces.
fn subspace_pair() -> impl Strategy<Value = (Subspace, Subspace)> {
    (5usize..=8)
        .prop_flat_map(|n| (Just(n), 1..n, 1..n))
        .prop_flat_map(|(n, a, b)| (matrix(n, a), matrix(n, b)))
        .prop_map(|(v, w)| (Subspace::span(&v), Subspace::span(&w)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn angle_is_symmetric_and_in_unit_interval((v, w) in subspace_pair()) {
        let s = principal_angle(&v, &w).unwrap();
        let t = principal_angle(&w, &v).unwrap();
        prop_assert!(s > 0.0 && s <= 1.0);
        prop_assert!((s - t).abs() < 1e-12);
    }

    #[test]
    fn angle_survives_orthocomplement((v, w) in subspace_pair()) {
        let s = principal_angle(&v, &w).unwrap();
        let c = principal_angle(&v.complement(), &w.complement()).unwrap();
        prop_assert!((s - c).abs() < 1e-9, "{} vs {}", s, c);
    }

    #[test]
    fn projection_formula_matches((v, w) in subspace_pair()) {
        let s = principal_angle(&v, &w).unwrap();
        let p = angle_via_projection(&v, &w).unwrap();
        prop_assert!((s - p).abs() < 1e-9);
    }

    #[test]
    fn projection_residual_is_orthogonal(b in matrix(6, 3), x in prop::collection::vec(-5.0..5.0f64, 6)) {
        let v = Subspace::span(&b);
        let x = DVector::from_vec(x);
        let px = orthogonal_projection(&v, &x).unwrap();
        let r = &x - &px;
        for col in v.basis().column_iter() {
            prop_assert!(r.dot(&col).abs() < 1e-12);
        }
        let ppx = orthogonal_projection(&v, &px).unwrap();
        prop_assert!((ppx - px).amax() < 1e-12);
    }

    #[test]
    fn euclidean_jacobian_of_square_map_is_abs_det(a in (1usize..=6).prop_flat_map(|n| matrix(n, n))) {
        let det = a.determinant().abs();
        let j = jacobian(&LinearMapMetric::euclidean(a)).unwrap();
        prop_assert!((j - det).abs() < 1e-12);
    }

    /// V = A ⊕ B and W = A ⊕ C with B ⊥ C have angle exactly 1.
    #[test]
    fn orthogonal_splitting_has_unit_angle(q in matrix(7, 7), a in 0usize..3, b in 1usize..3, c in 1usize..3) {
        let q = q.qr().q();
        let cols = |r: std::ops::Range<usize>| q.columns(r.start, r.len()).into_owned();
        let mut vb = cols(0..a);
        vb = vb.resize_horizontally(a + b, 0.0);
        vb.columns_mut(a, b).copy_from(&cols(a..a + b));
        let mut wb = cols(0..a);
        wb = wb.resize_horizontally(a + c, 0.0);
        wb.columns_mut(a, c).copy_from(&cols(a + b..a + b + c));
        let s = principal_angle(&Subspace::span(&vb), &Subspace::span(&wb)).unwrap();
        prop_assert!((s - 1.0).abs() < 1e-12);
    }
}
