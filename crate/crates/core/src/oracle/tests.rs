use std::sync::Arc;

use super::*;
use crate::curves::SphereCurve;
use crate::grf::{isotropic_model, kostlan_model, sample_stream, IsotropicModel, Monomial, Polynomial};
use crate::EstimateFlag;
use nalgebra::DMatrix;

fn sin5(t: f64) -> (f64, f64) {
    ((5.0 * t).sin(), 5.0 * (5.0 * t).cos())
}

#[test]
fn sin5_has_ten_zeros_with_zero_degree() {
    let (s, signed) = count_zeros_periodic(&sin5, 256, 1e-12);
    assert_eq!(s.count, 10);
    assert_eq!(signed, 0);
    assert!(!s.unresolved);
    assert!((s.min_separation - std::f64::consts::PI / 5.0).abs() < 1e-9);
    assert!(s.n_bisection_steps > 0);
}

#[test]
fn constant_has_no_zeros() {
    let (s, signed) = count_zeros_periodic(&|_| (1.0, 0.0), 64, 1e-12);
    assert_eq!((s.count, signed), (0, 0));
    assert!(!s.unresolved);
}

#[test]
fn under_resolved_grid_is_flagged() {
    // Two zeros closer than the coarse spacing but caught by the doubled grid.
    let f = |t: f64| ((t - 1.01) * (t - 1.03), 2.0 * t - 2.04);
    let (s, _) = count_zeros_periodic(&f, 200, 1e-12);
    assert!(s.unresolved);
}

#[test]
fn tangential_zero_is_flagged() {
    let f = |t: f64| (1.0 - t.cos(), t.sin());
    let (s, _) = count_zeros_periodic(&f, 64, 1e-12);
    // The double zero at 0 is a grid node valued 0: no sign change, no count.
    assert_eq!(s.count, 0);
    let g = |t: f64| ((t.cos() - 1.0) * (t - 0.5).cos(), 0.0);
    let (s, _) = count_zeros_periodic(&g, 64, 1e-12);
    assert!(s.unresolved || s.count % 2 == 0);
}

#[test]
fn kostlan_samples_have_even_counts_and_zero_degree() {
    let model = Arc::new(kostlan_model(1, 25, 1).unwrap());
    for i in 0..50 {
        let r = sample_stream(&model, 1, i);
        let s = count_zeros_circle(&r, 1024, 1e-12);
        assert_eq!(s.count % 2, 0);
        assert!(s.count <= 50);
        let signed = count_signed_zeros_circle(&r, 1024, 1e-12);
        assert_eq!(signed.count, 0);
    }
}

#[test]
fn mc_constant_field_has_no_zeros() {
    let basis = vec![vec![Polynomial::new(2, vec![Monomial { exponents: vec![0, 0], coef: 1.0 }])]];
    let model = crate::grf::FieldModel::new(crate::grf::Domain::Circle, 1, basis, DMatrix::zeros(1, 1)).unwrap();
    // Zero covariance: X ≡ 0 would be degenerate; shift to the constant 1.
    let one = FnField(|_: &[f64]| (1.0, vec![0.0, 0.0]));
    let est = mc_expected_count_with(100, 3, "oracle_mc", |_| {
        let f = |t: f64| {
            let (s, c) = t.sin_cos();
            let (v, g) = one.value_grad(&[c, s]);
            (v, -s * g[0] + c * g[1])
        };
        count_zeros_periodic(&f, 64, 1e-12).0
    });
    assert_eq!((est.value, est.std_error), (0.0, 0.0));
    assert_eq!(model.basis_len(), 1);
}

#[test]
fn mc_kostlan_4_on_circle() {
    let model = Arc::new(kostlan_model(1, 4, 1).unwrap());
    let op = |r: &crate::grf::Realization| count_zeros_circle(r, 256, 1e-12);
    let est = mc_expected_count(&model, op, 4000, 5);
    assert!((est.value - 4.0).abs() < 3.0 * est.std_error, "{est:?}");
    let again = mc_expected_count(&model, op, 4000, 5);
    assert_eq!(est, again);
}

#[test]
fn mixed_kostlan_orientation_on_circle() {
    let one = DMatrix::identity(1, 1);
    let iso = IsotropicModel::new(1, vec![one.clone(), one]).unwrap();
    let model = Arc::new(isotropic_model(&iso).unwrap());
    let est = mc_expected_count(&model, |r| count_zeros_circle(r, 256, 1e-12), 4000, 6);
    let expected = 2.0 * 0.5f64.sqrt();
    assert!((est.value - expected).abs() < 3.0 * est.std_error, "{est:?}");
}

#[test]
fn linear_forms_meet_once_projectively() {
    let x = Polynomial::new(3, vec![Monomial { exponents: vec![1, 0, 0], coef: 1.0 }]);
    let y = Polynomial::new(3, vec![Monomial { exponents: vec![0, 1, 0], coef: 1.0 }]);
    let s = count_common_zeros_sphere(&x, &y, &NewtonOptions::default());
    assert_eq!(s.count, 1);
    assert!(!s.unresolved);
    assert!((s.min_separation - 2.0).abs() < 1e-9);
}

#[test]
fn coincident_equations_are_flagged() {
    let x = Polynomial::new(3, vec![Monomial { exponents: vec![1, 0, 0], coef: 1.0 }]);
    let s = count_common_zeros_sphere(&x, &x, &NewtonOptions::default());
    assert!(s.unresolved);
}

#[test]
fn sphere_roots_are_zeros_and_antipodal() {
    let zero = DMatrix::zeros(2, 2);
    let a2 = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 0.0]));
    let a3 = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![0.0, 1.0]));
    let model = Arc::new(isotropic_model(&IsotropicModel::new(2, vec![zero.clone(), zero, a2, a3]).unwrap()).unwrap());
    for i in 0..10 {
        let r = sample_stream(&model, 2, i);
        let found = sphere_roots(r.component(0), r.component(1), 600, &NewtonOptions::default());
        for x in &found.roots {
            let v = r.eval(x.as_slice());
            assert!(v.amax() < 1e-8);
            assert!(found.roots.iter().any(|y| (x + y).norm() < 1e-5));
        }
        let s = count_common_zeros_sphere(r.component(0), r.component(1), &NewtonOptions::default());
        if !s.unresolved {
            // Bézout bound d₁d₂ = 6 projective roots.
            assert!(s.count <= 6, "{s:?}");
            assert_eq!(2 * s.count as usize, found.roots.len());
        }
    }
}

#[test]
fn great_circles_always_meet_twice() {
    let a = SphereCurve::great_circle([0.0, 0.0, 1.0]).unwrap();
    let b = SphereCurve::great_circle([0.2, 1.0, 0.3]).unwrap();
    let est = kinematic_mc(&a, &b, 40, 1, &KinematicMcOptions::default()).unwrap();
    assert_eq!(est.value, 2.0);
    assert_eq!(est.std_error, 0.0);
    let antipodal = SphereCurve::great_circle([0.0, 0.0, -1.0]).unwrap();
    let est = kinematic_mc(&a, &antipodal, 40, 2, &KinematicMcOptions::default()).unwrap();
    assert_eq!(est.value, 2.0);
}

#[test]
fn latitude_meets_great_circle_with_probability_sin_rho() {
    let rho = 0.5f64;
    let lat = SphereCurve::latitude(rho).unwrap();
    let g = SphereCurve::great_circle([0.0, 0.0, 1.0]).unwrap();
    let est = kinematic_mc(&lat, &g, 2000, 3, &KinematicMcOptions::default()).unwrap();
    assert!((est.value - 2.0 * rho.sin()).abs() < 3.0 * est.std_error, "{est:?}");
}

#[test]
fn unresolved_fraction_flags_estimate() {
    let est = mc_expected_count_with(100, 0, "oracle_mc", |i| CountSample {
        unresolved: i % 10 == 0,
        ..CountSample::resolved(2)
    });
    assert_eq!(est.excluded, 10);
    assert_eq!(est.n, 90);
    assert_eq!(est.flag, Some(EstimateFlag::Unresolved));
}

#[test]
fn preimages_of_a_point_match_direct_zero_count() {
    let model = Arc::new(kostlan_model(1, 7, 1).unwrap());
    let w = crate::kacrice::LevelSetW::point(&[0.4]);
    for i in 0..20 {
        let r = sample_stream(&model, 21, i);
        let via_w = count_preimages(&r, &w, &PreimageOptions::default()).unwrap();
        let p = r.component(0);
        let f = |t: f64| {
            let (s, c) = t.sin_cos();
            let (v, g) = p.eval_grad(&[c, s]);
            (v - 0.4, -s * g[0] + c * g[1])
        };
        let (direct, _) = count_zeros_periodic(&f, 1024, 1e-12);
        assert_eq!(via_w.count, direct.count);
        assert_eq!(via_w.seed, 21);
    }
}

#[test]
fn preimages_of_a_circle_match_norm_crossings() {
    let model = Arc::new(kostlan_model(1, 5, 2).unwrap());
    let w = crate::kacrice::LevelSetW::circle(1.2).unwrap();
    for i in 0..20 {
        let r = sample_stream(&model, 4, i);
        let via_w = count_preimages(&r, &w, &PreimageOptions::default()).unwrap();
        let f = |t: f64| {
            let h = 1e-6;
            let norm = |t: f64| r.eval(&[t.cos(), t.sin()]).norm();
            (norm(t) - 1.2, (norm(t + h) - norm(t - h)) / (2.0 * h))
        };
        let (direct, _) = count_zeros_periodic(&f, 1024, 1e-12);
        assert_eq!(via_w.count, direct.count);
    }
}

#[test]
fn preimages_on_sphere_double_the_projective_count() {
    let zero = DMatrix::zeros(2, 2);
    let a2 = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 0.0]));
    let a3 = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![0.0, 1.0]));
    let iso = IsotropicModel::new(2, vec![zero.clone(), zero, a2, a3]).unwrap();
    let model = Arc::new(isotropic_model(&iso).unwrap());
    let w = crate::kacrice::LevelSetW::point(&[0.0, 0.0]);
    for i in 0..5 {
        let r = sample_stream(&model, 8, i);
        let all = count_preimages(&r, &w, &PreimageOptions::default()).unwrap();
        let proj = count_common_zeros_sphere(r.component(0), r.component(1), &NewtonOptions::default());
        assert!(!all.unresolved && !proj.unresolved, "{i} {all:?} {proj:?}");
        assert_eq!(all.count, 2 * proj.count);
    }
}

#[test]
fn preimage_dimension_mismatch_is_rejected() {
    let model = Arc::new(kostlan_model(1, 3, 1).unwrap());
    let r = sample_stream(&model, 0, 0);
    let w = crate::kacrice::LevelSetW::point(&[0.0, 0.0]);
    assert!(count_preimages(&r, &w, &PreimageOptions::default()).is_err());
}
