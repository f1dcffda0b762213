//! Closed forms, the general integrator and the brute-force oracle on the
//! same problems.

use std::sync::Arc;

use kacrice_core::grf::{isotropic_model, kostlan_model, IsotropicModel};
use kacrice_core::kacrice::{
    expected_count, isotropic_point_count, isotropic_sphere_count, LevelSetW, McParams, Region, WeightFn,
};
use kacrice_core::oracle::{count_preimages, mc_expected_count, PreimageOptions};
use nalgebra::DMatrix;

fn within(est: f64, se: f64, reference: f64) -> bool {
    (est - reference).abs() <= 3.5 * se
}

#[test]
fn shifted_point_on_circle() {
    let model = Arc::new(kostlan_model(1, 6, 1).unwrap());
    let iso = model.isotropic().unwrap();
    let y = 0.8;
    let formula = isotropic_point_count(&iso.sigma0(), &iso.sigma1(), &[y]).unwrap();
    // 2√6·e^{−y²/2}
    assert!((formula - 2.0 * 6f64.sqrt() * (-0.5 * y * y).exp()).abs() < 1e-12);
    let w = LevelSetW::point(&[y]);
    let oracle = mc_expected_count(
        &model,
        |r| count_preimages(r, &w, &PreimageOptions::default()).unwrap(),
        1500,
        31,
    );
    assert!(within(oracle.value, oracle.std_error, formula), "{oracle:?} vs {formula}");
    let mc = McParams { n_samples: 4096, fiber_nodes: 4, seed: 31 };
    let integ = expected_count(&model, &w, &Region::Circle { nodes: 16 }, &mc, &WeightFn::unit()).unwrap();
    assert!((integ.value - formula).abs() < 0.02 * formula, "{integ:?}");
}

#[test]
fn circle_target_for_two_component_field() {
    // Components of degrees 2 and 5, W = {|y| = 1.1} ⊂ ℝ².
    let mut mats = vec![DMatrix::zeros(2, 2); 6];
    mats[2][(0, 0)] = 1.0;
    mats[5][(1, 1)] = 1.0;
    let iso = IsotropicModel::new(1, mats).unwrap();
    let model = Arc::new(isotropic_model(&iso).unwrap());
    let w = LevelSetW::circle(1.1).unwrap();
    let formula = isotropic_sphere_count(&iso.sigma0(), &iso.sigma1(), &w, 1).unwrap();
    assert!(formula.std_error < 1e-6);
    let oracle = mc_expected_count(
        &model,
        |r| count_preimages(r, &w, &PreimageOptions::default()).unwrap(),
        1500,
        32,
    );
    assert!(!oracle.is_flagged());
    assert!(within(oracle.value, oracle.std_error, formula.value), "{oracle:?} vs {formula:?}");
}

#[test]
fn results_do_not_depend_on_worker_count() {
    let model = Arc::new(kostlan_model(1, 5, 1).unwrap());
    let w = LevelSetW::point(&[0.3]);
    let run = || {
        let mc = McParams { n_samples: 256, fiber_nodes: 4, seed: 9 };
        let integ = expected_count(&model, &w, &Region::Circle { nodes: 8 }, &mc, &WeightFn::unit()).unwrap();
        let oracle = mc_expected_count(&model, |r| count_preimages(r, &w, &PreimageOptions::default()).unwrap(), 64, 9);
        (integ.value.to_bits(), integ.std_error.to_bits(), oracle.value.to_bits())
    };
    let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(run);
    let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap().install(run);
    assert_eq!(one, four);
}
