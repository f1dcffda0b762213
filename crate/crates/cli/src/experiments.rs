//! Experiment dispatch: formula side, oracle side and their comparison.

use std::sync::Arc;

use kacrice_core::grf::{isotropic_model, Domain, FieldModel, IsotropicModel};
use kacrice_core::kacrice::{
    expected_count, isotropic_point_count, isotropic_sphere_count, kinematic_rhs_sphere,
    mixed_kostlan_count, subgaussian_diagnostic, KinematicOptions, LevelSetW, McParams, WeightFn,
};
use kacrice_core::oracle::{
    count_preimages, count_zeros_periodic, kinematic_mc, mc_expected_count, CountSample,
    KinematicMcOptions, NewtonOptions, PreimageOptions,
};
use kacrice_core::Estimate;
use nalgebra::DMatrix;

use crate::config::{ExperimentConfig, ExperimentKind, ModelSpec, NumericParams, TargetSpec};
use crate::record::Record;
use crate::selfcheck;
use crate::setup::{build_curve, build_model, build_target, full_region, kostlan_family};
use crate::CliError;

fn default_model(kind: ExperimentKind) -> ModelSpec {
    let degrees = match kind {
        ExperimentKind::SphereCount => vec![5, 5],
        ExperimentKind::SignedCount => vec![4],
        _ => vec![25],
    };
    ModelSpec::Kostlan { m: 1, degrees }
}

fn default_target(kind: ExperimentKind, output_dim: usize) -> TargetSpec {
    match kind {
        ExperimentKind::SphereCount => TargetSpec::Circle { radius: 1.0 },
        ExperimentKind::Subgaussian => TargetSpec::Linear { basis: vec![vec![1.0, 1.0]] },
        _ => TargetSpec::Point { y: vec![0.0; output_dim] },
    }
}

fn mc_params(p: &NumericParams, seed: u64) -> McParams {
    McParams {
        n_samples: p.inner_samples,
        fiber_nodes: p.fiber_nodes,
        seed,
    }
}

fn preimage_options(p: &NumericParams) -> PreimageOptions {
    PreimageOptions {
        grid_n: p.grid_n,
        bisection_tol: p.bisection_tol,
        newton: NewtonOptions {
            seeds: p.newton_seeds,
            max_iter: p.newton_max_iter,
            tol: p.newton_tol,
            dedup_radius: p.dedup_radius,
            projective: false,
        },
    }
}

fn unresolved_sample(seed: u64) -> CountSample {
    CountSample {
        count: 0,
        seed,
        n_bisection_steps: 0,
        min_separation: f64::INFINITY,
        unresolved: true,
    }
}

/// Brute-force mean of #X⁻¹(W), when the preimage is a finite set on S¹ or S².
fn preimage_oracle(model: &Arc<FieldModel>, w: &LevelSetW, p: &NumericParams, seed: u64) -> Option<Estimate> {
    let countable = matches!(model.domain(), Domain::Circle | Domain::Sphere)
        && w.codim() == model.domain().dim()
        && w.ambient_dim() == model.output_dim();
    if p.n_samples == 0 || !countable {
        return None;
    }
    let opts = preimage_options(p);
    Some(mc_expected_count(
        model,
        |r| count_preimages(r, w, &opts).unwrap_or_else(|_| unresolved_sample(r.seed())),
        p.n_samples,
        seed,
    ))
}

/// Closed form for an isotropic field: exact for a point target, fiber
/// cubature otherwise.
fn isotropic_formula(model: &FieldModel, w: &LevelSetW, target: &TargetSpec) -> Result<Option<Estimate>, CliError> {
    let Some(iso) = model.isotropic() else {
        return Ok(None);
    };
    let (s0, s1) = (iso.sigma0(), iso.sigma1());
    let est = match target {
        TargetSpec::Point { y } if y.len() == iso.sphere_dim() => {
            Estimate::exact(isotropic_point_count(&s0, &s1, y)?, "isotropic_point_count")
        }
        _ if w.codim() == iso.sphere_dim() => isotropic_sphere_count(&s0, &s1, w, iso.sphere_dim())?,
        _ => return Ok(None),
    };
    Ok(Some(est))
}

/// One row: integrator as primary estimate, plus formula and oracle.
fn count_row(
    experiment: &str,
    x: Option<f64>,
    model: &Arc<FieldModel>,
    w: &LevelSetW,
    formula: Option<Estimate>,
    p: &NumericParams,
    seed: u64,
) -> Result<Record, CliError> {
    let region = full_region(model.domain(), p);
    let integrator = expected_count(model, w, &region, &mc_params(p, seed), &WeightFn::unit())?;
    let mut row = Record::from_estimate(experiment, x, &integrator);
    let mut reference_se = integrator.std_error;
    if let Some(f) = &formula {
        row = row.with_formula(f.value);
        reference_se = f.std_error;
        if row.flag.is_none() {
            row.flag = f.flag.map(|fl| crate::record::flag_name(fl).to_string());
        }
    }
    if let Some(oracle) = preimage_oracle(model, w, p, seed) {
        row = row.with_oracle(&oracle, reference_se);
    }
    Ok(row)
}

fn model_and_target(cfg: &ExperimentConfig) -> Result<(Arc<FieldModel>, TargetSpec, LevelSetW), CliError> {
    let spec = cfg.model.clone().unwrap_or_else(|| default_model(cfg.experiment));
    let model = build_model(&spec)?;
    let target = cfg
        .target
        .clone()
        .unwrap_or_else(|| default_target(cfg.experiment, model.output_dim()));
    let w = build_target(&target)?;
    if w.ambient_dim() != model.output_dim() {
        return Err(CliError::Validation(format!(
            "at `target`: W lives in ℝ^{} but the field takes values in ℝ^{}",
            w.ambient_dim(),
            model.output_dim()
        )));
    }
    Ok((model, target, w))
}

fn point_count(cfg: &ExperimentConfig, seed: u64) -> Result<Vec<Record>, CliError> {
    let (model, target, w) = model_and_target(cfg)?;
    if !matches!(target, TargetSpec::Point { .. }) {
        return Err(CliError::Validation(
            "at `target.type`: point_count needs a point target (use sphere_count for level sets)".into(),
        ));
    }
    let formula = isotropic_formula(&model, &w, &target)?;
    Ok(vec![count_row("point_count", None, &model, &w, formula, &cfg.params, seed)?])
}

fn sphere_count(cfg: &ExperimentConfig, seed: u64) -> Result<Vec<Record>, CliError> {
    let (model, target, w) = model_and_target(cfg)?;
    let formula = isotropic_formula(&model, &w, &target)?;
    Ok(vec![count_row("sphere_count", None, &model, &w, formula, &cfg.params, seed)?])
}

fn signed_count(cfg: &ExperimentConfig, seed: u64) -> Result<Vec<Record>, CliError> {
    let (model, target, w) = model_and_target(cfg)?;
    let TargetSpec::Point { y } = &target else {
        return Err(CliError::Validation("at `target.type`: signed_count needs a point target".into()));
    };
    if model.domain() != Domain::Circle || model.output_dim() != 1 {
        return Err(CliError::Validation(
            "at `model`: signed_count needs a scalar field on the circle".into(),
        ));
    }
    let p = &cfg.params;
    let region = full_region(model.domain(), p);
    let integrator = expected_count(&model, &w, &region, &mc_params(p, seed), &WeightFn::sign_det())?;
    // The degree of a map S¹ → ℝ at a regular value is zero.
    let mut row = Record::from_estimate("signed_count", None, &integrator).with_formula(0.0);
    if p.n_samples > 0 {
        let y0 = y[0];
        let oracle = mc_expected_count(
            &model,
            |r| {
                let comp = r.component(0);
                let f = |t: f64| {
                    let (s, c) = t.sin_cos();
                    let (v, g) = comp.eval_grad(&[c, s]);
                    (v - y0, -s * g[0] + c * g[1])
                };
                let (mut sample, signed) = count_zeros_periodic(&f, p.grid_n, p.bisection_tol);
                sample.count = signed;
                sample
            },
            p.n_samples,
            seed,
        );
        row = row.with_oracle(&oracle, 0.0);
    }
    Ok(vec![row])
}

fn kinematic(cfg: &ExperimentConfig, seed: u64) -> Result<Vec<Record>, CliError> {
    let pair = cfg.curves.clone().unwrap_or_default();
    let moving = build_curve("curves.moving", &pair.moving)?;
    let fixed = build_curve("curves.fixed", &pair.fixed)?;
    let p = &cfg.params;
    let opts = KinematicOptions {
        curve_nodes: p.curve_nodes,
        angle_nodes: p.angle_nodes,
    };
    let rhs = kinematic_rhs_sphere(&moving, &fixed, &opts)?;
    let mut row = Record::from_estimate("kinematic", None, &rhs).with_formula(rhs.value);
    row.seed = seed;
    if p.n_rotations > 0 {
        let mc_opts = KinematicMcOptions {
            max_segment: p.max_segment,
            ..KinematicMcOptions::default()
        };
        let oracle = kinematic_mc(&moving, &fixed, p.n_rotations, seed, &mc_opts)?;
        row = row.with_oracle(&oracle, rhs.std_error);
    }
    Ok(vec![row])
}

/// Scalar field on S¹ with angular kernel (1 − ε)t^d + εt^d′.
pub fn continuity_model(eps: f64, degrees: [u32; 2]) -> Result<IsotropicModel, CliError> {
    let [d0, d1] = degrees.map(|d| d as usize);
    let mut mats = vec![DMatrix::zeros(1, 1); d0.max(d1) + 1];
    if d0 == d1 {
        mats[d0][(0, 0)] = 1.0;
    } else {
        mats[d0][(0, 0)] = (1.0 - eps).sqrt();
        mats[d1][(0, 0)] = eps.sqrt();
    }
    Ok(IsotropicModel::new(1, mats)?)
}

fn sweep_target(cfg: &ExperimentConfig) -> Result<(TargetSpec, LevelSetW), CliError> {
    let target = cfg.target.clone().unwrap_or(TargetSpec::Point { y: vec![0.0] });
    let w = build_target(&target)?;
    if w.ambient_dim() != 1 {
        return Err(CliError::Validation("at `target`: sweeps use a scalar field, W must lie in ℝ".into()));
    }
    Ok((target, w))
}

fn continuity_sweep(cfg: &ExperimentConfig, seed: u64) -> Result<Vec<Record>, CliError> {
    let (target, w) = sweep_target(cfg)?;
    let p = &cfg.params;
    p.epsilon_grid
        .iter()
        .map(|&eps| {
            let iso = continuity_model(eps, p.family_degrees)?;
            let model = Arc::new(isotropic_model(&iso)?);
            let formula = match target {
                TargetSpec::Point { ref y } if y.iter().all(|v| *v == 0.0) => {
                    Some(Estimate::exact(mixed_kostlan_count(&iso)?, "mixed_kostlan_count"))
                }
                _ => isotropic_formula(&model, &w, &target)?,
            };
            // Common random numbers across the grid.
            count_row("continuity_sweep", Some(eps), &model, &w, formula, p, seed)
        })
        .collect()
}

fn degree_sweep(cfg: &ExperimentConfig, seed: u64) -> Result<Vec<Record>, CliError> {
    let (target, w) = sweep_target(cfg)?;
    let p = &cfg.params;
    p.degree_grid
        .iter()
        .map(|&d| {
            let model = Arc::new(kostlan_family(1, &[d])?);
            let formula = isotropic_formula(&model, &w, &target)?;
            count_row("degree_sweep", Some(d as f64), &model, &w, formula, p, seed)
        })
        .collect()
}

fn subgaussian(cfg: &ExperimentConfig, seed: u64) -> Result<Vec<Record>, CliError> {
    let target = cfg
        .target
        .clone()
        .unwrap_or_else(|| default_target(ExperimentKind::Subgaussian, 2));
    let w = build_target(&target)?;
    let fit = subgaussian_diagnostic(&w, &cfg.params.r_grid)?;
    let mut rows: Vec<Record> = fit
        .volumes
        .iter()
        .map(|&(r, vol)| {
            let est = Estimate::new(vol, 0.0, 1, seed, "volume_profile");
            Record::from_estimate("subgaussian", Some(r), &est)
        })
        .collect();
    let eps = Estimate::new(fit.epsilon, 0.0, fit.fit_points as u64, seed, "subgaussian_epsilon");
    rows.push(Record::from_estimate("subgaussian", None, &eps));
    Ok(rows)
}

/// Runs the configured experiment with the given effective seed.
pub fn run_experiment(cfg: &ExperimentConfig, seed: u64) -> Result<Vec<Record>, CliError> {
    match cfg.experiment {
        ExperimentKind::PointCount => point_count(cfg, seed),
        ExperimentKind::SphereCount => sphere_count(cfg, seed),
        ExperimentKind::SignedCount => signed_count(cfg, seed),
        ExperimentKind::Kinematic => kinematic(cfg, seed),
        ExperimentKind::ContinuitySweep => continuity_sweep(cfg, seed),
        ExperimentKind::DegreeSweep => degree_sweep(cfg, seed),
        ExperimentKind::Subgaussian => subgaussian(cfg, seed),
        ExperimentKind::Selfcheck => Ok(selfcheck::run_all(seed).iter().map(|c| c.to_record(seed)).collect()),
    }
}
