//! Built-in invariant suite: Area/Coarea examples, subspace-angle identities,
//! Jacobians and the sphere/ball volume identity.

use std::f64::consts::{PI, TAU};

use kacrice_core::geomcore::{
    angle_via_projection, area_formula_check, coarea_formula_check, jacobian, principal_angle,
    CoareaOptions, LinearMapMetric, Region2, Subspace,
};
use kacrice_core::kacrice::gamma_identity_check;
use kacrice_core::rng::stream_rng;
use nalgebra::DMatrix;
use rand::Rng;

use crate::record::Record;

/// Outcome of one check: `value` is compared with `expected` at `tol`.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub x: Option<f64>,
    pub value: f64,
    pub expected: f64,
    pub tol: f64,
    pub n: u64,
}

impl Check {
    pub fn passed(&self) -> bool {
        (self.value - self.expected).abs() <= self.tol
    }

    pub fn to_record(&self, seed: u64) -> Record {
        Record {
            experiment: "selfcheck".to_string(),
            x: self.x,
            formula: Some(self.expected),
            oracle_mean: None,
            oracle_se: None,
            discrepancy_se: None,
            n: self.n,
            seed,
            method: self.name.clone(),
            value: self.value,
            std_error: 0.0,
            oracle_n: None,
            flag: (!self.passed()).then(|| "failed".to_string()),
        }
    }
}

/// Tolerance of the Area/Coarea comparisons.
pub const INTEGRAL_TOL: f64 = 1e-6;

fn pair_checks(name: &str, lhs: f64, rhs: f64, exact: f64, out: &mut Vec<Check>) {
    out.push(Check { name: format!("{name}:lhs"), x: None, value: lhs, expected: exact, tol: INTEGRAL_TOL, n: 1 });
    out.push(Check { name: format!("{name}:rhs"), x: None, value: rhs, expected: lhs, tol: INTEGRAL_TOL, n: 1 });
}

/// Area and Coarea formula examples with known values.
pub fn integral_checks() -> Vec<Check> {
    let mut out = Vec::new();
    let area = [
        ("area:2x", area_formula_check(|x| 2.0 * x, |_| 2.0, |_| 1.0, (0.0, 1.0)), 2.0),
        ("area:x^2", area_formula_check(|x| x * x, |x| 2.0 * x, |_| 1.0, (-1.0, 1.0)), 2.0),
        (
            "area:sin3x",
            area_formula_check(|x| (3.0 * x).sin(), |x| 3.0 * (3.0 * x).cos(), |_| 1.0, (0.0, TAU)),
            12.0,
        ),
    ];
    for (name, r, exact) in area {
        match r {
            Ok(r) => pair_checks(name, r.lhs, r.rhs, exact, &mut out),
            Err(_) => pair_checks(name, f64::NAN, f64::NAN, exact, &mut out),
        }
    }
    let square = Region2::Rect { x0: 0.0, x1: 1.0, y0: 0.0, y1: 1.0 };
    let opts = CoareaOptions::default();
    let coarea = [
        ("coarea:x", coarea_formula_check(|x, _| x, |_, _| (1.0, 0.0), |_, _| 1.0, square, opts), 1.0),
        (
            "coarea:x+y",
            coarea_formula_check(|x, y| x + y, |_, _| (1.0, 1.0), |_, _| 1.0, square, opts),
            2f64.sqrt(),
        ),
        (
            "coarea:annulus",
            coarea_formula_check(
                |x, y| x * x + y * y,
                |x, y| (2.0 * x, 2.0 * y),
                |_, _| 1.0,
                Region2::Annulus { r0: 1.0, r1: 2.0 },
                opts,
            ),
            28.0 * PI / 3.0,
        ),
    ];
    for (name, r, exact) in coarea {
        match r {
            Ok(r) => pair_checks(name, r.lhs, r.rhs, exact, &mut out),
            Err(_) => pair_checks(name, f64::NAN, f64::NAN, exact, &mut out),
        }
    }
    out
}

/// Largest deviations seen over random subspace pairs.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AngleReport {
    pub pairs: u64,
    /// max |σ(V,W) − σ(W,V)|
    pub symmetry: f64,
    /// max |σ(V,W) − σ(V⊥,W⊥)|
    pub complement: f64,
    /// max |σ(V,W) − vol(Π_{V⊥}w)/vol(w)| over pairs with W ⊄ V
    pub projection: f64,
    /// How far σ strayed outside (0, 1]; 1 for a non-positive σ.
    pub range_violation: f64,
}

/// Angle identities on `pairs` random subspace pairs in ℝ⁵ … ℝ⁸.
pub fn angle_identities(pairs: u64, seed: u64) -> AngleReport {
    let mut report = AngleReport { pairs, ..Default::default() };
    let mut rng = stream_rng(seed, 0);
    for _ in 0..pairs {
        let n = rng.random_range(5..=8usize);
        let a = rng.random_range(1..n);
        let b = rng.random_range(1..n);
        let mut random = |cols: usize| {
            Subspace::span(&DMatrix::from_fn(n, cols, |_, _| rng.random_range(-1.0..1.0)))
        };
        let (v, w) = (random(a), random(b));
        let Ok(s) = principal_angle(&v, &w) else {
            report.symmetry = f64::INFINITY;
            continue;
        };
        let dev = |r: Result<f64, _>| r.map_or(f64::INFINITY, |t: f64| (t - s).abs());
        report.symmetry = report.symmetry.max(dev(principal_angle(&w, &v)));
        report.complement = report.complement.max(dev(principal_angle(&v.complement(), &w.complement())));
        report.projection = report.projection.max(dev(angle_via_projection(&v, &w)));
        let outside = if s > 1.0 { s - 1.0 } else if s > 0.0 { 0.0 } else { 1.0 };
        report.range_violation = report.range_violation.max(outside);
    }
    report
}

/// max | J(A) − |det A| | over random square matrices with Euclidean metrics.
pub fn jacobian_determinant_gap(samples: u64, seed: u64) -> f64 {
    let mut rng = stream_rng(seed, 1);
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let n = rng.random_range(1..=6usize);
        let a = DMatrix::<f64>::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        let det = a.determinant().abs();
        let j = jacobian(&LinearMapMetric::euclidean(a)).unwrap_or(f64::INFINITY);
        worst = worst.max((j - det).abs());
    }
    worst
}

/// vol(Sᵐ)·vol(𝔹ᵐ)·m! against 2(2π)ᵐ, relative to the right side.
pub fn gamma_checks() -> Vec<Check> {
    (1..=8u32)
        .map(|m| {
            let (lhs, rhs) = gamma_identity_check(m);
            Check {
                name: "gamma_identity".to_string(),
                x: Some(m as f64),
                value: lhs / rhs,
                expected: 1.0,
                tol: 1e-12,
                n: 1,
            }
        })
        .collect()
}

/// The full suite.
pub fn run_all(seed: u64) -> Vec<Check> {
    let mut out = integral_checks();
    let pairs = 500;
    let angles = angle_identities(pairs, seed);
    for (name, v) in [
        ("angle:symmetry", angles.symmetry),
        ("angle:complement", angles.complement),
        ("angle:projection", angles.projection),
        ("angle:range", angles.range_violation),
    ] {
        out.push(Check { name: name.to_string(), x: None, value: v, expected: 0.0, tol: 1e-9, n: pairs });
    }
    out.push(Check {
        name: "jacobian:det".to_string(),
        x: None,
        value: jacobian_determinant_gap(200, seed),
        expected: 0.0,
        tol: 1e-12,
        n: 200,
    });
    out.extend(gamma_checks());
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_passes() {
        for c in run_all(3) {
            assert!(c.passed(), "{c:?}");
        }
    }

    #[test]
    fn failing_check_is_flagged() {
        let c = Check { name: "x".into(), x: None, value: 1.0, expected: 0.0, tol: 0.5, n: 1 };
        assert_eq!(c.to_record(0).flag.as_deref(), Some("failed"));
    }
}
