//! Common zeros of two scalar functions on S² by seeded projected Newton.

use nalgebra::{Matrix2, Vector2, Vector3};

use super::{CountSample, ScalarField};
use crate::grf::Domain;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonOptions {
    /// Seeds on a Fibonacci grid; the audit reruns with twice as many.
    pub seeds: usize,
    pub max_iter: usize,
    /// Convergence threshold on |F|, relative to the largest |F| on the seeds.
    pub tol: f64,
    pub dedup_radius: f64,
    /// Report zeros in ℝP² (antipodal pairs identified and checked).
    pub projective: bool,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions {
            seeds: 600,
            max_iter: 60,
            tol: 1e-11,
            dedup_radius: 1e-6,
            projective: true,
        }
    }
}

/// Roots found from one seed grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereRoots {
    pub roots: Vec<Vector3<f64>>,
    /// Seeds where Newton hit the iteration cap, a singular Jacobian or NaN.
    pub failures: usize,
    pub seeds: usize,
    /// Some root has a near-singular Jacobian.
    pub non_transverse: bool,
}

enum Outcome {
    Root(Vector3<f64>),
    /// Converged to a local minimum of |F| that is not a zero.
    Stalled,
    Failed,
}

fn fibonacci_point(i: usize, n: usize) -> Vector3<f64> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    let z = 1.0 - (2.0 * i as f64 + 1.0) / n as f64;
    let r = (1.0 - z * z).max(0.0).sqrt();
    let phi = golden * i as f64;
    Vector3::new(r * phi.cos(), r * phi.sin(), z)
}

struct System<'a> {
    f1: &'a dyn ScalarField,
    f2: &'a dyn ScalarField,
}

impl System<'_> {
    fn value(&self, x: &Vector3<f64>) -> Vector2<f64> {
        Vector2::new(self.f1.value(x.as_slice()), self.f2.value(x.as_slice()))
    }

    /// F(x) and the 2 × 2 Jacobian in the tangent frame at x, with the frame.
    fn jet(&self, x: &Vector3<f64>) -> (Vector2<f64>, Matrix2<f64>, [Vector3<f64>; 2]) {
        let frame = Domain::Sphere.tangent_frame(x.as_slice());
        let t = [
            Vector3::new(frame[(0, 0)], frame[(1, 0)], frame[(2, 0)]),
            Vector3::new(frame[(0, 1)], frame[(1, 1)], frame[(2, 1)]),
        ];
        let (v1, g1) = self.f1.value_grad(x.as_slice());
        let (v2, g2) = self.f2.value_grad(x.as_slice());
        let g1 = Vector3::new(g1[0], g1[1], g1[2]);
        let g2 = Vector3::new(g2[0], g2[1], g2[2]);
        let j = Matrix2::new(g1.dot(&t[0]), g1.dot(&t[1]), g2.dot(&t[0]), g2.dot(&t[1]));
        (Vector2::new(v1, v2), j, t)
    }

    fn newton(&self, seed: Vector3<f64>, opts: &NewtonOptions, tol_abs: f64) -> Outcome {
        let mut x = seed;
        let mut damped = false;
        for _ in 0..opts.max_iter {
            let (f, j, t) = self.jet(&x);
            let norm = f.norm();
            if !norm.is_finite() {
                return Outcome::Failed;
            }
            if norm <= tol_abs {
                return Outcome::Root(x);
            }
            let Some(inv) = j.try_inverse() else {
                return Outcome::Failed;
            };
            let delta = -(inv * f);
            let mut step = 1.0;
            let mut accepted = None;
            for _ in 0..40 {
                let cand = (x + (t[0] * delta[0] + t[1] * delta[1]) * step).normalize();
                // Armijo condition on |F|.
                if self.value(&cand).norm() <= (1.0 - 1e-4 * step) * norm {
                    accepted = Some(cand);
                    break;
                }
                step *= 0.5;
            }
            match accepted {
                Some(next) => x = next,
                None => return Outcome::Stalled,
            }
            damped = step < 1.0;
        }
        // Damped steps up to the cap mean we are creeping towards a positive
        // minimum of |F|; full steps that never converge are a failure.
        if damped {
            Outcome::Stalled
        } else {
            Outcome::Failed
        }
    }
}

/// Distinct common zeros of (f1, f2) on S² reached from `seeds` Fibonacci seeds.
pub fn sphere_roots(
    f1: &dyn ScalarField,
    f2: &dyn ScalarField,
    seeds: usize,
    opts: &NewtonOptions,
) -> SphereRoots {
    let sys = System { f1, f2 };
    let grid: Vec<Vector3<f64>> = (0..seeds).map(|i| fibonacci_point(i, seeds)).collect();
    let scale = grid
        .iter()
        .map(|x| sys.value(x).amax())
        .fold(0.0f64, f64::max)
        .max(f64::MIN_POSITIVE);
    let tol_abs = opts.tol * scale;
    let mut roots: Vec<Vector3<f64>> = Vec::new();
    let mut failures = 0;
    for s in &grid {
        match sys.newton(*s, opts, tol_abs) {
            Outcome::Root(x) => {
                if roots.iter().all(|r| (r - x).norm() > opts.dedup_radius) {
                    roots.push(x);
                }
            }
            Outcome::Stalled => {}
            Outcome::Failed => failures += 1,
        }
    }
    let grad_scale = grid
        .iter()
        .map(|x| sys.jet(x).1.amax())
        .fold(0.0f64, f64::max)
        .max(f64::MIN_POSITIVE);
    let non_transverse = roots
        .iter()
        .any(|x| !(sys.jet(x).1.determinant().abs() > 1e-8 * grad_scale * grad_scale));
    SphereRoots {
        roots,
        failures,
        seeds,
        non_transverse,
    }
}

/// Number of common zeros of `f1`, `f2` on S² (halved in projective mode).
///
/// The sample is unresolved when doubling the seed grid changes the number
/// of roots, a root is not transverse, Newton fails on more than 1% of
/// seeds, or (projective mode) a root lacks its antipode.
pub fn count_common_zeros_sphere(
    f1: &dyn ScalarField,
    f2: &dyn ScalarField,
    opts: &NewtonOptions,
) -> CountSample {
    let base = sphere_roots(f1, f2, opts.seeds.max(1), opts);
    let audit = sphere_roots(f1, f2, 2 * opts.seeds.max(1), opts);
    let mut unresolved = base.roots.len() != audit.roots.len()
        || base.non_transverse
        || audit.non_transverse
        || base.failures * 100 > base.seeds
        || audit.failures * 100 > audit.seeds;
    let mut count = base.roots.len() as i64;
    if opts.projective {
        let paired = base.roots.iter().all(|x| {
            base.roots
                .iter()
                .any(|y| (x + y).norm() <= 10.0 * opts.dedup_radius)
        });
        unresolved |= !paired || count % 2 != 0;
        count /= 2;
    }
    let mut min_separation = f64::INFINITY;
    for (i, a) in base.roots.iter().enumerate() {
        for b in &base.roots[i + 1..] {
            min_separation = min_separation.min((a - b).norm());
        }
    }
    CountSample {
        count,
        seed: 0,
        n_bisection_steps: 0,
        min_separation,
        unresolved,
    }
}
