//! Brute-force validators that count intersections on individual
//! realizations, independently of any Kac-Rice formula.

mod circle;
mod kinematic;
mod levelset;
mod montecarlo;
mod sphere;

pub use circle::{count_signed_zeros_circle, count_zeros_circle, count_zeros_periodic};
pub use kinematic::{kinematic_mc, KinematicMcOptions};
pub use levelset::{count_preimages, PreimageOptions};
pub use montecarlo::{mc_expected_count, mc_expected_count_with};
pub use sphere::{count_common_zeros_sphere, sphere_roots, NewtonOptions, SphereRoots};

use crate::grf::Polynomial;

/// A scalar C¹ function on the ambient space of the domain.
pub trait ScalarField: Sync {
    fn value(&self, x: &[f64]) -> f64;
    /// Value and ambient gradient.
    fn value_grad(&self, x: &[f64]) -> (f64, Vec<f64>);
}

impl ScalarField for Polynomial {
    fn value(&self, x: &[f64]) -> f64 {
        self.eval(x)
    }

    fn value_grad(&self, x: &[f64]) -> (f64, Vec<f64>) {
        self.eval_grad(x)
    }
}

/// A scalar field given by a value-and-gradient closure.
pub struct FnField<F>(pub F);

impl<F> ScalarField for FnField<F>
where
    F: Fn(&[f64]) -> (f64, Vec<f64>) + Sync,
{
    fn value(&self, x: &[f64]) -> f64 {
        (self.0)(x).0
    }

    fn value_grad(&self, x: &[f64]) -> (f64, Vec<f64>) {
        (self.0)(x)
    }
}

/// Result of counting on one realization.
#[derive(Debug, Clone, PartialEq)]
pub struct CountSample {
    /// Number of points found (signed when orientations are summed).
    pub count: i64,
    pub seed: u64,
    pub n_bisection_steps: u64,
    /// Smallest distance between two distinct roots; infinite with < 2 roots.
    pub min_separation: f64,
    /// Set when the resolution audit or a transversality check failed.
    pub unresolved: bool,
}

impl CountSample {
    #[cfg(test)]
    pub(crate) fn resolved(count: i64) -> Self {
        CountSample {
            count,
            seed: 0,
            n_bisection_steps: 0,
            min_separation: f64::INFINITY,
            unresolved: false,
        }
    }
}

#[cfg(test)]
mod tests;
