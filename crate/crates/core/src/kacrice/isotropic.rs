//! Closed forms for isotropic Gaussian fields on spheres.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use super::density::cover_fiber;
use super::levelset::LevelSetW;
use crate::estimate::{Estimate, EstimateFlag};
use crate::grf::IsotropicModel;
use crate::linalg::{det, min_eigenvalue, require_spd, spd_inverse};
use crate::{Error, Result};

fn require_psd(a: &DMatrix<f64>, what: &str) -> Result<()> {
    if a.nrows() != a.ncols() {
        return Err(Error::domain(format!("{what} is not square")));
    }
    if a.nrows() > 0 && min_eigenvalue(a) < -1e-12 * a.amax().max(1.0) {
        return Err(Error::Degenerate(format!("{what} is not positive semidefinite")));
    }
    Ok(())
}

/// Expected number of preimages of `y` for an isotropic field Sᵐ → ℝᵐ:
/// 2 √(det Σ₁ / det Σ₀) · exp(−½ yᵀ Σ₀⁻¹ y).
pub fn isotropic_point_count(sigma0: &DMatrix<f64>, sigma1: &DMatrix<f64>, y: &[f64]) -> Result<f64> {
    require_spd(sigma0, "Σ₀")?;
    require_psd(sigma1, "Σ₁")?;
    let m = sigma0.nrows();
    if sigma1.nrows() != m || y.len() != m {
        return Err(Error::domain(format!(
            "Σ₀ is {m}x{m} but Σ₁ is {0}x{0} and y has {1} entries",
            sigma1.nrows(),
            y.len()
        )));
    }
    let y = DVector::from_column_slice(y);
    let quad = y.dot(&(spd_inverse(sigma0, "Σ₀")? * &y));
    let ratio = (det(sigma1) / det(sigma0)).max(0.0);
    Ok(2.0 * ratio.sqrt() * (-0.5 * quad).exp())
}

/// Expected number of common projective zeros of independent Kostlan
/// polynomials of the given degrees: √(d₁⋯dₘ).
pub fn shub_smale(degrees: &[u32]) -> f64 {
    degrees.iter().map(|&d| d as f64).product::<f64>().sqrt()
}

/// Expected zero count on Sᵐ of the mixed Kostlan field Σ A_ℓ ψ_ℓ (k = m):
/// 2 √(det Σ ℓA_ℓA_ℓᵀ / det Σ A_ℓA_ℓᵀ).
pub fn mixed_kostlan_count(iso: &IsotropicModel) -> Result<f64> {
    if iso.output_dim() != iso.sphere_dim() {
        return Err(Error::domain(format!(
            "zero counts need as many equations as the sphere dimension ({} vs {})",
            iso.output_dim(),
            iso.sphere_dim()
        )));
    }
    isotropic_point_count(&iso.sigma0(), &iso.sigma1(), &vec![0.0; iso.output_dim()])
}

/// Fiber resolution used by [`isotropic_sphere_count`]; the error estimate
/// compares against twice this resolution.
pub const SPHERE_COUNT_RESOLUTION: usize = 48;

/// Expected number of points of X⁻¹(W) for an isotropic field on Sᵐ:
///
/// 2 ∫_W √det(νᵀΣ₁ν) · exp(−½yᵀΣ₀⁻¹y) / ((2π)^{(k−m)/2} √det Σ₀) dW(y).
pub fn isotropic_sphere_count(
    sigma0: &DMatrix<f64>,
    sigma1: &DMatrix<f64>,
    w: &LevelSetW,
    m: usize,
) -> Result<Estimate> {
    require_spd(sigma0, "Σ₀")?;
    require_psd(sigma1, "Σ₁")?;
    let k = sigma0.nrows();
    if sigma1.nrows() != k || w.ambient_dim() != k {
        return Err(Error::domain("Σ₀, Σ₁ and W must share the dimension k"));
    }
    if w.codim() != m {
        return Err(Error::domain(format!(
            "W has codimension {} but the sphere has dimension {m}",
            w.codim()
        )));
    }
    let inv = spd_inverse(sigma0, "Σ₀")?;
    let norm = (2.0 * PI).powf((k as f64 - m as f64) / 2.0) * det(sigma0).sqrt();
    let gauss = |y: &DVector<f64>| (-0.5 * y.dot(&(&inv * y))).exp() / norm;
    let scale = sigma0.clone().symmetric_eigen().eigenvalues.max().sqrt();
    let integrate = |res: usize| -> Result<(f64, bool)> {
        let cover = cover_fiber(w, res, scale, &gauss)?;
        let total = cover
            .nodes
            .iter()
            .map(|(node, nu, g)| {
                let a = nu.transpose() * sigma1 * nu;
                node.weight * g * det(&a).max(0.0).sqrt()
            })
            .sum::<f64>();
        Ok((2.0 * total, cover.diverged))
    };
    let (coarse, d1) = integrate(SPHERE_COUNT_RESOLUTION)?;
    let (fine, d2) = integrate(2 * SPHERE_COUNT_RESOLUTION)?;
    let est = Estimate::new(fine, (fine - coarse).abs(), 0, 0, "isotropic_sphere_count");
    Ok(est.with_flag((d1 || d2).then_some(EstimateFlag::Diverged)))
}

/// vol(Sᵐ)·vol(𝔹ᵐ)·m! and 2(2π)ᵐ, computed independently.
pub fn gamma_identity_check(m: u32) -> (f64, f64) {
    let mf = m as f64;
    let sphere = 2.0 * PI.powf((mf + 1.0) / 2.0) / libm::tgamma((mf + 1.0) / 2.0);
    let ball = PI.powf(mf / 2.0) / libm::tgamma(mf / 2.0 + 1.0);
    let factorial = libm::tgamma(mf + 1.0);
    (sphere * ball * factorial, 2.0 * (2.0 * PI).powi(m as i32))
}
