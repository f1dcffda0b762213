//! Gaussian regression: conditioning on X(p) = q and the derivative law
//! made independent of X(p).

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use super::model::{jet_covariance, standard_normal_vec, FieldModel, Realization};
use crate::linalg::{pivoted_cholesky, require_nondegenerate, spd_inverse, symmetrize};
use crate::rng::stream_rng;
use crate::Result;

/// A(u, p) = K(u, p) K(p, p)⁻¹.
pub fn regression_matrix(model: &FieldModel, u: &[f64], p: &[f64]) -> Result<DMatrix<f64>> {
    let kpp = model.kernel(p, p);
    require_nondegenerate(&kpp, "K(p,p)")?;
    Ok(model.kernel(u, p) * spd_inverse(&kpp, "K(p,p)")?)
}

/// Sampler for the field conditioned on X(p) = q.
///
/// Draws c ~ N(0, C) and moves it to c + C B(p)ᵀ K(p,p)⁻¹ (q − B(p)c), which
/// is the residual field Y plus the regression mean A(·,p)q.
#[derive(Debug, Clone)]
pub struct ConditionedField {
    model: Arc<FieldModel>,
    p: Vec<f64>,
    q: DVector<f64>,
    b_p: DMatrix<f64>,
    gain: DMatrix<f64>,
}

impl ConditionedField {
    pub fn point(&self) -> &[f64] {
        &self.p
    }

    pub fn value(&self) -> &DVector<f64> {
        &self.q
    }

    /// E{X(u) | X(p) = q} = A(u, p) q.
    pub fn mean_at(&self, u: &[f64]) -> Result<DVector<f64>> {
        Ok(regression_matrix(&self.model, u, &self.p)? * &self.q)
    }

    pub fn sample(&self, seed: u64, stream: u64) -> Realization {
        let mut rng = stream_rng(seed, stream);
        self.sample_with(&mut rng, seed)
    }

    pub fn sample_with<R: Rng>(&self, rng: &mut R, seed: u64) -> Realization {
        let l = self.model.coeff_factor();
        let c = l * standard_normal_vec(rng, l.ncols());
        let residual = &self.q - &self.b_p * &c;
        let conditioned = c + &self.gain * residual;
        Realization::from_coeffs(self.model.clone(), conditioned, seed)
    }
}

pub fn condition(model: &Arc<FieldModel>, p: &[f64], q: &DVector<f64>) -> Result<ConditionedField> {
    let b_p = model.basis_matrix(p);
    let k0 = model.kernel(p, p);
    require_nondegenerate(&k0, "K(p,p)")?;
    let gain = model.coeff_cov() * b_p.transpose() * spd_inverse(&k0, "K(p,p)")?;
    Ok(ConditionedField {
        model: model.clone(),
        p: p.to_vec(),
        q: q.clone(),
        b_p,
        gain,
    })
}

/// Law of the derivative dₚX given X(p): Gaussian with mean `regression · X(p)`
/// and covariance `cov`. The centred part (∇ˣX)ₚ = dₚX − regression · X(p)
/// is independent of X(p).
#[derive(Debug, Clone)]
pub struct DerivativeLaw {
    /// (mk) × k matrix K₁₀ K₀⁻¹.
    pub regression: DMatrix<f64>,
    /// (mk) × (mk) covariance of (∇ˣX)ₚ.
    pub cov: DMatrix<f64>,
    factor: DMatrix<f64>,
    k: usize,
}

impl DerivativeLaw {
    pub fn factor(&self) -> &DMatrix<f64> {
        &self.factor
    }

    /// Mean of vec(dₚX) given X(p) = y.
    pub fn conditional_mean(&self, y: &DVector<f64>) -> DVector<f64> {
        &self.regression * y
    }

    /// One draw of the k × m derivative matrix conditioned on X(p) = y.
    pub fn sample_given<R: Rng>(&self, rng: &mut R, mean: &DVector<f64>) -> DMatrix<f64> {
        let z = standard_normal_vec(rng, self.factor.ncols());
        let v = mean + &self.factor * z;
        let m = v.len().checked_div(self.k).unwrap_or(0);
        DMatrix::from_column_slice(self.k, m, v.as_slice())
    }
}

pub fn nabla_derivative_law(model: &FieldModel, p: &[f64]) -> Result<DerivativeLaw> {
    let jet = jet_covariance(model, p);
    require_nondegenerate(&jet.k0, "K0")?;
    let k = jet.output_dim();
    let mk = jet.k1.nrows();
    let (regression, cov) = if model.isotropic().is_some() {
        (DMatrix::zeros(mk, k), jet.k1.clone())
    } else {
        let reg = jet.k01.transpose() * spd_inverse(&jet.k0, "K0")?;
        let cov = symmetrize(&(&jet.k1 - &reg * &jet.k01));
        (reg, cov)
    };
    let factor = pivoted_cholesky(&cov, 1e-14);
    Ok(DerivativeLaw {
        regression,
        cov,
        factor,
        k,
    })
}
