//! Finite-rank Gaussian random fields on S¹, S² and cubes.

mod model;
pub mod poly;
mod regression;

pub use model::{
    isotropic_model, jet_covariance, kostlan_model, sample, sample_stream, sample_with, Domain,
    FieldModel, IsotropicModel, JetCovariance, Realization,
};
pub use poly::{Monomial, Polynomial};
pub use regression::{
    condition, nabla_derivative_law, regression_matrix, ConditionedField, DerivativeLaw,
};
