#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod curves;
pub mod error;
pub mod estimate;
pub mod geomcore;
pub mod grf;
pub mod kacrice;
pub mod linalg;
pub mod oracle;
pub mod par;
pub mod quadrature;
pub mod rng;

pub use error::{Error, Result};
pub use estimate::{Estimate, EstimateFlag};
