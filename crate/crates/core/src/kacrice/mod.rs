//! Kac-Rice densities, expected counts and their closed forms.

mod density;
mod isotropic;
mod kinematic;
mod levelset;
mod subgaussian;

pub use density::{
    density_point, density_point_in_frame, expected_count, McParams, Region, WeightFn, WeightInput};
pub use isotropic::{
    gamma_identity_check, isotropic_point_count, isotropic_sphere_count, mixed_kostlan_count,
    shub_smale, SPHERE_COUNT_RESOLUTION,
};
pub use kinematic::{kinematic_rhs_sphere, KinematicOptions};
pub use levelset::{FiberNode, FiberRule, LevelSetW};
pub use subgaussian::{subgaussian_diagnostic, volume_profile, SubgaussianFit};
