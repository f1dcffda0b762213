//! Experiment configuration: JSON schema, defaults and validation.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::CliError;

/// Current version of the configuration schema.
pub const SCHEMA_VERSION: u32 = 1;

fn schema_version() -> u32 {
    SCHEMA_VERSION
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    /// Zeros of X − y on S¹ or S².
    PointCount,
    /// Preimages of a circle/sphere target W.
    SphereCount,
    /// Zeros counted with orientation sign on S¹.
    SignedCount,
    /// Intersections of a randomly rotated curve with a fixed curve on S².
    Kinematic,
    /// Counts along the family (1 − ε)tᵈ + εtᵈ′.
    ContinuitySweep,
    /// Zero counts of Kostlan polynomials on S¹ across degrees.
    DegreeSweep,
    /// Growth exponent of Vol(W ∩ B_R).
    Subgaussian,
    /// Built-in geometric and numerical invariants.
    Selfcheck,
}

impl ExperimentKind {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::PointCount => "point_count",
            ExperimentKind::SphereCount => "sphere_count",
            ExperimentKind::SignedCount => "signed_count",
            ExperimentKind::Kinematic => "kinematic",
            ExperimentKind::ContinuitySweep => "continuity_sweep",
            ExperimentKind::DegreeSweep => "degree_sweep",
            ExperimentKind::Subgaussian => "subgaussian",
            ExperimentKind::Selfcheck => "selfcheck",
        }
    }

    pub fn is_sweep(&self) -> bool {
        matches!(self, ExperimentKind::ContinuitySweep | ExperimentKind::DegreeSweep)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DomainSpec {
    Circle,
    Sphere,
    Cube { m: usize },
}

/// One monomial `coef · x^exponents` in output component `output`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermSpec {
    #[serde(default)]
    pub output: usize,
    pub exponents: Vec<u32>,
    pub coef: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpec {
    /// Independent Kostlan polynomials on Sᵐ, one per entry of `degrees`.
    Kostlan { m: usize, degrees: Vec<u32> },
    /// Σ_ℓ A_ℓ ψ_ℓ with `matrices[ℓ]` = A_ℓ given row by row.
    MixedKostlan { m: usize, matrices: Vec<Vec<Vec<f64>>> },
    /// Polynomial basis functions with a coefficient covariance.
    CustomBasis {
        domain: DomainSpec,
        output_dim: usize,
        basis: Vec<Vec<TermSpec>>,
        coeff_cov: Vec<Vec<f64>>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum TargetSpec {
    Point { y: Vec<f64> },
    Circle { radius: f64 },
    Sphere { radius: f64 },
    /// Span of the given column vectors.
    Linear { basis: Vec<Vec<f64>> },
    HalfLine,
    ExponentialSpiral,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum CurveSpec {
    GreatCircle { normal: [f64; 3] },
    Latitude { polar_radius: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurvePair {
    /// The curve that gets rotated.
    pub moving: CurveSpec,
    pub fixed: CurveSpec,
}

impl Default for CurvePair {
    fn default() -> Self {
        CurvePair {
            moving: CurveSpec::Latitude { polar_radius: PI / 4.0 },
            fixed: CurveSpec::GreatCircle { normal: [0.0, 0.0, 1.0] },
        }
    }
}

/// Numeric parameters. Every field has a default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NumericParams {
    /// Realizations drawn by the oracle (0 skips the oracle).
    pub n_samples: usize,
    /// Inner Monte Carlo draws per fiber node in the Kac-Rice integrator.
    pub inner_samples: usize,
    /// Per-direction node count of the fiber cubature over W.
    pub fiber_nodes: usize,
    /// Outer cubature nodes on S¹.
    pub circle_nodes: usize,
    /// Outer cubature on S²: Gauss–Legendre nodes in z and azimuthal nodes.
    pub sphere_polar: usize,
    pub sphere_azimuth: usize,
    /// Grid nodes for sign-change root finding on S¹.
    pub grid_n: usize,
    pub bisection_tol: f64,
    /// Newton seeds on S² (the audit uses twice as many).
    pub newton_seeds: usize,
    pub newton_max_iter: usize,
    pub newton_tol: f64,
    pub dedup_radius: f64,
    pub n_rotations: usize,
    pub max_segment: f64,
    pub curve_nodes: usize,
    pub angle_nodes: usize,
    pub r_grid: Vec<f64>,
    pub epsilon_grid: Vec<f64>,
    /// (d, d′) of the continuity family.
    pub family_degrees: [u32; 2],
    pub degree_grid: Vec<u32>,
}

impl Default for NumericParams {
    fn default() -> Self {
        NumericParams {
            n_samples: 2000,
            inner_samples: 4096,
            fiber_nodes: 16,
            circle_nodes: 32,
            sphere_polar: 6,
            sphere_azimuth: 8,
            grid_n: 1024,
            bisection_tol: 1e-12,
            newton_seeds: 600,
            newton_max_iter: 60,
            newton_tol: 1e-11,
            dedup_radius: 1e-6,
            n_rotations: 2000,
            max_segment: 1e-3,
            curve_nodes: 96,
            angle_nodes: 64,
            r_grid: (1..=20).map(f64::from).collect(),
            epsilon_grid: vec![0.0, 0.001, 0.01, 0.1, 0.25, 0.5, 0.75, 1.0],
            family_degrees: [4, 9],
            degree_grid: vec![1, 4, 9, 16, 25],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSpec {
    /// Output file; standard output when absent.
    pub path: Option<String>,
    pub format: Format,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "schema_version")]
    pub schema_version: u32,
    pub experiment: ExperimentKind,
    /// Field model; each experiment has its own default.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelSpec>,
    /// Target set W; each experiment has its own default.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<TargetSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub curves: Option<CurvePair>,
    #[serde(default)]
    pub params: NumericParams,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output: OutputSpec,
}

impl ExperimentConfig {
    /// A configuration with all defaults for the given experiment.
    pub fn new(experiment: ExperimentKind) -> Self {
        ExperimentConfig {
            schema_version: SCHEMA_VERSION,
            experiment,
            model: None,
            target: None,
            curves: None,
            params: NumericParams::default(),
            seed: 0,
            output: OutputSpec::default(),
        }
    }

    /// Parses JSON, reporting the key path of the first offending field.
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: ExperimentConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            CliError::Validation(format!("at `{path}`: {}", e.inner()))
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("configs always serialize")
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |path: &str, msg: &str| Err(CliError::Validation(format!("at `{path}`: {msg}")));
        if self.schema_version != SCHEMA_VERSION {
            return bad(
                "schema_version",
                &format!("unsupported version {} (expected {SCHEMA_VERSION})", self.schema_version),
            );
        }
        use ExperimentKind::*;
        let k = self.experiment;
        let uses_model = matches!(k, PointCount | SphereCount | SignedCount);
        let uses_target = !matches!(k, Kinematic | Selfcheck);
        if self.model.is_some() && !uses_model {
            return bad("model", &format!("not used by experiment {}", k.name()));
        }
        if self.target.is_some() && !uses_target {
            return bad("target", &format!("not used by experiment {}", k.name()));
        }
        if self.curves.is_some() && k != Kinematic {
            return bad("curves", &format!("not used by experiment {}", k.name()));
        }
        let p = &self.params;
        let positive = [
            ("params.inner_samples", p.inner_samples),
            ("params.fiber_nodes", p.fiber_nodes),
            ("params.circle_nodes", p.circle_nodes),
            ("params.sphere_polar", p.sphere_polar),
            ("params.sphere_azimuth", p.sphere_azimuth),
            ("params.grid_n", p.grid_n),
            ("params.newton_seeds", p.newton_seeds),
            ("params.newton_max_iter", p.newton_max_iter),
            ("params.curve_nodes", p.curve_nodes),
            ("params.angle_nodes", p.angle_nodes),
        ];
        for (path, v) in positive {
            if v == 0 {
                return bad(path, "must be positive");
            }
        }
        let positive_f = [
            ("params.bisection_tol", p.bisection_tol),
            ("params.newton_tol", p.newton_tol),
            ("params.dedup_radius", p.dedup_radius),
            ("params.max_segment", p.max_segment),
        ];
        for (path, v) in positive_f {
            if !(v > 0.0 && v.is_finite()) {
                return bad(path, "must be a positive number");
            }
        }
        if p.grid_n < 4 {
            return bad("params.grid_n", "needs at least 4 nodes");
        }
        match self.experiment {
            ExperimentKind::ContinuitySweep => {
                if p.epsilon_grid.is_empty() {
                    return bad("params.epsilon_grid", "must not be empty");
                }
                if let Some(i) = p.epsilon_grid.iter().position(|e| !(0.0..=1.0).contains(e)) {
                    return bad(&format!("params.epsilon_grid[{i}]"), "must lie in [0, 1]");
                }
            }
            ExperimentKind::DegreeSweep => {
                if p.degree_grid.is_empty() {
                    return bad("params.degree_grid", "must not be empty");
                }
            }
            ExperimentKind::Subgaussian => {
                if p.r_grid.len() < 3 {
                    return bad("params.r_grid", "needs at least 3 radii");
                }
                if let Some(i) = p.r_grid.iter().position(|r| !(*r > 0.0 && r.is_finite())) {
                    return bad(&format!("params.r_grid[{i}]"), "radii must be positive");
                }
            }
            _ => {}
        }
        Ok(())
    }
}
