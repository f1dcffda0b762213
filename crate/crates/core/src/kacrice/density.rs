//! Kac-Rice density ρ(p) = ∫_{W} E{α·J(νᵀdₚX) | X(p) = y} φ_{K0}(y) dW(y)
//! and its integral over a region of the domain.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::levelset::{FiberNode, LevelSetW};
use crate::estimate::{Estimate, EstimateFlag, Moments};
use crate::grf::{jet_covariance, nabla_derivative_law, Domain, FieldModel};
use crate::linalg::{det, gaussian_density, singular_values};
use crate::quadrature::{gauss_legendre, Rule1};
use crate::rng::{derive_seed, nested_stream, stream_rng};
use crate::{par, Error, Result};

/// Inner Monte Carlo samples are drawn in chunks with one random stream each.
const CHUNK: usize = 4096;
/// A fiber shell whose Gaussian mass is below this fraction of the running
/// total ends the truncation.
const SHELL_STOP: f64 = 1e-5;
/// Truncation radius cap, in units of the K0 standard deviation.
const MAX_RADIUS_SCALES: f64 = 60.0;

/// What a weight sees at one inner sample.
pub struct WeightInput<'a> {
    pub p: &'a [f64],
    pub y: &'a DVector<f64>,
    /// dₚX in the tangent frame, k × m.
    pub derivative: &'a DMatrix<f64>,
    /// νᵀ dₚX, codim × m.
    pub normal_derivative: &'a DMatrix<f64>,
}

/// A weight α on intersection points.
#[derive(Clone)]
pub struct WeightFn {
    f: Arc<dyn Fn(&WeightInput<'_>) -> f64 + Send + Sync>,
    bounded: bool,
    label: String,
}

impl fmt::Debug for WeightFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WeightFn")
            .field("label", &self.label)
            .field("bounded", &self.bounded)
            .finish()
    }
}

impl WeightFn {
    pub fn new(
        label: impl Into<String>,
        bounded: bool,
        f: Arc<dyn Fn(&WeightInput<'_>) -> f64 + Send + Sync>,
    ) -> Self {
        WeightFn {
            f,
            bounded,
            label: label.into(),
        }
    }

    /// α ≡ 1: the plain count.
    pub fn unit() -> Self {
        Self::new("unit", true, Arc::new(|_| 1.0))
    }

    /// Orientation sign of det(νᵀdₚX); zero on ties and non-square blocks.
    pub fn sign_det() -> Self {
        Self::new(
            "sign_det",
            true,
            Arc::new(|inp| {
                let m = inp.normal_derivative;
                if m.nrows() != m.ncols() {
                    return 0.0;
                }
                let d = det(m);
                if d > 0.0 {
                    1.0
                } else if d < 0.0 {
                    -1.0
                } else {
                    0.0
                }
            }),
        )
    }

    pub fn eval(&self, input: &WeightInput<'_>) -> f64 {
        (self.f)(input)
    }

    pub fn is_bounded(&self) -> bool {
        self.bounded
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

/// Sample sizes and seed for the nested estimator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McParams {
    /// Inner Monte Carlo draws of the derivative per fiber node.
    pub n_samples: usize,
    /// Per-direction node count of the fiber cubature.
    pub fiber_nodes: usize,
    pub seed: u64,
}

impl Default for McParams {
    fn default() -> Self {
        McParams {
            n_samples: 4096,
            fiber_nodes: 32,
            seed: 0,
        }
    }
}

/// Normal Jacobian of a c × m matrix with c ≤ m; zero when c > m.
pub(crate) fn normal_jacobian(a: &DMatrix<f64>) -> f64 {
    let (c, m) = a.shape();
    if c == 0 {
        1.0
    } else if c > m {
        0.0
    } else if c == m {
        det(a).abs()
    } else {
        singular_values(a).iter().product()
    }
}

/// Fiber nodes with framing and Gaussian factor, truncated where the
/// Gaussian mass of W becomes negligible.
pub(crate) struct FiberCover {
    pub nodes: Vec<(FiberNode, DMatrix<f64>, f64)>,
    pub diverged: bool,
}

pub(crate) fn cover_fiber(
    w: &LevelSetW,
    resolution: usize,
    scale: f64,
    gauss: &dyn Fn(&DVector<f64>) -> f64,
) -> Result<FiberCover> {
    let rule = w
        .fiber_rule()
        .ok_or_else(|| Error::Config(format!("{} has no fiber cubature rule", w.label())))?;
    let mut out = Vec::new();
    let keep = |nodes: Vec<FiberNode>, out: &mut Vec<(FiberNode, DMatrix<f64>, f64)>| {
        let mut mass = 0.0;
        for node in nodes {
            let g = gauss(&node.y);
            // Unframed nodes still count towards the truncation test.
            mass += node.weight * g;
            if let Some(nu) = w.framing(&node.y) {
                out.push((node, nu, g));
            }
        }
        mass
    };
    if let Some(rb) = rule.bounded_radius() {
        let r1 = rb * (1.0 + 1e-12) + 1e-300;
        keep(rule.shell(0.0, r1.max(f64::MIN_POSITIVE), resolution), &mut out);
        return Ok(FiberCover {
            nodes: out,
            diverged: false,
        });
    }
    let step = scale.max(f64::MIN_POSITIVE);
    let mut running = 0.0;
    let mut r0 = 0.0;
    loop {
        let r1 = r0 + step;
        let mass = keep(rule.shell(r0, r1, resolution), &mut out);
        if !mass.is_finite() {
            return Ok(FiberCover {
                nodes: out,
                diverged: true,
            });
        }
        running += mass;
        if running > 0.0 && mass <= SHELL_STOP * running {
            return Ok(FiberCover {
                nodes: out,
                diverged: false,
            });
        }
        if r1 >= MAX_RADIUS_SCALES * step {
            return Ok(FiberCover {
                nodes: out,
                diverged: true,
            });
        }
        r0 = r1;
    }
}

fn max_std(k0: &DMatrix<f64>) -> f64 {
    if k0.nrows() == 0 {
        1.0
    } else {
        k0.clone().symmetric_eigen().eigenvalues.max().max(0.0).sqrt()
    }
}

fn check_dims(model: &FieldModel, w: &LevelSetW) -> Result<()> {
    if w.ambient_dim() != model.output_dim() {
        return Err(Error::domain(format!(
            "W lives in ℝ^{} but the field takes values in ℝ^{}",
            w.ambient_dim(),
            model.output_dim()
        )));
    }
    Ok(())
}

/// Kac-Rice density of X ∈ W at the domain point `p`.
pub fn density_point(
    model: &FieldModel,
    w: &LevelSetW,
    p: &[f64],
    mc: &McParams,
    weight: &WeightFn,
) -> Result<Estimate> {
    density_point_in_frame(model, w, p, mc, weight, None)
}

/// [`density_point`] with the tangent frame at `p` changed by the orthogonal
/// m × m matrix `frame_change` (derivatives become dₚX·Q).
pub fn density_point_in_frame(
    model: &FieldModel,
    w: &LevelSetW,
    p: &[f64],
    mc: &McParams,
    weight: &WeightFn,
    frame_change: Option<&DMatrix<f64>>,
) -> Result<Estimate> {
    check_dims(model, w)?;
    if let Some(q) = frame_change {
        let m = model.domain().dim();
        if q.shape() != (m, m) || (q.transpose() * q - DMatrix::identity(m, m)).amax() > 1e-10 {
            return Err(Error::domain("frame change must be an orthogonal m x m matrix"));
        }
    }
    let law = nabla_derivative_law(model, p)?;
    let k0 = jet_covariance(model, p).k0;
    let gauss = |y: &DVector<f64>| gaussian_density(y, &k0).unwrap_or(0.0);
    let cover = cover_fiber(w, mc.fiber_nodes, max_std(&k0), &gauss)?;
    let n_samples = mc.n_samples.max(1);
    let chunks = n_samples.div_ceil(CHUNK);
    let n_nodes = cover.nodes.len();

    let partials = par::map_indexed(n_nodes * chunks, |task| {
        let (node_idx, chunk) = (task / chunks, task % chunks);
        let (node, nu, _) = &cover.nodes[node_idx];
        let mean = law.conditional_mean(&node.y);
        let mut rng = stream_rng(mc.seed, nested_stream(node_idx, chunk));
        let count = CHUNK.min(n_samples - chunk * CHUNK);
        let mut moments = Moments::default();
        for _ in 0..count {
            let mut d = law.sample_given(&mut rng, &mean);
            if let Some(q) = frame_change {
                d *= q;
            }
            let projected = nu.transpose() * &d;
            let input = WeightInput {
                p,
                y: &node.y,
                derivative: &d,
                normal_derivative: &projected,
            };
            moments.push(weight.eval(&input) * normal_jacobian(&projected));
        }
        moments
    });

    let mut value = 0.0;
    let mut var = 0.0;
    for (node_idx, (node, _, g)) in cover.nodes.iter().enumerate() {
        let mut moments = Moments::default();
        for part in &partials[node_idx * chunks..(node_idx + 1) * chunks] {
            moments.merge(part);
        }
        let c = node.weight * g;
        value += c * moments.mean();
        var += c * c * moments.variance() / moments.count() as f64;
    }
    let est = Estimate::new(
        value,
        var.sqrt(),
        (n_nodes * n_samples) as u64,
        mc.seed,
        "kac_rice_density",
    );
    Ok(est.with_flag(cover.diverged.then_some(EstimateFlag::Diverged)))
}

/// A subset of the domain with an outer cubature rule.
#[derive(Debug, Clone, PartialEq)]
pub enum Region {
    /// Finitely many points (a zero-dimensional region).
    Points(Vec<Vec<f64>>),
    /// The whole circle, trapezoid rule.
    Circle { nodes: usize },
    /// The arc of angles [from, to) on the circle, Gauss–Legendre.
    Arc { from: f64, to: f64, nodes: usize },
    /// The whole sphere: Gauss–Legendre in z times uniform azimuth.
    Sphere { n_polar: usize, n_azimuth: usize },
    /// The cube [0,1]ᵐ, tensor Gauss–Legendre.
    Cube { order: usize },
}

impl Region {
    /// Cubature nodes and weights for a region of `domain`.
    pub fn cubature(&self, domain: Domain) -> Result<Vec<(Vec<f64>, f64)>> {
        let mismatch = || {
            Error::domain(format!("region {self:?} does not fit the domain {domain:?}"))
        };
        match self {
            Region::Points(ps) => Ok(ps.iter().map(|p| (p.clone(), 1.0)).collect()),
            Region::Circle { nodes } => {
                if domain != Domain::Circle {
                    return Err(mismatch());
                }
                let rule = Rule1::periodic((*nodes).max(1), 0.0);
                Ok(circle_nodes(&rule))
            }
            Region::Arc { from, to, nodes } => {
                if domain != Domain::Circle {
                    return Err(mismatch());
                }
                let rule = Rule1::composite_gl(*from, *to, 1, (*nodes).max(1));
                Ok(circle_nodes(&rule))
            }
            Region::Sphere { n_polar, n_azimuth } => {
                if domain != Domain::Sphere {
                    return Err(mismatch());
                }
                let (zs, wz) = gauss_legendre((*n_polar).max(1));
                let phi = Rule1::periodic((*n_azimuth).max(1), 0.0);
                let mut out = Vec::new();
                for (&z, &wzi) in zs.iter().zip(&wz) {
                    let s = (1.0 - z * z).sqrt();
                    for (&a, &wa) in phi.nodes.iter().zip(&phi.weights) {
                        out.push((vec![s * a.cos(), s * a.sin(), z], wzi * wa));
                    }
                }
                Ok(out)
            }
            Region::Cube { order } => {
                let Domain::Cube(m) = domain else {
                    return Err(mismatch());
                };
                let rule = Rule1::composite_gl(0.0, 1.0, 1, (*order).max(1));
                let n = rule.len();
                let total = n.pow(m as u32);
                Ok((0..total)
                    .map(|mut idx| {
                        let mut p = Vec::with_capacity(m);
                        let mut wt = 1.0;
                        for _ in 0..m {
                            p.push(rule.nodes[idx % n]);
                            wt *= rule.weights[idx % n];
                            idx /= n;
                        }
                        (p, wt)
                    })
                    .collect())
            }
        }
    }
}

fn circle_nodes(rule: &Rule1) -> Vec<(Vec<f64>, f64)> {
    rule.nodes
        .iter()
        .zip(&rule.weights)
        .map(|(&t, &w)| (vec![t.cos(), t.sin()], w))
        .collect()
}

/// Expected number of points of X⁻¹(W) in `region`, weighted by α.
///
/// For a zero-dimensional region this is Σₚ P{X(p) ∈ W}, which only involves
/// the marginal laws.
pub fn expected_count(
    model: &FieldModel,
    w: &LevelSetW,
    region: &Region,
    mc: &McParams,
    weight: &WeightFn,
) -> Result<Estimate> {
    check_dims(model, w)?;
    let nodes = region.cubature(model.domain())?;
    if let Region::Points(points) = region {
        return point_probabilities(model, w, points, mc);
    }
    let results = par::map_indexed(nodes.len(), |i| {
        let sub = McParams {
            seed: derive_seed(mc.seed, i as u64),
            ..*mc
        };
        density_point(model, w, &nodes[i].0, &sub, weight)
    });
    let mut value = 0.0;
    let mut var = 0.0;
    let mut n = 0;
    let mut diverged = false;
    for ((_, wt), r) in nodes.iter().zip(results) {
        let est = r?;
        value += wt * est.value;
        var += wt * wt * est.std_error * est.std_error;
        n += est.n;
        diverged |= est.flag == Some(EstimateFlag::Diverged);
    }
    Ok(
        Estimate::new(value, var.sqrt(), n, mc.seed, "kac_rice_integral")
            .with_flag(diverged.then_some(EstimateFlag::Diverged)),
    )
}

fn point_probabilities(
    model: &FieldModel,
    w: &LevelSetW,
    points: &[Vec<f64>],
    mc: &McParams,
) -> Result<Estimate> {
    let mut total = 0.0;
    let mut diverged = false;
    for p in points {
        if p.len() != model.domain().ambient_dim() {
            return Err(Error::domain("point has the wrong number of coordinates"));
        }
        if w.codim() > 0 {
            // A set of positive codimension has probability zero.
            continue;
        }
        let k0 = model.kernel(p, p);
        crate::linalg::require_nondegenerate(&k0, "K(p,p)")?;
        let gauss = |y: &DVector<f64>| gaussian_density(y, &k0).unwrap_or(0.0);
        let cover = cover_fiber(w, mc.fiber_nodes, max_std(&k0), &gauss)?;
        diverged |= cover.diverged;
        total += cover
            .nodes
            .iter()
            .map(|(node, _, g)| node.weight * g)
            .sum::<f64>();
    }
    Ok(
        Estimate::new(total, 0.0, points.len() as u64, mc.seed, "marginal_probability")
            .with_flag(diverged.then_some(EstimateFlag::Diverged)),
    )
}
