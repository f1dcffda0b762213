//! Target sets W ⊂ ℝᵏ given as level sets, with a normal framing and a
//! cubature rule over pieces of W.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::quadrature::{gauss_legendre, Rule1};
use crate::{Error, Result};

/// A cubature node on W with its volume weight.
#[derive(Debug, Clone, PartialEq)]
pub struct FiberNode {
    pub y: DVector<f64>,
    pub weight: f64,
}

/// Cubature over the shells W ∩ {r0 ≤ |y| < r1}.
pub trait FiberRule: Send + Sync {
    /// Nodes covering the shell; `resolution` is a per-direction node count.
    fn shell(&self, r0: f64, r1: f64, resolution: usize) -> Vec<FiberNode>;

    /// Radius of a ball containing W, when W is bounded.
    fn bounded_radius(&self) -> Option<f64>;
}

type MapFn = dyn Fn(&DVector<f64>) -> DVector<f64> + Send + Sync;
type JacFn = dyn Fn(&DVector<f64>) -> DMatrix<f64> + Send + Sync;
type FramingFn = dyn Fn(&DVector<f64>) -> Option<DMatrix<f64>> + Send + Sync;

/// W = φ⁻¹(0) ⊂ ℝᵏ with codimension c, a normal framing ν(y) (k × c,
/// orthonormal columns) and an optional fiber cubature rule.
#[derive(Clone)]
pub struct LevelSetW {
    ambient_dim: usize,
    codim: usize,
    map: Arc<MapFn>,
    jacobian: Arc<JacFn>,
    framing: Arc<FramingFn>,
    fiber: Option<Arc<dyn FiberRule>>,
    label: String,
}

impl fmt::Debug for LevelSetW {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LevelSetW")
            .field("label", &self.label)
            .field("ambient_dim", &self.ambient_dim)
            .field("codim", &self.codim)
            .field("has_fiber_rule", &self.fiber.is_some())
            .finish()
    }
}

impl LevelSetW {
    pub fn new(
        label: impl Into<String>,
        ambient_dim: usize,
        codim: usize,
        map: Arc<MapFn>,
        jacobian: Arc<JacFn>,
        framing: Arc<FramingFn>,
        fiber: Option<Arc<dyn FiberRule>>,
    ) -> Result<Self> {
        if codim > ambient_dim {
            return Err(Error::domain(format!(
                "codimension {codim} exceeds ambient dimension {ambient_dim}"
            )));
        }
        Ok(LevelSetW {
            ambient_dim,
            codim,
            map,
            jacobian,
            framing,
            fiber,
            label: label.into(),
        })
    }

    /// The single point {y0}.
    pub fn point(y0: &[f64]) -> Self {
        let k = y0.len();
        let c = DVector::from_column_slice(y0);
        let c2 = c.clone();
        LevelSetW {
            ambient_dim: k,
            codim: k,
            map: Arc::new(move |y| y - &c),
            jacobian: Arc::new(move |_| DMatrix::identity(k, k)),
            framing: Arc::new(move |_| Some(DMatrix::identity(k, k))),
            fiber: Some(Arc::new(PointFiber(c2))),
            label: format!("point{y0:?}"),
        }
    }

    /// The circle |y| = r in ℝ², framed by the outward normal.
    pub fn circle(radius: f64) -> Result<Self> {
        require_radius(radius)?;
        Ok(LevelSetW {
            ambient_dim: 2,
            codim: 1,
            map: Arc::new(move |y| DVector::from_element(1, y.norm_squared() - radius * radius)),
            jacobian: Arc::new(|y| DMatrix::from_row_slice(1, 2, &[2.0 * y[0], 2.0 * y[1]])),
            framing: Arc::new(radial_framing),
            fiber: Some(Arc::new(SphereFiber { radius, dim: 1 })),
            label: format!("circle(r={radius})"),
        })
    }

    /// The sphere |y| = r in ℝ³, framed by the outward normal.
    pub fn sphere(radius: f64) -> Result<Self> {
        require_radius(radius)?;
        Ok(LevelSetW {
            ambient_dim: 3,
            codim: 1,
            map: Arc::new(move |y| DVector::from_element(1, y.norm_squared() - radius * radius)),
            jacobian: Arc::new(|y| DMatrix::from_row_slice(1, 3, &[2.0 * y[0], 2.0 * y[1], 2.0 * y[2]])),
            framing: Arc::new(radial_framing),
            fiber: Some(Arc::new(SphereFiber { radius, dim: 2 })),
            label: format!("sphere(r={radius})"),
        })
    }

    /// The linear subspace spanned by the columns of `basis` (k × j, j ≤ 2).
    pub fn linear(basis: &DMatrix<f64>) -> Result<Self> {
        let k = basis.nrows();
        let span = crate::geomcore::Subspace::span(basis);
        let j = span.dim();
        if j != basis.ncols() {
            return Err(Error::domain("subspace basis is rank deficient"));
        }
        if j > 2 {
            return Err(Error::domain("fiber cubature supports subspaces of dimension ≤ 2"));
        }
        let q = span.basis().clone();
        let normal = span.complement().basis().clone();
        let nt = normal.transpose();
        let nt2 = nt.clone();
        let fiber: Arc<dyn FiberRule> = if j == 0 {
            Arc::new(PointFiber(DVector::zeros(k)))
        } else {
            Arc::new(LinearFiber { basis: q })
        };
        Ok(LevelSetW {
            ambient_dim: k,
            codim: k - j,
            map: Arc::new(move |y| &nt * y),
            jacobian: Arc::new(move |_| nt2.clone()),
            framing: Arc::new(move |_| Some(normal.clone())),
            fiber: Some(fiber),
            label: format!("linear(dim={j}, k={k})"),
        })
    }

    /// The open half-line {y > 0} ⊂ ℝ (codimension 0).
    pub fn half_line() -> Self {
        LevelSetW {
            ambient_dim: 1,
            codim: 0,
            map: Arc::new(|_| DVector::zeros(0)),
            jacobian: Arc::new(|_| DMatrix::zeros(0, 1)),
            framing: Arc::new(|_| Some(DMatrix::zeros(1, 0))),
            fiber: Some(Arc::new(HalfLineFiber)),
            label: "half_line".into(),
        }
    }

    /// The curve r ↦ r(cos θ(r), sin θ(r)), r ≥ 0, in ℝ².
    ///
    /// `theta` returns (θ(r), θ′(r)). Its volume in the ball B_R is
    /// ∫₀ᴿ √(1 + r²θ′(r)²) dr, so the growth of W is controlled by θ′.
    pub fn radial_curve(
        label: impl Into<String>,
        theta: Arc<dyn Fn(f64) -> (f64, f64) + Send + Sync>,
    ) -> Self {
        let th_map = theta.clone();
        let th_frame = theta.clone();
        let map = move |y: &DVector<f64>| {
            let (t, _) = th_map(y.norm());
            DVector::from_element(1, y[1] * t.cos() - y[0] * t.sin())
        };
        let map = Arc::new(map);
        let map_j = map.clone();
        LevelSetW {
            ambient_dim: 2,
            codim: 1,
            map,
            jacobian: Arc::new(move |y| {
                let h = 1e-6 * (1.0 + y.norm());
                let mut j = DMatrix::zeros(1, 2);
                for i in 0..2 {
                    let mut yp = y.clone();
                    let mut ym = y.clone();
                    yp[i] += h;
                    ym[i] -= h;
                    j[(0, i)] = (map_j(&yp)[0] - map_j(&ym)[0]) / (2.0 * h);
                }
                j
            }),
            framing: Arc::new(move |y| {
                let r = y.norm();
                let (t, dt) = th_frame(r);
                let (s, c) = t.sin_cos();
                let tangent = [c - r * dt * s, s + r * dt * c];
                let speed = (tangent[0] * tangent[0] + tangent[1] * tangent[1]).sqrt();
                if !(speed > 0.0) || !speed.is_finite() {
                    return None;
                }
                Some(DMatrix::from_column_slice(
                    2,
                    1,
                    &[-tangent[1] / speed, tangent[0] / speed],
                ))
            }),
            fiber: Some(Arc::new(RadialCurveFiber { theta })),
            label: label.into(),
        }
    }

    /// The spiral with Vol(W ∩ B_R) = e^{R²} − 1 + c for R past a small radius.
    ///
    /// Arc length grows like 2r·e^{r²}; below the radius where that speed
    /// drops under 1 the curve is a radial segment.
    pub fn exponential_spiral() -> Self {
        // 2 r e^{r²} = 1
        let r_star = {
            let (mut lo, mut hi) = (0.0f64, 1.0f64);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if 2.0 * mid * (mid * mid).exp() < 1.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            hi
        };
        let dtheta = move |r: f64| -> f64 {
            if r <= r_star {
                0.0
            } else {
                let s = 2.0 * r * (r * r).exp();
                (s * s - 1.0).max(0.0).sqrt() / r
            }
        };
        // θ(r) = ∫ θ′ over [r*, r]; r = r* + u² removes the square-root
        // behaviour at r*, and a fixed rule in u keeps θ smooth in r.
        let theta = move |r: f64| -> (f64, f64) {
            if r <= r_star {
                return (0.0, 0.0);
            }
            let rule = Rule1::composite_gl(0.0, (r - r_star).sqrt(), 16, 8);
            let angle = rule.integrate(|u| 2.0 * u * dtheta(r_star + u * u));
            (angle, dtheta(r))
        };
        Self::radial_curve("exponential_spiral", Arc::new(theta))
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn codim(&self) -> usize {
        self.codim
    }

    /// Dimension of W.
    pub fn dim(&self) -> usize {
        self.ambient_dim - self.codim
    }

    pub fn defining_map(&self, y: &DVector<f64>) -> DVector<f64> {
        (self.map)(y)
    }

    pub fn defining_jacobian(&self, y: &DVector<f64>) -> DMatrix<f64> {
        (self.jacobian)(y)
    }

    /// ν(y), or `None` on the measure-zero set where no framing is defined.
    pub fn framing(&self, y: &DVector<f64>) -> Option<DMatrix<f64>> {
        (self.framing)(y)
    }

    pub fn fiber_rule(&self) -> Option<&Arc<dyn FiberRule>> {
        self.fiber.as_ref()
    }
}

fn require_radius(radius: f64) -> Result<()> {
    if radius > 0.0 && radius.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("radius must be positive, got {radius}")))
    }
}

fn radial_framing(y: &DVector<f64>) -> Option<DMatrix<f64>> {
    let n = y.norm();
    if n > 0.0 {
        Some(DMatrix::from_column_slice(y.len(), 1, (y / n).as_slice()))
    } else {
        None
    }
}

fn in_shell(r: f64, r0: f64, r1: f64) -> bool {
    r0 <= r && r < r1
}

struct PointFiber(DVector<f64>);

impl FiberRule for PointFiber {
    fn shell(&self, r0: f64, r1: f64, _resolution: usize) -> Vec<FiberNode> {
        if in_shell(self.0.norm(), r0, r1) {
            vec![FiberNode {
                y: self.0.clone(),
                weight: 1.0,
            }]
        } else {
            Vec::new()
        }
    }

    fn bounded_radius(&self) -> Option<f64> {
        Some(self.0.norm())
    }
}

struct SphereFiber {
    radius: f64,
    dim: usize,
}

impl FiberRule for SphereFiber {
    fn shell(&self, r0: f64, r1: f64, resolution: usize) -> Vec<FiberNode> {
        if !in_shell(self.radius, r0, r1) {
            return Vec::new();
        }
        let r = self.radius;
        let res = resolution.max(4);
        match self.dim {
            1 => {
                let rule = Rule1::periodic(4 * res, 0.0);
                rule.nodes
                    .iter()
                    .zip(&rule.weights)
                    .map(|(&t, &w)| FiberNode {
                        y: DVector::from_vec(vec![r * t.cos(), r * t.sin()]),
                        weight: w * r,
                    })
                    .collect()
            }
            _ => {
                let (zs, wz) = gauss_legendre(res);
                let phi = Rule1::periodic(2 * res, 0.0);
                let mut out = Vec::with_capacity(zs.len() * phi.len());
                for (&z, &wzi) in zs.iter().zip(&wz) {
                    let s = (1.0 - z * z).sqrt();
                    for (&p, &wp) in phi.nodes.iter().zip(&phi.weights) {
                        out.push(FiberNode {
                            y: DVector::from_vec(vec![r * s * p.cos(), r * s * p.sin(), r * z]),
                            weight: wzi * wp * r * r,
                        });
                    }
                }
                out
            }
        }
    }

    fn bounded_radius(&self) -> Option<f64> {
        Some(self.radius)
    }
}

struct LinearFiber {
    /// Orthonormal basis, k × j.
    basis: DMatrix<f64>,
}

impl FiberRule for LinearFiber {
    fn shell(&self, r0: f64, r1: f64, resolution: usize) -> Vec<FiberNode> {
        let res = resolution.max(2);
        let radial = Rule1::composite_gl(r0, r1, 1, res);
        let mut out = Vec::new();
        match self.basis.ncols() {
            1 => {
                let u = self.basis.column(0).into_owned();
                for (&t, &w) in radial.nodes.iter().zip(&radial.weights) {
                    for sign in [1.0, -1.0] {
                        out.push(FiberNode {
                            y: &u * (sign * t),
                            weight: w,
                        });
                    }
                }
            }
            _ => {
                let u = self.basis.column(0).into_owned();
                let v = self.basis.column(1).into_owned();
                let ang = Rule1::periodic(4 * res, 0.0);
                for (&t, &w) in radial.nodes.iter().zip(&radial.weights) {
                    for (&a, &wa) in ang.nodes.iter().zip(&ang.weights) {
                        out.push(FiberNode {
                            y: (&u * a.cos() + &v * a.sin()) * t,
                            weight: w * wa * t,
                        });
                    }
                }
            }
        }
        out
    }

    fn bounded_radius(&self) -> Option<f64> {
        None
    }
}

struct HalfLineFiber;

impl FiberRule for HalfLineFiber {
    fn shell(&self, r0: f64, r1: f64, resolution: usize) -> Vec<FiberNode> {
        let rule = Rule1::composite_gl(r0, r1, 1, resolution.max(2));
        rule.nodes
            .iter()
            .zip(&rule.weights)
            .map(|(&t, &w)| FiberNode {
                y: DVector::from_element(1, t),
                weight: w,
            })
            .collect()
    }

    fn bounded_radius(&self) -> Option<f64> {
        None
    }
}

struct RadialCurveFiber {
    theta: Arc<dyn Fn(f64) -> (f64, f64) + Send + Sync>,
}

impl FiberRule for RadialCurveFiber {
    fn shell(&self, r0: f64, r1: f64, resolution: usize) -> Vec<FiberNode> {
        let cells = ((r1 - r0) * 8.0).ceil().max(1.0) as usize;
        let rule = Rule1::composite_gl(r0, r1, cells, resolution.max(2));
        rule.nodes
            .iter()
            .zip(&rule.weights)
            .map(|(&r, &w)| {
                let (t, dt) = (self.theta)(r);
                FiberNode {
                    y: DVector::from_vec(vec![r * t.cos(), r * t.sin()]),
                    weight: w * (1.0 + r * r * dt * dt).sqrt(),
                }
            })
            .collect()
    }

    fn bounded_radius(&self) -> Option<f64> {
        None
    }
}
