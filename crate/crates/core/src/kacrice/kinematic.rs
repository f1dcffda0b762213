//! Right-hand side of the kinematic formula for curves on S² = SO(3)/SO(2).

use std::f64::consts::PI;

use nalgebra::Vector3;

use crate::curves::SphereCurve;
use crate::estimate::Estimate;
use crate::geomcore::{principal_angle, Subspace};
use crate::grf::Domain;
use crate::quadrature::Rule1;
use crate::{par, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KinematicOptions {
    /// Trapezoid nodes along each curve.
    pub curve_nodes: usize,
    /// Nodes for the average over the isotropy group SO(2).
    pub angle_nodes: usize,
}

impl Default for KinematicOptions {
    fn default() -> Self {
        KinematicOptions {
            curve_nodes: 96,
            angle_nodes: 64,
        }
    }
}

/// Normal line of the curve at t, pulled back to the tangent plane at the
/// north pole, with the arc-length element |γ′(t)|.
fn pulled_back_normal(c: &SphereCurve, t: f64) -> Result<(Vector3<f64>, f64)> {
    let x = c.point(t);
    let v = c.velocity(t);
    let speed = v.norm();
    if !(speed > 1e-12) {
        return Err(Error::domain("curve parametrisation has vanishing speed"));
    }
    let n = x.cross(&(v / speed));
    let frame = Domain::Sphere.tangent_frame(x.as_slice());
    let f1 = Vector3::new(frame[(0, 0)], frame[(1, 0)], frame[(2, 0)]);
    let f2 = Vector3::new(frame[(0, 1)], frame[(1, 1)], frame[(2, 1)]);
    Ok((Vector3::new(f1.dot(&n), f2.dot(&n), 0.0), speed))
}

fn line(v: &Vector3<f64>) -> Result<Subspace> {
    Subspace::from_vectors(3, &[vec![v.x, v.y, v.z]])
}

fn double_integral(c1: &SphereCurve, c2: &SphereCurve, n: usize, n_phi: usize) -> Result<f64> {
    let rule = Rule1::periodic(n, 0.0);
    let sample = |c: &SphereCurve| -> Result<Vec<(Vector3<f64>, f64)>> {
        rule.nodes
            .iter()
            .zip(&rule.weights)
            .map(|(&t, &w)| pulled_back_normal(c, t).map(|(v, s)| (v, s * w)))
            .collect()
    };
    let a = sample(c1)?;
    let b = sample(c2)?;
    // Half-step offset keeps the nodes off the rotation that aligns the
    // two lines exactly, where the angle jumps from 0 to 1.
    let phis = Rule1::periodic(n_phi, PI / n_phi as f64);
    let rows = par::map_indexed(a.len(), |i| -> Result<f64> {
        let (va, wa) = &a[i];
        let la = line(va)?;
        let mut row = 0.0;
        for (vb, wb) in &b {
            let mut avg = 0.0;
            for &phi in &phis.nodes {
                let (s, c) = phi.sin_cos();
                let rotated = Vector3::new(c * vb.x - s * vb.y, s * vb.x + c * vb.y, 0.0);
                avg += principal_angle(&la, &line(&rotated)?)?;
            }
            row += wb * avg / n_phi as f64;
        }
        Ok(wa * row)
    });
    let mut total = 0.0;
    for r in rows {
        total += r?;
    }
    Ok(total / (4.0 * PI))
}

/// ∫_{M}∫_{W} σ̄(T_xM⊥, T_yW⊥) dM dW, normalised so that it equals the mean
/// number of intersections of g·M with W for Haar-random g.
///
/// The error estimate is the change when all node counts are halved.
pub fn kinematic_rhs_sphere(
    c1: &SphereCurve,
    c2: &SphereCurve,
    opts: &KinematicOptions,
) -> Result<Estimate> {
    let n = opts.curve_nodes.max(4);
    let n_phi = opts.angle_nodes.max(4);
    let fine = double_integral(c1, c2, n, n_phi)?;
    let coarse = double_integral(c1, c2, n / 2, n_phi / 2)?;
    Ok(Estimate::new(
        fine,
        (fine - coarse).abs(),
        (n * n * n_phi) as u64,
        0,
        "kinematic_rhs",
    ))
}
