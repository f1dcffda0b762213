//! Closed curves on S² and Haar-random rotations.

use nalgebra::{Quaternion, Rotation3, UnitQuaternion, Vector3};
use rand::Rng;

use crate::{Error, Result};

const MIN_SPEED: f64 = 1e-12;

/// A closed regular curve on the unit sphere, parametrised over [0, 2π).
#[derive(Debug, Clone, PartialEq)]
pub enum SphereCurve {
    /// Great circle cos t·u + sin t·v.
    GreatCircle { u: Vector3<f64>, v: Vector3<f64> },
    /// Circle at polar angle ρ from the north pole.
    Latitude { polar_radius: f64 },
}

impl SphereCurve {
    /// The great circle orthogonal to `normal`.
    pub fn great_circle(normal: [f64; 3]) -> Result<Self> {
        let n = Vector3::from(normal);
        let len = n.norm();
        if !(len > MIN_SPEED) || !len.is_finite() {
            return Err(Error::domain("great circle normal must be a non-zero vector"));
        }
        let n = n / len;
        let helper = if n.x.abs() < 0.9 {
            Vector3::x()
        } else {
            Vector3::y()
        };
        let u = (helper - n * helper.dot(&n)).normalize();
        let v = n.cross(&u);
        Ok(SphereCurve::GreatCircle { u, v })
    }

    pub fn latitude(polar_radius: f64) -> Result<Self> {
        if !(polar_radius.sin() > MIN_SPEED) || !(0.0..std::f64::consts::PI).contains(&polar_radius) {
            return Err(Error::domain(format!(
                "latitude circle needs polar radius in (0, π), got {polar_radius}"
            )));
        }
        Ok(SphereCurve::Latitude { polar_radius })
    }

    pub fn point(&self, t: f64) -> Vector3<f64> {
        match self {
            SphereCurve::GreatCircle { u, v } => u * t.cos() + v * t.sin(),
            SphereCurve::Latitude { polar_radius } => {
                let (s, c) = polar_radius.sin_cos();
                Vector3::new(s * t.cos(), s * t.sin(), c)
            }
        }
    }

    pub fn velocity(&self, t: f64) -> Vector3<f64> {
        match self {
            SphereCurve::GreatCircle { u, v } => -u * t.sin() + v * t.cos(),
            SphereCurve::Latitude { polar_radius } => {
                let s = polar_radius.sin();
                Vector3::new(-s * t.sin(), s * t.cos(), 0.0)
            }
        }
    }

    pub fn length(&self) -> f64 {
        match self {
            SphereCurve::GreatCircle { .. } => std::f64::consts::TAU,
            SphereCurve::Latitude { polar_radius } => std::f64::consts::TAU * polar_radius.sin(),
        }
    }

    /// Closed polyline (last vertex not repeated) with chords shorter than `max_segment`.
    pub fn polyline(&self, max_segment: f64) -> Vec<Vector3<f64>> {
        let n = ((self.length() / max_segment).ceil() as usize + 1).max(3);
        (0..n)
            .map(|i| self.point(std::f64::consts::TAU * i as f64 / n as f64))
            .collect()
    }
}

/// Haar-uniform rotation of ℝ³ from a uniform unit quaternion.
pub fn haar_rotation<R: Rng>(rng: &mut R) -> Rotation3<f64> {
    let u1: f64 = rng.random();
    let u2: f64 = rng.random();
    let u3: f64 = rng.random();
    let tau = std::f64::consts::TAU;
    let a = (1.0 - u1).sqrt();
    let b = u1.sqrt();
    let q = Quaternion::new(
        b * (tau * u3).cos(),
        a * (tau * u2).sin(),
        a * (tau * u2).cos(),
        b * (tau * u3).sin(),
    );
    UnitQuaternion::from_quaternion(q).to_rotation_matrix()
}
