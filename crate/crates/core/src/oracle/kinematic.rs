//! Mean number of intersections of a Haar-randomly rotated curve with a
//! fixed curve on S², by direct polyline intersection.

use std::collections::HashMap;

use nalgebra::Vector3;

use crate::curves::{haar_rotation, SphereCurve};
use crate::estimate::{Estimate, Moments};
use crate::rng::stream_rng;
use crate::{par, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KinematicMcOptions {
    /// Longest chord of the polylines.
    pub max_segment: f64,
    /// Edge length of the spatial hash cells.
    pub cell: f64,
    /// Crossings with sin(angle) below this are treated as tangential.
    pub tangency_tol: f64,
    /// Redraws allowed per rotation before giving up.
    pub max_redraws: usize,
}

impl Default for KinematicMcOptions {
    fn default() -> Self {
        KinematicMcOptions {
            max_segment: 1e-3,
            cell: 0.01,
            tangency_tol: 1e-9,
            max_redraws: 100,
        }
    }
}

type Cell = (i32, i32, i32);

/// Arcs of a closed polyline indexed by the hash cells their bounding
/// boxes touch.
struct ArcIndex {
    cells: HashMap<Cell, Vec<u32>>,
}

/// Slack added to chord bounding boxes, covering the bulge of the arc.
const BOX_SLACK: f64 = 1e-6;

fn cells_of(a: &Vector3<f64>, b: &Vector3<f64>, h: f64) -> impl Iterator<Item = Cell> {
    let lo = a.inf(b).add_scalar(-BOX_SLACK) / h;
    let hi = a.sup(b).add_scalar(BOX_SLACK) / h;
    let (x0, y0, z0) = (lo.x.floor() as i32, lo.y.floor() as i32, lo.z.floor() as i32);
    let (x1, y1, z1) = (hi.x.floor() as i32, hi.y.floor() as i32, hi.z.floor() as i32);
    (x0..=x1).flat_map(move |x| (y0..=y1).flat_map(move |y| (z0..=z1).map(move |z| (x, y, z))))
}

impl ArcIndex {
    fn new(pts: &[Vector3<f64>], h: f64) -> Self {
        let mut cells: HashMap<Cell, Vec<u32>> = HashMap::new();
        let n = pts.len();
        for i in 0..n {
            for c in cells_of(&pts[i], &pts[(i + 1) % n], h) {
                cells.entry(c).or_default().push(i as u32);
            }
        }
        ArcIndex { cells }
    }
}

enum Crossing {
    No,
    Yes,
    /// Tangential or numerically ambiguous; the rotation is redrawn.
    Degenerate,
}

/// Whether the short great-circle arcs [a0, a1) and [b0, b1) cross.
fn arcs_cross(a0: &Vector3<f64>, a1: &Vector3<f64>, b0: &Vector3<f64>, b1: &Vector3<f64>, tangency: f64) -> Crossing {
    let na = a0.cross(a1);
    let nb = b0.cross(b1);
    let d = na.cross(&nb);
    let scale = na.norm() * nb.norm();
    let dn = d.norm();
    if dn <= tangency * scale {
        // Same great circle, or nearly: only a problem when the arcs overlap.
        let close = (a0 - b0).norm().min((a0 - b1).norm()).min((a1 - b0).norm()).min((a1 - b1).norm());
        let span = (a1 - a0).norm() + (b1 - b0).norm();
        return if close <= span { Crossing::Degenerate } else { Crossing::No };
    }
    let mut x = d / dn;
    if x.dot(&(a0 + a1)) < 0.0 {
        x = -x;
    }
    if x.dot(&(b0 + b1)) <= 0.0 {
        return Crossing::No;
    }
    let eps = 1e-15;
    let sa0 = a0.cross(&x).dot(&na) / na.norm_squared();
    let sa1 = x.cross(a1).dot(&na) / na.norm_squared();
    let sb0 = b0.cross(&x).dot(&nb) / nb.norm_squared();
    let sb1 = x.cross(b1).dot(&nb) / nb.norm_squared();
    if [sa0, sa1, sb0, sb1].iter().any(|s| s.abs() < eps) {
        return Crossing::Degenerate;
    }
    if sa0 > 0.0 && sa1 > 0.0 && sb0 > 0.0 && sb1 > 0.0 {
        Crossing::Yes
    } else {
        Crossing::No
    }
}

fn count_crossings(moving: &[Vector3<f64>], fixed: &[Vector3<f64>], index: &ArcIndex, opts: &KinematicMcOptions) -> Option<u64> {
    let n = moving.len();
    let m = fixed.len();
    let mut count = 0;
    let mut candidates: Vec<u32> = Vec::new();
    for i in 0..n {
        let (a0, a1) = (&moving[i], &moving[(i + 1) % n]);
        candidates.clear();
        for c in cells_of(a0, a1, opts.cell) {
            if let Some(list) = index.cells.get(&c) {
                candidates.extend_from_slice(list);
            }
        }
        candidates.sort_unstable();
        candidates.dedup();
        for &j in &candidates {
            let j = j as usize;
            match arcs_cross(a0, a1, &fixed[j], &fixed[(j + 1) % m], opts.tangency_tol) {
                Crossing::No => {}
                Crossing::Yes => count += 1,
                Crossing::Degenerate => return None,
            }
        }
    }
    Some(count)
}

/// Mean of #(g·C₁ ∩ C₂) over Haar-random rotations g (probability measure).
pub fn kinematic_mc(
    c1: &SphereCurve,
    c2: &SphereCurve,
    n_rotations: usize,
    seed: u64,
    opts: &KinematicMcOptions,
) -> Result<Estimate> {
    if !(opts.max_segment > 0.0 && opts.cell > 0.0) {
        return Err(Error::domain("segment length and cell size must be positive"));
    }
    let p1 = c1.polyline(opts.max_segment);
    let p2 = c2.polyline(opts.max_segment);
    let index = ArcIndex::new(&p2, opts.cell);
    let counts = par::map_indexed(n_rotations, |i| {
        let mut rng = stream_rng(seed, i as u64);
        for _ in 0..=opts.max_redraws {
            let g = haar_rotation(&mut rng);
            let moved: Vec<Vector3<f64>> = p1.iter().map(|p| g * p).collect();
            if let Some(c) = count_crossings(&moved, &p2, &index, opts) {
                return Ok(c);
            }
        }
        Err(Error::Numeric("every redrawn rotation gave a tangential crossing".into()))
    });
    let mut moments = Moments::default();
    for c in counts {
        moments.push(c? as f64);
    }
    Ok(Estimate::new(
        moments.mean(),
        moments.std_error(),
        moments.count(),
        seed,
        "kinematic_mc",
    ))
}
