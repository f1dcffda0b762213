//! Deterministic numeric checks of the area and coarea formulas.
//!
//! Both sides of each formula are computed by unrelated routes: the left side
//! integrates the Jacobian over the domain, the right side integrates over the
//! target by locating preimages (1-d) or marching level sets (2-d).

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quadrature::{integrate_piecewise, Rule1};

/// Uniform grid used to bracket critical points and preimages.
pub const AREA_GRID_CELLS: usize = 4096;
const BISECTION_TOL: f64 = 1e-12;
const GL_ORDER: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AreaCheck {
    /// ∫ g |f′|
    pub lhs: f64,
    /// ∫ Σ_{p ∈ f⁻¹(q)} g(p) dq
    pub rhs: f64,
}

fn finite(x: f64, what: &str) -> Result<f64> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(Error::Numeric(format!("non-finite {what} sample")))
    }
}

/// Root of `h` in [a, b] given a sign change, to `BISECTION_TOL`.
fn bisect(h: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let mut ha = h(a);
    if ha == 0.0 {
        return a;
    }
    while b - a > BISECTION_TOL {
        let mid = 0.5 * (a + b);
        let hm = h(mid);
        if hm == 0.0 {
            return mid;
        }
        if (hm > 0.0) == (ha > 0.0) {
            a = mid;
            ha = hm;
        } else {
            b = mid;
        }
    }
    0.5 * (a + b)
}

/// Area formula on an interval: returns both sides for comparison.
///
/// `f` must be C¹ on `[a, b]` with finitely many critical points; `df` is its
/// derivative. Critical points are bracketed on a grid of
/// [`AREA_GRID_CELLS`] cells and bisected, which splits `[a, b]` into monotone
/// pieces; each preimage of `q` is then the unique bisection root on a piece.
pub fn area_formula_check(
    f: impl Fn(f64) -> f64,
    df: impl Fn(f64) -> f64,
    g: impl Fn(f64) -> f64,
    interval: (f64, f64),
) -> Result<AreaCheck> {
    let (a, b) = interval;
    if !(b > a) {
        return Err(Error::Domain("empty interval".into()));
    }
    let h = (b - a) / AREA_GRID_CELLS as f64;
    let xs: Vec<f64> = (0..=AREA_GRID_CELLS).map(|i| a + i as f64 * h).collect();
    let dfs: Vec<f64> = xs.iter().map(|&x| finite(df(x), "derivative")).collect::<Result<_>>()?;
    for &x in &xs {
        finite(f(x), "function")?;
        finite(g(x), "weight")?;
    }

    let mut breaks = vec![a];
    for i in 0..AREA_GRID_CELLS {
        if dfs[i] == 0.0 && i > 0 {
            breaks.push(xs[i]);
        } else if dfs[i] * dfs[i + 1] < 0.0 {
            breaks.push(bisect(&df, xs[i], xs[i + 1]));
        }
    }
    breaks.push(b);
    breaks.dedup_by(|x, y| (*x - *y).abs() < BISECTION_TOL);

    let lhs: f64 = breaks
        .windows(2)
        .map(|w| Rule1::composite_gl(w[0], w[1], 4, GL_ORDER).integrate(|x| g(x) * df(x).abs()))
        .sum();

    // monotone pieces with their end values
    let pieces: Vec<(f64, f64, f64, f64)> = breaks
        .windows(2)
        .map(|w| (w[0], w[1], f(w[0]), f(w[1])))
        .collect();
    let mut qbreaks: Vec<f64> = pieces.iter().flat_map(|p| [p.2, p.3]).collect();
    qbreaks.sort_by(|x, y| x.total_cmp(y));
    let (qmin, qmax) = (qbreaks[0], *qbreaks.last().unwrap());
    let preimage_sum = |q: f64| -> f64 {
        pieces
            .iter()
            .filter(|p| q > p.2.min(p.3) && q < p.2.max(p.3))
            .map(|p| g(bisect(&|x| f(x) - q, p.0, p.1)))
            .sum()
    };
    let rhs = if qmax > qmin {
        integrate_piecewise(qmin, qmax, &qbreaks, 4, GL_ORDER, preimage_sum)
    } else {
        0.0
    };
    Ok(AreaCheck {
        lhs: finite(lhs, "lhs")?,
        rhs: finite(rhs, "rhs")?,
    })
}

/// A parametrized piece of a region boundary.
type BoundaryCurve = Box<dyn Fn(f64) -> (f64, f64)>;

/// Planar regions supported by the coarea check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Region2 {
    Rect { x0: f64, x1: f64, y0: f64, y1: f64 },
    /// Centered at the origin.
    Annulus { r0: f64, r1: f64 },
}

impl Region2 {
    fn contains(&self, x: f64, y: f64) -> bool {
        match *self {
            Region2::Rect { x0, x1, y0, y1 } => x >= x0 && x <= x1 && y >= y0 && y <= y1,
            Region2::Annulus { r0, r1 } => {
                let r = x.hypot(y);
                r >= r0 && r <= r1
            }
        }
    }

    fn bounding_box(&self) -> (f64, f64, f64, f64) {
        match *self {
            Region2::Rect { x0, x1, y0, y1 } => (x0, x1, y0, y1),
            Region2::Annulus { r1, .. } => (-r1, r1, -r1, r1),
        }
    }

    /// Boundary as closed or open parametrized curves on [0, 1].
    fn boundary(&self) -> Vec<BoundaryCurve> {
        match *self {
            Region2::Rect { x0, x1, y0, y1 } => vec![
                Box::new(move |t| (x0 + t * (x1 - x0), y0)),
                Box::new(move |t| (x1, y0 + t * (y1 - y0))),
                Box::new(move |t| (x1 - t * (x1 - x0), y1)),
                Box::new(move |t| (x0, y1 - t * (y1 - y0))),
            ],
            Region2::Annulus { r0, r1 } => vec![
                Box::new(move |t| (r0 * (2.0 * PI * t).cos(), r0 * (2.0 * PI * t).sin())),
                Box::new(move |t| (r1 * (2.0 * PI * t).cos(), r1 * (2.0 * PI * t).sin())),
            ],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoareaOptions {
    /// Composite Gauss–Legendre cells per axis for the left side.
    pub lhs_cells: usize,
    /// Marching-squares cells per axis for each level set.
    pub march_cells: usize,
    /// Gauss–Legendre points per monotone range of level values.
    pub level_nodes: usize,
}

impl Default for CoareaOptions {
    fn default() -> Self {
        CoareaOptions {
            lhs_cells: 8,
            march_cells: 512,
            level_nodes: 24,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoareaCheck {
    /// ∫ g · Jf over the region
    pub lhs: f64,
    /// ∫ (∫_{f⁻¹(q)} g) dq
    pub rhs: f64,
    /// Jf vanished on more than 1% of the quadrature nodes.
    pub degenerate_jacobian: bool,
}

/// Coarea formula for f: ℝ² → ℝ on a rectangle or annulus.
///
/// The right side marches each level set through a square grid, locating edge
/// crossings by bisection and measuring each cell segment as the circular arc
/// matching the end tangents (fourth-order accurate in the cell size).
pub fn coarea_formula_check(
    f: impl Fn(f64, f64) -> f64 + Sync,
    grad: impl Fn(f64, f64) -> (f64, f64) + Sync,
    g: impl Fn(f64, f64) -> f64 + Sync,
    region: Region2,
    opts: CoareaOptions,
) -> Result<CoareaCheck> {
    let jf = |x: f64, y: f64| {
        let (gx, gy) = grad(x, y);
        gx.hypot(gy)
    };

    // left side
    let mut small = 0usize;
    let mut total = 0usize;
    let mut lhs = 0.0;
    match region {
        Region2::Rect { x0, x1, y0, y1 } => {
            let rx = Rule1::composite_gl(x0, x1, opts.lhs_cells, GL_ORDER);
            let ry = Rule1::composite_gl(y0, y1, opts.lhs_cells, GL_ORDER);
            for (&x, &wx) in rx.nodes.iter().zip(&rx.weights) {
                for (&y, &wy) in ry.nodes.iter().zip(&ry.weights) {
                    let j = finite(jf(x, y), "jacobian")?;
                    small += (j < 1e-12) as usize;
                    total += 1;
                    lhs += wx * wy * finite(g(x, y), "weight")? * j;
                }
            }
        }
        Region2::Annulus { r0, r1 } => {
            let rr = Rule1::composite_gl(r0, r1, opts.lhs_cells, GL_ORDER);
            let rt = Rule1::periodic(opts.lhs_cells * GL_ORDER * 4, 0.0);
            for (&r, &wr) in rr.nodes.iter().zip(&rr.weights) {
                for (&t, &wt) in rt.nodes.iter().zip(&rt.weights) {
                    let (x, y) = (r * t.cos(), r * t.sin());
                    let j = finite(jf(x, y), "jacobian")?;
                    small += (j < 1e-12) as usize;
                    total += 1;
                    lhs += wr * wt * r * finite(g(x, y), "weight")? * j;
                }
            }
        }
    }
    let degenerate_jacobian = small as f64 > 0.01 * total as f64;

    // level values where the level-set length may fail to be smooth: extrema of
    // f along the boundary (the map is a submersion inside)
    let mut qbreaks = Vec::new();
    for curve in region.boundary() {
        let n = AREA_GRID_CELLS;
        let vals: Vec<f64> = (0..=n)
            .map(|i| {
                let (x, y) = curve(i as f64 / n as f64);
                f(x, y)
            })
            .collect();
        qbreaks.push(vals[0]);
        qbreaks.push(vals[n]);
        for i in 1..n {
            let is_max = vals[i] > vals[i - 1] && vals[i] >= vals[i + 1];
            let is_min = vals[i] < vals[i - 1] && vals[i] <= vals[i + 1];
            if is_max || is_min {
                let sign = if is_max { -1.0 } else { 1.0 };
                let t = golden_min(
                    |t| {
                        let (x, y) = curve(t);
                        sign * f(x, y)
                    },
                    (i - 1) as f64 / n as f64,
                    (i + 1) as f64 / n as f64,
                );
                let (x, y) = curve(t);
                qbreaks.push(f(x, y));
            }
        }
    }
    qbreaks.iter().try_for_each(|&q| finite(q, "level").map(|_| ()))?;
    qbreaks.sort_by(|x, y| x.total_cmp(y));
    let (qmin, qmax) = (qbreaks[0], *qbreaks.last().unwrap());

    let march = LevelMarcher::new(&f, &grad, region, opts.march_cells);
    let mut rhs = 0.0;
    let mut pts = qbreaks.clone();
    pts.dedup_by(|x, y| (*x - *y).abs() <= 1e-12 * (1.0 + x.abs()));
    for w in pts.windows(2) {
        let rule = Rule1::composite_gl(w[0], w[1], 1, opts.level_nodes);
        let vals = crate::par::map_indexed(rule.len(), |i| march.level_integral(rule.nodes[i], &g));
        rhs += vals.iter().zip(&rule.weights).map(|(v, w)| v * w).sum::<f64>();
    }
    if qmax <= qmin {
        rhs = 0.0;
    }
    Ok(CoareaCheck {
        lhs: finite(lhs, "lhs")?,
        rhs: finite(rhs, "rhs")?,
        degenerate_jacobian,
    })
}

fn golden_min(h: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    while b - a > 1e-13 {
        if h(c) < h(d) {
            b = d;
        } else {
            a = c;
        }
        c = b - r * (b - a);
        d = a + r * (b - a);
    }
    0.5 * (a + b)
}

struct LevelMarcher<'a, F, G> {
    f: &'a F,
    grad: &'a G,
    region: Region2,
    n: usize,
    x0: f64,
    y0: f64,
    hx: f64,
    hy: f64,
    values: Vec<f64>,
}

impl<'a, F, G> LevelMarcher<'a, F, G>
where
    F: Fn(f64, f64) -> f64 + Sync,
    G: Fn(f64, f64) -> (f64, f64) + Sync,
{
    fn new(f: &'a F, grad: &'a G, region: Region2, n: usize) -> Self {
        let (x0, x1, y0, y1) = region.bounding_box();
        let hx = (x1 - x0) / n as f64;
        let hy = (y1 - y0) / n as f64;
        let mut values = Vec::with_capacity((n + 1) * (n + 1));
        for j in 0..=n {
            for i in 0..=n {
                values.push(f(x0 + i as f64 * hx, y0 + j as f64 * hy));
            }
        }
        LevelMarcher {
            f,
            grad,
            region,
            n,
            x0,
            y0,
            hx,
            hy,
            values,
        }
    }

    fn node(&self, i: usize, j: usize) -> (f64, f64) {
        (self.x0 + i as f64 * self.hx, self.y0 + j as f64 * self.hy)
    }

    fn crossing(&self, q: f64, p: (f64, f64), r: (f64, f64)) -> (f64, f64) {
        let h = |t: f64| (self.f)(p.0 + t * (r.0 - p.0), p.1 + t * (r.1 - p.1)) - q;
        let t = bisect(&h, 0.0, 1.0);
        (p.0 + t * (r.0 - p.0), p.1 + t * (r.1 - p.1))
    }

    /// Arc length of the level curve between two of its points, from the chord
    /// and the turning angle of the unit tangents.
    fn segment(&self, a: (f64, f64), b: (f64, f64), g: &dyn Fn(f64, f64) -> f64) -> f64 {
        let c = (b.0 - a.0, b.1 - a.1);
        let chord = c.0.hypot(c.1);
        if chord == 0.0 {
            return 0.0;
        }
        let tangent = |p: (f64, f64)| {
            let (gx, gy) = (self.grad)(p.0, p.1);
            let t = (-gy, gx);
            if t.0 * c.0 + t.1 * c.1 < 0.0 {
                (gy, -gx)
            } else {
                t
            }
        };
        let (ta, tb) = (tangent(a), tangent(b));
        let turn = (ta.0 * tb.1 - ta.1 * tb.0).atan2(ta.0 * tb.0 + ta.1 * tb.1).abs();
        let half = 0.5 * turn;
        let len = if half < 1e-8 { chord * (1.0 + half * half / 6.0) } else { chord * half / half.sin() };
        let mid = (0.5 * (a.0 + b.0), 0.5 * (a.1 + b.1));
        if !self.region.contains(mid.0, mid.1) {
            return 0.0;
        }
        len * (g(a.0, a.1) + 4.0 * g(mid.0, mid.1) + g(b.0, b.1)) / 6.0
    }

    fn level_integral(&self, q: f64, g: &(dyn Fn(f64, f64) -> f64 + Sync)) -> f64 {
        let n = self.n;
        let v = |i: usize, j: usize| self.values[j * (n + 1) + i] - q;
        let mut total = 0.0;
        for j in 0..n {
            for i in 0..n {
                // corners: a=(i,j) b=(i+1,j) c=(i+1,j+1) d=(i,j+1)
                let (va, vb, vc, vd) = (v(i, j), v(i + 1, j), v(i + 1, j + 1), v(i, j + 1));
                let s = [va >= 0.0, vb >= 0.0, vc >= 0.0, vd >= 0.0];
                if s.iter().all(|&x| x) || s.iter().all(|&x| !x) {
                    continue;
                }
                let (pa, pb, pc, pd) = (self.node(i, j), self.node(i + 1, j), self.node(i + 1, j + 1), self.node(i, j + 1));
                // edges: 0 bottom a-b, 1 right b-c, 2 top c-d, 3 left d-a
                let ends = [(pa, pb, 0, 1), (pb, pc, 1, 2), (pc, pd, 2, 3), (pd, pa, 3, 0)];
                let mut cross: [Option<(f64, f64)>; 4] = [None; 4];
                for (e, &(p, r, si, sj)) in ends.iter().enumerate() {
                    if s[si] != s[sj] {
                        cross[e] = Some(self.crossing(q, p, r));
                    }
                }
                let hits: Vec<usize> = (0..4).filter(|&e| cross[e].is_some()).collect();
                let pairs: Vec<(usize, usize)> = if hits.len() == 2 {
                    vec![(hits[0], hits[1])]
                } else {
                    let centre = (self.f)(0.5 * (pa.0 + pc.0), 0.5 * (pa.1 + pc.1)) - q;
                    if (centre >= 0.0) == s[0] {
                        vec![(0, 1), (2, 3)]
                    } else {
                        vec![(3, 0), (1, 2)]
                    }
                };
                for (e1, e2) in pairs {
                    total += self.segment(cross[e1].unwrap(), cross[e2].unwrap(), g);
                }
            }
        }
        total
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn area_linear_map() {
        let r = area_formula_check(|x| 2.0 * x, |_| 2.0, |_| 1.0, (0.0, 1.0)).unwrap();
        assert!((r.lhs - 2.0).abs() < 1e-12);
        assert!((r.rhs - 2.0).abs() < 1e-12);
    }

    #[test]
    fn area_square_map_folds() {
        let r = area_formula_check(|x| x * x, |x| 2.0 * x, |_| 1.0, (-1.0, 1.0)).unwrap();
        assert!((r.lhs - 2.0).abs() < 1e-10, "{r:?}");
        assert!((r.rhs - 2.0).abs() < 1e-10, "{r:?}");
    }

    #[test]
    fn area_weighted_fold() {
        // g(x) = e^x on f = x²: lhs = ∫ e^x 2|x| dx over [-1,1] = 2(1 - 2/e) + 2
        let r = area_formula_check(|x| x * x, |x| 2.0 * x, f64::exp, (-1.0, 1.0)).unwrap();
        let exact = 2.0 * (1.0 - 2.0 / std::f64::consts::E) + 2.0;
        assert!((r.lhs - exact).abs() < 1e-10);
        assert!((r.rhs - exact).abs() < 1e-8, "{r:?}");
    }

    #[test]
    fn area_non_finite_is_error() {
        let r = area_formula_check(|x| 1.0 / x, |x| -1.0 / (x * x), |_| 1.0, (0.0, 1.0));
        assert!(matches!(r, Err(Error::Numeric(_))));
    }

    #[test]
    fn coarea_projection() {
        let r = coarea_formula_check(
            |x, _| x,
            |_, _| (1.0, 0.0),
            |_, _| 1.0,
            Region2::Rect { x0: 0.0, x1: 1.0, y0: 0.0, y1: 1.0 },
            CoareaOptions::default(),
        )
        .unwrap();
        assert!((r.lhs - 1.0).abs() < 1e-12);
        assert!((r.rhs - 1.0).abs() < 1e-9, "{r:?}");
        assert!(!r.degenerate_jacobian);
    }

    #[test]
    fn coarea_flags_vanishing_jacobian() {
        let r = coarea_formula_check(
            |x, _| if x < 0.5 { 0.0 } else { (x - 0.5).powi(2) },
            |x, _| (if x < 0.5 { 0.0 } else { 2.0 * (x - 0.5) }, 0.0),
            |_, _| 1.0,
            Region2::Rect { x0: 0.0, x1: 1.0, y0: 0.0, y1: 1.0 },
            CoareaOptions { march_cells: 64, ..Default::default() },
        )
        .unwrap();
        assert!(r.degenerate_jacobian);
    }

    #[test]
    fn area_sine_three_periods() {
        let tau = std::f64::consts::TAU;
        let r = area_formula_check(|x| (3.0 * x).sin(), |x| 3.0 * (3.0 * x).cos(), |_| 1.0, (0.0, tau)).unwrap();
        assert!((r.lhs - 12.0).abs() < 1e-9, "{r:?}");
        assert!((r.rhs - 12.0).abs() < 1e-6, "{r:?}");
    }

    #[test]
    fn coarea_diagonal_levels() {
        // |∇f| = √2 everywhere; level q has length √2·min(q, 2 − q).
        let r = coarea_formula_check(
            |x, y| x + y,
            |_, _| (1.0, 1.0),
            |_, _| 1.0,
            Region2::Rect { x0: 0.0, x1: 1.0, y0: 0.0, y1: 1.0 },
            CoareaOptions::default(),
        )
        .unwrap();
        let exact = 2f64.sqrt();
        assert!((r.lhs - exact).abs() < 1e-12);
        assert!((r.rhs - exact).abs() < 1e-6, "{r:?}");
    }

    #[test]
    fn coarea_annulus_radial() {
        // ∫ 2r · r dr dθ over 1 ≤ r ≤ 2 = 28π/3.
        let r = coarea_formula_check(
            |x, y| x * x + y * y,
            |x, y| (2.0 * x, 2.0 * y),
            |_, _| 1.0,
            Region2::Annulus { r0: 1.0, r1: 2.0 },
            CoareaOptions::default(),
        )
        .unwrap();
        let exact = 28.0 * std::f64::consts::PI / 3.0;
        assert!((r.lhs - exact).abs() < 1e-9, "{r:?}");
        assert!((r.rhs - exact).abs() < 1e-6, "{r:?}");
    }
}
