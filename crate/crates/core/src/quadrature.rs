//! Gauss–Legendre rules and composite helpers.

use std::f64::consts::PI;

/// Gauss–Legendre nodes and weights on [-1, 1] (Newton iteration on P_n).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // p1 = P_n(z), p0 = P_{n-1}(z) after the recurrence
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// A 1-d quadrature rule: nodes with weights.
#[derive(Debug, Clone)]
pub struct Rule1 {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule1 {
    /// Composite Gauss–Legendre on [a, b] with `cells` equal cells of `order` points.
    pub fn composite_gl(a: f64, b: f64, cells: usize, order: usize) -> Self {
        let (gx, gw) = gauss_legendre(order);
        let h = (b - a) / cells as f64;
        let mut nodes = Vec::with_capacity(cells * order);
        let mut weights = Vec::with_capacity(cells * order);
        for c in 0..cells {
            let lo = a + c as f64 * h;
            for (x, w) in gx.iter().zip(&gw) {
                nodes.push(lo + 0.5 * h * (x + 1.0));
                weights.push(0.5 * h * w);
            }
        }
        Rule1 { nodes, weights }
    }

    /// Trapezoid rule for a 2π-periodic integrand on [offset, offset + 2π).
    pub fn periodic(n: usize, offset: f64) -> Self {
        let h = 2.0 * PI / n as f64;
        Rule1 {
            nodes: (0..n).map(|i| offset + i as f64 * h).collect(),
            weights: vec![h; n],
        }
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Integrates `f` over [a, b] splitting at the sorted `breaks` that fall inside.
pub fn integrate_piecewise(
    a: f64,
    b: f64,
    breaks: &[f64],
    cells: usize,
    order: usize,
    f: impl Fn(f64) -> f64,
) -> f64 {
    let mut pts = vec![a];
    pts.extend(breaks.iter().cloned().filter(|&t| t > a && t < b));
    pts.push(b);
    pts.sort_by(|x, y| x.total_cmp(y));
    pts.dedup_by(|x, y| (*x - *y).abs() <= 1e-15 * (1.0 + x.abs()));
    pts.windows(2)
        .map(|w| Rule1::composite_gl(w[0], w[1], cells, order).integrate(&f))
        .sum()
}
