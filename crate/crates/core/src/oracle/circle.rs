//! Zeros of a scalar function on S¹ by grid sign changes and bisection.

use std::f64::consts::TAU;

use super::{CountSample, ScalarField};
use crate::grf::Realization;

/// A root is non-transverse when |f′| there is below this fraction of the
/// largest |f′| seen on the grid.
const TRANSVERSALITY_TOL: f64 = 1e-9;

fn positive(v: f64) -> bool {
    // Exact zeros count as positive so each crossing is seen once.
    v >= 0.0
}

fn sign_change_intervals(f: &dyn Fn(f64) -> f64, n: usize) -> (Vec<(f64, f64, bool)>, Vec<f64>) {
    let h = TAU / n as f64;
    let vals: Vec<f64> = (0..n).map(|i| f(i as f64 * h)).collect();
    let mut out = Vec::new();
    for i in 0..n {
        let (a, b) = (vals[i], vals[(i + 1) % n]);
        if positive(a) != positive(b) {
            out.push((i as f64 * h, (i + 1) as f64 * h, positive(b)));
        }
    }
    (out, vals)
}

/// Zeros of a 2π-periodic function θ ↦ f(θ) given with its derivative.
///
/// Crossings are located on a grid of `grid_n` nodes and refined by
/// bisection to `tol`. The sample is unresolved if a grid of 2·`grid_n`
/// nodes sees a different number of sign changes, or if a root is not
/// transverse. `count` is the number of zeros and the signed sum is returned
/// alongside it.
pub fn count_zeros_periodic(
    f: &dyn Fn(f64) -> (f64, f64),
    grid_n: usize,
    tol: f64,
) -> (CountSample, i64) {
    let n = grid_n.max(4);
    let value = |t: f64| f(t).0;
    let (intervals, _) = sign_change_intervals(&value, n);
    let (fine, _) = sign_change_intervals(&value, 2 * n);
    let mut steps = 0u64;
    let mut roots = Vec::with_capacity(intervals.len());
    let mut signed = 0i64;
    let mut max_slope = 0.0f64;
    let h = TAU / n as f64;
    for i in 0..n {
        max_slope = max_slope.max(f(i as f64 * h).1.abs());
    }
    let mut transverse = true;
    for &(mut a, mut b, rising) in &intervals {
        let pos_a = !rising;
        while b - a > tol {
            let mid = 0.5 * (a + b);
            if positive(value(mid)) == pos_a {
                a = mid;
            } else {
                b = mid;
            }
            steps += 1;
        }
        let root = 0.5 * (a + b);
        let slope = f(root).1;
        if !(slope.abs() > TRANSVERSALITY_TOL * max_slope) {
            transverse = false;
        }
        signed += if rising { 1 } else { -1 };
        roots.push(root);
    }
    let min_separation = if roots.len() < 2 {
        f64::INFINITY
    } else {
        let mut m = TAU - (roots[roots.len() - 1] - roots[0]);
        for w in roots.windows(2) {
            m = m.min(w[1] - w[0]);
        }
        m
    };
    let sample = CountSample {
        count: roots.len() as i64,
        seed: 0,
        n_bisection_steps: steps,
        min_separation,
        unresolved: fine.len() != intervals.len() || !transverse,
    };
    (sample, signed)
}

fn on_circle<'a>(f: &'a dyn ScalarField) -> impl Fn(f64) -> (f64, f64) + 'a {
    move |t: f64| {
        let (s, c) = t.sin_cos();
        let (v, g) = f.value_grad(&[c, s]);
        (v, -s * g[0] + c * g[1])
    }
}

/// Number of zeros of a scalar realization on S¹.
pub fn count_zeros_circle(r: &Realization, grid_n: usize, tol: f64) -> CountSample {
    let f = on_circle(r.component(0));
    let (mut sample, _) = count_zeros_periodic(&f, grid_n, tol);
    sample.seed = r.seed();
    sample
}

/// Sum of crossing orientations (+1 rising, −1 falling) of a scalar
/// realization on S¹.
pub fn count_signed_zeros_circle(r: &Realization, grid_n: usize, tol: f64) -> CountSample {
    let f = on_circle(r.component(0));
    let (mut sample, signed) = count_zeros_periodic(&f, grid_n, tol);
    sample.count = signed;
    sample.seed = r.seed();
    sample
}
