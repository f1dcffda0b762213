//! Points of X⁻¹(W) for a level-set target W = F⁻¹(0), counted as the zeros
//! of F∘X on the domain.

use nalgebra::DVector;

use super::circle::count_zeros_periodic;
use super::sphere::{count_common_zeros_sphere, NewtonOptions};
use super::{CountSample, FnField};
use crate::error::{domain, Result};
use crate::grf::{Domain, Realization};
use crate::kacrice::LevelSetW;

/// Resolution of the preimage counter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PreimageOptions {
    /// Grid nodes on S¹.
    pub grid_n: usize,
    pub bisection_tol: f64,
    /// Newton settings on S²; `projective` should only be set when F∘X is
    /// even or odd.
    pub newton: NewtonOptions,
}

impl Default for PreimageOptions {
    fn default() -> Self {
        PreimageOptions {
            grid_n: 1024,
            bisection_tol: 1e-12,
            newton: NewtonOptions {
                projective: false,
                ..NewtonOptions::default()
            },
        }
    }
}

/// Value of F∘X at `x` and its ambient gradient, one row per equation.
fn composed(r: &Realization, w: &LevelSetW, x: &[f64]) -> (DVector<f64>, Vec<Vec<f64>>) {
    let k = r.output_dim();
    let mut y = DVector::zeros(k);
    let mut grads = Vec::with_capacity(k);
    for o in 0..k {
        let (v, g) = r.component(o).eval_grad(x);
        y[o] = v;
        grads.push(g);
    }
    let f = w.defining_map(&y);
    let jf = w.defining_jacobian(&y);
    let rows = (0..w.codim())
        .map(|i| {
            (0..x.len())
                .map(|a| (0..k).map(|o| jf[(i, o)] * grads[o][a]).sum())
                .collect()
        })
        .collect();
    (f, rows)
}

/// Number of points of X⁻¹(W) for one realization on S¹ or S².
///
/// The codimension of W must equal the dimension of the domain.
pub fn count_preimages(r: &Realization, w: &LevelSetW, opts: &PreimageOptions) -> Result<CountSample> {
    let dom = r.model().domain();
    if w.ambient_dim() != r.output_dim() {
        return domain(format!(
            "W lives in ℝ^{} but the field takes values in ℝ^{}",
            w.ambient_dim(),
            r.output_dim()
        ));
    }
    if w.codim() != dom.dim() {
        return domain(format!(
            "X⁻¹(W) is not discrete: codim W = {} but the domain has dimension {}",
            w.codim(),
            dom.dim()
        ));
    }
    let mut sample = match dom {
        Domain::Circle => {
            let f = |t: f64| {
                let (s, c) = t.sin_cos();
                let (v, g) = composed(r, w, &[c, s]);
                (v[0], -s * g[0][0] + c * g[0][1])
            };
            count_zeros_periodic(&f, opts.grid_n, opts.bisection_tol).0
        }
        Domain::Sphere => {
            let f1 = FnField(|x: &[f64]| {
                let (v, mut g) = composed(r, w, x);
                (v[0], g.swap_remove(0))
            });
            let f2 = FnField(|x: &[f64]| {
                let (v, mut g) = composed(r, w, x);
                (v[1], g.swap_remove(1))
            });
            count_common_zeros_sphere(&f1, &f2, &opts.newton)
        }
        Domain::Cube(_) => return domain("preimage counting needs a sphere domain"),
    };
    sample.seed = r.seed();
    Ok(sample)
}
