//! Growth rate of Vol(W ∩ B_R), fitted as log Vol ≈ c + ε R².

use super::levelset::LevelSetW;
use crate::{Error, Result};

/// Fiber resolution per unit-width shell.
const VOLUME_RESOLUTION: usize = 24;

#[derive(Debug, Clone, PartialEq)]
pub struct SubgaussianFit {
    /// Fitted exponent ε̂.
    pub epsilon: f64,
    /// (R, Vol(W ∩ B_R)) for each radius of the grid.
    pub volumes: Vec<(f64, f64)>,
    /// Number of largest radii used in the fit.
    pub fit_points: usize,
}

/// Vol(W ∩ B_R) for increasing radii, by summing shell cubatures.
pub fn volume_profile(w: &LevelSetW, radii: &[f64]) -> Result<Vec<(f64, f64)>> {
    let rule = w
        .fiber_rule()
        .ok_or_else(|| Error::Config(format!("{} has no fiber cubature rule", w.label())))?;
    let mut sorted = radii.to_vec();
    if sorted.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
        return Err(Error::Config("radii must be positive and finite".into()));
    }
    sorted.sort_by(|a, b| a.total_cmp(b));
    let mut out = Vec::with_capacity(sorted.len());
    let mut vol = 0.0;
    let mut r0 = 0.0;
    for &r1 in &sorted {
        // Unit-width sub-shells keep the per-shell rule accurate.
        let pieces = (r1 - r0).ceil().max(1.0) as usize;
        let h = (r1 - r0) / pieces as f64;
        for i in 0..pieces {
            let a = r0 + i as f64 * h;
            let b = if i + 1 == pieces { r1 } else { a + h };
            vol += rule
                .shell(a, b, VOLUME_RESOLUTION)
                .iter()
                .map(|n| n.weight)
                .sum::<f64>();
        }
        out.push((r1, vol));
        r0 = r1;
    }
    Ok(out)
}

/// Least-squares slope of log Vol(W ∩ B_R) against R² over the larger half
/// of the radius grid (at least three radii).
pub fn subgaussian_diagnostic(w: &LevelSetW, radii: &[f64]) -> Result<SubgaussianFit> {
    if radii.len() < 3 {
        return Err(Error::Config(format!(
            "the growth fit needs at least 3 radii, got {}",
            radii.len()
        )));
    }
    let volumes = volume_profile(w, radii)?;
    let fit_points = (volumes.len() / 2).max(3).min(volumes.len());
    let tail = &volumes[volumes.len() - fit_points..];
    if tail.iter().any(|(_, v)| !(*v > 0.0) || !v.is_finite()) {
        return Err(Error::Numeric(
            "W has no finite positive volume at the fitted radii".into(),
        ));
    }
    let xs: Vec<f64> = tail.iter().map(|(r, _)| r * r).collect();
    let ys: Vec<f64> = tail.iter().map(|(_, v)| v.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    Ok(SubgaussianFit {
        epsilon: sxy / sxx,
        volumes,
        fit_points,
    })
}
