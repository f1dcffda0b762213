//! Monte Carlo mean of per-realization counts.

use std::sync::Arc;

use super::CountSample;
use crate::estimate::{Estimate, EstimateFlag, Moments};
use crate::grf::{sample_stream, FieldModel, Realization};
use crate::par;

/// Samples above this unresolved fraction flag the estimate.
const MAX_UNRESOLVED: f64 = 0.05;

/// Mean count over `n_samples` tasks; task i gets random stream i of `seed`.
pub fn mc_expected_count_with<F>(n_samples: usize, seed: u64, method: &str, count: F) -> Estimate
where
    F: Fn(u64) -> CountSample + Sync + Send,
{
    let samples = par::map_indexed(n_samples, |i| count(i as u64));
    let mut moments = Moments::default();
    let mut excluded = 0u64;
    for s in &samples {
        if s.unresolved {
            excluded += 1;
        } else {
            moments.push(s.count as f64);
        }
    }
    let mut est = Estimate::new(
        moments.mean(),
        moments.std_error(),
        moments.count(),
        seed,
        method,
    );
    est.excluded = excluded;
    let flagged = n_samples > 0 && excluded as f64 > MAX_UNRESOLVED * n_samples as f64;
    est.with_flag(flagged.then_some(EstimateFlag::Unresolved))
}

/// Mean of `op` over independent realizations of `model`.
pub fn mc_expected_count<F>(model: &Arc<FieldModel>, op: F, n_samples: usize, seed: u64) -> Estimate
where
    F: Fn(&Realization) -> CountSample + Sync + Send,
{
    mc_expected_count_with(n_samples, seed, "oracle_mc", |i| {
        let r = sample_stream(model, seed, i);
        let mut s = op(&r);
        s.seed = seed;
        s
    })
}
