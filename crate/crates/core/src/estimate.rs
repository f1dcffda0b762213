use serde::{Deserialize, Serialize};

/// Why an estimate should not be trusted at face value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimateFlag {
    /// Too many realizations could not be counted reliably.
    Unresolved,
    /// A truncated integral over a non-compact set did not settle.
    Diverged,
}

/// Numeric result record shared by every estimator.
///
/// `std_error` is zero only for closed forms; cubature results report a
/// refinement-difference error and Monte Carlo results the usual standard error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
    /// Samples drawn or nodes evaluated.
    pub n: u64,
    pub seed: u64,
    pub method: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flag: Option<EstimateFlag>,
    /// Samples excluded from the mean (unresolved counts).
    #[serde(default, skip_serializing_if = "is_zero")]
    pub excluded: u64,
}

fn is_zero(x: &u64) -> bool {
    *x == 0
}

impl Estimate {
    pub fn exact(value: f64, method: impl Into<String>) -> Self {
        Estimate {
            value,
            std_error: 0.0,
            n: 1,
            seed: 0,
            method: method.into(),
            flag: None,
            excluded: 0,
        }
    }

    pub fn new(value: f64, std_error: f64, n: u64, seed: u64, method: impl Into<String>) -> Self {
        Estimate {
            value,
            std_error,
            n,
            seed,
            method: method.into(),
            flag: None,
            excluded: 0,
        }
    }

    pub fn with_flag(mut self, flag: Option<EstimateFlag>) -> Self {
        self.flag = flag;
        self
    }

    pub fn is_flagged(&self) -> bool {
        self.flag.is_some()
    }

    /// Distance to `reference` in units of the combined standard error.
    ///
    /// Returns `0` when both values coincide exactly and `inf` when they differ
    /// but no error bar is available.
    pub fn discrepancy_se(&self, reference: f64, reference_se: f64) -> f64 {
        let diff = (self.value - reference).abs();
        let se = self.std_error.hypot(reference_se);
        if diff == 0.0 {
            0.0
        } else if se == 0.0 {
            f64::INFINITY
        } else {
            diff / se
        }
    }
}

/// Running mean/variance accumulator (Welford).
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct Moments {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    /// Combines with another accumulator (Chan et al. pairwise update).
    pub fn merge(&mut self, other: &Moments) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *other;
            return;
        }
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        self.mean += delta * other.n as f64 / n as f64;
        self.m2 += other.m2 + delta * delta * (self.n as f64 * other.n as f64) / n as f64;
        self.n = n;
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }

    /// Standard error of the mean.
    pub fn std_error(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            (self.variance() / self.n as f64).sqrt()
        }
    }
}
