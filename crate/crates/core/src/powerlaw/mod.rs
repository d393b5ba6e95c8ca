//! Discrete power laws `p_v = v^-alpha / zeta(alpha)` on `v = 1, 2, ...`.

mod fit;
mod sample;
mod zeta;

pub use fit::{
    classify, classify_with, discrete_mle_fit, ks_statistic, mle_fit, FitMethod, PowerLawFit,
    DEFAULT_KS_THRESHOLD,
};
pub use sample::{sample, PowerLawSampler};
pub use zeta::{zeta, DEFAULT_TOL, MIN_ALPHA};

pub(crate) use zeta::check_alpha;

use crate::error::{Error, Result};

/// Tolerance used for the normalizing constant in pmf/cdf evaluation.
const PMF_TOL: f64 = 1e-13;

/// Upper bound on the cached prefix of cdf values.
const MAX_TABLE: u64 = 1 << 20;

/// Probability of `v` under the untruncated power law.
pub fn theoretical_pmf(alpha: f64, v: u64) -> Result<f64> {
    check_alpha(alpha)?;
    if v == 0 {
        return Err(Error::domain("non-positive contribution value"));
    }
    Ok((v as f64).powf(-alpha) / zeta(alpha, PMF_TOL)?)
}

/// `P(X <= v)` under the untruncated power law.
pub fn theoretical_cdf(alpha: f64, v: u64) -> Result<f64> {
    if v == 0 {
        check_alpha(alpha)?;
        return Err(Error::domain("non-positive contribution value"));
    }
    Ok(PowerLawCdf::new(alpha)?.cdf(v))
}

/// Cumulative distribution with a cached prefix table.
///
/// Values beyond the table are evaluated as `1 - tail(v + 1) / Z`.
#[derive(Debug, Clone)]
pub struct PowerLawCdf {
    alpha: f64,
    z: f64,
    /// `table[i] = F(i + 1)`
    table: Vec<f64>,
}

impl PowerLawCdf {
    pub fn new(alpha: f64) -> Result<Self> {
        Self::with_table_len(alpha, zeta::cutoff(alpha, PMF_TOL).clamp(4096, MAX_TABLE))
    }

    pub(crate) fn with_table_len(alpha: f64, len: u64) -> Result<Self> {
        check_alpha(alpha)?;
        let z = zeta(alpha, PMF_TOL)?;
        let mut acc = 0.0;
        let table = (1..=len)
            .map(|v| {
                acc += (v as f64).powf(-alpha);
                (acc / z).min(1.0)
            })
            .collect();
        Ok(PowerLawCdf { alpha, z, table })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Normalizing constant `zeta(alpha)`.
    pub fn partition(&self) -> f64 {
        self.z
    }

    pub fn pmf(&self, v: u64) -> f64 {
        if v == 0 {
            0.0
        } else {
            (v as f64).powf(-self.alpha) / self.z
        }
    }

    /// `F(v)`; `F(0) = 0`.
    pub fn cdf(&self, v: u64) -> f64 {
        if v == 0 {
            return 0.0;
        }
        match self.table.get((v - 1) as usize) {
            Some(&f) => f,
            None => (1.0 - self.survival_tail(v + 1)).clamp(0.0, 1.0),
        }
    }

    /// Probability mass at or above `start`.
    fn survival_tail(&self, start: u64) -> f64 {
        zeta::hurwitz_tail(self.alpha, start, PMF_TOL) / self.z
    }

    pub(crate) fn table(&self) -> &[f64] {
        &self.table
    }
}
