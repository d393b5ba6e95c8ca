//! Entropy, energy and efficiency metrics.
//!
//! Empirical quantities (`S`, `R`, `E`, `Q`) are plug-in estimates from a
//! collection's histogram. Theoretical quantities (`A`, temperature) are
//! functions of a power-law exponent, usually the fitted one. The two routes
//! are kept apart: a [`ThermoReport`] fills the theoretical fields only from
//! the Continuous-approximation exponent of the same collection.

use serde::{Deserialize, Serialize};

use crate::collection::{Collection, EnergyModel};
use crate::error::{Error, Result};
use crate::powerlaw::{self, zeta, DEFAULT_TOL};

/// Shannon entropy `S = -sum_v p_v ln p_v` in nats.
pub fn entropy(c: &Collection) -> Result<f64> {
    Ok(entropy_and_reduction(c)?.0)
}

/// Entropy reduction `R = ln N - S`.
pub fn entropy_reduction(c: &Collection) -> Result<f64> {
    Ok(entropy_and_reduction(c)?.1)
}

/// `(S, R)` with `S` clamped to `[0, ln N]` so that `R = ln N - S >= 0`
/// holds exactly despite rounding.
fn entropy_and_reduction(c: &Collection) -> Result<(f64, f64)> {
    c.require_nonempty()?;
    let n = c.population() as f64;
    let s = -c
        .iter()
        .map(|(_, count)| {
            let p = count as f64 / n;
            p * p.ln()
        })
        .sum::<f64>();
    let ln_n = n.ln();
    let s = s.clamp(0.0, ln_n);
    Ok((s, ln_n - s))
}

/// Average energy `E = sum_v p_v u(v)`.
pub fn average_energy(c: &Collection, model: EnergyModel) -> Result<f64> {
    c.require_nonempty()?;
    let total: f64 = c
        .iter()
        .map(|(v, count)| count as f64 * model.energy(v))
        .sum();
    Ok(total / c.population() as f64)
}

/// Total energy `sum_v s_v u(v)` (population times average energy).
pub fn total_energy(c: &Collection, model: EnergyModel) -> f64 {
    c.iter()
        .map(|(v, count)| count as f64 * model.energy(v))
        .sum()
}

/// Entropy efficiency `Q = S / E`.
pub fn entropy_efficiency(c: &Collection, model: EnergyModel) -> Result<f64> {
    let s = entropy(c)?;
    let e = average_energy(c, model)?;
    if e <= 0.0 {
        return Err(Error::ZeroEnergy);
    }
    Ok(s / e)
}

/// Average energy of a power law with `v_min = 1`: `1 / (alpha - 1)`.
pub fn theoretical_energy(alpha: f64) -> Result<f64> {
    if !(alpha.is_finite() && alpha > 1.0) {
        return Err(Error::domain(format!(
            "divergent energy at alpha = {alpha}"
        )));
    }
    Ok(1.0 / (alpha - 1.0))
}

/// Free energy `A = -ln(zeta(alpha)) / alpha`.
pub fn theoretical_free_energy(alpha: f64, tol: f64) -> Result<f64> {
    Ok(-zeta(alpha, tol)?.ln() / alpha)
}

/// Free-energy reduction ratio `Q / alpha`.
pub fn fe_reduction_ratio(q: f64, alpha: f64) -> Result<f64> {
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(Error::domain(format!("ratio undefined at alpha = {alpha}")));
    }
    Ok(q / alpha)
}

/// Metrics bundle for one collection.
///
/// Serializes (JSON or CSV) with the short names
/// `N,S,R,E,Q,alpha,A,fe_ratio`; absent values become `null` / empty cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThermoReport {
    #[serde(rename = "N")]
    pub population: u64,
    #[serde(rename = "S")]
    pub entropy: f64,
    #[serde(rename = "R")]
    pub entropy_reduction: f64,
    #[serde(rename = "E")]
    pub avg_energy: f64,
    /// Absent when `E = 0`.
    #[serde(rename = "Q")]
    pub entropy_efficiency: Option<f64>,
    /// Continuous-approximation exponent; absent for collections without spread.
    pub alpha: Option<f64>,
    /// Theoretical free energy at `alpha`.
    #[serde(rename = "A")]
    pub free_energy: Option<f64>,
    /// `Q / alpha`.
    pub fe_ratio: Option<f64>,
}

impl ThermoReport {
    pub fn from_collection(c: &Collection, model: EnergyModel) -> Result<Self> {
        let (s, r) = entropy_and_reduction(c)?;
        let e = average_energy(c, model)?;
        let q = (e > 0.0).then(|| s / e);
        let alpha = powerlaw::mle_fit(c).ok();
        let free_energy = alpha.and_then(|a| theoretical_free_energy(a, DEFAULT_TOL).ok());
        let fe_ratio = match (q, alpha) {
            (Some(q), Some(a)) => fe_reduction_ratio(q, a).ok(),
            _ => None,
        };
        Ok(ThermoReport {
            population: c.population(),
            entropy: s,
            entropy_reduction: r,
            avg_energy: e,
            entropy_efficiency: q,
            alpha,
            free_energy,
            fe_ratio,
        })
    }

    /// `ln N`, the maximum attainable entropy.
    pub fn max_entropy(&self) -> f64 {
        (self.population as f64).ln()
    }

    /// Temperature `kT = 1 / alpha` with `k = 1`.
    pub fn temperature(&self) -> Option<f64> {
        self.alpha.map(|a| 1.0 / a)
    }
}
