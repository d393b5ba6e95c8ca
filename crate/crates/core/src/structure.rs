//! Logarithmic class structure, the constrained maximum-entropy solver and
//! theoretical metric curves for power laws.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::collection::{Collection, Distribution, EnergyModel};
use crate::error::{Error, Result};
use crate::powerlaw::{check_alpha, zeta, DEFAULT_TOL};
use crate::thermo::theoretical_energy;

/// Default class base (decades).
pub const DEFAULT_BASE: u64 = 10;

/// Default bisection tolerance on the exponent of the maximum-entropy solver.
pub const DEFAULT_LAMBDA_TOL: f64 = 1e-10;

const MAX_BISECTIONS: usize = 200;

/// One logarithmic class: values in `(b^(n-1), b^n]`, plus `v = 1` for `n = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassRow {
    pub class: u32,
    /// `N(n)`, individuals in the class.
    pub population: u64,
    /// `C(n)`, sum of values held by the class.
    pub mass: u128,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassDecomposition {
    pub base: u64,
    /// Classes `1..=max`, including empty ones below the highest occupied class.
    pub classes: Vec<ClassRow>,
}

impl ClassDecomposition {
    pub fn population(&self, class: u32) -> u64 {
        self.row(class).map_or(0, |r| r.population)
    }

    pub fn mass(&self, class: u32) -> u128 {
        self.row(class).map_or(0, |r| r.mass)
    }

    fn row(&self, class: u32) -> Option<&ClassRow> {
        class
            .checked_sub(1)
            .and_then(|i| self.classes.get(i as usize))
    }

    /// Least-squares slope of `ln N(n)` against `n` over the first `k`
    /// classes. Empty classes are skipped.
    pub fn population_log_slope(&self, k: usize) -> Option<f64> {
        let pts: Vec<(f64, f64)> = self
            .classes
            .iter()
            .take(k)
            .filter(|r| r.population > 0)
            .map(|r| (r.class as f64, (r.population as f64).ln()))
            .collect();
        if pts.len() < 2 {
            return None;
        }
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        Some(sxy / sxx)
    }
}

/// Class index of `value`: the smallest `n >= 1` with `value <= base^n`.
pub fn class_index(value: u64, base: u64) -> u32 {
    let mut bound = base;
    let mut n = 1;
    while value > bound {
        bound = bound.saturating_mul(base);
        n += 1;
    }
    n
}

pub fn class_decompose(c: &Collection, base: u64) -> Result<ClassDecomposition> {
    if base < 2 {
        return Err(Error::domain(format!(
            "class base must be >= 2, got {base}"
        )));
    }
    c.require_nonempty()?;
    let mut acc: BTreeMap<u32, (u64, u128)> = BTreeMap::new();
    for (v, s) in c.iter() {
        let e = acc.entry(class_index(v, base)).or_insert((0, 0));
        e.0 += s;
        e.1 += v as u128 * s as u128;
    }
    let max = acc.keys().next_back().copied().unwrap_or(1);
    let classes = (1..=max)
        .map(|n| {
            let (population, mass) = acc.get(&n).copied().unwrap_or((0, 0));
            ClassRow {
                class: n,
                population,
                mass,
            }
        })
        .collect();
    Ok(ClassDecomposition { base, classes })
}

/// Adjacent-class ratios `(N(n+1)/N(n), C(n+1)/C(n))` for a power law:
/// `b^-(alpha-1)` and `b^-(alpha-2)`. Both are independent of `n`.
pub fn theoretical_class_scaling(alpha: f64, base: u64, class: u32) -> Result<(f64, f64)> {
    if !(alpha.is_finite() && alpha > 1.0) {
        return Err(Error::domain(format!("alpha must exceed 1, got {alpha}")));
    }
    if base < 2 {
        return Err(Error::domain(format!(
            "class base must be >= 2, got {base}"
        )));
    }
    if class < 1 {
        return Err(Error::domain("class index must be >= 1"));
    }
    let b = base as f64;
    Ok((b.powf(-(alpha - 1.0)), b.powf(-(alpha - 2.0))))
}

/// Maximum-entropy distribution on `1..=V` at a fixed average energy.
#[derive(Debug, Clone)]
pub struct MaxEntSolution {
    pub model: EnergyModel,
    pub support_max: u64,
    pub target_energy: f64,
    /// Exponent of `p_v ∝ exp(-lambda u(v))`, the energy multiplier.
    pub lambda: f64,
    /// `p_v` for `v = 1..=V` (index `v - 1`).
    pub probs: Vec<f64>,
    log_probs: Vec<f64>,
    energies: Vec<f64>,
    pub entropy: f64,
    pub energy: f64,
    pub iterations: usize,
}

impl MaxEntSolution {
    /// `Q = S / E`.
    pub fn efficiency(&self) -> f64 {
        self.entropy / self.energy
    }

    /// Smallest `max_v |ln p_v + 1 + m u(v) + kappa|` over constants `kappa`.
    pub fn stationarity_residual(&self, multiplier: f64) -> f64 {
        let (lo, hi) = self
            .log_probs
            .iter()
            .zip(&self.energies)
            .map(|(lp, u)| lp + 1.0 + multiplier * u)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| {
                (lo.min(r), hi.max(r))
            });
        0.5 * (hi - lo)
    }

    /// Residual with the energy multiplier `lambda` of the constrained problem.
    pub fn lagrange_residual(&self) -> f64 {
        self.stationarity_residual(self.lambda)
    }

    /// Residual with the multiplier replaced by `Q = S / E`. This differs from
    /// the Lagrange form by `(Q - lambda) = ln Z / E` per unit of energy, so it
    /// is not small unless `ln Z` is.
    pub fn efficiency_residual(&self) -> f64 {
        self.stationarity_residual(self.efficiency())
    }

    /// Largest relative deviation of `p_v exp(lambda u(v))` from its mean:
    /// zero for an exact power law (logarithmic) or exponential (linear).
    pub fn form_deviation(&self) -> f64 {
        let scaled: Vec<f64> = self
            .log_probs
            .iter()
            .zip(&self.energies)
            .map(|(lp, u)| (lp + self.lambda * u).exp())
            .collect();
        let mean = scaled.iter().sum::<f64>() / scaled.len() as f64;
        scaled
            .iter()
            .map(|x| ((x - mean) / mean).abs())
            .fold(0.0, f64::max)
    }

    pub fn distribution(&self) -> Result<Distribution> {
        let probs: BTreeMap<u64, f64> = self
            .probs
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > 0.0)
            .map(|(i, &p)| (i as u64 + 1, p))
            .collect();
        Distribution::new(probs)
    }
}

struct Gibbs {
    log_probs: Vec<f64>,
    energy: f64,
}

fn gibbs(energies: &[f64], lambda: f64) -> Gibbs {
    let max = energies
        .iter()
        .map(|u| -lambda * u)
        .fold(f64::NEG_INFINITY, f64::max);
    let log_z = max
        + energies
            .iter()
            .map(|u| (-lambda * u - max).exp())
            .sum::<f64>()
            .ln();
    let log_probs: Vec<f64> = energies.iter().map(|u| -lambda * u - log_z).collect();
    let energy = log_probs
        .iter()
        .zip(energies)
        .map(|(lp, u)| lp.exp() * u)
        .sum();
    Gibbs { log_probs, energy }
}

/// Maximizes entropy on `1..=support_max` subject to normalization and
/// `sum p_v u(v) = target_energy`, by bisection on `lambda` to within
/// `lambda_tol`.
///
/// At fixed energy this is also the maximizer of `Q = S / E`. The solution
/// is a truncated power law `v^-lambda` under the logarithmic model and an
/// exponential `exp(-lambda v)` under the linear one.
pub fn max_entropy_oracle(
    target_energy: f64,
    support_max: u64,
    model: EnergyModel,
    lambda_tol: f64,
) -> Result<MaxEntSolution> {
    if support_max < 2 {
        return Err(Error::domain("support must contain at least 2 values"));
    }
    if !(lambda_tol.is_finite() && lambda_tol > 0.0) {
        return Err(Error::domain(format!("invalid tolerance {lambda_tol}")));
    }
    let energies: Vec<f64> = (1..=support_max).map(|v| model.energy(v)).collect();
    let (e_min, e_max) = (energies[0], energies[energies.len() - 1]);
    if !(target_energy > e_min && target_energy < e_max) {
        return Err(Error::domain(format!(
            "target energy {target_energy} outside attainable range ({e_min}, {e_max})"
        )));
    }

    // energy is strictly decreasing in lambda
    let (mut lo, mut hi) = (-1.0f64, 1.0f64);
    while gibbs(&energies, hi).energy > target_energy {
        lo = hi;
        hi *= 2.0;
        if hi > 1e12 {
            return Err(Error::Convergence { iterations: 0 });
        }
    }
    while gibbs(&energies, lo).energy < target_energy {
        hi = lo;
        lo *= 2.0;
        if lo < -1e12 {
            return Err(Error::Convergence { iterations: 0 });
        }
    }
    let mut iterations = 0;
    while hi - lo > lambda_tol {
        if iterations == MAX_BISECTIONS {
            return Err(Error::Convergence { iterations });
        }
        let mid = 0.5 * (lo + hi);
        if gibbs(&energies, mid).energy > target_energy {
            lo = mid;
        } else {
            hi = mid;
        }
        iterations += 1;
    }
    let lambda = 0.5 * (lo + hi);
    let g = gibbs(&energies, lambda);
    let probs: Vec<f64> = g.log_probs.iter().map(|lp| lp.exp()).collect();
    let entropy = -probs
        .iter()
        .zip(&g.log_probs)
        .filter(|(p, _)| **p > 0.0)
        .map(|(p, lp)| p * lp)
        .sum::<f64>();
    Ok(MaxEntSolution {
        model,
        support_max,
        target_energy,
        lambda,
        probs,
        log_probs: g.log_probs,
        energies,
        entropy,
        energy: g.energy,
        iterations,
    })
}

/// One point of a theoretical curve. CSV header: `alpha,S,Q,R,E,A`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub alpha: f64,
    #[serde(rename = "S")]
    pub entropy: Option<f64>,
    #[serde(rename = "Q")]
    pub efficiency: Option<f64>,
    #[serde(rename = "R")]
    pub reduction: Option<f64>,
    #[serde(rename = "E")]
    pub energy: f64,
    #[serde(rename = "A")]
    pub free_energy: f64,
}

/// Uniform distribution on `1..=N`: maximal entropy, zero reduction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UniformReference {
    pub entropy: f64,
    pub efficiency: f64,
    pub reduction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoryCurve {
    /// Support size of the truncated pmf; `None` for the untruncated law.
    pub truncation: Option<u64>,
    pub points: Vec<CurvePoint>,
    pub uniform: Option<UniformReference>,
}

/// Moments of the power law truncated to `1..=n` and renormalized.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncatedStats {
    /// Truncated partition sum `sum_{v <= n} v^-alpha`.
    pub partition: f64,
    /// `-sum p_v ln p_v`, evaluated from the normalized pmf.
    pub entropy: f64,
    /// `sum p_v ln v`.
    pub energy: f64,
}

pub fn truncated_power_law(alpha: f64, n: u64) -> Result<TruncatedStats> {
    if !alpha.is_finite() || alpha <= 0.0 {
        return Err(Error::domain(format!("invalid exponent {alpha}")));
    }
    if n < 1 {
        return Err(Error::domain("truncation must be at least 1"));
    }
    let z: f64 = (1..=n).rev().map(|v| (v as f64).powf(-alpha)).sum();
    let (mut s, mut e) = (0.0, 0.0);
    for v in (1..=n).rev() {
        let x = v as f64;
        let p = x.powf(-alpha) / z;
        if p > 0.0 {
            s -= p * p.ln();
            e += p * x.ln();
        }
    }
    Ok(TruncatedStats {
        partition: z,
        entropy: s,
        energy: e,
    })
}

fn check_grid(alphas: &[f64]) -> Result<()> {
    if alphas.is_empty() {
        return Err(Error::domain("empty alpha grid"));
    }
    if alphas.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::domain("alpha grid must be strictly increasing"));
    }
    alphas.iter().try_for_each(|&a| check_alpha(a))
}

/// `alpha_min, alpha_min + step, ...` up to `alpha_max` inclusive, rounded to
/// 9 decimals to avoid accumulated drift.
pub fn alpha_grid(alpha_min: f64, alpha_max: f64, step: f64) -> Result<Vec<f64>> {
    if !(step.is_finite() && step > 0.0)
        || alpha_max.partial_cmp(&alpha_min).is_none_or(|o| o.is_lt())
    {
        return Err(Error::domain(
            "grid needs step > 0 and alpha_max >= alpha_min",
        ));
    }
    let count = ((alpha_max - alpha_min) / step + 1e-9).floor() as usize + 1;
    Ok((0..count)
        .map(|i| ((alpha_min + i as f64 * step) * 1e9).round() / 1e9)
        .collect())
}

/// `S`, `Q`, `R`, `E` and `A = -ln Z_N / alpha` of the power law truncated to
/// `1..=n_trunc`, with `R = ln n_trunc - S`.
pub fn efficiency_vs_alpha_curve(alphas: &[f64], n_trunc: u64) -> Result<TheoryCurve> {
    check_grid(alphas)?;
    if n_trunc < 10 {
        return Err(Error::domain("truncation must be at least 10"));
    }
    let ln_n = (n_trunc as f64).ln();
    let points = alphas
        .par_iter()
        .map(|&alpha| {
            let t = truncated_power_law(alpha, n_trunc)?;
            Ok(CurvePoint {
                alpha,
                entropy: Some(t.entropy),
                efficiency: Some(t.entropy / t.energy),
                reduction: Some(ln_n - t.entropy),
                energy: t.energy,
                free_energy: -t.partition.ln() / alpha,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mean_log: f64 = (1..=n_trunc).map(|v| (v as f64).ln()).sum::<f64>() / n_trunc as f64;
    Ok(TheoryCurve {
        truncation: Some(n_trunc),
        points,
        uniform: Some(UniformReference {
            entropy: ln_n,
            efficiency: ln_n / mean_log,
            reduction: 0.0,
        }),
    })
}

/// `E = 1 / (alpha - 1)` and `A = -ln zeta(alpha) / alpha` on the grid.
pub fn energy_curve(alphas: &[f64]) -> Result<TheoryCurve> {
    check_grid(alphas)?;
    let points = alphas
        .par_iter()
        .map(|&alpha| {
            Ok(CurvePoint {
                alpha,
                entropy: None,
                efficiency: None,
                reduction: None,
                energy: theoretical_energy(alpha)?,
                free_energy: -zeta(alpha, DEFAULT_TOL)?.ln() / alpha,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TheoryCurve {
        truncation: None,
        points,
        uniform: None,
    })
}
