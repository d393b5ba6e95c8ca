use serde::{Deserialize, Serialize};

use super::zeta::{check_alpha, mean_log_value, zeta, MIN_ALPHA};
use super::{PowerLawCdf, PMF_TOL};
use crate::collection::Collection;
use crate::error::{Error, Result};

/// KS threshold below which a collection is called a power law.
pub const DEFAULT_KS_THRESHOLD: f64 = 0.1;

const BISECTION_TOL: f64 = 1e-10;
const MAX_ITERATIONS: usize = 200;
const MAX_ALPHA: f64 = 1024.0;

/// Exponent estimator.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FitMethod {
    /// Continuous approximation `1 + N / sum ln(v / v_min)`.
    Continuous,
    /// Maximum likelihood for the zeta distribution with `v_min = 1`:
    /// solves `-zeta'(a) / zeta(a) = mean(ln v)`.
    #[default]
    Discrete,
}

impl std::fmt::Display for FitMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            FitMethod::Continuous => "continuous",
            FitMethod::Discrete => "discrete",
        })
    }
}

impl std::str::FromStr for FitMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "continuous" => Ok(FitMethod::Continuous),
            "discrete" | "zeta" => Ok(FitMethod::Discrete),
            other => Err(Error::domain(format!("unknown fit method `{other}`"))),
        }
    }
}

/// Result of fitting and testing a collection against a power law.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    pub alpha: f64,
    pub v_min: u64,
    /// `zeta(alpha)`
    pub zeta: f64,
    /// Kolmogorov-Smirnov statistic.
    #[serde(rename = "D")]
    pub ks: f64,
    pub is_power_law: bool,
    #[serde(skip)]
    pub method: FitMethod,
    #[serde(skip)]
    pub threshold: f64,
}

/// Continuous-approximation MLE `1 + N / sum_v s_v ln(v / v_min)`, with
/// `v_min` the smallest observed value.
///
/// With `v_min = 1` this is exactly `1 + 1 / E` for the logarithmic average
/// energy `E`. On discrete data it is biased upward (about 2.75 for samples
/// drawn at `alpha = 2`); [`discrete_mle_fit`] is the consistent estimator.
pub fn mle_fit(c: &Collection) -> Result<f64> {
    c.require_nonempty()?;
    let v_min = c.min_value().unwrap_or(1);
    let log_min = (v_min as f64).ln();
    let spread: f64 = c
        .iter()
        .map(|(v, s)| s as f64 * ((v as f64).ln() - log_min))
        .sum();
    if spread <= 0.0 {
        return Err(Error::Degenerate("zero log-spread".into()));
    }
    Ok(1.0 + c.population() as f64 / spread)
}

/// Maximum-likelihood exponent of the zeta distribution (`v_min = 1`).
pub fn discrete_mle_fit(c: &Collection) -> Result<f64> {
    c.require_nonempty()?;
    let n = c.population() as f64;
    let target: f64 = c
        .iter()
        .map(|(v, s)| s as f64 * (v as f64).ln())
        .sum::<f64>()
        / n;
    if target <= 0.0 {
        return Err(Error::Degenerate("zero log-spread".into()));
    }
    let tol = 1e-12;
    // mean_log_value is strictly decreasing in alpha, from +inf at 1 to 0.
    let mut lo = MIN_ALPHA * (1.0 + 1e-9);
    if mean_log_value(lo, tol) <= target {
        return Ok(lo);
    }
    let mut hi = 2.0;
    while mean_log_value(hi, tol) > target {
        lo = hi;
        hi *= 2.0;
        if hi > MAX_ALPHA {
            return Err(Error::Degenerate("exponent out of range".into()));
        }
    }
    for _ in 0..MAX_ITERATIONS {
        let mid = 0.5 * (lo + hi);
        if mean_log_value(mid, tol) > target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < BISECTION_TOL {
            return Ok(0.5 * (lo + hi));
        }
    }
    Err(Error::Convergence {
        iterations: MAX_ITERATIONS,
    })
}

/// Largest gap between the empirical cdf of `c` and the power-law cdf at
/// `alpha`, taken over both sides of every step of the empirical cdf.
pub fn ks_statistic(c: &Collection, alpha: f64) -> Result<f64> {
    c.require_nonempty()?;
    let cdf = PowerLawCdf::new(alpha)?;
    Ok(ks_with(&cdf, c))
}

fn ks_with(cdf: &PowerLawCdf, c: &Collection) -> f64 {
    let n = c.population() as f64;
    let mut cum = 0u64;
    let mut prev_emp = 0.0;
    let mut d: f64 = 0.0;
    for (v, s) in c.iter() {
        d = d.max((prev_emp - cdf.cdf(v - 1)).abs());
        cum += s;
        let emp = cum as f64 / n;
        d = d.max((emp - cdf.cdf(v)).abs());
        prev_emp = emp;
    }
    d.clamp(0.0, 1.0)
}

/// Fits with the discrete MLE and tests `D < threshold`.
pub fn classify(c: &Collection, threshold: f64) -> Result<PowerLawFit> {
    classify_with(c, threshold, FitMethod::Discrete)
}

pub fn classify_with(c: &Collection, threshold: f64, method: FitMethod) -> Result<PowerLawFit> {
    if !(threshold.is_finite() && threshold > 0.0) {
        return Err(Error::domain(format!("invalid KS threshold {threshold}")));
    }
    let (alpha, v_min) = match method {
        FitMethod::Continuous => (mle_fit(c)?, c.min_value().unwrap_or(1)),
        FitMethod::Discrete => (discrete_mle_fit(c)?, 1),
    };
    check_alpha(alpha)?;
    let cdf = PowerLawCdf::new(alpha)?;
    let ks = ks_with(&cdf, c);
    Ok(PowerLawFit {
        alpha,
        v_min,
        zeta: zeta(alpha, PMF_TOL)?,
        ks,
        is_power_law: ks < threshold,
        method,
        threshold,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::powerlaw::sample;
    use crate::thermo::{average_energy, entropy};
    use crate::EnergyModel;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution as _, Geometric};

    fn hist(pairs: &[(u64, u64)]) -> Collection {
        Collection::from_counts(pairs.iter().copied()).unwrap()
    }

    fn geometric_sample(mean: f64, n: usize, seed: u64) -> Collection {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = Geometric::new(1.0 / mean).unwrap();
        Collection::from_counts((0..n).map(|_| (1 + g.sample(&mut rng), 1))).unwrap()
    }

    #[test]
    fn continuous_mle_examples() {
        let a = mle_fit(&hist(&[(1, 2), (2, 1), (4, 1)])).unwrap();
        let expect = 1.0 + 4.0 / (2f64.ln() + 4f64.ln());
        assert!((a - expect).abs() < 1e-12);
        assert!((a - 2.923594).abs() < 1e-6);
        for k in [1, 3, 50] {
            let a = mle_fit(&hist(&[(1, k), (2, k)])).unwrap();
            assert!((a - 3.885390).abs() < 1e-6);
        }
    }

    #[test]
    fn continuous_mle_uses_smallest_value() {
        // {2:1, 4:1}: 1 + 2 / ln 2
        let a = mle_fit(&hist(&[(2, 1), (4, 1)])).unwrap();
        assert!((a - (1.0 + 2.0 / 2f64.ln())).abs() < 1e-12);
    }

    #[test]
    fn degenerate_inputs() {
        assert!(matches!(
            mle_fit(&hist(&[(3, 9)])),
            Err(Error::Degenerate(_))
        ));
        assert!(matches!(
            discrete_mle_fit(&hist(&[(1, 9)])),
            Err(Error::Degenerate(_))
        ));
        assert!(matches!(
            mle_fit(&Collection::new()),
            Err(Error::EmptyCollection)
        ));
        assert!(matches!(
            classify(&hist(&[(1, 5)]), 0.1),
            Err(Error::Degenerate(_))
        ));
        assert!(matches!(
            classify(&Collection::new(), 0.1),
            Err(Error::EmptyCollection)
        ));
    }

    #[test]
    fn continuous_estimator_converges_to_its_discrete_limit() {
        // On zeta data mean(ln v) -> -zeta'(a)/zeta(a), so the continuous
        // approximation tends to 1 + zeta(a) / -zeta'(a) rather than a.
        let zeta2 = std::f64::consts::PI.powi(2) / 6.0;
        let limit = 1.0 + zeta2 / 0.937_548_254_315_843_7;
        let c = sample(2.0, 100_000, 11).unwrap();
        let a = mle_fit(&c).unwrap();
        assert!((a - limit).abs() < 0.05, "{a} vs {limit}");
        assert!(a > 2.5);
    }

    #[test]
    fn discrete_mle_recovers_exponent() {
        let c = sample(2.0, 100_000, 5).unwrap();
        let a = discrete_mle_fit(&c).unwrap();
        assert!((1.97..=2.03).contains(&a), "{a}");
    }

    #[test]
    fn discrete_mle_solves_score_equation() {
        let c = hist(&[(1, 5), (2, 3), (3, 1), (10, 1)]);
        let a = discrete_mle_fit(&c).unwrap();
        let mean_log = (3.0 * 2f64.ln() + 3f64.ln() + 10f64.ln()) / 10.0;
        assert!((mean_log_value(a, 1e-13) - mean_log).abs() < 1e-9);
    }

    #[test]
    fn ks_examples() {
        let d = ks_statistic(&hist(&[(1, 1)]), 2.0).unwrap();
        assert!((d - 0.392073).abs() < 1e-6);
        assert!(ks_statistic(&Collection::new(), 2.0).is_err());
        assert!(ks_statistic(&hist(&[(1, 1)]), 1.0).is_err());
    }

    #[test]
    fn ks_small_when_histogram_matches_cdf() {
        // counts proportional to the pmf on 1..=1000, rounded
        let alpha = 2.0;
        let n = 10_000_000u64;
        let pairs: Vec<(u64, u64)> = (1..=1000u64)
            .map(|v| {
                (
                    v,
                    (n as f64 * (v as f64).powf(-alpha) / zeta(alpha, 1e-13).unwrap()).round()
                        as u64,
                )
            })
            .collect();
        let c = hist(&pairs);
        let truncated_mass = 1.0 - crate::powerlaw::theoretical_cdf(alpha, 1000).unwrap();
        let d = ks_statistic(&c, alpha).unwrap();
        assert!(d <= truncated_mass + 1e-6, "{d} vs {truncated_mass}");
    }

    #[test]
    fn geometric_data_is_rejected() {
        let c = geometric_sample(3.0, 10_000, 1);
        let a = discrete_mle_fit(&c).unwrap();
        assert!(ks_statistic(&c, a).unwrap() > 0.1);
        assert!(!classify(&c, 0.1).unwrap().is_power_law);
    }

    #[test]
    fn power_law_data_is_accepted() {
        let c = sample(2.0, 10_000, 3).unwrap();
        let fit = classify(&c, DEFAULT_KS_THRESHOLD).unwrap();
        assert!(fit.is_power_law, "{fit:?}");
        assert_eq!(fit.v_min, 1);
        assert_eq!(fit.method, FitMethod::Discrete);
    }

    #[test]
    fn threshold_one_accepts_everything() {
        let c = geometric_sample(3.0, 2_000, 9);
        assert!(classify(&c, 1.0).unwrap().is_power_law);
        assert!(
            classify_with(&c, 1.0, FitMethod::Continuous)
                .unwrap()
                .is_power_law
        );
        assert!(classify(&c, 0.0).is_err());
    }

    #[test]
    fn fit_serializes_with_short_names() {
        let fit = classify(&hist(&[(1, 3), (2, 1)]), 0.1).unwrap();
        let json = serde_json::to_value(&fit).unwrap();
        let keys: Vec<&str> = json
            .as_object()
            .unwrap()
            .keys()
            .map(|k| k.as_str())
            .collect();
        assert_eq!(keys.len(), 5);
        for k in ["alpha", "v_min", "zeta", "D", "is_power_law"] {
            assert!(keys.contains(&k), "{k}");
        }
    }

    fn arb_hist() -> impl Strategy<Value = Collection> {
        prop::collection::vec((1u64..200, 1u64..40), 1..25).prop_filter_map("spread", |pairs| {
            let mut pairs = pairs;
            pairs.push((1, 1));
            let c = Collection::from_counts(pairs).unwrap();
            (c.support_len() > 1).then_some(c)
        })
    }

    proptest! {
        #[test]
        fn continuous_identity(c in arb_hist()) {
            let alpha = mle_fit(&c).unwrap();
            let e = average_energy(&c, EnergyModel::Logarithmic).unwrap();
            let other = 1.0 + 1.0 / e;
            let ulps = (alpha.to_bits() as i64 - other.to_bits() as i64).abs();
            prop_assert!(ulps <= 4, "{} vs {} ({} ulps)", alpha, other, ulps);
        }

        #[test]
        fn mle_count_scaling_invariant(c in arb_hist(), k in 2u64..30) {
            let a = mle_fit(&c).unwrap();
            let b = mle_fit(&c.scaled(k)).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * a);
            // sanity: entropy also invariant
            prop_assert!((entropy(&c).unwrap() - entropy(&c.scaled(k)).unwrap()).abs() < 1e-12);
        }

        #[test]
        fn ks_within_unit_interval(c in arb_hist(), alpha in 1.1f64..6.0) {
            let d = ks_statistic(&c, alpha).unwrap();
            prop_assert!((0.0..=1.0).contains(&d));
        }
    }
}
