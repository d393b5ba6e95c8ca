use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::PowerLawCdf;
use crate::collection::Collection;
use crate::error::{Error, Result};

const TABLE_LEN: u64 = 1 << 14;

/// Inverse-cdf sampler for the discrete power law.
///
/// Draws below `TABLE_LEN` come from a binary search over the cached cdf.
/// Above it the survival function is approximated by the midpoint integral
/// `(v + 1/2)^(1-alpha) / ((alpha - 1) Z)` and inverted in closed form; its
/// relative error there is below `1e-8`.
#[derive(Debug, Clone)]
pub struct PowerLawSampler {
    cdf: PowerLawCdf,
}

impl PowerLawSampler {
    pub fn new(alpha: f64) -> Result<Self> {
        Ok(PowerLawSampler {
            cdf: PowerLawCdf::with_table_len(alpha, TABLE_LEN)?,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.cdf.alpha()
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        let u: f64 = rng.random();
        let table = self.cdf.table();
        if u < table[table.len() - 1] {
            return table.partition_point(|&f| f < u) as u64 + 1;
        }
        let alpha = self.cdf.alpha();
        let r = 1.0 - u;
        let x = (r * (alpha - 1.0) * self.cdf.partition()).powf(-1.0 / (alpha - 1.0));
        // `as` saturates on overflow
        ((x - 0.5).ceil() as u64).max(table.len() as u64 + 1)
    }

    /// Draws `n` values into a fresh collection.
    pub fn sample<R: Rng + ?Sized>(&self, n: u64, rng: &mut R) -> Collection {
        let mut c = Collection::new();
        for _ in 0..n {
            c.add(self.draw(rng), 1).expect("draws are positive");
        }
        c
    }
}

/// `n` seeded draws from the power law with exponent `alpha`.
pub fn sample(alpha: f64, n: u64, seed: u64) -> Result<Collection> {
    if n == 0 {
        return Err(Error::domain("sample size must be at least 1"));
    }
    let sampler = PowerLawSampler::new(alpha)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(sampler.sample(n, &mut rng))
}
