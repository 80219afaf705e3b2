use rand::Rng;
use rand_distr::{Distribution, Poisson};

use crate::error::{LabError, Result};

/// Means below this use sequential inversion; above it, `rand_distr`.
pub const INVERSION_LIMIT: f64 = 30.0;

/// Exact draw from `Poi(mean)`.
pub fn poisson_sample<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> Result<u64> {
    if !(mean >= 0.0 && mean.is_finite()) {
        return Err(LabError::input(format!(
            "Poisson mean {mean} must be finite and ≥ 0"
        )));
    }
    if mean == 0.0 {
        return Ok(0);
    }
    if mean < INVERSION_LIMIT {
        let u: f64 = rng.random();
        let mut p = (-mean).exp();
        let mut cdf = p;
        let mut k = 0u64;
        // the cdf reaches 1 - 1e-16 well before k = 200 for mean < 30
        while u >= cdf && k < 1000 {
            k += 1;
            p *= mean / k as f64;
            cdf += p;
        }
        return Ok(k);
    }
    let dist = Poisson::new(mean).map_err(|e| LabError::input(e.to_string()))?;
    Ok(dist.sample(rng) as u64)
}

/// Probabilities `P(Poi(λ) = k)` for `k < U`, where `U` is the first cut
/// past the mode with `P(Poi(λ) ≥ U) < tail_tol`, together with a rigorous
/// upper bound on that tail.
pub fn poisson_pmf_table(lambda: f64, tail_tol: f64) -> Result<(Vec<f64>, f64)> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(LabError::input(format!(
            "Poisson mean {lambda} must be finite and ≥ 0"
        )));
    }
    if lambda == 0.0 {
        return Ok((vec![1.0], 0.0));
    }
    if lambda > 700.0 {
        return Err(LabError::capacity(
            "Poisson table underflows beyond λ = 700",
        ));
    }
    let mut table = vec![(-lambda).exp()];
    loop {
        let k = table.len();
        let next = table[k - 1] * lambda / k as f64;
        let ratio = lambda / (k as f64 + 1.0);
        if (k as f64) > lambda && ratio < 1.0 {
            // P(≥ k) ≤ p_k Σ ratio^j
            let bound = next / (1.0 - ratio);
            if bound < tail_tol {
                return Ok((table, bound));
            }
        }
        table.push(next);
    }
}
