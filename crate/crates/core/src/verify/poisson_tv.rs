use rand::Rng;

use crate::domain::check_probability_vector;
use crate::error::{LabError, Result};
use crate::learner::{poisson_pmf_table, poisson_sample};

/// Largest domain for the exact product-Poisson enumeration.
pub const TV_MAX_DOMAIN: usize = 4;
/// Largest domain for the enumerated second moment.
pub const CHI2_ENUM_MAX_DOMAIN: usize = 3;
/// Per-coordinate tail mass left out of the enumeration.
const TAIL_TOL: f64 = 1e-13;

/// An exact TV value up to a rigorous truncation error bar.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TvExact {
    pub value: f64,
    pub error_bound: f64,
}

fn check_mixture(n: f64, domain_size: usize, d: &[f64]) -> Result<()> {
    if !n.is_finite() {
        return Err(LabError::input(format!("n = {n} must be finite")));
    }
    if d.len() != domain_size {
        return Err(LabError::input(format!(
            "D has {} entries, domain has {domain_size}",
            d.len()
        )));
    }
    check_probability_vector(d)
}

/// Calls `f(weight, Σ_i coef_i k_i)` for every truncated lattice point
/// `k ∈ [0, U)^m` of a product of identical Poisson tables.
fn enumerate_product(pmf: &[f64], coefs: &[f64], f: &mut impl FnMut(f64, f64)) {
    fn rec(pmf: &[f64], coefs: &[f64], weight: f64, partial: f64, f: &mut impl FnMut(f64, f64)) {
        match coefs.split_first() {
            None => f(weight, partial),
            Some((&c, rest)) => {
                for (k, &p) in pmf.iter().enumerate() {
                    rec(pmf, rest, weight * p, partial + c * k as f64, f);
                }
            }
        }
    }
    rec(pmf, coefs, 1.0, 0.0, f);
}

/// `TV(P, E_{x⋆∼D} Q_{x⋆})` where `P` is the product of `2|X|` independent
/// `Poi(n/(2|X|))` counts `n_±(x)` and `Q_{x⋆}` adds one to `n_{y(x⋆)}(x⋆)`.
///
/// The likelihood ratio of the mixture is `Σ_x D(x) n_{y(x)}(x)/λ`, so only
/// the `|supp D|` selected coordinates need enumerating.
pub fn tv_exact_poisson(
    n: f64,
    domain_size: usize,
    d: &[f64],
    labeling: &[f64],
) -> Result<TvExact> {
    check_mixture(n, domain_size, d)?;
    if labeling.len() != domain_size || labeling.iter().any(|&y| y != 1.0 && y != -1.0) {
        return Err(LabError::input("labeling must assign ±1 to every point"));
    }
    if domain_size > TV_MAX_DOMAIN {
        return Err(LabError::capacity(format!(
            "exact TV enumeration needs |X| ≤ {TV_MAX_DOMAIN}, got {domain_size}"
        )));
    }
    if n < 0.0 {
        return Err(LabError::input(format!("n = {n} must be ≥ 0")));
    }
    if n == 0.0 {
        // Poi(0) is a point mass at 0 and every Q_{x⋆} moves it to 1
        return Ok(TvExact {
            value: 1.0,
            error_bound: 0.0,
        });
    }
    let lambda = n / (2.0 * domain_size as f64);
    let (pmf, tail) = poisson_pmf_table(lambda, TAIL_TOL)?;
    let coefs: Vec<f64> = d
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| p / lambda)
        .collect();
    let mut total = 0.0;
    enumerate_product(&pmf, &coefs, &mut |w, s| total += w * (s - 1.0).abs());
    // E[f; outside] ≤ ½(Pr[out] + Σ D(x) E[c_x/λ; out]) and
    // E[c/λ; c ≥ U] = Pr[Poi ≥ U-1] ≤ tail + p_{U-1}
    let tail_all = tail * coefs.len() as f64;
    let size_biased = tail + pmf.last().copied().unwrap_or(0.0);
    let error_bound = 0.5 * (tail_all + (size_biased + tail_all));
    Ok(TvExact {
        value: 0.5 * total,
        error_bound,
    })
}

/// Monte Carlo estimate of the same TV, returning `(estimate, std_error)`.
pub fn tv_monte_carlo<R: Rng + ?Sized>(
    n: f64,
    domain_size: usize,
    d: &[f64],
    labeling: &[f64],
    samples: u64,
    rng: &mut R,
) -> Result<(f64, f64)> {
    check_mixture(n, domain_size, d)?;
    if labeling.len() != domain_size {
        return Err(LabError::input("labeling must cover the domain"));
    }
    if n.is_nan() || n <= 0.0 || samples < 2 {
        return Err(LabError::input(
            "Monte Carlo TV needs n > 0 and at least two samples",
        ));
    }
    let lambda = n / (2.0 * domain_size as f64);
    let (mut mean, mut m2) = (0.0, 0.0);
    let mut counts = vec![[0u64; 2]; domain_size];
    for i in 1..=samples {
        for c in counts.iter_mut() {
            c[0] = poisson_sample(lambda, rng)?;
            c[1] = poisson_sample(lambda, rng)?;
        }
        let ratio: f64 = (0..domain_size)
            .map(|x| d[x] * counts[x][usize::from(labeling[x] > 0.0)] as f64 / lambda)
            .sum();
        let v = 0.5 * (ratio - 1.0).abs();
        let delta = v - mean;
        mean += delta / i as f64;
        m2 += delta * (v - mean);
    }
    Ok((mean, (m2 / (samples - 1) as f64 / samples as f64).sqrt()))
}

/// Closed form `χ²(E_{x⋆∼D} Q_{x⋆}, P) = (2|X|/n) Σ_x D(x)²`.
///
/// Each pair `(x₁⋆, x₂⋆)` contributes `1 + (2|X|/n)·1{x₁⋆ = x₂⋆}` to the
/// Ingster expectation, so `TV ≤ √(χ²/2) = √((|X|/n) Σ D²) ≤ 1/√(σn)`.
pub fn chi2_mixture(n: f64, domain_size: usize, d: &[f64]) -> Result<f64> {
    check_mixture(n, domain_size, d)?;
    if n <= 0.0 {
        return Err(LabError::input(format!("χ² needs n > 0, got {n}")));
    }
    Ok(2.0 * domain_size as f64 / n * d.iter().map(|p| p * p).sum::<f64>())
}

/// Ingster's identity evaluated term by term:
/// `Σ_{x₁,x₂} D(x₁)D(x₂) E_P[(c_{x₁}/λ)(c_{x₂}/λ)] - 1`, with the one- and
/// two-point Poisson moments summed from truncated tables.
pub fn chi2_ingster(n: f64, domain_size: usize, d: &[f64]) -> Result<f64> {
    check_mixture(n, domain_size, d)?;
    if n <= 0.0 {
        return Err(LabError::input(format!("χ² needs n > 0, got {n}")));
    }
    let lambda = n / (2.0 * domain_size as f64);
    let (pmf, _) = poisson_pmf_table(lambda, TAIL_TOL * 1e-3)?;
    let m1: f64 = pmf
        .iter()
        .enumerate()
        .map(|(k, p)| k as f64 * p)
        .sum::<f64>()
        / lambda;
    let m2: f64 = pmf
        .iter()
        .enumerate()
        .map(|(k, p)| (k * k) as f64 * p)
        .sum::<f64>()
        / (lambda * lambda);
    let mut total = 0.0;
    for (a, &pa) in d.iter().enumerate() {
        for (b, &pb) in d.iter().enumerate() {
            total += pa * pb * if a == b { m2 } else { m1 * m1 };
        }
    }
    Ok(total - 1.0)
}

/// `E_P[(Σ_x D(x) c_x/λ)²] - 1` by enumerating the product of truncated
/// Poisson tables.
pub fn chi2_expectation(n: f64, domain_size: usize, d: &[f64]) -> Result<f64> {
    check_mixture(n, domain_size, d)?;
    if n <= 0.0 {
        return Err(LabError::input(format!("χ² needs n > 0, got {n}")));
    }
    if domain_size > CHI2_ENUM_MAX_DOMAIN {
        return Err(LabError::capacity(format!(
            "enumerated χ² needs |X| ≤ {CHI2_ENUM_MAX_DOMAIN}, got {domain_size}"
        )));
    }
    let lambda = n / (2.0 * domain_size as f64);
    let (pmf, _) = poisson_pmf_table(lambda, TAIL_TOL * 1e-3)?;
    let coefs: Vec<f64> = d.iter().map(|&p| p / lambda).collect();
    let mut total = 0.0;
    enumerate_product(&pmf, &coefs, &mut |w, s| total += w * s * s);
    Ok(total - 1.0)
}

/// `TV(Poi(λ), Poi(λ) + 1) = ½ Σ_k |p_k - p_{k-1}|`, truncated past the
/// `1e-13` tail.
pub fn shifted_poisson_tv(lambda: f64) -> Result<f64> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(LabError::input(format!(
            "λ = {lambda} must be finite and ≥ 0"
        )));
    }
    if lambda == 0.0 {
        return Ok(1.0);
    }
    let (pmf, _) = poisson_pmf_table(lambda, TAIL_TOL)?;
    let mut total = pmf[0];
    for k in 1..pmf.len() {
        total += (pmf[k] - pmf[k - 1]).abs();
    }
    total += pmf[pmf.len() - 1];
    Ok(0.5 * total)
}
