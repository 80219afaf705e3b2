use rand::Rng;

use crate::domain::check_probability_vector;
use crate::error::{LabError, Result};

use super::report::VerificationReport;

const RATIO_TOL: f64 = 1e-12;

/// Result of one run of the selection procedure.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CouplingOutcome {
    pub success: bool,
    pub index: Option<usize>,
}

/// Acceptance probabilities `σ · P(x)/Q(x)`, after checking the
/// likelihood-ratio bound on the support of `Q` and `P ≪ Q`.
pub fn acceptance_probs(p: &[f64], q: &[f64], sigma: f64) -> Result<Vec<f64>> {
    if p.len() != q.len() {
        return Err(LabError::input("P and Q live on different domains"));
    }
    check_probability_vector(p)?;
    check_probability_vector(q)?;
    if !(sigma > 0.0 && sigma <= 1.0) {
        return Err(LabError::input(format!("σ = {sigma} outside (0, 1]")));
    }
    p.iter()
        .zip(q)
        .enumerate()
        .map(|(x, (&px, &qx))| {
            if qx == 0.0 {
                if px > 0.0 {
                    return Err(LabError::input(format!(
                        "P puts mass on {x} outside the support of Q"
                    )));
                }
                return Ok(0.0);
            }
            let a = sigma * px / qx;
            if a > 1.0 + RATIO_TOL {
                return Err(LabError::input(format!(
                    "likelihood ratio {} at {x} exceeds 1/σ = {}",
                    px / qx,
                    1.0 / sigma
                )));
            }
            Ok(a.min(1.0))
        })
        .collect()
}

fn select_with<R: Rng + ?Sized>(samples: &[usize], accept: &[f64], rng: &mut R) -> CouplingOutcome {
    let mut hits = 0usize;
    let mut chosen = None;
    for (i, &x) in samples.iter().enumerate() {
        if rng.random_bool(accept[x]) {
            hits += 1;
            // reservoir step keeps the pick uniform over all successes
            if rng.random_range(0..hits) == 0 {
                chosen = Some(i);
            }
        }
    }
    CouplingOutcome {
        success: chosen.is_some(),
        index: chosen,
    }
}

/// Accept each `X_i` independently with probability `σ·dP/dQ(X_i)`; on any
/// acceptance return a uniformly random accepted index.
pub fn coupling_select<R: Rng + ?Sized>(
    samples: &[usize],
    p: &[f64],
    q: &[f64],
    sigma: f64,
    rng: &mut R,
) -> Result<CouplingOutcome> {
    let accept = acceptance_probs(p, q, sigma)?;
    if let Some(&x) = samples.iter().find(|&&x| x >= p.len()) {
        return Err(LabError::input(format!("sample {x} outside domain")));
    }
    Ok(select_with(samples, &accept, rng))
}

fn sample_from<R: Rng + ?Sized>(cdf: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    cdf.iter().position(|&c| u < c).unwrap_or(cdf.len() - 1)
}

fn tv(counts: &[u64], p: &[f64]) -> f64 {
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return 0.0;
    }
    0.5 * counts
        .iter()
        .zip(p)
        .map(|(&c, &px)| (c as f64 / total as f64 - px).abs())
        .sum::<f64>()
}

/// Settings for [`coupling_montecarlo`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingCheck {
    pub m: usize,
    pub trials: u64,
    /// Allowed TV between the law of `X_I | E` and `P`.
    pub tv_tolerance: f64,
    /// Allowed TV inside each stratum.
    pub stratum_tolerance: f64,
    /// Strata with fewer successes are skipped.
    pub stratum_min: u64,
}

impl Default for CouplingCheck {
    fn default() -> Self {
        CouplingCheck {
            m: 20,
            trials: 100_000,
            tv_tolerance: 0.02,
            stratum_tolerance: 0.05,
            stratum_min: 2_000,
        }
    }
}

/// Monte Carlo check of the selection lemma: the failure rate against
/// `(1-σ)^m` in a 4-sigma binomial band, the law of `X_I` given success
/// against `P`, and the same law within strata defined by the first
/// unselected sample.
pub fn coupling_montecarlo<R: Rng + ?Sized>(
    p: &[f64],
    q: &[f64],
    sigma: f64,
    check: CouplingCheck,
    rng: &mut R,
) -> Result<VerificationReport> {
    let accept = acceptance_probs(p, q, sigma)?;
    if check.m == 0 || check.trials == 0 {
        return Err(LabError::input("need m ≥ 1 and at least one trial"));
    }
    let size = p.len();
    let mut cdf = Vec::with_capacity(size);
    let mut acc = 0.0;
    for &qx in q {
        acc += qx;
        cdf.push(acc);
    }
    let mut failures = 0u64;
    let mut law = vec![0u64; size];
    let mut strata = vec![vec![0u64; size]; size];
    let mut samples = vec![0usize; check.m];
    for _ in 0..check.trials {
        for s in samples.iter_mut() {
            *s = sample_from(&cdf, rng);
        }
        let out = select_with(&samples, &accept, rng);
        match out.index {
            None => failures += 1,
            Some(i) => {
                let x = samples[i];
                law[x] += 1;
                if check.m > 1 {
                    let other = if i == 0 { samples[1] } else { samples[0] };
                    strata[other][x] += 1;
                }
            }
        }
    }
    let trials = check.trials as f64;
    let expected = (1.0 - sigma).powi(check.m as i32);
    let rate = failures as f64 / trials;
    let band = 4.0 * (expected * (1.0 - expected) / trials).sqrt();
    let tv_all = tv(&law, p);
    let mut worst_stratum: f64 = 0.0;
    let mut strata_used = 0;
    for s in &strata {
        if s.iter().sum::<u64>() >= check.stratum_min {
            strata_used += 1;
            worst_stratum = worst_stratum.max(tv(s, p));
        }
    }
    let rate_ok = (rate - expected).abs() <= band;
    let tv_ok = tv_all <= check.tv_tolerance;
    let strata_ok = worst_stratum <= check.stratum_tolerance;
    Ok(VerificationReport::monte_carlo("coupling_selection", check.trials)
        .with("failure_rate", rate)
        .with("failure_expected", expected)
        .with("conditional_tv", tv_all)
        .with("worst_stratum_tv", worst_stratum)
        .with("strata_checked", strata_used as f64)
        .bound(expected)
        .tolerance(check.tv_tolerance)
        .ci(band)
        .verdict(
            rate_ok && tv_ok && strata_ok,
            format!(
                "Pr[E^c] {rate:.3e} vs {expected:.3e} ± {band:.1e}; TV {tv_all:.4}; worst stratum TV {worst_stratum:.4}"
            ),
        ))
}

/// Exact `Pr[E^c]` for fixed samples: `Π (1 - σ dP/dQ(X_i))`.
pub fn failure_probability(samples: &[usize], p: &[f64], q: &[f64], sigma: f64) -> Result<f64> {
    let accept = acceptance_probs(p, q, sigma)?;
    Ok(samples.iter().map(|&x| 1.0 - accept[x]).product())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    #[test]
    fn identity_coupling() {
        let p = [0.25; 4];
        let out = coupling_select(&[2], &p, &p, 1.0, &mut seeded(1)).unwrap();
        assert_eq!(
            out,
            CouplingOutcome {
                success: true,
                index: Some(0)
            }
        );
    }

    #[test]
    fn two_samples_point_mass_fixture() {
        // Q uniform on {a, b}, P = δ_a, σ = 1/2: accept iff the sample is a
        let (p, q) = ([1.0, 0.0], [0.5, 0.5]);
        let outcomes = [[0, 0], [0, 1], [1, 0], [1, 1]];
        let fail: f64 = outcomes
            .iter()
            .map(|s| 0.25 * failure_probability(s, &p, &q, 0.5).unwrap())
            .sum();
        assert_eq!(fail, 0.25);
    }

    #[test]
    fn ratio_violation_is_rejected() {
        let r = coupling_select(&[0], &[1.0, 0.0], &[0.5, 0.5], 0.9, &mut seeded(1));
        assert!(matches!(r, Err(LabError::Input(_))));
        let r = coupling_select(&[0], &[0.5, 0.5], &[1.0, 0.0], 0.5, &mut seeded(1));
        assert!(r.is_err());
    }

    #[test]
    fn p_equals_q_is_clean() {
        let p = [0.1, 0.2, 0.3, 0.4];
        let check = CouplingCheck {
            m: 3,
            trials: 40_000,
            ..CouplingCheck::default()
        };
        let r = coupling_montecarlo(&p, &p, 0.5, check, &mut seeded(5)).unwrap();
        assert!(r.passed, "{}", r.detail);
    }
}
