use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

/// Tolerance on `Σ p = 1`.
pub const PROB_SUM_TOL: f64 = 1e-12;
/// Slack on the singleton bound `p(x) ≤ 1/(σ|X|)`.
pub const SMOOTH_TOL: f64 = 1e-12;

pub fn check_probability_vector(probs: &[f64]) -> Result<()> {
    if probs.is_empty() {
        return Err(LabError::input("empty probability vector"));
    }
    if let Some(p) = probs.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
        return Err(LabError::input(format!("invalid probability {p}")));
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > PROB_SUM_TOL {
        return Err(LabError::input(format!(
            "probabilities sum to {total}, not 1"
        )));
    }
    Ok(())
}

/// True iff `probs` is `σ`-smooth with respect to the uniform distribution.
///
/// On a finite domain the subset condition `μ(A) ≤ U(A)/σ` is equivalent to
/// the singleton bound, since both sides are additive over atoms.
pub fn validate_smooth(probs: &[f64], sigma: f64) -> Result<bool> {
    check_probability_vector(probs)?;
    if !(sigma > 0.0 && sigma <= 1.0) {
        return Err(LabError::input(format!("sigma {sigma} outside (0, 1]")));
    }
    let cap = 1.0 / (sigma * probs.len() as f64);
    Ok(probs.iter().all(|&p| p <= cap + SMOOTH_TOL))
}

/// A probability vector over the domain with a smoothness certificate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmoothDistribution {
    probs: Vec<f64>,
    sigma: f64,
}

impl SmoothDistribution {
    pub fn new(probs: Vec<f64>, sigma: f64) -> Result<Self> {
        if !validate_smooth(&probs, sigma)? {
            return Err(LabError::input(format!(
                "distribution is not {sigma}-smooth (max mass {})",
                probs.iter().cloned().fold(0.0, f64::max)
            )));
        }
        Ok(SmoothDistribution { probs, sigma })
    }

    /// Carries an uncertified claim; callers must run [`validate_smooth`]
    /// before trusting it.
    pub(crate) fn unchecked(probs: Vec<f64>, sigma: f64) -> Self {
        SmoothDistribution { probs, sigma }
    }

    pub fn uniform(size: usize) -> Result<Self> {
        if size == 0 {
            return Err(LabError::input("uniform over empty domain"));
        }
        SmoothDistribution::new(vec![1.0 / size as f64; size], 1.0)
    }

    /// Uniform over `support` inside a domain of `size`, certified at
    /// `σ = |support| / size`.
    pub fn uniform_on(size: usize, support: &[usize]) -> Result<Self> {
        if support.is_empty() {
            return Err(LabError::input("empty support"));
        }
        let mut probs = vec![0.0; size];
        let mass = 1.0 / support.len() as f64;
        for &x in support {
            if x >= size {
                return Err(LabError::input(format!("support point {x} outside domain")));
            }
            probs[x] += mass;
        }
        let sigma = support.len() as f64 / size as f64;
        SmoothDistribution::new(probs, sigma.min(1.0))
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn domain_size(&self) -> usize {
        self.probs.len()
    }

    /// Largest σ for which this distribution is σ-smooth.
    pub fn tightest_sigma(&self) -> f64 {
        let max = self.probs.iter().cloned().fold(0.0, f64::max);
        (1.0 / (max * self.probs.len() as f64)).min(1.0)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut last = 0;
        for (x, &p) in self.probs.iter().enumerate() {
            if p > 0.0 {
                acc += p;
                last = x;
                if u < acc {
                    return x;
                }
            }
        }
        last
    }
}

/// Extreme points of `{D : 0 ≤ D(x) ≤ 1/(σ|X|), Σ D = 1}`.
///
/// Each vertex puts the cap on `⌊σ|X|⌋` atoms and the remaining mass (if
/// any) on one further atom. When `σ|X|` is integral these are exactly the
/// uniform distributions over `σ|X|`-subsets.
pub fn smooth_vertices(size: usize, sigma: f64) -> Result<Vec<Vec<f64>>> {
    if size == 0 {
        return Err(LabError::input("empty domain"));
    }
    if !(sigma > 0.0 && sigma <= 1.0) {
        return Err(LabError::input(format!("sigma {sigma} outside (0, 1]")));
    }
    if size > 20 {
        return Err(LabError::capacity("vertex enumeration limited to |X| ≤ 20"));
    }
    let cap = (1.0 / (sigma * size as f64)).min(1.0);
    let scaled = sigma * size as f64;
    let mut full = scaled.floor() as usize;
    // guard against σ|X| = k - tiny from floating error
    if (scaled - scaled.round()).abs() < 1e-9 {
        full = scaled.round() as usize;
    }
    full = full.min(size);
    let remainder = (1.0 - full as f64 * cap).max(0.0);
    let fractional = remainder > 1e-12;

    let mut out = Vec::new();
    for mask in 0u32..(1u32 << size) {
        if mask.count_ones() as usize != full {
            continue;
        }
        let base: Vec<f64> = (0..size)
            .map(|x| if mask & (1 << x) != 0 { cap } else { 0.0 })
            .collect();
        if fractional {
            for extra in (0..size).filter(|x| mask & (1 << x) == 0) {
                let mut v = base.clone();
                v[extra] = remainder;
                out.push(v);
            }
        } else {
            out.push(base);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validator_fixtures() {
        assert!(validate_smooth(&[0.125; 8], 1.0).unwrap());
        assert!(!validate_smooth(&[1.0, 0.0], 1.0).unwrap());
        let half = [0.25, 0.25, 0.25, 0.25, 0.0, 0.0, 0.0, 0.0];
        assert!(validate_smooth(&half, 0.5).unwrap());
        assert!(!validate_smooth(&half, 0.6).unwrap());
    }

    #[test]
    fn validator_rejects_non_probability() {
        assert!(validate_smooth(&[0.5, 0.4], 1.0).is_err());
        assert!(validate_smooth(&[1.5, -0.5], 1.0).is_err());
        assert!(validate_smooth(&[0.5, 0.5], 0.0).is_err());
        assert!(validate_smooth(&[0.5, 0.5], 1.5).is_err());
    }

    #[test]
    fn vertices_integral_and_fractional() {
        let v = smooth_vertices(4, 0.5).unwrap();
        assert_eq!(v.len(), 6);
        for d in &v {
            assert!(validate_smooth(d, 0.5).unwrap());
        }
        // σ|X| = 1.5: one atom at 2/3, one at 1/3
        let v = smooth_vertices(3, 0.5).unwrap();
        assert_eq!(v.len(), 6);
        for d in &v {
            assert!(validate_smooth(d, 0.5).unwrap());
            let mut s = d.clone();
            s.sort_by(f64::total_cmp);
            assert!((s[2] - 2.0 / 3.0).abs() < 1e-12 && (s[1] - 1.0 / 3.0).abs() < 1e-12);
        }
        // σ = 1/|X| admits point masses
        assert_eq!(smooth_vertices(3, 1.0 / 3.0).unwrap().len(), 3);
    }

    #[test]
    fn sampling_respects_support() {
        let d = SmoothDistribution::uniform_on(8, &[2, 5]).unwrap();
        assert_eq!(d.sigma(), 0.25);
        let mut rng = crate::rng::seeded(1);
        for _ in 0..200 {
            let x = d.sample(&mut rng);
            assert!(x == 2 || x == 5);
        }
    }
}
