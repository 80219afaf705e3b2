use rand::Rng;

use crate::domain::{check_probability_vector, ExampleMultiset, HypothesisClass, LossSpec};
use crate::error::{LabError, Result};
use crate::learner::hallucinate;
use crate::oracle::{Oracle, Tie};

use super::budget::eta_budget;
use super::report::VerificationReport;

/// Settings for [`generalization_gap_mc`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapCheck {
    /// Poisson mean of the hallucinated sample.
    pub n: f64,
    pub trials: u64,
    pub d: usize,
    pub horizon: usize,
    /// Constant in front of the `√(d ln T/(nσ))` term.
    pub c: f64,
}

/// `L(h, s) = -y h(x)/2`.
fn centered(h: f64, y: f64) -> f64 {
    -y * h / 2.0
}

/// Monte Carlo estimate of the modified generalization error
/// `E[L(h_{t+1}, s') - L(h_{t+1}, s_t)]`, where `h_{t+1}` is the ERM on
/// `history ∪ R ∪ {s_t}`, `R` is a fresh Poisson hallucination and `s'` is an
/// independent copy of `s_t`.
///
/// `s_t` draws `x` from `dist` and labels it `labels[x]`. The expectation
/// over `s'` is taken in closed form given `h_{t+1}`, which removes one
/// source of variance without changing the mean.
pub fn generalization_gap_mc<R: Rng + ?Sized>(
    class: &HypothesisClass,
    dist: &[f64],
    labels: &[f64],
    history: &ExampleMultiset,
    check: GapCheck,
    rng: &mut R,
) -> Result<VerificationReport> {
    let size = class.domain_size();
    if !class.is_binary() {
        return Err(LabError::input("generalization check needs a binary class"));
    }
    if dist.len() != size || labels.len() != size {
        return Err(LabError::input(
            "distribution and labels must cover the domain",
        ));
    }
    check_probability_vector(dist)?;
    if labels.iter().any(|&y| y != 1.0 && y != -1.0) {
        return Err(LabError::input("labels must be ±1"));
    }
    if check.trials < 2 {
        return Err(LabError::input("need at least two trials"));
    }
    let max_p = dist.iter().copied().fold(0.0, f64::max);
    let sigma = (1.0 / (max_p * size as f64)).min(1.0);
    let budget =
        eta_budget(check.n, sigma, check.d, check.horizon, check.c)?.generalization_budget();

    let mut cdf = Vec::with_capacity(size);
    let mut acc = 0.0;
    for &p in dist {
        acc += p;
        cdf.push(acc);
    }
    let mut oracle = Oracle::new(std::sync::Arc::new(class.clone()));
    let loss = LossSpec::binary_indicator();
    let (mut mean, mut m2) = (0.0, 0.0);
    for i in 1..=check.trials {
        let mut train = hallucinate(check.n, size, rng)?;
        train.extend_from(history);
        let u: f64 = rng.random();
        let x = cdf.iter().position(|&c| u < c).unwrap_or(size - 1);
        let y = labels[x];
        train.push(x, y);
        let h = class.get(oracle.erm(&train, &loss, Tie::LowestIndex)?.index);
        let fresh: f64 = (0..size)
            .map(|z| dist[z] * centered(h.at(z), labels[z]))
            .sum();
        let gap = fresh - centered(h.at(x), y);
        let delta = gap - mean;
        mean += delta / i as f64;
        m2 += delta * (gap - mean);
    }
    let se = (m2 / (check.trials - 1) as f64 / check.trials as f64).sqrt();
    Ok(
        VerificationReport::monte_carlo("generalization_gap", check.trials)
            .with("gap", mean)
            .with("std_error", se)
            .with("budget", budget)
            .with("sigma", sigma)
            .bound(budget)
            .ci(3.0 * se)
            .verdict(
                mean <= budget + 3.0 * se,
                format!("gap {mean:.4} ± {se:.4} vs budget {budget:.4}"),
            ),
    )
}
