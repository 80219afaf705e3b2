//! Offline optimization oracles with call accounting.
//!
//! Learners reach the hypothesis class only through [`Oracle`]. Each call
//! enumerates the class, so the oracle is exact; what matters for the
//! experiments is how many calls a learner makes and how long its inputs
//! are, which [`OracleStats`] records.

use std::sync::Arc;

use rand::seq::IndexedRandom;
use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::domain::{ExampleMultiset, HypothesisClass, LossSpec};
use crate::error::{LabError, Result};

/// Relative tolerance used to decide that two objective values tie.
pub const TIE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleStats {
    pub call_count: u64,
    pub total_input_length: u64,
    pub max_input_length: u64,
}

impl OracleStats {
    pub fn record(&mut self, input_length: u64) {
        self.call_count += 1;
        self.total_input_length += input_length;
        self.max_input_length = self.max_input_length.max(input_length);
    }

    pub fn merge(&mut self, other: &OracleStats) {
        self.call_count += other.call_count;
        self.total_input_length += other.total_input_length;
        self.max_input_length = self.max_input_length.max(other.max_input_length);
    }

    pub fn mean_input_length(&self) -> f64 {
        if self.call_count == 0 {
            0.0
        } else {
            self.total_input_length as f64 / self.call_count as f64
        }
    }
}

/// Configured tie-breaking rule among exact minimizers.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TiePolicy {
    #[default]
    LowestIndex,
    /// Among minimizers pick one predicting `-1` on the query point.
    PreferNegative,
    SeededRandom,
}

impl TiePolicy {
    pub fn as_str(self) -> &'static str {
        match self {
            TiePolicy::LowestIndex => "lowest_index",
            TiePolicy::PreferNegative => "prefer_negative",
            TiePolicy::SeededRandom => "seeded_random",
        }
    }

    /// Bind the policy to the per-call context it needs.
    pub fn resolve(self, query: Option<usize>, rng: &mut dyn RngCore) -> Tie<'_> {
        match self {
            TiePolicy::LowestIndex => Tie::LowestIndex,
            TiePolicy::PreferNegative => match query {
                Some(x) => Tie::PreferNegative(x),
                None => Tie::LowestIndex,
            },
            TiePolicy::SeededRandom => Tie::Random(rng),
        }
    }
}

/// A tie policy bound to one call.
pub enum Tie<'r> {
    LowestIndex,
    PreferNegative(usize),
    Random(&'r mut dyn RngCore),
}

/// Hypothesis index and objective value returned by an oracle call.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleAnswer {
    pub index: usize,
    pub value: f64,
}

fn is_tied(v: f64, best: f64) -> bool {
    v - best <= TIE_TOL * best.abs().max(1.0)
}

fn select(class: &HypothesisClass, objectives: &[f64], tie: Tie<'_>) -> OracleAnswer {
    let best = objectives.iter().copied().fold(f64::INFINITY, f64::min);
    let mut minimizers = objectives
        .iter()
        .enumerate()
        .filter(|(_, &v)| is_tied(v, best))
        .map(|(i, _)| i);
    let index = match tie {
        Tie::LowestIndex => minimizers.next().unwrap_or(0),
        Tie::PreferNegative(x) => {
            let all: Vec<usize> = minimizers.collect();
            all.iter()
                .copied()
                .find(|&i| class.get(i).at(x) == -1.0)
                .unwrap_or(all[0])
        }
        Tie::Random(rng) => {
            let all: Vec<usize> = minimizers.collect();
            *all.choose(rng).expect("at least one minimizer")
        }
    };
    OracleAnswer {
        index,
        value: objectives[index],
    }
}

fn check_set(loss: &LossSpec, s: &ExampleMultiset, domain: usize) -> Result<()> {
    for (e, _) in s.iter() {
        if e.x >= domain {
            return Err(LabError::input(format!("instance {} outside domain", e.x)));
        }
        loss.check_label(e.y)?;
    }
    Ok(())
}

/// Enumeration oracle over a shared class, owning one run's call counters.
#[derive(Debug, Clone)]
pub struct Oracle {
    class: Arc<HypothesisClass>,
    stats: OracleStats,
    final_stats: OracleStats,
}

impl Oracle {
    pub fn new(class: Arc<HypothesisClass>) -> Self {
        Oracle {
            class,
            stats: OracleStats::default(),
            final_stats: OracleStats::default(),
        }
    }

    pub fn class(&self) -> &HypothesisClass {
        &self.class
    }

    pub fn shared_class(&self) -> Arc<HypothesisClass> {
        Arc::clone(&self.class)
    }

    /// Counters for calls made on behalf of the learner.
    pub fn stats(&self) -> OracleStats {
        self.stats
    }

    /// Counters for calls tagged `final` (best-in-hindsight evaluation).
    pub fn final_stats(&self) -> OracleStats {
        self.final_stats
    }

    fn erm_objectives(&self, s: &ExampleMultiset, loss: &LossSpec) -> Result<Vec<f64>> {
        check_set(loss, s, self.class.domain_size())?;
        if loss.kind.is_binary() && !self.class.is_binary() {
            return Err(LabError::input("binary loss on a real-valued class"));
        }
        let entries: Vec<_> = s.iter().collect();
        Ok(self
            .class
            .hypotheses()
            .iter()
            .map(|h| {
                entries
                    .iter()
                    .map(|(e, c)| *c as f64 * loss.value(h.at(e.x), e.y))
                    .sum()
            })
            .collect())
    }

    /// Minimizer of `Σ count · l(h(x), y)` over the class.
    pub fn erm(
        &mut self,
        s: &ExampleMultiset,
        loss: &LossSpec,
        tie: Tie<'_>,
    ) -> Result<OracleAnswer> {
        let objectives = self.erm_objectives(s, loss)?;
        self.stats.record(s.logical_len());
        Ok(select(&self.class, &objectives, tie))
    }

    /// Same as [`Oracle::erm`] but accounted under the `final` tag.
    pub fn erm_final(
        &mut self,
        s: &ExampleMultiset,
        loss: &LossSpec,
        tie: Tie<'_>,
    ) -> Result<OracleAnswer> {
        let objectives = self.erm_objectives(s, loss)?;
        self.final_stats.record(s.logical_len());
        Ok(select(&self.class, &objectives, tie))
    }

    /// Minimizer of `Σ_{S_real} l(h(x),y)/(2G) + Σ_{S_bin} -y h(x)/2`.
    ///
    /// The binary term is the affine extension of `1{ŷ≠y} - 1/2` to real
    /// predictions, so a hint stored twice with sign `ε` contributes
    /// `-ε h(z)`.
    pub fn mixed_opt(
        &mut self,
        s_real: &ExampleMultiset,
        s_bin: &ExampleMultiset,
        loss: &LossSpec,
        tie: Tie<'_>,
    ) -> Result<OracleAnswer> {
        let domain = self.class.domain_size();
        check_set(loss, s_real, domain)?;
        check_set(&LossSpec::centered_binary(), s_bin, domain)?;
        if loss.kind.is_binary() && !self.class.is_binary() {
            return Err(LabError::input("binary loss on a real-valued class"));
        }
        let scale = 1.0 / (2.0 * loss.lipschitz_g);
        let real: Vec<_> = s_real.iter().collect();
        let bin: Vec<_> = s_bin.iter().collect();
        let objectives: Vec<f64> = self
            .class
            .hypotheses()
            .iter()
            .map(|h| {
                let r: f64 = real
                    .iter()
                    .map(|(e, c)| *c as f64 * loss.value(h.at(e.x), e.y))
                    .sum();
                let b: f64 = bin
                    .iter()
                    .map(|(e, c)| -(*c as f64) * e.y * h.at(e.x))
                    .sum();
                r * scale + 0.5 * b
            })
            .collect();
        self.stats
            .record(s_real.logical_len() + s_bin.logical_len());
        Ok(select(&self.class, &objectives, tie))
    }

    /// Returns some hypothesis within `eps_add` of the optimum. Among the
    /// admissible ones it deliberately picks the worst (ties broken at
    /// random), which is the least favourable behaviour an approximate
    /// oracle may exhibit.
    pub fn approx_erm<R: Rng + ?Sized>(
        &mut self,
        s: &ExampleMultiset,
        loss: &LossSpec,
        eps_add: f64,
        rng: &mut R,
    ) -> Result<OracleAnswer> {
        if !(eps_add >= 0.0 && eps_add.is_finite()) {
            return Err(LabError::input(format!(
                "approximation slack {eps_add} must be ≥ 0"
            )));
        }
        let objectives = self.erm_objectives(s, loss)?;
        self.stats.record(s.logical_len());
        if eps_add == 0.0 {
            return Ok(select(&self.class, &objectives, Tie::LowestIndex));
        }
        let best = objectives.iter().copied().fold(f64::INFINITY, f64::min);
        let admissible: Vec<usize> = (0..objectives.len())
            .filter(|&i| objectives[i] <= best + eps_add)
            .collect();
        let worst = admissible
            .iter()
            .map(|&i| objectives[i])
            .fold(f64::NEG_INFINITY, f64::max);
        let candidates: Vec<usize> = admissible
            .into_iter()
            .filter(|&i| is_tied(worst, objectives[i]) && objectives[i] <= worst)
            .collect();
        let index = *candidates.choose(rng).expect("nonempty");
        Ok(OracleAnswer {
            index,
            value: objectives[index],
        })
    }
}
