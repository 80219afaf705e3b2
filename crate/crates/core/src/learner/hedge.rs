use std::sync::Arc;

use crate::domain::{HypothesisClass, LossSpec};
use crate::error::{LabError, Result};
use crate::oracle::OracleStats;

use super::{Learner, LearnerInfo};

/// `√(8 ln M / T)`, zero for a single expert.
pub fn default_hedge_rate(experts: usize, horizon: usize) -> f64 {
    if experts <= 1 || horizon == 0 {
        return 0.0;
    }
    (8.0 * (experts as f64).ln() / horizon as f64).sqrt()
}

/// Exponential weights over a fixed pool of experts.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpWeights {
    eta: f64,
    cumulative: Vec<f64>,
}

impl ExpWeights {
    pub fn new(experts: usize, eta: f64) -> Result<Self> {
        if experts == 0 {
            return Err(LabError::input("need at least one expert"));
        }
        if !(eta >= 0.0 && eta.is_finite()) {
            return Err(LabError::input(format!("learning rate {eta} must be ≥ 0")));
        }
        Ok(ExpWeights {
            eta,
            cumulative: vec![0.0; experts],
        })
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// Normalized weights `∝ exp(-η · cumulative loss)`.
    pub fn weights(&self) -> Vec<f64> {
        let least = self
            .cumulative
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        let raw: Vec<f64> = self
            .cumulative
            .iter()
            .map(|&l| (-self.eta * (l - least)).exp())
            .collect();
        let total: f64 = raw.iter().sum();
        raw.into_iter().map(|w| w / total).collect()
    }

    pub fn update(&mut self, losses: &[f64]) {
        debug_assert_eq!(losses.len(), self.cumulative.len());
        for (c, l) in self.cumulative.iter_mut().zip(losses) {
            *c += l;
        }
    }

    pub fn cumulative(&self) -> &[f64] {
        &self.cumulative
    }
}

/// Hedge over every hypothesis of a finite class; predicts the weighted
/// mean value. Uses no oracle calls.
#[derive(Debug, Clone)]
pub struct HedgeLearner {
    class: Arc<HypothesisClass>,
    loss: LossSpec,
    weights: ExpWeights,
}

impl HedgeLearner {
    pub fn new(class: Arc<HypothesisClass>, loss: LossSpec, eta: f64) -> Result<Self> {
        let weights = ExpWeights::new(class.len(), eta)?;
        Ok(HedgeLearner {
            class,
            loss,
            weights,
        })
    }

    pub fn weights(&self) -> Vec<f64> {
        self.weights.weights()
    }
}

impl Learner for HedgeLearner {
    fn name(&self) -> &'static str {
        "hedge"
    }

    fn predict(&mut self, _t: usize, x: usize) -> Result<f64> {
        let w = self.weights.weights();
        let mean: f64 = self
            .class
            .hypotheses()
            .iter()
            .zip(&w)
            .map(|(h, w)| w * h.at(x))
            .sum();
        Ok(mean.clamp(-1.0, 1.0))
    }

    fn observe(&mut self, x: usize, y: f64) -> Result<()> {
        let losses: Vec<f64> = self
            .class
            .hypotheses()
            .iter()
            .map(|h| self.loss.eval(h.at(x), y))
            .collect::<Result<_>>()?;
        self.weights.update(&losses);
        Ok(())
    }

    fn stats(&self) -> OracleStats {
        OracleStats::default()
    }

    fn info(&self) -> LearnerInfo {
        LearnerInfo::default()
    }
}
