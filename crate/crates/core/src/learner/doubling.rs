use rand::Rng;

use crate::domain::LossSpec;
use crate::error::{LabError, Result};
use crate::oracle::OracleStats;
use crate::rng::{Purpose, Streams};

use super::hedge::{default_hedge_rate, ExpWeights};
use super::{Learner, LearnerInfo};

/// Expert smoothness levels `σ_i = 2^i σ_min`,
/// `i < max(1, ⌈log₂(σ_max/σ_min)⌉)`.
pub fn doubling_sigmas(sigma_min: f64, sigma_max: f64) -> Result<Vec<f64>> {
    if !(sigma_min > 0.0 && sigma_min <= sigma_max && sigma_max <= 1.0) {
        return Err(LabError::input(format!(
            "need 0 < σ_min ≤ σ_max ≤ 1, got [{sigma_min}, {sigma_max}]"
        )));
    }
    let span = (sigma_max / sigma_min).log2();
    let count = ((span - 1e-12).ceil() as usize).max(1);
    Ok((0..count)
        .map(|i| sigma_min * 2f64.powi(i as i32))
        .collect())
}

/// Hedge over copies of a base learner tuned to different σ. With a proper
/// base the played prediction is a sampled expert's; otherwise it is the
/// weighted mean.
pub struct Doubling {
    experts: Vec<Box<dyn Learner>>,
    sigmas: Vec<f64>,
    weights: ExpWeights,
    sample: bool,
    loss: LossSpec,
    streams: Streams,
    last: Vec<f64>,
}

impl Doubling {
    pub fn new(
        experts: Vec<Box<dyn Learner>>,
        sigmas: Vec<f64>,
        horizon: usize,
        sample: bool,
        loss: LossSpec,
        streams: Streams,
    ) -> Result<Self> {
        if experts.is_empty() || experts.len() != sigmas.len() {
            return Err(LabError::input("one expert per σ level is required"));
        }
        let weights = ExpWeights::new(experts.len(), default_hedge_rate(experts.len(), horizon))?;
        let last = vec![0.0; experts.len()];
        Ok(Doubling {
            experts,
            sigmas,
            weights,
            sample,
            loss,
            streams,
            last,
        })
    }

    pub fn sigmas(&self) -> &[f64] {
        &self.sigmas
    }

    pub fn weights(&self) -> Vec<f64> {
        self.weights.weights()
    }
}

impl Learner for Doubling {
    fn name(&self) -> &'static str {
        "doubling"
    }

    fn predict(&mut self, t: usize, x: usize) -> Result<f64> {
        for (slot, expert) in self.last.iter_mut().zip(self.experts.iter_mut()) {
            *slot = expert.predict(t, x)?;
        }
        let w = self.weights.weights();
        if self.sample {
            let mut rng = self.streams.rng(t as u64, Purpose::LearnerSample, 0);
            let u: f64 = rng.random();
            let mut acc = 0.0;
            for (i, wi) in w.iter().enumerate() {
                acc += wi;
                if u < acc {
                    return Ok(self.last[i]);
                }
            }
            Ok(*self.last.last().expect("nonempty"))
        } else {
            let mean: f64 = w.iter().zip(&self.last).map(|(w, y)| w * y).sum();
            Ok(mean.clamp(-1.0, 1.0))
        }
    }

    fn observe(&mut self, x: usize, y: f64) -> Result<()> {
        let losses: Vec<f64> = self
            .last
            .iter()
            .map(|&p| self.loss.eval(p, y))
            .collect::<Result<_>>()?;
        self.weights.update(&losses);
        for e in &mut self.experts {
            e.observe(x, y)?;
        }
        Ok(())
    }

    fn stats(&self) -> OracleStats {
        let mut total = OracleStats::default();
        for e in &self.experts {
            total.merge(&e.stats());
        }
        total
    }

    fn info(&self) -> LearnerInfo {
        LearnerInfo::default()
    }
}
