//! Online learners.
//!
//! The oracle-efficient learners are the random-playout learner (released
//! hints or self-generated uniform hints) and the Poisson-perturbed leader.
//! FTL and Hedge serve as baselines, and [`Doubling`] removes the need to
//! know σ in advance.

mod doubling;
mod ftl;
mod ftpl;
mod hedge;
mod params;
mod playout;
mod poisson;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use doubling::{doubling_sigmas, Doubling};
pub use ftl::Ftl;
pub use ftpl::{hallucinate, PoissonFtpl};
pub use hedge::{default_hedge_rate, ExpWeights, HedgeLearner};
pub use params::{default_n, hint_count, DEFAULT_C_K};
pub use playout::{playout_prediction, PlayoutLearner};
pub use poisson::{poisson_pmf_table, poisson_sample, INVERSION_LIMIT};

use crate::adversary::HintSchedule;
use crate::domain::{HypothesisClass, LossSpec};
use crate::error::{LabError, Result};
use crate::oracle::{Oracle, OracleStats, TiePolicy};
use crate::rng::Streams;

/// Parameters a learner reports for the experiment record.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LearnerInfo {
    pub k: Option<usize>,
    pub n: Option<f64>,
}

/// One player of the online game. `predict` is called once per round with
/// a 1-based round index, then `observe` with the revealed label.
pub trait Learner: Send {
    fn name(&self) -> &'static str;
    fn predict(&mut self, t: usize, x: usize) -> Result<f64>;
    fn observe(&mut self, x: usize, y: f64) -> Result<()>;
    /// Oracle usage so far.
    fn stats(&self) -> OracleStats;
    fn info(&self) -> LearnerInfo;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DoublingBase {
    PoissonFtpl,
    SmoothedPlayout,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum LearnerSpec {
    /// Random playout on `K` fresh uniform hints per future round.
    SmoothedPlayout {
        #[serde(default)]
        max_hints_per_round: Option<u64>,
    },
    /// Perturbed leader with `Poi(n)` hallucinated samples.
    PoissonFtpl {},
    /// Random playout on the adversary's hints.
    TransductivePlayout {},
    Ftl {},
    Hedge {
        #[serde(default)]
        eta: Option<f64>,
    },
    /// Unknown σ: Hedge over base learners tuned to a doubling grid.
    Doubling {
        sigma_min: f64,
        sigma_max: f64,
        base: DoublingBase,
    },
}

impl LearnerSpec {
    pub fn name(&self) -> &'static str {
        match self {
            LearnerSpec::SmoothedPlayout { .. } => "smoothed_playout",
            LearnerSpec::PoissonFtpl {} => "poisson_ftpl",
            LearnerSpec::TransductivePlayout {} => "transductive_playout",
            LearnerSpec::Ftl {} => "ftl",
            LearnerSpec::Hedge { .. } => "hedge",
            LearnerSpec::Doubling { .. } => "doubling",
        }
    }

    pub fn needs_hints(&self) -> bool {
        matches!(self, LearnerSpec::TransductivePlayout {})
    }
}

/// Game-level settings shared by every learner kind.
#[derive(Debug, Clone, PartialEq)]
pub struct LearnerParams {
    pub horizon: usize,
    pub sigma: f64,
    pub d: usize,
    /// Overrides the self-generated hint count.
    pub k: Option<usize>,
    /// Overrides the Poisson mean.
    pub n: Option<f64>,
    pub c_k: f64,
    pub tie: TiePolicy,
    pub loss: LossSpec,
}

fn smoothed(
    params: &LearnerParams,
    sigma: f64,
    oracle: Oracle,
    cap: Option<u64>,
    streams: Streams,
) -> Result<PlayoutLearner> {
    let k = match params.k {
        Some(k) => k,
        None => hint_count(params.horizon.max(1), sigma, params.c_k)?,
    };
    PlayoutLearner::smoothed(
        oracle,
        params.loss,
        params.tie,
        params.horizon,
        k,
        cap,
        streams,
    )
}

fn ftpl(
    params: &LearnerParams,
    sigma: f64,
    oracle: Oracle,
    streams: Streams,
) -> Result<PoissonFtpl> {
    let size = oracle.class().domain_size();
    let n = match params.n {
        Some(n) => n,
        None => default_n(params.horizon.max(1), sigma, size, params.d)?,
    };
    PoissonFtpl::new(oracle, n, params.tie, streams)
}

pub fn build_learner(
    spec: &LearnerSpec,
    params: &LearnerParams,
    class: Arc<HypothesisClass>,
    hints: Option<&HintSchedule>,
    streams: Streams,
) -> Result<Box<dyn Learner>> {
    let oracle = Oracle::new(Arc::clone(&class));
    Ok(match spec {
        LearnerSpec::SmoothedPlayout {
            max_hints_per_round,
        } => Box::new(smoothed(
            params,
            params.sigma,
            oracle,
            *max_hints_per_round,
            streams,
        )?),
        LearnerSpec::PoissonFtpl {} => Box::new(ftpl(params, params.sigma, oracle, streams)?),
        LearnerSpec::TransductivePlayout {} => {
            let hints = hints
                .ok_or_else(|| LabError::config("transductive playout needs a hint schedule"))?;
            Box::new(PlayoutLearner::transductive(
                oracle,
                params.loss,
                params.tie,
                hints.clone(),
                streams,
            )?)
        }
        LearnerSpec::Ftl {} => Box::new(Ftl::new(oracle, params.tie, streams)?),
        LearnerSpec::Hedge { eta } => {
            let eta = eta.unwrap_or_else(|| default_hedge_rate(class.len(), params.horizon));
            Box::new(HedgeLearner::new(class, params.loss, eta)?)
        }
        LearnerSpec::Doubling {
            sigma_min,
            sigma_max,
            base,
        } => {
            let sigmas = doubling_sigmas(*sigma_min, *sigma_max)?;
            let mut experts: Vec<Box<dyn Learner>> = Vec::with_capacity(sigmas.len());
            for (i, &s) in sigmas.iter().enumerate() {
                let o = Oracle::new(Arc::clone(&class));
                let child = streams.child(i as u64 + 1);
                experts.push(match base {
                    DoublingBase::PoissonFtpl => Box::new(ftpl(params, s, o, child)?),
                    DoublingBase::SmoothedPlayout => Box::new(smoothed(params, s, o, None, child)?),
                });
            }
            let sample = *base == DoublingBase::PoissonFtpl;
            Box::new(Doubling::new(
                experts,
                sigmas,
                params.horizon,
                sample,
                params.loss,
                streams,
            )?)
        }
    })
}
