use crate::domain::{ExampleMultiset, LossSpec};
use crate::error::{LabError, Result};
use crate::oracle::{Oracle, OracleStats, TiePolicy};
use crate::rng::{Purpose, Streams};

use super::{Learner, LearnerInfo};

/// Follow the leader: ERM on the raw history, no perturbation.
#[derive(Debug, Clone)]
pub struct Ftl {
    oracle: Oracle,
    tie: TiePolicy,
    streams: Streams,
    history: ExampleMultiset,
}

impl Ftl {
    pub fn new(oracle: Oracle, tie: TiePolicy, streams: Streams) -> Result<Self> {
        if !oracle.class().is_binary() {
            return Err(LabError::input("FTL needs a binary class"));
        }
        Ok(Ftl {
            oracle,
            tie,
            streams,
            history: ExampleMultiset::new(),
        })
    }
}

impl Learner for Ftl {
    fn name(&self) -> &'static str {
        "ftl"
    }

    fn predict(&mut self, t: usize, x: usize) -> Result<f64> {
        let mut tie_rng = self.streams.rng(t as u64, Purpose::TieBreak, 0);
        let answer = self.oracle.erm(
            &self.history,
            &LossSpec::binary_indicator(),
            self.tie.resolve(Some(x), &mut tie_rng),
        )?;
        Ok(self.oracle.class().get(answer.index).at(x))
    }

    fn observe(&mut self, x: usize, y: f64) -> Result<()> {
        LossSpec::binary_indicator().check_label(y)?;
        self.history.push(x, y);
        Ok(())
    }

    fn stats(&self) -> OracleStats {
        self.oracle.stats()
    }

    fn info(&self) -> LearnerInfo {
        LearnerInfo::default()
    }
}
