use rand::{Rng, RngCore};

use crate::adversary::HintSchedule;
use crate::domain::{ExampleMultiset, LabeledExample, LossSpec};
use crate::error::{LabError, Result};
use crate::oracle::{Oracle, OracleStats, TiePolicy};
use crate::rng::{Purpose, Streams};

use super::{Learner, LearnerInfo};

/// Slack tolerated before an out-of-range prediction is treated as a bug.
const RANGE_SLACK: f64 = 1e-9;

/// Random-playout prediction with a fixed signed hint multiset `S`:
/// `OPT(history; S ∪ {(x,-1)}) - OPT(history; S ∪ {(x,+1)})`.
///
/// `hints` must already hold every hint twice (count 2 per draw) so the
/// binary term scales like the real-valued one.
pub fn playout_prediction(
    oracle: &mut Oracle,
    history: &ExampleMultiset,
    hints: &ExampleMultiset,
    x: usize,
    loss: &LossSpec,
    tie: TiePolicy,
    rng: &mut dyn RngCore,
) -> Result<f64> {
    let mut minus = hints.clone();
    minus.push(x, -1.0);
    let mut plus = hints.clone();
    plus.push(x, 1.0);
    let lo = oracle.mixed_opt(history, &minus, loss, tie.resolve(Some(x), rng))?;
    let hi = oracle.mixed_opt(history, &plus, loss, tie.resolve(Some(x), rng))?;
    let y_hat = lo.value - hi.value;
    if y_hat.abs() > 1.0 + RANGE_SLACK {
        return Err(LabError::contract(format!(
            "playout prediction {y_hat} outside [-1, 1]"
        )));
    }
    Ok(y_hat.clamp(-1.0, 1.0))
}

/// Accumulates signed hints densely, then emits them doubled.
struct SignedCounts {
    counts: Vec<[u64; 2]>,
}

impl SignedCounts {
    fn new(domain_size: usize) -> Self {
        SignedCounts {
            counts: vec![[0, 0]; domain_size],
        }
    }

    fn add<R: Rng + ?Sized>(&mut self, z: usize, rng: &mut R) {
        let plus = rng.random_bool(0.5);
        self.counts[z][usize::from(plus)] += 1;
    }

    fn doubled(&self) -> ExampleMultiset {
        let mut s = ExampleMultiset::new();
        for (z, c) in self.counts.iter().enumerate() {
            if c[0] > 0 {
                s.insert(LabeledExample::new(z, -1.0), 2 * c[0]);
            }
            if c[1] > 0 {
                s.insert(LabeledExample::new(z, 1.0), 2 * c[1]);
            }
        }
        s
    }
}

#[derive(Debug, Clone)]
enum HintSource {
    /// Hints released by the adversary.
    Given(HintSchedule),
    /// `K` fresh uniform instances per future round.
    Smoothed {
        k: usize,
        max_per_round: Option<u64>,
    },
}

/// Random-playout learner, either on released hints or on self-generated
/// uniform hints for the smoothed game.
#[derive(Debug, Clone)]
pub struct PlayoutLearner {
    oracle: Oracle,
    loss: LossSpec,
    tie: TiePolicy,
    horizon: usize,
    streams: Streams,
    history: ExampleMultiset,
    source: HintSource,
}

impl PlayoutLearner {
    pub fn transductive(
        oracle: Oracle,
        loss: LossSpec,
        tie: TiePolicy,
        hints: HintSchedule,
        streams: Streams,
    ) -> Result<Self> {
        let horizon = hints.horizon();
        Self::build(
            oracle,
            loss,
            tie,
            horizon,
            streams,
            HintSource::Given(hints),
        )
    }

    pub fn smoothed(
        oracle: Oracle,
        loss: LossSpec,
        tie: TiePolicy,
        horizon: usize,
        k: usize,
        max_per_round: Option<u64>,
        streams: Streams,
    ) -> Result<Self> {
        if k == 0 {
            return Err(LabError::input("hint count K must be at least 1"));
        }
        Self::build(
            oracle,
            loss,
            tie,
            horizon,
            streams,
            HintSource::Smoothed { k, max_per_round },
        )
    }

    fn build(
        oracle: Oracle,
        loss: LossSpec,
        tie: TiePolicy,
        horizon: usize,
        streams: Streams,
        source: HintSource,
    ) -> Result<Self> {
        if tie == TiePolicy::PreferNegative && !oracle.class().is_binary() {
            return Err(LabError::input("prefer_negative ties need a binary class"));
        }
        Ok(PlayoutLearner {
            oracle,
            loss,
            tie,
            horizon,
            streams,
            history: ExampleMultiset::new(),
            source,
        })
    }

    /// Fresh signed hints for round `t`, drawn from that round's own stream.
    fn draw_hints(&self, t: usize) -> Result<ExampleMultiset> {
        let size = self.oracle.class().domain_size();
        let mut rng = self.streams.rng(t as u64, Purpose::Hints, 0);
        let mut counts = SignedCounts::new(size);
        match &self.source {
            HintSource::Given(schedule) => {
                for s in t + 1..=self.horizon {
                    for &z in schedule.row(s) {
                        counts.add(z, &mut rng);
                    }
                }
            }
            HintSource::Smoothed { k, max_per_round } => {
                let total = (*k as u64) * (self.horizon - t) as u64;
                if let Some(cap) = max_per_round {
                    if total > *cap {
                        return Err(LabError::capacity(format!(
                            "round {t} needs {total} hints, cap is {cap}"
                        )));
                    }
                }
                for _ in 0..total {
                    let z = rng.random_range(0..size);
                    counts.add(z, &mut rng);
                }
            }
        }
        Ok(counts.doubled())
    }

    pub fn history(&self) -> &ExampleMultiset {
        &self.history
    }
}

impl Learner for PlayoutLearner {
    fn name(&self) -> &'static str {
        match self.source {
            HintSource::Given(_) => "transductive_playout",
            HintSource::Smoothed { .. } => "smoothed_playout",
        }
    }

    fn predict(&mut self, t: usize, x: usize) -> Result<f64> {
        if t == 0 || t > self.horizon {
            return Err(LabError::input(format!(
                "round {t} outside 1..={}",
                self.horizon
            )));
        }
        if let HintSource::Given(schedule) = &self.source {
            if !schedule.contains(t, x) {
                return Err(LabError::contract(format!(
                    "x_{t} = {x} is not in hint row {t}"
                )));
            }
        }
        let hints = self.draw_hints(t)?;
        let mut tie_rng = self.streams.rng(t as u64, Purpose::TieBreak, 0);
        playout_prediction(
            &mut self.oracle,
            &self.history,
            &hints,
            x,
            &self.loss,
            self.tie,
            &mut tie_rng,
        )
    }

    fn observe(&mut self, x: usize, y: f64) -> Result<()> {
        self.loss.check_label(y)?;
        self.history.push(x, y);
        Ok(())
    }

    fn stats(&self) -> OracleStats {
        self.oracle.stats()
    }

    fn info(&self) -> LearnerInfo {
        match &self.source {
            HintSource::Given(s) => LearnerInfo {
                k: Some(s.k()),
                n: None,
            },
            HintSource::Smoothed { k, .. } => LearnerInfo {
                k: Some(*k),
                n: None,
            },
        }
    }
}
