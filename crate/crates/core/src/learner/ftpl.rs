use rand::Rng;

use crate::domain::{ExampleMultiset, LabeledExample, LossSpec};
use crate::error::{LabError, Result};
use crate::oracle::{Oracle, OracleStats, TiePolicy};
use crate::rng::{Purpose, Streams};

use super::poisson::poisson_sample;
use super::{Learner, LearnerInfo};

/// Draw `N ~ Poi(n)` uniform instances with Rademacher labels.
pub fn hallucinate<R: Rng + ?Sized>(
    n: f64,
    domain_size: usize,
    rng: &mut R,
) -> Result<ExampleMultiset> {
    let count = poisson_sample(n, rng)?;
    let mut counts = vec![[0u64; 2]; domain_size];
    for _ in 0..count {
        let x = rng.random_range(0..domain_size);
        counts[x][usize::from(rng.random_bool(0.5))] += 1;
    }
    let mut s = ExampleMultiset::new();
    for (x, c) in counts.iter().enumerate() {
        if c[0] > 0 {
            s.insert(LabeledExample::new(x, -1.0), c[0]);
        }
        if c[1] > 0 {
            s.insert(LabeledExample::new(x, 1.0), c[1]);
        }
    }
    Ok(s)
}

/// Follow the perturbed leader with a Poisson number of hallucinated
/// samples, refreshed every round. Proper and binary; one ERM call per
/// round.
#[derive(Debug, Clone)]
pub struct PoissonFtpl {
    oracle: Oracle,
    n: f64,
    tie: TiePolicy,
    streams: Streams,
    history: ExampleMultiset,
    last_hallucinated: u64,
}

impl PoissonFtpl {
    pub fn new(oracle: Oracle, n: f64, tie: TiePolicy, streams: Streams) -> Result<Self> {
        if !oracle.class().is_binary() {
            return Err(LabError::input("Poisson FTPL needs a binary class"));
        }
        if !(n >= 0.0 && n.is_finite()) {
            return Err(LabError::input(format!("Poisson mean n = {n} must be ≥ 0")));
        }
        Ok(PoissonFtpl {
            oracle,
            n,
            tie,
            streams,
            history: ExampleMultiset::new(),
            last_hallucinated: 0,
        })
    }

    /// `N` drawn in the most recent round.
    pub fn last_hallucinated(&self) -> u64 {
        self.last_hallucinated
    }

    pub fn n(&self) -> f64 {
        self.n
    }
}

impl Learner for PoissonFtpl {
    fn name(&self) -> &'static str {
        "poisson_ftpl"
    }

    fn predict(&mut self, t: usize, x: usize) -> Result<f64> {
        let size = self.oracle.class().domain_size();
        let mut rng = self.streams.rng(t as u64, Purpose::Hallucination, 0);
        let fake = hallucinate(self.n, size, &mut rng)?;
        self.last_hallucinated = fake.logical_len();
        let input = self.history.union(&fake);
        let mut tie_rng = self.streams.rng(t as u64, Purpose::TieBreak, 0);
        let answer = self.oracle.erm(
            &input,
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
        LearnerInfo {
            k: None,
            n: Some(self.n),
        }
    }
}
