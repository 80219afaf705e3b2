use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::adversary::{Adversary, AdversaryContext, Commitment, PastRound};
use crate::domain::ExampleMultiset;
use crate::error::{LabError, Result};
use crate::learner::{build_learner, LearnerParams};
use crate::oracle::{Oracle, OracleStats, Tie};
use crate::rng::{Purpose, Streams};

use super::config::ExperimentConfig;

/// One played round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub t: usize,
    pub x: usize,
    pub y_hat: f64,
    pub y: f64,
    pub loss: f64,
    pub oracle_calls: u64,
    pub input_length: u64,
    /// Zero unless wall time recording is enabled.
    pub wall_us: u64,
    /// SHA-256 of the round's commitment, fixed before the prediction.
    pub commitment: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transcript {
    pub learner: String,
    pub adversary: String,
    pub seed: u64,
    pub config_hash: String,
    pub k: Option<usize>,
    pub n: Option<f64>,
    pub rounds: Vec<RoundRecord>,
    pub total_loss: f64,
    pub bih_loss: f64,
    pub regret: f64,
    pub oracle: OracleStats,
    /// The best-in-hindsight call, kept out of the learner's budget.
    pub final_oracle: OracleStats,
    pub warnings: Vec<String>,
}

impl Transcript {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }
}

fn commitment_hash(t: usize, c: &Commitment) -> String {
    let mut h = Sha256::new();
    h.update((t as u64).to_le_bytes());
    for p in c.dist.probs() {
        h.update(p.to_le_bytes());
    }
    for y in &c.labels {
        h.update(y.to_le_bytes());
    }
    hex::encode(h.finalize())
}

/// Plays one game of `config.horizon` rounds with the given seed.
///
/// Each round: the adversary commits to an instance law and a full label
/// table, the commitment is certified and hashed, `x_t` is drawn from the
/// law, the learner predicts, and only then is `y_t` revealed.
pub fn run_game(config: &ExperimentConfig, seed: u64) -> Result<Transcript> {
    config.validate()?;
    let class = Arc::new(config.class.build()?);
    let loss = config.loss_spec();
    let horizon = config.horizon;
    let d = config.dimension(&class);
    let streams = Streams::new(seed, 0);

    let ctx = AdversaryContext {
        class: Arc::clone(&class),
        horizon,
        sigma: config.sigma,
        d,
        k: config.k.unwrap_or(1),
    };
    let mut adversary = Adversary::new(
        &config.adversary,
        &ctx,
        &mut streams.rng(0, Purpose::AdversarySetup, 0),
    )?;
    let params = LearnerParams {
        horizon,
        sigma: config.sigma,
        d,
        k: config.k,
        n: config.n,
        c_k: config.c_k,
        tie: config.tie,
        loss,
    };
    let mut learner = build_learner(
        &config.learner,
        &params,
        Arc::clone(&class),
        adversary.hints(),
        streams,
    )?;

    let mut past: Vec<PastRound> = Vec::with_capacity(horizon);
    let mut rounds = Vec::with_capacity(horizon);
    let mut sequence = ExampleMultiset::new();
    let mut total_loss = 0.0;
    let mut before = learner.stats();
    for t in 1..=horizon {
        let round = t as u64;
        let commitment =
            adversary.commit(t, &past, &mut streams.rng(round, Purpose::Adversary, 0))?;
        adversary.certify(t, &commitment)?;
        let digest = commitment_hash(t, &commitment);
        let x = commitment
            .dist
            .sample(&mut streams.rng(round, Purpose::Adversary, 1));

        let start = config.record_wall_time.then(Instant::now);
        let y_hat = learner.predict(t, x)?;
        let wall_us = start.map_or(0, |s| s.elapsed().as_micros() as u64);
        loss.check_prediction(y_hat).map_err(|e| {
            LabError::contract(format!("round {t}: learner {}: {e}", learner.name()))
        })?;

        let y = commitment.labels[x];
        let l = loss.eval(y_hat, y)?;
        learner.observe(x, y)?;
        total_loss += l;
        sequence.push(x, y);
        past.push(PastRound { x, y_hat, y });

        let after = learner.stats();
        rounds.push(RoundRecord {
            t,
            x,
            y_hat,
            y,
            loss: l,
            oracle_calls: after.call_count - before.call_count,
            input_length: after.total_input_length - before.total_input_length,
            wall_us,
            commitment: digest,
        });
        before = after;
    }

    let mut judge = Oracle::new(Arc::clone(&class));
    let best = judge.erm_final(&sequence, &loss, Tie::LowestIndex)?;
    let info = learner.info();
    Ok(Transcript {
        learner: learner.name().to_string(),
        adversary: adversary.name().to_string(),
        seed,
        config_hash: config.hash(),
        k: info.k,
        n: info.n,
        rounds,
        total_loss,
        bih_loss: best.value,
        regret: total_loss - best.value,
        oracle: learner.stats(),
        final_oracle: judge.final_stats(),
        warnings: adversary.warnings().to_vec(),
    })
}
