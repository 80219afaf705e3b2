//! Adaptive adversaries.
//!
//! Every round the adversary commits to a distribution over instances and a
//! full label table before the learner predicts. The harness samples `x_t`
//! from the committed distribution and reveals `labels[x_t]` afterwards, so
//! a label can depend on everything up to the previous round but never on
//! the current prediction.

mod schedule;

use std::sync::Arc;

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

pub use schedule::{make_hint_schedule, HintLayout, HintSchedule};

use crate::domain::{validate_smooth, HypothesisClass, SmoothDistribution};
use crate::error::{LabError, Result};

/// What the adversary sees of a finished round.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PastRound {
    pub x: usize,
    pub y_hat: f64,
    pub y: f64,
}

/// Per-round instance law and its certificate.
#[derive(Debug, Clone, PartialEq)]
pub enum RoundDistribution {
    /// Certified σ-smooth.
    Smooth(SmoothDistribution),
    /// Supported inside the round's hint row.
    Hinted(Vec<f64>),
}

impl RoundDistribution {
    pub fn probs(&self) -> &[f64] {
        match self {
            RoundDistribution::Smooth(d) => d.probs(),
            RoundDistribution::Hinted(p) => p,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        sample_index(self.probs(), rng)
    }
}

fn sample_index<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut last = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p > 0.0 {
            acc += p;
            last = i;
            if u < acc {
                return i;
            }
        }
    }
    last
}

/// A round's commitment: instance law plus the label of every instance.
#[derive(Debug, Clone, PartialEq)]
pub struct Commitment {
    pub dist: RoundDistribution,
    pub labels: Vec<f64>,
}

/// `y = h⋆(x)` with probability `1/2 + δ`, else `-h⋆(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BiasedLabelRule {
    target: Vec<f64>,
    delta: f64,
}

pub fn biased_label_rule(target: &[f64], delta: f64) -> Result<BiasedLabelRule> {
    if !(0.0..=0.5).contains(&delta) {
        return Err(LabError::input(format!(
            "bias δ = {delta} outside [0, 1/2]"
        )));
    }
    Ok(BiasedLabelRule {
        target: target.to_vec(),
        delta,
    })
}

impl BiasedLabelRule {
    pub fn label<R: Rng + ?Sized>(&self, x: usize, rng: &mut R) -> f64 {
        let agree = rng.random_bool(0.5 + self.delta);
        if agree {
            self.target[x]
        } else {
            -self.target[x]
        }
    }

    /// Flip once and return the whole table, as a round commitment needs.
    pub fn table<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let agree = rng.random_bool(0.5 + self.delta);
        self.target
            .iter()
            .map(|&v| if agree { v } else { -v })
            .collect()
    }
}

/// One row of a user-supplied adversary table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableRound {
    pub probs: Vec<f64>,
    pub labels: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum AdversarySpec {
    /// Uniform instances labelled by a uniformly drawn `h⋆`.
    RealizableSmooth {
        #[serde(default)]
        delta: Option<f64>,
    },
    /// Uniform on the first `⌈σ|X|⌉` points, labels alternating per block.
    SupportAlternating {},
    /// `x_t = t mod |X|`, label opposite to the learner's last call there.
    WorstCaseSmallDomain {},
    /// Cyclic `K`-blocks as hints, `x_t` uniform in the hint, `h⋆` labels.
    TransductiveCyclic {
        #[serde(default)]
        delta: Option<f64>,
    },
    /// `d` epochs on one special point each, alternating labels.
    TransductiveSpecialPoint {},
    /// Rows cycled by round; optional explicit hints.
    CustomTable {
        rounds: Vec<TableRound>,
        #[serde(default)]
        hints: Option<Vec<Vec<usize>>>,
    },
}

impl AdversarySpec {
    pub fn name(&self) -> &'static str {
        match self {
            AdversarySpec::RealizableSmooth { .. } => "realizable_smooth",
            AdversarySpec::SupportAlternating {} => "support_alternating",
            AdversarySpec::WorstCaseSmallDomain {} => "worst_case_small_domain",
            AdversarySpec::TransductiveCyclic { .. } => "transductive_cyclic",
            AdversarySpec::TransductiveSpecialPoint {} => "transductive_special_point",
            AdversarySpec::CustomTable { .. } => "custom_table",
        }
    }

    pub fn is_transductive(&self) -> bool {
        match self {
            AdversarySpec::WorstCaseSmallDomain {}
            | AdversarySpec::TransductiveCyclic { .. }
            | AdversarySpec::TransductiveSpecialPoint {} => true,
            AdversarySpec::CustomTable { hints, .. } => hints.is_some(),
            _ => false,
        }
    }
}

/// Game parameters an adversary is built against.
#[derive(Debug, Clone)]
pub struct AdversaryContext {
    pub class: Arc<HypothesisClass>,
    pub horizon: usize,
    pub sigma: f64,
    pub d: usize,
    pub k: usize,
}

#[derive(Debug, Clone)]
enum State {
    Realizable { rule: BiasedLabelRule },
    Alternating { support: usize, blocks: usize },
    WorstCase,
    Cyclic { rule: BiasedLabelRule },
    SpecialPoint { epoch_len: usize },
    Table { rounds: Vec<TableRound> },
}

/// A constructed adversary for one run.
#[derive(Debug, Clone)]
pub struct Adversary {
    spec: AdversarySpec,
    state: State,
    domain_size: usize,
    sigma: f64,
    hints: Option<HintSchedule>,
    warnings: Vec<String>,
}

impl Adversary {
    /// Build the adversary; `setup` supplies the one-off draws (e.g. `h⋆`).
    pub fn new(
        spec: &AdversarySpec,
        ctx: &AdversaryContext,
        setup: &mut dyn RngCore,
    ) -> Result<Self> {
        let class = &ctx.class;
        let size = class.domain_size();
        if !(ctx.sigma > 0.0 && ctx.sigma <= 1.0) {
            return Err(LabError::input(format!("σ = {} outside (0, 1]", ctx.sigma)));
        }
        let mut warnings = Vec::new();
        let mut hints = None;
        let draw_target = |setup: &mut dyn RngCore| {
            class
                .get(setup.random_range(0..class.len()))
                .values()
                .to_vec()
        };
        let state = match spec {
            AdversarySpec::RealizableSmooth { delta } => State::Realizable {
                rule: biased_label_rule(&draw_target(setup), delta.unwrap_or(0.5))?,
            },
            AdversarySpec::SupportAlternating {} => {
                let exact = ctx.sigma * size as f64;
                let support = (exact - 1e-9).ceil().max(1.0) as usize;
                if (exact - exact.round()).abs() > 1e-9 {
                    warnings.push(format!(
                        "σ|X| = {exact} is not an integer; using |X0| = {support}"
                    ));
                }
                if ctx.d == 0 || ctx.d > support {
                    return Err(LabError::input(format!(
                        "cannot split |X0| = {support} into d = {} blocks",
                        ctx.d
                    )));
                }
                State::Alternating {
                    support,
                    blocks: ctx.d,
                }
            }
            AdversarySpec::WorstCaseSmallDomain {} => {
                hints = Some(make_hint_schedule(
                    &HintLayout::Vacuous,
                    ctx.horizon.max(1),
                    size,
                    size,
                )?);
                State::WorstCase
            }
            AdversarySpec::TransductiveCyclic { delta } => {
                hints = Some(make_hint_schedule(
                    &HintLayout::Cyclic,
                    ctx.horizon.max(1),
                    ctx.k,
                    size,
                )?);
                State::Cyclic {
                    rule: biased_label_rule(&draw_target(setup), delta.unwrap_or(0.5))?,
                }
            }
            AdversarySpec::TransductiveSpecialPoint {} => {
                hints = Some(make_hint_schedule(
                    &HintLayout::Epochs { d: ctx.d },
                    ctx.horizon.max(1),
                    ctx.k,
                    size,
                )?);
                State::SpecialPoint {
                    epoch_len: ctx.horizon.max(1).div_ceil(ctx.d),
                }
            }
            AdversarySpec::CustomTable {
                rounds,
                hints: rows,
            } => {
                if rounds.is_empty() {
                    return Err(LabError::input("custom table needs at least one round"));
                }
                for r in rounds {
                    if r.probs.len() != size || r.labels.len() != size {
                        return Err(LabError::input("custom table rows must cover the domain"));
                    }
                }
                if let Some(rows) = rows {
                    let k = rows.first().map_or(0, Vec::len);
                    hints = Some(make_hint_schedule(
                        &HintLayout::Explicit { rows: rows.clone() },
                        ctx.horizon,
                        k,
                        size,
                    )?);
                }
                State::Table {
                    rounds: rounds.clone(),
                }
            }
        };
        Ok(Adversary {
            spec: spec.clone(),
            state,
            domain_size: size,
            sigma: ctx.sigma,
            hints,
            warnings,
        })
    }

    pub fn spec(&self) -> &AdversarySpec {
        &self.spec
    }

    pub fn name(&self) -> &'static str {
        self.spec.name()
    }

    /// Released hints, if the adversary plays the transductive game.
    pub fn hints(&self) -> Option<&HintSchedule> {
        self.hints.as_ref()
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// Commitment for round `t` (1-based) given all finished rounds.
    pub fn commit(
        &mut self,
        t: usize,
        past: &[PastRound],
        rng: &mut dyn RngCore,
    ) -> Result<Commitment> {
        let size = self.domain_size;
        match &self.state {
            State::Realizable { rule } => Ok(Commitment {
                dist: RoundDistribution::Smooth(SmoothDistribution::new(
                    vec![1.0 / size as f64; size],
                    self.sigma,
                )?),
                labels: rule.table(rng),
            }),
            State::Alternating { support, blocks } => {
                let (support, blocks) = (*support, *blocks);
                let block_of = |x: usize| x * blocks / support;
                let mut seen = vec![0usize; blocks];
                for r in past.iter().filter(|r| r.x < support) {
                    seen[block_of(r.x)] += 1;
                }
                let labels = (0..size)
                    .map(|x| {
                        if x < support && seen[block_of(x)] % 2 == 1 {
                            -1.0
                        } else {
                            1.0
                        }
                    })
                    .collect();
                let idx: Vec<usize> = (0..support).collect();
                let uniform = SmoothDistribution::uniform_on(size, &idx)?;
                Ok(Commitment {
                    dist: RoundDistribution::Smooth(SmoothDistribution::new(
                        uniform.probs().to_vec(),
                        self.sigma,
                    )?),
                    labels,
                })
            }
            State::WorstCase => {
                let x = (t - 1) % size;
                let mut probs = vec![0.0; size];
                probs[x] = 1.0;
                let mut labels = vec![1.0; size];
                for r in past {
                    labels[r.x] = if r.y_hat > 0.0 { -1.0 } else { 1.0 };
                }
                Ok(Commitment {
                    dist: RoundDistribution::Hinted(probs),
                    labels,
                })
            }
            State::Cyclic { rule } => {
                let row = self.hints.as_ref().expect("cyclic hints").row(t);
                let mut probs = vec![0.0; size];
                for &z in row {
                    probs[z] += 1.0 / row.len() as f64;
                }
                Ok(Commitment {
                    dist: RoundDistribution::Hinted(probs),
                    labels: rule.table(rng),
                })
            }
            State::SpecialPoint { epoch_len } => {
                let row = self.hints.as_ref().expect("epoch hints").row(t);
                let special = row[0];
                let epoch_start = (t - 1) / epoch_len * epoch_len;
                let played = past.len().saturating_sub(epoch_start);
                let mut probs = vec![0.0; size];
                probs[special] = 1.0;
                let mut labels = vec![1.0; size];
                labels[special] = if played.is_multiple_of(2) { 1.0 } else { -1.0 };
                Ok(Commitment {
                    dist: RoundDistribution::Hinted(probs),
                    labels,
                })
            }
            State::Table { rounds } => {
                let row = &rounds[(t - 1) % rounds.len()];
                let dist = if self.hints.is_some() {
                    RoundDistribution::Hinted(row.probs.clone())
                } else {
                    // not validated here: certification is the harness's job
                    RoundDistribution::Smooth(SmoothDistribution::unchecked(
                        row.probs.clone(),
                        self.sigma,
                    ))
                };
                Ok(Commitment {
                    dist,
                    labels: row.labels.clone(),
                })
            }
        }
    }

    /// Check a commitment against the adversary's certificate for round `t`.
    pub fn certify(&self, t: usize, c: &Commitment) -> Result<()> {
        match (&c.dist, &self.hints) {
            (RoundDistribution::Smooth(d), _) => {
                let ok = validate_smooth(d.probs(), self.sigma)
                    .map_err(|e| LabError::contract(format!("round {t}: {e}")))?;
                if !ok {
                    return Err(LabError::contract(format!(
                        "round {t}: distribution is not {}-smooth",
                        self.sigma
                    )));
                }
            }
            (RoundDistribution::Hinted(p), Some(h)) => {
                let row = h.row(t);
                if let Some(x) = (0..p.len()).find(|&x| p[x] > 0.0 && !row.contains(&x)) {
                    return Err(LabError::contract(format!(
                        "round {t}: mass on {x} outside the hint row"
                    )));
                }
            }
            (RoundDistribution::Hinted(_), None) => {
                return Err(LabError::contract("hint-supported law without hints"));
            }
        }
        if c.labels.len() != self.domain_size {
            return Err(LabError::contract(format!(
                "round {t}: label table has wrong length"
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{
        make_partition_class, make_shatter_class, make_support_partition_class, FiniteDomain,
    };
    use crate::rng::seeded;

    fn ctx(
        class: HypothesisClass,
        horizon: usize,
        sigma: f64,
        d: usize,
        k: usize,
    ) -> AdversaryContext {
        AdversaryContext {
            class: Arc::new(class),
            horizon,
            sigma,
            d,
            k,
        }
    }

    fn play(adv: &mut Adversary, horizon: usize, seed: u64) -> Vec<PastRound> {
        let mut rng = seeded(seed);
        let mut past = Vec::new();
        for t in 1..=horizon {
            let c = adv.commit(t, &past, &mut rng).unwrap();
            adv.certify(t, &c).unwrap();
            let x = c.dist.sample(&mut rng);
            if let Some(h) = adv.hints() {
                assert!(h.contains(t, x));
            }
            past.push(PastRound {
                x,
                y_hat: 1.0,
                y: c.labels[x],
            });
        }
        past
    }

    #[test]
    fn realizable_labels_follow_target() {
        let dom = FiniteDomain::new(8).unwrap();
        let class = make_partition_class(dom, 2).unwrap();
        let c = ctx(class.clone(), 50, 1.0, 2, 1);
        let mut adv = Adversary::new(
            &AdversarySpec::RealizableSmooth { delta: None },
            &c,
            &mut seeded(4),
        )
        .unwrap();
        let past = play(&mut adv, 50, 5);
        let consistent = class
            .hypotheses()
            .iter()
            .any(|h| past.iter().all(|r| h.at(r.x) == r.y));
        assert!(consistent);
    }

    #[test]
    fn alternating_best_hypothesis_loses_half() {
        let dom = FiniteDomain::new(16).unwrap();
        let class = make_support_partition_class(dom, 4, 2).unwrap();
        let c = ctx(class.clone(), 64, 0.25, 2, 1);
        let mut adv =
            Adversary::new(&AdversarySpec::SupportAlternating {}, &c, &mut seeded(1)).unwrap();
        for seed in 0..20 {
            let past = play(&mut adv, 64, seed);
            assert!(past.iter().all(|r| r.x < 4));
            let mut counts = [0usize; 2];
            for r in &past {
                counts[r.x / 2] += 1;
            }
            let best = class
                .hypotheses()
                .iter()
                .map(|h| past.iter().filter(|r| h.at(r.x) != r.y).count())
                .min()
                .unwrap();
            // per block the best constant loses ⌊c/2⌋ of the alternating run
            assert_eq!(best, counts[0] / 2 + counts[1] / 2);
            if counts.iter().all(|c| c % 2 == 0) {
                assert_eq!(best, 32);
            }
        }
    }

    #[test]
    fn alternating_warns_on_fractional_support() {
        let dom = FiniteDomain::new(10).unwrap();
        let class = make_partition_class(dom, 1).unwrap();
        let c = ctx(class, 4, 0.25, 1, 1);
        let adv =
            Adversary::new(&AdversarySpec::SupportAlternating {}, &c, &mut seeded(1)).unwrap();
        assert_eq!(adv.warnings().len(), 1);
    }

    #[test]
    fn worst_case_negates_last_prediction() {
        let dom = FiniteDomain::new(2).unwrap();
        let class = make_partition_class(dom, 1).unwrap();
        let c = ctx(class, 4, 1.0, 1, 2);
        let mut adv =
            Adversary::new(&AdversarySpec::WorstCaseSmallDomain {}, &c, &mut seeded(1)).unwrap();
        let past = vec![
            PastRound {
                x: 0,
                y_hat: 1.0,
                y: 1.0,
            },
            PastRound {
                x: 1,
                y_hat: -1.0,
                y: 1.0,
            },
        ];
        let c3 = adv.commit(3, &past, &mut seeded(2)).unwrap();
        assert_eq!(c3.dist.probs(), &[1.0, 0.0]);
        assert_eq!(c3.labels, vec![-1.0, 1.0]);
    }

    #[test]
    fn cyclic_and_special_point_respect_hints() {
        let dom = FiniteDomain::new(8).unwrap();
        let class = make_partition_class(dom, 2).unwrap();
        let c = ctx(class, 12, 1.0, 2, 2);
        let mut adv = Adversary::new(
            &AdversarySpec::TransductiveCyclic { delta: None },
            &c,
            &mut seeded(1),
        )
        .unwrap();
        play(&mut adv, 12, 3);

        let class = make_shatter_class(dom, &[0, 4]).unwrap();
        let c = ctx(class, 8, 1.0, 2, 4);
        let mut adv = Adversary::new(
            &AdversarySpec::TransductiveSpecialPoint {},
            &c,
            &mut seeded(1),
        )
        .unwrap();
        let past = play(&mut adv, 8, 3);
        let xs: Vec<usize> = past.iter().map(|r| r.x).collect();
        let ys: Vec<f64> = past.iter().map(|r| r.y).collect();
        assert_eq!(xs, vec![0, 0, 0, 0, 4, 4, 4, 4]);
        assert_eq!(ys, vec![1.0, -1.0, 1.0, -1.0, 1.0, -1.0, 1.0, -1.0]);
    }

    #[test]
    fn certify_catches_non_smooth_table() {
        let dom = FiniteDomain::new(2).unwrap();
        let class = make_partition_class(dom, 1).unwrap();
        let c = ctx(class, 2, 1.0, 1, 1);
        let spec = AdversarySpec::CustomTable {
            rounds: vec![TableRound {
                probs: vec![1.0, 0.0],
                labels: vec![1.0, 1.0],
            }],
            hints: None,
        };
        let mut adv = Adversary::new(&spec, &c, &mut seeded(1)).unwrap();
        let commit = adv.commit(1, &[], &mut seeded(2)).unwrap();
        assert!(matches!(
            adv.certify(1, &commit),
            Err(LabError::ContractViolation(_))
        ));
    }

    #[test]
    fn biased_rule_rates() {
        assert!(biased_label_rule(&[1.0], 0.6).is_err());
        assert!(biased_label_rule(&[1.0], -0.1).is_err());
        let always = biased_label_rule(&[1.0, -1.0], 0.5).unwrap();
        let mut rng = seeded(9);
        assert!((0..1000).all(|_| always.label(1, &mut rng) == -1.0));
        let rule = biased_label_rule(&[1.0], 0.1).unwrap();
        let n = 100_000;
        let agree = (0..n).filter(|_| rule.label(0, &mut rng) == 1.0).count() as f64 / n as f64;
        assert!((agree - 0.6).abs() < 0.005, "{agree}");
        let noise = biased_label_rule(&[1.0], 0.0).unwrap();
        let agree = (0..n).filter(|_| noise.label(0, &mut rng) == 1.0).count() as f64 / n as f64;
        assert!((agree - 0.5).abs() < 0.005, "{agree}");
    }

    #[test]
    fn spec_json_roundtrip() {
        let spec: AdversarySpec =
            serde_json::from_str(r#"{"kind":"realizable_smooth","delta":0.2}"#).unwrap();
        assert_eq!(spec, AdversarySpec::RealizableSmooth { delta: Some(0.2) });
        assert!(
            serde_json::from_str::<AdversarySpec>(r#"{"kind":"support_alternating","x":1}"#)
                .is_err()
        );
        assert!(AdversarySpec::TransductiveCyclic { delta: None }.is_transductive());
    }
}
