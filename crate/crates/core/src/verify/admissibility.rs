use std::sync::Arc;

use crate::adversary::HintSchedule;
use crate::domain::{
    make_partition_class, make_shatter_class, ExampleMultiset, FiniteDomain, Hypothesis,
    HypothesisClass, LabeledExample, LossSpec,
};
use crate::error::{LabError, Result};
use crate::learner::{playout_prediction, Ftl, Learner};
use crate::oracle::{Oracle, TiePolicy};
use crate::rng::{seeded, Streams};

use super::relaxation::{relaxation_value, EvalMode, RelaxationParams};
use super::report::VerificationReport;

pub const TINY_MAX_DOMAIN: usize = 4;
pub const TINY_MAX_HORIZON: usize = 3;
pub const TINY_MAX_K: usize = 2;
pub const TINY_MAX_CLASS: usize = 8;
/// Slack below zero tolerated as floating-point noise.
pub const SLACK_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdmissibilityLearner {
    TransductivePlayout,
    /// Unperturbed follow-the-leader with `prefer_negative` ties, a negative control.
    Ftl,
}

impl AdmissibilityLearner {
    pub fn name(self) -> &'static str {
        match self {
            AdmissibilityLearner::TransductivePlayout => "transductive_playout",
            AdmissibilityLearner::Ftl => "ftl",
        }
    }
}

/// A hinted game small enough for exhaustive evaluation.
#[derive(Debug, Clone)]
pub struct TinyInstance {
    pub class: Arc<HypothesisClass>,
    pub hints: HintSchedule,
    pub loss: LossSpec,
}

impl TinyInstance {
    pub fn new(class: HypothesisClass, hints: HintSchedule) -> Result<Self> {
        let inst = TinyInstance {
            class: Arc::new(class),
            hints,
            loss: LossSpec::absolute(),
        };
        inst.check_capacity()?;
        Ok(inst)
    }

    fn check_capacity(&self) -> Result<()> {
        if !self.class.is_binary() {
            return Err(LabError::input("admissibility check needs a binary class"));
        }
        let within = self.class.domain_size() <= TINY_MAX_DOMAIN
            && self.hints.horizon() <= TINY_MAX_HORIZON
            && self.hints.k() <= TINY_MAX_K
            && self.class.len() <= TINY_MAX_CLASS;
        if !within {
            return Err(LabError::capacity(format!(
                "exact admissibility needs |X| ≤ {TINY_MAX_DOMAIN}, T ≤ {TINY_MAX_HORIZON}, K ≤ {TINY_MAX_K}, |H| ≤ {TINY_MAX_CLASS}"
            )));
        }
        if self
            .hints
            .rows()
            .iter()
            .flatten()
            .any(|&x| x >= self.class.domain_size())
        {
            return Err(LabError::input("hint outside the class domain"));
        }
        Ok(())
    }

    fn future(&self, t: usize) -> Vec<usize> {
        self.hints.rows()[t..].iter().flatten().copied().collect()
    }

    fn relaxation(&self, history: &ExampleMultiset, t: usize) -> Result<f64> {
        let params = RelaxationParams::transductive(self.loss, self.hints.horizon(), t);
        let mut unused = seeded(0);
        Ok(relaxation_value(
            &params,
            &self.class,
            history,
            &self.future(t),
            EvalMode::Exact,
            &mut unused,
        )?
        .value)
    }

    /// `E l(ŷ_t, y)` for the learner at round `t` after `prefix`.
    fn expected_loss(
        &self,
        learner: AdmissibilityLearner,
        prefix: &[LabeledExample],
        x: usize,
        y: f64,
    ) -> Result<f64> {
        let t = prefix.len() + 1;
        match learner {
            AdmissibilityLearner::TransductivePlayout => {
                let history: ExampleMultiset = prefix.iter().copied().collect();
                let future = self.future(t);
                let patterns = 1u32 << future.len();
                let mut oracle = Oracle::new(Arc::clone(&self.class));
                let mut unused = seeded(0);
                let mut total = 0.0;
                for signs in 0..patterns {
                    let mut hints = ExampleMultiset::new();
                    for (i, &z) in future.iter().enumerate() {
                        let e = if signs >> i & 1 == 1 { 1.0 } else { -1.0 };
                        hints.insert(LabeledExample::new(z, e), 2);
                    }
                    let y_hat = playout_prediction(
                        &mut oracle,
                        &history,
                        &hints,
                        x,
                        &self.loss,
                        TiePolicy::LowestIndex,
                        &mut unused,
                    )?;
                    total += self.loss.eval(y_hat, y)?;
                }
                Ok(total / patterns as f64)
            }
            AdmissibilityLearner::Ftl => {
                let mut ftl = Ftl::new(
                    Oracle::new(Arc::clone(&self.class)),
                    TiePolicy::PreferNegative,
                    Streams::new(0, 0),
                )?;
                for e in prefix {
                    ftl.observe(e.x, e.y)?;
                }
                let y_hat = ftl.predict(t, x)?;
                self.loss.eval(y_hat, y)
            }
        }
    }
}

fn distinct(row: &[usize]) -> Vec<usize> {
    let mut v = row.to_vec();
    v.sort_unstable();
    v.dedup();
    v
}

/// Every labeled prefix of length `len` consistent with the hint rows.
fn prefixes(hints: &HintSchedule, len: usize) -> Vec<Vec<LabeledExample>> {
    let mut out = vec![Vec::new()];
    for t in 1..=len {
        let row = distinct(hints.row(t));
        out = out
            .into_iter()
            .flat_map(|p| {
                row.iter()
                    .flat_map(move |&x| [-1.0, 1.0].map(|y| (x, y)))
                    .map(move |(x, y)| {
                        let mut q = p.clone();
                        q.push(LabeledExample::new(x, y));
                        q
                    })
            })
            .collect();
    }
    out
}

/// Exhaustively evaluates both admissibility conditions of the transductive
/// relaxation for `learner` on a tiny hinted game.
///
/// Condition 1 is checked at every prefix with the adversary's worst
/// `x_t` in the released row and worst label; the slack is
/// `Rel(s_{1:t-1}) - max_{x,y} [E l(ŷ_t, y) + Rel(s_{1:t-1} ∪ (x, y))]`.
/// Condition 2 compares `Rel(s_{1:T})` with `-min_h L(h, s_{1:T})`.
pub fn admissibility_check(
    learner: AdmissibilityLearner,
    instance: &TinyInstance,
) -> Result<VerificationReport> {
    instance.check_capacity()?;
    let horizon = instance.hints.horizon();
    let mut report = VerificationReport::exact(format!("admissibility_{}", learner.name()));
    let mut min_slack = f64::INFINITY;
    for t in 1..=horizon {
        let mut round_min = f64::INFINITY;
        for prefix in prefixes(&instance.hints, t - 1) {
            let history: ExampleMultiset = prefix.iter().copied().collect();
            let before = instance.relaxation(&history, t - 1)?;
            let mut worst = f64::NEG_INFINITY;
            for &x in &distinct(instance.hints.row(t)) {
                for y in [-1.0, 1.0] {
                    let mut next = history.clone();
                    next.push(x, y);
                    let value = instance.expected_loss(learner, &prefix, x, y)?
                        + instance.relaxation(&next, t)?;
                    worst = worst.max(value);
                }
            }
            round_min = round_min.min(before - worst);
        }
        report = report.with(&format!("slack_t{t}"), round_min);
        min_slack = min_slack.min(round_min);
    }
    let mut final_error: f64 = 0.0;
    for full in prefixes(&instance.hints, horizon) {
        let history: ExampleMultiset = full.iter().copied().collect();
        let rel = instance.relaxation(&history, horizon)?;
        let best = instance
            .class
            .hypotheses()
            .iter()
            .map(|h| {
                full.iter()
                    .map(|e| instance.loss.value(h.at(e.x), e.y))
                    .sum::<f64>()
            })
            .fold(f64::INFINITY, f64::min);
        final_error = final_error.max((rel + best).abs());
    }
    let cond1 = min_slack >= -SLACK_TOL;
    let cond2 = final_error <= SLACK_TOL;
    Ok(report
        .with("min_slack", min_slack)
        .with("final_error", final_error)
        .with("condition_1", f64::from(u8::from(cond1)))
        .with("condition_2", f64::from(u8::from(cond2)))
        .tolerance(SLACK_TOL)
        .verdict(
            cond1 && cond2,
            format!(
                "min per-round slack {min_slack:.3e}; |Rel(s_1:T) + min L| ≤ {final_error:.1e}"
            ),
        ))
}

/// The alternating instance: constants `{+1, -1}` on one point, `T = 2`,
/// `K = 1`. Under `prefer_negative` ties FTL loses the first round outright.
pub fn alternating_instance() -> Result<TinyInstance> {
    let dom = FiniteDomain::new(1)?;
    let class = HypothesisClass::new(
        dom,
        vec![
            Hypothesis::constant(dom, 1.0)?,
            Hypothesis::constant(dom, -1.0)?,
        ],
        1,
        true,
    )?;
    TinyInstance::new(class, HintSchedule::new(vec![vec![0], vec![0]], 1)?)
}

fn classes_for(size: usize) -> Result<Vec<HypothesisClass>> {
    let dom = FiniteDomain::new(size)?;
    let mut out = vec![make_partition_class(dom, 1)?];
    if size.is_multiple_of(2) {
        out.push(make_partition_class(dom, 2)?);
    }
    let special: Vec<usize> = (0..size.min(3)).collect();
    out.push(make_shatter_class(dom, &special)?);
    // a class that is not closed under negation
    let mut lopsided = vec![Hypothesis::constant(dom, 1.0)?];
    lopsided.push(Hypothesis::new(
        (0..size).map(|x| if x == 0 { -1.0 } else { 1.0 }).collect(),
    )?);
    out.push(HypothesisClass::new(dom, lopsided, 1, true)?);
    Ok(out)
}

fn schedules_for(size: usize, horizon: usize, k: usize) -> Result<Vec<HintSchedule>> {
    let cyclic = (0..horizon)
        .map(|t| (0..k).map(|j| (t * k + j) % size).collect())
        .collect();
    let fixed = (0..horizon).map(|_| (0..k).collect()).collect();
    let reversed = (0..horizon)
        .map(|t| (0..k).map(|j| size - 1 - (t * k + j) % size).collect())
        .collect();
    let mut out = Vec::new();
    for rows in [cyclic, fixed, reversed] {
        let s = HintSchedule::new(rows, size)?;
        if !out.contains(&s) {
            out.push(s);
        }
    }
    Ok(out)
}

/// The tiny-instance family: every domain size up to 4, horizon up to 3 and
/// `K ≤ min(2, |X|)`, crossed with a handful of binary classes and hint
/// layouts.
pub fn tiny_instances() -> Result<Vec<TinyInstance>> {
    let mut out = Vec::new();
    for size in 1..=TINY_MAX_DOMAIN {
        for class in classes_for(size)? {
            for horizon in 1..=TINY_MAX_HORIZON {
                for k in 1..=TINY_MAX_K.min(size) {
                    for hints in schedules_for(size, horizon, k)? {
                        out.push(TinyInstance::new(class.clone(), hints)?);
                    }
                }
            }
        }
    }
    Ok(out)
}
