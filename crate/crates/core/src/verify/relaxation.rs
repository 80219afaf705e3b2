use rand::Rng;

use crate::domain::{ExampleMultiset, HypothesisClass, LossSpec};
use crate::error::{LabError, Result};
use crate::learner::hallucinate;

use super::budget::{beta_budget, eta_budget};
use super::rademacher::{rademacher_estimate, RademacherMode};
use super::report::VerificationReport;

/// Largest number of (point, sign) configurations enumerated for the exact
/// smoothed relaxation.
pub const SMOOTHED_EXACT_LIMIT: f64 = (1u64 << 22) as f64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RelaxationMode {
    /// Regularized Rademacher complexity of the released future hints.
    Transductive,
    /// Expectation over `K(T-t)` uniform hints plus the coupling allowance `2Gβ(T-t)`.
    SmoothedReal { k: usize, sigma: f64 },
    /// Expected best hallucinated-plus-past score plus the stability allowance `η(T-t)`.
    Ftpl { n: f64, eta: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelaxationParams {
    pub mode: RelaxationMode,
    /// Loss for the real-valued modes; FTPL always uses `-y h(x)/2`.
    pub loss: LossSpec,
    pub horizon: usize,
    /// Number of rounds already played.
    pub t: usize,
}

impl RelaxationParams {
    pub fn transductive(loss: LossSpec, horizon: usize, t: usize) -> Self {
        RelaxationParams {
            mode: RelaxationMode::Transductive,
            loss,
            horizon,
            t,
        }
    }

    pub fn smoothed_real(loss: LossSpec, horizon: usize, t: usize, k: usize, sigma: f64) -> Self {
        RelaxationParams {
            mode: RelaxationMode::SmoothedReal { k, sigma },
            loss,
            horizon,
            t,
        }
    }

    pub fn ftpl(horizon: usize, t: usize, n: f64, eta: f64) -> Self {
        RelaxationParams {
            mode: RelaxationMode::Ftpl { n, eta },
            loss: LossSpec::centered_binary(),
            horizon,
            t,
        }
    }

    /// FTPL parameters with `η` taken from [`eta_budget`].
    pub fn ftpl_with_budget(
        horizon: usize,
        t: usize,
        n: f64,
        sigma: f64,
        d: usize,
        c: f64,
    ) -> Result<Self> {
        let eta = eta_budget(n, sigma, d, horizon, c)?.total;
        Ok(Self::ftpl(horizon, t, n, eta))
    }

    pub fn validate(&self) -> Result<()> {
        if self.t > self.horizon {
            return Err(LabError::input(format!(
                "t = {} exceeds T = {}",
                self.t, self.horizon
            )));
        }
        if !(self.loss.lipschitz_g > 0.0 && self.loss.lipschitz_g.is_finite()) {
            return Err(LabError::input("loss Lipschitz constant must be positive"));
        }
        match self.mode {
            RelaxationMode::Transductive => Ok(()),
            RelaxationMode::SmoothedReal { k, sigma } => {
                beta_budget(self.horizon.max(1), k, sigma).map(|_| ())
            }
            RelaxationMode::Ftpl { n, eta } => {
                if !(n >= 0.0 && n.is_finite() && eta >= 0.0 && eta.is_finite()) {
                    return Err(LabError::input("FTPL relaxation needs n ≥ 0 and η ≥ 0"));
                }
                if !self.loss.kind.is_binary() {
                    return Err(LabError::input(
                        "FTPL relaxation uses the centered binary loss",
                    ));
                }
                Ok(())
            }
        }
    }

    fn remaining(&self) -> usize {
        self.horizon - self.t
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalMode {
    Exact,
    MonteCarlo { trials: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelaxationValue {
    pub value: f64,
    pub std_error: f64,
}

/// `-L^r(h, history)` for every hypothesis.
pub fn negative_scaled_loss(
    class: &HypothesisClass,
    history: &ExampleMultiset,
    loss: &LossSpec,
) -> Result<Vec<f64>> {
    let entries: Vec<_> = history.iter().collect();
    for (e, _) in &entries {
        if e.x >= class.domain_size() {
            return Err(LabError::input(format!(
                "history point {} outside domain",
                e.x
            )));
        }
        loss.check_label(e.y)?;
    }
    let scale = 1.0 / (2.0 * loss.lipschitz_g);
    Ok(class
        .hypotheses()
        .iter()
        .map(|h| {
            -scale
                * entries
                    .iter()
                    .map(|(e, c)| *c as f64 * loss.value(h.at(e.x), e.y))
                    .sum::<f64>()
        })
        .collect())
}

fn welford(values: impl Iterator<Item = f64>) -> RelaxationValue {
    let (mut n, mut mean, mut m2) = (0u64, 0.0, 0.0);
    for v in values {
        n += 1;
        let delta = v - mean;
        mean += delta / n as f64;
        m2 += delta * (v - mean);
    }
    let se = if n > 1 {
        (m2 / (n - 1) as f64 / n as f64).sqrt()
    } else {
        0.0
    };
    RelaxationValue {
        value: mean,
        std_error: se,
    }
}

/// Evaluates the relaxation after `t` rounds with the given `history`.
///
/// In transductive mode `future` is the multiset of hints released for rounds
/// `t+1..T`; the other modes ignore it and draw their own uniform points.
pub fn relaxation_value<R: Rng + ?Sized>(
    params: &RelaxationParams,
    class: &HypothesisClass,
    history: &ExampleMultiset,
    future: &[usize],
    mode: EvalMode,
    rng: &mut R,
) -> Result<RelaxationValue> {
    params.validate()?;
    let two_g = 2.0 * params.loss.lipschitz_g;
    let phi = negative_scaled_loss(class, history, &params.loss)?;
    let size = class.domain_size();
    match params.mode {
        RelaxationMode::Transductive => {
            let r = rademacher_estimate(class, future, &phi, rademacher_mode(mode), rng)?;
            Ok(RelaxationValue {
                value: two_g * r.value,
                std_error: two_g * r.std_error,
            })
        }
        RelaxationMode::SmoothedReal { k, sigma } => {
            let m = k * params.remaining();
            let beta = beta_budget(params.horizon.max(1), k, sigma)?;
            let allowance = two_g * beta * params.remaining() as f64;
            let inner = match mode {
                EvalMode::Exact => {
                    let configs = (size as f64).powi(m as i32) * (2f64).powi(m as i32);
                    if configs > SMOOTHED_EXACT_LIMIT {
                        return Err(LabError::capacity(format!(
                            "exact smoothed relaxation needs |X|^m 2^m ≤ {SMOOTHED_EXACT_LIMIT}, got {configs}"
                        )));
                    }
                    let mut total = 0.0;
                    let mut v = vec![0usize; m];
                    let tuples = size.pow(m as u32);
                    for code in 0..tuples {
                        let mut c = code;
                        for slot in v.iter_mut() {
                            *slot = c % size;
                            c /= size;
                        }
                        total +=
                            rademacher_estimate(class, &v, &phi, RademacherMode::Exact, rng)?.value;
                    }
                    RelaxationValue {
                        value: total / tuples as f64,
                        std_error: 0.0,
                    }
                }
                EvalMode::MonteCarlo { trials } => {
                    let mut v = vec![0usize; m];
                    let mut draws = Vec::with_capacity(trials as usize);
                    for _ in 0..trials {
                        for slot in v.iter_mut() {
                            *slot = rng.random_range(0..size);
                        }
                        // two sign draws per V keep the estimate unbiased
                        let one = rademacher_estimate(
                            class,
                            &v,
                            &phi,
                            RademacherMode::MonteCarlo { trials: 2 },
                            rng,
                        )?;
                        draws.push(one.value);
                    }
                    welford(draws.into_iter())
                }
            };
            Ok(RelaxationValue {
                value: two_g * inner.value + allowance,
                std_error: two_g * inner.std_error,
            })
        }
        RelaxationMode::Ftpl { n, eta } => {
            let allowance = eta * params.remaining() as f64;
            let best = |hallucinated: &ExampleMultiset| -> f64 {
                let entries: Vec<_> = hallucinated.iter().collect();
                class
                    .hypotheses()
                    .iter()
                    .zip(&phi)
                    .map(|(h, &p)| {
                        // -Σ L(h, s̃) with L = -y h(x)/2
                        let extra: f64 = entries
                            .iter()
                            .map(|(e, c)| *c as f64 * e.y * h.at(e.x) / 2.0)
                            .sum();
                        extra + p
                    })
                    .fold(f64::NEG_INFINITY, f64::max)
            };
            let inner = if n == 0.0 {
                RelaxationValue {
                    value: best(&ExampleMultiset::new()),
                    std_error: 0.0,
                }
            } else {
                match mode {
                    EvalMode::Exact => {
                        return Err(LabError::capacity(
                            "exact FTPL relaxation is only available for n = 0",
                        ))
                    }
                    EvalMode::MonteCarlo { trials } => {
                        let mut draws = Vec::with_capacity(trials as usize);
                        for _ in 0..trials {
                            draws.push(best(&hallucinate(n, size, rng)?));
                        }
                        welford(draws.into_iter())
                    }
                }
            };
            // L^r = L for the centered binary loss (G = 1/2), so φ already holds -Σ L
            Ok(RelaxationValue {
                value: inner.value + allowance,
                std_error: inner.std_error,
            })
        }
    }
}

fn rademacher_mode(mode: EvalMode) -> RademacherMode {
    match mode {
        EvalMode::Exact => RademacherMode::Exact,
        EvalMode::MonteCarlo { trials } => RademacherMode::MonteCarlo { trials },
    }
}

/// Checks `-T ≤ 𝔑(-L^r(·, s_{1:t}), Z) ≤ TK` for `|Z| ≤ (T-t)K`, exactly.
///
/// Also records whether the tighter lower bound `-T/2` held.
pub fn relaxation_band_check(
    class: &HypothesisClass,
    history: &ExampleMultiset,
    z: &[usize],
    loss: &LossSpec,
    horizon: usize,
    k: usize,
) -> Result<VerificationReport> {
    let t = history.logical_len() as usize;
    if t > horizon || z.len() > (horizon - t) * k {
        return Err(LabError::input("band check needs t ≤ T and |Z| ≤ (T-t)K"));
    }
    let phi = negative_scaled_loss(class, history, loss)?;
    let mut unused = crate::rng::seeded(0);
    let r = rademacher_estimate(class, z, &phi, RademacherMode::Exact, &mut unused)?.value;
    let lower = -(horizon as f64);
    let upper = (horizon * k) as f64;
    Ok(VerificationReport::exact("relaxation_band")
        .with("value", r)
        .with("lower", lower)
        .with("upper", upper)
        .with("above_half_lower", f64::from(u8::from(r >= lower / 2.0)))
        .bound(upper)
        .verdict(lower <= r && r <= upper, format!("{lower} ≤ {r} ≤ {upper}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{make_partition_class, FiniteDomain, Hypothesis};
    use crate::rng::seeded;

    fn constants(size: usize) -> HypothesisClass {
        let dom = FiniteDomain::new(size).unwrap();
        let hs = vec![
            Hypothesis::constant(dom, 1.0).unwrap(),
            Hypothesis::constant(dom, -1.0).unwrap(),
        ];
        HypothesisClass::new(dom, hs, 1, true).unwrap()
    }

    #[test]
    fn final_value_is_negative_best_loss() {
        let class = make_partition_class(FiniteDomain::new(4).unwrap(), 2).unwrap();
        let hist: ExampleMultiset = [(0, 1.0), (1, -1.0), (3, -1.0)]
            .into_iter()
            .map(|(x, y)| crate::domain::LabeledExample::new(x, y))
            .collect();
        let loss = LossSpec::absolute();
        let p = RelaxationParams::transductive(loss, 3, 3);
        let v = relaxation_value(&p, &class, &hist, &[], EvalMode::Exact, &mut seeded(0)).unwrap();
        let best = class
            .hypotheses()
            .iter()
            .map(|h| {
                hist.iter()
                    .map(|(e, c)| c as f64 * loss.value(h.at(e.x), e.y))
                    .sum::<f64>()
            })
            .fold(f64::INFINITY, f64::min);
        assert_eq!(v.value, -best);
    }

    #[test]
    fn ftpl_empty_is_eta_t() {
        let class = constants(3);
        let p = RelaxationParams::ftpl(7, 0, 0.0, 0.25);
        let v = relaxation_value(
            &p,
            &class,
            &ExampleMultiset::new(),
            &[],
            EvalMode::Exact,
            &mut seeded(0),
        )
        .unwrap();
        assert_eq!(v.value, 0.25 * 7.0);
    }

    #[test]
    fn ftpl_monte_carlo_is_at_least_exact_floor() {
        // E sup ≥ sup E = 0 for the constant pair, and hallucinations are symmetric
        let class = constants(2);
        let p = RelaxationParams::ftpl(4, 0, 8.0, 0.0);
        let v = relaxation_value(
            &p,
            &class,
            &ExampleMultiset::new(),
            &[],
            EvalMode::MonteCarlo { trials: 4000 },
            &mut seeded(2),
        )
        .unwrap();
        assert!(v.value > 0.0);
    }

    #[test]
    fn transductive_root_fixture() {
        // class {±1}, G = 1/2, Z = {z, z}: 2G · E|ε₁ + ε₂| = 1
        let class = constants(1);
        let p = RelaxationParams::transductive(LossSpec::absolute(), 2, 0);
        let v = relaxation_value(
            &p,
            &class,
            &ExampleMultiset::new(),
            &[0, 0],
            EvalMode::Exact,
            &mut seeded(0),
        )
        .unwrap();
        assert_eq!(v.value, 1.0);
    }

    #[test]
    fn smoothed_exact_matches_monte_carlo() {
        let class = make_partition_class(FiniteDomain::new(4).unwrap(), 2).unwrap();
        let loss = LossSpec::absolute();
        let p = RelaxationParams::smoothed_real(loss, 4, 2, 2, 1.0);
        let hist: ExampleMultiset = [crate::domain::LabeledExample::new(1, 1.0)]
            .into_iter()
            .collect();
        let exact =
            relaxation_value(&p, &class, &hist, &[], EvalMode::Exact, &mut seeded(0)).unwrap();
        let mc = relaxation_value(
            &p,
            &class,
            &hist,
            &[],
            EvalMode::MonteCarlo { trials: 40_000 },
            &mut seeded(1),
        )
        .unwrap();
        assert!(
            (exact.value - mc.value).abs() <= 4.0 * mc.std_error,
            "{exact:?} {mc:?}"
        );
    }

    #[test]
    fn band_holds_on_constants() {
        let class = constants(2);
        let hist: ExampleMultiset = [crate::domain::LabeledExample::new(0, 1.0)]
            .into_iter()
            .collect();
        let r = relaxation_band_check(&class, &hist, &[0, 1], &LossSpec::absolute(), 3, 1).unwrap();
        assert!(r.passed);
    }
}
