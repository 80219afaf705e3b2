//! Named batteries of checks, each returning one report per case.

use rand::Rng;
use rayon::prelude::*;

use crate::domain::{
    make_partition_class, ExampleMultiset, FiniteDomain, LabeledExample, LossSpec,
};
use crate::error::{LabError, Result};
use crate::learner::{hint_count, DEFAULT_C_K};
use crate::rng::{Purpose, Streams};

use super::admissibility::{
    admissibility_check, alternating_instance, tiny_instances, AdmissibilityLearner,
};
use super::budget::{beta_budget, eta_budget};
use super::coupling::{coupling_montecarlo, CouplingCheck};
use super::generalization::{generalization_gap_mc, GapCheck};
use super::poisson_tv::{
    chi2_expectation, chi2_ingster, chi2_mixture, shifted_poisson_tv, tv_exact_poisson,
};
use super::rademacher::{monotonicity_check, random_monotonicity_instance};
use super::relaxation::{relaxation_band_check, relaxation_value, EvalMode, RelaxationParams};
use super::report::VerificationReport;

pub const SUITES: &[&str] = &[
    "coupling",
    "tv",
    "chi2",
    "monotonicity",
    "admissibility",
    "relaxation",
    "budget",
    "shifted_poisson",
    "generalization",
];

/// Runs the suite called `name`, or every suite for `"all"`.
pub fn run_suite(name: &str, seed: u64) -> Result<Vec<VerificationReport>> {
    let streams = Streams::new(seed, 0);
    let index = |n: &str| SUITES.iter().position(|s| *s == n).unwrap_or(0) as u32;
    let run = |n: &str| -> Result<Vec<VerificationReport>> {
        let mut rng = streams.rng(0, Purpose::Verification, index(n));
        match n {
            "coupling" => coupling_suite(&mut rng),
            "tv" => tv_suite(&mut rng),
            "chi2" => chi2_suite(&mut rng),
            "monotonicity" => monotonicity_suite(&mut rng),
            "admissibility" => admissibility_suite(),
            "relaxation" => relaxation_suite(&mut rng),
            "budget" => budget_suite(),
            "shifted_poisson" => shifted_poisson_suite(),
            "generalization" => generalization_suite(&mut rng),
            other => Err(LabError::config(format!(
                "unknown suite {other:?}; expected one of {} or all",
                SUITES.join(", ")
            ))),
        }
    };
    if name == "all" {
        let parts = SUITES
            .par_iter()
            .map(|n| run(n))
            .collect::<Result<Vec<_>>>()?;
        Ok(parts.into_iter().flatten().collect())
    } else {
        run(name)
    }
}

/// Random distribution on `size` points; index 0 is uniform, 1 a point mass.
fn random_distribution<R: Rng + ?Sized>(size: usize, index: usize, rng: &mut R) -> Vec<f64> {
    match index {
        0 => vec![1.0 / size as f64; size],
        1 => {
            let mut d = vec![0.0; size];
            d[rng.random_range(0..size)] = 1.0;
            d
        }
        _ => {
            let w: Vec<f64> = (0..size)
                .map(|_| -(1.0 - rng.random::<f64>()).ln())
                .collect();
            let total: f64 = w.iter().sum();
            w.iter().map(|v| v / total).collect()
        }
    }
}

fn tightest_sigma(d: &[f64]) -> f64 {
    let max = d.iter().copied().fold(0.0, f64::max);
    (1.0 / (max * d.len() as f64)).min(1.0)
}

fn labelings(size: usize) -> Vec<Vec<f64>> {
    (0..1u32 << size)
        .map(|m| {
            (0..size)
                .map(|x| if m >> x & 1 == 1 { -1.0 } else { 1.0 })
                .collect()
        })
        .collect()
}

/// Selection lemma on `|X| = 10`, `σ = 0.3`, `m = 20`, `Q` uniform, for two
/// `σ`-smooth targets.
pub fn coupling_suite<R: Rng + ?Sized>(rng: &mut R) -> Result<Vec<VerificationReport>> {
    let q = vec![0.1; 10];
    let spread = {
        let mut p = vec![0.0; 10];
        p[..4].fill(0.25);
        p
    };
    let vertex = {
        let mut p = vec![0.0; 10];
        for x in [2, 5, 9] {
            p[x] = 1.0 / 3.0;
        }
        p
    };
    [spread, vertex]
        .iter()
        .map(|p| coupling_montecarlo(p, &q, 0.3, CouplingCheck::default(), rng))
        .collect()
}

/// Exact TV of the Poissonized mixture against `1/√(nσ)`.
pub fn tv_suite<R: Rng + ?Sized>(rng: &mut R) -> Result<Vec<VerificationReport>> {
    let mut out = Vec::new();
    for size in 2..=4usize {
        for n in [4.0, 16.0, 64.0, 256.0] {
            for i in 0..5 {
                let d = random_distribution(size, i, rng);
                let sigma = tightest_sigma(&d);
                let labels = if size == 2 {
                    labelings(2)
                } else {
                    vec![(0..size)
                        .map(|x| if x % 2 == 0 { 1.0 } else { -1.0 })
                        .collect()]
                };
                for y in labels {
                    let tv = tv_exact_poisson(n, size, &d, &y)?;
                    let bound = 1.0 / (n * sigma).sqrt();
                    out.push(
                        VerificationReport::exact(format!("poisson_tv[|X|={size},n={n},D={i}]"))
                            .with("tv", tv.value)
                            .with("sigma", sigma)
                            .bound(bound)
                            .tolerance(tv.error_bound)
                            .verdict(
                                tv.value + tv.error_bound <= bound && tv.error_bound <= 1e-9,
                                format!(
                                    "TV {:.6} (±{:.1e}) ≤ {bound:.6}",
                                    tv.value, tv.error_bound
                                ),
                            ),
                    );
                }
            }
        }
    }
    Ok(out)
}

/// Closed-form χ² against Ingster's identity and the enumerated second
/// moment, plus `TV ≤ √(χ²/2)`.
pub fn chi2_suite<R: Rng + ?Sized>(rng: &mut R) -> Result<Vec<VerificationReport>> {
    let mut out = Vec::new();
    for size in 1..=3usize {
        for n in [4.0, 16.0, 64.0, 256.0] {
            for i in 0..3 {
                let d = random_distribution(size, i, rng);
                let closed = chi2_mixture(n, size, &d)?;
                let ingster = chi2_ingster(n, size, &d)?;
                let enumerated = chi2_expectation(n, size, &d)?;
                let labels = vec![1.0; size];
                let tv = tv_exact_poisson(n, size, &d, &labels)?;
                let gap = (closed - ingster).abs().max((closed - enumerated).abs());
                let tv_bound = (closed / 2.0).sqrt();
                out.push(
                    VerificationReport::exact(format!("chi2_identity[|X|={size},n={n},D={i}]"))
                        .with("closed_form", closed)
                        .with("ingster", ingster)
                        .with("enumerated", enumerated)
                        .with("tv", tv.value)
                        .bound(tv_bound)
                        .tolerance(1e-9)
                        .verdict(
                            gap <= 1e-9 && tv.value - tv.error_bound <= tv_bound,
                            format!(
                                "χ² {closed:.9} (max gap {gap:.1e}); TV {:.6} ≤ {tv_bound:.6}",
                                tv.value
                            ),
                        ),
                );
            }
        }
    }
    Ok(out)
}

/// 500 random instances of the regularized Rademacher monotonicity check.
pub fn monotonicity_suite<R: Rng + ?Sized>(rng: &mut R) -> Result<Vec<VerificationReport>> {
    (0..500)
        .map(|i| {
            let inst = random_monotonicity_instance(rng, i)?;
            let mut r = monotonicity_check(&inst.class, &inst.z, &inst.phi, inst.x)?;
            r.check = format!("rademacher_monotonicity[{i}]");
            Ok(r)
        })
        .collect()
}

/// Exact admissibility of the transductive playout learner on the tiny
/// family, and the FTL negative control.
pub fn admissibility_suite() -> Result<Vec<VerificationReport>> {
    let family = tiny_instances()?;
    let mut out = family
        .par_iter()
        .enumerate()
        .map(|(i, inst)| {
            let mut r = admissibility_check(AdmissibilityLearner::TransductivePlayout, inst)?;
            r.check = format!("admissibility_transductive_playout[{i}]");
            Ok(r)
        })
        .collect::<Result<Vec<_>>>()?;
    let ftl = admissibility_check(AdmissibilityLearner::Ftl, &alternating_instance()?)?;
    let slack = ftl.get("min_slack").unwrap_or(f64::NAN);
    let violated = ftl.get("condition_1") == Some(0.0);
    out.push(
        VerificationReport::exact("ftl_negative_control")
            .with("min_slack", slack)
            .verdict(
                violated,
                format!("FTL condition 1 slack {slack} on the alternating instance"),
            ),
    );
    Ok(out)
}

/// Final-round equality, the `[-T, TK]` band and the FTPL `ηT` root value.
pub fn relaxation_suite<R: Rng + ?Sized>(rng: &mut R) -> Result<Vec<VerificationReport>> {
    let mut out = Vec::new();
    let loss = LossSpec::absolute();
    for i in 0..40 {
        let size = 2 * rng.random_range(1..=3);
        let class = make_partition_class(FiniteDomain::new(size)?, 2)?;
        let horizon = rng.random_range(1..=5);
        let k = rng.random_range(1..=2);
        let t = rng.random_range(0..=horizon);
        let history: ExampleMultiset = (0..t)
            .map(|_| {
                LabeledExample::new(
                    rng.random_range(0..size),
                    if rng.random_bool(0.5) { 1.0 } else { -1.0 },
                )
            })
            .collect();
        let z_len = rng.random_range(0..=(horizon - t) * k);
        let z: Vec<usize> = (0..z_len).map(|_| rng.random_range(0..size)).collect();
        let mut r = relaxation_band_check(&class, &history, &z, &loss, horizon, k)?;
        r.check = format!("relaxation_band[{i}]");
        out.push(r);

        let params = RelaxationParams::transductive(loss, t, t);
        let rel = relaxation_value(&params, &class, &history, &[], EvalMode::Exact, rng)?.value;
        let best = class
            .hypotheses()
            .iter()
            .map(|h| {
                history
                    .iter()
                    .map(|(e, c)| c as f64 * loss.value(h.at(e.x), e.y))
                    .sum::<f64>()
            })
            .fold(f64::INFINITY, f64::min);
        out.push(
            VerificationReport::exact(format!("relaxation_final[{i}]"))
                .with("relaxation", rel)
                .with("best_loss", best)
                .verdict(
                    rel == -best,
                    format!("Rel(s_1:t) = {rel}, -min L = {}", -best),
                ),
        );
    }
    let class = make_partition_class(FiniteDomain::new(4)?, 2)?;
    let eta = 0.37;
    let v = relaxation_value(
        &RelaxationParams::ftpl(9, 0, 0.0, eta),
        &class,
        &ExampleMultiset::new(),
        &[],
        EvalMode::Exact,
        rng,
    )?
    .value;
    out.push(
        VerificationReport::exact("relaxation_ftpl_root")
            .with("value", v)
            .bound(eta * 9.0)
            .verdict(v == eta * 9.0, format!("{v} vs ηT = {}", eta * 9.0)),
    );
    Ok(out)
}

/// Allowance fixtures and `βT < 1` over the default hint count grid.
pub fn budget_suite() -> Result<Vec<VerificationReport>> {
    let mut out = Vec::new();
    let e = eta_budget(16.0, 1.0, 1, 3, 1.0)?;
    let expect = [
        0.25,
        0.262_036_768_492_051_3,
        0.404_550_767_389_705_5,
        0.135_335_283_236_612_7,
    ];
    let got = [e.stability, e.generalization, e.coupling, e.tail];
    let err = got
        .iter()
        .zip(expect)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    out.push(
        VerificationReport::exact("eta_fixture")
            .with("eta", e.total)
            .bound(1.051_922_819_118_369_4)
            .tolerance(1e-5)
            .verdict(
                err <= 1e-5 && (e.total - 1.051_922_819_118_369_4).abs() <= 1e-5,
                format!("η = {}", e.total),
            ),
    );
    let cases = [
        (10, 1, 1.0, 0.0),
        (10, 5, 0.5, 15.625),
        (100, 100, 0.1, 2.656_139_888_758_754),
    ];
    for (t, k, s, want) in cases {
        let b = beta_budget(t, k, s)?;
        out.push(
            VerificationReport::exact(format!("beta_fixture[T={t},K={k},σ={s}]"))
                .with("beta", b)
                .bound(want)
                .tolerance(1e-5)
                .verdict((b - want).abs() <= 1e-5, format!("β = {b}")),
        );
    }
    let sigmas: Vec<f64> = (0..=30)
        .map(|i| 10f64.powf(-3.0 + 0.1 * i as f64))
        .collect();
    let mut worst: f64 = 0.0;
    for t in 2..=10_000usize {
        for &s in &sigmas {
            let k = hint_count(t, s, DEFAULT_C_K)?;
            worst = worst.max(beta_budget(t, k, s)? * t as f64);
        }
    }
    out.push(
        VerificationReport::exact("beta_times_t_grid")
            .with("max_beta_t", worst)
            .bound(1.0)
            .verdict(
                worst < 1.0,
                format!("max βT = {worst:.3e} over T ≤ 1e4, σ ∈ [1e-3, 1]"),
            ),
    );
    Ok(out)
}

/// `TV(Poi(λ), Poi(λ)+1) ≤ √(1/(2λ))` on a doubling grid.
pub fn shifted_poisson_suite() -> Result<Vec<VerificationReport>> {
    (0..=8)
        .map(|j| {
            let lambda = f64::from(1u32 << j);
            let tv = shifted_poisson_tv(lambda)?;
            let bound = (1.0 / (2.0 * lambda)).sqrt();
            Ok(
                VerificationReport::exact(format!("shifted_poisson_tv[λ={lambda}]"))
                    .with("tv", tv)
                    .bound(bound)
                    .verdict(tv <= bound, format!("{tv:.6} ≤ {bound:.6}")),
            )
        })
        .collect()
}

/// Modified generalization error against its budget, and its decrease
/// when `n` doubles.
pub fn generalization_suite<R: Rng + ?Sized>(rng: &mut R) -> Result<Vec<VerificationReport>> {
    let size = 16;
    let class = make_partition_class(FiniteDomain::new(size)?, 2)?;
    let labels: Vec<f64> = (0..size)
        .map(|x| if x % 3 == 0 { -1.0 } else { 1.0 })
        .collect();
    let uniform = vec![1.0 / size as f64; size];
    let mut half = vec![0.0; size];
    for x in 0..size / 2 {
        half[2 * x] = 2.0 / size as f64;
    }
    let history = ExampleMultiset::new();
    let base = GapCheck {
        n: 64.0,
        trials: 10_000,
        d: 2,
        horizon: 256,
        c: 1.0,
    };
    let mut out = Vec::new();
    let mut gaps = Vec::new();
    for (name, dist) in [("uniform", &uniform), ("half", &half)] {
        for n in [64.0, 128.0] {
            let r = generalization_gap_mc(
                &class,
                dist,
                &labels,
                &history,
                GapCheck { n, ..base },
                rng,
            )?;
            gaps.push((
                r.get("gap").unwrap_or(0.0),
                r.get("std_error").unwrap_or(0.0),
            ));
            let mut r = r;
            r.check = format!("generalization_gap[{name},n={n}]");
            out.push(r);
        }
    }
    for (i, name) in ["uniform", "half"].iter().enumerate() {
        let (g1, s1) = gaps[2 * i];
        let (g2, s2) = gaps[2 * i + 1];
        let se = (s1 * s1 + s2 * s2).sqrt();
        out.push(
            VerificationReport::monte_carlo(
                format!("generalization_gap_decreasing[{name}]"),
                2 * base.trials,
            )
            .with("gap_n", g1)
            .with("gap_2n", g2)
            .ci(3.0 * se)
            .verdict(
                g2 <= g1 + 3.0 * se,
                format!("gap {g1:.4} → {g2:.4} (3σ = {:.4})", 3.0 * se),
            ),
        );
    }
    Ok(out)
}
