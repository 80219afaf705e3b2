//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Runs without the libtest harness so the lines always print.

use std::path::PathBuf;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::{Rng, RngCore};
use smoothlab::adversary::AdversarySpec;
use smoothlab::domain::{
    ExampleMultiset, FiniteDomain, Hypothesis, HypothesisClass, LabeledExample, LossKind, LossSpec,
};
use smoothlab::harness::{
    fit_scaling, rows_to_csv, run_experiment, run_game, run_sweep, write_outputs, ClassSpec,
    ExperimentConfig, RunOptions, SCHEMA_VERSION,
};
use smoothlab::learner::{default_n, playout_prediction, LearnerSpec};
use smoothlab::oracle::{Oracle, TiePolicy};
use smoothlab::rng::seeded;
use smoothlab::verify::suite::{
    admissibility_suite, budget_suite, chi2_suite, coupling_suite, monotonicity_suite, tv_suite,
};
use smoothlab::verify::VerificationReport;
use smoothlab::Result;

/// Outcome of one criterion: verdict plus a one-line summary.
struct Outcome {
    passed: bool,
    summary: String,
}

fn outcome(passed: bool, summary: impl Into<String>) -> Result<Outcome> {
    Ok(Outcome {
        passed,
        summary: summary.into(),
    })
}

fn configs_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn load(name: &str) -> Result<ExperimentConfig> {
    ExperimentConfig::load(&configs_dir().join(name))
}

fn failures(reports: &[VerificationReport]) -> Vec<&str> {
    reports
        .iter()
        .filter(|r| !r.passed)
        .map(|r| r.check.as_str())
        .collect()
}

fn within(elapsed: Duration, limit_s: u64) -> bool {
    elapsed < Duration::from_secs(limit_s)
}

fn coupling() -> Result<Outcome> {
    let start = Instant::now();
    let reports = coupling_suite(&mut seeded(1))?;
    let elapsed = start.elapsed();
    let expected = 0.7f64.powi(20);
    let band = 4.0 * (expected * (1.0 - expected) / 1e5).sqrt();
    let mut ok = reports.len() == 2 && within(elapsed, 30);
    let mut parts = Vec::new();
    for r in &reports {
        let rate = r.get("failure_rate").unwrap_or(f64::NAN);
        let tv = r.get("conditional_tv").unwrap_or(f64::NAN);
        ok &= r.passed && (rate - expected).abs() <= band && tv <= 0.02 && r.trials == 100_000;
        parts.push(format!("Pr[E^c]={rate:.2e} TV={tv:.4}"));
    }
    outcome(
        ok,
        format!(
            "{}; band {expected:.3e}±{band:.1e}; {:.1}s",
            parts.join(", "),
            elapsed.as_secs_f64()
        ),
    )
}

fn tv_bound() -> Result<Outcome> {
    let start = Instant::now();
    let reports = tv_suite(&mut seeded(2))?;
    let elapsed = start.elapsed();
    let bad = failures(&reports);
    let worst_err = reports.iter().map(|r| r.tolerance).fold(0.0, f64::max);
    // 2 points x 4 labelings + 2 sizes x 1 labeling, each over 4 n and 5 D.
    let ok = reports.len() == 120 && bad.is_empty() && worst_err <= 1e-9 && within(elapsed, 60);
    outcome(
        ok,
        format!(
            "{} cases, {} failed, max truncation {worst_err:.1e}; {:.1}s",
            reports.len(),
            bad.len(),
            elapsed.as_secs_f64()
        ),
    )
}

fn chi2_identity() -> Result<Outcome> {
    let reports = chi2_suite(&mut seeded(3))?;
    let bad = failures(&reports);
    let worst_gap = reports
        .iter()
        .map(|r| {
            let c = r.get("closed_form").unwrap_or(f64::NAN);
            let e = r.get("enumerated").unwrap_or(f64::NAN);
            (c - e).abs()
        })
        .fold(0.0, f64::max);
    outcome(
        !reports.is_empty() && bad.is_empty() && worst_gap <= 1e-9,
        format!(
            "{} cases, {} failed, max gap {worst_gap:.1e}",
            reports.len(),
            bad.len()
        ),
    )
}

fn monotonicity() -> Result<Outcome> {
    let reports = monotonicity_suite(&mut seeded(4))?;
    let bad = failures(&reports);
    outcome(
        reports.len() == 500 && bad.is_empty(),
        format!("{} instances, {} failed", reports.len(), bad.len()),
    )
}

fn admissibility() -> Result<Outcome> {
    let reports = admissibility_suite()?;
    let (control, family): (Vec<_>, Vec<_>) = reports
        .iter()
        .partition(|r| r.check == "ftl_negative_control");
    let min_slack = family
        .iter()
        .map(|r| r.get("min_slack").unwrap_or(f64::NEG_INFINITY))
        .fold(f64::INFINITY, f64::min);
    let cond2 = family.iter().all(|r| r.get("condition_2") == Some(1.0));
    let family_ok = family.iter().all(|r| r.passed);
    let control_ok = control.len() == 1
        && control[0].passed
        && control[0].get("min_slack").is_some_and(|s| s < -1e-12);
    outcome(
        !family.is_empty() && family_ok && min_slack >= -1e-12 && cond2 && control_ok,
        format!(
            "{} tiny instances, min slack {min_slack:.1e}, final equality {cond2}; FTL control violated: {control_ok}",
            family.len()
        ),
    )
}

fn game_config(
    learner: LearnerSpec,
    adversary: AdversarySpec,
    horizon: usize,
    k: Option<usize>,
) -> ExperimentConfig {
    ExperimentConfig {
        schema_version: SCHEMA_VERSION,
        experiment_id: "acceptance".to_string(),
        learner,
        adversary,
        class: ClassSpec::Partition {
            domain_size: 16,
            d: 2,
        },
        horizon,
        sigma: 0.5,
        k,
        d: None,
        n: None,
        c_k: 100.0,
        tie: TiePolicy::LowestIndex,
        loss: LossKind::BinaryIndicator,
        seeds: vec![0],
        output: None,
        record_wall_time: false,
        sweep: None,
    }
}

fn oracle_accounting() -> Result<Outcome> {
    let horizon = 24;
    let mut exact = true;
    let mut runs = 0;
    let cases = [
        (
            LearnerSpec::TransductivePlayout {},
            AdversarySpec::TransductiveCyclic { delta: None },
            Some(2),
            2,
        ),
        (
            LearnerSpec::SmoothedPlayout {
                max_hints_per_round: None,
            },
            AdversarySpec::RealizableSmooth { delta: None },
            Some(3),
            2,
        ),
        (
            LearnerSpec::PoissonFtpl {},
            AdversarySpec::RealizableSmooth { delta: None },
            None,
            1,
        ),
    ];
    for (learner, adversary, k, per_round) in cases {
        let mut cfg = game_config(learner, adversary, horizon, k);
        cfg.loss = if per_round == 2 {
            LossKind::Absolute
        } else {
            LossKind::BinaryIndicator
        };
        for seed in 0..10 {
            let tr = run_game(&cfg, seed)?;
            runs += 1;
            exact &= tr.oracle.call_count == per_round * horizon as u64;
            exact &= tr.rounds.iter().all(|r| r.oracle_calls == per_round);
            exact &= tr.final_oracle.call_count == 1;
        }
    }

    // Per-round FTPL input length: (t-1) real examples plus Poi(n).
    let seeds = 400u64;
    let cfg = game_config(
        LearnerSpec::PoissonFtpl {},
        AdversarySpec::RealizableSmooth { delta: None },
        horizon,
        None,
    );
    let n = default_n(horizon, cfg.sigma, 16, 2)?;
    let mut sums = vec![0.0; horizon];
    for seed in 0..seeds {
        let tr = run_game(&cfg, seed)?;
        for (i, r) in tr.rounds.iter().enumerate() {
            sums[i] += r.input_length as f64;
        }
    }
    let half_width = 3.0 * (n / seeds as f64).sqrt();
    let mut worst: f64 = 0.0;
    for (i, s) in sums.iter().enumerate() {
        let mean = s / seeds as f64;
        worst = worst.max((mean - (i as f64 + n)).abs() / half_width);
    }
    outcome(
        exact && worst <= 1.0,
        format!(
            "{runs} runs with exact counts: {exact}; input length worst deviation {worst:.2} of the 3σ band (n={n:.1}, {seeds} seeds)"
        ),
    )
}

fn random_class<R: Rng + ?Sized>(rng: &mut R) -> Result<HypothesisClass> {
    let size = rng.random_range(1..=6);
    let dom = FiniteDomain::new(size)?;
    let count = rng.random_range(1..=6);
    let binary = rng.random_bool(0.5);
    let hyps = (0..count)
        .map(|_| {
            let values = (0..size)
                .map(|_| {
                    if binary {
                        if rng.random_bool(0.5) {
                            1.0
                        } else {
                            -1.0
                        }
                    } else {
                        rng.random_range(-1.0..=1.0)
                    }
                })
                .collect();
            Hypothesis::new(values)
        })
        .collect::<Result<Vec<_>>>()?;
    HypothesisClass::new(dom, hyps, 1, binary)
}

fn prediction_range() -> Result<Outcome> {
    let mut rng = seeded(7);
    let mut worst: f64 = 0.0;
    let mut rounds = 0u64;
    let losses = [
        LossSpec::absolute(),
        LossSpec::centered_binary(),
        LossSpec::binary_indicator(),
    ];
    while rounds < 10_000 {
        let class = Arc::new(random_class(&mut rng)?);
        let size = class.domain_size();
        let loss = losses[rng.random_range(0..losses.len())];
        if loss.kind.is_binary() && !class.is_binary() {
            continue;
        }
        let mut oracle = Oracle::new(Arc::clone(&class));
        let mut history = ExampleMultiset::new();
        for _ in 0..rng.random_range(0..12) {
            let y = if loss.kind.is_binary() {
                if rng.random_bool(0.5) {
                    1.0
                } else {
                    -1.0
                }
            } else {
                rng.random_range(-1.0..=1.0)
            };
            history.push(rng.random_range(0..size), y);
        }
        // Uniform hints model the smoothed learner; a hint row drawn from
        // a few points models the transductive one.
        let smoothed = rng.random_bool(0.5);
        let row: Vec<usize> = (0..rng.random_range(1..=3))
            .map(|_| rng.random_range(0..size))
            .collect();
        let mut hints = ExampleMultiset::new();
        for _ in 0..rng.random_range(0..20) {
            let z = if smoothed {
                rng.random_range(0..size)
            } else {
                row[rng.random_range(0..row.len())]
            };
            let y = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            hints.insert(LabeledExample::new(z, y), 2);
        }
        let x = rng.random_range(0..size);
        let tie = if class.is_binary() && rng.random_bool(0.3) {
            TiePolicy::PreferNegative
        } else {
            TiePolicy::SeededRandom
        };
        let y_hat = playout_prediction(
            &mut oracle,
            &history,
            &hints,
            x,
            &loss,
            tie,
            &mut rng as &mut dyn RngCore,
        )?;
        worst = worst.max(y_hat.abs());
        rounds += 1;
    }

    // Full games through both learners.
    let mut game_rounds = 0usize;
    let mut game_worst: f64 = 0.0;
    for seed in 0..40 {
        for transductive in [false, true] {
            let (learner, adversary, k) = if transductive {
                (
                    LearnerSpec::TransductivePlayout {},
                    AdversarySpec::TransductiveCyclic { delta: Some(0.1) },
                    Some(2),
                )
            } else {
                (
                    LearnerSpec::SmoothedPlayout {
                        max_hints_per_round: None,
                    },
                    AdversarySpec::RealizableSmooth { delta: Some(0.1) },
                    Some(4),
                )
            };
            let mut cfg = game_config(learner, adversary, 64, k);
            cfg.loss = LossKind::Absolute;
            let tr = run_game(&cfg, seed)?;
            game_rounds += tr.rounds.len();
            game_worst = tr
                .rounds
                .iter()
                .map(|r| r.y_hat.abs())
                .fold(game_worst, f64::max);
        }
    }
    outcome(
        worst <= 1.0 && game_worst <= 1.0,
        format!("{rounds} fuzzed rounds max |ŷ|={worst:.6}; {game_rounds} game rounds max |ŷ|={game_worst:.6}"),
    )
}

fn mean_regret(rows: &[smoothlab::harness::CsvRow]) -> f64 {
    rows.iter()
        .find(|r| r.is_aggregate())
        .map(|r| r.regret)
        .unwrap_or(f64::NAN)
}

fn separation() -> Result<Outcome> {
    let start = Instant::now();
    let ftl = run_experiment(&load("separation_ftl.json")?, RunOptions::default())?;
    let ftpl = run_experiment(&load("separation_ftpl.json")?, RunOptions::default())?;
    let elapsed = start.elapsed();
    let horizon = 512.0;
    let (r_ftl, r_ftpl) = (mean_regret(&ftl.rows), mean_regret(&ftpl.rows));
    let seeds_ok = ftl.transcripts.len() == 20 && ftpl.transcripts.len() == 20;
    outcome(
        seeds_ok && r_ftl >= 0.4 * horizon && r_ftpl <= 0.15 * horizon && within(elapsed, 300),
        format!(
            "FTL {r_ftl:.2} ≥ {:.1}; Poisson FTPL {r_ftpl:.2} ≤ {:.1}; {:.1}s",
            0.4 * horizon,
            0.15 * horizon,
            elapsed.as_secs_f64()
        ),
    )
}

fn scaling() -> Result<Outcome> {
    let start = Instant::now();
    let mut ok = true;
    let mut parts = Vec::new();
    for name in ["scaling_ftpl.json", "scaling_playout.json"] {
        let out = run_sweep(&load(name)?, RunOptions::default())?;
        let fit = fit_scaling(&out.rows)?;
        let per_t: Vec<f64> = fit.points.iter().map(|&(t, r)| r / t as f64).collect();
        let decreasing = per_t.windows(2).all(|w| w[1] < w[0]);
        let horizons: Vec<usize> = fit.points.iter().map(|p| p.0).collect();
        ok &= horizons == [128, 256, 512, 1024] && (0.3..=0.75).contains(&fit.alpha) && decreasing;
        parts.push(format!(
            "{} α={:.3} R²={:.3} regret/T decreasing: {decreasing}",
            out.rows[0].learner, fit.alpha, fit.r_squared
        ));
    }
    let elapsed = start.elapsed();
    outcome(
        ok && within(elapsed, 900),
        format!("{}; {:.1}s", parts.join("; "), elapsed.as_secs_f64()),
    )
}

fn budgets() -> Result<Outcome> {
    let reports = budget_suite()?;
    let bad = failures(&reports);
    let worst = reports
        .iter()
        .find(|r| r.check == "beta_times_t_grid")
        .and_then(|r| r.get("max_beta_t"))
        .unwrap_or(f64::NAN);
    outcome(
        bad.is_empty() && worst < 1.0,
        format!(
            "{} checks, {} failed, max βT {worst:.2e}",
            reports.len(),
            bad.len()
        ),
    )
}

fn transcripts_bytes(out: &smoothlab::harness::ExperimentOutput) -> Result<Vec<u8>> {
    let mut bytes = Vec::new();
    for tr in &out.transcripts {
        bytes.extend(tr.to_json()?.into_bytes());
        bytes.push(b'\n');
    }
    Ok(bytes)
}

fn determinism() -> Result<Outcome> {
    let dir = tempfile::tempdir()?;
    let mut ok = true;
    let mut checked = 0;
    let mut configs = vec![load("separation_ftpl.json")?, load("scaling_playout.json")?];
    let mut smoothed = game_config(
        LearnerSpec::SmoothedPlayout {
            max_hints_per_round: None,
        },
        AdversarySpec::RealizableSmooth { delta: Some(0.05) },
        48,
        Some(3),
    );
    smoothed.loss = LossKind::Absolute;
    smoothed.tie = TiePolicy::SeededRandom;
    smoothed.seeds = (0..8).collect();
    configs.push(smoothed);
    for (i, cfg) in configs.iter_mut().enumerate() {
        cfg.sweep = None;
        cfg.seeds.truncate(8);
        let first = run_experiment(
            cfg,
            RunOptions {
                seed_base: 0,
                jobs: Some(1),
            },
        )?;
        let second = run_experiment(
            cfg,
            RunOptions {
                seed_base: 0,
                jobs: Some(4),
            },
        )?;
        ok &= rows_to_csv(&first.rows)? == rows_to_csv(&second.rows)?;
        ok &= transcripts_bytes(&first)? == transcripts_bytes(&second)?;
        let paths: Vec<_> = (0..2)
            .map(|j| {
                (
                    dir.path().join(format!("{i}_{j}.csv")),
                    dir.path().join(format!("{i}_{j}.jsonl")),
                )
            })
            .collect();
        write_outputs(&first, &paths[0].0, &paths[0].1)?;
        write_outputs(&second, &paths[1].0, &paths[1].1)?;
        ok &= std::fs::read(&paths[0].0)? == std::fs::read(&paths[1].0)?;
        ok &= std::fs::read(&paths[0].1)? == std::fs::read(&paths[1].1)?;
        checked += 1;
    }
    outcome(
        ok,
        format!(
            "{checked} configs re-run (1 vs 4 workers): CSV and transcripts byte-identical: {ok}"
        ),
    )
}

type Criterion = (&'static str, fn() -> Result<Outcome>);

fn main() {
    let criteria: [Criterion; 11] = [
        ("coupling selection", coupling),
        ("poissonized TV bound", tv_bound),
        ("chi-square identity", chi2_identity),
        ("rademacher monotonicity", monotonicity),
        ("transductive admissibility", admissibility),
        ("oracle call accounting", oracle_accounting),
        ("prediction range", prediction_range),
        ("FTL vs Poisson FTPL separation", separation),
        ("sublinear regret scaling", scaling),
        ("budget formulas", budgets),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let (passed, summary) = match check() {
            Ok(o) => (o.passed, o.summary),
            Err(e) => (false, format!("error: {e}")),
        };
        if !passed {
            failed += 1;
        }
        println!(
            "{} criterion {:>2} {name}: {summary}",
            if passed { "PASS" } else { "FAIL" },
            i + 1
        );
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
