use rand::Rng;

use crate::domain::{FiniteDomain, Hypothesis, HypothesisClass};
use crate::error::{LabError, Result};

use super::report::VerificationReport;

/// Largest `|Z|` for exhaustive sign enumeration.
pub const EXACT_MAX_POINTS: usize = 16;

/// Grid used by the integer monotonicity check: every value must be an
/// integer multiple of `2^-GRID_BITS` with magnitude at most `2^GRID_RANGE_BITS`.
pub const GRID_BITS: i32 = 24;
pub const GRID_RANGE_BITS: i32 = 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RademacherMode {
    Exact,
    MonteCarlo { trials: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RademacherEstimate {
    pub value: f64,
    /// Standard error; zero for exact evaluation.
    pub std_error: f64,
}

fn check_inputs(class: &HypothesisClass, z: &[usize], phi: &[f64]) -> Result<()> {
    if class.is_empty() {
        return Err(LabError::input("empty class"));
    }
    if phi.len() != class.len() {
        return Err(LabError::input(format!(
            "regularizer has {} entries for {} hypotheses",
            phi.len(),
            class.len()
        )));
    }
    if let Some(v) = phi.iter().find(|v| !v.is_finite()) {
        return Err(LabError::input(format!(
            "regularizer value {v} is not finite"
        )));
    }
    if let Some(&x) = z.iter().find(|&&x| x >= class.domain_size()) {
        return Err(LabError::input(format!("point {x} outside domain")));
    }
    Ok(())
}

fn sup_for_signs(class: &HypothesisClass, z: &[usize], phi: &[f64], signs: u32) -> f64 {
    class
        .hypotheses()
        .iter()
        .zip(phi)
        .map(|(h, &p)| {
            let corr: f64 = z
                .iter()
                .enumerate()
                .map(|(i, &x)| {
                    if signs >> i & 1 == 1 {
                        h.at(x)
                    } else {
                        -h.at(x)
                    }
                })
                .sum();
            corr + p
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

/// `E_ε sup_h { Σ ε_i h(z_i) + Φ(h) }` over i.i.d. Rademacher signs, one per
/// element of the multiset `z` (repeated points get independent signs).
pub fn rademacher_estimate<R: Rng + ?Sized>(
    class: &HypothesisClass,
    z: &[usize],
    phi: &[f64],
    mode: RademacherMode,
    rng: &mut R,
) -> Result<RademacherEstimate> {
    check_inputs(class, z, phi)?;
    match mode {
        RademacherMode::Exact => {
            if z.len() > EXACT_MAX_POINTS {
                return Err(LabError::capacity(format!(
                    "exact Rademacher enumeration needs |Z| ≤ {EXACT_MAX_POINTS}, got {}",
                    z.len()
                )));
            }
            let patterns = 1u32 << z.len();
            let total: f64 = (0..patterns).map(|s| sup_for_signs(class, z, phi, s)).sum();
            Ok(RademacherEstimate {
                value: total / patterns as f64,
                std_error: 0.0,
            })
        }
        RademacherMode::MonteCarlo { trials } => {
            if trials < 2 {
                return Err(LabError::input("Monte Carlo needs at least two trials"));
            }
            let mut mean = 0.0;
            let mut m2 = 0.0;
            let mut signs = vec![0.0; z.len()];
            for k in 1..=trials {
                for s in signs.iter_mut() {
                    *s = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
                }
                let v = class
                    .hypotheses()
                    .iter()
                    .zip(phi)
                    .map(|(h, &p)| {
                        z.iter()
                            .zip(&signs)
                            .map(|(&x, &e)| e * h.at(x))
                            .sum::<f64>()
                            + p
                    })
                    .fold(f64::NEG_INFINITY, f64::max);
                let delta = v - mean;
                mean += delta / k as f64;
                m2 += delta * (v - mean);
            }
            let var = m2 / (trials - 1) as f64;
            Ok(RademacherEstimate {
                value: mean,
                std_error: (var / trials as f64).sqrt(),
            })
        }
    }
}

fn to_grid(v: f64) -> Option<i128> {
    let scaled = v * (2f64).powi(GRID_BITS);
    let limit = (2f64).powi(GRID_BITS + GRID_RANGE_BITS);
    (scaled.is_finite() && scaled.fract() == 0.0 && scaled.abs() <= limit).then_some(scaled as i128)
}

/// `Σ_ε max_h (...)` in grid units, i.e. `2^|Z| · 𝔑(Φ, Z) · 2^GRID_BITS`.
fn exact_sup_sum(h_grid: &[Vec<i128>], phi_grid: &[i128], z: &[usize]) -> i128 {
    (0u32..1 << z.len())
        .map(|s| {
            h_grid
                .iter()
                .zip(phi_grid)
                .map(|(h, &p)| {
                    let corr: i128 = z
                        .iter()
                        .enumerate()
                        .map(|(i, &x)| if s >> i & 1 == 1 { h[x] } else { -h[x] })
                        .sum();
                    corr + p
                })
                .max()
                .expect("nonempty class")
        })
        .sum()
}

/// Checks `𝔑(Φ, Z) ≤ 𝔑(Φ, Z ∪ {x})` in exact integer arithmetic.
///
/// All hypothesis values and regularizer entries must lie on the dyadic grid
/// (see [`GRID_BITS`]), which makes every sum exact; `|Z| + 1` is limited to
/// [`EXACT_MAX_POINTS`].
pub fn monotonicity_check(
    class: &HypothesisClass,
    z: &[usize],
    phi: &[f64],
    x: usize,
) -> Result<VerificationReport> {
    check_inputs(class, z, phi)?;
    if x >= class.domain_size() {
        return Err(LabError::input(format!("point {x} outside domain")));
    }
    if z.len() + 1 > EXACT_MAX_POINTS {
        return Err(LabError::capacity(format!(
            "monotonicity check needs |Z| < {EXACT_MAX_POINTS}, got {}",
            z.len()
        )));
    }
    let off_grid = |v: f64| LabError::input(format!("value {v} is not on the 2^-{GRID_BITS} grid"));
    let h_grid = class
        .hypotheses()
        .iter()
        .map(|h| {
            h.values()
                .iter()
                .map(|&v| to_grid(v).ok_or_else(|| off_grid(v)))
                .collect()
        })
        .collect::<Result<Vec<Vec<i128>>>>()?;
    let phi_grid = phi
        .iter()
        .map(|&v| to_grid(v).ok_or_else(|| off_grid(v)))
        .collect::<Result<Vec<i128>>>()?;
    let before = exact_sup_sum(&h_grid, &phi_grid, z);
    let mut grown = z.to_vec();
    grown.push(x);
    let after = exact_sup_sum(&h_grid, &phi_grid, &grown);
    // 𝔑(Z) = before / 2^|Z| and 𝔑(Z ∪ {x}) = after / 2^{|Z|+1}
    let lhs = 2 * before;
    let scale = (2f64).powi(GRID_BITS) * (1u64 << grown.len()) as f64;
    Ok(VerificationReport::exact("rademacher_monotonicity")
        .with("before", lhs as f64 / scale)
        .with("after", after as f64 / scale)
        .with("points", z.len() as f64)
        .verdict(
            lhs <= after,
            format!("2·Σ_ε sup over Z = {lhs}, Σ_ε sup over Z∪{{{x}}} = {after} (grid units)"),
        ))
}

/// A randomized input for [`monotonicity_check`].
#[derive(Debug, Clone)]
pub struct MonotonicityInstance {
    pub class: HypothesisClass,
    pub z: Vec<usize>,
    pub phi: Vec<f64>,
    pub x: usize,
}

/// Draws a random binary class on a small domain, a multiset `Z`, a grid
/// regularizer and a point. Every fourth instance uses a large-spread `Φ`.
pub fn random_monotonicity_instance<R: Rng + ?Sized>(
    rng: &mut R,
    index: usize,
) -> Result<MonotonicityInstance> {
    let size = rng.random_range(1..=6);
    let domain = FiniteDomain::new(size)?;
    let count = rng.random_range(1..=8);
    let hypotheses = (0..count)
        .map(|_| {
            Hypothesis::new(
                (0..size)
                    .map(|_| if rng.random_bool(0.5) { 1.0 } else { -1.0 })
                    .collect(),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let class = HypothesisClass::new(domain, hypotheses, 0, true)?;
    let z_len = rng.random_range(0..=8);
    let z = (0..z_len).map(|_| rng.random_range(0..size)).collect();
    let spread: i64 = if index % 4 == 3 { 1 << 20 } else { 1 << 4 };
    let phi = (0..count)
        .map(|_| {
            let ticks = rng.random_range(-spread..=spread);
            ticks as f64 / 16.0
        })
        .collect();
    Ok(MonotonicityInstance {
        class,
        z,
        phi,
        x: rng.random_range(0..size),
    })
}
