use crate::error::{LabError, Result};

/// Default multiplier in the self-generated hint count.
pub const DEFAULT_C_K: f64 = 100.0;

fn check_sigma(sigma: f64) -> Result<()> {
    if sigma > 0.0 && sigma <= 1.0 {
        Ok(())
    } else {
        Err(LabError::input(format!("σ = {sigma} outside (0, 1]")))
    }
}

/// Hints drawn per future round by the smoothed playout learner:
/// `max(1, ⌈c_K ln T / σ⌉)`.
pub fn hint_count(horizon: usize, sigma: f64, c_k: f64) -> Result<usize> {
    check_sigma(sigma)?;
    if horizon == 0 {
        return Err(LabError::input("T must be at least 1"));
    }
    if !(c_k > 0.0 && c_k.is_finite()) {
        return Err(LabError::input(format!("c_K = {c_k} must be positive")));
    }
    let k = (c_k * (horizon as f64).ln() / sigma).ceil();
    Ok((k as usize).max(1))
}

/// Poisson mean of the perturbed leader: `min{T/√σ, T√(|X|/d)}`.
pub fn default_n(horizon: usize, sigma: f64, domain_size: usize, d: usize) -> Result<f64> {
    check_sigma(sigma)?;
    if horizon == 0 || d == 0 {
        return Err(LabError::input("T and d must be at least 1"));
    }
    if d > domain_size {
        return Err(LabError::input(format!(
            "d = {d} exceeds |X| = {domain_size}"
        )));
    }
    let t = horizon as f64;
    Ok((t / sigma.sqrt()).min(t * (domain_size as f64 / d as f64).sqrt()))
}
