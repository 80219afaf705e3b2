use crate::error::{LabError, Result};

/// The four pieces of the stability allowance `η` and their sum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EtaTerms {
    /// `1/√(nσ)`, the TV part.
    pub stability: f64,
    /// `c√(d ln T/(nσ))`.
    pub generalization: f64,
    /// `nσ/(4T² ln T)`, the coupling failure part.
    pub coupling: f64,
    /// `e^{-n/8}`.
    pub tail: f64,
    pub total: f64,
}

impl EtaTerms {
    /// Budget for the modified generalization error alone.
    pub fn generalization_budget(&self) -> f64 {
        self.generalization + self.coupling + self.tail
    }
}

pub fn eta_budget(n: f64, sigma: f64, d: usize, horizon: usize, c: f64) -> Result<EtaTerms> {
    if !(n > 0.0 && n.is_finite()) {
        return Err(LabError::input(format!("n = {n} must be positive")));
    }
    if !(sigma > 0.0 && sigma <= 1.0) {
        return Err(LabError::input(format!("σ = {sigma} outside (0, 1]")));
    }
    if horizon < 2 {
        return Err(LabError::input("η needs T ≥ 2"));
    }
    if c < 0.0 {
        return Err(LabError::input("c must be nonnegative"));
    }
    let ln_t = (horizon as f64).ln();
    let ns = n * sigma;
    let stability = 1.0 / ns.sqrt();
    let generalization = c * (d as f64 * ln_t / ns).sqrt();
    let coupling = ns / (4.0 * (horizon as f64).powi(2) * ln_t);
    let tail = (-n / 8.0).exp();
    Ok(EtaTerms {
        stability,
        generalization,
        coupling,
        tail,
        total: stability + generalization + coupling + tail,
    })
}

/// Coupling failure allowance `β = 10 T K (1-σ)^K`.
pub fn beta_budget(horizon: usize, k: usize, sigma: f64) -> Result<f64> {
    if horizon == 0 || k == 0 {
        return Err(LabError::input("β needs T, K ≥ 1"));
    }
    if !(sigma > 0.0 && sigma <= 1.0) {
        return Err(LabError::input(format!("σ = {sigma} outside (0, 1]")));
    }
    Ok(10.0 * horizon as f64 * k as f64 * (1.0 - sigma).powi(k as i32))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eta_fixture() {
        // frozen from an independent high-precision evaluation
        let e = eta_budget(16.0, 1.0, 1, 3, 1.0).unwrap();
        assert!((e.stability - 0.25).abs() < 1e-12);
        assert!((e.generalization - 0.262_036_77).abs() < 1e-8);
        assert!((e.coupling - 0.404_550_77).abs() < 1e-8);
        assert!((e.tail - 0.135_335_28).abs() < 1e-8);
        assert!((e.total - 1.051_922_8).abs() < 1e-7);
        assert!(eta_budget(0.0, 1.0, 1, 3, 1.0).is_err());
        assert!(eta_budget(4.0, 1.0, 1, 1, 1.0).is_err());
    }

    #[test]
    fn eta_terms_monotone_in_n() {
        let mut prev = eta_budget(8.0, 0.5, 2, 100, 1.0).unwrap();
        for k in 4..12 {
            let e = eta_budget(2f64.powi(k), 0.5, 2, 100, 1.0).unwrap();
            assert!(e.stability < prev.stability);
            assert!(e.generalization < prev.generalization);
            assert!(e.tail < prev.tail);
            assert!(e.coupling > prev.coupling);
            prev = e;
        }
        let big = eta_budget(1e9, 1.0, 1, 10, 0.0).unwrap();
        assert!(big.coupling > 0.99 * big.total);
    }

    #[test]
    fn beta_fixtures() {
        assert_eq!(beta_budget(50, 7, 1.0).unwrap(), 0.0);
        assert!((beta_budget(10, 5, 0.5).unwrap() - 15.625).abs() < 1e-12);
        assert!((beta_budget(100, 100, 0.1).unwrap() - 2.656_139_888_758_754).abs() < 1e-9);
    }
}
