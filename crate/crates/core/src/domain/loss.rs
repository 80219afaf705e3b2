use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossKind {
    /// `1{ŷ ≠ y}` on `{-1, +1}`.
    BinaryIndicator,
    /// `-yŷ/2`; `y ∈ {-1, +1}`, `ŷ ∈ [-1, 1]`.
    CenteredBinary,
    /// `|ŷ - y| / 2`.
    Absolute,
    /// `(ŷ - y)² / 4`.
    Squared,
}

impl LossKind {
    /// Lipschitz constant in the first argument on `[-1, 1]`.
    pub fn default_lipschitz(self) -> f64 {
        match self {
            LossKind::BinaryIndicator | LossKind::CenteredBinary | LossKind::Absolute => 0.5,
            LossKind::Squared => 1.0,
        }
    }

    pub fn is_binary(self) -> bool {
        matches!(self, LossKind::BinaryIndicator | LossKind::CenteredBinary)
    }
}

/// A loss together with its Lipschitz constant `G`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossSpec {
    pub kind: LossKind,
    pub lipschitz_g: f64,
}

impl LossSpec {
    pub fn new(kind: LossKind) -> Self {
        LossSpec {
            kind,
            lipschitz_g: kind.default_lipschitz(),
        }
    }

    pub fn binary_indicator() -> Self {
        LossSpec::new(LossKind::BinaryIndicator)
    }

    pub fn centered_binary() -> Self {
        LossSpec::new(LossKind::CenteredBinary)
    }

    pub fn absolute() -> Self {
        LossSpec::new(LossKind::Absolute)
    }

    pub fn squared() -> Self {
        LossSpec::new(LossKind::Squared)
    }

    /// Checks that `y` is an admissible label for this loss.
    pub fn check_label(&self, y: f64) -> Result<()> {
        if self.kind.is_binary() {
            if y != 1.0 && y != -1.0 {
                return Err(LabError::input(format!(
                    "{:?} loss needs labels in {{-1, +1}}, got {y}",
                    self.kind
                )));
            }
        } else if !(y.is_finite() && (-1.0..=1.0).contains(&y)) {
            return Err(LabError::input(format!("label {y} outside [-1, 1]")));
        }
        Ok(())
    }

    /// Checks that `ŷ` is an admissible prediction for this loss.
    pub fn check_prediction(&self, y_hat: f64) -> Result<()> {
        match self.kind {
            LossKind::BinaryIndicator if y_hat != 1.0 && y_hat != -1.0 => Err(LabError::input(
                format!("binary indicator loss needs predictions in {{-1, +1}}, got {y_hat}"),
            )),
            _ if !(y_hat.is_finite() && (-1.0..=1.0).contains(&y_hat)) => Err(LabError::input(
                format!("prediction {y_hat} outside [-1, 1]"),
            )),
            _ => Ok(()),
        }
    }

    /// Loss value without domain checks. Callers validate once up front.
    #[inline]
    pub fn value(&self, y_hat: f64, y: f64) -> f64 {
        match self.kind {
            LossKind::BinaryIndicator => {
                if y_hat == y {
                    0.0
                } else {
                    1.0
                }
            }
            LossKind::CenteredBinary => -y * y_hat / 2.0,
            LossKind::Absolute => (y_hat - y).abs() / 2.0,
            LossKind::Squared => (y_hat - y) * (y_hat - y) / 4.0,
        }
    }

    pub fn eval(&self, y_hat: f64, y: f64) -> Result<f64> {
        self.check_prediction(y_hat)?;
        self.check_label(y)?;
        Ok(self.value(y_hat, y))
    }
}

/// Evaluates `loss(ŷ, y)` with domain checks.
pub fn loss_eval(loss: &LossSpec, y_hat: f64, y: f64) -> Result<f64> {
    loss.eval(y_hat, y)
}
