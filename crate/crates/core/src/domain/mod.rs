//! Instance spaces, hypothesis classes, losses and smooth distributions.
//!
//! Everything here is an immutable value once constructed, so the types are
//! freely shared across concurrent runs.

mod class;
mod dist;
mod loss;
mod sample;

pub use class::{
    compute_vc_dimension, make_partition_class, make_shatter_class, make_support_partition_class,
    HypothesisClass, VC_MAX_CLASS, VC_MAX_DOMAIN,
};
pub use dist::{
    check_probability_vector, smooth_vertices, validate_smooth, SmoothDistribution, PROB_SUM_TOL,
    SMOOTH_TOL,
};
pub use loss::{loss_eval, LossKind, LossSpec};
pub use sample::{ExampleMultiset, LabeledExample};

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

/// Finite instance space `{0, .., size-1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FiniteDomain {
    size: usize,
}

impl FiniteDomain {
    pub fn new(size: usize) -> Result<Self> {
        if size == 0 {
            return Err(LabError::input("domain size must be at least 1"));
        }
        Ok(FiniteDomain { size })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn contains(&self, x: usize) -> bool {
        x < self.size
    }
}

/// A value table over the domain with entries in `[-1, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Hypothesis {
    values: Vec<f64>,
}

impl Hypothesis {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(v) = values
            .iter()
            .find(|v| !(v.is_finite() && (-1.0..=1.0).contains(*v)))
        {
            return Err(LabError::input(format!(
                "hypothesis value {v} outside [-1, 1]"
            )));
        }
        Ok(Hypothesis { values })
    }

    pub fn constant(domain: FiniteDomain, value: f64) -> Result<Self> {
        Hypothesis::new(vec![value; domain.size()])
    }

    #[inline]
    pub fn at(&self, x: usize) -> f64 {
        self.values[x]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_binary(&self) -> bool {
        self.values.iter().all(|&v| v == 1.0 || v == -1.0)
    }
}
