use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::adversary::AdversarySpec;
use crate::domain::{
    make_partition_class, make_shatter_class, make_support_partition_class, FiniteDomain,
    Hypothesis, HypothesisClass, LossKind, LossSpec,
};
use crate::error::{LabError, Result};
use crate::learner::{LearnerSpec, DEFAULT_C_K};
use crate::oracle::TiePolicy;

pub const SCHEMA_VERSION: u32 = 1;

/// How to build the hypothesis class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ClassSpec {
    Partition {
        domain_size: usize,
        d: usize,
    },
    SupportPartition {
        domain_size: usize,
        support_size: usize,
        d: usize,
    },
    Shatter {
        domain_size: usize,
        special: Vec<usize>,
    },
    /// An inline class document.
    Explicit {
        domain_size: usize,
        hypotheses: Vec<Vec<f64>>,
        declared_dim: usize,
        binary: bool,
    },
}

impl ClassSpec {
    pub fn build(&self) -> Result<HypothesisClass> {
        match self {
            ClassSpec::Partition { domain_size, d } => {
                make_partition_class(FiniteDomain::new(*domain_size)?, *d)
            }
            ClassSpec::SupportPartition {
                domain_size,
                support_size,
                d,
            } => make_support_partition_class(FiniteDomain::new(*domain_size)?, *support_size, *d),
            ClassSpec::Shatter {
                domain_size,
                special,
            } => make_shatter_class(FiniteDomain::new(*domain_size)?, special),
            ClassSpec::Explicit {
                domain_size,
                hypotheses,
                declared_dim,
                binary,
            } => {
                let hs = hypotheses
                    .iter()
                    .map(|v| Hypothesis::new(v.clone()))
                    .collect::<Result<Vec<_>>>()?;
                HypothesisClass::new(FiniteDomain::new(*domain_size)?, hs, *declared_dim, *binary)
            }
        }
    }

    /// Short label for the CSV `class` column.
    pub fn label(&self) -> String {
        match self {
            ClassSpec::Partition { domain_size, d } => format!("partition_X{domain_size}_d{d}"),
            ClassSpec::SupportPartition {
                domain_size,
                support_size,
                d,
            } => format!("support_partition_X{domain_size}_s{support_size}_d{d}"),
            ClassSpec::Shatter {
                domain_size,
                special,
            } => format!("shatter_X{domain_size}_d{}", special.len()),
            ClassSpec::Explicit {
                domain_size,
                hypotheses,
                ..
            } => format!("explicit_X{domain_size}_h{}", hypotheses.len()),
        }
    }
}

/// Value lists to cross for a sweep; absent axes keep the base value.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepGrid {
    #[serde(default)]
    pub horizon: Vec<usize>,
    #[serde(default)]
    pub sigma: Vec<f64>,
    #[serde(default)]
    pub k: Vec<usize>,
    #[serde(default)]
    pub n: Vec<f64>,
}

fn default_c_k() -> f64 {
    DEFAULT_C_K
}

fn default_loss() -> LossKind {
    LossKind::Absolute
}

fn default_id() -> String {
    "experiment".to_string()
}

/// One experiment: a learner against an adversary over a list of seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    #[serde(default = "default_id")]
    pub experiment_id: String,
    pub learner: LearnerSpec,
    pub adversary: AdversarySpec,
    pub class: ClassSpec,
    pub horizon: usize,
    pub sigma: f64,
    /// Hint count: the adversary's block width in the transductive game,
    /// an override of the self-generated count otherwise.
    #[serde(default)]
    pub k: Option<usize>,
    /// Defaults to the class's declared dimension.
    #[serde(default)]
    pub d: Option<usize>,
    #[serde(default)]
    pub n: Option<f64>,
    #[serde(default = "default_c_k")]
    pub c_k: f64,
    #[serde(default)]
    pub tie: TiePolicy,
    #[serde(default = "default_loss")]
    pub loss: LossKind,
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub record_wall_time: bool,
    #[serde(default)]
    pub sweep: Option<SweepGrid>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| LabError::config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| LabError::config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn loss_spec(&self) -> LossSpec {
        LossSpec::new(self.loss)
    }

    /// First 16 hex digits of the SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        hex::encode(&Sha256::digest(canonical.as_bytes())[..8])
    }

    /// Effective `d`: the override or the class's declared dimension.
    pub fn dimension(&self, class: &HypothesisClass) -> usize {
        self.d.unwrap_or_else(|| class.declared_dim().max(1))
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(LabError::config(format!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        if self.experiment_id.is_empty()
            || !self
                .experiment_id
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || "_-.".contains(c))
        {
            return Err(LabError::config(
                "experiment_id must be nonempty [A-Za-z0-9_.-]",
            ));
        }
        if self.seeds.is_empty() {
            return Err(LabError::config("at least one seed is required"));
        }
        let mut sorted = self.seeds.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != self.seeds.len() {
            return Err(LabError::config("seeds must be distinct"));
        }
        if !(self.sigma > 0.0 && self.sigma <= 1.0) {
            return Err(LabError::config(format!(
                "sigma = {} outside (0, 1]",
                self.sigma
            )));
        }
        if !(self.c_k > 0.0 && self.c_k.is_finite()) {
            return Err(LabError::config("c_k must be positive"));
        }
        if let Some(n) = self.n {
            if !(n >= 0.0 && n.is_finite()) {
                return Err(LabError::config("n must be finite and ≥ 0"));
            }
        }
        if self.k == Some(0) || self.d == Some(0) {
            return Err(LabError::config("k and d must be at least 1 when given"));
        }
        let class = self
            .class
            .build()
            .map_err(|e| LabError::config(format!("class: {e}")))?;
        let binary_only = matches!(
            self.learner,
            LearnerSpec::PoissonFtpl {} | LearnerSpec::Ftl {}
        ) || matches!(
            self.learner,
            LearnerSpec::Doubling {
                base: crate::learner::DoublingBase::PoissonFtpl,
                ..
            }
        );
        if binary_only && !class.is_binary() {
            return Err(LabError::config(format!(
                "{} needs a binary class",
                self.learner.name()
            )));
        }
        if self.loss.is_binary() && !class.is_binary() {
            return Err(LabError::config("binary loss needs a binary class"));
        }
        if self.learner.needs_hints() && !self.adversary.is_transductive() {
            return Err(LabError::config(format!(
                "{} needs hints but adversary {} releases none",
                self.learner.name(),
                self.adversary.name()
            )));
        }
        if matches!(
            self.adversary,
            AdversarySpec::TransductiveCyclic { .. } | AdversarySpec::TransductiveSpecialPoint {}
        ) && self.k.is_none()
        {
            return Err(LabError::config(format!(
                "adversary {} needs k",
                self.adversary.name()
            )));
        }
        if let Some(grid) = &self.sweep {
            if grid.horizon.is_empty()
                && grid.sigma.is_empty()
                && grid.k.is_empty()
                && grid.n.is_empty()
            {
                return Err(LabError::config("sweep grid has no axes"));
            }
            if grid.sigma.iter().any(|&s| !(s > 0.0 && s <= 1.0)) {
                return Err(LabError::config("sweep sigma values must lie in (0, 1]"));
            }
            if grid.k.contains(&0) || grid.n.iter().any(|&n| !(n >= 0.0 && n.is_finite())) {
                return Err(LabError::config("sweep k must be ≥ 1 and n finite ≥ 0"));
            }
        }
        Ok(())
    }

    /// One config per point of the sweep grid, in row-major order
    /// (horizon, sigma, k, n). Without a grid, the config itself.
    pub fn grid_points(&self) -> Vec<ExperimentConfig> {
        let Some(grid) = &self.sweep else {
            return vec![self.clone()];
        };
        let or_base = |v: Vec<Option<f64>>| if v.is_empty() { vec![None] } else { v };
        let horizons: Vec<Option<usize>> = if grid.horizon.is_empty() {
            vec![None]
        } else {
            grid.horizon.iter().map(|&t| Some(t)).collect()
        };
        let sigmas = or_base(grid.sigma.iter().map(|&s| Some(s)).collect());
        let ks: Vec<Option<usize>> = if grid.k.is_empty() {
            vec![None]
        } else {
            grid.k.iter().map(|&k| Some(k)).collect()
        };
        let ns = or_base(grid.n.iter().map(|&n| Some(n)).collect());
        let mut out = Vec::new();
        for &t in &horizons {
            for &s in &sigmas {
                for &k in &ks {
                    for &n in &ns {
                        let mut c = self.clone();
                        c.sweep = None;
                        if let Some(t) = t {
                            c.horizon = t;
                        }
                        if let Some(s) = s {
                            c.sigma = s;
                        }
                        if k.is_some() {
                            c.k = k;
                        }
                        if n.is_some() {
                            c.n = n;
                        }
                        out.push(c);
                    }
                }
            }
        }
        out
    }
}
