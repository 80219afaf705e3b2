use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{FiniteDomain, Hypothesis};
use crate::error::{LabError, Result};

/// Exhaustive VC search bounds.
pub const VC_MAX_DOMAIN: usize = 16;
pub const VC_MAX_CLASS: usize = 1024;

const MAX_ENUMERATED_DIM: usize = 20;

/// Enumerated hypothesis class over a finite domain.
///
/// Serializes to `{"domain_size", "hypotheses", "declared_dim", "binary"}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ClassDocument", into = "ClassDocument")]
pub struct HypothesisClass {
    domain: FiniteDomain,
    hypotheses: Vec<Hypothesis>,
    declared_dim: usize,
    binary: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ClassDocument {
    domain_size: usize,
    hypotheses: Vec<Vec<f64>>,
    declared_dim: usize,
    binary: bool,
}

impl TryFrom<ClassDocument> for HypothesisClass {
    type Error = LabError;

    fn try_from(doc: ClassDocument) -> Result<Self> {
        let domain = FiniteDomain::new(doc.domain_size)?;
        let hypotheses = doc
            .hypotheses
            .into_iter()
            .map(Hypothesis::new)
            .collect::<Result<Vec<_>>>()?;
        HypothesisClass::new(domain, hypotheses, doc.declared_dim, doc.binary)
    }
}

impl From<HypothesisClass> for ClassDocument {
    fn from(c: HypothesisClass) -> Self {
        ClassDocument {
            domain_size: c.domain.size(),
            hypotheses: c
                .hypotheses
                .into_iter()
                .map(|h| h.values().to_vec())
                .collect(),
            declared_dim: c.declared_dim,
            binary: c.binary,
        }
    }
}

impl HypothesisClass {
    pub fn new(
        domain: FiniteDomain,
        hypotheses: Vec<Hypothesis>,
        declared_dim: usize,
        binary: bool,
    ) -> Result<Self> {
        if hypotheses.is_empty() {
            return Err(LabError::input("hypothesis class must be nonempty"));
        }
        for (i, h) in hypotheses.iter().enumerate() {
            if h.len() != domain.size() {
                return Err(LabError::input(format!(
                    "hypothesis {i} has {} values, domain has {}",
                    h.len(),
                    domain.size()
                )));
            }
            if binary && !h.is_binary() {
                return Err(LabError::input(format!(
                    "hypothesis {i} is not ±1-valued but the class is flagged binary"
                )));
            }
        }
        Ok(HypothesisClass {
            domain,
            hypotheses,
            declared_dim,
            binary,
        })
    }

    pub fn domain(&self) -> FiniteDomain {
        self.domain
    }

    pub fn domain_size(&self) -> usize {
        self.domain.size()
    }

    pub fn hypotheses(&self) -> &[Hypothesis] {
        &self.hypotheses
    }

    pub fn get(&self, index: usize) -> &Hypothesis {
        &self.hypotheses[index]
    }

    pub fn len(&self) -> usize {
        self.hypotheses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hypotheses.is_empty()
    }

    pub fn declared_dim(&self) -> usize {
        self.declared_dim
    }

    pub fn is_binary(&self) -> bool {
        self.binary
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

fn sign_table(pattern: usize, blocks: &[Vec<usize>], size: usize, fill: f64) -> Vec<f64> {
    let mut values = vec![fill; size];
    for (j, block) in blocks.iter().enumerate() {
        let v = if pattern & (1 << j) == 0 { 1.0 } else { -1.0 };
        for &x in block {
            values[x] = v;
        }
    }
    values
}

fn enumerate_patterns(
    domain: FiniteDomain,
    blocks: &[Vec<usize>],
    fill: f64,
) -> Result<HypothesisClass> {
    let d = blocks.len();
    let hypotheses = (0..1usize << d)
        .map(|p| Hypothesis::new(sign_table(p, blocks, domain.size(), fill)))
        .collect::<Result<Vec<_>>>()?;
    HypothesisClass::new(domain, hypotheses, d, true)
}

/// `2^d` hypotheses, each a constant sign on every one of `d` equal
/// contiguous blocks of the domain. Hypothesis `i` is `-1` on block `j`
/// exactly when bit `j` of `i` is set.
pub fn make_partition_class(domain: FiniteDomain, d: usize) -> Result<HypothesisClass> {
    make_support_partition_class(domain, domain.size(), d)
}

/// Partition class on the leading `support_size` points: constant signs on
/// `d` equal contiguous blocks of `{0, .., support_size-1}` and `+1` on the
/// rest of the domain.
pub fn make_support_partition_class(
    domain: FiniteDomain,
    support_size: usize,
    d: usize,
) -> Result<HypothesisClass> {
    if d == 0 || d > MAX_ENUMERATED_DIM {
        return Err(LabError::input(format!(
            "d = {d} outside 1..={MAX_ENUMERATED_DIM}"
        )));
    }
    if support_size == 0 || support_size > domain.size() {
        return Err(LabError::input(format!(
            "support size {support_size} outside 1..={}",
            domain.size()
        )));
    }
    if !support_size.is_multiple_of(d) {
        return Err(LabError::input(format!(
            "support size {support_size} not divisible by d = {d}"
        )));
    }
    let width = support_size / d;
    let blocks: Vec<Vec<usize>> = (0..d)
        .map(|j| (j * width..(j + 1) * width).collect())
        .collect();
    enumerate_patterns(domain, &blocks, 1.0)
}

/// `2^d` hypotheses realizing every sign pattern on `special` and `+1`
/// everywhere else.
pub fn make_shatter_class(domain: FiniteDomain, special: &[usize]) -> Result<HypothesisClass> {
    if special.is_empty() || special.len() > MAX_ENUMERATED_DIM {
        return Err(LabError::input("need 1..=20 special points"));
    }
    let mut seen = BTreeSet::new();
    for &x in special {
        if !domain.contains(x) {
            return Err(LabError::input(format!("special point {x} outside domain")));
        }
        if !seen.insert(x) {
            return Err(LabError::input(format!("duplicate special point {x}")));
        }
    }
    let blocks: Vec<Vec<usize>> = special.iter().map(|&x| vec![x]).collect();
    enumerate_patterns(domain, &blocks, 1.0)
}

/// Largest `m` such that some `m`-subset of the domain is shattered by the
/// sign patterns of the class (`h(x) ≥ 0` read as `+1`).
pub fn compute_vc_dimension(class: &HypothesisClass) -> Result<usize> {
    let size = class.domain_size();
    if size > VC_MAX_DOMAIN || class.len() > VC_MAX_CLASS {
        return Err(LabError::capacity(format!(
            "exhaustive VC search needs |X| ≤ {VC_MAX_DOMAIN} and |H| ≤ {VC_MAX_CLASS}"
        )));
    }
    let masks: Vec<u32> = class
        .hypotheses()
        .iter()
        .map(|h| (0..size).fold(0u32, |m, x| if h.at(x) >= 0.0 { m | (1 << x) } else { m }))
        .collect();

    let shattered = |subset: u32| -> bool {
        let need = 1usize << subset.count_ones();
        if need > masks.len() {
            return false;
        }
        let patterns: BTreeSet<u32> = masks.iter().map(|m| m & subset).collect();
        patterns.len() == need
    };

    // shattering is hereditary, so stop at the first size with no witness
    let mut best = 0;
    for m in 1..=size {
        let found = (0u32..(1u32 << size))
            .filter(|s| s.count_ones() as usize == m)
            .any(shattered);
        if !found {
            break;
        }
        best = m;
    }
    Ok(best)
}
