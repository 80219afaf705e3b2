use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

/// `T` hint rows of `K` domain indices each; row `t` must contain `x_t`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HintSchedule {
    rows: Vec<Vec<usize>>,
    k: usize,
}

/// How to lay out a hint schedule.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "layout", rename_all = "snake_case", deny_unknown_fields)]
pub enum HintLayout {
    /// Contiguous `K`-blocks of the domain, cycled round by round.
    Cyclic,
    /// `d` epochs of `⌈T/d⌉` rounds; epoch `j` sees block `j`.
    Epochs {
        d: usize,
    },
    /// Every row is the whole domain (`K = |X|`).
    Vacuous,
    /// `K = 1` rows spelling out a known instance sequence.
    Exact {
        xs: Vec<usize>,
    },
    Explicit {
        rows: Vec<Vec<usize>>,
    },
}

impl HintSchedule {
    pub fn new(rows: Vec<Vec<usize>>, domain_size: usize) -> Result<Self> {
        let k = rows.first().map_or(0, Vec::len);
        if k == 0 {
            return Err(LabError::input("hint rows must be nonempty"));
        }
        for (t, row) in rows.iter().enumerate() {
            if row.len() != k {
                return Err(LabError::input(format!(
                    "hint row {} has {} entries, expected {k}",
                    t + 1,
                    row.len()
                )));
            }
            if let Some(&x) = row.iter().find(|&&x| x >= domain_size) {
                return Err(LabError::input(format!("hint {x} outside domain")));
            }
        }
        Ok(HintSchedule { rows, k })
    }

    pub fn horizon(&self) -> usize {
        self.rows.len()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Row for round `t` (1-based).
    pub fn row(&self, t: usize) -> &[usize] {
        &self.rows[t - 1]
    }

    pub fn rows(&self) -> &[Vec<usize>] {
        &self.rows
    }

    pub fn contains(&self, t: usize, x: usize) -> bool {
        self.row(t).contains(&x)
    }
}

/// Block `j` of width `k` is `{jk, .., jk+k-1}`.
fn block(j: usize, k: usize) -> Vec<usize> {
    (j * k..(j + 1) * k).collect()
}

pub fn make_hint_schedule(
    layout: &HintLayout,
    horizon: usize,
    k: usize,
    domain_size: usize,
) -> Result<HintSchedule> {
    if horizon == 0 || k == 0 {
        return Err(LabError::input("hint schedule needs T, K ≥ 1"));
    }
    let rows = match layout {
        HintLayout::Cyclic => {
            if k > domain_size {
                return Err(LabError::input(format!(
                    "K = {k} exceeds |X| = {domain_size}"
                )));
            }
            let blocks = domain_size / k;
            (0..horizon).map(|t| block(t % blocks, k)).collect()
        }
        HintLayout::Epochs { d } => {
            let d = *d;
            if d == 0 || d * k > domain_size {
                return Err(LabError::input(format!(
                    "{d} epochs of width {k} do not fit in |X| = {domain_size}"
                )));
            }
            let len = horizon.div_ceil(d);
            (0..horizon)
                .map(|t| block((t / len).min(d - 1), k))
                .collect()
        }
        HintLayout::Vacuous => {
            if k != domain_size {
                return Err(LabError::input("vacuous hints need K = |X|"));
            }
            vec![(0..domain_size).collect(); horizon]
        }
        HintLayout::Exact { xs } => {
            if k != 1 || xs.len() != horizon {
                return Err(LabError::input(
                    "exact hints need K = 1 and one instance per round",
                ));
            }
            xs.iter().map(|&x| vec![x]).collect()
        }
        HintLayout::Explicit { rows } => {
            if rows.len() != horizon {
                return Err(LabError::input(format!(
                    "{} explicit rows for T = {horizon}",
                    rows.len()
                )));
            }
            rows.clone()
        }
    };
    let schedule = HintSchedule::new(rows, domain_size)?;
    if schedule.k() != k {
        return Err(LabError::input(format!(
            "rows have width {}, K = {k}",
            schedule.k()
        )));
    }
    Ok(schedule)
}
