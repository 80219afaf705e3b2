use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{LabError, Result};

use super::experiment::CsvRow;

/// Least-squares fit of `ln(mean regret) = intercept + α ln T`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingFit {
    pub alpha: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// `(T, mean regret)` pairs used in the fit.
    pub points: Vec<(usize, f64)>,
    pub warnings: Vec<String>,
}

/// Fits on `(T, mean regret)` pairs. Nonpositive means are dropped with a
/// warning; fewer than three usable distinct `T` is an error.
pub fn fit_points(points: &[(usize, f64)]) -> Result<ScalingFit> {
    let mut warnings = Vec::new();
    let mut used = Vec::new();
    for &(t, r) in points {
        if t == 0 || r <= 0.0 || !r.is_finite() {
            warnings.push(format!(
                "excluding T = {t}: mean regret {r} is not positive"
            ));
        } else {
            used.push((t, r));
        }
    }
    let mut distinct: Vec<usize> = used.iter().map(|p| p.0).collect();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(LabError::Fit(format!(
            "need at least 3 distinct T with positive mean regret, have {}",
            distinct.len()
        )));
    }
    let xs: Vec<f64> = used.iter().map(|p| (p.0 as f64).ln()).collect();
    let ys: Vec<f64> = used.iter().map(|p| p.1.ln()).collect();
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let alpha = sxy / sxx;
    let intercept = my - alpha * mx;
    let r_squared = if syy == 0.0 {
        1.0
    } else {
        (sxy * sxy) / (sxx * syy)
    };
    Ok(ScalingFit {
        alpha,
        intercept,
        r_squared,
        points: used,
        warnings,
    })
}

/// Groups data rows by `T`, averages regret per group and fits.
pub fn fit_scaling(rows: &[CsvRow]) -> Result<ScalingFit> {
    let mut groups: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for r in rows.iter().filter(|r| !r.is_aggregate()) {
        groups.entry(r.horizon).or_default().push(r.regret);
    }
    let points: Vec<(usize, f64)> = groups
        .into_iter()
        .map(|(t, v)| (t, v.iter().sum::<f64>() / v.len() as f64))
        .collect();
    fit_points(&points)
}

/// Identifies the rows that belong to one scaling series.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct SeriesKey {
    pub experiment_id: String,
    pub learner: String,
    pub adversary: String,
    pub class: String,
    pub sigma: String,
    pub tie_policy: String,
}

/// Splits rows into series that differ only in `T` (and the parameters
/// derived from it) and fits each.
pub fn fit_series(rows: &[CsvRow]) -> Vec<(SeriesKey, Result<ScalingFit>)> {
    let mut series: BTreeMap<SeriesKey, Vec<CsvRow>> = BTreeMap::new();
    for r in rows {
        let key = SeriesKey {
            experiment_id: r.experiment_id.clone(),
            learner: r.learner.clone(),
            adversary: r.adversary.clone(),
            class: r.class.clone(),
            sigma: r.sigma.to_string(),
            tie_policy: r.tie_policy.clone(),
        };
        series.entry(key).or_default().push(r.clone());
    }
    series
        .into_iter()
        .map(|(k, v)| (k, fit_scaling(&v)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;
    use rand::Rng;

    #[test]
    fn exact_power_laws() {
        let pts: Vec<(usize, f64)> = [64, 128, 256, 512]
            .iter()
            .map(|&t| (t, (t as f64).sqrt()))
            .collect();
        let f = fit_points(&pts).unwrap();
        assert!((f.alpha - 0.5).abs() < 1e-12);
        assert!((f.r_squared - 1.0).abs() < 1e-12);
        let pts: Vec<(usize, f64)> = [10, 20, 40].iter().map(|&t| (t, t as f64)).collect();
        assert!((fit_points(&pts).unwrap().alpha - 1.0).abs() < 1e-12);
    }

    #[test]
    fn noisy_fixture() {
        let mut rng = seeded(11);
        let pts: Vec<(usize, f64)> = [100, 200, 400, 800, 1600, 3200]
            .iter()
            .map(|&t| {
                (
                    t,
                    3.0 * (t as f64).powf(0.55) * (1.0 + rng.random_range(-0.02..0.02)),
                )
            })
            .collect();
        let a = fit_points(&pts).unwrap().alpha;
        assert!((0.50..=0.60).contains(&a), "{a}");
    }

    #[test]
    fn nonpositive_rows_excluded() {
        let f = fit_points(&[(8, -1.0), (16, 4.0), (32, 5.6), (64, 8.0)]).unwrap();
        assert_eq!(f.warnings.len(), 1);
        assert_eq!(f.points.len(), 3);
        assert!(matches!(
            fit_points(&[(8, 0.0), (16, -2.0), (32, 1.0)]),
            Err(LabError::Fit(_))
        ));
    }
}
