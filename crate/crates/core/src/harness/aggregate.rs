//! Across-seed aggregation of per-seed episode CSVs.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::{Error, Result};

use super::experiment::read_episode_csv_file;

pub const DEFAULT_WINDOW: usize = 5;
pub const DEFAULT_CONFIDENCE: f64 = 0.99;

/// Which per-agent column of the episode CSV to aggregate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Column {
    Reward(usize),
    Mi(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub episode: usize,
    pub mean: f64,
    pub half_width: f64,
}

impl CurvePoint {
    pub fn ci_low(&self) -> f64 {
        self.mean - self.half_width
    }

    pub fn ci_high(&self) -> f64 {
        self.mean + self.half_width
    }
}

/// Mean over seeds of the trailing rolling reward, with a Student-t
/// confidence half-width, for every episode whose window is full.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct AggregateCurve {
    pub points: Vec<CurvePoint>,
}

/// Trailing means over `window` consecutive values; entry `k` covers
/// `values[k..k + window]`. Empty if there are fewer than `window` values.
pub fn rolling_mean(values: &[f64], window: usize) -> Vec<f64> {
    assert!(window > 0, "window must be positive");
    values
        .windows(window)
        .map(|w| w.iter().sum::<f64>() / window as f64)
        .collect()
}

/// Two-sided Student-t critical value for `n - 1` degrees of freedom.
pub fn t_critical(confidence: f64, samples: usize) -> Result<f64> {
    if samples < 2 {
        return Err(Error::Usage(
            "a t-interval needs at least two samples".into(),
        ));
    }
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(Error::Usage(format!(
            "confidence must lie in (0, 1), got {confidence}"
        )));
    }
    let dist = StudentsT::new(0.0, 1.0, (samples - 1) as f64).expect("valid degrees of freedom");
    Ok(dist.inverse_cdf(0.5 + confidence / 2.0))
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased (`n - 1`) sample variance.
pub fn sample_variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

/// Aggregates already-loaded series, one per seed, whose first value is
/// episode `first_episode`.
pub fn aggregate_series(
    series: &[Vec<f64>],
    first_episode: usize,
    window: usize,
    confidence: f64,
) -> Result<AggregateCurve> {
    let n = series.len();
    let t = t_critical(confidence, n)?;
    let len = series[0].len();
    if series.iter().any(|s| s.len() != len) {
        return Err(Error::Usage("all series must have the same length".into()));
    }
    if window == 0 {
        return Err(Error::Usage("rolling window must be positive".into()));
    }
    let rolled: Vec<Vec<f64>> = series.iter().map(|s| rolling_mean(s, window)).collect();
    let points = (0..rolled[0].len())
        .map(|k| {
            let at: Vec<f64> = rolled.iter().map(|r| r[k]).collect();
            let sd = sample_variance(&at).sqrt();
            CurvePoint {
                episode: first_episode + k + window - 1,
                mean: mean(&at),
                half_width: t * sd / (n as f64).sqrt(),
            }
        })
        .collect();
    Ok(AggregateCurve { points })
}

/// Loads a column from each seed CSV, checking that every file covers the
/// same episodes.
pub fn load_column(
    csvs: &[impl AsRef<Path>],
    column: Column,
) -> Result<(Vec<usize>, Vec<Vec<f64>>)> {
    let mut episodes: Vec<Vec<usize>> = Vec::with_capacity(csvs.len());
    let mut series = Vec::with_capacity(csvs.len());
    for path in csvs {
        let logs = read_episode_csv_file(path.as_ref())?;
        let pick = |log: &crate::maddpg::EpisodeLog| match column {
            Column::Reward(i) => log.rewards.get(i).copied(),
            Column::Mi(i) => log.mean_mi.get(i).copied(),
        };
        let values = logs
            .iter()
            .map(pick)
            .collect::<Option<Vec<f64>>>()
            .ok_or_else(|| {
                Error::Usage(format!(
                    "{} has no column {column:?}",
                    path.as_ref().display()
                ))
            })?;
        episodes.push(logs.iter().map(|l| l.episode).collect());
        series.push(values);
    }
    let reference = episodes.first().cloned().unwrap_or_default();
    let offenders: Vec<PathBuf> = csvs
        .iter()
        .zip(&episodes)
        .filter(|(_, e)| **e != reference)
        .map(|(p, _)| p.as_ref().to_path_buf())
        .collect();
    if !offenders.is_empty() {
        let names: Vec<String> = offenders.iter().map(|p| p.display().to_string()).collect();
        return Err(Error::Usage(format!(
            "episode ranges differ from {}: {}",
            csvs[0].as_ref().display(),
            names.join(", ")
        )));
    }
    Ok((reference, series))
}

/// Rolling-window mean and t-interval across seed CSVs.
pub fn aggregate(
    csvs: &[impl AsRef<Path>],
    window: usize,
    confidence: f64,
    column: Column,
) -> Result<AggregateCurve> {
    if csvs.len() < 2 {
        return Err(Error::Usage(format!(
            "aggregation needs at least 2 seed files, got {}",
            csvs.len()
        )));
    }
    let (episodes, series) = load_column(csvs, column)?;
    if episodes.is_empty() {
        return Ok(AggregateCurve::default());
    }
    if episodes.windows(2).any(|w| w[1] != w[0] + 1) {
        return Err(Error::Usage("episode indices must be consecutive".into()));
    }
    aggregate_series(&series, episodes[0], window, confidence)
}

/// Spread of episodic reward across seeds for one variant.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VarianceReport {
    pub label: String,
    pub seeds: usize,
    /// Each seed's mean episodic reward over the whole run.
    pub seed_means: Vec<f64>,
    /// Sample variance of `seed_means`.
    pub variance_of_seed_means: f64,
    /// Sample variance across seeds at each episode, averaged over episodes.
    pub mean_episode_variance: f64,
}

pub fn variance_report(label: &str, series: &[Vec<f64>]) -> Result<VarianceReport> {
    if series.len() < 2 {
        return Err(Error::Usage(
            "variance across seeds needs at least 2 seeds".into(),
        ));
    }
    let len = series[0].len();
    if len == 0 || series.iter().any(|s| s.len() != len) {
        return Err(Error::Usage(
            "all seeds must cover the same, nonempty episode range".into(),
        ));
    }
    let seed_means: Vec<f64> = series.iter().map(|s| mean(s)).collect();
    let per_episode: Vec<f64> = (0..len)
        .map(|k| sample_variance(&series.iter().map(|s| s[k]).collect::<Vec<_>>()))
        .collect();
    Ok(VarianceReport {
        label: label.to_string(),
        seeds: series.len(),
        variance_of_seed_means: sample_variance(&seed_means),
        seed_means,
        mean_episode_variance: mean(&per_episode),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn t_critical_values() {
        assert!((t_critical(0.99, 5).unwrap() - 4.604).abs() < 5e-4);
        assert!((t_critical(0.99, 2).unwrap() - 63.657).abs() < 5e-3);
        assert!(t_critical(0.99, 1).is_err());
    }

    #[test]
    fn rolling_window_of_five() {
        let r = rolling_mean(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0], 5);
        assert_eq!(r, vec![3.0, 4.0]);
        assert!(rolling_mean(&[1.0, 2.0], 5).is_empty());
    }

    #[test]
    fn identical_seeds_have_zero_width() {
        let series = vec![vec![2.5; 10]; 5];
        let curve = aggregate_series(&series, 1, 5, 0.99).unwrap();
        assert_eq!(curve.points.len(), 6);
        assert_eq!(curve.points[0].episode, 5);
        assert!(curve
            .points
            .iter()
            .all(|p| p.mean == 2.5 && p.half_width == 0.0));
    }

    #[test]
    fn two_seed_interval_by_hand() {
        // Values 0 and 2: mean 1, sample sd sqrt(2), half-width t * sqrt(2) / sqrt(2) = t.
        let curve = aggregate_series(&[vec![0.0; 5], vec![2.0; 5]], 1, 5, 0.99).unwrap();
        let p = curve.points[0];
        assert_eq!(p.mean, 1.0);
        assert!((p.half_width - 63.657).abs() < 5e-3);
        assert!(p.ci_low() <= p.mean && p.mean <= p.ci_high());
    }

    #[test]
    fn variance_report_by_hand() {
        // Seed means 2, 4, 6 -> variance 4. Episode variances 4 and 4 -> 4.
        let r = variance_report("x", &[vec![1.0, 3.0], vec![3.0, 5.0], vec![5.0, 7.0]]).unwrap();
        assert_eq!(r.seed_means, vec![2.0, 4.0, 6.0]);
        assert_eq!(r.variance_of_seed_means, 4.0);
        assert_eq!(r.mean_episode_variance, 4.0);
    }
}
