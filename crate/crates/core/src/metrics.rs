//! Empirical CDFs, percentile summaries, and the per-campaign report.

use crate::error::{Result, SimError};

/// Empirical CDF over a sample set.
#[derive(Clone, Debug)]
pub struct CdfTable {
    /// (value, cumulative probability) in nondecreasing value order.
    pub points: Vec<(f64, f64)>,
}

impl CdfTable {
    /// Lower empirical quantile: the smallest sample x with CDF(x) >= p.
    pub fn percentile(&self, p: f64) -> f64 {
        let n = self.points.len();
        let idx = ((p * n as f64).ceil() as usize).saturating_sub(1).min(n - 1);
        self.points[idx].0
    }
}

pub fn compute_cdf(samples: &[f64]) -> Result<CdfTable> {
    if samples.is_empty() {
        return Err(SimError::Domain("cannot build a CDF from zero samples".into()));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite utility samples"));
    let n = sorted.len() as f64;
    Ok(CdfTable {
        points: sorted
            .iter()
            .enumerate()
            .map(|(k, &x)| (x, (k + 1) as f64 / n))
            .collect(),
    })
}

#[derive(Clone, Debug)]
pub struct PopulationStats {
    pub samples: Vec<f64>,
    pub p10: f64,
    pub p50: f64,
    pub p90: f64,
}

impl PopulationStats {
    pub fn from_samples(samples: Vec<f64>) -> Result<Self> {
        let cdf = compute_cdf(&samples)?;
        Ok(PopulationStats {
            p10: cdf.percentile(0.10),
            p50: cdf.percentile(0.50),
            p90: cdf.percentile(0.90),
            samples,
        })
    }
}

/// Aggregated output of one Monte-Carlo campaign.
#[derive(Clone, Debug)]
pub struct MetricsReport {
    pub h2h: Option<PopulationStats>,
    pub m2m_direct: Option<PopulationStats>,
    pub pairs: Option<PopulationStats>,
    /// Mean over drops of the per-cell aggregate-utility objective.
    pub aggregate_cell_utility: f64,
    pub per_drop_objective: Vec<f64>,
}

impl MetricsReport {
    /// Raw-sample CSV in deterministic order: `population,index,value`,
    /// one line per utility sample, drops in execution order.
    pub fn samples_csv(&self) -> String {
        let mut out = String::from("population,index,value\n");
        let mut emit = |name: &str, samples: &[f64]| {
            for (i, v) in samples.iter().enumerate() {
                out.push_str(&format!("{name},{i},{v}\n"));
            }
        };
        if let Some(s) = &self.h2h {
            emit("h2h", &s.samples);
        }
        if let Some(s) = &self.m2m_direct {
            emit("m2m_direct", &s.samples);
        }
        if let Some(s) = &self.pairs {
            emit("pairs", &s.samples);
        }
        emit("objective", &self.per_drop_objective);
        out
    }

    /// CDF CSV: `population,value,prob` for each tracked population.
    pub fn cdf_csv(&self) -> Result<String> {
        let mut out = String::from("population,value,prob\n");
        let mut emit = |name: &str, samples: &[f64]| -> Result<()> {
            for (v, p) in compute_cdf(samples)?.points {
                out.push_str(&format!("{name},{v},{p}\n"));
            }
            Ok(())
        };
        if let Some(s) = &self.h2h {
            emit("h2h", &s.samples)?;
        }
        if let Some(s) = &self.m2m_direct {
            emit("m2m_direct", &s.samples)?;
        }
        if let Some(s) = &self.pairs {
            emit("pairs", &s.samples)?;
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn median_of_decile_grid() {
        let samples: Vec<f64> = (1..=10).map(|k| k as f64 / 10.0).collect();
        let cdf = compute_cdf(&samples).unwrap();
        assert_eq!(cdf.percentile(0.50), 0.5);
        assert_eq!(cdf.percentile(0.10), 0.1);
        assert_eq!(cdf.percentile(0.90), 0.9);
    }

    #[test]
    fn single_sample_percentiles() {
        let cdf = compute_cdf(&[0.7]).unwrap();
        for p in [0.01, 0.1, 0.5, 0.9, 1.0] {
            assert_eq!(cdf.percentile(p), 0.7);
        }
    }

    #[test]
    fn constant_samples_step_cdf() {
        let cdf = compute_cdf(&[0.4, 0.4, 0.4]).unwrap();
        assert!(cdf.points.iter().all(|&(x, _)| x == 0.4));
        assert_eq!(cdf.points.last().unwrap().1, 1.0);
    }

    #[test]
    fn empty_samples_is_domain_error() {
        assert!(compute_cdf(&[]).is_err());
    }

    #[test]
    fn cdf_is_nondecreasing_from_zero_to_one() {
        let samples = vec![0.9, 0.1, 0.5, 0.5, 0.2];
        let cdf = compute_cdf(&samples).unwrap();
        let mut prev = 0.0;
        for &(_, p) in &cdf.points {
            assert!(p >= prev);
            prev = p;
        }
        assert!((prev - 1.0).abs() < 1e-12);
    }
}
