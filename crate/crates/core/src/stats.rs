//! Summary statistics over repeated runs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::report::RunRecord;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub runs: usize,
    pub successes: usize,
    /// Percentage of legal runs.
    pub sr: f64,
    /// Wirelength statistics over legal runs only; absent when none succeeded.
    pub mean_hpwl: Option<f64>,
    pub min_hpwl: Option<f64>,
    /// Sample standard deviation.
    pub hwsd: Option<f64>,
    pub mean_t_g: f64,
    pub mean_t_l: f64,
    pub mean_t_w: f64,
}

pub fn aggregate(records: &[RunRecord]) -> Result<Summary> {
    if records.is_empty() {
        return Err(Error::InvalidArgument("no run records to aggregate".into()));
    }
    let n = records.len() as f64;
    let legal: Vec<f64> = records.iter().filter(|r| r.legal).map(|r| r.hpwl).collect();
    let k = legal.len();
    let (mean, min, sd) = if k == 0 {
        (None, None, None)
    } else {
        let mean = legal.iter().sum::<f64>() / k as f64;
        let min = legal.iter().copied().fold(f64::INFINITY, f64::min);
        let sd = if k > 1 {
            (legal.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1) as f64).sqrt()
        } else {
            0.0
        };
        (Some(mean), Some(min), Some(sd))
    };
    let avg = |f: fn(&RunRecord) -> f64| records.iter().map(f).sum::<f64>() / n;
    Ok(Summary {
        runs: records.len(),
        successes: k,
        sr: 100.0 * k as f64 / n,
        mean_hpwl: mean,
        min_hpwl: min,
        hwsd: sd,
        mean_t_g: avg(|r| r.t_g),
        mean_t_l: avg(|r| r.t_l),
        mean_t_w: avg(|r| r.t_w),
    })
}
