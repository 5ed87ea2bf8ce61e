//! Small reduction helpers shared by the evaluators.

use serde::{Deserialize, Serialize};

/// Pairwise (cascade) summation in fixed order.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const LEAF: usize = 32;
    if values.len() <= LEAF {
        values.iter().sum()
    } else {
        let mid = values.len() / 2;
        pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
    }
}

/// How an expectation was computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Exact,
    MonteCarlo,
}

/// Mean, minimum and standard error of a sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    pub min: f64,
    pub std_error: f64,
    pub count: usize,
}

impl Summary {
    pub fn of(values: &[f64]) -> Self {
        let count = values.len();
        if count == 0 {
            return Summary {
                mean: f64::NAN,
                min: f64::NAN,
                std_error: f64::NAN,
                count,
            };
        }
        let mean = pairwise_sum(values) / count as f64;
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let std_error = if count > 1 {
            let dev: Vec<f64> = values.iter().map(|v| (v - mean).powi(2)).collect();
            (pairwise_sum(&dev) / (count - 1) as f64 / count as f64).sqrt()
        } else {
            0.0
        };
        Summary {
            mean,
            min,
            std_error,
            count,
        }
    }
}
