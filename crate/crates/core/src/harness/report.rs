use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::stats::Method;
use crate::Result;

/// Statistics of `D(t, Z)` over codewords at one time step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerTime {
    pub t: usize,
    pub mean: f64,
    pub min: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub std_error: Option<f64>,
}

/// Distortion of one scheme against one prior.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistortionReport {
    pub label: String,
    pub method: Method,
    /// Support points enumerated or Monte Carlo draws.
    pub samples: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub per_time: Vec<PerTime>,
    pub d_e: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d_e_std_error: Option<f64>,
    pub d_w: f64,
    pub d_e_max: f64,
    pub d_w_max: f64,
    /// Scenario-specific scalars (corpus statistics, ratios, flags).
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub extras: BTreeMap<String, f64>,
}

impl DistortionReport {
    pub fn ratio(&self) -> f64 {
        self.d_e / self.d_e_max
    }

    /// Violations of `0 ≤ D_W ≤ D_E`, `D_E ≤ D_E^max + z·SE` and
    /// `D_W ≤ D_W^max` (with a small relative slack for rounding).
    pub fn bound_violations(&self, z: f64) -> Vec<String> {
        let slack = 1e-9 * (1.0 + self.d_e_max.abs());
        let se = self.d_e_std_error.unwrap_or(0.0);
        let mut out = Vec::new();
        if self.d_w < -slack {
            out.push(format!("D_W = {} is negative", self.d_w));
        }
        if self.d_w > self.d_e + slack + z * se {
            out.push(format!("D_W = {} exceeds D_E = {}", self.d_w, self.d_e));
        }
        if self.d_e > self.d_e_max + slack + z * se {
            out.push(format!("D_E = {} exceeds D_E^max = {}", self.d_e, self.d_e_max));
        }
        if self.d_w > self.d_w_max + slack {
            out.push(format!("D_W = {} exceeds D_W^max = {}", self.d_w, self.d_w_max));
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    /// Per-time table with header `t,D_t_mean,D_t_min,D_t_se`.
    pub fn write_per_time_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["t", "D_t_mean", "D_t_min", "D_t_se"])?;
        for row in &self.per_time {
            w.write_record([
                row.t.to_string(),
                fmt_f64(row.mean),
                fmt_f64(row.min),
                row.std_error.map(fmt_f64).unwrap_or_default(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Round-trip decimal form with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report() -> DistortionReport {
        DistortionReport {
            label: "x".into(),
            method: Method::Exact,
            samples: 3,
            seed: None,
            per_time: vec![PerTime {
                t: 1,
                mean: 0.1,
                min: 0.0,
                std_error: None,
            }],
            d_e: 0.1,
            d_e_std_error: None,
            d_w: 0.0,
            d_e_max: 0.2,
            d_w_max: 0.2,
            extras: BTreeMap::new(),
        }
    }

    #[test]
    fn csv_has_header_and_full_precision() {
        let mut buf = Vec::new();
        report().write_per_time_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("t,D_t_mean,D_t_min,D_t_se"));
        let row: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(row[1].parse::<f64>().unwrap(), 0.1);
        assert_eq!(row[3], "");
    }

    #[test]
    fn fmt_round_trips() {
        for v in [0.1, 1.0 / 3.0, 1e-300, -2.5e10, std::f64::consts::PI] {
            assert_eq!(fmt_f64(v).parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn bound_checks() {
        assert!(report().bound_violations(3.0).is_empty());
        let mut r = report();
        r.d_e = 0.3;
        assert_eq!(r.bound_violations(3.0).len(), 1);
        r.d_w = 0.5;
        assert_eq!(r.bound_violations(3.0).len(), 3);
    }

    #[test]
    fn json_round_trip() {
        let r = report();
        let back: DistortionReport = serde_json::from_str(&r.to_json().unwrap()).unwrap();
        assert_eq!(back, r);
    }
}
