//! The serialized measurement report: constants, collapse curves, verdicts
//! with their tolerances, and provenance (config hash, seeds). Reports with
//! identical config and seeds are byte-identical except for the explicit
//! timestamp field.

use crate::error::Result;
use crate::estimates::{
    ForcedResponse, ScalingCheckResult, SemigroupMeasurement, TheoremBoundsReport,
};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::Path;

pub const SCHEMA_VERSION: u32 = 1;

/// One pass/fail decision with the number it was computed from.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Verdict {
    pub name: String,
    pub pass: bool,
    pub measured: f64,
    pub threshold: f64,
    /// How `measured` relates to `threshold`, e.g. `<=` or `within-2x-of-median`.
    pub comparison: String,
    pub detail: String,
}

impl Verdict {
    pub fn le(name: &str, measured: f64, threshold: f64, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            pass: measured <= threshold,
            measured,
            threshold,
            comparison: "<=".into(),
            detail: detail.into(),
        }
    }

    pub fn boolean(name: &str, pass: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            pass,
            measured: if pass { 1.0 } else { 0.0 },
            threshold: 1.0,
            comparison: "==".into(),
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Provenance {
    pub config_hash: String,
    pub seeds: Vec<u64>,
    /// Excluded from idempotence comparisons.
    pub timestamp_unix: u64,
}

/// Kernel-duality measurement summary.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KernelDualityReport {
    pub points_per_dim: usize,
    /// `(dimension, max relative disagreement)`.
    pub per_dim: Vec<(usize, f64)>,
    pub max_rel_disagreement: f64,
    pub max_tail_bound: f64,
}

/// Picard vs integrator cross-check summary.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PicardCrosscheckReport {
    pub t: f64,
    pub iterations: usize,
    pub quadrature_nodes: usize,
    pub sup_difference: f64,
    pub iterate_diffs: Vec<f64>,
    /// `(sample_every, Duhamel residual)` at decreasing cadence spacing.
    pub residuals: Vec<(usize, f64)>,
    /// Log-log slope of residual vs spacing.
    pub residual_order: f64,
}

/// g-system consistency summary.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GSystemReport {
    pub encoding_sup_difference: f64,
    pub c_g: f64,
    pub c0_g: f64,
    pub window_end: f64,
    pub max_sup_over_window: f64,
    pub initial_sup: f64,
}

/// Everything a harness run can measure, with empty sections omitted.
#[derive(Debug, Clone, Serialize, Deserialize, Default)]
pub struct EstimateReport {
    pub schema_version: u32,
    pub experiment: String,
    pub provenance: Option<Provenance>,
    pub verdicts: Vec<Verdict>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub semigroup: Option<SemigroupMeasurement>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub forced: Option<ForcedResponse>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theorem: Option<TheoremBoundsReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scaling: Option<ScalingCheckResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kernel: Option<KernelDualityReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub picard: Option<PicardCrosscheckReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub g_system: Option<GSystemReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub v_trace: Option<Vec<(f64, f64)>>,
}

impl EstimateReport {
    pub fn new(experiment: &str) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            experiment: experiment.into(),
            ..Default::default()
        }
    }

    pub fn all_pass(&self) -> bool {
        self.verdicts.iter().all(|v| v.pass)
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text + "\n")?;
        Ok(())
    }

    pub fn read_json(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }

    /// One line per verdict plus a final PASS/FAIL, the CLI summary.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        for v in &self.verdicts {
            out.push_str(&format!(
                "[{}] {}: measured {:.6e} {} {:.6e}  ({})\n",
                if v.pass { "PASS" } else { "FAIL" },
                v.name,
                v.measured,
                v.comparison,
                v.threshold,
                v.detail
            ));
        }
        out.push_str(&format!(
            "overall: {}\n",
            if self.all_pass() { "PASS" } else { "FAIL" }
        ));
        out
    }
}

/// SHA-256 of the canonical (sorted-key) JSON encoding.
pub fn config_hash(value: &serde_json::Value) -> String {
    // serde_json maps are ordered, so to_string is canonical.
    let text = serde_json::to_string(value).expect("value serializes");
    let mut hasher = Sha256::new();
    hasher.update(text.as_bytes());
    hex_string(&hasher.finalize())
}

fn hex_string(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Collapse curves as CSV: `amplitude,seed,j,t,t_scaled,ratio`.
pub fn write_collapse_csv(report: &TheoremBoundsReport, path: &Path) -> Result<()> {
    use std::io::Write;
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "amplitude,seed,j,t,t_scaled,ratio")?;
    for run in &report.runs {
        for (t, t_scaled, ratios) in &run.curve {
            for (j, r) in ratios.iter().enumerate() {
                writeln!(
                    out,
                    "{},{},{},{:.12e},{:.12e},{:.12e}",
                    run.amplitude, run.seed, j, t, t_scaled, r
                )?;
            }
        }
    }
    Ok(())
}

/// Least-squares slope of `log(y)` against `log(x)`.
pub fn log_log_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for &(x, y) in points {
        let lx = x.ln();
        let ly = y.max(1e-300).ln();
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdict_constructors() {
        let v = Verdict::le("k0", 1.4, 2.0, "K0 bound");
        assert!(v.pass);
        let w = Verdict::le("k0", 2.4, 2.0, "K0 bound");
        assert!(!w.pass);
        assert!(Verdict::boolean("no-blowup", true, "").pass);
    }

    #[test]
    fn config_hash_is_stable_and_key_order_independent() {
        let a: serde_json::Value = serde_json::from_str(r#"{"b": 1, "a": [1, 2]}"#).unwrap();
        let b: serde_json::Value = serde_json::from_str(r#"{"a": [1, 2], "b": 1}"#).unwrap();
        assert_eq!(config_hash(&a), config_hash(&b));
        let c: serde_json::Value = serde_json::from_str(r#"{"a": [1, 3], "b": 1}"#).unwrap();
        assert_ne!(config_hash(&a), config_hash(&c));
    }

    #[test]
    fn report_json_roundtrip_and_summary() {
        let dir = tempfile::tempdir().unwrap();
        let mut r = EstimateReport::new("verify-kernel");
        r.verdicts.push(Verdict::le("duality", 1e-12, 1e-10, "rel agreement"));
        let path = dir.path().join("report.json");
        r.write_json(&path).unwrap();
        let back = EstimateReport::read_json(&path).unwrap();
        assert_eq!(back.experiment, "verify-kernel");
        assert!(back.all_pass());
        assert!(back.summary().contains("[PASS] duality"));
        assert!(back.summary().ends_with("PASS\n"));
    }

    #[test]
    fn slope_of_exact_power_law() {
        let pts: Vec<(f64, f64)> = [1.0f64, 2.0, 4.0, 8.0]
            .iter()
            .map(|&x| (x, 3.0 * x.powi(4)))
            .collect();
        assert!((log_log_slope(&pts) - 4.0).abs() < 1e-12);
    }
}
