//! JSON report schemas and full-precision numeric serialization.
//!
//! Reports are written with every finite float rendered at 17 significant
//! digits so values survive a round trip exactly. Non-finite values (an
//! undefined γ, an inapplicable bound) serialize as `null`.

use serde::{Serialize, Serializer};

use crate::theorem::TheoremReport;

/// Version of the report schemas emitted by this crate.
pub const SCHEMA_VERSION: &str = "1.0.0";

/// Renders a float as a JSON number with 17 significant digits.
pub fn ser_f64<S: Serializer>(value: &f64, serializer: S) -> Result<S::Ok, S::Error> {
    if value.is_finite() {
        serde_json::Number::from_string_unchecked(format!("{value:.16e}")).serialize(serializer)
    } else {
        serializer.serialize_none()
    }
}

/// Like [`ser_f64`]; named separately where null is an expected outcome.
pub fn ser_f64_or_null<S: Serializer>(value: &f64, serializer: S) -> Result<S::Ok, S::Error> {
    ser_f64(value, serializer)
}

pub fn ser_opt_f64<S: Serializer>(value: &Option<f64>, serializer: S) -> Result<S::Ok, S::Error> {
    match value {
        Some(v) => ser_f64(v, serializer),
        None => serializer.serialize_none(),
    }
}

fn ser_f64_vec<S: Serializer>(values: &[f64], serializer: S) -> Result<S::Ok, S::Error> {
    let rendered: Vec<serde_json::Number> = values
        .iter()
        .map(|v| serde_json::Number::from_string_unchecked(format!("{v:.16e}")))
        .collect();
    rendered.serialize(serializer)
}

/// Envelope for a serialized theorem validation.
#[derive(Debug, Serialize)]
pub struct TheoremReportFile<'a> {
    pub schema_version: &'static str,
    pub kind: &'static str,
    #[serde(flatten)]
    pub report: &'a TheoremReport,
}

impl<'a> TheoremReportFile<'a> {
    pub fn new(report: &'a TheoremReport) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            kind: "theorem_report",
            report,
        }
    }
}

/// Report for a bidirectional fusion run.
#[derive(Debug, Serialize)]
pub struct FusionReportFile {
    pub schema_version: &'static str,
    pub kind: &'static str,
    #[serde(serialize_with = "ser_f64")]
    pub erank_a_before: f64,
    #[serde(serialize_with = "ser_f64")]
    pub erank_a_after: f64,
    #[serde(serialize_with = "ser_f64")]
    pub erank_b_before: f64,
    #[serde(serialize_with = "ser_f64")]
    pub erank_b_after: f64,
    /// Effective-rank gain of modality A (after − before).
    #[serde(serialize_with = "ser_f64")]
    pub delta_a: f64,
    #[serde(serialize_with = "ser_f64")]
    pub delta_b: f64,
    /// Harmonic mean of the two gains, negatives clamped.
    #[serde(serialize_with = "ser_f64")]
    pub harmonic_mean: f64,
    pub low_channels_a: Vec<usize>,
    pub low_channels_b: Vec<usize>,
    #[serde(serialize_with = "ser_f64_vec")]
    pub alphas_a: Vec<f64>,
    #[serde(serialize_with = "ser_f64_vec")]
    pub alphas_b: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub optimizer_warning_a: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub optimizer_warning_b: Option<String>,
}

impl FusionReportFile {
    pub fn new() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            kind: "fusion_report",
            erank_a_before: 0.0,
            erank_a_after: 0.0,
            erank_b_before: 0.0,
            erank_b_after: 0.0,
            delta_a: 0.0,
            delta_b: 0.0,
            harmonic_mean: 0.0,
            low_channels_a: Vec::new(),
            low_channels_b: Vec::new(),
            alphas_a: Vec::new(),
            alphas_b: Vec::new(),
            optimizer_warning_a: None,
            optimizer_warning_b: None,
        }
    }
}

impl Default for FusionReportFile {
    fn default() -> Self {
        Self::new()
    }
}

/// One row of a candidate-ranking table.
#[derive(Debug, Serialize)]
pub struct PairScoreRow {
    pub candidate: String,
    #[serde(serialize_with = "ser_f64")]
    pub delta_base: f64,
    #[serde(serialize_with = "ser_f64")]
    pub delta_candidate: f64,
    #[serde(serialize_with = "ser_f64")]
    pub harmonic_mean: f64,
}

/// One row of a noise sweep.
#[derive(Debug, Serialize)]
pub struct NoiseSweepRow {
    #[serde(serialize_with = "ser_f64")]
    pub sigma: f64,
    #[serde(serialize_with = "ser_f64")]
    pub delta_clean: f64,
    #[serde(serialize_with = "ser_f64")]
    pub delta_noisy: f64,
    #[serde(serialize_with = "ser_f64")]
    pub harmonic_mean: f64,
}

/// Serializes any report to its canonical JSON text (compact, stable field
/// order, full float precision).
pub fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("report serialization cannot fail")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Serialize)]
    struct Sample {
        #[serde(serialize_with = "ser_f64")]
        value: f64,
        #[serde(serialize_with = "ser_f64_or_null")]
        maybe: f64,
    }

    #[test]
    fn floats_serialize_at_full_precision() {
        let sample = Sample {
            value: 0.1,
            maybe: f64::INFINITY,
        };
        let json = to_json(&sample);
        assert!(json.contains("1.0000000000000001e-1"), "{json}");
        assert!(json.contains("null"), "{json}");
        let parsed: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(parsed["value"].as_f64().unwrap(), 0.1);
        assert!(parsed["maybe"].is_null());
    }

    #[test]
    fn seventeen_digits_round_trip_exactly() {
        for &v in &[std::f64::consts::PI, 1.0 / 3.0, 1e-300, 2.5e17, -0.07] {
            let text = format!("{v:.16e}");
            let back: f64 = text.parse().unwrap();
            assert_eq!(back, v, "{text}");
        }
    }
}
