use std::fmt::Write as _;

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

pub fn digest(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Outcome of one command, printed as `key=value` lines or as JSON.
#[derive(Debug, Default, Serialize)]
pub struct RunReport {
    pub command: &'static str,
    pub mode: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub early_stop: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verdict: Option<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub estimate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lo: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hi: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub initial_lo: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub initial_hi: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub initial_width: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_calls: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub subupdates: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub instantiations: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub outer_iterations: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_intvl: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_intvl_per_node: Option<Vec<usize>>,
    pub wall_ms: f64,
    pub trace_len: usize,
    pub trace_dims: usize,
    pub formula_sha256: String,
    pub trace_sha256: String,
}

impl RunReport {
    pub fn render(&self, json: bool) -> String {
        let value = serde_json::to_value(self).expect("report serializes");
        if json {
            return serde_json::to_string_pretty(&value).expect("report serializes");
        }
        let Value::Object(map) = value else {
            unreachable!()
        };
        let mut out = String::new();
        for (k, v) in map {
            let v = match v {
                Value::String(s) => s,
                Value::Array(a) => a.iter().map(Value::to_string).collect::<Vec<_>>().join(","),
                other => other.to_string(),
            };
            writeln!(out, "{k}={v}").unwrap();
        }
        out.pop();
        out
    }
}
