//! Run provenance embedded in every machine-readable output.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub inputs: BTreeMap<String, String>,
    pub constants_fingerprint: String,
    pub precision_bits: u32,
    pub timestamp: String,
    pub tool_version: String,
}

impl RunManifest {
    pub fn new(
        command: &str,
        inputs: BTreeMap<String, String>,
        constants_fingerprint: &str,
        precision_bits: u32,
    ) -> Self {
        // SOURCE_DATE_EPOCH pins the timestamp for byte-reproducible reruns.
        let timestamp = match std::env::var("SOURCE_DATE_EPOCH")
            .ok()
            .and_then(|s| s.parse::<i64>().ok())
            .and_then(|secs| chrono::DateTime::from_timestamp(secs, 0))
        {
            Some(t) => t.to_rfc3339(),
            None => chrono::Utc::now().to_rfc3339(),
        };
        RunManifest {
            command: command.to_string(),
            inputs,
            constants_fingerprint: constants_fingerprint.to_string(),
            precision_bits,
            timestamp,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_serializes() {
        let mut inputs = BTreeMap::new();
        inputs.insert("log_x0".to_string(), "46".to_string());
        let m = RunManifest::new("certify", inputs, "abc123", 256);
        let json = serde_json::to_string(&m).unwrap();
        assert!(json.contains("\"command\":\"certify\""));
        assert!(json.contains("abc123"));
        let back: RunManifest = serde_json::from_str(&json).unwrap();
        assert_eq!(back.inputs["log_x0"], "46");
    }
}
