//! Report envelope for the CLI and the stable digest helper.

use serde::Serialize;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// FNV-1a 64-bit over a canonical string; serde_json maps already have
/// sorted keys, so serialized inputs digest stably under key reordering.
pub fn digest_str(s: &str) -> String {
    let mut h: u64 = 0xcbf29ce484222325;
    for b in s.as_bytes() {
        h ^= *b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    format!("{h:016x}")
}

pub fn digest_json<T: Serialize>(value: &T) -> String {
    digest_str(&serde_json::to_string(value).unwrap_or_default())
}

#[derive(Clone, Debug, Serialize)]
pub struct ReportEnvelope {
    pub version: String,
    pub command: String,
    pub form_digest: String,
    pub payload: serde_json::Value,
    pub timing_ms: u128,
}

impl ReportEnvelope {
    pub fn new(command: &str, form_digest: &str, payload: serde_json::Value, timing_ms: u128) -> Self {
        ReportEnvelope {
            version: TOOL_VERSION.to_string(),
            command: command.to_string(),
            form_digest: form_digest.to_string(),
            payload,
            timing_ms,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_stable_under_key_order() {
        let a: serde_json::Value = serde_json::from_str(r#"{"b": 1, "a": 2}"#).unwrap();
        let b: serde_json::Value = serde_json::from_str(r#"{"a": 2, "b": 1}"#).unwrap();
        assert_eq!(digest_json(&a), digest_json(&b));
    }
}
