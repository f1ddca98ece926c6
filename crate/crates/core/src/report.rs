//! Checker verdicts and the report envelope written by the CLI.

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

pub const SCHEMA_VERSION: u32 = 1;
/// Witness lists are truncated to this many entries; the full count is kept
/// in the metrics.
pub const MAX_WITNESSES: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    Skip,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerdictReport {
    pub check_name: String,
    pub parameters: Value,
    pub verdict: Verdict,
    pub witnesses: Vec<Value>,
    pub model_caveats: Vec<String>,
    /// Counts and sizes gathered while checking.
    pub metrics: Value,
}

impl VerdictReport {
    pub fn new(check_name: &str, parameters: Value) -> Self {
        VerdictReport {
            check_name: check_name.to_string(),
            parameters,
            verdict: Verdict::Pass,
            witnesses: Vec::new(),
            model_caveats: Vec::new(),
            metrics: Value::Object(Map::new()),
        }
    }

    /// Record a failure. Witnesses past the cap are counted, not stored.
    pub fn fail(&mut self, witness: Value) {
        self.verdict = Verdict::Fail;
        let n = self.metric_u64("failures") + 1;
        self.metric("failures", n);
        if self.witnesses.len() < MAX_WITNESSES {
            self.witnesses.push(witness);
        }
    }

    pub fn check(&mut self, ok: bool, witness: impl FnOnce() -> Value) {
        if !ok {
            self.fail(witness());
        }
    }

    pub fn skip(mut self, reason: &str) -> Self {
        self.verdict = Verdict::Skip;
        self.model_caveats.push(reason.to_string());
        self
    }

    pub fn caveat(&mut self, text: impl Into<String>) {
        self.model_caveats.push(text.into());
    }

    pub fn metric(&mut self, key: &str, value: impl Into<Value>) {
        if let Value::Object(m) = &mut self.metrics {
            m.insert(key.to_string(), value.into());
        }
    }

    pub fn metric_u64(&self, key: &str) -> u64 {
        self.metrics.get(key).and_then(Value::as_u64).unwrap_or(0)
    }

    pub fn add_metric(&mut self, key: &str, delta: u64) {
        let v = self.metric_u64(key) + delta;
        self.metric(key, v);
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn is_fail(&self) -> bool {
        self.verdict == Verdict::Fail
    }
}

/// Run-specific data kept apart from the deterministic body.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct Header {
    pub schema_version: u32,
    pub timestamp: String,
    /// Wall-clock milliseconds per named step.
    pub timings: Map<String, Value>,
    pub cache_hits: u64,
    pub cache_misses: u64,
}

impl Header {
    pub fn new() -> Self {
        let secs = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        Header {
            schema_version: SCHEMA_VERSION,
            timestamp: format!("{secs}"),
            ..Default::default()
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Envelope {
    pub header: Header,
    pub body: Value,
}

impl Envelope {
    pub fn to_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// The body serialized on its own; equal across repeated runs.
    pub fn body_string(&self) -> String {
        serde_json::to_string_pretty(&self.body).expect("report serializes")
    }
}
