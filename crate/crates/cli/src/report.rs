use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

pub const TOOL_VERSION: &str = concat!("dvkit ", env!("CARGO_PKG_VERSION"));

/// Output of one command. Everything except `timing_ms` is a function of
/// the inputs and flags.
#[derive(Serialize)]
pub struct Report {
    pub command: String,
    pub tool_version: &'static str,
    pub inputs_digest: String,
    pub status: String,
    pub axioms_used: Vec<String>,
    pub summary: Vec<String>,
    pub result: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing_ms: Option<u64>,
}

/// Collects the canonical text of every input that affects a report.
#[derive(Default)]
pub struct Inputs(Vec<String>);

impl Inputs {
    pub fn add(&mut self, key: &str, value: impl AsRef<str>) {
        self.0.push(format!("{key}={}", value.as_ref()));
    }

    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        for line in &self.0 {
            h.update(line.as_bytes());
            h.update(b"\n");
        }
        format!("sha256:{}", hex::encode(h.finalize()))
    }
}

impl Report {
    pub fn render(&self, json: bool) -> String {
        if json {
            return serde_json::to_string_pretty(self).expect("report serializes") + "\n";
        }
        let mut out = format!("command: {}\nstatus: {}\naxioms_used: [{}]\n", self.command, self.status, self.axioms_used.join(", "));
        for line in &self.summary {
            out.push_str(line);
            out.push('\n');
        }
        if let Some(t) = self.timing_ms {
            out.push_str(&format!("timing_ms: {t}\n"));
        }
        out
    }
}
