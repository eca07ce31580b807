//! JSON reports on standard output.
//!
//! Identical inputs produce byte-identical reports except for the trailing
//! timing field.

use serde_json::{json, Map, Value};

#[derive(Debug, Clone)]
pub struct Report {
    pub status: &'static str,
    pub command: &'static str,
    pub mode: Option<String>,
    pub backend: Option<String>,
    pub n: Option<usize>,
    pub factor_count: Option<usize>,
    pub step_factor_counts: Option<Vec<usize>>,
    pub residuals: Map<String, Value>,
    pub stages: Option<Value>,
    pub seed: Option<u64>,
    pub certificate: Option<Value>,
    pub error: Option<String>,
    pub elapsed_ms: u128,
}

impl Report {
    pub fn new(command: &'static str) -> Self {
        Report {
            status: "ok",
            command,
            mode: None,
            backend: None,
            n: None,
            factor_count: None,
            step_factor_counts: None,
            residuals: Map::new(),
            stages: None,
            seed: None,
            certificate: None,
            error: None,
            elapsed_ms: 0,
        }
    }

    pub fn residual(&mut self, name: &str, value: f64) {
        self.residuals.insert(name.to_string(), json!(value));
    }

    pub fn to_json(&self) -> Value {
        json!({
            "status": self.status,
            "command": self.command,
            "mode": self.mode,
            "backend": self.backend,
            "n": self.n,
            "factor_count": self.factor_count,
            "step_factor_counts": self.step_factor_counts,
            "residuals": self.residuals,
            "stages": self.stages,
            "seed": self.seed,
            "certificate": self.certificate,
            "error": self.error,
            "elapsed_ms": self.elapsed_ms,
        })
    }

    pub fn print(&self) {
        println!(
            "{}",
            serde_json::to_string(&self.to_json()).expect("report serializes")
        );
    }
}
