//! Result records for preparation runs and their CSV serialization.
//!
//! CSV rows are rendered with Rust's default float formatting (shortest
//! round-trip representation), so identical runs produce byte-identical
//! files. Wall-clock time is recorded on the struct for human inspection
//! but deliberately excluded from CSV rows to keep outputs reproducible.

use serde::{Deserialize, Serialize};

/// Outcome of synthesizing one preparation circuit for one target state.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PrepReport {
    /// Method identifier, e.g. "exact", "mps", "genetic", "variational".
    pub method: String,
    pub n_qubits: usize,
    /// Fidelity the method was asked to reach.
    pub target_fidelity: f64,
    /// Fidelity of the synthesized circuit's output against the target
    /// state, measured on a dense simulation.
    pub achieved_fidelity: f64,
    pub met_target: bool,
    /// CNOT count after lowering to the native gate set.
    pub cnot_count: usize,
    pub total_gates: usize,
    pub depth: usize,
    /// Method-specific iteration count (sweeps, generations, or
    /// optimizer rounds); zero when not applicable.
    pub iterations: usize,
    /// Wall-clock milliseconds; informational only, never serialized to
    /// CSV.
    pub wall_time_ms: f64,
}

impl PrepReport {
    pub fn csv_header() -> &'static str {
        "method,n_qubits,target_fidelity,achieved_fidelity,met_target,cnot_count,total_gates,depth,iterations"
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            csv_field(&self.method),
            self.n_qubits,
            self.target_fidelity,
            self.achieved_fidelity,
            self.met_target,
            self.cnot_count,
            self.total_gates,
            self.depth,
            self.iterations
        )
    }
}

/// Renders a full CSV document (header plus one row per report).
pub fn prep_reports_csv(reports: &[PrepReport]) -> String {
    let mut out = String::from(PrepReport::csv_header());
    out.push('\n');
    for report in reports {
        out.push_str(&report.csv_row());
        out.push('\n');
    }
    out
}

/// Quotes a field if it contains CSV metacharacters.
pub fn csv_field(value: &str) -> String {
    if value.contains(',') || value.contains('"') || value.contains('\n') {
        format!("\"{}\"", value.replace('"', "\"\""))
    } else {
        value.to_string()
    }
}
