//! Circuit-count and query-cost accounting.
//!
//! The headline counts are d² circuits for Λ and d for C per time step,
//! one per unique (i, j) / (i) coefficient. The expanded counts include
//! the k-index fan-out of the gate-derivative expansions and the Pauli
//! terms of the generator, and are what a shot-mode run actually issues.

use serde::{Deserialize, Serialize};

use crate::ansatz::AnsatzSpec;
use crate::mclachlan::expansion_chain_count;
use crate::pauli::PauliSum;
use crate::Result;

/// Headline (d², d) circuit counts per time step.
pub fn circuits_per_step(d: usize) -> (u64, u64) {
    ((d * d) as u64, d as u64)
}

/// Exact shot-mode circuit counts per time step.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpandedCounts {
    /// K² where K = Σ_i k_i over derivative-expansion terms.
    pub lambda_circuits: u64,
    /// K · (#generator Pauli terms).
    pub c_circuits: u64,
}

impl ExpandedCounts {
    pub fn total(&self) -> u64 {
        self.lambda_circuits + self.c_circuits
    }
}

/// Predict the per-step expanded circuit counts for an ansatz/generator
/// pair; matches what the shot-mode evaluators issue (without the optional
/// norm-correction extras).
pub fn expanded_counts(spec: &AnsatzSpec, generator: &PauliSum) -> Result<ExpandedCounts> {
    let k = expansion_chain_count(spec)?;
    Ok(ExpandedCounts {
        lambda_circuits: k * k,
        c_circuits: k * generator.len() as u64,
    })
}

/// Order-of-magnitude total query count t·d²/(Δt·ε²), unit constant.
pub fn query_cost(t_total: f64, dt: f64, d: usize, epsilon: f64) -> f64 {
    t_total * (d as f64).powi(2) / (dt * epsilon * epsilon)
}

/// JSON-serializable cost report for the CLI.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CostReport {
    pub params: usize,
    pub lambda_circuits_headline: u64,
    pub c_circuits_headline: u64,
    pub expanded: ExpandedCounts,
    pub steps: u64,
    pub shots_per_circuit: u64,
    pub total_circuits: u64,
    pub total_shots: u64,
    pub query_cost_estimate: f64,
    /// The big-O constant is fixed to 1; the estimate is order-of-magnitude.
    pub constant_factor: f64,
}

/// Assemble the full cost report for a run configuration.
pub fn cost_report(
    spec: &AnsatzSpec,
    generator: &PauliSum,
    t_total: f64,
    dt: f64,
    epsilon: f64,
    shots_per_circuit: u64,
) -> Result<CostReport> {
    let d = spec.param_count();
    let (lh, ch) = circuits_per_step(d);
    let expanded = expanded_counts(spec, generator)?;
    let steps = (t_total / dt).round() as u64;
    Ok(CostReport {
        params: d,
        lambda_circuits_headline: lh,
        c_circuits_headline: ch,
        expanded,
        steps,
        shots_per_circuit,
        total_circuits: expanded.total() * steps,
        total_shots: expanded.total() * steps * shots_per_circuit,
        query_cost_estimate: query_cost(t_total, dt, d, epsilon),
        constant_factor: 1.0,
    })
}
