//! Trace-error metrics between the quantum trajectory and the classical
//! reference.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::statevector::StateVector;
use crate::{Error, Result};

/// Per-step trace errors and their time average.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ErrorReport {
    pub per_step_trace_error: Vec<f64>,
    pub epsilon_tr: f64,
    pub per_step_fidelity: Vec<f64>,
    pub metadata: ReportMetadata,
}

/// Run descriptors carried alongside the numbers.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct ReportMetadata {
    pub n_grid: usize,
    pub family: String,
    pub layers: usize,
    pub dt: f64,
    pub mode: String,
}

/// sqrt(1 − |⟨ψ_qc|u*⟩|²) with the classical vector normalized inside;
/// clamped to [0, 1] against rounding.
///
/// Fidelity deficits at the f64 rounding floor (≤ 1e-14) are snapped to
/// zero so a trajectory compared against itself reports exactly 0; the
/// square root would otherwise inflate them to ~1e-8.
pub fn trace_error(quantum: &StateVector, classical: &[f64]) -> Result<f64> {
    let deficit = 1.0 - overlap_fidelity(quantum, classical)?;
    if deficit <= 1e-14 {
        return Ok(0.0);
    }
    Ok(deficit.sqrt().min(1.0))
}

/// |⟨ψ_qc|u*⟩|² against the normalized classical vector.
pub fn overlap_fidelity(quantum: &StateVector, classical: &[f64]) -> Result<f64> {
    if classical.len() != quantum.len() {
        return Err(Error::DimensionMismatch {
            left: quantum.len(),
            right: classical.len(),
        });
    }
    let norm = classical.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(Error::ZeroNorm);
    }
    let overlap: Complex64 = quantum
        .amplitudes()
        .iter()
        .zip(classical)
        .map(|(a, &b)| a.conj() * (b / norm))
        .sum();
    Ok(overlap.norm_sqr().min(1.0))
}

/// Element-wise trace errors over aligned snapshots and their mean.
///
/// Snapshot times must agree within half the quantum trajectory's spacing.
pub fn time_average_trace_error(
    quantum: &[(f64, StateVector)],
    classical: &[(f64, Vec<f64>)],
    metadata: ReportMetadata,
) -> Result<ErrorReport> {
    if quantum.len() != classical.len() {
        return Err(Error::MisalignedTrajectories(format!(
            "{} quantum snapshots vs {} classical",
            quantum.len(),
            classical.len()
        )));
    }
    if quantum.is_empty() {
        return Err(Error::MisalignedTrajectories("empty trajectories".into()));
    }
    let spacing = quantum
        .windows(2)
        .map(|w| w[1].0 - w[0].0)
        .fold(f64::INFINITY, f64::min);
    let tolerance = if spacing.is_finite() {
        spacing / 2.0
    } else {
        1e-9
    };
    let mut per_step = Vec::with_capacity(quantum.len());
    let mut fidelities = Vec::with_capacity(quantum.len());
    for ((tq, state), (tc, reference)) in quantum.iter().zip(classical) {
        if (tq - tc).abs() > tolerance {
            return Err(Error::MisalignedTrajectories(format!(
                "time {tq} vs {tc} exceeds tolerance {tolerance}"
            )));
        }
        per_step.push(trace_error(state, reference)?);
        fidelities.push(overlap_fidelity(state, reference)?);
    }
    let epsilon_tr = per_step.iter().sum::<f64>() / per_step.len() as f64;
    Ok(ErrorReport {
        per_step_trace_error: per_step,
        epsilon_tr,
        per_step_fidelity: fidelities,
        metadata,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn state(values: &[f64]) -> StateVector {
        StateVector::from_real(values).unwrap().normalized().unwrap()
    }

    #[test]
    fn trace_error_examples() {
        let s = state(&[1.0, 1.0]);
        assert_abs_diff_eq!(trace_error(&s, &[2.0, 2.0]).unwrap(), 0.0, epsilon = 1e-12);

        let s = state(&[1.0, 0.0]);
        assert_abs_diff_eq!(trace_error(&s, &[0.0, 5.0]).unwrap(), 1.0, epsilon = 1e-12);

        // |overlap|² = 0.75 → error 0.5
        let angle = (0.75f64).sqrt().acos();
        let s = state(&[angle.cos(), angle.sin()]);
        assert_abs_diff_eq!(trace_error(&s, &[1.0, 0.0]).unwrap(), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn trace_error_invariances() {
        let s = state(&[0.6, 0.8, 0.0, 0.0]);
        let c = [1.0, -0.5, 0.25, 0.0];
        let base = trace_error(&s, &c).unwrap();
        // global sign flips on either side
        let neg: Vec<f64> = c.iter().map(|v| -v).collect();
        assert_abs_diff_eq!(trace_error(&s, &neg).unwrap(), base, epsilon = 1e-12);
        let s_neg = state(&[-0.6, -0.8, 0.0, 0.0]);
        assert_abs_diff_eq!(trace_error(&s_neg, &c).unwrap(), base, epsilon = 1e-12);
        // classical-side scale invariance
        let scaled: Vec<f64> = c.iter().map(|v| 7.3 * v).collect();
        assert_abs_diff_eq!(trace_error(&s, &scaled).unwrap(), base, epsilon = 1e-12);
    }

    #[test]
    fn zero_classical_vector_rejected() {
        let s = state(&[1.0, 0.0]);
        assert!(trace_error(&s, &[0.0, 0.0]).is_err());
        assert!(trace_error(&s, &[1.0]).is_err());
    }

    #[test]
    fn time_average_examples() {
        let s0 = state(&[1.0, 0.0]);
        let s1 = state(&[0.0, 1.0]);
        let q = vec![(0.0, s0.clone()), (0.1, s1.clone())];
        let c = vec![(0.0, vec![1.0, 0.0]), (0.1, vec![0.0, 2.0])];
        let report =
            time_average_trace_error(&q, &c, ReportMetadata::default()).unwrap();
        assert_abs_diff_eq!(report.epsilon_tr, 0.0, epsilon = 1e-12);

        // two-snapshot case with per-step errors (0, 1) averages to 0.5
        let c = vec![(0.0, vec![1.0, 0.0]), (0.1, vec![1.0, 0.0])];
        let report = time_average_trace_error(&q, &c, ReportMetadata::default()).unwrap();
        assert_eq!(report.per_step_trace_error, vec![0.0, 1.0]);
        assert_abs_diff_eq!(report.epsilon_tr, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn self_comparison_is_exactly_zero() {
        let snaps: Vec<(f64, StateVector)> = (0..5)
            .map(|k| {
                let t = k as f64 * 0.2;
                (t, state(&[1.0, t + 0.5, 0.3 * t, 1.0 - t]))
            })
            .collect();
        let classical: Vec<(f64, Vec<f64>)> = snaps
            .iter()
            .map(|(t, s)| (*t, s.amplitudes().iter().map(|a| a.re).collect()))
            .collect();
        let report =
            time_average_trace_error(&snaps, &classical, ReportMetadata::default()).unwrap();
        assert_eq!(report.epsilon_tr, 0.0);
    }

    #[test]
    fn misalignment_rejected() {
        let s = state(&[1.0, 0.0]);
        let q = vec![(0.0, s.clone()), (0.1, s.clone())];
        let c = vec![(0.0, vec![1.0, 0.0])];
        assert!(time_average_trace_error(&q, &c, ReportMetadata::default()).is_err());
        let c = vec![(0.0, vec![1.0, 0.0]), (0.2, vec![1.0, 0.0])];
        assert!(time_average_trace_error(&q, &c, ReportMetadata::default()).is_err());
    }
}
