//! Explicit-Euler integration of the parameter flow Λ(t)·θ̇ = C(t) with
//! regularized linear solves.

use nalgebra::{DMatrix, DVector};

use crate::ansatz::AnsatzSpec;
use crate::mclachlan::{self, CircuitStats, EvalMode};
use crate::pauli::PauliSum;
use crate::statevector::StateVector;
use crate::{Error, Result};

/// How near-singular Λ matrices are handled.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Regularization {
    /// Truncated-SVD pseudoinverse dropping singular values below
    /// `rho · σ_max`.
    SvdCutoff(f64),
    /// Solve (Λ + λI)·θ̇ = C.
    Ridge(f64),
}

/// Default relative SVD cutoff.
pub const DEFAULT_SVD_CUTOFF: f64 = 1e-8;

impl Regularization {
    pub fn validate(&self) -> Result<()> {
        match self {
            Regularization::SvdCutoff(rho) if !(*rho > 0.0 && *rho < 1.0) => Err(Error::Config(
                format!("svd cutoff must lie in (0, 1), got {rho}"),
            )),
            Regularization::Ridge(lambda) if !(*lambda >= 0.0) => Err(Error::Config(format!(
                "ridge parameter must be nonnegative, got {lambda}"
            ))),
            _ => Ok(()),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Regularization::SvdCutoff(rho) => format!("svd:{rho}"),
            Regularization::Ridge(lambda) => format!("ridge:{lambda}"),
        }
    }
}

/// Solver health indicators for one time step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FlowDiagnostics {
    /// ‖Λ·θ̇ − C‖.
    pub residual: f64,
    /// Smallest singular value kept by the solve (0 when nothing).
    pub smallest_retained: f64,
    /// σ_max / σ_min over the retained spectrum.
    pub condition: f64,
    /// Set when the whole spectrum fell below the cutoff (zero flow) or a
    /// ridge solve failed.
    pub singular: bool,
}

/// Parameter velocity from one regularized solve. Never fails: a fully
/// singular system yields zero flow with `diagnostics.singular` set.
pub fn solve_flow(
    lambda: &DMatrix<f64>,
    c: &DVector<f64>,
    regularization: Regularization,
) -> (DVector<f64>, FlowDiagnostics) {
    let d = lambda.nrows();
    let zero_flow = |sing: bool| FlowDiagnostics {
        residual: c.norm(),
        smallest_retained: 0.0,
        condition: f64::INFINITY,
        singular: sing,
    };
    let (theta_dot, mut diag) = match regularization {
        Regularization::SvdCutoff(rho) => {
            let svd = lambda.clone().svd(true, true);
            let sigma_max = svd.singular_values.max();
            if !(sigma_max > 0.0) {
                (DVector::zeros(d), zero_flow(true))
            } else {
                let cutoff = rho * sigma_max;
                let u = svd.u.as_ref().expect("svd with u");
                let v_t = svd.v_t.as_ref().expect("svd with v_t");
                let mut smallest = f64::INFINITY;
                let mut kept = 0usize;
                let mut coeffs = DVector::zeros(d);
                let utc = u.transpose() * c;
                for k in 0..d {
                    let s = svd.singular_values[k];
                    if s >= cutoff {
                        coeffs[k] = utc[k] / s;
                        smallest = smallest.min(s);
                        kept += 1;
                    }
                }
                if kept == 0 {
                    (DVector::zeros(d), zero_flow(true))
                } else {
                    let theta_dot = v_t.transpose() * coeffs;
                    (
                        theta_dot,
                        FlowDiagnostics {
                            residual: 0.0,
                            smallest_retained: smallest,
                            condition: sigma_max / smallest,
                            singular: false,
                        },
                    )
                }
            }
        }
        Regularization::Ridge(ridge) => {
            let mut m = lambda.clone();
            for k in 0..d {
                m[(k, k)] += ridge;
            }
            match m.clone().cholesky() {
                Some(chol) => {
                    let theta_dot = chol.solve(c);
                    let svd_vals = m.singular_values();
                    let smin = svd_vals.min();
                    (
                        theta_dot,
                        FlowDiagnostics {
                            residual: 0.0,
                            smallest_retained: smin,
                            condition: svd_vals.max() / smin.max(f64::MIN_POSITIVE),
                            singular: false,
                        },
                    )
                }
                None => match m.lu().solve(c) {
                    Some(theta_dot) => (
                        theta_dot,
                        FlowDiagnostics {
                            residual: 0.0,
                            smallest_retained: 0.0,
                            condition: f64::INFINITY,
                            singular: false,
                        },
                    ),
                    None => (DVector::zeros(d), zero_flow(true)),
                },
            }
        }
    };
    diag.residual = (lambda * &theta_dot - c).norm();
    (theta_dot, diag)
}

/// One explicit-Euler update θ' = θ + dt·θ̇.
pub fn step(theta: &[f64], theta_dot: &DVector<f64>, dt: f64) -> Vec<f64> {
    theta
        .iter()
        .zip(theta_dot.iter())
        .map(|(t, v)| t + dt * v)
        .collect()
}

/// Settings for one VarQITE integration.
#[derive(Clone, Debug, PartialEq)]
pub struct EvolutionConfig {
    pub dt: f64,
    pub t_final: f64,
    pub regularization: Regularization,
    pub mode: EvalMode,
    pub snapshot_stride: usize,
    /// Subtract the norm-projection term from C (inert for the unit-speed
    /// Maxwell generator, available for c ≠ 1 experiments).
    pub norm_correction: bool,
}

impl EvolutionConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) {
            return Err(Error::Config("evolution dt must be positive".into()));
        }
        if !(self.t_final >= 0.0) {
            return Err(Error::Config("t_final must be nonnegative".into()));
        }
        if self.snapshot_stride == 0 {
            return Err(Error::Config("snapshot_stride must be at least 1".into()));
        }
        self.regularization.validate()?;
        self.mode.validate()
    }

    pub fn steps(&self) -> usize {
        (self.t_final / self.dt).round() as usize
    }
}

/// Time series produced by [`evolve`]: parameter vectors and quantum states
/// at snapshot times, plus per-step solver diagnostics.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub thetas: Vec<Vec<f64>>,
    pub states: Vec<StateVector>,
    pub diagnostics: Vec<FlowDiagnostics>,
    pub stats: CircuitStats,
    pub steps: usize,
}

/// Integrate the McLachlan flow from θ₀ over `config.t_final`.
///
/// Λ and C are re-evaluated from scratch at every step; snapshots are taken
/// at t = 0 and every `snapshot_stride` steps after it.
pub fn evolve(
    spec: &AnsatzSpec,
    theta0: &[f64],
    generator: &PauliSum,
    config: &EvolutionConfig,
) -> Result<Trajectory> {
    config.validate()?;
    spec.validate()?;
    if theta0.len() != spec.param_count() {
        return Err(Error::ParamLength {
            got: theta0.len(),
            expected: spec.param_count(),
        });
    }

    let steps = config.steps();
    let mut theta = theta0.to_vec();
    let mut trajectory = Trajectory {
        times: vec![0.0],
        thetas: vec![theta.clone()],
        states: vec![spec.state(&theta)?],
        diagnostics: Vec::with_capacity(steps),
        stats: CircuitStats::default(),
        steps,
    };

    for k in 1..=steps {
        let system = mclachlan::evaluate(
            spec,
            &theta,
            generator,
            config.mode,
            config.norm_correction,
        )?;
        let (theta_dot, diag) = solve_flow(&system.lambda, &system.c, config.regularization);
        theta = step(&theta, &theta_dot, config.dt);
        trajectory.stats.add(system.stats);
        trajectory.diagnostics.push(diag);
        if k % config.snapshot_stride == 0 {
            trajectory.times.push(k as f64 * config.dt);
            trajectory.thetas.push(theta.clone());
            trajectory.states.push(spec.state(&theta)?);
        }
    }
    Ok(trajectory)
}
