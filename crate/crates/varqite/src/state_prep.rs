//! Initial-state preparation: fit ansatz parameters to the discretized
//! Gaussian, evaluate fidelities exactly or through the SWAP-test sampling
//! model, and pick the grid size by the mesh-refinement criterion.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ansatz::AnsatzSpec;
use crate::maxwell::{flatten, gaussian_initial, MaxwellConfig};
use crate::mclachlan::EvalMode;
use crate::statevector::{inner_product, StateVector};
use crate::{Error, Result};

/// SPSA gain-sequence constants and restart policy.
///
/// Gains follow the standard schedule a_k = a/(k+1+A)^α and
/// c_k = c/(k+1)^γ.
#[derive(Clone, Debug, PartialEq)]
pub struct SpsaConfig {
    pub iterations: usize,
    pub a: f64,
    pub c: f64,
    pub big_a: f64,
    pub alpha: f64,
    pub gamma: f64,
    pub restarts: usize,
    pub seed: u64,
}

impl SpsaConfig {
    pub fn defaults(seed: u64) -> Self {
        SpsaConfig {
            iterations: 2000,
            a: 0.2,
            c: 0.1,
            big_a: 100.0,
            alpha: 0.602,
            gamma: 0.101,
            restarts: 3,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::Config("spsa needs at least one iteration".into()));
        }
        if !(self.c > 0.0) {
            return Err(Error::Config("spsa perturbation size c must be positive".into()));
        }
        for (name, v) in [("alpha", self.alpha), ("gamma", self.gamma)] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(Error::Config(format!("spsa {name} must lie in (0, 1], got {v}")));
            }
        }
        if self.restarts == 0 {
            return Err(Error::Config("spsa needs at least one restart".into()));
        }
        Ok(())
    }
}

/// Outcome of [`spsa_fit`]: the best parameters over all restarts.
#[derive(Clone, Debug)]
pub struct FitResult {
    pub theta0: Vec<f64>,
    pub final_cost: f64,
    /// Per-iteration cost at the winning restart's iterates.
    pub cost_history: Vec<f64>,
    pub converged: bool,
}

/// Unit-norm statevector carrying the discretized Gaussian initial
/// condition in the B_z block.
pub fn target_state(config: &MaxwellConfig, center: f64, width: f64) -> Result<StateVector> {
    let ic = gaussian_initial(config, center, width)?;
    StateVector::from_real(&flatten(&ic))?.normalized()
}

/// |⟨φ(θ)|target⟩|², exactly or from M SWAP-test samples with
/// P(ancilla = 0) = (1 + |⟨a|b⟩|²)/2.
///
/// The sampled estimate 2·(#zeros/M) − 1 is returned unclamped so it stays
/// unbiased; it can leave [0, 1] by a sampling fluctuation.
pub fn fidelity(
    spec: &AnsatzSpec,
    theta: &[f64],
    target: &StateVector,
    mode: EvalMode,
) -> Result<f64> {
    mode.validate()?;
    let phi = spec.state(theta)?;
    let overlap = inner_product(&phi, target)?;
    let exact = overlap.norm_sqr().clamp(0.0, 1.0);
    match mode {
        EvalMode::Exact => Ok(exact),
        EvalMode::Shots { m, seed } => {
            let p0 = (1.0 + exact) / 2.0;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let zeros = (0..m).filter(|_| rng.gen::<f64>() < p0).count() as f64;
            Ok(2.0 * zeros / m as f64 - 1.0)
        }
    }
}

/// The preparation cost 1 − fidelity.
pub fn cost(
    spec: &AnsatzSpec,
    theta: &[f64],
    target: &StateVector,
    mode: EvalMode,
) -> Result<f64> {
    Ok(1.0 - fidelity(spec, theta, target, mode)?)
}

/// Fit θ⁰ by simultaneous-perturbation stochastic approximation of the
/// exact preparation cost, best-of-restarts.
///
/// Restart 0 starts from θ = 0; later restarts start from uniform random
/// parameters. The returned history belongs to the winning restart.
pub fn spsa_fit(
    spec: &AnsatzSpec,
    target: &StateVector,
    spsa: &SpsaConfig,
    epsilon_init: f64,
) -> Result<FitResult> {
    spsa.validate()?;
    if !(epsilon_init > 0.0 && epsilon_init < 1.0) {
        return Err(Error::Config(format!(
            "epsilon_init must lie in (0, 1), got {epsilon_init}"
        )));
    }
    let d = spec.param_count();
    let eval = |theta: &[f64]| -> Result<f64> { cost(spec, theta, target, EvalMode::Exact) };

    let mut best: Option<FitResult> = None;
    for restart in 0..spsa.restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(spsa.seed.wrapping_add(restart as u64));
        let mut theta: Vec<f64> = if restart == 0 {
            vec![0.0; d]
        } else {
            (0..d)
                .map(|_| rng.gen_range(-std::f64::consts::FRAC_PI_2..std::f64::consts::FRAC_PI_2))
                .collect()
        };
        let mut history = Vec::with_capacity(spsa.iterations);
        let mut best_theta = theta.clone();
        let mut best_cost = eval(&theta)?;
        history.push(best_cost);

        for k in 0..spsa.iterations {
            if best_cost <= epsilon_init {
                break;
            }
            let ak = spsa.a / (k as f64 + 1.0 + spsa.big_a).powf(spsa.alpha);
            let ck = spsa.c / (k as f64 + 1.0).powf(spsa.gamma);
            let delta: Vec<f64> = (0..d)
                .map(|_| if rng.gen::<bool>() { 1.0 } else { -1.0 })
                .collect();
            let plus: Vec<f64> = theta.iter().zip(&delta).map(|(t, s)| t + ck * s).collect();
            let minus: Vec<f64> = theta.iter().zip(&delta).map(|(t, s)| t - ck * s).collect();
            let df = (eval(&plus)? - eval(&minus)?) / (2.0 * ck);
            for (t, s) in theta.iter_mut().zip(&delta) {
                *t -= ak * df * s;
            }
            let current = eval(&theta)?;
            history.push(current);
            if current < best_cost {
                best_cost = current;
                best_theta = theta.clone();
            }
        }

        let candidate = FitResult {
            theta0: best_theta,
            final_cost: best_cost,
            cost_history: history,
            converged: best_cost <= epsilon_init,
        };
        let better = match &best {
            None => true,
            Some(b) => candidate.final_cost < b.final_cost,
        };
        if better {
            best = Some(candidate);
        }
    }
    Ok(best.expect("at least one restart"))
}

/// Upper bound on the grid sizes tried by [`refine_mesh`].
pub const REFINE_MESH_CAP: usize = 1 << 14;

/// Discretization error of the Gaussian at one grid size: the normalized
/// n-point sampling compared against a 16×-finer sampling averaged back
/// onto the coarse cells (both unit-normalized).
pub fn refinement_error(domain_length: f64, center: f64, width: f64, n_grid: usize) -> f64 {
    let gauss = |x: f64| (-(x - center).powi(2) / (2.0 * width * width)).exp();
    let dx = domain_length / n_grid as f64;
    let coarse: Vec<f64> = (0..n_grid).map(|i| gauss(i as f64 * dx)).collect();
    let fine_n = 16 * n_grid;
    let fine_dx = domain_length / fine_n as f64;
    let fine: Vec<f64> = (0..fine_n).map(|j| gauss(j as f64 * fine_dx)).collect();
    // trapezoidal average of the fine samples over the dx-cell centered on
    // each coarse node; symmetric, so the restriction is second-order
    let restricted: Vec<f64> = (0..n_grid)
        .map(|i| {
            let at = |o: isize| {
                fine[(16 * i as isize + o).rem_euclid(fine_n as isize) as usize]
            };
            let mut acc = (at(-8) + at(8)) / 2.0;
            for o in -7..=7 {
                acc += at(o);
            }
            acc / 16.0
        })
        .collect();
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let (nc, nr) = (norm(&coarse), norm(&restricted));
    coarse
        .iter()
        .zip(&restricted)
        .map(|(c, r)| (c / nc - r / nr).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// Smallest power-of-two grid whose discretized Gaussian meets the
/// refinement tolerance; fails above [`REFINE_MESH_CAP`].
pub fn refine_mesh(
    domain_length: f64,
    center: f64,
    width: f64,
    epsilon_discretization: f64,
) -> Result<usize> {
    if !(epsilon_discretization > 0.0) {
        return Err(Error::Config(
            "epsilon_discretization must be positive".into(),
        ));
    }
    let mut n = 4;
    while n <= REFINE_MESH_CAP {
        if refinement_error(domain_length, center, width, n) < epsilon_discretization {
            return Ok(n);
        }
        n *= 2;
    }
    Err(Error::RefinementCapExceeded(REFINE_MESH_CAP))
}
