//! Statevector representation and gate application kernels.
//!
//! Gates are applied through bit-masked kernels that touch each amplitude
//! pair once; dense 2^n × 2^n matrices are never materialized outside of
//! test oracles. Qubit 0 is the least significant bit of the amplitude
//! index.

use num_complex::Complex64;

use crate::pauli::PauliWord;
use crate::{Error, Result};

/// Complex amplitude vector of length 2^n_qubits.
///
/// Values are immutable from the caller's perspective: every operation
/// returns a fresh `StateVector`, so concurrent evaluation on distinct
/// inputs needs no synchronization.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// The all-zeros computational basis state |0…0⟩.
    pub fn zero(n_qubits: usize) -> Self {
        let mut amps = vec![Complex64::ZERO; 1 << n_qubits];
        amps[0] = Complex64::ONE;
        StateVector { n_qubits, amps }
    }

    /// A computational basis state |index⟩.
    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        if index >= 1 << n_qubits {
            return Err(Error::QubitOutOfRange {
                index,
                n_qubits,
            });
        }
        let mut amps = vec![Complex64::ZERO; 1 << n_qubits];
        amps[index] = Complex64::ONE;
        Ok(StateVector { n_qubits, amps })
    }

    /// Wrap an amplitude vector whose length must be a power of two.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        if amps.is_empty() || !amps.len().is_power_of_two() {
            return Err(Error::NotPowerOfTwo(amps.len()));
        }
        let n_qubits = amps.len().trailing_zeros() as usize;
        Ok(StateVector { n_qubits, amps })
    }

    /// Embed a real vector as complex amplitudes.
    pub fn from_real(values: &[f64]) -> Result<Self> {
        Self::from_amplitudes(values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Rescale to unit norm; errors on a zero vector.
    pub fn normalized(mut self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 {
            return Err(Error::ZeroNorm);
        }
        for a in &mut self.amps {
            *a /= n;
        }
        Ok(self)
    }

    /// Largest imaginary magnitude over all amplitudes.
    pub fn max_imag(&self) -> f64 {
        self.amps.iter().fold(0.0, |m, a| m.max(a.im.abs()))
    }

    /// Probability of reading `bit` on `qubit` in the computational basis.
    pub fn bit_probability(&self, qubit: usize, bit: u8) -> f64 {
        let mask = 1usize << qubit;
        self.amps
            .iter()
            .enumerate()
            .filter(|(i, _)| ((i & mask != 0) as u8) == bit)
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }
}

/// ⟨a|b⟩, conjugate-linear in the first argument.
pub fn inner_product(a: &StateVector, b: &StateVector) -> Result<Complex64> {
    if a.n_qubits != b.n_qubits {
        return Err(Error::DimensionMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    Ok(a.amps
        .iter()
        .zip(&b.amps)
        .map(|(x, y)| x.conj() * y)
        .sum())
}

/// One quantum gate. Every kind is unitary.
///
/// `SdgH` is the ancilla basis change (H·S†) used when an interference
/// circuit measures an imaginary part instead of a real part.
#[derive(Clone, Debug, PartialEq)]
pub enum Gate {
    Ry { theta: f64, target: usize },
    CRy { theta: f64, control: usize, target: usize },
    CNot { control: usize, target: usize },
    PauliWord { word: PauliWord },
    Phase { theta: f64, target: usize },
    Hadamard { target: usize },
    SdgH { target: usize },
}

impl Gate {
    /// Qubits the gate acts on, in (control…, target) order.
    pub fn qubits(&self) -> Vec<usize> {
        match self {
            Gate::Ry { target, .. }
            | Gate::Phase { target, .. }
            | Gate::Hadamard { target }
            | Gate::SdgH { target } => vec![*target],
            Gate::CRy { control, target, .. } | Gate::CNot { control, target } => {
                vec![*control, *target]
            }
            Gate::PauliWord { word } => word.support(),
        }
    }

    fn validate(&self, n_qubits: usize) -> Result<()> {
        let qubits = self.qubits();
        for (i, &q) in qubits.iter().enumerate() {
            if q >= n_qubits {
                return Err(Error::QubitOutOfRange {
                    index: q,
                    n_qubits,
                });
            }
            if qubits[..i].contains(&q) {
                return Err(Error::DuplicateQubit(q));
            }
        }
        if let Gate::PauliWord { word } = self {
            if word.len() != n_qubits {
                return Err(Error::DimensionMismatch {
                    left: word.len(),
                    right: n_qubits,
                });
            }
        }
        Ok(())
    }

    /// Inverse gate. Paulis, CNOT, Hadamard are self-inverse; rotations
    /// negate their angle.
    pub fn dagger(&self) -> Gate {
        match self {
            Gate::Ry { theta, target } => Gate::Ry {
                theta: -theta,
                target: *target,
            },
            Gate::CRy {
                theta,
                control,
                target,
            } => Gate::CRy {
                theta: -theta,
                control: *control,
                target: *target,
            },
            Gate::Phase { theta, target } => Gate::Phase {
                theta: -theta,
                target: *target,
            },
            g => g.clone(),
        }
    }
}

/// Ancilla condition attached to a gate application.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Control {
    /// Apply unconditionally.
    None,
    /// Apply only where the ancilla qubit is |1⟩.
    On1(usize),
    /// Apply only where the ancilla qubit is |0⟩.
    On0(usize),
}

impl Control {
    fn masks(self) -> (usize, usize) {
        match self {
            Control::None => (0, 0),
            Control::On1(q) => (1 << q, 0),
            Control::On0(q) => (0, 1 << q),
        }
    }

    fn qubit(self) -> Option<usize> {
        match self {
            Control::None => None,
            Control::On1(q) | Control::On0(q) => Some(q),
        }
    }
}

/// Apply `gate` to `state`, returning the new state.
pub fn apply_gate(state: &StateVector, gate: &Gate) -> Result<StateVector> {
    apply_gate_with_control(state, gate, Control::None)
}

/// Apply `gate` conditioned on an ancilla qubit.
///
/// The ancilla must be disjoint from the gate's own qubits.
pub fn apply_gate_with_control(
    state: &StateVector,
    gate: &Gate,
    ctrl: Control,
) -> Result<StateVector> {
    gate.validate(state.n_qubits)?;
    if let Some(q) = ctrl.qubit() {
        if q >= state.n_qubits {
            return Err(Error::QubitOutOfRange {
                index: q,
                n_qubits: state.n_qubits,
            });
        }
        if gate.qubits().contains(&q) {
            return Err(Error::DuplicateQubit(q));
        }
    }
    let mut out = state.clone();
    apply_in_place(&mut out, gate, ctrl);
    Ok(out)
}

/// Apply a whole gate sequence in circuit order (index 0 first).
pub fn apply_sequence(state: &StateVector, gates: &[Gate]) -> Result<StateVector> {
    let mut s = state.clone();
    for g in gates {
        g.validate(s.n_qubits)?;
        apply_in_place(&mut s, g, Control::None);
    }
    Ok(s)
}

/// Apply a gate sequence conditioned on `ancilla` being |1⟩.
pub fn apply_controlled(
    state: &StateVector,
    gates: &[Gate],
    ancilla: usize,
) -> Result<StateVector> {
    let mut s = state.clone();
    for g in gates {
        g.validate(s.n_qubits)?;
        if g.qubits().contains(&ancilla) {
            return Err(Error::DuplicateQubit(ancilla));
        }
        apply_in_place(&mut s, g, Control::On1(ancilla));
    }
    Ok(s)
}

/// Apply the tensor-product Pauli unitary named by `word`.
pub fn apply_pauli_word(state: &StateVector, word: &PauliWord) -> Result<StateVector> {
    let gate = Gate::PauliWord { word: word.clone() };
    apply_gate(state, &gate)
}

pub(crate) fn apply_in_place(state: &mut StateVector, gate: &Gate, ctrl: Control) {
    let (on, off) = ctrl.masks();
    match gate {
        Gate::Ry { theta, target } => {
            let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
            kernel_1q(
                &mut state.amps,
                *target,
                [
                    Complex64::new(c, 0.0),
                    Complex64::new(-s, 0.0),
                    Complex64::new(s, 0.0),
                    Complex64::new(c, 0.0),
                ],
                on,
                off,
            );
        }
        Gate::CRy {
            theta,
            control,
            target,
        } => {
            let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
            kernel_1q(
                &mut state.amps,
                *target,
                [
                    Complex64::new(c, 0.0),
                    Complex64::new(-s, 0.0),
                    Complex64::new(s, 0.0),
                    Complex64::new(c, 0.0),
                ],
                on | (1 << control),
                off,
            );
        }
        Gate::CNot { control, target } => {
            kernel_x(&mut state.amps, *target, on | (1 << control), off);
        }
        Gate::PauliWord { word } => {
            kernel_pauli_word(&mut state.amps, word, on, off);
        }
        Gate::Phase { theta, target } => {
            let phase = Complex64::from_polar(1.0, *theta);
            kernel_diag(&mut state.amps, *target, Complex64::ONE, phase, on, off);
        }
        Gate::Hadamard { target } => {
            let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
            kernel_1q(&mut state.amps, *target, [h, h, h, -h], on, off);
        }
        Gate::SdgH { target } => {
            // H·S† = 1/√2 [[1, -i], [1, i]]
            let h = std::f64::consts::FRAC_1_SQRT_2;
            kernel_1q(
                &mut state.amps,
                *target,
                [
                    Complex64::new(h, 0.0),
                    Complex64::new(0.0, -h),
                    Complex64::new(h, 0.0),
                    Complex64::new(0.0, h),
                ],
                on,
                off,
            );
        }
    }
}

/// 2×2 kernel over amplitude pairs (i, i | target bit), gated by control
/// masks evaluated on the pair's shared bits.
fn kernel_1q(amps: &mut [Complex64], target: usize, m: [Complex64; 4], on: usize, off: usize) {
    let bit = 1usize << target;
    for i in 0..amps.len() {
        if i & bit != 0 || i & on != on || i & off != 0 {
            continue;
        }
        let j = i | bit;
        let (a, b) = (amps[i], amps[j]);
        amps[i] = m[0] * a + m[1] * b;
        amps[j] = m[2] * a + m[3] * b;
    }
}

fn kernel_x(amps: &mut [Complex64], target: usize, on: usize, off: usize) {
    let bit = 1usize << target;
    for i in 0..amps.len() {
        if i & bit != 0 || i & on != on || i & off != 0 {
            continue;
        }
        amps.swap(i, i | bit);
    }
}

fn kernel_diag(
    amps: &mut [Complex64],
    target: usize,
    d0: Complex64,
    d1: Complex64,
    on: usize,
    off: usize,
) {
    let bit = 1usize << target;
    for (i, a) in amps.iter_mut().enumerate() {
        if i & on != on || i & off != 0 {
            continue;
        }
        *a *= if i & bit == 0 { d0 } else { d1 };
    }
}

/// Whole-word Pauli kernel: index i maps to i ^ flip_mask with a phase
/// collected from the Y and Z factors.
fn kernel_pauli_word(amps: &mut [Complex64], word: &PauliWord, on: usize, off: usize) {
    let flip = word.flip_mask();
    let old = amps.to_vec();
    for (i, src) in old.iter().enumerate() {
        if i & on != on || i & off != 0 {
            continue;
        }
        let j = i ^ flip;
        amps[j] = word.phase_from(i) * src;
    }
}
