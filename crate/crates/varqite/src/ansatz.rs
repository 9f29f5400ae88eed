//! TwoLocal ansatz families: circuit construction, parameter counting,
//! state evaluation, and exact parameter Jacobians.
//!
//! Parameter counts follow the per-family formulas
//!
//! | family        | parameters          |
//! |---------------|---------------------|
//! | Ry-Linear     | L·N                 |
//! | Ry-Full       | L·N                 |
//! | RyCRy-Linear  | (L + N−1)·N         |
//! | RyCRy-Full    | (L + C(N,2))·N      |
//!
//! For the Ry families a layer is one RY column followed by the CNOT
//! entangler block. The RyCRy families carry L rotation columns plus a
//! single CRY entangler budget of N repetitions of the pair pattern,
//! spread across the gaps between rotation columns (all of it after the
//! first column when L = 1). The layout lives in [`AnsatzSpec::build`] so
//! the wiring can be revised without touching any of the math.

use num_complex::Complex64;

use crate::pauli::{PauliOp, PauliWord};
use crate::statevector::{apply_gate, apply_pauli_word, Gate, StateVector};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AnsatzFamily {
    RyLinear,
    RyFull,
    RyCRyLinear,
    RyCRyFull,
}

impl AnsatzFamily {
    pub const ALL: [AnsatzFamily; 4] = [
        AnsatzFamily::RyLinear,
        AnsatzFamily::RyFull,
        AnsatzFamily::RyCRyLinear,
        AnsatzFamily::RyCRyFull,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AnsatzFamily::RyLinear => "Ry-Linear",
            AnsatzFamily::RyFull => "Ry-Full",
            AnsatzFamily::RyCRyLinear => "RyCRy-Linear",
            AnsatzFamily::RyCRyFull => "RyCRy-Full",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "ry-linear" => Ok(AnsatzFamily::RyLinear),
            "ry-full" => Ok(AnsatzFamily::RyFull),
            "rycry-linear" | "ry-cry-linear" => Ok(AnsatzFamily::RyCRyLinear),
            "rycry-full" | "ry-cry-full" => Ok(AnsatzFamily::RyCRyFull),
            other => Err(Error::Config(format!(
                "unknown ansatz family {other:?}; expected ry-linear, ry-full, rycry-linear or rycry-full"
            ))),
        }
    }

    fn uses_cry(self) -> bool {
        matches!(self, AnsatzFamily::RyCRyLinear | AnsatzFamily::RyCRyFull)
    }

    /// (control, target) pairs of one entangler pass, lexicographic.
    fn entangler_pairs(self, n_qubits: usize) -> Vec<(usize, usize)> {
        match self {
            AnsatzFamily::RyLinear | AnsatzFamily::RyCRyLinear => {
                (0..n_qubits.saturating_sub(1)).map(|q| (q, q + 1)).collect()
            }
            AnsatzFamily::RyFull | AnsatzFamily::RyCRyFull => (0..n_qubits)
                .flat_map(|c| ((c + 1)..n_qubits).map(move |t| (c, t)))
                .collect(),
        }
    }
}

impl std::fmt::Display for AnsatzFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AnsatzSpec {
    pub family: AnsatzFamily,
    pub n_qubits: usize,
    pub layers: usize,
}

impl AnsatzSpec {
    pub fn new(family: AnsatzFamily, n_qubits: usize, layers: usize) -> Result<Self> {
        let spec = AnsatzSpec {
            family,
            n_qubits,
            layers,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.layers == 0 {
            return Err(Error::Config("ansatz needs at least one layer".into()));
        }
        if self.n_qubits == 0 {
            return Err(Error::Config("ansatz needs at least one qubit".into()));
        }
        if self.family.uses_cry() && self.n_qubits < 2 {
            return Err(Error::Config(format!(
                "{} needs at least two qubits",
                self.family
            )));
        }
        Ok(())
    }

    /// Closed-form parameter count for the family.
    pub fn param_count(&self) -> usize {
        let n = self.n_qubits;
        let l = self.layers;
        match self.family {
            AnsatzFamily::RyLinear | AnsatzFamily::RyFull => l * n,
            AnsatzFamily::RyCRyLinear => (l + n - 1) * n,
            AnsatzFamily::RyCRyFull => (l + n * (n - 1) / 2) * n,
        }
    }

    /// Construct the gate list with parameter slots.
    pub fn build(&self) -> GateSequence {
        let n = self.n_qubits;
        let mut gates = Vec::new();
        let mut param_slots = Vec::new();
        let push_param = |gates: &mut Vec<Gate>, slots: &mut Vec<usize>, g: Gate| {
            slots.push(gates.len());
            gates.push(g);
        };
        let ry_column = |gates: &mut Vec<Gate>, slots: &mut Vec<usize>| {
            for q in 0..n {
                push_param(gates, slots, Gate::Ry { theta: 0.0, target: q });
            }
        };
        let pairs = self.family.entangler_pairs(n);

        if self.family.uses_cry() {
            // N repetitions of the CRY pair pattern, split across the gaps
            // between the L rotation columns.
            let rounds = n;
            let gaps = self.layers.saturating_sub(1).max(1);
            for col in 0..self.layers {
                ry_column(&mut gates, &mut param_slots);
                let (start, end) = if self.layers == 1 {
                    (0, rounds)
                } else if col < gaps {
                    (col * rounds / gaps, (col + 1) * rounds / gaps)
                } else {
                    (rounds, rounds)
                };
                for _ in start..end {
                    for &(c, t) in &pairs {
                        push_param(
                            &mut gates,
                            &mut param_slots,
                            Gate::CRy {
                                theta: 0.0,
                                control: c,
                                target: t,
                            },
                        );
                    }
                }
            }
        } else {
            for _ in 0..self.layers {
                ry_column(&mut gates, &mut param_slots);
                for &(c, t) in &pairs {
                    gates.push(Gate::CNot { control: c, target: t });
                }
            }
        }

        debug_assert_eq!(param_slots.len(), self.param_count());
        GateSequence { gates, param_slots }
    }

    /// Normalized all-real ansatz state U(θ)|0…0⟩.
    pub fn state(&self, theta: &[f64]) -> Result<StateVector> {
        self.build().state(self.n_qubits, theta)
    }

    /// Gate-insertion expansion of ∂/∂θ_i, as (coefficient, word) pairs.
    pub fn derivative_expansion(&self, param: usize) -> Result<Vec<DerivativeTerm>> {
        let seq = self.build();
        seq.derivative_expansion(self.n_qubits, param)
    }

    /// All columns ∂|φ(θ)⟩/∂θ_i as raw amplitude vectors.
    pub fn jacobian_states(&self, theta: &[f64]) -> Result<Vec<Vec<Complex64>>> {
        self.build().jacobian_states(self.n_qubits, theta)
    }

    /// Longest path through the gate dependency DAG; gates on disjoint
    /// qubits share a depth slot.
    pub fn logical_depth(&self) -> usize {
        let seq = self.build();
        let mut depth = vec![0usize; self.n_qubits];
        for gate in &seq.gates {
            let qubits = gate.qubits();
            let d = 1 + qubits.iter().map(|&q| depth[q]).max().unwrap_or(0);
            for q in qubits {
                depth[q] = d;
            }
        }
        depth.into_iter().max().unwrap_or(0)
    }
}

/// One term of a gate-derivative expansion: the word is inserted directly
/// before the parameterized gate, weighted by the scalar.
#[derive(Clone, Debug, PartialEq)]
pub struct DerivativeTerm {
    pub coefficient: Complex64,
    pub word: PauliWord,
}

/// Ordered gate list realizing an ansatz, with one slot per parameter.
#[derive(Clone, Debug, PartialEq)]
pub struct GateSequence {
    gates: Vec<Gate>,
    param_slots: Vec<usize>,
}

impl GateSequence {
    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn param_count(&self) -> usize {
        self.param_slots.len()
    }

    /// Gate position carrying parameter `i`.
    pub fn param_position(&self, param: usize) -> usize {
        self.param_slots[param]
    }

    /// Clone the gate list with parameter values bound.
    pub fn bound_gates(&self, theta: &[f64]) -> Result<Vec<Gate>> {
        if theta.len() != self.param_slots.len() {
            return Err(Error::ParamLength {
                got: theta.len(),
                expected: self.param_slots.len(),
            });
        }
        let mut gates = self.gates.clone();
        for (i, &pos) in self.param_slots.iter().enumerate() {
            match &mut gates[pos] {
                Gate::Ry { theta: t, .. } | Gate::CRy { theta: t, .. } => *t = theta[i],
                other => unreachable!("parameter slot on non-rotation gate {other:?}"),
            }
        }
        Ok(gates)
    }

    pub fn state(&self, n_qubits: usize, theta: &[f64]) -> Result<StateVector> {
        let gates = self.bound_gates(theta)?;
        let mut s = StateVector::zero(n_qubits);
        for g in &gates {
            s = apply_gate(&s, g)?;
        }
        Ok(s)
    }

    pub fn derivative_expansion(&self, n_qubits: usize, param: usize) -> Result<Vec<DerivativeTerm>> {
        if param >= self.param_slots.len() {
            return Err(Error::ParamLength {
                got: param,
                expected: self.param_slots.len(),
            });
        }
        let gate = &self.gates[self.param_slots[param]];
        Ok(match gate {
            Gate::Ry { target, .. } => vec![DerivativeTerm {
                coefficient: Complex64::new(0.0, -0.5),
                word: PauliWord::single(n_qubits, *target, PauliOp::Y)?,
            }],
            Gate::CRy { control, target, .. } => {
                // d/dθ CRY = CRY · [ -i/4 · I⊗Y + i/4 · Z⊗Y ] on (control, target)
                let mut zy = PauliWord::single(n_qubits, *target, PauliOp::Y)?;
                zy.set(*control, PauliOp::Z);
                vec![
                    DerivativeTerm {
                        coefficient: Complex64::new(0.0, -0.25),
                        word: PauliWord::single(n_qubits, *target, PauliOp::Y)?,
                    },
                    DerivativeTerm {
                        coefficient: Complex64::new(0.0, 0.25),
                        word: zy,
                    },
                ]
            }
            other => unreachable!("parameter slot on non-rotation gate {other:?}"),
        })
    }

    /// ∂|φ⟩/∂θ_i for every parameter, sharing circuit prefixes.
    pub fn jacobian_states(&self, n_qubits: usize, theta: &[f64]) -> Result<Vec<Vec<Complex64>>> {
        let gates = self.bound_gates(theta)?;

        // prefix[p] = gates[..p] applied to |0…0⟩, captured at parameter slots
        let mut prefixes: Vec<StateVector> = Vec::with_capacity(self.param_slots.len());
        let mut cursor = StateVector::zero(n_qubits);
        let mut next_slot = 0;
        for (pos, gate) in gates.iter().enumerate() {
            while next_slot < self.param_slots.len() && self.param_slots[next_slot] == pos {
                prefixes.push(cursor.clone());
                next_slot += 1;
            }
            cursor = apply_gate(&cursor, gate)?;
        }

        let mut columns = Vec::with_capacity(self.param_slots.len());
        for (i, &pos) in self.param_slots.iter().enumerate() {
            let mut column = vec![Complex64::ZERO; 1 << n_qubits];
            for term in self.derivative_expansion(n_qubits, i)? {
                let mut s = apply_pauli_word(&prefixes[i], &term.word)?;
                for gate in &gates[pos..] {
                    s = apply_gate(&s, gate)?;
                }
                for (acc, amp) in column.iter_mut().zip(s.amplitudes()) {
                    *acc += term.coefficient * amp;
                }
            }
            columns.push(column);
        }
        Ok(columns)
    }
}
