//! Pauli words, weighted Pauli sums, and decomposition of 2^n-dimensional
//! matrices into the Pauli string basis.
//!
//! Coefficients are computed through the trace inner product
//! c_P = Tr(P·M)/2^n using the bit-twiddled one-nonzero-per-row structure of
//! Pauli words; the dense Kronecker route exists only in test oracles.
//!
//! Word strings put qubit 0 first: character k of `"IZYX"` acts on qubit k.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::{Error, Result};

/// Single-qubit Pauli factor.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PauliOp {
    I,
    X,
    Y,
    Z,
}

impl PauliOp {
    pub fn to_char(self) -> char {
        match self {
            PauliOp::I => 'I',
            PauliOp::X => 'X',
            PauliOp::Y => 'Y',
            PauliOp::Z => 'Z',
        }
    }

    pub fn from_char(c: char) -> Result<Self> {
        match c {
            'I' => Ok(PauliOp::I),
            'X' => Ok(PauliOp::X),
            'Y' => Ok(PauliOp::Y),
            'Z' => Ok(PauliOp::Z),
            other => Err(Error::InvalidPauliChar(other)),
        }
    }
}

/// Tensor product of Pauli factors over an n-qubit register.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PauliWord {
    ops: Vec<PauliOp>,
}

impl PauliWord {
    pub fn new(ops: Vec<PauliOp>) -> Result<Self> {
        if ops.is_empty() {
            return Err(Error::EmptyPauliWord);
        }
        Ok(PauliWord { ops })
    }

    /// All-identity word.
    pub fn identity(n_qubits: usize) -> Self {
        PauliWord {
            ops: vec![PauliOp::I; n_qubits],
        }
    }

    /// The same factor on every qubit.
    pub fn uniform(n_qubits: usize, op: PauliOp) -> Self {
        PauliWord {
            ops: vec![op; n_qubits],
        }
    }

    /// Identity word with a single non-identity factor.
    pub fn single(n_qubits: usize, qubit: usize, op: PauliOp) -> Result<Self> {
        if qubit >= n_qubits {
            return Err(Error::QubitOutOfRange {
                index: qubit,
                n_qubits,
            });
        }
        let mut ops = vec![PauliOp::I; n_qubits];
        ops[qubit] = op;
        PauliWord::new(ops)
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn op(&self, qubit: usize) -> PauliOp {
        self.ops[qubit]
    }

    pub fn set(&mut self, qubit: usize, op: PauliOp) {
        self.ops[qubit] = op;
    }

    /// Qubits carrying a non-identity factor.
    pub fn support(&self) -> Vec<usize> {
        self.ops
            .iter()
            .enumerate()
            .filter(|(_, op)| **op != PauliOp::I)
            .map(|(q, _)| q)
            .collect()
    }

    pub fn y_count(&self) -> usize {
        self.ops.iter().filter(|op| **op == PauliOp::Y).count()
    }

    /// Bit mask of qubits whose basis bit is flipped (X and Y factors).
    pub fn flip_mask(&self) -> usize {
        self.ops
            .iter()
            .enumerate()
            .filter(|(_, op)| matches!(op, PauliOp::X | PauliOp::Y))
            .fold(0, |m, (q, _)| m | (1 << q))
    }

    /// Phase picked up when acting on basis state |i⟩:
    /// P|i⟩ = phase_from(i) · |i ^ flip_mask⟩.
    pub fn phase_from(&self, index: usize) -> Complex64 {
        let mut y_total = 0usize;
        let mut sign_flips = 0usize;
        for (q, op) in self.ops.iter().enumerate() {
            let bit = (index >> q) & 1;
            match op {
                PauliOp::Y => {
                    y_total += 1;
                    sign_flips += bit;
                }
                PauliOp::Z => sign_flips += bit,
                _ => {}
            }
        }
        const I_POW: [Complex64; 4] = [
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 1.0),
            Complex64::new(-1.0, 0.0),
            Complex64::new(0.0, -1.0),
        ];
        let base = I_POW[y_total % 4];
        if sign_flips % 2 == 0 {
            base
        } else {
            -base
        }
    }
}

impl FromStr for PauliWord {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let ops = s
            .chars()
            .map(PauliOp::from_char)
            .collect::<Result<Vec<_>>>()?;
        PauliWord::new(ops)
    }
}

impl fmt::Display for PauliWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for op in &self.ops {
            write!(f, "{}", op.to_char())?;
        }
        Ok(())
    }
}

/// One weighted Pauli string.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliTerm {
    pub coefficient: Complex64,
    pub word: PauliWord,
}

/// Weighted sum of Pauli strings over a fixed register width.
///
/// Terms are kept merged (no duplicate words), pruned against the
/// construction threshold, and sorted by word for deterministic iteration.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliSum {
    n_qubits: usize,
    terms: Vec<PauliTerm>,
}

/// Default magnitude below which decomposition coefficients are dropped.
pub const DEFAULT_PRUNE_THRESHOLD: f64 = 1e-12;

impl PauliSum {
    /// Build a sum from raw terms, merging duplicates and pruning.
    pub fn new(n_qubits: usize, terms: Vec<PauliTerm>, prune_threshold: f64) -> Result<Self> {
        let mut merged: std::collections::BTreeMap<PauliWord, Complex64> =
            std::collections::BTreeMap::new();
        for t in terms {
            if t.word.len() != n_qubits {
                return Err(Error::DimensionMismatch {
                    left: t.word.len(),
                    right: n_qubits,
                });
            }
            *merged.entry(t.word).or_insert(Complex64::ZERO) += t.coefficient;
        }
        let terms = merged
            .into_iter()
            .filter(|(_, c)| c.norm() >= prune_threshold)
            .map(|(word, coefficient)| PauliTerm { coefficient, word })
            .collect();
        Ok(PauliSum { n_qubits, terms })
    }

    pub fn empty(n_qubits: usize) -> Self {
        PauliSum {
            n_qubits,
            terms: Vec::new(),
        }
    }

    /// Decompose a square matrix of dimension 2^n into Pauli strings,
    /// dropping coefficients with |c| < prune_threshold.
    pub fn decompose(matrix: &DMatrix<Complex64>, prune_threshold: f64) -> Result<Self> {
        let dim = matrix.nrows();
        if matrix.ncols() != dim {
            return Err(Error::DimensionMismatch {
                left: dim,
                right: matrix.ncols(),
            });
        }
        if dim == 0 || !dim.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(dim));
        }
        let n_qubits = dim.trailing_zeros() as usize;
        let mut terms = Vec::new();
        let mut word = PauliWord::identity(n_qubits);
        let n_words = 4usize.pow(n_qubits as u32);
        for code in 0..n_words {
            let mut rest = code;
            for q in 0..n_qubits {
                word.set(
                    q,
                    match rest & 3 {
                        0 => PauliOp::I,
                        1 => PauliOp::X,
                        2 => PauliOp::Y,
                        _ => PauliOp::Z,
                    },
                );
                rest >>= 2;
            }
            // Tr(P·M) = Σ_j phase(j) · M[j, j ^ flip]
            let flip = word.flip_mask();
            let mut tr = Complex64::ZERO;
            for j in 0..dim {
                tr += word.phase_from(j) * matrix[(j, j ^ flip)];
            }
            let coefficient = tr / dim as f64;
            if coefficient.norm() >= prune_threshold {
                terms.push(PauliTerm {
                    coefficient,
                    word: word.clone(),
                });
            }
        }
        PauliSum::new(n_qubits, terms, prune_threshold)
    }

    /// Convenience wrapper for real matrices.
    pub fn decompose_real(matrix: &DMatrix<f64>, prune_threshold: f64) -> Result<Self> {
        let complex = matrix.map(|v| Complex64::new(v, 0.0));
        Self::decompose(&complex, prune_threshold)
    }

    /// Dense matrix Σ c_P · P.
    pub fn reconstruct(&self) -> DMatrix<Complex64> {
        let dim = 1usize << self.n_qubits;
        let mut m = DMatrix::zeros(dim, dim);
        for term in &self.terms {
            let flip = term.word.flip_mask();
            for i in 0..dim {
                m[(i ^ flip, i)] += term.coefficient * term.word.phase_from(i);
            }
        }
        m
    }

    /// Σ c_P · P applied to a raw amplitude vector; the result is not
    /// necessarily normalized.
    pub fn matvec(&self, vec: &[Complex64]) -> Result<Vec<Complex64>> {
        let dim = 1usize << self.n_qubits;
        if vec.len() != dim {
            return Err(Error::DimensionMismatch {
                left: vec.len(),
                right: dim,
            });
        }
        let mut out = vec![Complex64::ZERO; dim];
        for term in &self.terms {
            let flip = term.word.flip_mask();
            for (i, v) in vec.iter().enumerate() {
                out[i ^ flip] += term.coefficient * term.word.phase_from(i) * v;
            }
        }
        Ok(out)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn terms(&self) -> &[PauliTerm] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Multiply every coefficient by a scalar.
    pub fn scaled(mut self, factor: Complex64) -> Self {
        for t in &mut self.terms {
            t.coefficient *= factor;
        }
        self
    }
}

/// Format terms as `coefficient_real coefficient_imag word` lines.
pub fn format_term_list(sum: &PauliSum) -> String {
    let mut out = String::new();
    for t in sum.terms() {
        out.push_str(&format!(
            "{:.17e} {:.17e} {}\n",
            t.coefficient.re, t.coefficient.im, t.word
        ));
    }
    out
}

/// Parse the text form produced by [`format_term_list`].
pub fn parse_term_list(text: &str) -> Result<PauliSum> {
    let mut terms = Vec::new();
    let mut width = None;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut fields = line.split_whitespace();
        let parse_f64 = |s: Option<&str>| -> Result<f64> {
            s.and_then(|v| v.parse().ok()).ok_or_else(|| Error::Parse {
                path: "<term list>".into(),
                line: lineno + 1,
                message: "expected `coefficient_real coefficient_imag word`".into(),
            })
        };
        let re = parse_f64(fields.next())?;
        let im = parse_f64(fields.next())?;
        let word: PauliWord = fields
            .next()
            .ok_or_else(|| Error::Parse {
                path: "<term list>".into(),
                line: lineno + 1,
                message: "missing Pauli word".into(),
            })?
            .parse()?;
        if fields.next().is_some() {
            return Err(Error::Parse {
                path: "<term list>".into(),
                line: lineno + 1,
                message: "trailing fields after Pauli word".into(),
            });
        }
        match width {
            None => width = Some(word.len()),
            Some(w) if w != word.len() => {
                return Err(Error::Parse {
                    path: "<term list>".into(),
                    line: lineno + 1,
                    message: format!("word length {} differs from {}", word.len(), w),
                })
            }
            _ => {}
        }
        terms.push(PauliTerm {
            coefficient: Complex64::new(re, im),
            word,
        });
    }
    let width = width.ok_or_else(|| Error::Parse {
        path: "<term list>".into(),
        line: 0,
        message: "no terms found".into(),
    })?;
    PauliSum::new(width, terms, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Independent Kronecker-product oracle for a word's dense matrix.
    fn dense_word(word: &PauliWord) -> DMatrix<Complex64> {
        let mats: [DMatrix<Complex64>; 4] = [
            DMatrix::identity(2, 2),
            DMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)]),
            DMatrix::from_row_slice(2, 2, &[c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)]),
            DMatrix::from_row_slice(2, 2, &[c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)]),
        ];
        let mut m = DMatrix::identity(1, 1);
        for q in (0..word.len()).rev() {
            let f = match word.op(q) {
                PauliOp::I => &mats[0],
                PauliOp::X => &mats[1],
                PauliOp::Y => &mats[2],
                PauliOp::Z => &mats[3],
            };
            m = m.kronecker(f);
        }
        m
    }

    fn random_matrix(n_qubits: usize, seed: u64, real: bool) -> DMatrix<Complex64> {
        let dim = 1 << n_qubits;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        DMatrix::from_fn(dim, dim, |_, _| {
            c(
                rng.gen_range(-1.0..1.0),
                if real { 0.0 } else { rng.gen_range(-1.0..1.0) },
            )
        })
    }

    fn max_abs(m: &DMatrix<Complex64>) -> f64 {
        m.iter().fold(0.0f64, |acc, v| acc.max(v.norm()))
    }

    #[test]
    fn word_string_round_trip_and_orientation() {
        let w: PauliWord = "IIYI".parse().unwrap();
        assert_eq!(w.op(2), PauliOp::Y);
        assert_eq!(w.support(), vec![2]);
        assert_eq!(w.to_string(), "IIYI");
        assert!("IQ".parse::<PauliWord>().is_err());
        assert!("".parse::<PauliWord>().is_err());
    }

    #[test]
    fn decompose_single_paulis() {
        let x = DMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)]);
        let sum = PauliSum::decompose(&x, 1e-12).unwrap();
        assert_eq!(sum.len(), 1);
        assert_eq!(sum.terms()[0].word.to_string(), "X");
        assert_abs_diff_eq!(sum.terms()[0].coefficient.re, 1.0, epsilon = 1e-14);

        let z = DMatrix::from_row_slice(2, 2, &[c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)]);
        let sum = PauliSum::decompose(&z, 1e-12).unwrap();
        assert_eq!(sum.len(), 1);
        assert_eq!(sum.terms()[0].word.to_string(), "Z");
    }

    #[test]
    fn non_power_of_two_rejected() {
        let m = DMatrix::<Complex64>::zeros(3, 3);
        assert!(PauliSum::decompose(&m, 0.0).is_err());
    }

    #[test]
    fn reconstruct_examples() {
        let sum = PauliSum::new(
            1,
            vec![PauliTerm {
                coefficient: Complex64::ONE,
                word: "X".parse().unwrap(),
            }],
            0.0,
        )
        .unwrap();
        let m = sum.reconstruct();
        assert_eq!(m[(0, 1)], Complex64::ONE);
        assert_eq!(m[(1, 0)], Complex64::ONE);

        let empty = PauliSum::empty(2);
        assert_eq!(max_abs(&empty.reconstruct()), 0.0);
    }

    #[test]
    fn matvec_examples() {
        let z = PauliSum::new(
            1,
            vec![PauliTerm {
                coefficient: Complex64::ONE,
                word: "Z".parse().unwrap(),
            }],
            0.0,
        )
        .unwrap();
        let out = z.matvec(&[Complex64::ZERO, Complex64::ONE]).unwrap();
        assert_eq!(out[1], -Complex64::ONE);

        let xz = PauliSum::new(
            1,
            vec![
                PauliTerm {
                    coefficient: Complex64::ONE,
                    word: "X".parse().unwrap(),
                },
                PauliTerm {
                    coefficient: Complex64::ONE,
                    word: "Z".parse().unwrap(),
                },
            ],
            0.0,
        )
        .unwrap();
        let out = xz.matvec(&[Complex64::ONE, Complex64::ZERO]).unwrap();
        assert_eq!(out[0], Complex64::ONE);
        assert_eq!(out[1], Complex64::ONE);

        assert!(z.matvec(&[Complex64::ONE]).is_err());
    }

    #[test]
    fn matvec_matches_dense_product() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for n in [2usize, 4, 6] {
            let m = random_matrix(n, 100 + n as u64, false);
            let sum = PauliSum::decompose(&m, 0.0).unwrap();
            let v: Vec<Complex64> = (0..1 << n)
                .map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            let fast = sum.matvec(&v).unwrap();
            let dense = &m * DMatrix::from_column_slice(1 << n, 1, &v);
            for i in 0..1 << n {
                assert!((fast[i] - dense[(i, 0)]).norm() <= 1e-10);
            }
        }
    }

    #[test]
    fn hermitian_matrix_gives_real_coefficients() {
        let m = random_matrix(3, 5, false);
        let herm = (&m + m.adjoint()) * c(0.5, 0.0);
        let sum = PauliSum::decompose(&herm, 0.0).unwrap();
        for t in sum.terms() {
            assert!(t.coefficient.im.abs() <= 1e-12, "{t:?}");
        }
    }

    #[test]
    fn real_antisymmetric_structure() {
        // Real antisymmetric matrices live entirely on odd-Y words, and in
        // the standard Pauli convention (Y carries its i) those coefficients
        // are purely imaginary.
        let m = random_matrix(3, 6, true);
        let anti = (&m - m.transpose()) * c(0.5, 0.0);
        let sum = PauliSum::decompose(&anti, 1e-12).unwrap();
        assert!(!sum.is_empty());
        for t in sum.terms() {
            assert_eq!(t.word.y_count() % 2, 1, "even-Y word {} survived", t.word);
            assert!(t.coefficient.re.abs() <= 1e-12, "{t:?}");
        }
        // general real matrices: even-Y words real, odd-Y words imaginary
        let sum = PauliSum::decompose(&m, 1e-12).unwrap();
        for t in sum.terms() {
            if t.word.y_count() % 2 == 0 {
                assert!(t.coefficient.im.abs() <= 1e-12, "{t:?}");
            } else {
                assert!(t.coefficient.re.abs() <= 1e-12, "{t:?}");
            }
        }
    }

    #[test]
    fn decompose_is_linear() {
        let alpha = c(2.5, 0.0);
        let m1 = random_matrix(2, 11, false);
        let m2 = random_matrix(2, 12, false);
        let combo = &m1 * alpha + &m2;
        let s1 = PauliSum::decompose(&m1, 0.0).unwrap();
        let s2 = PauliSum::decompose(&m2, 0.0).unwrap();
        let sc = PauliSum::decompose(&combo, 0.0).unwrap();
        for t in sc.terms() {
            let c1 = s1
                .terms()
                .iter()
                .find(|u| u.word == t.word)
                .map_or(Complex64::ZERO, |u| u.coefficient);
            let c2 = s2
                .terms()
                .iter()
                .find(|u| u.word == t.word)
                .map_or(Complex64::ZERO, |u| u.coefficient);
            assert!((t.coefficient - (alpha * c1 + c2)).norm() <= 1e-12);
        }
    }

    #[test]
    fn coefficients_match_kron_oracle() {
        let m = random_matrix(3, 21, false);
        let sum = PauliSum::decompose(&m, 0.0).unwrap();
        for t in sum.terms().iter().step_by(7) {
            let dense = dense_word(&t.word);
            let expected = (dense.adjoint() * &m).trace() / c(8.0, 0.0);
            assert!((t.coefficient - expected).norm() <= 1e-12);
        }
    }

    #[test]
    fn term_list_round_trip() {
        let m = random_matrix(2, 33, false);
        let sum = PauliSum::decompose(&m, 1e-12).unwrap();
        let text = format_term_list(&sum);
        let back = parse_term_list(&text).unwrap();
        assert_eq!(back.len(), sum.len());
        for (a, b) in sum.terms().iter().zip(back.terms()) {
            assert_eq!(a.word, b.word);
            assert!((a.coefficient - b.coefficient).norm() <= 1e-15);
        }
        assert!(parse_term_list("").is_err());
        assert!(parse_term_list("1.0 nope X").is_err());
        assert!(parse_term_list("1.0 0.0 X\n1.0 0.0 XX").is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn round_trip_identity(seed in 0u64..200, n in 1usize..=7, real in any::<bool>()) {
            // dims up to 128, dense and (effectively) sparse inputs
            let mut m = random_matrix(n, seed, real);
            if seed % 2 == 0 {
                // sparsify: zero out most entries
                let dim = 1 << n;
                let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed ^ 0xabc);
                for i in 0..dim {
                    for j in 0..dim {
                        if rng.gen_range(0..10) < 8 {
                            m[(i, j)] = Complex64::ZERO;
                        }
                    }
                }
            }
            let sum = PauliSum::decompose(&m, 0.0).unwrap();
            let back = sum.reconstruct();
            prop_assert!(max_abs(&(&m - &back)) <= 1e-10);
        }
    }
}
