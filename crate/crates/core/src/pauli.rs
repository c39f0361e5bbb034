//! Exact Pauli-group algebra: letters, group elements, multiplication,
//! commutators, conjugation tables for Clifford gates, dense-matrix
//! reconstruction and Pauli-basis decomposition of arbitrary unitaries.

use std::fmt;
use std::sync::Arc;

use ndarray::Array2;
use num_complex::Complex64;
use once_cell::sync::Lazy;
use thiserror::Error;

/// Dense complex matrix used for gate matrices and test oracles.
pub type Matrix = Array2<Complex64>;

/// Tolerance for matching a dense matrix against a Pauli element.
pub const PAULI_MATCH_TOL: f64 = 1e-9;
/// Coefficients below this magnitude are dropped from decompositions.
pub const COEFF_DROP_TOL: f64 = 1e-12;
/// Largest qubit count for which dense reconstruction is allowed.
pub const MAX_DENSE_QUBITS: usize = 12;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PauliError {
    #[error("dense reconstruction limited to {MAX_DENSE_QUBITS} qubits, got {0}")]
    TooManyQubits(usize),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GateError {
    #[error("gate matrix is not square with power-of-two dimension")]
    BadShape,
    #[error("gate matrix is not unitary within {PAULI_MATCH_TOL}")]
    NotUnitary,
    #[error("gate acts on too many qubits ({0})")]
    TooManyTargets(usize),
}

/// One of the four single-qubit Pauli matrices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PauliLetter {
    I,
    X,
    Y,
    Z,
}

impl PauliLetter {
    pub const ALL: [PauliLetter; 4] = [PauliLetter::I, PauliLetter::X, PauliLetter::Y, PauliLetter::Z];

    pub fn index(self) -> usize {
        match self {
            PauliLetter::I => 0,
            PauliLetter::X => 1,
            PauliLetter::Y => 2,
            PauliLetter::Z => 3,
        }
    }

    pub fn from_index(idx: usize) -> PauliLetter {
        Self::ALL[idx]
    }

    /// X component of the two-bit symplectic encoding.
    pub fn x_bit(self) -> bool {
        matches!(self, PauliLetter::X | PauliLetter::Y)
    }

    /// Z component of the two-bit symplectic encoding.
    pub fn z_bit(self) -> bool {
        matches!(self, PauliLetter::Z | PauliLetter::Y)
    }

    pub fn symbol(self) -> char {
        match self {
            PauliLetter::I => 'I',
            PauliLetter::X => 'X',
            PauliLetter::Y => 'Y',
            PauliLetter::Z => 'Z',
        }
    }

    /// The 2x2 dense matrix of this letter.
    pub fn matrix(self) -> Matrix {
        let z = Complex64::new(0.0, 0.0);
        let one = Complex64::new(1.0, 0.0);
        let i = Complex64::new(0.0, 1.0);
        let entries = match self {
            PauliLetter::I => vec![one, z, z, one],
            PauliLetter::X => vec![z, one, one, z],
            PauliLetter::Y => vec![z, -i, i, z],
            PauliLetter::Z => vec![one, z, z, -one],
        };
        Array2::from_shape_vec((2, 2), entries).expect("2x2 shape")
    }
}

/// i^v for v in Z4.
pub fn i_to_the(v: u8) -> Complex64 {
    match v % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

struct LetterTables {
    /// Bare letter of the product a*b.
    mul_bare: [[PauliLetter; 4]; 4],
    /// Z4 prefactor contributed by the product a*b.
    mul_phase: [[u8; 4]; 4],
    /// 1 iff the letters anticommute.
    anticommute: [[u8; 4]; 4],
}

fn max_abs_diff(a: &Matrix, b: &Matrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Match a 2x2 matrix against i^v * letter; None if it is not a Pauli element.
fn match_letter(m: &Matrix) -> Option<(PauliLetter, u8)> {
    for letter in PauliLetter::ALL {
        let base = letter.matrix();
        for v in 0..4u8 {
            if max_abs_diff(m, &base.mapv(|x| x * i_to_the(v))) <= PAULI_MATCH_TOL {
                return Some((letter, v));
            }
        }
    }
    None
}

// Letter-level lookup tables, generated once from the dense 2x2 matrices.
static LETTER_TABLES: Lazy<LetterTables> = Lazy::new(|| {
    let mut mul_bare = [[PauliLetter::I; 4]; 4];
    let mut mul_phase = [[0u8; 4]; 4];
    let mut anticommute = [[0u8; 4]; 4];
    for a in PauliLetter::ALL {
        for b in PauliLetter::ALL {
            let ab = a.matrix().dot(&b.matrix());
            let (bare, phase) = match_letter(&ab).expect("product of Paulis is a Pauli");
            mul_bare[a.index()][b.index()] = bare;
            mul_phase[a.index()][b.index()] = phase;
            let ba = b.matrix().dot(&a.matrix());
            anticommute[a.index()][b.index()] = u8::from(max_abs_diff(&ab, &ba) > PAULI_MATCH_TOL);
        }
    }
    LetterTables { mul_bare, mul_phase, anticommute }
});

pub fn letter_product(a: PauliLetter, b: PauliLetter) -> (PauliLetter, u8) {
    let t = &*LETTER_TABLES;
    (t.mul_bare[a.index()][b.index()], t.mul_phase[a.index()][b.index()])
}

pub fn letters_anticommute(a: PauliLetter, b: PauliLetter) -> bool {
    LETTER_TABLES.anticommute[a.index()][b.index()] == 1
}

/// A Pauli group element i^v * P(0) x ... x P(n-1).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ConcretePauli {
    prefactor: u8,
    letters: Vec<PauliLetter>,
}

impl ConcretePauli {
    pub fn new(prefactor: u8, letters: Vec<PauliLetter>) -> ConcretePauli {
        assert!(!letters.is_empty(), "Pauli element needs at least one qubit");
        ConcretePauli { prefactor: prefactor % 4, letters }
    }

    pub fn identity(n: usize) -> ConcretePauli {
        ConcretePauli::new(0, vec![PauliLetter::I; n])
    }

    /// A single non-identity letter at `qubit`, identity elsewhere.
    pub fn single(n: usize, qubit: usize, letter: PauliLetter) -> ConcretePauli {
        assert!(qubit < n);
        let mut letters = vec![PauliLetter::I; n];
        letters[qubit] = letter;
        ConcretePauli::new(0, letters)
    }

    /// Place a k-qubit element at the given target qubits of an n-qubit register.
    pub fn embed(&self, n: usize, targets: &[usize]) -> ConcretePauli {
        assert_eq!(targets.len(), self.num_qubits());
        let mut letters = vec![PauliLetter::I; n];
        for (slot, &q) in targets.iter().enumerate() {
            assert!(q < n);
            letters[q] = self.letters[slot];
        }
        ConcretePauli::new(self.prefactor, letters)
    }

    pub fn num_qubits(&self) -> usize {
        self.letters.len()
    }

    pub fn prefactor(&self) -> u8 {
        self.prefactor
    }

    pub fn letters(&self) -> &[PauliLetter] {
        &self.letters
    }

    pub fn letter(&self, qubit: usize) -> PauliLetter {
        self.letters[qubit]
    }

    /// The element without its prefactor.
    pub fn bare(&self) -> ConcretePauli {
        ConcretePauli::new(0, self.letters.clone())
    }

    pub fn is_bare(&self) -> bool {
        self.prefactor == 0
    }

    pub fn with_prefactor(&self, prefactor: u8) -> ConcretePauli {
        ConcretePauli::new(prefactor, self.letters.clone())
    }

    pub fn negated(&self) -> ConcretePauli {
        self.with_prefactor(self.prefactor + 2)
    }

    /// Group multiplication; prefactors accumulate per letter via lookup.
    pub fn multiply(&self, other: &ConcretePauli) -> ConcretePauli {
        assert_eq!(self.num_qubits(), other.num_qubits(), "qubit count mismatch");
        let mut prefactor = (self.prefactor + other.prefactor) % 4;
        let letters = self
            .letters
            .iter()
            .zip(other.letters.iter())
            .map(|(&a, &b)| {
                let (bare, phase) = letter_product(a, b);
                prefactor = (prefactor + phase) % 4;
                bare
            })
            .collect();
        ConcretePauli::new(prefactor, letters)
    }

    /// 0 iff the elements commute; parity of per-qubit anticommutations.
    pub fn commutator(&self, other: &ConcretePauli) -> u8 {
        assert_eq!(self.num_qubits(), other.num_qubits(), "qubit count mismatch");
        self.letters
            .iter()
            .zip(other.letters.iter())
            .map(|(&a, &b)| LETTER_TABLES.anticommute[a.index()][b.index()])
            .fold(0, |acc, c| acc ^ c)
    }

    pub fn commutes_with(&self, other: &ConcretePauli) -> bool {
        self.commutator(other) == 0
    }

    /// Dense 2^n x 2^n reconstruction i^v * (x) letters.
    pub fn dense(&self) -> Result<Matrix, PauliError> {
        let n = self.num_qubits();
        if n > MAX_DENSE_QUBITS {
            return Err(PauliError::TooManyQubits(n));
        }
        let mut m = self.letters[0].matrix();
        for letter in &self.letters[1..] {
            m = ndarray::linalg::kron(&m, &letter.matrix());
        }
        Ok(m.mapv(|x| x * i_to_the(self.prefactor)))
    }
}

impl fmt::Display for ConcretePauli {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prefix = ["", "i", "-", "-i"][self.prefactor as usize];
        write!(f, "{prefix}")?;
        for letter in &self.letters {
            write!(f, "{}", letter.symbol())?;
        }
        Ok(())
    }
}

/// Pack the letters at the given slots into a base-4 code, slot 0 least significant.
pub(crate) fn letters_to_code(letters: &[PauliLetter]) -> usize {
    letters
        .iter()
        .enumerate()
        .map(|(slot, letter)| letter.index() << (2 * slot))
        .sum()
}

pub(crate) fn code_to_letters(code: usize, k: usize) -> Vec<PauliLetter> {
    (0..k).map(|slot| PauliLetter::from_index((code >> (2 * slot)) & 3)).collect()
}

/// Conjugation table of a Clifford gate: for every bare letter tuple, the
/// resulting bare tuple and Z4 prefactor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliffordTable {
    num_targets: usize,
    entries: Vec<(u16, u8)>,
}

impl CliffordTable {
    pub fn num_targets(&self) -> usize {
        self.num_targets
    }

    pub fn entry(&self, code: usize) -> (usize, u8) {
        let (bare, phase) = self.entries[code];
        (bare as usize, phase)
    }

    /// Conjugate a concrete element: letters outside `targets` are unchanged,
    /// the prefactor picks up the table phase.
    pub fn conjugate(&self, p: &ConcretePauli, targets: &[usize]) -> ConcretePauli {
        assert_eq!(targets.len(), self.num_targets, "target count mismatch");
        let window: Vec<PauliLetter> = targets.iter().map(|&q| p.letter(q)).collect();
        let (code, phase) = self.entry(letters_to_code(&window));
        let new_window = code_to_letters(code, self.num_targets);
        let mut letters = p.letters().to_vec();
        for (slot, &q) in targets.iter().enumerate() {
            letters[q] = new_window[slot];
        }
        ConcretePauli::new(p.prefactor() + phase, letters)
    }
}

/// Decomposition of a gate into bare Pauli elements with complex coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliSumDecomposition {
    num_targets: usize,
    terms: Vec<(Complex64, ConcretePauli)>,
}

impl PauliSumDecomposition {
    pub fn new(num_targets: usize, terms: Vec<(Complex64, ConcretePauli)>) -> PauliSumDecomposition {
        for (i, (_, basis)) in terms.iter().enumerate() {
            assert!(basis.is_bare(), "basis elements carry no prefactor");
            assert_eq!(basis.num_qubits(), num_targets);
            assert!(!terms[..i].iter().any(|(_, b)| b == basis), "duplicate basis element");
        }
        PauliSumDecomposition { num_targets, terms }
    }

    pub fn num_targets(&self) -> usize {
        self.num_targets
    }

    pub fn terms(&self) -> &[(Complex64, ConcretePauli)] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Sum of coefficient * dense(basis element).
    pub fn reconstruct(&self) -> Matrix {
        let dim = 1 << self.num_targets;
        let mut m = Array2::zeros((dim, dim));
        for (coeff, basis) in &self.terms {
            m = m + basis.dense().expect("small basis element").mapv(|x| x * coeff);
        }
        m
    }
}

/// How a gate acts on Pauli elements: by a total conjugation table, or via a
/// sum of bare Pauli elements.
#[derive(Debug, Clone)]
pub enum GateAction {
    Clifford(Arc<CliffordTable>),
    NonClifford(Arc<PauliSumDecomposition>),
}

impl GateAction {
    pub fn num_targets(&self) -> usize {
        match self {
            GateAction::Clifford(t) => t.num_targets(),
            GateAction::NonClifford(d) => d.num_targets(),
        }
    }

    pub fn as_clifford(&self) -> Option<&CliffordTable> {
        match self {
            GateAction::Clifford(t) => Some(t),
            GateAction::NonClifford(_) => None,
        }
    }
}

fn identity_matrix(dim: usize) -> Matrix {
    Array2::from_diag_elem(dim, Complex64::new(1.0, 0.0))
}

fn adjoint(m: &Matrix) -> Matrix {
    m.t().mapv(|x| x.conj())
}

/// tr(a * b) without forming the product.
fn trace_of_product(a: &Matrix, b: &Matrix) -> Complex64 {
    let dim = a.nrows();
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..dim {
        for j in 0..dim {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    acc
}

/// Pauli-basis coefficients tr(R_s M) / 2^k for all bare codes s.
fn pauli_coefficients(m: &Matrix, k: usize) -> Vec<Complex64> {
    let dim = 1 << k;
    let norm = 1.0 / dim as f64;
    (0..(1usize << (2 * k)))
        .map(|code| {
            let basis = ConcretePauli::new(0, code_to_letters(code, k));
            trace_of_product(&basis.dense().expect("small basis"), m) * norm
        })
        .collect()
}

fn match_i_power(c: Complex64) -> Option<u8> {
    (0..4u8).find(|&v| (c - i_to_the(v)).norm() <= PAULI_MATCH_TOL)
}

/// Classify a unitary: a total conjugation table if every conjugated bare
/// tuple lands back in the Pauli group, otherwise its Pauli-sum decomposition.
pub fn classify_gate(u: &Matrix) -> Result<GateAction, GateError> {
    let dim = u.nrows();
    if u.ncols() != dim || dim < 2 || !dim.is_power_of_two() {
        return Err(GateError::BadShape);
    }
    let k = dim.trailing_zeros() as usize;
    if k > 6 {
        return Err(GateError::TooManyTargets(k));
    }
    let u_dag = adjoint(u);
    if max_abs_diff(&u_dag.dot(u), &identity_matrix(dim)) > PAULI_MATCH_TOL {
        return Err(GateError::NotUnitary);
    }

    let num_codes = 1usize << (2 * k);
    let mut entries = Vec::with_capacity(num_codes);
    let mut clifford = true;
    'codes: for code in 0..num_codes {
        let basis = ConcretePauli::new(0, code_to_letters(code, k));
        let conj = u.dot(&basis.dense().expect("small basis")).dot(&u_dag);
        let coeffs = pauli_coefficients(&conj, k);
        let mut found = None;
        for (s, &c) in coeffs.iter().enumerate() {
            if c.norm() <= PAULI_MATCH_TOL {
                continue;
            }
            match (found, match_i_power(c)) {
                (None, Some(v)) => found = Some((s as u16, v)),
                _ => {
                    clifford = false;
                    break 'codes;
                }
            }
        }
        match found {
            Some(entry) => entries.push(entry),
            None => {
                clifford = false;
                break 'codes;
            }
        }
    }

    if clifford {
        return Ok(GateAction::Clifford(Arc::new(CliffordTable { num_targets: k, entries })));
    }

    let terms = pauli_coefficients(u, k)
        .into_iter()
        .enumerate()
        .filter(|(_, c)| c.norm() > COEFF_DROP_TOL)
        .map(|(code, c)| (c, ConcretePauli::new(0, code_to_letters(code, k))))
        .collect();
    Ok(GateAction::NonClifford(Arc::new(PauliSumDecomposition { num_targets: k, terms })))
}
