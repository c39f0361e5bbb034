//! Exact reference simulators for differential testing: a dense
//! density-matrix simulator and the concrete exponential-sum stabilizer
//! simulator the abstraction over-approximates. Both are desk-scale tools;
//! they share the Pauli algebra and residue computation with the production
//! path so disagreements point at transformer bugs.

use ndarray::Array2;
use num_complex::Complex64;
use thiserror::Error;

use crate::circuit::{builtin_matrix, Circuit, Gate, GateKind, Projection};
use crate::pauli::{ConcretePauli, Matrix, PauliLetter};
use crate::state::{product_residue, Residue};

pub const MAX_DENSE_QUBITS: usize = 10;
pub const MAX_SUM_QUBITS: usize = 8;
pub const SUM_TERM_CAP: usize = 4096;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("dense simulation limited to {MAX_DENSE_QUBITS} qubits, got {0}")]
    TooManyQubits(usize),
    #[error("sum simulation limited to {MAX_SUM_QUBITS} qubits, got {0}")]
    TooManySumQubits(usize),
    #[error("sum simulation exceeded {SUM_TERM_CAP} terms")]
    TermCapExceeded,
    #[error("gate `{0}` is not supported")]
    UnsupportedGate(String),
}

/// Embed a k-qubit gate matrix into an n-qubit operator acting on `targets`.
/// Qubit j corresponds to bit n-1-j of the basis index; gate slot t to bit
/// k-1-t.
pub fn embed_unitary(n: usize, targets: &[usize], gate: &Matrix) -> Matrix {
    let k = targets.len();
    assert_eq!(gate.nrows(), 1 << k);
    let dim = 1usize << n;
    let mut out: Matrix = Array2::zeros((dim, dim));
    for row in 0..dim {
        let gate_row: usize = targets
            .iter()
            .enumerate()
            .map(|(t, &q)| ((row >> (n - 1 - q)) & 1) << (k - 1 - t))
            .sum();
        for gate_col in 0..(1 << k) {
            let mut col = row;
            for (t, &q) in targets.iter().enumerate() {
                let bit = (gate_col >> (k - 1 - t)) & 1;
                let pos = n - 1 - q;
                col = (col & !(1 << pos)) | (bit << pos);
            }
            out[(row, col)] = gate[(gate_row, gate_col)];
        }
    }
    out
}

fn gate_matrix(gate: &Gate) -> Result<Matrix, OracleError> {
    builtin_matrix(&gate.name, &gate.params).ok_or_else(|| OracleError::UnsupportedGate(gate.name.clone()))
}

/// Projector (I + i^v * bare)/2 for a signed Pauli element.
fn projector(r: &ConcretePauli) -> Matrix {
    assert!(r.prefactor().is_multiple_of(2));
    let dim = 1usize << r.num_qubits();
    let identity: Matrix = Array2::from_diag_elem(dim, Complex64::new(1.0, 0.0));
    (identity + r.dense().expect("oracle-size element")).mapv(|x| x * 0.5)
}

fn projection_pauli(n: usize, gate: &Gate, outcome: Projection) -> ConcretePauli {
    let (letter, sign) = outcome.pauli_parts();
    ConcretePauli::single(n, gate.targets[0], letter).with_prefactor(sign)
}

/// Dense density-matrix state.
#[derive(Debug, Clone)]
pub struct DenseState {
    num_qubits: usize,
    rho: Matrix,
}

impl DenseState {
    pub fn init(num_qubits: usize) -> Result<DenseState, OracleError> {
        if num_qubits > MAX_DENSE_QUBITS {
            return Err(OracleError::TooManyQubits(num_qubits));
        }
        let dim = 1usize << num_qubits;
        let mut rho: Matrix = Array2::zeros((dim, dim));
        rho[(0, 0)] = Complex64::new(1.0, 0.0);
        Ok(DenseState { num_qubits, rho })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn rho(&self) -> &Matrix {
        &self.rho
    }

    pub fn apply_unitary(&mut self, targets: &[usize], gate: &Matrix) {
        let u = embed_unitary(self.num_qubits, targets, gate);
        let u_dag = u.t().mapv(|x| x.conj());
        self.rho = u.dot(&self.rho).dot(&u_dag);
    }

    /// M rho M with the projector of a signed Pauli element.
    pub fn project(&mut self, r: &ConcretePauli) {
        let m = projector(r);
        self.rho = m.dot(&self.rho).dot(&m);
    }

    /// Both projective outcomes summed (non-selective measurement).
    pub fn measure_both(&mut self, r: &ConcretePauli) {
        let plus = projector(r);
        let minus = projector(&r.negated());
        self.rho = plus.dot(&self.rho).dot(&plus) + minus.dot(&self.rho).dot(&minus);
    }

    pub fn trace(&self) -> f64 {
        let t: Complex64 = self.rho.diag().iter().sum();
        debug_assert!(t.im.abs() <= 1e-9);
        t.re
    }

    pub fn apply_gate(&mut self, gate: &Gate) -> Result<(), OracleError> {
        match gate.kind {
            GateKind::Unitary => {
                let m = gate_matrix(gate)?;
                self.apply_unitary(&gate.targets, &m);
            }
            GateKind::MeasureBoth => {
                let r = ConcretePauli::single(self.num_qubits, gate.targets[0], PauliLetter::Z);
                self.measure_both(&r);
            }
            GateKind::Project(outcome) => {
                let r = projection_pauli(self.num_qubits, gate, outcome);
                self.project(&r);
            }
        }
        Ok(())
    }

    pub fn run(circuit: &Circuit) -> Result<DenseState, OracleError> {
        let mut state = DenseState::init(circuit.num_qubits())?;
        for gate in circuit.instructions() {
            state.apply_gate(gate)?;
        }
        Ok(state)
    }

    /// Probability of observing 1 when measuring `qubit` in the Z basis.
    pub fn prob_one(&self, qubit: usize) -> f64 {
        let mut copy = self.clone();
        copy.project(&ConcretePauli::single(self.num_qubits, qubit, PauliLetter::Z).with_prefactor(2));
        copy.trace()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SumTerm {
    pub coeff: Complex64,
    pub pauli: ConcretePauli,
    pub signs: Vec<u8>,
}

/// Concrete exponential-sum stabilizer state: a list of terms
/// c * P * prod_j (I + (-1)^(b_j) Q_j)/2 over shared generators Q_j.
#[derive(Debug, Clone)]
pub struct SumState {
    num_qubits: usize,
    terms: Vec<SumTerm>,
    stabilizers: Vec<ConcretePauli>,
}

impl SumState {
    pub fn init(num_qubits: usize) -> Result<SumState, OracleError> {
        if num_qubits > MAX_SUM_QUBITS {
            return Err(OracleError::TooManySumQubits(num_qubits));
        }
        Ok(SumState {
            num_qubits,
            terms: vec![SumTerm {
                coeff: Complex64::new(1.0, 0.0),
                pauli: ConcretePauli::identity(num_qubits),
                signs: vec![0; num_qubits],
            }],
            stabilizers: (0..num_qubits)
                .map(|q| ConcretePauli::single(num_qubits, q, PauliLetter::Z))
                .collect(),
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn terms(&self) -> &[SumTerm] {
        &self.terms
    }

    pub fn stabilizers(&self) -> &[ConcretePauli] {
        &self.stabilizers
    }

    pub fn apply_gate(&mut self, gate: &Gate) -> Result<(), OracleError> {
        match gate.kind {
            GateKind::Unitary => {
                let action = crate::circuit::builtin_action(gate)
                    .map_err(|_| OracleError::UnsupportedGate(gate.name.clone()))?;
                match action {
                    crate::pauli::GateAction::Clifford(table) => {
                        for term in &mut self.terms {
                            term.pauli = table.conjugate(&term.pauli, &gate.targets);
                        }
                        for q in &mut self.stabilizers {
                            *q = table.conjugate(q, &gate.targets);
                        }
                    }
                    crate::pauli::GateAction::NonClifford(decomposition) => {
                        let padded: Vec<(Complex64, ConcretePauli)> = decomposition
                            .terms()
                            .iter()
                            .map(|(d, basis)| (*d, basis.embed(self.num_qubits, &gate.targets)))
                            .collect();
                        let blow_up = padded.len() * padded.len();
                        if self.terms.len().saturating_mul(blow_up) > SUM_TERM_CAP {
                            return Err(OracleError::TermCapExceeded);
                        }
                        let mut next = Vec::with_capacity(self.terms.len() * blow_up);
                        for (d_left, r_left) in &padded {
                            for term in &self.terms {
                                for (d_right, r_right) in &padded {
                                    let coeff = d_left * term.coeff * d_right.conj();
                                    let pauli = r_left.multiply(&term.pauli).multiply(r_right);
                                    let signs = term
                                        .signs
                                        .iter()
                                        .zip(&self.stabilizers)
                                        .map(|(&b, q)| (b + q.commutator(r_right)) % 2)
                                        .collect();
                                    next.push(SumTerm { coeff, pauli, signs });
                                }
                            }
                        }
                        self.terms = next;
                    }
                }
            }
            GateKind::MeasureBoth => {
                let r = ConcretePauli::single(self.num_qubits, gate.targets[0], PauliLetter::Z);
                self.measure_both(&r)?;
            }
            GateKind::Project(outcome) => {
                let r = projection_pauli(self.num_qubits, gate, outcome);
                self.project(&r);
            }
        }
        Ok(())
    }

    /// Rewrite so that at most the generator in slot 0 anticommutes with `r`,
    /// leaving the represented matrix unchanged. Returns whether any
    /// generator anticommutes.
    pub(crate) fn rewrite_anticommuting(&mut self, r: &ConcretePauli) -> bool {
        let anticommuting: Vec<usize> = (0..self.stabilizers.len())
            .filter(|&j| self.stabilizers[j].commutator(r) == 1)
            .collect();
        if anticommuting.is_empty() {
            return false;
        }
        let pivot = anticommuting[0];
        self.stabilizers.swap(0, pivot);
        for term in &mut self.terms {
            term.signs.swap(0, pivot);
        }
        for &j in &anticommuting[1..] {
            let folded = self.stabilizers[0].multiply(&self.stabilizers[j]);
            debug_assert!(folded.prefactor().is_multiple_of(2));
            self.stabilizers[j] = folded;
            for term in &mut self.terms {
                term.signs[j] = (term.signs[j] + term.signs[0]) % 2;
            }
        }
        true
    }

    /// Projection onto the +1 eigenspace of a signed Pauli element.
    pub fn project(&mut self, r: &ConcretePauli) {
        assert!(r.prefactor().is_multiple_of(2));
        if !self.rewrite_anticommuting(r) {
            // r commutes with every generator: terms survive exactly when r
            // is a product of the signed generators and commutes with P
            self.terms.retain(|term| {
                product_residue(r, &self.stabilizers, &term.signs) == Residue::Value(0)
                    && term.pauli.commutator(r) == 0
            });
            return;
        }
        let q_old = self.stabilizers[0].clone();
        for term in &mut self.terms {
            if term.pauli.commutator(r) == 1 {
                let flipped = term.pauli.multiply(&q_old);
                term.pauli = flipped.with_prefactor(flipped.prefactor() + 2 * term.signs[0]);
            }
            term.coeff *= 0.5;
            term.signs[0] = r.prefactor() / 2;
        }
        self.stabilizers[0] = r.bare();
    }

    /// Non-selective measurement: both outcomes concatenated.
    pub fn measure_both(&mut self, r: &ConcretePauli) -> Result<(), OracleError> {
        let mut plus = self.clone();
        plus.project(r);
        let mut minus = self.clone();
        minus.project(&r.negated());
        if plus.terms.len() + minus.terms.len() > SUM_TERM_CAP {
            return Err(OracleError::TermCapExceeded);
        }
        // both branches share generators after projection canonicalizes
        // slot 0 to bare(r); when one branch kept no terms its generators
        // may differ, which is irrelevant for an empty term list
        if plus.terms.is_empty() {
            *self = minus;
        } else if minus.terms.is_empty() {
            *self = plus;
        } else {
            debug_assert_eq!(plus.stabilizers, minus.stabilizers);
            plus.terms.extend(minus.terms);
            *self = plus;
        }
        Ok(())
    }

    pub fn trace(&self) -> f64 {
        self.terms
            .iter()
            .map(|term| {
                match product_residue(&term.pauli, &self.stabilizers, &term.signs) {
                    Residue::NoProduct => 0.0,
                    Residue::Value(v) => {
                        let phase = crate::pauli::i_to_the(v);
                        (term.coeff * phase).re
                    }
                }
            })
            .sum()
    }

    /// Dense reconstruction, for differential checks.
    pub fn to_dense(&self) -> Result<Matrix, OracleError> {
        if self.num_qubits > MAX_DENSE_QUBITS {
            return Err(OracleError::TooManyQubits(self.num_qubits));
        }
        let dim = 1usize << self.num_qubits;
        let identity: Matrix = Array2::from_diag_elem(dim, Complex64::new(1.0, 0.0));
        let mut rho: Matrix = Array2::zeros((dim, dim));
        for term in &self.terms {
            let mut m = term.pauli.dense().expect("oracle-size element").mapv(|x| x * term.coeff);
            for (j, q) in self.stabilizers.iter().enumerate() {
                let sign = if term.signs[j] == 0 { 1.0 } else { -1.0 };
                let factor = (&identity + &q.dense().expect("oracle-size element").mapv(|x| x * sign))
                    .mapv(|x| x * 0.5);
                m = m.dot(&factor);
            }
            rho = rho + m;
        }
        Ok(rho)
    }

    pub fn run(circuit: &Circuit) -> Result<SumState, OracleError> {
        let mut state = SumState::init(circuit.num_qubits())?;
        for gate in circuit.instructions() {
            state.apply_gate(gate)?;
        }
        Ok(state)
    }

    pub fn prob_one(&self, qubit: usize) -> f64 {
        let mut copy = self.clone();
        copy.project(&ConcretePauli::single(self.num_qubits, qubit, PauliLetter::Z).with_prefactor(2));
        copy.trace()
    }
}

pub fn max_abs_diff(a: &Matrix, b: &Matrix) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}
