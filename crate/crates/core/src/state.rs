//! The abstract density matrix and its transformers: initialization, gate
//! application, summand compression, measurement and the abstract trace.
//!
//! A state is r * c * P * prod_j (I + (-1)^(b_j) Q_j)/2 with an integer
//! summand count r, an abstract coefficient c, an abstract leading Pauli P,
//! abstract sign bits b_j and concrete stabilizer generators Q_j. It
//! over-approximates a sum of r concrete summands that share the Q_j.

use num_bigint::BigUint;
use num_complex::Complex64;
use num_traits::{One, ToPrimitive, Zero};

use crate::apauli::AbstractPauli;
use crate::circuit::{builtin_action, Circuit, CircuitError, Gate, GateKind};
use crate::domains::{AbstractBool, AbstractComplex, AbstractZ4, ResidueSet};
use crate::f2::{encode_abstract_pauli, encode_generators, encode_pauli, solve, solve_abstract_rhs, SolveResult};
use crate::interval::Interval;
use crate::pauli::{CliffordTable, ConcretePauli, GateAction, PauliLetter, PauliSumDecomposition};

/// Residue of expressing a Pauli element as a product of signed stabilizer
/// generators: zero means expressible, nonzero means the candidate product
/// differs by a phase, and `NoProduct` means no candidate exists.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Residue {
    Value(u8),
    NoProduct,
}

/// Concrete residue check for concrete sign bits.
pub fn product_residue(r: &ConcretePauli, gens: &[ConcretePauli], signs: &[u8]) -> Residue {
    assert_eq!(gens.len(), signs.len(), "dimension mismatch");
    if gens.iter().any(|q| r.commutator(q) == 1) {
        return Residue::NoProduct;
    }
    let system = encode_generators(gens);
    match solve(&system, &encode_pauli(r)) {
        SolveResult::NoSolution => Residue::NoProduct,
        SolveResult::Solved { particular, null_basis } => {
            debug_assert!(null_basis.is_empty(), "stabilizer generators must be independent");
            let n = r.num_qubits();
            let mut product = ConcretePauli::identity(n);
            let mut sign_sum = 0u8;
            for (j, selected) in particular.iter().enumerate() {
                if selected {
                    product = product.multiply(&gens[j]);
                    sign_sum = (sign_sum + 2 * signs[j]) % 4;
                }
            }
            Residue::Value((8 + r.prefactor() - product.prefactor() - sign_sum) % 4)
        }
    }
}

/// Residue set for abstract sign bits: the image of the concrete residue over
/// all sign concretizations.
pub fn product_residue_signs(
    r: &ConcretePauli,
    gens: &[ConcretePauli],
    signs: &[AbstractBool],
) -> ResidueSet {
    assert_eq!(gens.len(), signs.len(), "dimension mismatch");
    if gens.iter().any(|q| r.commutator(q) == 1) {
        return ResidueSet::no_product();
    }
    let system = encode_generators(gens);
    match solve(&system, &encode_pauli(r)) {
        SolveResult::NoSolution => ResidueSet::no_product(),
        SolveResult::Solved { particular, null_basis } => {
            debug_assert!(null_basis.is_empty(), "stabilizer generators must be independent");
            let n = r.num_qubits();
            let mut product = ConcretePauli::identity(n);
            let mut sign_sum = AbstractZ4::ZERO;
            for (j, selected) in particular.iter().enumerate() {
                if selected {
                    product = product.multiply(&gens[j]);
                    sign_sum = sign_sum.add(AbstractZ4::from_bool(signs[j]));
                }
            }
            let base = AbstractZ4::from_value(r.prefactor())
                .sub(AbstractZ4::from_value(product.prefactor()))
                .sub(sign_sum.doubled());
            ResidueSet::from_z4(base)
        }
    }
}

/// Fully abstract residue set for an abstract Pauli element and abstract sign
/// bits, used by the trace.
pub fn product_residue_abstract(
    r: &AbstractPauli,
    gens: &[ConcretePauli],
    signs: &[AbstractBool],
) -> ResidueSet {
    assert_eq!(gens.len(), signs.len(), "dimension mismatch");
    if r.is_bottom() {
        return ResidueSet::top();
    }
    let commutators: Vec<AbstractBool> = gens
        .iter()
        .map(|q| r.commutator(&AbstractPauli::lift(q)))
        .collect();
    if commutators.contains(&AbstractBool::ONE) {
        return ResidueSet::no_product();
    }
    let uncertain = commutators.iter().any(|&c| c != AbstractBool::ZERO);

    let system = encode_generators(gens);
    let solved = match solve_abstract_rhs(&system, &encode_abstract_pauli(r)) {
        // contradictory encoding: nothing is constrained, stay sound
        Err(_) => return ResidueSet::top(),
        Ok(SolveResult::NoSolution) => return ResidueSet::no_product(),
        Ok(SolveResult::Solved { particular, null_basis }) => (particular, null_basis),
    };
    let (particular, null_basis) = solved;

    let n = r.num_qubits();
    let mut exponents = Vec::with_capacity(gens.len());
    for j in 0..gens.len() {
        let free = null_basis.iter().any(|u| u.get(j));
        exponents.push(if free {
            AbstractBool::BOTH
        } else {
            AbstractBool::from_bit(particular.get(j) as u8)
        });
    }

    // prefactor of the abstract product of generator powers
    let mut product = AbstractPauli::identity(n);
    for (j, &x) in exponents.iter().enumerate() {
        let factor = match x {
            AbstractBool::ZERO => AbstractPauli::identity(n),
            AbstractBool::ONE => AbstractPauli::lift(&gens[j]),
            _ => AbstractPauli::identity(n).join(&AbstractPauli::lift(&gens[j])),
        };
        product = product.mul(&factor);
    }

    let mut sign_sum = AbstractZ4::ZERO;
    for (j, &x) in exponents.iter().enumerate() {
        sign_sum = sign_sum.add(AbstractZ4::from_bool(x).mul(AbstractZ4::from_bool(signs[j])));
    }
    let base = r.pref().sub(product.pref()).sub(sign_sum.doubled());
    let rs = ResidueSet::from_z4(base);
    if uncertain {
        rs.with_no_product()
    } else {
        rs
    }
}

/// Enclosure of ln(r) for a positive big integer.
fn ln_biguint(r: &BigUint) -> Interval {
    assert!(!r.is_zero());
    if r.is_one() {
        return Interval::ZERO;
    }
    let bits = r.bits();
    if bits <= 53 {
        let v = r.to_f64().expect("fits in f64");
        return Interval::point_widened(v.ln(), 2);
    }
    // r = m * 2^shift + tail with 2^52 <= m < 2^53, 0 <= tail < 2^shift
    let shift = bits - 53;
    let m = (r >> shift).to_f64().expect("53-bit mantissa");
    let scale = Interval::point_widened(shift as f64 * std::f64::consts::LN_2, 2);
    let lo = Interval::point_widened(m.ln(), 2).add(&scale);
    let hi = Interval::point_widened((m + 1.0).ln(), 2).add(&scale);
    Interval::new(lo.lo, hi.hi)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AbstractDensityMatrix {
    num_qubits: usize,
    zero: bool,
    count: BigUint,
    coeff: AbstractComplex,
    pauli: AbstractPauli,
    signs: Vec<AbstractBool>,
    stabilizers: Vec<ConcretePauli>,
}

impl AbstractDensityMatrix {
    /// The all-zeros computational basis state on n qubits.
    pub fn init(num_qubits: usize) -> AbstractDensityMatrix {
        assert!(num_qubits >= 1, "need at least one qubit");
        AbstractDensityMatrix {
            num_qubits,
            zero: false,
            count: BigUint::one(),
            coeff: AbstractComplex::one(),
            pauli: AbstractPauli::identity(num_qubits),
            signs: vec![AbstractBool::ZERO; num_qubits],
            stabilizers: (0..num_qubits)
                .map(|q| ConcretePauli::single(num_qubits, q, PauliLetter::Z))
                .collect(),
        }
    }

    /// The exact zero matrix.
    pub fn zero_state(num_qubits: usize) -> AbstractDensityMatrix {
        AbstractDensityMatrix {
            num_qubits,
            zero: true,
            count: BigUint::zero(),
            coeff: AbstractComplex::zero(),
            pauli: AbstractPauli::identity(num_qubits),
            signs: vec![AbstractBool::ZERO; num_qubits],
            stabilizers: (0..num_qubits)
                .map(|q| ConcretePauli::single(num_qubits, q, PauliLetter::Z))
                .collect(),
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn is_zero(&self) -> bool {
        self.zero
    }

    pub fn count(&self) -> &BigUint {
        &self.count
    }

    pub fn coeff(&self) -> &AbstractComplex {
        &self.coeff
    }

    pub fn pauli(&self) -> &AbstractPauli {
        &self.pauli
    }

    pub fn signs(&self) -> &[AbstractBool] {
        &self.signs
    }

    pub fn stabilizers(&self) -> &[ConcretePauli] {
        &self.stabilizers
    }

    pub fn is_bottom(&self) -> bool {
        !self.zero
            && (self.coeff.is_bottom()
                || self.pauli.is_bottom()
                || self.signs.iter().any(|b| b.is_bottom()))
    }

    /// Conjugate the leading Pauli and every stabilizer generator.
    pub fn apply_clifford(&self, table: &CliffordTable, targets: &[usize]) -> AbstractDensityMatrix {
        if self.zero {
            return self.clone();
        }
        let stabilizers: Vec<ConcretePauli> = self
            .stabilizers
            .iter()
            .map(|q| {
                let conj = table.conjugate(q, targets);
                debug_assert!(conj.prefactor().is_multiple_of(2), "stabilizers stay Hermitian");
                conj
            })
            .collect();
        AbstractDensityMatrix {
            pauli: self.pauli.conjugate(table, targets),
            stabilizers,
            ..self.clone()
        }
    }

    /// One summand per pair of decomposition terms; the stabilizers are
    /// untouched, sign bits pick up the commutators with the right factor.
    pub fn expand_decomposed(
        &self,
        decomposition: &PauliSumDecomposition,
        targets: &[usize],
    ) -> Vec<AbstractDensityMatrix> {
        assert!(!decomposition.is_empty());
        if self.zero {
            return vec![self.clone()];
        }
        let n = self.num_qubits;
        let terms: Vec<(AbstractComplex, ConcretePauli)> = decomposition
            .terms()
            .iter()
            .map(|(d, basis)| (AbstractComplex::from_complex(*d), basis.embed(n, targets)))
            .collect();

        let mut out = Vec::with_capacity(terms.len() * terms.len());
        for (d_left, r_left) in &terms {
            let left = AbstractPauli::lift(r_left).mul(&self.pauli);
            for (d_right, r_right) in &terms {
                let coeff = d_left.mul(&self.coeff).mul(&d_right.conj());
                let pauli = left.mul(&AbstractPauli::lift(r_right));
                let signs = self
                    .signs
                    .iter()
                    .zip(&self.stabilizers)
                    .map(|(&b, q)| b.add(AbstractBool::from_bit(q.commutator(r_right))))
                    .collect();
                out.push(AbstractDensityMatrix {
                    num_qubits: n,
                    zero: false,
                    count: self.count.clone(),
                    coeff,
                    pauli,
                    signs,
                    stabilizers: self.stabilizers.clone(),
                });
            }
        }
        out
    }

    /// Apply a decomposed gate and immediately compress to one summand.
    pub fn apply_decomposed(
        &self,
        decomposition: &PauliSumDecomposition,
        targets: &[usize],
    ) -> AbstractDensityMatrix {
        AbstractDensityMatrix::compress(&self.expand_decomposed(decomposition, targets))
    }

    /// Join summands sharing the same stabilizer generators: counts add,
    /// everything else is joined. Exact zero summands are dropped.
    pub fn compress(summands: &[AbstractDensityMatrix]) -> AbstractDensityMatrix {
        assert!(!summands.is_empty());
        let live: Vec<&AbstractDensityMatrix> = summands.iter().filter(|s| !s.zero).collect();
        let Some(first) = live.first() else {
            return AbstractDensityMatrix::zero_state(summands[0].num_qubits);
        };
        let mut acc = (*first).clone();
        for s in &live[1..] {
            assert_eq!(s.stabilizers, acc.stabilizers, "summands must share stabilizers");
            acc.count += &s.count;
            acc.coeff = acc.coeff.join(&s.coeff);
            acc.pauli = acc.pauli.join(&s.pauli);
            for (b, other) in acc.signs.iter_mut().zip(&s.signs) {
                *b = b.join(*other);
            }
        }
        acc
    }

    /// Project onto the +1 eigenspace of a signed Pauli element (prefactor
    /// 0 or 2). The minus outcome of a measurement is the negated element.
    pub fn measure_project(&self, r: &ConcretePauli) -> AbstractDensityMatrix {
        assert_eq!(r.num_qubits(), self.num_qubits);
        assert!(r.prefactor().is_multiple_of(2), "projection needs a Hermitian element");
        if self.zero {
            return self.clone();
        }
        assert!(!self.is_bottom(), "cannot measure a bottom state");

        let anticommuting: Vec<usize> = (0..self.stabilizers.len())
            .filter(|&j| self.stabilizers[j].commutator(r) == 1)
            .collect();
        let r_lifted = AbstractPauli::lift(&r.bare());

        if anticommuting.is_empty() {
            // r commutes with every generator: the projector either keeps the
            // state, annihilates it, or cannot be decided
            let rs = product_residue_signs(r, &self.stabilizers, &self.signs);
            let comm = self.pauli.commutator(&r_lifted);
            if rs.definitely_zero() && comm == AbstractBool::ZERO {
                return self.clone();
            }
            if rs.definitely_nonzero() || comm == AbstractBool::ONE {
                return AbstractDensityMatrix::zero_state(self.num_qubits);
            }
            return AbstractDensityMatrix { coeff: self.coeff.join(&AbstractComplex::zero()), ..self.clone() };
        }

        // r anticommutes with at least one generator: rewrite so only the
        // first one anticommutes, then replace it by r
        let mut st = self.clone();
        let pivot = anticommuting[0];
        st.stabilizers.swap(0, pivot);
        st.signs.swap(0, pivot);
        for &j in &anticommuting[1..] {
            let folded = st.stabilizers[0].multiply(&st.stabilizers[j]);
            debug_assert!(folded.prefactor().is_multiple_of(2));
            st.stabilizers[j] = folded;
            st.signs[j] = st.signs[j].add(st.signs[0]);
        }

        let sign_old = st.signs[0];
        let q_old = st.stabilizers[0].clone();
        let comm = st.pauli.commutator(&r_lifted);
        if comm != AbstractBool::ZERO {
            let flipped = st.pauli.mul(&AbstractPauli::lift(&q_old)).sign_flip(sign_old);
            st.pauli = if comm == AbstractBool::ONE { flipped } else { st.pauli.join(&flipped) };
        }
        st.coeff = st.coeff.mul(&AbstractComplex::from_complex(Complex64::new(0.5, 0.0)));
        st.stabilizers[0] = r.bare();
        st.signs[0] = AbstractBool::from_bit(r.prefactor() / 2);
        st
    }

    /// Non-selective measurement: both projected outcomes compressed into a
    /// single state. Outcomes that are exactly the zero matrix are dropped.
    pub fn measure_both(&self, r: &ConcretePauli) -> AbstractDensityMatrix {
        let plus = self.measure_project(r);
        let minus = self.measure_project(&r.negated());
        match (plus.is_zero(), minus.is_zero()) {
            (true, true) => AbstractDensityMatrix::zero_state(self.num_qubits),
            (false, true) => plus,
            (true, false) => minus,
            (false, false) => AbstractDensityMatrix::compress(&[plus, minus]),
        }
    }

    /// Sound enclosure of the trace.
    pub fn trace(&self) -> Interval {
        if self.zero {
            return Interval::ZERO;
        }
        let rs = product_residue_abstract(&self.pauli, &self.stabilizers, &self.signs);
        let mut value = self.coeff.mul(&AbstractComplex::i_power(rs));
        if !value.is_zero() && !value.is_bottom() {
            value.log_mag = value.log_mag.add(&ln_biguint(&self.count));
        }
        value.re()
    }

    /// Rough memory footprint, for run statistics.
    pub fn approx_bytes(&self) -> usize {
        let n = self.num_qubits;
        // letter sets + sign bits + n generators of n letters + count
        n + n + n * n + self.count.bits().div_ceil(8) as usize + 64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimOptions {
    /// Summands kept before compression merges the overflow.
    pub max_summands: usize,
}

impl Default for SimOptions {
    fn default() -> Self {
        SimOptions { max_summands: 1 }
    }
}

/// Simulation state: a bounded list of abstract summands whose sum
/// over-approximates the density matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct AbstractState {
    num_qubits: usize,
    options: SimOptions,
    summands: Vec<AbstractDensityMatrix>,
}

impl AbstractState {
    pub fn new(num_qubits: usize) -> AbstractState {
        AbstractState::with_options(num_qubits, SimOptions::default())
    }

    pub fn with_options(num_qubits: usize, options: SimOptions) -> AbstractState {
        assert!(options.max_summands >= 1);
        AbstractState {
            num_qubits,
            options,
            summands: vec![AbstractDensityMatrix::init(num_qubits)],
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn summands(&self) -> &[AbstractDensityMatrix] {
        &self.summands
    }

    pub fn is_zero(&self) -> bool {
        self.summands.iter().all(|s| s.is_zero())
    }

    /// Total number of concrete summands abstracted by this state.
    pub fn summand_count(&self) -> BigUint {
        self.summands.iter().map(|s| s.count().clone()).sum()
    }

    pub fn apply_action(&mut self, action: &GateAction, targets: &[usize]) {
        match action {
            GateAction::Clifford(table) => {
                for s in &mut self.summands {
                    *s = s.apply_clifford(table, targets);
                }
            }
            GateAction::NonClifford(decomposition) => {
                let mut next = Vec::new();
                for s in &self.summands {
                    next.extend(s.expand_decomposed(decomposition, targets));
                }
                next.retain(|s| !s.is_zero());
                if next.is_empty() {
                    next.push(AbstractDensityMatrix::zero_state(self.num_qubits));
                } else if next.len() > self.options.max_summands {
                    let tail = next.split_off(self.options.max_summands - 1);
                    next.push(AbstractDensityMatrix::compress(&tail));
                }
                self.summands = next;
            }
        }
    }

    fn map_summands(&mut self, f: impl Fn(&AbstractDensityMatrix) -> AbstractDensityMatrix) {
        let mut next: Vec<AbstractDensityMatrix> = self.summands.iter().map(f).collect();
        next.retain(|s| !s.is_zero());
        if next.is_empty() {
            next.push(AbstractDensityMatrix::zero_state(self.num_qubits));
        }
        self.summands = next;
    }

    pub fn project(&mut self, r: &ConcretePauli) {
        self.map_summands(|s| s.measure_project(r));
    }

    pub fn measure_both(&mut self, r: &ConcretePauli) {
        self.map_summands(|s| s.measure_both(r));
    }

    /// Apply one instruction.
    pub fn apply_gate(&mut self, gate: &Gate) -> Result<(), CircuitError> {
        match gate.kind {
            GateKind::Unitary => {
                let action = builtin_action(gate)?;
                self.apply_action(&action, &gate.targets);
            }
            GateKind::MeasureBoth => {
                let r = ConcretePauli::single(self.num_qubits, gate.targets[0], PauliLetter::Z);
                self.measure_both(&r);
            }
            GateKind::Project(outcome) => {
                let (letter, sign) = outcome.pauli_parts();
                let r = ConcretePauli::single(self.num_qubits, gate.targets[0], letter)
                    .with_prefactor(sign);
                self.project(&r);
            }
        }
        Ok(())
    }

    /// Run a whole circuit from the initial all-zeros state.
    pub fn run(circuit: &Circuit, options: SimOptions) -> Result<AbstractState, CircuitError> {
        let mut state = AbstractState::with_options(circuit.num_qubits(), options);
        for gate in circuit.instructions() {
            state.apply_gate(gate)?;
        }
        Ok(state)
    }

    /// Sum of the summand traces.
    pub fn trace(&self) -> Interval {
        self.summands
            .iter()
            .map(|s| s.trace())
            .fold(Interval::ZERO, |acc, t| acc.add(&t))
    }

    /// Trace interval after projecting `qubit` onto the -1 eigenspace of Z,
    /// i.e. the probability of observing 1.
    pub fn prob_one(&self, qubit: usize) -> Interval {
        let mut copy = self.clone();
        let r = ConcretePauli::single(self.num_qubits, qubit, PauliLetter::Z).with_prefactor(2);
        copy.project(&r);
        copy.trace()
    }

    pub fn approx_bytes(&self) -> usize {
        self.summands.iter().map(|s| s.approx_bytes()).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::apauli::LetterSet;
    use crate::circuit::parse;
    use std::f64::consts::{FRAC_PI_2, PI};

    use PauliLetter::{I, X, Z};

    fn ls(letters: &[PauliLetter]) -> LetterSet {
        letters.iter().fold(LetterSet::BOTTOM, |acc, &l| acc.union(LetterSet::singleton(l)))
    }

    fn single(n: usize, q: usize, l: PauliLetter) -> ConcretePauli {
        ConcretePauli::single(n, q, l)
    }

    fn run_source(src: &str) -> AbstractState {
        AbstractState::run(&parse(src).unwrap(), SimOptions::default()).unwrap()
    }

    #[test]
    fn init_state_shape() {
        let st = AbstractDensityMatrix::init(2);
        assert_eq!(st.count(), &BigUint::one());
        assert_eq!(st.coeff(), &AbstractComplex::one());
        assert_eq!(st.pauli(), &AbstractPauli::identity(2));
        assert_eq!(st.signs(), &[AbstractBool::ZERO, AbstractBool::ZERO]);
        assert_eq!(st.stabilizers(), &[single(2, 0, Z), single(2, 1, Z)]);
        let t = st.trace();
        assert!(t.contains(1.0) && t.width() <= 1e-12, "{t}");
    }

    #[test]
    #[should_panic(expected = "at least one qubit")]
    fn init_rejects_zero_qubits() {
        let _ = AbstractDensityMatrix::init(0);
    }

    #[test]
    fn hadamards_turn_stabilizers_to_x() {
        let st = run_source("qreg q[2]; h q[0]; h q[1];");
        let s = &st.summands()[0];
        assert_eq!(s.stabilizers(), &[single(2, 0, X), single(2, 1, X)]);
        assert_eq!(s.pauli(), &AbstractPauli::identity(2));
        assert_eq!(s.count(), &BigUint::one());
    }

    #[test]
    fn clifford_involution_returns_to_start() {
        let st = run_source("qreg q[2]; cx q[0],q[1]; cx q[0],q[1];");
        assert_eq!(st.summands()[0], AbstractDensityMatrix::init(2));
    }

    #[test]
    fn t_gate_merges_to_four_summands() {
        let st = run_source("qreg q[2]; h q[0]; h q[1]; t q[0];");
        let s = &st.summands()[0];
        assert_eq!(st.summands().len(), 1);
        assert_eq!(s.count(), &BigUint::from(4u32));
        // coefficient box: log-magnitude between ln(sin^2 pi/8) and
        // ln(cos^2 pi/8), phase between -pi/2 and pi/2
        let lm = s.coeff().log_mag;
        let ph = s.coeff().phase;
        assert!((lm.lo - (PI / 8.0).sin().powi(2).ln()).abs() <= 1e-6, "{lm}");
        assert!((lm.hi - (PI / 8.0).cos().powi(2).ln()).abs() <= 1e-6, "{lm}");
        assert!((ph.lo + FRAC_PI_2).abs() <= 1e-6 && (ph.hi - FRAC_PI_2).abs() <= 1e-6, "{ph}");
        // leading Pauli {I, Z} on qubit 0, sign bits ({0,1}, {0})
        assert_eq!(s.pauli().letter_set(0), ls(&[I, Z]));
        assert_eq!(s.pauli().letter_set(1), ls(&[I]));
        assert_eq!(s.pauli().pref(), AbstractZ4::ZERO);
        assert_eq!(s.signs(), &[AbstractBool::BOTH, AbstractBool::ZERO]);
        assert_eq!(s.stabilizers(), &[single(2, 0, X), single(2, 1, X)]);
    }

    #[test]
    fn trivial_decomposition_keeps_state() {
        let st = AbstractDensityMatrix::init(2);
        let one_term = PauliSumDecomposition::new(
            1,
            vec![(Complex64::new(1.0, 0.0), ConcretePauli::identity(1))],
        );
        assert_eq!(st.apply_decomposed(&one_term, &[0]), st);
    }

    #[test]
    fn compress_single_is_identity() {
        let st = AbstractDensityMatrix::init(3);
        assert_eq!(AbstractDensityMatrix::compress(std::slice::from_ref(&st)), st);
    }

    #[test]
    fn compress_identical_doubles_count() {
        let st = AbstractDensityMatrix::init(2);
        let merged = AbstractDensityMatrix::compress(&[st.clone(), st.clone()]);
        assert_eq!(merged.count(), &BigUint::from(2u32));
        assert_eq!(merged.coeff(), st.coeff());
        assert_eq!(merged.pauli(), st.pauli());
        assert_eq!(merged.signs(), st.signs());
    }

    #[test]
    fn residue_concrete_examples() {
        let gens = vec![single(2, 0, Z), single(2, 1, Z)];
        let r = single(2, 0, Z);
        assert_eq!(product_residue(&r, &gens, &[0, 0]), Residue::Value(0));
        assert_eq!(product_residue(&r, &gens, &[1, 0]), Residue::Value(2));
        let x_gens = vec![single(2, 0, X), single(2, 1, X)];
        assert_eq!(product_residue(&r, &x_gens, &[0, 0]), Residue::NoProduct);
    }

    #[test]
    fn residue_concrete_brute_force() {
        // compare against enumeration of all signed generator products
        let gens = vec![ConcretePauli::new(0, vec![X, X]), single(2, 1, X)];
        for b0 in 0..2u8 {
            for b1 in 0..2u8 {
                for r in [single(2, 0, X), single(2, 0, X).negated(), single(2, 0, Z)] {
                    let mut expressible = false;
                    for x0 in 0..2u8 {
                        for x1 in 0..2u8 {
                            let mut prod = ConcretePauli::identity(2);
                            if x0 == 1 {
                                prod = prod.multiply(&gens[0].with_prefactor(gens[0].prefactor() + 2 * b0));
                            }
                            if x1 == 1 {
                                prod = prod.multiply(&gens[1].with_prefactor(gens[1].prefactor() + 2 * b1));
                            }
                            if prod == r {
                                expressible = true;
                            }
                        }
                    }
                    let residue = product_residue(&r, &gens, &[b0, b1]);
                    assert_eq!(residue == Residue::Value(0), expressible, "r={r} b=({b0},{b1})");
                }
            }
        }
    }

    #[test]
    fn residue_abstract_signs_overview_check() {
        // minus-projection of the worked example: residue {2}, so the
        // projected state is exactly zero
        let gens = vec![ConcretePauli::new(0, vec![X, X]), single(2, 0, X)];
        let signs = vec![AbstractBool::BOTH, AbstractBool::ZERO];
        let r = single(2, 0, X).negated();
        let rs = product_residue_signs(&r, &gens, &signs);
        assert_eq!(rs.residues(), AbstractZ4::from_value(2));
        assert!(!rs.contains_no_product());
        assert!(rs.definitely_nonzero());
    }

    #[test]
    fn residue_abstract_signs_singletons_match_concrete() {
        let gens = vec![single(2, 0, Z), single(2, 1, Z)];
        for b0 in 0..2u8 {
            for b1 in 0..2u8 {
                let abstract_signs = vec![AbstractBool::from_bit(b0), AbstractBool::from_bit(b1)];
                for r in [single(2, 0, Z), single(2, 0, Z).negated(), single(2, 1, Z)] {
                    let concrete = product_residue(&r, &gens, &[b0, b1]);
                    let abstract_rs = product_residue_signs(&r, &gens, &abstract_signs);
                    match concrete {
                        Residue::Value(v) => {
                            assert_eq!(abstract_rs.residues(), AbstractZ4::from_value(v));
                            assert!(!abstract_rs.contains_no_product());
                        }
                        Residue::NoProduct => assert_eq!(abstract_rs, ResidueSet::no_product()),
                    }
                }
            }
        }
    }

    #[test]
    fn residue_abstract_signs_uncertain_bit_spreads() {
        let gens = vec![single(2, 0, Z), single(2, 1, Z)];
        let signs = vec![AbstractBool::BOTH, AbstractBool::ZERO];
        let rs = product_residue_signs(&single(2, 0, Z), &gens, &signs);
        assert_eq!(
            rs.residues(),
            AbstractZ4::from_value(0).join(AbstractZ4::from_value(2))
        );
    }

    #[test]
    fn residue_fully_abstract_overview_trace_system() {
        // leading Pauli {I, Z_0}, generators (Z_1, X_0): residue {0, no-product}
        let p = AbstractPauli::new(AbstractZ4::ZERO, vec![ls(&[I, Z]), ls(&[I])]);
        let gens = vec![single(2, 1, Z), single(2, 0, X)];
        let signs = vec![AbstractBool::ZERO, AbstractBool::ZERO];
        let rs = product_residue_abstract(&p, &gens, &signs);
        assert_eq!(rs.residues(), AbstractZ4::ZERO);
        assert!(rs.contains_no_product());
    }

    #[test]
    fn residue_fully_abstract_singleton_matches_concrete() {
        let gens = vec![single(2, 0, Z), single(2, 1, Z)];
        for r in [single(2, 0, Z), single(2, 1, Z).negated(), ConcretePauli::new(0, vec![Z, Z])] {
            let concrete = product_residue(&r, &gens, &[0, 1]);
            let rs = product_residue_abstract(
                &AbstractPauli::lift(&r),
                &gens,
                &[AbstractBool::ZERO, AbstractBool::ONE],
            );
            match concrete {
                Residue::Value(v) => {
                    assert_eq!(rs.residues(), AbstractZ4::from_value(v));
                    assert!(!rs.contains_no_product());
                }
                Residue::NoProduct => assert_eq!(rs, ResidueSet::no_product()),
            }
        }
    }

    #[test]
    fn residue_fully_abstract_free_solution_space() {
        // encoding rows of {I,Z} x {I,Z} are all uncertain in z, so the
        // solution space for (Z_0, Z_1) is free in both exponents
        let p = AbstractPauli::new(AbstractZ4::ZERO, vec![ls(&[I, Z]), ls(&[I, Z])]);
        let gens = vec![single(2, 0, Z), single(2, 1, Z)];
        let signs = vec![AbstractBool::ZERO, AbstractBool::ZERO];
        let rs = product_residue_abstract(&p, &gens, &signs);
        // products of {I,Z_0},{I,Z_1} powers have prefactor 0; residue stays 0
        assert_eq!(rs.residues(), AbstractZ4::ZERO);
        assert!(!rs.contains_no_product());
    }

    #[test]
    fn measure_project_keeps_stabilized_state() {
        let st = AbstractDensityMatrix::init(2);
        let kept = st.measure_project(&single(2, 0, Z));
        assert_eq!(kept, st);
        let t = kept.trace();
        assert!(t.contains(1.0) && t.width() <= 1e-12);
    }

    #[test]
    fn measure_project_annihilates_impossible_outcome() {
        let st = AbstractDensityMatrix::init(2);
        let killed = st.measure_project(&single(2, 0, Z).negated());
        assert!(killed.is_zero());
        assert_eq!(killed.trace(), Interval::ZERO);
    }

    #[test]
    fn overview_minus_projection_is_exactly_zero() {
        let st = run_source("qreg q[2]; h q[0]; h q[1]; t q[0]; cx q[1],q[0]; cx q[0],q[1];");
        let s = &st.summands()[0];
        assert_eq!(
            s.stabilizers(),
            &[ConcretePauli::new(0, vec![X, X]), single(2, 0, X)]
        );
        assert_eq!(s.signs(), &[AbstractBool::BOTH, AbstractBool::ZERO]);
        let projected = s.measure_project(&single(2, 0, X).negated());
        assert!(projected.is_zero());
        assert_eq!(projected.trace(), Interval::ZERO);
    }

    #[test]
    fn overview_zero_projection_trace() {
        let st = run_source("qreg q[2]; h q[0]; h q[1]; t q[0]; cx q[1],q[0]; cx q[0],q[1];");
        let s = &st.summands()[0];
        let projected = s.measure_project(&single(2, 1, Z));
        let t = projected.trace();
        let expected_hi = 2.0 * (PI / 8.0).cos().powi(2);
        assert!(t.lo.abs() <= 1e-9, "{t}");
        assert!((t.hi - expected_hi).abs() <= 0.01, "{t} vs {expected_hi}");
    }

    #[test]
    fn measure_both_on_ghz_joins_outcomes() {
        let st = run_source("qreg q[3]; h q[0]; cx q[0],q[1]; cx q[0],q[2]; measure q[0];");
        assert_eq!(st.summands().len(), 1);
        let s = &st.summands()[0];
        assert_eq!(s.count(), &BigUint::from(2u32));
        assert_eq!(s.stabilizers()[0], single(3, 0, Z));
        assert_eq!(s.signs()[0], AbstractBool::BOTH);
        let t = st.trace();
        assert!(t.contains(1.0), "{t}");
    }

    #[test]
    fn measure_both_drops_impossible_branch() {
        let st = AbstractDensityMatrix::init(2);
        let joined = st.measure_both(&single(2, 0, Z));
        assert_eq!(joined, st);
    }

    #[test]
    fn measure_both_of_zero_is_zero() {
        let zero = AbstractDensityMatrix::zero_state(2);
        assert!(zero.measure_both(&single(2, 0, Z)).is_zero());
    }

    #[test]
    fn stabilizers_stay_commuting() {
        let st = run_source(
            "qreg q[3]; h q[0]; cx q[0],q[1]; t q[1]; ccx q[0],q[1],q[2]; measure q[2]; h q[2]; project q[1] -> 0;",
        );
        for s in st.summands() {
            let gens = s.stabilizers();
            for i in 0..gens.len() {
                for j in 0..gens.len() {
                    assert_eq!(gens[i].commutator(&gens[j]), 0);
                }
            }
        }
    }

    #[test]
    fn measure_both_over_approximates_each_outcome() {
        use rand::prelude::*;
        use rand_chacha::ChaCha8Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(44);
        for _ in 0..50 {
            let n = rng.random_range(2..=3);
            let mut gates = Vec::new();
            for _ in 0..8 {
                match rng.random_range(0..4) {
                    0 => gates.push(crate::circuit::Gate::unitary("h", vec![], vec![rng.random_range(0..n)])),
                    1 => gates.push(crate::circuit::Gate::unitary("s", vec![], vec![rng.random_range(0..n)])),
                    2 => gates.push(crate::circuit::Gate::unitary("t", vec![], vec![rng.random_range(0..n)])),
                    _ => {
                        let mut qs: Vec<usize> = (0..n).collect();
                        qs.shuffle(&mut rng);
                        gates.push(crate::circuit::Gate::unitary("cx", vec![], qs[..2].to_vec()));
                    }
                }
            }
            let circuit = crate::circuit::Circuit::new(n, gates);
            let state = AbstractState::run(&circuit, SimOptions::default()).unwrap().summands()[0].clone();
            let r = single(n, rng.random_range(0..n), if rng.random_bool(0.5) { Z } else { X });
            let joined = state.measure_both(&r);
            for branch in [state.measure_project(&r), state.measure_project(&r.negated())] {
                if branch.is_zero() || joined.is_zero() {
                    continue;
                }
                assert_eq!(branch.stabilizers(), joined.stabilizers());
                assert!(branch.count() <= joined.count());
                for (b, j) in branch.signs().iter().zip(joined.signs()) {
                    assert_eq!(b.join(*j), *j, "sign bits must be enclosed");
                }
                for (b, j) in branch.pauli().letter_sets().iter().zip(joined.pauli().letter_sets()) {
                    assert_eq!(b.union(*j), *j, "letter sets must be enclosed");
                }
                assert!(joined.coeff().log_mag.encloses(&branch.coeff().log_mag));
                assert!(joined.coeff().phase.encloses(&branch.coeff().phase));
            }
        }
    }

    #[test]
    fn ln_biguint_encloses_known_values() {
        for k in [1u32, 2, 7, 64, 1000, 100_000] {
            let r = BigUint::from(k);
            let iv = ln_biguint(&r);
            assert!(iv.contains((k as f64).ln()));
            assert!(iv.width() <= 1e-10);
        }
        // large: ln(4^1000) = 1000 ln 4
        let big = BigUint::from(4u32).pow(1000);
        let iv = ln_biguint(&big);
        let expected = 1000.0 * 4.0_f64.ln();
        assert!(iv.lo <= expected && expected <= iv.hi);
        assert!(iv.width() <= 1e-9);
    }

    #[test]
    fn trace_folds_count_into_magnitude() {
        let st = AbstractDensityMatrix::init(2);
        let doubled = AbstractDensityMatrix::compress(&[st.clone(), st]);
        let t = doubled.trace();
        assert!(t.contains(2.0) && t.width() <= 1e-9, "{t}");
    }

    #[test]
    fn max_summands_keeps_bounded_list() {
        let circuit = parse("qreg q[2]; h q[0]; h q[1]; t q[0]; t q[1];").unwrap();
        let st = AbstractState::run(&circuit, SimOptions { max_summands: 3 }).unwrap();
        assert!(st.summands().len() <= 3);
        assert_eq!(st.summand_count(), BigUint::from(16u32));
        let exact = AbstractState::run(&circuit, SimOptions::default()).unwrap();
        assert_eq!(exact.summands().len(), 1);
        // the bounded run is at least as precise: its trace is contained
        let t_bounded = st.trace();
        let t_single = exact.trace();
        assert!(t_single.lo <= t_bounded.lo + 1e-12 && t_bounded.hi <= t_single.hi + 1e-12);
    }
}
