//! Abstract Pauli elements: a prefactor subset of Z4 plus a letter set per
//! qubit. Per-qubit binary operations go through 16x16 lookup tables built at
//! startup by enumerating members of each letter-set pair.

use once_cell::sync::Lazy;

use crate::domains::{AbstractBool, AbstractZ4};
use crate::pauli::{letter_product, letters_anticommute, CliffordTable, ConcretePauli, PauliLetter};

/// Subset of {I, X, Y, Z}; indicator bit k set iff the letter with index k is
/// present. The empty set is bottom.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LetterSet(u8);

impl LetterSet {
    pub const BOTTOM: LetterSet = LetterSet(0);
    pub const IDENTITY: LetterSet = LetterSet(1);
    pub const ALL: LetterSet = LetterSet(0b1111);

    pub fn singleton(letter: PauliLetter) -> LetterSet {
        LetterSet(1 << letter.index())
    }

    pub fn from_encoding(bits: u8) -> LetterSet {
        assert!(bits < 16);
        LetterSet(bits)
    }

    pub fn encoding(self) -> u8 {
        self.0
    }

    pub fn is_bottom(self) -> bool {
        self.0 == 0
    }

    pub fn is_singleton(self) -> bool {
        self.0.count_ones() == 1
    }

    pub fn contains(self, letter: PauliLetter) -> bool {
        self.0 >> letter.index() & 1 == 1
    }

    pub fn union(self, other: LetterSet) -> LetterSet {
        LetterSet(self.0 | other.0)
    }

    pub fn members(self) -> impl Iterator<Item = PauliLetter> {
        PauliLetter::ALL.into_iter().filter(move |&l| self.contains(l))
    }
}

struct PairTables {
    /// Bare letters of products a*b over all members.
    bare: [[LetterSet; 16]; 16],
    /// Z4 prefactor contributions of products a*b over all members.
    phase: [[AbstractZ4; 16]; 16],
    /// Commutator values over all members.
    commutator: [[AbstractBool; 16]; 16],
}

static PAIR_TABLES: Lazy<PairTables> = Lazy::new(|| {
    let mut bare = [[LetterSet::BOTTOM; 16]; 16];
    let mut phase = [[AbstractZ4::BOTTOM; 16]; 16];
    let mut commutator = [[AbstractBool::BOTTOM; 16]; 16];
    for a in 0..16u8 {
        for b in 0..16u8 {
            let sa = LetterSet::from_encoding(a);
            let sb = LetterSet::from_encoding(b);
            for x in sa.members() {
                for y in sb.members() {
                    let (letter, v) = letter_product(x, y);
                    bare[a as usize][b as usize] =
                        bare[a as usize][b as usize].union(LetterSet::singleton(letter));
                    phase[a as usize][b as usize] =
                        phase[a as usize][b as usize].join(AbstractZ4::from_value(v));
                    let c = u8::from(letters_anticommute(x, y));
                    commutator[a as usize][b as usize] =
                        commutator[a as usize][b as usize].join(AbstractBool::from_bit(c));
                }
            }
        }
    }
    PairTables { bare, phase, commutator }
});

/// An abstract Pauli element i^v * S(0) x ... x S(n-1) with an abstract
/// prefactor v and letter sets S(i). Bottom iff any component is empty.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AbstractPauli {
    prefactor: AbstractZ4,
    letters: Vec<LetterSet>,
}

impl AbstractPauli {
    pub fn new(prefactor: AbstractZ4, letters: Vec<LetterSet>) -> AbstractPauli {
        assert!(!letters.is_empty(), "abstract Pauli needs at least one qubit");
        AbstractPauli { prefactor, letters }
    }

    pub fn identity(n: usize) -> AbstractPauli {
        AbstractPauli::new(AbstractZ4::ZERO, vec![LetterSet::IDENTITY; n])
    }

    /// Singleton abstraction of a concrete element.
    pub fn lift(p: &ConcretePauli) -> AbstractPauli {
        AbstractPauli::new(
            AbstractZ4::from_value(p.prefactor()),
            p.letters().iter().map(|&l| LetterSet::singleton(l)).collect(),
        )
    }

    pub fn num_qubits(&self) -> usize {
        self.letters.len()
    }

    pub fn prefactor(&self) -> AbstractZ4 {
        self.prefactor
    }

    pub fn letter_sets(&self) -> &[LetterSet] {
        &self.letters
    }

    pub fn letter_set(&self, qubit: usize) -> LetterSet {
        self.letters[qubit]
    }

    pub fn is_bottom(&self) -> bool {
        self.prefactor.is_bottom() || self.letters.iter().any(|s| s.is_bottom())
    }

    pub fn is_singleton(&self) -> bool {
        self.prefactor.is_singleton() && self.letters.iter().all(|s| s.is_singleton())
    }

    /// Membership of a concrete element in the concretization.
    pub fn contains(&self, p: &ConcretePauli) -> bool {
        p.num_qubits() == self.num_qubits()
            && self.prefactor.contains(p.prefactor())
            && p.letters().iter().zip(&self.letters).all(|(&l, s)| s.contains(l))
    }

    /// The prefactor component.
    pub fn pref(&self) -> AbstractZ4 {
        self.prefactor
    }

    /// The element with prefactor {0}.
    pub fn bare(&self) -> AbstractPauli {
        AbstractPauli::new(AbstractZ4::ZERO, self.letters.clone())
    }

    pub fn mul(&self, other: &AbstractPauli) -> AbstractPauli {
        assert_eq!(self.num_qubits(), other.num_qubits(), "qubit count mismatch");
        if self.is_bottom() || other.is_bottom() {
            return self.bottom_like();
        }
        let tables = &*PAIR_TABLES;
        let mut prefactor = self.prefactor.add(other.prefactor);
        let letters = self
            .letters
            .iter()
            .zip(&other.letters)
            .map(|(a, b)| {
                prefactor = prefactor.add(tables.phase[a.encoding() as usize][b.encoding() as usize]);
                tables.bare[a.encoding() as usize][b.encoding() as usize]
            })
            .collect();
        AbstractPauli::new(prefactor, letters)
    }

    /// Conjugate the letter sets at `targets`, joining over the member
    /// conjugations; the prefactor picks up the joined table phases.
    pub fn conjugate(&self, table: &CliffordTable, targets: &[usize]) -> AbstractPauli {
        assert_eq!(targets.len(), table.num_targets(), "target count mismatch");
        if self.is_bottom() {
            return self.bottom_like();
        }
        let k = targets.len();
        let mut joined_window = vec![LetterSet::BOTTOM; k];
        let mut phases = AbstractZ4::BOTTOM;
        let mut member = vec![0usize; k];
        'enumerate: loop {
            let code: usize = member
                .iter()
                .enumerate()
                .map(|(slot, &idx)| {
                    let letter = self.letters[targets[slot]].members().nth(idx).unwrap();
                    letter.index() << (2 * slot)
                })
                .sum();
            let (out_code, phase) = table.entry(code);
            for (slot, set) in joined_window.iter_mut().enumerate() {
                let letter = PauliLetter::from_index(out_code >> (2 * slot) & 3);
                *set = set.union(LetterSet::singleton(letter));
            }
            phases = phases.join(AbstractZ4::from_value(phase));
            for slot in 0..k {
                member[slot] += 1;
                if member[slot] < self.letters[targets[slot]].members().count() {
                    continue 'enumerate;
                }
                member[slot] = 0;
            }
            break;
        }
        let mut letters = self.letters.clone();
        for (slot, &q) in targets.iter().enumerate() {
            letters[q] = joined_window[slot];
        }
        AbstractPauli::new(self.prefactor.add(phases), letters)
    }

    /// Sum of per-qubit commutator sets.
    pub fn commutator(&self, other: &AbstractPauli) -> AbstractBool {
        assert_eq!(self.num_qubits(), other.num_qubits(), "qubit count mismatch");
        let tables = &*PAIR_TABLES;
        self.letters
            .iter()
            .zip(&other.letters)
            .map(|(a, b)| tables.commutator[a.encoding() as usize][b.encoding() as usize])
            .fold(AbstractBool::ZERO, AbstractBool::add)
    }

    pub fn join(&self, other: &AbstractPauli) -> AbstractPauli {
        assert_eq!(self.num_qubits(), other.num_qubits(), "qubit count mismatch");
        AbstractPauli::new(
            self.prefactor.join(other.prefactor),
            self.letters.iter().zip(&other.letters).map(|(a, b)| a.union(*b)).collect(),
        )
    }

    /// Multiply by (-1)^b: the prefactor gains 2*b, letters are unchanged.
    pub fn sign_flip(&self, b: AbstractBool) -> AbstractPauli {
        AbstractPauli::new(
            self.prefactor.add(AbstractZ4::from_bool(b).doubled()),
            self.letters.clone(),
        )
    }

    fn bottom_like(&self) -> AbstractPauli {
        AbstractPauli::new(AbstractZ4::BOTTOM, vec![LetterSet::BOTTOM; self.num_qubits()])
    }

    /// Enumerate all concrete members (intended for tests on few qubits).
    pub fn members(&self) -> Vec<ConcretePauli> {
        let mut out = Vec::new();
        if self.is_bottom() {
            return out;
        }
        let mut stack = vec![Vec::<PauliLetter>::new()];
        for set in &self.letters {
            let mut next = Vec::new();
            for partial in &stack {
                for letter in set.members() {
                    let mut ext = partial.clone();
                    ext.push(letter);
                    next.push(ext);
                }
            }
            stack = next;
        }
        for v in self.prefactor.members() {
            for letters in &stack {
                out.push(ConcretePauli::new(v, letters.clone()));
            }
        }
        out
    }
}
