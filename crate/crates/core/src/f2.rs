//! Bit-packed GF(2) linear algebra: Gaussian elimination with particular
//! solutions and null-space bases, plus the symplectic encoding of Pauli
//! elements that turns bare multiplication into addition.

use thiserror::Error;

use crate::apauli::AbstractPauli;
use crate::domains::AbstractBool;
use crate::pauli::ConcretePauli;

const WORD_BITS: usize = 64;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum F2Error {
    #[error("abstract right-hand side contains an empty entry at row {0}")]
    EmptyRhsEntry(usize),
}

/// Packed bit vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitVec {
    len: usize,
    words: Vec<u64>,
}

impl BitVec {
    pub fn zeros(len: usize) -> BitVec {
        BitVec { len, words: vec![0; len.div_ceil(WORD_BITS)] }
    }

    pub fn from_bits(bits: &[bool]) -> BitVec {
        let mut v = BitVec::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            v.set(i, b);
        }
        v
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        self.words[i / WORD_BITS] >> (i % WORD_BITS) & 1 == 1
    }

    pub fn set(&mut self, i: usize, value: bool) {
        debug_assert!(i < self.len);
        let mask = 1u64 << (i % WORD_BITS);
        if value {
            self.words[i / WORD_BITS] |= mask;
        } else {
            self.words[i / WORD_BITS] &= !mask;
        }
    }

    pub fn xor_assign(&mut self, other: &BitVec) {
        debug_assert_eq!(self.len, other.len);
        for (w, o) in self.words.iter_mut().zip(&other.words) {
            *w ^= o;
        }
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(|i| self.get(i))
    }
}

/// Bit matrix with rows packed into 64-bit words.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    row_words: usize,
    words: Vec<u64>,
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> BitMatrix {
        let row_words = cols.div_ceil(WORD_BITS).max(1);
        BitMatrix { rows, cols, row_words, words: vec![0; rows * row_words] }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> bool {
        debug_assert!(row < self.rows && col < self.cols);
        self.words[row * self.row_words + col / WORD_BITS] >> (col % WORD_BITS) & 1 == 1
    }

    pub fn set(&mut self, row: usize, col: usize, value: bool) {
        debug_assert!(row < self.rows && col < self.cols);
        let mask = 1u64 << (col % WORD_BITS);
        let w = &mut self.words[row * self.row_words + col / WORD_BITS];
        if value {
            *w |= mask;
        } else {
            *w &= !mask;
        }
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for k in 0..self.row_words {
            self.words.swap(a * self.row_words + k, b * self.row_words + k);
        }
    }

    fn xor_row(&mut self, dst: usize, src: usize) {
        let (d0, s0) = (dst * self.row_words, src * self.row_words);
        for k in 0..self.row_words {
            let v = self.words[s0 + k];
            self.words[d0 + k] ^= v;
        }
    }

    /// Matrix-vector product over GF(2).
    pub fn mul_vec(&self, x: &BitVec) -> BitVec {
        assert_eq!(x.len(), self.cols);
        let mut out = BitVec::zeros(self.rows);
        for row in 0..self.rows {
            let mut acc = 0u64;
            for k in 0..self.row_words {
                acc ^= self.words[row * self.row_words + k] & x.words[k];
            }
            out.set(row, !acc.count_ones().is_multiple_of(2));
        }
        out
    }

    /// Keep only the selected rows.
    pub fn select_rows(&self, keep: &[usize]) -> BitMatrix {
        let mut out = BitMatrix::zeros(keep.len(), self.cols);
        for (new_row, &old_row) in keep.iter().enumerate() {
            for k in 0..self.row_words {
                out.words[new_row * self.row_words + k] = self.words[old_row * self.row_words + k];
            }
        }
        out
    }
}

/// Result of solving A x = rhs over GF(2).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolveResult {
    NoSolution,
    Solved {
        /// One solution.
        particular: BitVec,
        /// Basis of the null space of A; the full solution set is the
        /// particular solution plus any combination of basis vectors.
        null_basis: Vec<BitVec>,
    },
}

impl SolveResult {
    pub fn is_solved(&self) -> bool {
        matches!(self, SolveResult::Solved { .. })
    }
}

/// Gaussian elimination over GF(2) with full back-substitution. Pivots take
/// the first unvisited row with the pivot bit set.
pub fn solve(a: &BitMatrix, rhs: &BitVec) -> SolveResult {
    assert_eq!(a.rows(), rhs.len(), "dimension mismatch");
    let mut m = a.clone();
    let mut b = rhs.clone();
    let mut pivot_cols: Vec<usize> = Vec::new();
    let mut pivot = 0usize;
    for col in 0..m.cols() {
        let Some(row) = (pivot..m.rows()).find(|&r| m.get(r, col)) else {
            continue;
        };
        m.swap_rows(pivot, row);
        let tmp = b.get(pivot);
        b.set(pivot, b.get(row));
        b.set(row, tmp);
        for r in 0..m.rows() {
            if r != pivot && m.get(r, col) {
                m.xor_row(r, pivot);
                let v = b.get(r) ^ b.get(pivot);
                b.set(r, v);
            }
        }
        pivot_cols.push(col);
        pivot += 1;
    }
    for row in pivot..m.rows() {
        if b.get(row) {
            return SolveResult::NoSolution;
        }
    }

    let mut particular = BitVec::zeros(m.cols());
    for (row, &col) in pivot_cols.iter().enumerate() {
        particular.set(col, b.get(row));
    }

    let is_pivot = {
        let mut flags = vec![false; m.cols()];
        for &c in &pivot_cols {
            flags[c] = true;
        }
        flags
    };
    let mut null_basis = Vec::new();
    for (free, &pivot_col) in is_pivot.iter().enumerate() {
        if pivot_col {
            continue;
        }
        let mut u = BitVec::zeros(m.cols());
        u.set(free, true);
        for (row, &col) in pivot_cols.iter().enumerate() {
            u.set(col, m.get(row, free));
        }
        null_basis.push(u);
    }
    SolveResult::Solved { particular, null_basis }
}

/// Solve with an abstract right-hand side: rows whose entry is {0,1} do not
/// constrain the solutions and are dropped; the remaining concrete system is
/// solved as usual. An empty entry signals a contradiction.
pub fn solve_abstract_rhs(a: &BitMatrix, rhs: &[AbstractBool]) -> Result<SolveResult, F2Error> {
    assert_eq!(a.rows(), rhs.len(), "dimension mismatch");
    let mut keep = Vec::new();
    let mut bits = Vec::new();
    for (row, entry) in rhs.iter().enumerate() {
        if entry.is_bottom() {
            return Err(F2Error::EmptyRhsEntry(row));
        }
        if entry.is_singleton() {
            keep.push(row);
            bits.push(entry.contains(1));
        }
    }
    let sub = a.select_rows(&keep);
    Ok(solve(&sub, &BitVec::from_bits(&bits)))
}

/// Two-bit symplectic encoding of a bare Pauli element: per qubit, its X bit
/// then its Z bit.
pub fn encode_pauli(p: &ConcretePauli) -> BitVec {
    let mut v = BitVec::zeros(2 * p.num_qubits());
    for (q, &letter) in p.letters().iter().enumerate() {
        v.set(2 * q, letter.x_bit());
        v.set(2 * q + 1, letter.z_bit());
    }
    v
}

/// Abstract extension of the encoding: each entry is the set of bits taken by
/// the members of the letter set.
pub fn encode_abstract_pauli(p: &AbstractPauli) -> Vec<AbstractBool> {
    let mut v = Vec::with_capacity(2 * p.num_qubits());
    for set in p.letter_sets() {
        let mut x = AbstractBool::BOTTOM;
        let mut z = AbstractBool::BOTTOM;
        for letter in set.members() {
            x = x.join(AbstractBool::from_bit(letter.x_bit() as u8));
            z = z.join(AbstractBool::from_bit(letter.z_bit() as u8));
        }
        v.push(x);
        v.push(z);
    }
    v
}

/// Encoding matrix of a generator list: column j holds the encoding of the
/// j-th generator.
pub fn encode_generators(gens: &[ConcretePauli]) -> BitMatrix {
    assert!(!gens.is_empty());
    let n = gens[0].num_qubits();
    let mut m = BitMatrix::zeros(2 * n, gens.len());
    for (j, g) in gens.iter().enumerate() {
        assert_eq!(g.num_qubits(), n);
        let col = encode_pauli(g);
        for row in 0..2 * n {
            m.set(row, j, col.get(row));
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::apauli::LetterSet;
    use crate::domains::AbstractZ4;
    use crate::pauli::PauliLetter;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    use PauliLetter::{X, Y, Z};

    fn single(n: usize, q: usize, l: PauliLetter) -> ConcretePauli {
        ConcretePauli::single(n, q, l)
    }

    #[test]
    fn encoding_convention() {
        let x = encode_pauli(&ConcretePauli::new(0, vec![X]));
        assert_eq!((x.get(0), x.get(1)), (true, false));
        let y = encode_pauli(&ConcretePauli::new(0, vec![Y]));
        assert_eq!((y.get(0), y.get(1)), (true, true));
        let z = encode_pauli(&ConcretePauli::new(0, vec![Z]));
        assert_eq!((z.get(0), z.get(1)), (false, true));
        let ii = encode_pauli(&ConcretePauli::identity(2));
        assert_eq!(ii.count_ones(), 0);
    }

    #[test]
    fn abstract_encoding_joins_members() {
        let xy = AbstractPauli::new(
            AbstractZ4::ZERO,
            vec![LetterSet::singleton(X).union(LetterSet::singleton(Y))],
        );
        let enc = encode_abstract_pauli(&xy);
        assert_eq!(enc, vec![AbstractBool::ONE, AbstractBool::BOTH]);
    }

    #[test]
    fn encoding_is_multiplicative_on_bare_parts() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..300 {
            let n = rng.random_range(1..=6);
            let mk = |rng: &mut ChaCha8Rng| {
                ConcretePauli::new(
                    rng.random_range(0..4),
                    (0..n).map(|_| PauliLetter::from_index(rng.random_range(0..4))).collect(),
                )
            };
            let p = mk(&mut rng);
            let q = mk(&mut rng);
            let mut sum = encode_pauli(&p);
            sum.xor_assign(&encode_pauli(&q));
            assert_eq!(encode_pauli(&p.multiply(&q).bare()), sum);
        }
    }

    #[test]
    fn solve_two_stabilizers() {
        let gens = vec![single(2, 0, Z), single(2, 1, Z)];
        let a = encode_generators(&gens);
        match solve(&a, &encode_pauli(&single(2, 0, Z))) {
            SolveResult::Solved { particular, null_basis } => {
                assert_eq!(particular.iter().collect::<Vec<_>>(), vec![true, false]);
                assert!(null_basis.is_empty());
            }
            SolveResult::NoSolution => panic!("expected solution"),
        }
    }

    #[test]
    fn solve_zero_rhs_gives_null_space() {
        let gens = vec![single(2, 0, Z), single(2, 1, Z)];
        let a = encode_generators(&gens);
        match solve(&a, &BitVec::zeros(4)) {
            SolveResult::Solved { particular, null_basis } => {
                assert_eq!(particular.count_ones(), 0);
                assert!(null_basis.is_empty());
            }
            SolveResult::NoSolution => panic!(),
        }
    }

    #[test]
    fn solve_detects_inconsistency() {
        // X0X1 and X0 cannot produce Z0
        let g1 = ConcretePauli::new(0, vec![X, X]);
        let g2 = single(2, 0, X);
        let a = encode_generators(&[g1, g2]);
        assert_eq!(solve(&a, &encode_pauli(&single(2, 0, Z))), SolveResult::NoSolution);
    }

    #[test]
    fn independent_commuting_generators_have_unique_solutions() {
        // stabilizers of random Clifford-reachable states stay independent;
        // here: Z_j generators after some hand-picked products
        let gens = vec![
            ConcretePauli::new(0, vec![Z, Z, PauliLetter::I]),
            ConcretePauli::new(0, vec![PauliLetter::I, Z, Z]),
            ConcretePauli::new(0, vec![PauliLetter::I, PauliLetter::I, Z]),
        ];
        let a = encode_generators(&gens);
        let rhs = encode_pauli(&ConcretePauli::new(0, vec![Z, PauliLetter::I, Z]));
        match solve(&a, &rhs) {
            SolveResult::Solved { particular, null_basis } => {
                assert!(null_basis.is_empty());
                assert_eq!(a.mul_vec(&particular), rhs);
            }
            SolveResult::NoSolution => panic!(),
        }
    }

    #[test]
    fn random_systems_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for _ in 0..200 {
            let rows = rng.random_range(1..=64);
            let cols = rng.random_range(1..=32);
            let mut a = BitMatrix::zeros(rows, cols);
            for r in 0..rows {
                for c in 0..cols {
                    a.set(r, c, rng.random_bool(0.4));
                }
            }
            let mut rhs = BitVec::zeros(rows);
            for r in 0..rows {
                rhs.set(r, rng.random_bool(0.5));
            }
            match solve(&a, &rhs) {
                SolveResult::Solved { particular, null_basis } => {
                    for _ in 0..100 {
                        let mut x = particular.clone();
                        for u in &null_basis {
                            if rng.random_bool(0.5) {
                                x.xor_assign(u);
                            }
                        }
                        assert_eq!(a.mul_vec(&x), rhs);
                    }
                    // basis vectors are linearly independent: each has a free
                    // coordinate no other basis vector sets
                    for (i, u) in null_basis.iter().enumerate() {
                        let mut acc = u.clone();
                        for (j, v) in null_basis.iter().enumerate() {
                            if i != j && rng.random_bool(0.5) {
                                acc.xor_assign(v);
                            }
                        }
                        assert!(acc.count_ones() > 0);
                    }
                }
                SolveResult::NoSolution => {
                    for _ in 0..1000 {
                        let mut x = BitVec::zeros(cols);
                        for c in 0..cols {
                            x.set(c, rng.random_bool(0.5));
                        }
                        assert_ne!(a.mul_vec(&x), rhs);
                    }
                }
            }
        }
    }

    #[test]
    fn abstract_rhs_drops_unconstraining_rows() {
        let gens = vec![single(2, 0, Z), single(2, 1, Z)];
        let a = encode_generators(&gens);
        let rhs = vec![AbstractBool::BOTH; 4];
        match solve_abstract_rhs(&a, &rhs).unwrap() {
            SolveResult::Solved { particular, null_basis } => {
                assert_eq!(particular.count_ones(), 0);
                assert_eq!(null_basis.len(), 2);
                assert_eq!(null_basis[0].iter().collect::<Vec<_>>(), vec![true, false]);
                assert_eq!(null_basis[1].iter().collect::<Vec<_>>(), vec![false, true]);
            }
            SolveResult::NoSolution => panic!(),
        }
    }

    #[test]
    fn abstract_rhs_overview_measurement_system() {
        // generators (Z_1, X_0) with rhs phi({I,Z} (x) {I})
        let gens = vec![single(2, 1, Z), single(2, 0, X)];
        let a = encode_generators(&gens);
        let p = AbstractPauli::new(
            AbstractZ4::ZERO,
            vec![
                LetterSet::singleton(PauliLetter::I).union(LetterSet::singleton(Z)),
                LetterSet::singleton(PauliLetter::I),
            ],
        );
        let rhs = encode_abstract_pauli(&p);
        match solve_abstract_rhs(&a, &rhs).unwrap() {
            SolveResult::Solved { particular, null_basis } => {
                assert_eq!(particular.count_ones(), 0);
                assert!(null_basis.is_empty());
            }
            SolveResult::NoSolution => panic!(),
        }
    }

    #[test]
    fn abstract_rhs_concrete_entries_match_plain_solve() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..100 {
            let n = rng.random_range(1..=4);
            let gens: Vec<_> = (0..n).map(|q| single(n, q, Z)).collect();
            let a = encode_generators(&gens);
            let target = ConcretePauli::new(
                0,
                (0..n)
                    .map(|_| if rng.random_bool(0.5) { Z } else { PauliLetter::I })
                    .collect(),
            );
            let concrete = solve(&a, &encode_pauli(&target));
            let abstract_rhs: Vec<AbstractBool> = encode_pauli(&target)
                .iter()
                .map(|b| AbstractBool::from_bit(b as u8))
                .collect();
            assert_eq!(solve_abstract_rhs(&a, &abstract_rhs).unwrap(), concrete);
        }
    }

    #[test]
    fn abstract_rhs_rejects_empty_entry() {
        let gens = vec![single(1, 0, Z)];
        let a = encode_generators(&gens);
        let rhs = vec![AbstractBool::BOTTOM, AbstractBool::ZERO];
        assert_eq!(solve_abstract_rhs(&a, &rhs), Err(F2Error::EmptyRhsEntry(0)));
    }
}
