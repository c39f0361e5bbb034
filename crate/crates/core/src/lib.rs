//! Abstract stabilizer simulation for quantum circuits.
//!
//! The simulator tracks a density matrix in a generalized stabilizer form and
//! over-approximates it by a single abstract summand: an abstract coefficient,
//! an abstract leading Pauli element, abstract sign bits and concrete
//! stabilizer generators. Clifford gates, non-Clifford gates (via Pauli-sum
//! decomposition) and measurements all have sound abstract transformers, so
//! the resulting probability intervals are guaranteed to contain the true
//! measurement probabilities. On Clifford-only circuits the abstraction is
//! exact; on general circuits it trades precision for a polynomial runtime.

pub mod apauli;
pub mod bench;
pub mod circuit;
pub mod domains;
pub mod f2;
pub mod interval;
pub mod oracle;
pub mod pauli;
pub mod state;

pub use apauli::{AbstractPauli, LetterSet};
pub use circuit::{builtin_action, parse, Circuit, Gate, GateKind, Projection};
pub use domains::{AbstractBool, AbstractComplex, AbstractZ4, ResidueSet};
pub use interval::Interval;
pub use pauli::{classify_gate, ConcretePauli, GateAction, Matrix, PauliLetter};
pub use state::{AbstractDensityMatrix, AbstractState, SimOptions};
