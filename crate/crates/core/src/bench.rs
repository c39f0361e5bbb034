//! Deterministic benchmark-circuit generators.
//!
//! Each family splits the register into an upper and a lower half, runs a
//! random block on the upper half, a second block touching the lower half,
//! and then undoes the second block with an obfuscated inverse, so every
//! lower qubit provably returns to |0>. Generation is reproducible: a spec
//! maps to exactly one circuit (gates are drawn with ChaCha8 seeded from the
//! spec seed).

use std::fmt;
use std::str::FromStr;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::circuit::{Circuit, Gate};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BenchError {
    #[error("invalid benchmark spec: {0}")]
    InvalidSpec(String),
    #[error("obfuscation requires a unitary-only circuit")]
    NonUnitary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BenchFamily {
    CliffCliff,
    CliffTCliff,
    CliffTCxT,
    CliffTHCzRx,
    CcxHCliff,
    CcxHCxT,
    Rz2HCx,
    MeasureGhz,
}

impl BenchFamily {
    pub const ALL: [BenchFamily; 8] = [
        BenchFamily::CliffCliff,
        BenchFamily::CliffTCliff,
        BenchFamily::CliffTCxT,
        BenchFamily::CliffTHCzRx,
        BenchFamily::CcxHCliff,
        BenchFamily::CcxHCxT,
        BenchFamily::Rz2HCx,
        BenchFamily::MeasureGhz,
    ];

    pub fn id(self) -> &'static str {
        match self {
            BenchFamily::CliffCliff => "cliff-cliff",
            BenchFamily::CliffTCliff => "cliff-t-cliff",
            BenchFamily::CliffTCxT => "cliff-t-cx-t",
            BenchFamily::CliffTHCzRx => "cliff-t-h-cz-rx",
            BenchFamily::CcxHCliff => "ccx-h-cliff",
            BenchFamily::CcxHCxT => "ccx-h-cx-t",
            BenchFamily::Rz2HCx => "rz2-h-cx",
            BenchFamily::MeasureGhz => "measure-ghz",
        }
    }

    fn needs_three_upper(self) -> bool {
        matches!(self, BenchFamily::CcxHCliff | BenchFamily::CcxHCxT)
    }
}

impl fmt::Display for BenchFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for BenchFamily {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        BenchFamily::ALL
            .into_iter()
            .find(|f| f.id() == s)
            .ok_or_else(|| format!("unknown benchmark family `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BenchSpec {
    pub family: BenchFamily,
    /// Total qubits, split evenly into upper and lower halves.
    pub n_total: usize,
    pub gates_per_block: usize,
    pub seed: u64,
    /// Repetitions for the measurement family; ignored elsewhere.
    pub rounds: usize,
}

impl BenchSpec {
    fn validate(&self) -> Result<(), BenchError> {
        if self.n_total < 4 || !self.n_total.is_multiple_of(2) {
            return Err(BenchError::InvalidSpec(format!(
                "qubit count must be even and at least 4, got {}",
                self.n_total
            )));
        }
        if self.gates_per_block == 0 {
            return Err(BenchError::InvalidSpec("gates per block must be positive".into()));
        }
        if self.family.needs_three_upper() && self.n_total < 6 {
            return Err(BenchError::InvalidSpec(format!(
                "family {} needs at least 3 upper qubits",
                self.family
            )));
        }
        if self.family == BenchFamily::MeasureGhz && self.rounds == 0 {
            return Err(BenchError::InvalidSpec("rounds must be positive".into()));
        }
        Ok(())
    }
}

/// A candidate gate drawn uniformly from a family's stated set.
fn single_qubit_candidates(ops: &[&str], range: std::ops::Range<usize>) -> Vec<Gate> {
    let mut out = Vec::new();
    for &op in ops {
        for q in range.clone() {
            let params = if op == "rz2" { vec![2.0] } else { vec![] };
            let name = if op == "rz2" { "rz" } else { op };
            out.push(Gate::unitary(name, params, vec![q]));
        }
    }
    out
}

fn rx_candidates(range: std::ops::Range<usize>) -> Vec<Gate> {
    range
        .map(|q| Gate::unitary("rx", vec![std::f64::consts::FRAC_PI_4], vec![q]))
        .collect()
}

/// Ordered pairs of distinct qubits, first from `a`, second from `b`.
fn pair_candidates(name: &str, a: std::ops::Range<usize>, b: std::ops::Range<usize>) -> Vec<Gate> {
    let mut out = Vec::new();
    for q1 in a {
        for q2 in b.clone() {
            if q1 != q2 {
                out.push(Gate::unitary(name, vec![], vec![q1, q2]));
            }
        }
    }
    out
}

fn triple_candidates(name: &str, range: std::ops::Range<usize>) -> Vec<Gate> {
    let mut out = Vec::new();
    for q1 in range.clone() {
        for q2 in range.clone() {
            for q3 in range.clone() {
                if q1 != q2 && q1 != q3 && q2 != q3 {
                    out.push(Gate::unitary(name, vec![], vec![q1, q2, q3]));
                }
            }
        }
    }
    out
}

fn sample_block(rng: &mut ChaCha8Rng, candidates: &[Gate], count: usize) -> Vec<Gate> {
    (0..count).map(|_| candidates[rng.random_range(0..candidates.len())].clone()).collect()
}

/// Generate the circuit of a benchmark spec.
pub fn generate(spec: &BenchSpec) -> Result<Circuit, BenchError> {
    spec.validate()?;
    let n = spec.n_total;
    let half = n / 2;
    let upper = 0..half;
    let lower = half..n;
    let g = spec.gates_per_block;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    let mut gates: Vec<Gate> = Vec::new();
    match spec.family {
        BenchFamily::CliffCliff => {
            let c1_set = [single_qubit_candidates(&["h", "s"], upper.clone()), pair_candidates("cx", upper.clone(), upper.clone())].concat();
            let c2_set = [single_qubit_candidates(&["h", "s"], lower.clone()), pair_candidates("cx", lower.clone(), lower.clone())].concat();
            gates.extend(sample_block(&mut rng, &c1_set, g));
            let c2 = sample_block(&mut rng, &c2_set, g);
            gates.extend(c2.clone());
            gates.extend(undo_block(n, c2, &mut rng)?);
        }
        BenchFamily::CliffTCliff => {
            let c1_set = [single_qubit_candidates(&["h", "s", "t"], upper.clone()), pair_candidates("cx", upper.clone(), upper.clone())].concat();
            let c2_set = [single_qubit_candidates(&["h", "s"], lower.clone()), pair_candidates("cx", lower.clone(), lower.clone())].concat();
            gates.extend(sample_block(&mut rng, &c1_set, g));
            let c2 = sample_block(&mut rng, &c2_set, g);
            gates.extend(c2.clone());
            gates.extend(undo_block(n, c2, &mut rng)?);
        }
        BenchFamily::CliffTCxT => {
            let c1_set = [single_qubit_candidates(&["h", "s", "t"], upper.clone()), pair_candidates("cx", upper.clone(), upper.clone())].concat();
            let c2_set = [pair_candidates("cx", upper.clone(), lower.clone()), single_qubit_candidates(&["t"], lower.clone())].concat();
            gates.extend(sample_block(&mut rng, &c1_set, g));
            let c2 = sample_block(&mut rng, &c2_set, g);
            gates.extend(c2.clone());
            gates.extend(undo_block(n, c2, &mut rng)?);
        }
        BenchFamily::CliffTHCzRx => {
            let c1_set = [single_qubit_candidates(&["h", "s", "t"], upper.clone()), pair_candidates("cx", upper.clone(), upper.clone())].concat();
            let c2_set = [pair_candidates("cz", upper.clone(), lower.clone()), rx_candidates(lower.clone())].concat();
            let basis_flip: Vec<Gate> = lower.clone().map(|q| Gate::unitary("h", vec![], vec![q])).collect();
            gates.extend(sample_block(&mut rng, &c1_set, g));
            gates.extend(basis_flip.clone());
            let c2 = sample_block(&mut rng, &c2_set, g);
            gates.extend(c2.clone());
            gates.extend(undo_block(n, c2, &mut rng)?);
            gates.extend(basis_flip);
        }
        BenchFamily::CcxHCliff => {
            let c1_set = [triple_candidates("ccx", upper.clone()), single_qubit_candidates(&["h"], upper.clone())].concat();
            let c2_set = [
                single_qubit_candidates(&["h", "s"], lower.clone()),
                pair_candidates("cx", lower.clone(), 0..n),
            ]
            .concat();
            gates.extend(sample_block(&mut rng, &c1_set, g));
            let c2 = sample_block(&mut rng, &c2_set, g);
            gates.extend(c2.clone());
            gates.extend(undo_block(n, c2, &mut rng)?);
        }
        BenchFamily::CcxHCxT => {
            let c1_set = [triple_candidates("ccx", upper.clone()), single_qubit_candidates(&["h"], upper.clone())].concat();
            let c2_set = [pair_candidates("cx", upper.clone(), lower.clone()), single_qubit_candidates(&["t"], lower.clone())].concat();
            gates.extend(sample_block(&mut rng, &c1_set, g));
            let c2 = sample_block(&mut rng, &c2_set, g);
            gates.extend(c2.clone());
            gates.extend(undo_block(n, c2, &mut rng)?);
        }
        BenchFamily::Rz2HCx => {
            let c1_set = single_qubit_candidates(&["rz2", "h"], upper.clone());
            let c2_set = pair_candidates("cx", upper.clone(), lower.clone());
            gates.extend(sample_block(&mut rng, &c1_set, g));
            let c2 = sample_block(&mut rng, &c2_set, g);
            gates.extend(c2.clone());
            gates.extend(undo_block(n, c2, &mut rng)?);
        }
        BenchFamily::MeasureGhz => {
            let chain: Vec<Gate> = (1..n).map(|q| Gate::unitary("cx", vec![], vec![0, q])).collect();
            for _ in 0..spec.rounds {
                gates.push(Gate::unitary("h", vec![], vec![0]));
                gates.extend(chain.clone());
                gates.push(Gate::measure(0));
                gates.extend(chain.clone());
            }
        }
    }
    Ok(Circuit::new(n, gates))
}

fn undo_block(n: usize, block: Vec<Gate>, rng: &mut ChaCha8Rng) -> Result<Vec<Gate>, BenchError> {
    let inverse = Circuit::new(n, block).inverse().map_err(|_| BenchError::NonUnitary)?;
    let obfuscated = obfuscate(&inverse, rng)?;
    Ok(obfuscated.instructions().to_vec())
}

const OBFUSCATION_PASSES: usize = 3;

/// Apply a seeded sequence of semantics-preserving rewrites: swaps of
/// adjacent gates on disjoint qubits, basis-change identities
/// (h z h = x, h x h = z, in both directions) and cancellation of adjacent
/// inverse pairs.
pub fn obfuscate(circuit: &Circuit, rng: &mut ChaCha8Rng) -> Result<Circuit, BenchError> {
    if circuit.has_measurement() {
        return Err(BenchError::NonUnitary);
    }
    let mut gates = circuit.instructions().to_vec();
    for _ in 0..OBFUSCATION_PASSES {
        commute_pass(&mut gates, rng);
        gates = basis_identity_pass(gates, rng);
        gates = cancel_pass(gates);
    }
    Ok(Circuit::new(circuit.num_qubits(), gates))
}

fn disjoint_targets(a: &Gate, b: &Gate) -> bool {
    a.targets.iter().all(|q| !b.targets.contains(q))
}

fn commute_pass(gates: &mut [Gate], rng: &mut ChaCha8Rng) {
    if gates.len() < 2 {
        return;
    }
    for _ in 0..gates.len() {
        let i = rng.random_range(0..gates.len() - 1);
        if disjoint_targets(&gates[i], &gates[i + 1]) {
            gates.swap(i, i + 1);
        }
    }
}

fn basis_identity_pass(gates: Vec<Gate>, rng: &mut ChaCha8Rng) -> Vec<Gate> {
    let mut out: Vec<Gate> = Vec::with_capacity(gates.len());
    let mut i = 0;
    while i < gates.len() {
        // contraction: h q; p q; h q  ->  conjugate(p) q
        if i + 2 < gates.len() && rng.random_bool(0.5) {
            let (a, b, c) = (&gates[i], &gates[i + 1], &gates[i + 2]);
            if a.name == "h" && c.name == "h" && a.targets == b.targets && a.targets == c.targets {
                let swapped = match b.name.as_str() {
                    "z" => Some("x"),
                    "x" => Some("z"),
                    _ => None,
                };
                if let Some(name) = swapped {
                    out.push(Gate::unitary(name, vec![], a.targets.clone()));
                    i += 3;
                    continue;
                }
            }
        }
        // expansion: p q -> h q; conjugate(p) q; h q
        if (gates[i].name == "x" || gates[i].name == "z") && rng.random_bool(0.15) {
            let conjugated = if gates[i].name == "x" { "z" } else { "x" };
            out.push(Gate::unitary("h", vec![], gates[i].targets.clone()));
            out.push(Gate::unitary(conjugated, vec![], gates[i].targets.clone()));
            out.push(Gate::unitary("h", vec![], gates[i].targets.clone()));
            i += 1;
            continue;
        }
        out.push(gates[i].clone());
        i += 1;
    }
    out
}

fn is_inverse_pair(a: &Gate, b: &Gate) -> bool {
    if a.targets != b.targets {
        return false;
    }
    match (a.name.as_str(), b.name.as_str()) {
        ("h", "h") | ("x", "x") | ("y", "y") | ("z", "z") | ("i", "i") => true,
        ("cx", "cx") | ("cz", "cz") | ("swap", "swap") | ("ccx", "ccx") => true,
        ("s", "sdg") | ("sdg", "s") | ("t", "tdg") | ("tdg", "t") => true,
        ("rx", "rx") | ("ry", "ry") | ("rz", "rz") => a.params[0] + b.params[0] == 0.0,
        _ => false,
    }
}

fn cancel_pass(gates: Vec<Gate>) -> Vec<Gate> {
    let mut out: Vec<Gate> = Vec::with_capacity(gates.len());
    for gate in gates {
        if let Some(top) = out.last() {
            if is_inverse_pair(top, &gate) {
                out.pop();
                continue;
            }
        }
        out.push(gate);
    }
    out
}
