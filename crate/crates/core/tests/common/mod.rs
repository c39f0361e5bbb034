//! Shared helpers for integration tests: seeded random circuit generators.

use abstraqt::circuit::{Circuit, Gate};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

/// Random circuit over {h, s, x, z, cx} plus a bounded number of
/// non-Clifford gates from {t, tdg, ccx, rx(pi/4), rz(2)}. The term blow-up
/// stays within the exponential-sum oracle cap.
pub fn random_mixed_circuit(
    rng: &mut ChaCha8Rng,
    n: usize,
    len: usize,
    non_clifford: usize,
) -> Circuit {
    let mut gates = Vec::new();
    let mut budget = non_clifford;
    let mut doubling_units = 6usize;
    for _ in 0..len {
        let use_special = budget > 0 && doubling_units > 0 && rng.random_bool(0.3);
        if use_special {
            budget -= 1;
            match rng.random_range(0..5) {
                0 => gates.push(Gate::unitary("t", vec![], vec![rng.random_range(0..n)])),
                1 => gates.push(Gate::unitary("tdg", vec![], vec![rng.random_range(0..n)])),
                2 if n >= 3 && doubling_units >= 3 => {
                    let mut qs: Vec<usize> = (0..n).collect();
                    qs.shuffle(rng);
                    gates.push(Gate::unitary("ccx", vec![], qs[..3].to_vec()));
                    doubling_units -= 2;
                }
                3 => gates.push(Gate::unitary(
                    "rx",
                    vec![std::f64::consts::FRAC_PI_4],
                    vec![rng.random_range(0..n)],
                )),
                _ => gates.push(Gate::unitary("rz", vec![2.0], vec![rng.random_range(0..n)])),
            }
            doubling_units -= 1;
        } else {
            gates.push(random_clifford_gate(rng, n));
        }
    }
    Circuit::new(n, gates)
}

pub fn random_clifford_gate(rng: &mut ChaCha8Rng, n: usize) -> Gate {
    match rng.random_range(0..6) {
        0 => Gate::unitary("h", vec![], vec![rng.random_range(0..n)]),
        1 => Gate::unitary("s", vec![], vec![rng.random_range(0..n)]),
        2 => Gate::unitary("x", vec![], vec![rng.random_range(0..n)]),
        3 => Gate::unitary("z", vec![], vec![rng.random_range(0..n)]),
        _ if n >= 2 => {
            let mut qs: Vec<usize> = (0..n).collect();
            qs.shuffle(rng);
            Gate::unitary("cx", vec![], qs[..2].to_vec())
        }
        _ => Gate::unitary("h", vec![], vec![0]),
    }
}

pub fn random_clifford_circuit(rng: &mut ChaCha8Rng, n: usize, len: usize) -> Circuit {
    Circuit::new(n, (0..len).map(|_| random_clifford_gate(rng, n)).collect())
}
