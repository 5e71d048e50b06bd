//! Small worked instances used by tests, examples and golden files.
//!
//! The `(4, 2)` instance stores four symbols `(a1, a2, b1, b2)` over GF(3):
//!
//! | node | packet 0  | packet 1  |
//! |------|-----------|-----------|
//! | 1    | a1        | b1        |
//! | 2    | 2a1 + a2  | 2b1 + b2  |
//! | 3    | a1 + a2   | b1 + b2   |
//! | 4    | a2        | b2        |
//!
//! Nodes 3 and 4 lose their second packet. Node 1 broadcasts `a1 + b1` and
//! node 2 broadcasts `2(a1 + b1) + a2 + b2`, which is enough for both to
//! recover. Replacing `b1, b2` with uniform keys `z1, z2` makes the same two
//! broadcasts leak nothing about `a1, a2`.

use crate::code::{CachingSystem, SystemConfig};
use crate::galois::{FieldMatrix, PrimeField};
use crate::repair::{Broadcast, ErasurePattern, RepairPlan};
use crate::secrecy::SecretPartition;

/// Scalar generator shared by both packet families: rows are nodes.
const FOUR_TWO_GENERATOR: [[u64; 2]; 4] = [[1, 0], [2, 1], [1, 1], [0, 1]];

/// The `(4, 2)` instance over GF(3).
pub fn four_two_system() -> CachingSystem {
    four_two_system_over(3)
}

/// The same coefficients over another prime field. They stay MDS over every
/// prime because all 2x2 minors of the generator are 1 or 2.
pub fn four_two_system_over(q: u64) -> CachingSystem {
    let cfg = SystemConfig::new(4, 2, 2, q).expect("valid prime");
    let f = cfg.field;
    let mut g = FieldMatrix::zeros(f, 8, 4);
    for (node, coeffs) in FOUR_TWO_GENERATOR.iter().enumerate() {
        // packet 0 lives on (a1, a2), packet 1 on (b1, b2)
        g.set(2 * node, 0, coeffs[0]);
        g.set(2 * node, 1, coeffs[1]);
        g.set(2 * node + 1, 2, coeffs[0]);
        g.set(2 * node + 1, 3, coeffs[1]);
    }
    CachingSystem::from_matrix(cfg, g).expect("shape matches")
}

/// Nodes 3 and 4 (indices 2, 3) keep only their first packet.
pub fn two_partial_pattern() -> ErasurePattern {
    ErasurePattern::new(2, 2, vec![vec![0, 1], vec![0, 1], vec![0], vec![0]])
        .expect("valid pattern")
}

/// The two broadcasts `a1 + b1` (node 1) and `2(a1 + b1) + a2 + b2` (node 2).
pub fn two_broadcast_plan() -> RepairPlan {
    let sys = four_two_system();
    let pattern = two_partial_pattern();
    let b1 = Broadcast::from_coefficients(&sys, &pattern, 0, &[1, 1]).expect("survivors");
    let b2 = Broadcast::from_coefficients(&sys, &pattern, 1, &[1, 1]).expect("survivors");
    RepairPlan::with_broadcasts(4, vec![b1, b2]).expect("senders in range")
}

/// Secrets `a1, a2` at coordinates 0, 1; keys `z1, z2` at 2, 3.
pub fn two_key_partition() -> SecretPartition {
    SecretPartition::new(4, vec![0, 1], vec![2, 3]).expect("disjoint cover")
}

/// Every coordinate secret, no keys.
pub fn all_secret_partition(m: usize) -> SecretPartition {
    SecretPartition::new(m, (0..m).collect(), vec![]).expect("disjoint cover")
}

pub fn gf(p: u64) -> PrimeField {
    PrimeField::new(p).expect("prime")
}
