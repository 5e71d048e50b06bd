//! Exact arithmetic in prime fields GF(p) and dense linear algebra over them.

mod field;
mod matrix;

pub use field::{is_prime, next_prime, Elem, FieldOp, PrimeField, MAX_MODULUS};
pub use matrix::{vandermonde, vandermonde_on, Echelon, FieldMatrix};

/// The unit vector `e_i` of length `len`.
pub fn unit_vector(len: usize, i: usize) -> Vec<Elem> {
    let mut v = vec![0; len];
    v[i] = 1;
    v
}
