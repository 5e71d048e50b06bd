use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::galois::next_prime;

/// Largest binomial accepted by [`field_bound_strong`].
pub const FIELD_BOUND_LIMIT: u64 = 1 << 62;

/// Strong secrecy capacity: `M - Γ_min` while the minimum budget is below
/// `M`, zero otherwise.
pub fn capacity_strong(m: usize, gamma_min: usize) -> usize {
    m.saturating_sub(gamma_min)
}

/// Weak secrecy capacity: the whole file while `Γ < M`, zero otherwise.
pub fn capacity_weak(m: usize, gamma: usize) -> usize {
    if gamma < m {
        m
    } else {
        0
    }
}

fn binomial_big(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::from(0u32);
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    acc
}

/// Smallest prime `q >= C(M, Γ)`: a field where a strongly secure precoder
/// for `Γ` overheard packets is guaranteed to exist.
pub fn field_bound_strong(m: usize, gamma: usize) -> Result<u64> {
    if gamma > m {
        return Err(Error::InvalidConfig(format!("Γ = {gamma} exceeds M = {m}")));
    }
    let binomial = binomial_big(m, gamma);
    match binomial.to_u64() {
        Some(b) if b <= FIELD_BOUND_LIMIT => Ok(next_prime(b)),
        _ => Err(Error::BoundOverflow { binomial }),
    }
}

/// Smallest prime `q` with `q^M >= C(M, Γ) q^Γ + q^(M-1)`: a field where a
/// weakly secure precoder keeping all `M` symbols is guaranteed to exist.
pub fn field_bound_weak(m: usize, gamma: usize) -> Result<u64> {
    if gamma >= m {
        return Err(Error::InvalidConfig(format!(
            "weak security needs Γ < M (Γ = {gamma}, M = {m})"
        )));
    }
    let binomial = binomial_big(m, gamma);
    let mut q = 2u64;
    loop {
        let qb = BigUint::from(q);
        let lhs = qb.pow(m as u32);
        let rhs = &binomial * qb.pow(gamma as u32) + qb.pow(m as u32 - 1);
        if lhs >= rhs {
            return Ok(q);
        }
        q = next_prime(q + 1);
    }
}

/// Capacities and sufficient field sizes for one repair episode.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CapacityReport {
    pub schema_version: u32,
    pub m: usize,
    pub gamma: usize,
    pub gamma_min: usize,
    pub c_ss: usize,
    pub c_ws: usize,
    /// `None` when the bound overflows.
    pub q_min_strong: Option<u64>,
    /// `None` when `Γ >= M`.
    pub q_min_weak: Option<u64>,
}

pub fn capacity_report(m: usize, gamma: usize, gamma_min: usize) -> CapacityReport {
    CapacityReport {
        schema_version: crate::SCHEMA_VERSION,
        m,
        gamma,
        gamma_min,
        c_ss: capacity_strong(m, gamma_min),
        c_ws: capacity_weak(m, gamma),
        q_min_strong: field_bound_strong(m, gamma).ok(),
        q_min_weak: field_bound_weak(m, gamma).ok(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn capacities() {
        assert_eq!(capacity_strong(4, 2), 2);
        assert_eq!(capacity_strong(9, 6), 3);
        assert_eq!(capacity_strong(4, 4), 0);
        assert_eq!(capacity_strong(4, 5), 0);
        assert_eq!(capacity_weak(4, 2), 4);
        assert_eq!(capacity_weak(4, 4), 0);
        assert_eq!(capacity_weak(4, 0), 4);
    }

    #[test]
    fn strong_bounds() {
        assert_eq!(field_bound_strong(4, 2).unwrap(), 7);
        assert_eq!(field_bound_strong(4, 0).unwrap(), 2);
        assert_eq!(field_bound_strong(6, 3).unwrap(), 23);
        assert!(field_bound_strong(3, 4).is_err());
        match field_bound_strong(100, 50) {
            Err(Error::BoundOverflow { binomial }) => {
                assert_eq!(binomial.to_string(), "100891344545564193334812497256")
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn weak_bounds() {
        assert_eq!(field_bound_weak(4, 2).unwrap(), 3);
        assert_eq!(field_bound_weak(2, 1).unwrap(), 3);
        for m in 1..10 {
            assert_eq!(field_bound_weak(m, 0).unwrap(), 2);
        }
        assert!(field_bound_weak(4, 4).is_err());
    }

    #[test]
    fn report_is_ordered() {
        let r = capacity_report(4, 2, 2);
        assert_eq!(
            (r.c_ss, r.c_ws, r.q_min_strong, r.q_min_weak),
            (2, 4, Some(7), Some(3))
        );
        let r = capacity_report(4, 4, 4);
        assert_eq!((r.c_ss, r.c_ws, r.q_min_weak), (0, 0, None));
    }
}
