//! Secure partial repair for MDS-coded caching networks.
//!
//! `n` caching nodes each store `t` coded packets of a file of `M = k t`
//! symbols over a prime field, such that any `k` nodes rebuild the file. When
//! some packets are erased, nodes broadcast linear combinations of what they
//! still hold so that every sick node can refill its storage. This crate
//! covers the whole loop:
//!
//! - [`galois`]: prime-field arithmetic and exact linear algebra.
//! - [`code`]: building, encoding and decoding MDS caching systems.
//! - [`repair`]: feasibility of a broadcast allocation, the minimum broadcast
//!   budget (closed form and exhaustive search), and functional repair.
//! - [`secrecy`]: leakage of the broadcasts to a passive eavesdropper, strong
//!   and weak security checks, secrecy capacities, field-size bounds and a
//!   randomized search for security precoders.
//! - [`exact`]: an explicit `n = 2k` construction with exact, secure repair.
//! - [`harness`]: JSON/CSV artifacts, command implementations and the
//!   end-to-end episode simulator used by the `spr` binary.

pub mod code;
pub mod error;
pub mod exact;
pub mod fixtures;
pub mod galois;
pub mod harness;
pub mod repair;
pub mod secrecy;

pub use code::{CachingSystem, SystemConfig};
pub use error::{Error, Result};
pub use galois::{Elem, FieldMatrix, PrimeField};
pub use repair::{ErasurePattern, RepairPlan};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Version stamped into every JSON artifact.
pub const SCHEMA_VERSION: u32 = 1;

/// The generator behind every randomized operation. Seeds are always explicit.
pub type SeededRng = ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub(crate) fn check_schema_version(v: u32) -> Result<()> {
    if v != SCHEMA_VERSION {
        return Err(Error::InvalidConfig(format!(
            "unsupported schema_version {v} (expected {SCHEMA_VERSION})"
        )));
    }
    Ok(())
}
