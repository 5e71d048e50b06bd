use num_bigint::BigUint;
use thiserror::Error;

/// Errors raised anywhere in the crate.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not a prime in [2, 2^31)")]
    NotPrime(u64),

    #[error("division by zero in GF({p})")]
    DivisionByZero { p: u64 },

    #[error("matrix is singular (rank {rank} < {dim})")]
    Singular { rank: usize, dim: usize },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("field GF({p}) is too small: need p > {needed}")]
    FieldTooSmall { p: u64, needed: u64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid erasure pattern: {0}")]
    InvalidPattern(String),

    #[error("no feasible transmission allocation for the erasure pattern")]
    Infeasible,

    #[error("search space too large: {0}")]
    SearchSpaceTooLarge(String),

    #[error("code construction failed after {attempts} attempts over GF({p})")]
    ConstructionFailed { attempts: usize, p: u64 },

    #[error("functional repair failed after {attempts} attempts over GF({p}); try a larger field")]
    RepairFailed { attempts: usize, p: u64 },

    #[error("packet {packet} of node {node} is not recoverable from the broadcasts")]
    Unrecoverable { node: usize, packet: usize },

    #[error("invalid secret partition: {0}")]
    InvalidPartition(String),

    #[error(
        "precoder search exhausted after {attempts} attempts over GF({q}); \
         the sufficient field size is {bound}"
    )]
    SearchExhausted {
        attempts: usize,
        q: u64,
        bound: String,
    },

    #[error("field-size bound overflow: binomial {binomial} exceeds 2^62")]
    BoundOverflow { binomial: BigUint },

    #[error("payload missing")]
    MissingPayload,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
