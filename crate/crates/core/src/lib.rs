//! Certified construction of prime-representing constants.
//!
//! Given a family of increasing functions `f_n`, a nondecreasing gap bound
//! `g` and an integer sequence (primes by default), the constructor builds a
//! chain `v_n` and a bracket of reals `A` with `floor(f_n(A)) = v_n` for every
//! term of the chain. All irrational quantities are carried as outward-rounded
//! MPFR intervals.

pub mod constructor;
pub mod exec;
pub mod families;
pub mod interval;
pub mod sequences;
pub mod verifier;

pub use exec::Exec;
pub use interval::BigInterval;

use rug::Integer;

/// Offending step of a construction where the next term lands too far from
/// `h_n(v_n)`.
#[derive(Clone, Debug, PartialEq)]
pub struct GapViolationInfo {
    pub n: u64,
    pub v_n: Integer,
    pub v_next: Integer,
    /// Description of the bound that `v_next + 1` failed to stay below.
    pub bound: String,
    pub precision: u32,
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("division by an interval containing zero")]
    DivisionByIntervalContainingZero,
    #[error("domain error: {0}")]
    Domain(String),
    #[error("precision exhausted at {bits} bits: {context}")]
    PrecisionExhausted { bits: u32, context: String },
    #[error("sequence exhausted: {0}")]
    SequenceExhausted(String),
    #[error("bound too wide to locate the next term: {0}")]
    IndeterminateBound(String),
    #[error(
        "gap violation at n = {}: v_n = {}, next term {} is not below {}",
        .0.n, .0.v_n, .0.v_next, .0.bound
    )]
    GapViolation(Box<GapViolationInfo>),
    #[error("no admissible seed term: {0}")]
    SeedNotFound(String),
    #[error("iteration did not converge: {0}")]
    ConvergenceFailure(String),
    #[error("not found: {0}")]
    NotFound(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("sequence file line {line}: {message}")]
    SequenceFile { line: usize, message: String },
    #[error("nested intervals broke at n = {n}: {detail}")]
    NestingViolation { n: u64, detail: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
