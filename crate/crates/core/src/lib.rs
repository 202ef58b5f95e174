//! Exact and modular evaluation, claim checking, and counterexample
//! scanning for a one-parameter family of primality congruences.
//!
//! The family interpolates between two classical characterizations of the
//! primes:
//!
//! * Wilson's theorem: `n >= 2` is prime iff `n` divides `1 + (n-1)!`
//! * Giuga's conjecture: `n >= 2` is prime iff `n` divides
//!   `1 + sum_{j=1}^{n-1} j^(n-1)`
//!
//! For `1 <= k <= n-1` define
//!
//! ```text
//! H_k(n) = 1 + sum_{i=1}^{n-1} (n+i-1-k)!/i! * i^k
//! ```
//!
//! `H_1(n)` is congruent to the Wilson value `1 + (n-1)!` mod `n`, and
//! `H_{n-1}(n)` equals the Giuga value exactly, so the `H_k` walk from one
//! characterization to the other. The step from `H_k` to `H_{k+1}` is
//! controlled mod `n` by
//!
//! ```text
//! U_k(n) = sum_{i=1}^{k+1} (n+i-2-k)!/i! * i^k
//! ```
//!
//! Each statement about these functions is registered as a checkable claim
//! (see [`claims`]), classified as either a forced identity (a failure is an
//! implementation bug) or a claim under test (a failure is a mathematical
//! finding, reported with a reproducible witness). The [`scan`] module runs
//! the expensive claims over large ranges with parallel, resumable sweeps.

pub mod claims;
pub mod exact;
pub mod modular;
pub mod primes;
pub mod report;
pub mod scan;

pub use claims::{Budget, CheckOptions, ClaimReport, KPolicy, Verdict, Violation};
pub use modular::Residue;

/// Arbitrary-precision nonnegative integer; carries every exact value
/// (factorials, `H_k`, `U_k`, power sums).
pub type Nat = num_bigint::BigUint;

/// Arbitrary-precision signed integer; carries `V_k` and alternating sums.
pub type Int = num_bigint::BigInt;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("unknown claim id `{0}`")]
    UnknownClaim(String),

    #[error("cost ceiling exceeded: {what} (ceiling {ceiling}); raise it with HKSCAN_COST_CEILING or --force")]
    CostCeiling { what: String, ceiling: u64 },

    /// The modular kernel and the exact oracle disagreed on a value both
    /// can compute. This is always an implementation bug, never a finding.
    #[error("modular and exact paths disagree for claim `{claim}` at {witness}: exact {exact}, modular {modular}")]
    PathDisagreement {
        claim: String,
        witness: String,
        exact: String,
        modular: String,
    },

    #[error("checkpoint digest mismatch: file was written for a different scan configuration (file {found}, config {expected})")]
    DigestMismatch { expected: String, found: String },

    #[error("corrupt checkpoint record at line {line}: {reason}")]
    CorruptCheckpoint { line: usize, reason: String },

    #[error("report parse error at line {line}, column {column}: {message}")]
    ReportParse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("unsupported report format version {found} (this tool reads version {supported})")]
    VersionMismatch { found: u64, supported: u64 },

    #[error("sieve limit {limit} exceeds the configured memory budget (max {max})")]
    SieveBudget { limit: u64, max: u64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
