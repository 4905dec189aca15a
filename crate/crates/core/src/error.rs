use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("range [{lo}, {hi}) is empty or starts below {min}")]
    InvalidRange { lo: u64, hi: u64, min: u64 },
    #[error("range [{lo}, {hi}) exceeds the sieve budget (bound {max_bound}, span {max_span})")]
    RangeTooLarge {
        lo: u64,
        hi: u64,
        max_bound: u64,
        max_span: u64,
    },
    #[error("table covers [{have_lo}, {have_hi}) but [{need_lo}, {need_hi}) is required")]
    Coverage {
        need_lo: u64,
        need_hi: u64,
        have_lo: u64,
        have_hi: u64,
    },
    #[error("invalid prime window: y={y} must be below z={z}")]
    InvalidWindow { y: f64, z: f64 },
    #[error("prime window ({y}, {z}) contains no primes, so its reciprocal sum is zero")]
    EmptyWindow { y: f64, z: f64 },
    #[error("delta must lie in the open interval (0, 1/2), got {0}")]
    InvalidDelta(f64),
    #[error("shifts must be distinct and ascending")]
    InvalidShifts,
    #[error("need {needed} spacings but only {available} are available")]
    InsufficientData { needed: usize, available: usize },
    #[error("sequence is empty")]
    EmptySequence,
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("tuple entries are not pairwise coprime")]
    NotCoprime,
    #[error("window has {primes} primes; at most {max} are supported")]
    WindowTooLarge { primes: usize, max: usize },
    #[error("integer overflow in {0}")]
    Overflow(&'static str),
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
}
