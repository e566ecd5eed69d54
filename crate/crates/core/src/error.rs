use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("modulus {0} is not an odd prime")]
    NotOddPrime(u64),

    #[error("modulus {0} exceeds the supported bound 2^31")]
    ModulusTooLarge(u64),

    #[error("{b} is not a quadratic non-residue mod {q}")]
    NotANonSquare { q: u64, b: u64 },

    #[error("parameter {name} must be nonzero mod {q}")]
    ZeroParameter { name: &'static str, q: u64 },

    #[error("gcd({m}, {n}) != 1, multiplicative order undefined")]
    NotCoprime { m: u64, n: u64 },

    #[error("operation requires a = {expected} mod {q}, got a = {actual}")]
    WrongMapCase { expected: i64, actual: u64, q: u64 },

    #[error("q = {q} exceeds the graph size bound (q <= {max_q}); raise {env} to override")]
    ResourceLimit { q: u64, max_q: u64, env: &'static str },

    #[error("cannot parse decomposition notation: {0}")]
    Notation(String),

    #[error("state ({x},{y}) is outside F_{q}^2")]
    StateOutOfRange { x: u64, y: u64, q: u64 },
}

pub type Result<T> = std::result::Result<T, Error>;
