//! Arithmetic in F_q (q an odd prime) and in the quadratic extension F_{q^2}.

mod arith;
mod ext;
mod prime;

pub use arith::{
    divisors, euler_phi, factorize, gcd, is_prime, mod_pow, multiplicative_order,
    odd_part_and_divisors, odd_primes_in, OddPart,
};
pub use ext::{Coords, Ext, QuadExt};
pub use prime::{chi2, find_nonsquare, sqrt_mod, Fp, PrimeField, MAX_MODULUS};
