//! Integer helpers: primality, totient, multiplicative orders, divisors.

use crate::error::{Error, Result};

pub fn mod_pow(base: u64, mut exp: u64, modulus: u64) -> u64 {
    if modulus == 1 {
        return 0;
    }
    let m = modulus as u128;
    let mut base = base as u128 % m;
    let mut acc: u128 = 1;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % m;
        }
        base = base * base % m;
        exp >>= 1;
    }
    acc as u64
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Deterministic trial division; inputs are below 2^31 throughout.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut d = 3;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

/// Odd primes in `[lo, hi]`.
pub fn odd_primes_in(lo: u64, hi: u64) -> Vec<u64> {
    (lo.max(3)..=hi).filter(|&n| n % 2 == 1 && is_prime(n)).collect()
}

/// Prime factorization as `(p, e)` pairs with increasing p.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn euler_phi(n: u64) -> u64 {
    assert!(n >= 1, "totient is defined for n >= 1");
    factorize(n)
        .into_iter()
        .fold(n, |acc, (p, _)| acc / p * (p - 1))
}

/// Least k >= 1 with m^k = 1 (mod n). `ord(m mod 1) = 1`.
pub fn multiplicative_order(m: u64, n: u64) -> Result<u64> {
    if n == 1 {
        return Ok(1);
    }
    if n == 0 || gcd(m % n, n) != 1 {
        return Err(Error::NotCoprime { m, n });
    }
    let mut order = euler_phi(n);
    for (p, _) in factorize(order) {
        while order % p == 0 && mod_pow(m, order / p, n) == 1 {
            order /= p;
        }
    }
    Ok(order)
}

/// All divisors of `n` in increasing order.
pub fn divisors(n: u64) -> Vec<u64> {
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut d = 1;
    while d * d <= n {
        if n % d == 0 {
            small.push(d);
            if d * d != n {
                large.push(n / d);
            }
        }
        d += 1;
    }
    small.extend(large.into_iter().rev());
    small
}

/// Split of q - 1 as `2^s * r` with r odd.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OddPart {
    pub s: u32,
    pub r: u64,
    /// Divisors of r, increasing.
    pub divisors: Vec<u64>,
}

pub fn odd_part_and_divisors(q: u64) -> OddPart {
    assert!(q >= 3 && q % 2 == 1, "q must be an odd prime");
    let n = q - 1;
    let s = n.trailing_zeros();
    let r = n >> s;
    OddPart {
        s,
        r,
        divisors: divisors(r),
    }
}
