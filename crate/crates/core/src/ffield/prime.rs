use std::fmt;
use std::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use serde::{Deserialize, Serialize};

use super::arith::{is_prime, mod_pow};
use crate::error::{Error, Result};

/// Largest modulus accepted: products of two residues stay below 2^62.
pub const MAX_MODULUS: u64 = 1 << 31;

/// The prime field F_q for an odd prime q.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PrimeField {
    q: u64,
}

impl PrimeField {
    pub fn new(q: u64) -> Result<Self> {
        if q >= MAX_MODULUS {
            return Err(Error::ModulusTooLarge(q));
        }
        if q < 3 || q % 2 == 0 || !is_prime(q) {
            return Err(Error::NotOddPrime(q));
        }
        Ok(Self { q })
    }

    #[inline]
    pub fn modulus(&self) -> u64 {
        self.q
    }

    /// Element from a possibly negative or unreduced integer.
    pub fn elem(&self, v: i64) -> Fp {
        Fp {
            value: v.rem_euclid(self.q as i64) as u64,
            q: self.q,
        }
    }

    /// Element from an integer already known to be in `[0, q)` modulo reduction.
    #[inline]
    pub fn from_u64(&self, v: u64) -> Fp {
        Fp {
            value: v % self.q,
            q: self.q,
        }
    }

    #[inline]
    pub fn zero(&self) -> Fp {
        Fp { value: 0, q: self.q }
    }

    #[inline]
    pub fn one(&self) -> Fp {
        Fp { value: 1, q: self.q }
    }

    /// All q elements in increasing order of representative.
    pub fn elements(self) -> impl Iterator<Item = Fp> {
        let q = self.q;
        (0..q).map(move |value| Fp { value, q })
    }

    /// The q - 1 nonzero elements.
    pub fn units(self) -> impl Iterator<Item = Fp> {
        let q = self.q;
        (1..q).map(move |value| Fp { value, q })
    }
}

/// A residue mod q. Carries its modulus so that arithmetic needs no context.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Fp {
    value: u64,
    q: u64,
}

impl Fp {
    #[inline]
    pub fn value(self) -> u64 {
        self.value
    }

    #[inline]
    pub fn modulus(self) -> u64 {
        self.q
    }

    #[inline]
    pub fn field(self) -> PrimeField {
        PrimeField { q: self.q }
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.value == 0
    }

    pub fn pow(self, e: u64) -> Fp {
        Fp {
            value: mod_pow(self.value, e, self.q),
            q: self.q,
        }
    }

    /// Multiplicative inverse, `None` for zero.
    pub fn inv(self) -> Option<Fp> {
        if self.value == 0 {
            return None;
        }
        // Fermat: a^(q-2) = a^-1
        Some(self.pow(self.q - 2))
    }

    /// Representative in `(-q/2, q/2]`, handy for printing `-1`.
    pub fn signed(self) -> i64 {
        if self.value > self.q / 2 {
            self.value as i64 - self.q as i64
        } else {
            self.value as i64
        }
    }
}

impl fmt::Debug for Fp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (mod {})", self.value, self.q)
    }
}

impl fmt::Display for Fp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

impl Add for Fp {
    type Output = Fp;
    #[inline]
    fn add(self, rhs: Fp) -> Fp {
        debug_assert_eq!(self.q, rhs.q);
        let s = self.value + rhs.value;
        Fp {
            value: if s >= self.q { s - self.q } else { s },
            q: self.q,
        }
    }
}

impl Sub for Fp {
    type Output = Fp;
    #[inline]
    fn sub(self, rhs: Fp) -> Fp {
        debug_assert_eq!(self.q, rhs.q);
        Fp {
            value: if self.value >= rhs.value {
                self.value - rhs.value
            } else {
                self.value + self.q - rhs.value
            },
            q: self.q,
        }
    }
}

impl Mul for Fp {
    type Output = Fp;
    #[inline]
    fn mul(self, rhs: Fp) -> Fp {
        debug_assert_eq!(self.q, rhs.q);
        Fp {
            value: self.value * rhs.value % self.q,
            q: self.q,
        }
    }
}

impl Neg for Fp {
    type Output = Fp;
    #[inline]
    fn neg(self) -> Fp {
        Fp {
            value: if self.value == 0 { 0 } else { self.q - self.value },
            q: self.q,
        }
    }
}

impl AddAssign for Fp {
    fn add_assign(&mut self, rhs: Fp) {
        *self = *self + rhs;
    }
}

impl SubAssign for Fp {
    fn sub_assign(&mut self, rhs: Fp) {
        *self = *self - rhs;
    }
}

impl MulAssign for Fp {
    fn mul_assign(&mut self, rhs: Fp) {
        *self = *self * rhs;
    }
}

/// Quadratic character by Euler's criterion: 0, 1 or -1.
pub fn chi2(alpha: Fp) -> i8 {
    if alpha.is_zero() {
        return 0;
    }
    if alpha.pow((alpha.q - 1) / 2).value == 1 {
        1
    } else {
        -1
    }
}

/// Smallest positive quadratic non-residue.
pub fn find_nonsquare(field: PrimeField) -> Fp {
    field
        .units()
        .find(|&b| chi2(b) == -1)
        .expect("every odd prime field has a non-residue")
}

/// Square roots of `alpha`, returned as `[r, q - r]` with `r <= q - r`.
///
/// Tonelli-Shanks with the smallest non-residue as the fixed auxiliary element,
/// so results are deterministic.
pub fn sqrt_mod(alpha: Fp) -> Vec<Fp> {
    let q = alpha.q;
    let field = alpha.field();
    match chi2(alpha) {
        0 => return vec![field.zero()],
        -1 => return Vec::new(),
        _ => {}
    }

    let root = if q % 4 == 3 {
        alpha.pow((q + 1) / 4)
    } else {
        let mut s = 0u32;
        let mut odd = q - 1;
        while odd % 2 == 0 {
            odd /= 2;
            s += 1;
        }
        let z = find_nonsquare(field);
        let mut m = s;
        let mut c = z.pow(odd);
        let mut t = alpha.pow(odd);
        let mut r = alpha.pow((odd + 1) / 2);
        while t.value != 1 {
            // least i with t^(2^i) = 1
            let mut i = 0;
            let mut t2 = t;
            while t2.value != 1 {
                t2 = t2 * t2;
                i += 1;
            }
            let mut bexp = c;
            for _ in 0..(m - i - 1) {
                bexp = bexp * bexp;
            }
            m = i;
            c = bexp * bexp;
            t *= c;
            r *= bexp;
        }
        r
    };
    debug_assert_eq!(root * root, alpha);
    let other = -root;
    if root.value <= other.value {
        vec![root, other]
    } else {
        vec![other, root]
    }
}
