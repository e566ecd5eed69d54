use std::fmt;
use std::ops::{Add, Neg, Sub};

use serde::{Deserialize, Serialize};

use super::prime::{chi2, find_nonsquare, Fp, PrimeField};
use crate::error::{Error, Result};

/// F_{q^2} = F_q(β) with β^2 = b for a fixed non-residue b.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct QuadExt {
    base: PrimeField,
    b: Fp,
}

/// `x + yβ`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Ext {
    pub x: Fp,
    pub y: Fp,
}

impl QuadExt {
    pub fn new(base: PrimeField, b: Fp) -> Result<Self> {
        if b.modulus() != base.modulus() || chi2(b) != -1 {
            return Err(Error::NotANonSquare {
                q: base.modulus(),
                b: b.value(),
            });
        }
        Ok(Self { base, b })
    }

    /// Extension built on the smallest non-residue.
    pub fn canonical(base: PrimeField) -> Self {
        Self {
            base,
            b: find_nonsquare(base),
        }
    }

    #[inline]
    pub fn base(&self) -> PrimeField {
        self.base
    }

    #[inline]
    pub fn b(&self) -> Fp {
        self.b
    }

    #[inline]
    pub fn q(&self) -> u64 {
        self.base.modulus()
    }

    pub fn elem(&self, x: i64, y: i64) -> Ext {
        Ext {
            x: self.base.elem(x),
            y: self.base.elem(y),
        }
    }

    pub fn from_base(&self, x: Fp) -> Ext {
        Ext {
            x,
            y: self.base.zero(),
        }
    }

    pub fn zero(&self) -> Ext {
        self.elem(0, 0)
    }

    pub fn one(&self) -> Ext {
        self.elem(1, 0)
    }

    /// The generator β = (0, 1).
    pub fn beta(&self) -> Ext {
        self.elem(0, 1)
    }

    /// (x1 + y1β)(x2 + y2β) = (x1x2 + b y1y2) + (x1y2 + x2y1)β
    #[inline]
    pub fn mul(&self, lhs: Ext, rhs: Ext) -> Ext {
        Ext {
            x: lhs.x * rhs.x + self.b * lhs.y * rhs.y,
            y: lhs.x * rhs.y + lhs.y * rhs.x,
        }
    }

    #[inline]
    pub fn square(&self, a: Ext) -> Ext {
        self.mul(a, a)
    }

    pub fn scale(&self, k: Fp, a: Ext) -> Ext {
        Ext {
            x: k * a.x,
            y: k * a.y,
        }
    }

    /// Square-and-multiply.
    pub fn pow(&self, a: Ext, mut e: u64) -> Ext {
        let mut acc = self.one();
        let mut base = a;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.square(base);
            e >>= 1;
        }
        acc
    }

    /// A^q = x - yβ, since β^q = b^((q-1)/2) β = -β.
    #[inline]
    pub fn frobenius(&self, a: Ext) -> Ext {
        Ext { x: a.x, y: -a.y }
    }

    /// Norm A^(q+1) = x^2 - b y^2, an element of F_q.
    pub fn norm(&self, a: Ext) -> Fp {
        a.x * a.x - self.b * a.y * a.y
    }

    pub fn inv(&self, a: Ext) -> Option<Ext> {
        let n = self.norm(a).inv()?;
        Some(self.scale(n, self.frobenius(a)))
    }

    /// All q^2 elements in state-index order (x major, y minor).
    pub fn elements(&self) -> impl Iterator<Item = Ext> + '_ {
        let base = self.base;
        base.elements()
            .flat_map(move |x| base.elements().map(move |y| Ext { x, y }))
    }

    /// Flat state index `x*q + y`.
    #[inline]
    pub fn encode(&self, a: Ext) -> usize {
        (a.x.value() * self.q() + a.y.value()) as usize
    }

    #[inline]
    pub fn decode(&self, i: usize) -> Ext {
        let q = self.q();
        let i = i as u64;
        Ext {
            x: self.base.from_u64(i / q),
            y: self.base.from_u64(i % q),
        }
    }
}

impl Ext {
    pub fn is_zero(&self) -> bool {
        self.x.is_zero() && self.y.is_zero()
    }

    /// In the prime subfield (y = 0).
    pub fn in_base(&self) -> bool {
        self.y.is_zero()
    }

    /// In βF_q (x = 0).
    pub fn in_beta_line(&self) -> bool {
        self.x.is_zero()
    }

    /// Label `x+yβ`.
    pub fn beta_label(&self) -> String {
        format!("{}+{}β", self.x, self.y)
    }
}

impl fmt::Debug for Ext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.x.value(), self.y.value())
    }
}

impl fmt::Display for Ext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.x.value(), self.y.value())
    }
}

impl Add for Ext {
    type Output = Ext;
    fn add(self, rhs: Ext) -> Ext {
        Ext {
            x: self.x + rhs.x,
            y: self.y + rhs.y,
        }
    }
}

impl Sub for Ext {
    type Output = Ext;
    fn sub(self, rhs: Ext) -> Ext {
        Ext {
            x: self.x - rhs.x,
            y: self.y - rhs.y,
        }
    }
}

impl Neg for Ext {
    type Output = Ext;
    fn neg(self) -> Ext {
        Ext {
            x: -self.x,
            y: -self.y,
        }
    }
}

/// Serialized as the coordinate pair `[x, y]`.
impl Serialize for Ext {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        [self.x.value(), self.y.value()].serialize(s)
    }
}

/// Plain coordinate pair, used where a value must outlive its field context.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Coords(pub u64, pub u64);

impl From<Ext> for Coords {
    fn from(a: Ext) -> Self {
        Coords(a.x.value(), a.y.value())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ext(q: u64, b: i64) -> QuadExt {
        let k = PrimeField::new(q).unwrap();
        QuadExt::new(k, k.elem(b)).unwrap()
    }

    /// Schoolbook product of linear polynomials in β, reduced mod β^2 - b.
    fn poly_mul(q: i64, b: i64, (x1, y1): (i64, i64), (x2, y2): (i64, i64)) -> (i64, i64) {
        let c0 = x1 * x2;
        let c1 = x1 * y2 + y1 * x2;
        let c2 = y1 * y2;
        ((c0 + c2 * b).rem_euclid(q), c1.rem_euclid(q))
    }

    #[test]
    fn rejects_square_b() {
        let k = PrimeField::new(13).unwrap();
        assert!(QuadExt::new(k, k.elem(4)).is_err());
        assert!(QuadExt::new(k, k.elem(0)).is_err());
        assert!(QuadExt::new(k, k.elem(11)).is_ok());
        assert_eq!(QuadExt::canonical(k).b().value(), 2);
    }

    #[test]
    fn mul_examples() {
        let e = ext(13, 11);
        assert_eq!(e.mul(e.beta(), e.beta()), e.elem(11, 0));
        let a = e.elem(7, 3);
        assert_eq!(e.mul(a, e.one()), a);

        let e = ext(7, 3);
        assert_eq!(e.mul(e.elem(1, 1), e.elem(1, 6)), e.elem(5, 0));
    }

    #[test]
    fn mul_matches_polynomial_product() {
        for (q, b) in [(7i64, 3i64), (13, 2), (13, 11), (11, 2)] {
            let e = ext(q as u64, b);
            for a in e.elements() {
                for c in [e.elem(1, 1), e.elem(3, 5), e.elem(0, 2)] {
                    let got = e.mul(a, c);
                    let want = poly_mul(
                        q,
                        b,
                        (a.x.value() as i64, a.y.value() as i64),
                        (c.x.value() as i64, c.y.value() as i64),
                    );
                    assert_eq!((got.x.value() as i64, got.y.value() as i64), want);
                }
            }
        }
    }

    #[test]
    fn frobenius_examples() {
        let e = ext(13, 2);
        assert_eq!(e.frobenius(e.elem(5, 0)), e.elem(5, 0));
        assert_eq!(e.frobenius(e.elem(3, 5)), e.elem(3, 8));
        assert_eq!(e.pow(e.elem(3, 5), 13), e.elem(3, 8));
        assert_eq!(e.frobenius(e.beta()), e.elem(0, 12));
    }

    #[test]
    fn frobenius_agrees_with_pow_q() {
        for (q, b) in [(3u64, 2i64), (7, 3), (13, 2), (13, 11)] {
            let e = ext(q, b);
            for a in e.elements() {
                assert_eq!(e.frobenius(a), e.pow(a, q));
                assert_eq!(e.frobenius(e.frobenius(a)), a);
            }
        }
    }

    #[test]
    fn field_axioms_exhaustive() {
        for (q, b) in [(3u64, 2i64), (5, 2), (7, 3), (11, 2), (13, 2)] {
            let e = ext(q, b);
            let all: Vec<Ext> = e.elements().collect();
            for &a in &all {
                if !a.is_zero() {
                    let ai = e.inv(a).unwrap();
                    assert_eq!(e.mul(a, ai), e.one());
                }
                for &c in &all {
                    assert_eq!(e.mul(a, c), e.mul(c, a));
                    // Frobenius is a ring homomorphism
                    assert_eq!(
                        e.frobenius(e.mul(a, c)),
                        e.mul(e.frobenius(a), e.frobenius(c))
                    );
                    assert_eq!(e.frobenius(a + c), e.frobenius(a) + e.frobenius(c));
                }
            }
            // associativity and distributivity on a thinned triple loop
            for &a in all.iter().step_by(3) {
                for &c in all.iter().step_by(2) {
                    for &d in &all {
                        assert_eq!(e.mul(e.mul(a, c), d), e.mul(a, e.mul(c, d)));
                        assert_eq!(e.mul(a, c + d), e.mul(a, c) + e.mul(a, d));
                    }
                }
            }
        }
    }

    #[test]
    fn encode_roundtrip() {
        let e = ext(13, 2);
        for (i, a) in e.elements().enumerate() {
            assert_eq!(e.encode(a), i);
            assert_eq!(e.decode(i), a);
        }
        assert_eq!(e.decode(5).beta_label(), "0+5β");
    }
}
