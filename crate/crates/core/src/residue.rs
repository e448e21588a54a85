//! Arithmetic in `O / aO` for the congruence searches.
//!
//! With `n` the prime-to-`m` part of `|N(a)|`, the quotient of the
//! localised ring by `a` is a quotient of `O/nO = (Z/n)^2`, and
//! `z = z' (mod a)` holds exactly when `(z - z') conj(a) = 0 (mod n)`.
//! Classes are compared through that key.

use std::hash::Hash;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::ring::{Ring, RingElement};

pub(crate) trait Modulus {
    type V: Clone + Eq + Hash;
    fn from_big(&self, v: &BigInt) -> Self::V;
    fn add(&self, a: &Self::V, b: &Self::V) -> Self::V;
    fn mul(&self, a: &Self::V, b: &Self::V) -> Self::V;
    fn inv(&self, a: &Self::V) -> Option<Self::V>;
    fn zero(&self) -> Self::V;
}

pub(crate) struct SmallMod(pub u64);

impl Modulus for SmallMod {
    type V = u64;

    fn from_big(&self, v: &BigInt) -> u64 {
        v.mod_floor(&BigInt::from(self.0)).to_u64().expect("reduced")
    }

    fn add(&self, a: &u64, b: &u64) -> u64 {
        ((*a as u128 + *b as u128) % self.0 as u128) as u64
    }

    fn mul(&self, a: &u64, b: &u64) -> u64 {
        ((*a as u128 * *b as u128) % self.0 as u128) as u64
    }

    fn inv(&self, a: &u64) -> Option<u64> {
        let (mut r0, mut r1) = (self.0 as i128, *a as i128);
        let (mut t0, mut t1) = (0i128, 1i128);
        while r1 != 0 {
            let q = r0 / r1;
            (r0, r1) = (r1, r0 - q * r1);
            (t0, t1) = (t1, t0 - q * t1);
        }
        (r0 == 1).then(|| t0.rem_euclid(self.0 as i128) as u64)
    }

    fn zero(&self) -> u64 {
        0
    }
}

pub(crate) struct BigMod(pub BigInt);

impl Modulus for BigMod {
    type V = BigInt;

    fn from_big(&self, v: &BigInt) -> BigInt {
        v.mod_floor(&self.0)
    }

    fn add(&self, a: &BigInt, b: &BigInt) -> BigInt {
        (a + b).mod_floor(&self.0)
    }

    fn mul(&self, a: &BigInt, b: &BigInt) -> BigInt {
        (a * b).mod_floor(&self.0)
    }

    fn inv(&self, a: &BigInt) -> Option<BigInt> {
        let e = a.extended_gcd(&self.0);
        e.gcd.is_one().then(|| e.x.mod_floor(&self.0))
    }

    fn zero(&self) -> BigInt {
        BigInt::zero()
    }
}

/// `O/nO` for the given modulus, with the class key of one fixed element `a`.
pub(crate) struct Residues<M: Modulus> {
    pub m: M,
    c0: M::V,
    c1: M::V,
    quadratic: bool,
    /// residue of `conj(a)`, used for class keys
    adj: (M::V, M::V),
}

pub(crate) type Pair<M> = (<M as Modulus>::V, <M as Modulus>::V);

impl<M: Modulus> Residues<M> {
    pub fn new(ring: &Ring, m: M, a: &RingElement) -> Self {
        let (c0, c1) = ring.omega_square();
        let (c0, c1) = (m.from_big(c0), m.from_big(c1));
        let quadratic = !ring.is_rational();
        let ca = ring.conj(&ring.mul_int(a, a.den()));
        let adj = (m.from_big(ca.x()), m.from_big(ca.y()));
        Residues { m, c0, c1, quadratic, adj }
    }

    /// Residue of `e`; its denominator is prime to `n`.
    pub fn of(&self, e: &RingElement) -> Pair<M> {
        let dinv = self.m.inv(&self.m.from_big(e.den())).expect("denominator is invertible");
        (self.m.mul(&self.m.from_big(e.x()), &dinv), self.m.mul(&self.m.from_big(e.y()), &dinv))
    }

    pub fn mul(&self, (x1, y1): &Pair<M>, (x2, y2): &Pair<M>) -> Pair<M> {
        if !self.quadratic {
            return (self.m.mul(x1, x2), self.m.zero());
        }
        let m = &self.m;
        let yy = m.mul(y1, y2);
        let x = m.add(&m.mul(x1, x2), &m.mul(&yy, &self.c0));
        let y = m.add(&m.add(&m.mul(x1, y2), &m.mul(x2, y1)), &m.mul(&yy, &self.c1));
        (x, y)
    }

    pub fn pow(&self, base: &Pair<M>, mut e: u64) -> Pair<M> {
        let mut acc = (self.m.from_big(&BigInt::one()), self.m.zero());
        let mut sq = base.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &sq);
            }
            e >>= 1;
            if e > 0 {
                sq = self.mul(&sq, &sq);
            }
        }
        acc
    }

    /// Class of `z` modulo `a`.
    pub fn key(&self, z: &Pair<M>) -> Pair<M> {
        if self.quadratic {
            self.mul(z, &self.adj)
        } else {
            z.clone()
        }
    }
}

/// Below this bound the modulus fits the `u64` fast path.
pub(crate) fn fits_small(n: &BigInt) -> bool {
    n.is_positive() && n.bits() <= 63
}
