//! First-row calculus and division chains.
//!
//! Right multiplication by `L(x)` / `U(x)` acts on the first row `(a, b)` of a
//! matrix as `l(x): (a, b) -> (a + bx, b)` and `u(x): (a, b) -> (a, ax + b)`.
//! A division chain `a = q1 b + r1, b = q2 r1 + r2, ...` is the same thing
//! read as the move sequence `l(-q1), u(-q2), l(-q3), ...`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::ring::{Ring, RingElement};
use crate::sl2::{Mat2, Side};

/// A unimodular pair `(a, b)`, `aO + bO = O`, optionally with a second row
/// `(c, d)` such that `ad - bc = 1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RowPair {
    pub a: RingElement,
    pub b: RingElement,
    pub witness: Option<(RingElement, RingElement)>,
}

impl RowPair {
    pub fn from_matrix(m: &Mat2) -> Self {
        RowPair { a: m.a().clone(), b: m.b().clone(), witness: Some((m.c().clone(), m.d().clone())) }
    }

    /// A pair the caller already knows to be unimodular.
    pub fn new_unchecked(a: RingElement, b: RingElement) -> Self {
        RowPair { a, b, witness: None }
    }

    pub fn values(&self) -> (&RingElement, &RingElement) {
        (&self.a, &self.b)
    }
}

impl Ring {
    /// Exact test of `aO + bO = O`: after scaling away denominators the
    /// integral ideal `(a, b)` must have index built from inverted primes.
    pub fn is_unimodular(&self, a: &RingElement, b: &RingElement) -> bool {
        if a.is_zero() && b.is_zero() {
            return false;
        }
        if self.is_rational() {
            return self.is_smooth(&a.x().gcd(b.x()));
        }
        // lattice spanned by a', a'w, b', b'w inside Z + Zw
        let w = self.omega().expect("quadratic");
        let mut gens = Vec::with_capacity(4);
        for e in [a, b] {
            let e = self.mul_int(e, e.den());
            gens.push((e.x().clone(), e.y().clone()));
            let ew = self.mul(&e, &w);
            gens.push((ew.x().clone(), ew.y().clone()));
        }
        let mut g = BigInt::zero();
        for i in 0..4 {
            for j in i + 1..4 {
                let minor = &gens[i].0 * &gens[j].1 - &gens[i].1 * &gens[j].0;
                g = g.gcd(&minor);
            }
        }
        self.is_smooth(&g)
    }

    /// Checked constructor.
    pub fn row_pair(&self, a: RingElement, b: RingElement) -> Result<RowPair> {
        if !self.is_unimodular(&a, &b) {
            return Err(Error::NotInRing {
                ring: self.spec().to_string(),
                detail: format!("({a}, {b}) is not a unimodular row"),
            });
        }
        Ok(RowPair::new_unchecked(a, b))
    }

    /// `(a, b) l(x) = (a + bx, b)`
    pub fn apply_l(&self, p: &RowPair, x: &RingElement) -> RowPair {
        RowPair {
            a: self.add(&p.a, &self.mul(&p.b, x)),
            b: p.b.clone(),
            witness: p.witness.as_ref().map(|(c, d)| (self.add(c, &self.mul(d, x)), d.clone())),
        }
    }

    /// `(a, b) u(x) = (a, ax + b)`
    pub fn apply_u(&self, p: &RowPair, x: &RingElement) -> RowPair {
        RowPair {
            a: p.a.clone(),
            b: self.add(&self.mul(&p.a, x), &p.b),
            witness: p.witness.as_ref().map(|(c, d)| (c.clone(), self.add(&self.mul(c, x), d))),
        }
    }

    pub fn apply_move(&self, p: &RowPair, side: Side, x: &RingElement) -> RowPair {
        match side {
            Side::Lower => self.apply_l(p, x),
            Side::Upper => self.apply_u(p, x),
        }
    }

    /// Remainders from the recurrence `r_i = r_{i-2} - q_i r_{i-1}` with
    /// `r_{-1} = a`, `r_0 = b`. Any quotient list is accepted.
    pub fn make_chain(&self, a: RingElement, b: RingElement, quotients: Vec<RingElement>) -> DivisionChain {
        let mut r = Vec::with_capacity(quotients.len());
        let (mut prev, mut cur) = (a.clone(), b.clone());
        for q in &quotients {
            let next = self.sub(&prev, &self.mul(q, &cur));
            r.push(next.clone());
            prev = std::mem::replace(&mut cur, next);
        }
        DivisionChain { a, b, q: quotients, r }
    }

    pub fn check_chain(&self, ch: &DivisionChain) -> Result<()> {
        if ch.q.len() != ch.r.len() {
            return Err(Error::Json(format!("{} quotients but {} remainders", ch.q.len(), ch.r.len())));
        }
        let (mut prev, mut cur) = (&ch.a, &ch.b);
        for (i, (q, r)) in ch.q.iter().zip(&ch.r).enumerate() {
            if self.sub(prev, &self.mul(q, cur)) != *r {
                return Err(Error::Json(format!("recurrence fails at step {}", i + 1)));
            }
            prev = std::mem::replace(&mut cur, r);
        }
        Ok(())
    }

    /// Recurrence holds, last remainder is zero and the one before is a unit.
    pub fn check_terminating(&self, ch: &DivisionChain) -> Result<()> {
        self.check_chain(ch)?;
        if !ch.is_terminating() {
            return Err(Error::Internal("chain does not terminate".into()));
        }
        let last = match ch.r.len() {
            0 => &ch.a,
            1 => &ch.b,
            n => &ch.r[n - 2],
        };
        if !self.is_unit(last) {
            return Err(Error::Internal(format!("penultimate remainder {last} is not a unit")));
        }
        Ok(())
    }

    /// The move sequence `l(-q1), u(-q2), l(-q3), ...` and the pair it reaches:
    /// `(r_{k-1}, r_k)` for even `k`, `(r_k, r_{k-1})` for odd `k`.
    pub fn chain_to_reduction(&self, ch: &DivisionChain) -> Reduction {
        let moves: Vec<(Side, RingElement)> = ch
            .q
            .iter()
            .enumerate()
            .map(|(i, q)| (if i % 2 == 0 { Side::Lower } else { Side::Upper }, self.neg(q)))
            .collect();
        let mut pair = RowPair::new_unchecked(ch.a.clone(), ch.b.clone());
        for (side, x) in &moves {
            pair = self.apply_move(&pair, *side, x);
        }
        Reduction { moves, final_pair: pair }
    }

    /// Chain from JSON; the recurrence is revalidated.
    pub fn chain_from_json(&self, s: &str) -> Result<DivisionChain> {
        let raw: ChainJson = serde_json::from_str(s).map_err(|e| Error::Json(e.to_string()))?;
        let parse_all = |v: &[String]| v.iter().map(|t| self.parse_element(t)).collect::<Result<Vec<_>>>();
        let ch = DivisionChain {
            a: self.parse_element(&raw.a)?,
            b: self.parse_element(&raw.b)?,
            q: parse_all(&raw.q)?,
            r: parse_all(&raw.r)?,
        };
        self.check_chain(&ch)?;
        Ok(ch)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DivisionChain {
    pub a: RingElement,
    pub b: RingElement,
    pub q: Vec<RingElement>,
    pub r: Vec<RingElement>,
}

#[derive(Serialize, Deserialize)]
struct ChainJson {
    a: String,
    b: String,
    q: Vec<String>,
    r: Vec<String>,
}

impl DivisionChain {
    pub fn len(&self) -> usize {
        self.q.len()
    }

    pub fn is_empty(&self) -> bool {
        self.q.is_empty()
    }

    /// `r_k = 0`, where `r_0 = b` for the empty chain.
    pub fn is_terminating(&self) -> bool {
        self.r.last().unwrap_or(&self.b).is_zero()
    }

    pub fn to_json(&self) -> Value {
        let strs = |v: &[RingElement]| v.iter().map(|e| e.to_string()).collect::<Vec<_>>();
        json!({"a": self.a.to_string(), "b": self.b.to_string(), "q": strs(&self.q), "r": strs(&self.r)})
    }

    /// One step longer and still terminating: the last step `r_{k-2} = q_k v`
    /// becomes `r_{k-2} = (q_k - 1) v + v`, `v = 1*v + 0`.
    pub fn extended(&self, ring: &Ring) -> DivisionChain {
        let mut q = self.q.clone();
        let last = q.pop().expect("non-empty terminating chain");
        q.push(ring.sub(&last, &ring.one()));
        q.push(ring.one());
        ring.make_chain(self.a.clone(), self.b.clone(), q)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Reduction {
    pub moves: Vec<(Side, RingElement)>,
    pub final_pair: RowPair,
}
