//! Factorization of a determinant-one matrix into elementary matrices.
//!
//! With first row `(a, b)`, suppose `b - v = a x` for a unit `v`. Then
//! `A U(-x) L(v^-1 (1 - a)) U(-v)` has first row `(1, 0)`, so it is some
//! `L(w)` and
//!
//! ```text
//! A = L(w) U(v) L(v^-1 (a - 1)) U(x).
//! ```
//!
//! That is a chain of length 2 from `(b, a)`. A longer chain is consumed one
//! quotient at a time: for odd length the chain runs from `(a, b)` and
//! `A L(-q1)` has first row `(r1, b)`; for even length it runs from `(b, a)`
//! and `A U(-q1)` has first row `(a, r1)`. Either way the remaining chain is
//! one shorter with the other parity. A chain of length `k` gives a word of
//! `k + 2` letters starting with `L`.

use serde_json::{json, Value};

use crate::chains::{ChainSearcher, SearchBudget};
use crate::error::{Error, Result};
use crate::reduction::DivisionChain;
use crate::ring::{Ring, RingElement};
use crate::sl2::{ElemLetter, ElemWord, Mat2, Side};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FactorizationResult {
    /// The word as produced, before merging.
    pub word: ElemWord,
    pub canonical_word: ElemWord,
    pub raw_length: usize,
    pub starts_lower: bool,
    /// Length of the division chain behind the word; 0 for the identity and
    /// single elementary matrices.
    pub chain_length_used: usize,
    pub verified: bool,
}

impl FactorizationResult {
    pub fn to_json(&self) -> Value {
        json!({
            "word": self.word.letters_json(),
            "canonical": self.canonical_word.letters_json(),
            "raw_length": self.raw_length,
            "starts_lower": self.starts_lower,
            "chain_k": self.chain_length_used,
            "verified": self.verified,
        })
    }
}

/// Factor `m` over an admissible ring. The identity and single elementary
/// matrices are answered over any ring.
pub fn factor(ring: &Ring, m: &Mat2, budget: &SearchBudget) -> Result<FactorizationResult> {
    if !ring.spec().is_admissible() && !m.is_identity() && m.as_elementary().is_none() {
        return Err(Error::NotAdmissible(ring.spec().to_string()));
    }
    factor_permissive(ring, m, budget)
}

/// [`factor`] without the admissibility check. Over rings with finitely many
/// units (such as `Z`) the chains, and so the words, can be long.
pub fn factor_permissive(ring: &Ring, m: &Mat2, budget: &SearchBudget) -> Result<FactorizationResult> {
    let (letters, k) = if m.is_identity() {
        (vec![ElemLetter::lower(ring.zero())], 0)
    } else if let Some(l) = m.as_elementary() {
        match l.side {
            Side::Lower => (vec![l], 0),
            Side::Upper => (vec![ElemLetter::lower(ring.zero()), l], 0),
        }
    } else {
        let (ch, k) = search(ring, m, budget)?;
        (word_from_chain(ring, m, &ch), k)
    };
    finish(ring, m, ElemWord::new(letters), k)
}

/// Word of length 4 for a matrix whose first row satisfies `b - v = a x`.
pub fn factor_base(ring: &Ring, m: &Mat2, v: &RingElement, x: &RingElement) -> Result<ElemWord> {
    let (a, b) = m.first_row();
    if !ring.is_unit(v) || ring.sub(b, v) != ring.mul(a, x) {
        return Err(Error::Internal(format!("({v}, {x}) does not solve b - v = a x for the first row ({a}, {b})")));
    }
    Ok(ElemWord::new(base_letters(ring, m, v, x)))
}

fn base_letters(ring: &Ring, m: &Mat2, v: &RingElement, x: &RingElement) -> Vec<ElemLetter> {
    let vinv = ring.unit_inverse(v).expect("unit");
    let t = ring.mul(&vinv, &ring.sub(&ring.one(), m.a()));
    let p = ring.apply_letter(m, Side::Upper, &ring.neg(x));
    let p = ring.apply_letter(&p, Side::Lower, &t);
    let p = ring.apply_letter(&p, Side::Upper, &ring.neg(v));
    debug_assert!(p.a().is_one() && p.b().is_zero() && p.d().is_one());
    vec![
        ElemLetter::lower(p.c().clone()),
        ElemLetter::upper(v.clone()),
        ElemLetter::lower(ring.neg(&t)),
        ElemLetter::upper(x.clone()),
    ]
}

/// Word from a terminating chain of length `k >= 2` taken from `(a, b)` for
/// odd `k` and from `(b, a)` for even `k`.
fn word_from_chain(ring: &Ring, m: &Mat2, ch: &DivisionChain) -> Vec<ElemLetter> {
    let k = ch.len();
    debug_assert!(k >= 2);
    let mut cur = m.clone();
    let mut peeled = Vec::with_capacity(k - 2);
    for (i, q) in ch.q[..k - 2].iter().enumerate() {
        let side = if (k - i) % 2 == 1 { Side::Lower } else { Side::Upper };
        cur = ring.apply_letter(&cur, side, &ring.neg(q));
        peeled.push(ElemLetter { side, param: q.clone() });
    }
    // the last two steps: b = x a + v, a = (a/v) v
    let (x, v) = (&ch.q[k - 2], &ch.r[k - 2]);
    let mut out = base_letters(ring, &cur, v, x);
    out.extend(peeled.into_iter().rev());
    out
}

fn pad(ring: &Ring, ch: DivisionChain, k: usize) -> DivisionChain {
    let mut ch = ch;
    while ch.len() < k {
        ch = ch.extended(ring);
    }
    ch
}

fn start_for(m: &Mat2, k: usize) -> (&RingElement, &RingElement) {
    let (a, b) = m.first_row();
    if k % 2 == 0 {
        (b, a)
    } else {
        (a, b)
    }
}

/// Smallest usable `k >= max(2, j)` with the parity of the start.
fn usable(j: usize, even_start: bool) -> usize {
    let k = j.max(2);
    if (k % 2 == 0) == even_start {
        k
    } else {
        k + 1
    }
}

/// Chain behind the word. A first pass runs with the quick unit bound; when
/// it needs more than [`SHORT_K`] steps the shorter lengths are searched
/// again with the full bound.
fn search(ring: &Ring, m: &Mat2, budget: &SearchBudget) -> Result<(DivisionChain, usize)> {
    if budget.quick_dlog_bound >= budget.dlog_bound {
        return search_with(ring, m, budget);
    }
    let quick = SearchBudget { dlog_bound: budget.quick_dlog_bound, ..budget.clone() };
    let first = search_with(ring, m, &quick);
    let top = match &first {
        Ok((_, k)) if *k <= SHORT_K.max(budget.settle_k) => return first,
        Ok((_, k)) => *k - 1,
        Err(_) => budget.max_k.min(SHORT_K),
    };
    let mut s = ChainSearcher::new(ring, budget.clone());
    for k in 2..=top.min(SHORT_K) {
        let (x, y) = start_for(m, k);
        match s.within(x, y, k) {
            Ok(Some(ch)) => return Ok((pad(ring, ch, k), k)),
            Ok(None) => {}
            Err(_) => break,
        }
    }
    first
}

/// Longest chain worth the full unit bound: it gives a word of five letters.
const SHORT_K: usize = 3;

/// Greedy descents from both starts bound the length, then each shorter `k`
/// is searched in turn.
fn search_with(ring: &Ring, m: &Mat2, budget: &SearchBudget) -> Result<(DivisionChain, usize)> {
    let mut s = ChainSearcher::new(ring, budget.clone());
    let max_k = budget.max_k;
    let mut best: Option<(usize, DivisionChain)> = None;
    for even in [true, false] {
        let (x, y) = start_for(m, if even { 2 } else { 3 });
        let found = s.greedy(x, y, max_k)?;
        if let Some(ch) = found {
            let k = usable(ch.len(), even);
            if k <= max_k && best.as_ref().is_none_or(|(bk, _)| k < *bk) {
                best = Some((k, ch));
            }
        }
    }
    let limit = match &best {
        Some((k, _)) if *k <= budget.settle_k => 0,
        Some((k, _)) => k - 1,
        None => max_k,
    };
    for k in 2..=limit {
        let (x, y) = start_for(m, k);
        match s.within(x, y, k) {
            Ok(Some(ch)) => return Ok((pad(ring, ch, k), k)),
            Ok(None) => {}
            Err(e) => {
                return match best {
                    Some((bk, ch)) => Ok((pad(ring, ch, bk), bk)),
                    None => Err(e),
                }
            }
        }
    }
    match best {
        Some((bk, ch)) => Ok((pad(ring, ch, bk), bk)),
        None => Err(Error::NotFound { max_k }),
    }
}

fn finish(ring: &Ring, m: &Mat2, word: ElemWord, k: usize) -> Result<FactorizationResult> {
    let verified = verify(ring, m, &word);
    if !verified {
        return Err(Error::Internal(format!("word {word} does not evaluate to {m}")));
    }
    let (canonical_word, starts_lower) = ring.canonicalize(&word);
    Ok(FactorizationResult { raw_length: word.len(), word, canonical_word, starts_lower, chain_length_used: k, verified })
}

/// Exact check that `word` evaluates to `m`.
pub fn verify(ring: &Ring, m: &Mat2, word: &ElemWord) -> bool {
    ring.eval_word(word) == *m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chains::recommended_depth;
    use proptest::prelude::*;

    fn budget(r: &Ring) -> SearchBudget {
        SearchBudget::for_ring(r.spec())
    }

    #[test]
    fn base_formula() {
        let r = Ring::parse("Q[1/3]").unwrap();
        // first row (5, 7): 7 - 27 = 5 * (-4)
        let m = r.mat_i64([[5, 7], [2, 3]]).unwrap();
        let w = factor_base(&r, &m, &r.int(27), &r.int(-4)).unwrap();
        assert_eq!(w.len(), 4);
        assert!(w.starts_lower());
        assert!(verify(&r, &m, &w));
        assert!(factor_base(&r, &m, &r.int(1), &r.int(1)).is_err());
    }

    #[test]
    fn small_examples() {
        let r = Ring::parse("Q[1/11]").unwrap();
        let m = r.mat_i64([[2, 1], [1, 1]]).unwrap();
        let f = factor(&r, &m, &budget(&r)).unwrap();
        assert!(f.verified && f.starts_lower);
        assert!(f.raw_length <= 5);
        assert!(f.canonical_word.len() <= f.raw_length);

        let m = r.mat_i64([[7, 5], [4, 3]]).unwrap();
        let f = factor(&r, &m, &budget(&r)).unwrap();
        assert!(f.verified && f.starts_lower);
        assert_eq!(f.raw_length, 4);
        assert_eq!(f.chain_length_used, 2);
        assert_eq!(f.word.letters[1].param, r.int(-121));
    }

    #[test]
    fn chain_of_length_three_over_z() {
        let z = Ring::parse("Q").unwrap();
        let m = z.mat_i64([[7, 5], [4, 3]]).unwrap();
        let f = factor_permissive(&z, &m, &SearchBudget::for_ring(z.spec())).unwrap();
        assert_eq!(f.chain_length_used, 3);
        assert_eq!(f.raw_length, 5);
        assert!(f.starts_lower && f.verified);
        assert!(factor(&z, &m, &budget(&z)).is_err());
        let id = factor(&z, &z.identity(), &budget(&z)).unwrap();
        assert_eq!(id.canonical_word.len(), 0);
    }

    #[test]
    fn special_inputs() {
        let r = Ring::parse("Q[1/2]").unwrap();
        let f = factor(&r, &r.identity(), &budget(&r)).unwrap();
        assert_eq!(f.word.len(), 1);
        assert!(f.canonical_word.is_empty());
        let u = r.elementary(Side::Upper, r.int(3));
        let f = factor(&r, &u, &budget(&r)).unwrap();
        assert_eq!(f.raw_length, 2);
        assert_eq!(f.canonical_word.to_string(), "[U(3)]");
        assert!(f.starts_lower);
        let l = r.elementary(Side::Lower, r.parse_element("1/4").unwrap());
        let f = factor(&r, &l, &budget(&r)).unwrap();
        assert_eq!(f.raw_length, 1);
        // [[0,1],[-1,0]] and [[1/2,0],[0,2]]
        for m in [r.mat_i64([[0, 1], [-1, 0]]).unwrap(), r.mat(r.parse_element("1/2").unwrap(), r.zero(), r.zero(), r.int(2)).unwrap()] {
            let f = factor(&r, &m, &budget(&r)).unwrap();
            assert!(f.verified && f.starts_lower, "{m}");
            assert!(f.raw_length <= 4, "{m}: {}", f.word);
        }
    }

    #[test]
    fn json_shape() {
        let r = Ring::parse("Q[1/11]").unwrap();
        let f = factor(&r, &r.mat_i64([[7, 5], [4, 3]]).unwrap(), &budget(&r)).unwrap();
        let j = f.to_json();
        let keys: Vec<&str> = j.as_object().unwrap().keys().map(|s| s.as_str()).collect();
        assert_eq!(keys, ["word", "canonical", "raw_length", "starts_lower", "chain_k", "verified"]);
        assert_eq!(j["raw_length"], 4);
    }

    #[test]
    fn quadratic_examples() {
        for spec in ["Q(sqrt 2)", "Q(sqrt -1)[1/5]", "Q(sqrt 5; half)"] {
            let r = Ring::parse(spec).unwrap();
            let m = r.mat_i64([[13, 8], [8, 5]]).unwrap();
            let b = SearchBudget { max_k: 24, ..budget(&r) };
            let f = factor(&r, &m, &b).unwrap();
            assert!(f.verified && f.starts_lower);
            assert_eq!(f.raw_length, f.chain_length_used + 2);
            assert!(recommended_depth(r.spec()) >= 3);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn random_products_factor(params in prop::collection::vec(-30i64..30, 1..10)) {
            let r = Ring::parse("Q[1/11]").unwrap();
            let mut m = r.identity();
            for (i, p) in params.iter().enumerate() {
                let side = if i % 2 == 0 { Side::Upper } else { Side::Lower };
                m = r.apply_letter(&m, side, &r.int(*p));
            }
            let f = factor(&r, &m, &SearchBudget { max_k: 30, ..budget(&r) }).unwrap();
            prop_assert!(f.verified);
            prop_assert!(f.starts_lower);
            prop_assert_eq!(r.eval_word(&f.canonical_word), m);
            if f.chain_length_used >= 2 {
                prop_assert_eq!(f.raw_length, f.chain_length_used + 2);
            }
        }
    }
}
