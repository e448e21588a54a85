//! Bounded exhaustive search for the shortest alternating word.
//!
//! All alternating words of length at most `ceil(max_len / 2)` over the
//! parameter set are tabulated once, keyed by their matrix. A query for `A`
//! walks the short half `W2` and looks up `A W2^-1` among the long halves,
//! requiring the sides to alternate across the join. Answers are relative to
//! the parameter set: "none" only means no word of that shape exists.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use crate::error::{Error, Result};
use crate::ring::{Ring, RingElement};
use crate::sl2::{ElemLetter, ElemWord, Mat2, Side};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleParams {
    pub max_len: usize,
    pub param_set: Vec<RingElement>,
    /// Cap on tabulated half-words.
    pub table_limit: usize,
}

impl OracleParams {
    /// Zero parameters are rejected; duplicates are dropped.
    pub fn new(max_len: usize, param_set: Vec<RingElement>) -> Result<Self> {
        if param_set.iter().any(|p| p.is_zero()) {
            return Err(Error::Unsupported("0 is not allowed as a letter parameter".into()));
        }
        let mut seen = std::collections::HashSet::new();
        let param_set = param_set.into_iter().filter(|p| seen.insert(p.clone())).collect();
        Ok(OracleParams { max_len, param_set, table_limit: 2_000_000 })
    }

    /// `{+-1, ..., +-h}`.
    pub fn integers(ring: &Ring, max_len: usize, h: i64) -> Self {
        let set = (1..=h).flat_map(|x| [ring.int(x), ring.int(-x)]).collect();
        OracleParams::new(max_len, set).expect("nonzero")
    }
}

struct Half {
    m: Mat2,
    /// `(side, parameter index)`
    letters: Vec<(Side, usize)>,
}

impl Half {
    fn first(&self) -> Option<Side> {
        self.letters.first().map(|l| l.0)
    }

    fn last(&self) -> Option<Side> {
        self.letters.last().map(|l| l.0)
    }
}

pub struct Oracle<'r> {
    ring: &'r Ring,
    params: OracleParams,
    halves: Vec<Half>,
    by_len: Vec<Vec<usize>>,
    inverses: Vec<Mat2>,
    index: HashMap<Mat2, Vec<usize>>,
}

impl<'r> Oracle<'r> {
    pub fn new(ring: &'r Ring, params: OracleParams) -> Result<Self> {
        let h = params.max_len.div_ceil(2);
        let mut halves = vec![Half { m: ring.identity(), letters: vec![] }];
        let mut by_len = vec![vec![0]];
        for len in 1..=h {
            let mut cur = Vec::new();
            for &i in &by_len[len - 1] {
                let sides: &[Side] = match halves[i].last() {
                    None => &[Side::Lower, Side::Upper],
                    Some(Side::Lower) => &[Side::Upper],
                    Some(Side::Upper) => &[Side::Lower],
                };
                for &side in sides {
                    for (pi, p) in params.param_set.iter().enumerate() {
                        if halves.len() >= params.table_limit {
                            return Err(Error::OracleOverflow { limit: params.table_limit });
                        }
                        let m = ring.apply_letter(&halves[i].m, side, p);
                        let mut letters = halves[i].letters.clone();
                        letters.push((side, pi));
                        cur.push(halves.len());
                        halves.push(Half { m, letters });
                    }
                }
            }
            by_len.push(cur);
        }
        let inverses = halves.iter().map(|w| ring.mat_inverse(&w.m)).collect();
        let mut index: HashMap<Mat2, Vec<usize>> = HashMap::with_capacity(halves.len());
        for (i, w) in halves.iter().enumerate() {
            index.entry(w.m.clone()).or_default().push(i);
        }
        Ok(Oracle { ring, params, halves, by_len, inverses, index })
    }

    pub fn params(&self) -> &OracleParams {
        &self.params
    }

    pub fn table_size(&self) -> usize {
        self.halves.len()
    }

    /// A shortest word, `None` when nothing of length `<= max_len` exists.
    pub fn min_word(&self, a: &Mat2) -> Option<ElemWord> {
        for n in 0..=self.params.max_len {
            let n1 = n.div_ceil(2);
            let n2 = n - n1;
            for &j in &self.by_len[n2] {
                let target = if n2 == 0 { a.clone() } else { self.ring.mat_mul(a, &self.inverses[j]) };
                let Some(cands) = self.index.get(&target) else { continue };
                let first2 = self.halves[j].first();
                if let Some(&i) = cands
                    .iter()
                    .find(|&&i| self.halves[i].letters.len() == n1 && (first2.is_none() || self.halves[i].last() != first2))
                {
                    return Some(self.word(&[i, j]));
                }
            }
        }
        None
    }

    pub fn min_word_length(&self, a: &Mat2) -> Option<usize> {
        self.min_word(a).map(|w| w.len())
    }

    fn word(&self, parts: &[usize]) -> ElemWord {
        ElemWord::new(
            parts
                .iter()
                .flat_map(|&i| self.halves[i].letters.iter())
                .map(|&(side, p)| ElemLetter { side, param: self.params.param_set[p].clone() })
                .collect(),
        )
    }

    /// Every matrix given by an alternating word of length `<= len` (at most
    /// the tabulated half length), with the length of its shortest such word.
    pub fn tabulated(&self, len: usize) -> Vec<(Mat2, usize)> {
        let mut seen = HashMap::new();
        let mut out = Vec::new();
        for (n, ids) in self.by_len.iter().enumerate().take(len + 1) {
            for &i in ids {
                if seen.insert(&self.halves[i].m, n).is_none() {
                    out.push((self.halves[i].m.clone(), n));
                }
            }
        }
        out
    }
}

/// One-shot [`Oracle::min_word_length`].
pub fn min_word_length(ring: &Ring, a: &Mat2, params: &OracleParams) -> Result<Option<usize>> {
    Ok(Oracle::new(ring, params.clone())?.min_word_length(a))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LengthBin {
    Exact(usize),
    /// No word within `max_len`.
    Over,
}

impl fmt::Display for LengthBin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LengthBin::Exact(n) => write!(f, "{n}"),
            LengthBin::Over => write!(f, ">max"),
        }
    }
}

pub fn length_histogram<I: IntoIterator<Item = Mat2>>(oracle: &Oracle, sample: I) -> BTreeMap<LengthBin, u64> {
    let mut h = BTreeMap::new();
    for m in sample {
        let bin = oracle.min_word_length(&m).map_or(LengthBin::Over, LengthBin::Exact);
        *h.entry(bin).or_default() += 1;
    }
    h
}

/// `length,count`, with the overflow bin written as `>max_len`.
pub fn histogram_csv(h: &BTreeMap<LengthBin, u64>, max_len: usize) -> String {
    let mut out = String::from("length,count\n");
    for (bin, c) in h {
        match bin {
            LengthBin::Exact(n) => out.push_str(&format!("{n},{c}\n")),
            LengthBin::Over => out.push_str(&format!(">{max_len},{c}\n")),
        }
    }
    out
}
