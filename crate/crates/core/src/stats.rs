//! Seeded random matrices and length statistics.
//!
//! A sample is an alternating word: its length is uniform in
//! `1..=max_len`, the first side is `L` or `U` with equal odds, and each
//! parameter is `(x + y*w)/den` with `x, y` uniform in `[-h, h]` (`y = 0`
//! over `Q`), redrawn while both are zero, and `den` uniform over `1` and
//! the inverted primes. Draws happen in exactly that order, per letter `x`,
//! then `y` (quadratic only), then `den`.

use std::collections::BTreeMap;

use num_bigint::BigInt;

use crate::chains::SearchBudget;
use crate::engine::{factor, FactorizationResult};
use crate::error::{Error, Result};
use crate::rng::Lcg;
use crate::ring::Ring;
use crate::sl2::{ElemLetter, ElemWord, Mat2, Side};

pub struct WordSampler<'r> {
    ring: &'r Ring,
    rng: Lcg,
    max_len: usize,
    height: i64,
    dens: Vec<BigInt>,
}

impl<'r> WordSampler<'r> {
    pub fn new(ring: &'r Ring, seed: u64, max_len: usize, height: u32) -> Self {
        assert!(max_len >= 1 && height >= 1);
        let mut dens = vec![BigInt::from(1)];
        dens.extend(ring.spec().inverted_primes().iter().map(|&p| BigInt::from(p)));
        WordSampler { ring, rng: Lcg::new(seed), max_len, height: height as i64, dens }
    }

    pub fn next_word(&mut self) -> ElemWord {
        let len = 1 + self.rng.below(self.max_len as u64) as usize;
        let mut side = if self.rng.below(2) == 0 { Side::Lower } else { Side::Upper };
        let mut letters = Vec::with_capacity(len);
        for _ in 0..len {
            let param = loop {
                let x = self.rng.range_i64(-self.height, self.height);
                let y = if self.ring.is_rational() { 0 } else { self.rng.range_i64(-self.height, self.height) };
                let den = self.dens[self.rng.below(self.dens.len() as u64) as usize].clone();
                if x != 0 || y != 0 {
                    break self.ring.element(x.into(), y.into(), den).expect("smooth denominator");
                }
            };
            letters.push(ElemLetter { side, param });
            side = side.other();
        }
        ElemWord::new(letters)
    }

    pub fn next_matrix(&mut self) -> (ElemWord, Mat2) {
        let w = self.next_word();
        let m = self.ring.eval_word(&w);
        (w, m)
    }
}

/// [`factor`], retrying with a doubled `max_k` and four times the node limit
/// (up to `rounds` retries) while the search runs out.
pub fn factor_escalating(ring: &Ring, m: &Mat2, budget: &SearchBudget, rounds: u32) -> Result<FactorizationResult> {
    let mut b = budget.clone();
    let mut left = rounds;
    loop {
        match factor(ring, m, &b) {
            Err(Error::NotFound { .. } | Error::BudgetExhausted { .. }) if left > 0 => {
                left -= 1;
                b.max_k *= 2;
                b.node_limit = b.node_limit.saturating_mul(4);
            }
            r => return r,
        }
    }
}

/// [`factor_escalating`], then while the word is longer than `target`
/// (up to `rounds` times) a search capped at a chain of `target - 2` steps
/// with four times the twists. Keeps the shortest word found.
pub fn factor_for_length(
    ring: &Ring,
    m: &Mat2,
    budget: &SearchBudget,
    rounds: u32,
    target: usize,
    length_rounds: u32,
) -> Result<FactorizationResult> {
    let mut best = factor_escalating(ring, m, budget, rounds)?;
    let k = target.saturating_sub(2).max(2);
    let mut b = SearchBudget { max_k: k, settle_k: k, ..budget.clone() };
    for _ in 0..length_rounds {
        if best.raw_length <= target {
            break;
        }
        b.twist_bound = b.twist_bound.saturating_mul(4);
        if let Ok(f) = factor(ring, m, &b) {
            if f.raw_length < best.raw_length {
                best = f;
            }
        }
    }
    Ok(best)
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct StatsReport {
    pub samples: u64,
    pub verified: u64,
    pub raw_length: BTreeMap<usize, u64>,
    pub chain_k: BTreeMap<usize, u64>,
    /// Failures by kind: `not_found`, `budget_exhausted`, `error`.
    pub failures: BTreeMap<&'static str, u64>,
}

impl StatsReport {
    pub fn record(&mut self, r: &Result<FactorizationResult>) {
        self.samples += 1;
        match r {
            Ok(f) => {
                if f.verified {
                    self.verified += 1;
                }
                *self.raw_length.entry(f.raw_length).or_default() += 1;
                *self.chain_k.entry(f.chain_length_used).or_default() += 1;
            }
            Err(e) => {
                let kind = match e {
                    Error::NotFound { .. } => "not_found",
                    Error::BudgetExhausted { .. } => "budget_exhausted",
                    _ => "error",
                };
                *self.failures.entry(kind).or_default() += 1;
            }
        }
    }

    /// `metric,value,count`; only the header when there are no samples.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("metric,value,count\n");
        if self.samples == 0 {
            return out;
        }
        for (v, c) in &self.raw_length {
            out.push_str(&format!("raw_length,{v},{c}\n"));
        }
        for (v, c) in &self.chain_k {
            out.push_str(&format!("chain_k,{v},{c}\n"));
        }
        out.push_str(&format!("status,verified,{}\n", self.verified));
        for (k, c) in &self.failures {
            out.push_str(&format!("status,{k},{c}\n"));
        }
        out
    }
}

/// Factor `count` sampled matrices.
pub fn run_stats(
    ring: &Ring,
    budget: &SearchBudget,
    count: u64,
    seed: u64,
    word_length: usize,
    height: u32,
    escalation_rounds: u32,
) -> StatsReport {
    let mut sampler = WordSampler::new(ring, seed, word_length, height);
    let mut report = StatsReport::default();
    for _ in 0..count {
        let (_, m) = sampler.next_matrix();
        report.record(&factor_escalating(ring, &m, budget, escalation_rounds));
    }
    report
}
