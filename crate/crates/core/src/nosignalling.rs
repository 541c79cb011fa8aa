//! The perfect no-signalling correlation and its exact verification.
//!
//! For each question the support is every answer read off a global assignment
//! `K` that is symmetric under `x_1 -> 1 - x_1` and whose restriction to player
//! 1's facet has product `(-1)^{q_1}`. A symmetric `K` is a function `h` of
//! `(x_2, ..., x_m)`, and player 1's facet sees all of `h`, so `a_1` fixes the
//! whole answer.

use std::collections::BTreeMap;
use std::io::Write;

use itertools::Itertools;
use num_bigint::BigInt;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::classical::Rational;
use crate::error::{check_range, Error, Result};
use crate::game::{facet_vertex_code, predicate, Answer, FacetAssignment, Game, Question};

/// Largest dimension whose answers fit a 64-bit key.
pub const MAX_NS_M: usize = 4;

/// A `±1` labelling of all `2^m` vertices, bit `code` set meaning `-1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct GlobalAssignment {
    m: usize,
    mask: u64,
}

impl GlobalAssignment {
    pub fn new(m: usize, mask: u64) -> Result<Self> {
        check_range(m, 2, 6)?;
        if m < 6 && mask >> (1 << m) != 0 {
            return Err(Error::Malformed(format!("mask {mask:#x} too wide for m = {m}")));
        }
        Ok(Self { m, mask })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn mask(&self) -> u64 {
        self.mask
    }

    /// `K(x_1, ..., x_m) = K(1 - x_1, ..., x_m)` everywhere.
    pub fn is_symmetric(&self) -> bool {
        let half = 1 << (self.m - 1);
        let low = self.mask & ((1u64 << half) - 1);
        self.mask >> half == low
    }

    /// `K` restricted to the facet `{x : x_player = bit}`.
    pub fn restrict(&self, player: usize, bit: u8) -> Result<FacetAssignment> {
        let mut a = FacetAssignment::all_plus(self.m, player, bit)?;
        for j in 0..a.len() {
            if self.mask >> facet_vertex_code(self.m, player, bit, j) & 1 == 1 {
                a.set_sign(j, -1);
            }
        }
        Ok(a)
    }
}

/// A symmetric global assignment, stored as its profile `h(x_2, ..., x_m)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SymmetricAssignment {
    m: usize,
    profile: u64,
}

impl SymmetricAssignment {
    /// `profile` bit `r` is the sign bit of both `(0, r)` and `(1, r)`.
    pub fn new(m: usize, profile: u64) -> Result<Self> {
        check_range(m, 2, 6)?;
        let half = 1usize << (m - 1);
        if half < 64 && profile >> half != 0 {
            return Err(Error::Malformed(format!("profile {profile:#x} too wide for m = {m}")));
        }
        Ok(Self { m, profile })
    }

    pub fn global(&self) -> GlobalAssignment {
        let half = 1 << (self.m - 1);
        GlobalAssignment { m: self.m, mask: self.profile | (self.profile << half) }
    }
}

/// Canonical answer key: facet codes concatenated, player 1 in the most significant block.
pub fn answer_key(answer: &Answer) -> Result<u64> {
    let m = answer.m();
    check_range(m, 2, MAX_NS_M)?;
    let len = 1 << (m - 1);
    Ok(answer.assignments().iter().fold(0u64, |k, a| (k << len) | a.code().expect("facet fits in 64 bits")))
}

/// Inverse of [`answer_key`] for the given question.
pub fn answer_from_key(q: &Question, key: u64) -> Result<Answer> {
    let m = q.m();
    check_range(m, 2, MAX_NS_M)?;
    let len = 1 << (m - 1);
    let assignments = (1..=m)
        .map(|p| FacetAssignment::from_code(m, p, q.bit(p), player_block(m, key, p)))
        .collect::<Result<Vec<_>>>()?;
    Answer::new(assignments)
        .and_then(|a| if len * m <= 64 { Ok(a) } else { Err(Error::Malformed("key too wide".into())) })
}

#[inline]
fn player_block(m: usize, key: u64, player: usize) -> u64 {
    let len = 1 << (m - 1);
    (key >> ((m - player) * len)) & ((1u64 << len) - 1)
}

/// Membership in the support set: some symmetric `K` reproduces every facet, and
/// player 1's product is `(-1)^{q_1}`.
pub fn in_z(answer: &Answer, q: &Question) -> bool {
    assert_eq!(answer.question(), *q, "answer does not respond to question");
    let m = answer.m();
    let rest_mask = (1u32 << (m - 1)) - 1;
    let mut profile: Vec<Option<bool>> = vec![None; 1 << (m - 1)];
    for a in answer.assignments() {
        for j in 0..a.len() {
            let code = facet_vertex_code(m, a.player(), a.question_bit(), j);
            let minus = a.sign(j) < 0;
            let slot = &mut profile[(code & rest_mask) as usize];
            match *slot {
                Some(v) if v != minus => return false,
                _ => *slot = Some(minus),
            }
        }
    }
    let target = if q.bit(1) == 1 { -1 } else { 1 };
    answer.get(1).product() == target
}

/// Uniform-weight correlation given by its support per question.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseCorrelation {
    m: usize,
    weight: Rational,
    /// Indexed by question code; sorted answer keys.
    support: Vec<Vec<u64>>,
}

impl SparseCorrelation {
    pub fn from_parts(m: usize, weight: Rational, mut support: Vec<Vec<u64>>) -> Result<Self> {
        check_range(m, 2, MAX_NS_M)?;
        if support.len() != 1 << m {
            return Err(Error::Malformed(format!("need support for {} questions, got {}", 1 << m, support.len())));
        }
        let width = m << (m - 1);
        for keys in &mut support {
            if width < 64 && keys.iter().any(|k| k >> width != 0) {
                return Err(Error::Malformed("answer key too wide".into()));
            }
            keys.sort_unstable();
            keys.dedup();
        }
        Ok(Self { m, weight, support })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn weight(&self) -> &Rational {
        &self.weight
    }

    pub fn support(&self, q: &Question) -> &[u64] {
        &self.support[q.code() as usize]
    }

    pub fn support_mut(&mut self, q: &Question) -> &mut Vec<u64> {
        &mut self.support[q.code() as usize]
    }

    /// Probability of answer `key` given `q`.
    pub fn probability(&self, q: &Question, key: u64) -> Rational {
        if self.support(q).binary_search(&key).is_ok() {
            self.weight.clone()
        } else {
            Rational::zero()
        }
    }

    fn questions(&self) -> impl Iterator<Item = Question> + '_ {
        (0..1u32 << self.m).map(move |c| Question::from_code(self.m, c))
    }

    /// Writes one JSON object per support entry: `{"q": [bits], "a": key, "p": "num/den"}`.
    pub fn write_json_lines<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        #[derive(Serialize)]
        struct Line<'a> {
            q: Question,
            a: u64,
            p: &'a str,
        }
        let p = self.weight.to_string();
        for q in self.questions() {
            for &a in self.support(&q) {
                serde_json::to_writer(&mut out, &Line { q, a, p: &p })?;
                out.write_all(b"\n")?;
            }
        }
        Ok(())
    }
}

/// `1 / 2^(2^(m-1) - 1)` on every answer in the support set, for `2 <= m <= 4`.
pub fn build_ns_correlation(m: usize) -> Result<SparseCorrelation> {
    check_range(m, 2, MAX_NS_M)?;
    let game = Game::new(m)?;
    let len = game.facet_len();
    let rest_mask = (1u32 << (m - 1)) - 1;
    let questions: Vec<Question> = game.questions().collect();
    let support = questions
        .par_iter()
        .map(|q| {
            let q1_odd = q.bit(1) == 1;
            (0..1u64 << len)
                .filter(|h| (h.count_ones() % 2 == 1) == q1_odd)
                .map(|h| {
                    // player 1's facet position j is the profile slot j itself
                    (1..=m).fold(0u64, |key, p| {
                        let code = if p == 1 {
                            h
                        } else {
                            (0..len).fold(0u64, |c, j| {
                                let v = facet_vertex_code(m, p, q.bit(p), j) & rest_mask;
                                c | ((h >> v) & 1) << j
                            })
                        };
                        (key << len) | code
                    })
                })
                .collect::<Vec<u64>>()
        })
        .collect();
    let weight = Rational::new(BigInt::one(), BigInt::one() << (len - 1));
    SparseCorrelation::from_parts(m, weight, support)
}

/// Every question's support sums to exactly 1.
pub fn verify_normalization(corr: &SparseCorrelation) -> bool {
    corr.questions()
        .all(|q| Rational::from_integer(BigInt::from(corr.support(&q).len())) * corr.weight() == Rational::one())
}

fn marginal(corr: &SparseCorrelation, q: &Question, subset: &[usize]) -> BTreeMap<u64, u64> {
    let m = corr.m;
    let len = 1 << (m - 1);
    let mut counts = BTreeMap::new();
    for &key in corr.support(q) {
        let sub = subset.iter().fold(0u64, |k, &p| (k << len) | player_block(m, key, p));
        *counts.entry(sub).or_insert(0u64) += 1;
    }
    counts
}

/// For every player subset of size `subset_size`, marginals depend only on that subset's questions.
///
/// Weights are uniform, so equal support counts are equal exact probabilities.
pub fn verify_no_signalling(corr: &SparseCorrelation, subset_size: usize) -> bool {
    let m = corr.m;
    if subset_size > m {
        return false;
    }
    (1..=m).combinations(subset_size).all(|subset| {
        let mut seen: BTreeMap<u32, BTreeMap<u64, u64>> = BTreeMap::new();
        corr.questions().all(|q| {
            let local = subset.iter().fold(0u32, |c, &p| (c << 1) | q.bit(p) as u32);
            let marg = marginal(corr, &q, &subset);
            match seen.get(&local) {
                Some(prev) => *prev == marg,
                None => {
                    seen.insert(local, marg);
                    true
                }
            }
        })
    })
}

/// `Σ_q 2^-m Σ_a P(a|q) V(a|q)`, exact.
pub fn ns_winning_probability(corr: &SparseCorrelation) -> Rational {
    let m = corr.m;
    let wins: u64 = corr
        .questions()
        .map(|q| {
            corr.support(&q)
                .iter()
                .filter(|&&key| predicate(&answer_from_key(&q, key).expect("key fits"), &q))
                .count() as u64
        })
        .sum();
    Rational::from_integer(BigInt::from(wins)) * corr.weight() / Rational::from_integer(BigInt::one() << m)
}

/// Every support entry is in the support set.
pub fn support_in_z(corr: &SparseCorrelation) -> bool {
    corr.questions()
        .all(|q| corr.support(&q).iter().all(|&key| in_z(&answer_from_key(&q, key).expect("key fits"), &q)))
}
