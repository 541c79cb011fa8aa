//! Deterministic classical strategies and the exact classical value.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use rayon::prelude::*;

use crate::error::{check_range, Error, Result};
use crate::game::{facet_vertex_code, predicate, Answer, FacetAssignment, Game, Question};

/// Exact probabilities.
pub type Rational = BigRational;

/// `f_i(0), f_i(1)` for every player `i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeterministicStrategy {
    choices: Vec<[FacetAssignment; 2]>,
}

impl DeterministicStrategy {
    /// `choices[k][b]` is player `k + 1`'s assignment on question bit `b`.
    pub fn new(choices: Vec<[FacetAssignment; 2]>) -> Result<Self> {
        let m = choices.len();
        Game::new(m)?;
        for (k, pair) in choices.iter().enumerate() {
            for (b, a) in pair.iter().enumerate() {
                if a.m() != m || a.player() != k + 1 || a.question_bit() as usize != b {
                    return Err(Error::Malformed(format!(
                        "strategy slot (player {}, bit {b}) holds {a:?} of dimension {}",
                        k + 1,
                        a.m()
                    )));
                }
            }
        }
        Ok(Self { choices })
    }

    pub fn m(&self) -> usize {
        self.choices.len()
    }

    pub fn assignment(&self, player: usize, bit: u8) -> &FacetAssignment {
        &self.choices[player - 1][bit as usize]
    }

    /// The deterministic answer to `q`.
    pub fn answer(&self, q: &Question) -> Answer {
        let assignments = (1..=self.m()).map(|p| self.assignment(p, q.bit(p)).clone()).collect();
        Answer::new(assignments).expect("strategy slots are well formed")
    }
}

/// Exact winning probability of a deterministic strategy under uniform questions.
pub fn strategy_value(strategy: &DeterministicStrategy) -> Rational {
    let game = Game::new(strategy.m()).expect("validated on construction");
    let wins = game.questions().filter(|q| predicate(&strategy.answer(q), q)).count();
    Rational::new(BigInt::from(wins), BigInt::from(game.num_vertices()))
}

/// All `+1`, except player 1 puts `-1` on `(1, ..., 1)` when asked `q_1 = 1`.
pub fn canonical_strategy(m: usize) -> Result<DeterministicStrategy> {
    let game = Game::new(m)?;
    let mut choices = Vec::with_capacity(m);
    for p in 1..=m {
        choices.push([FacetAssignment::all_plus(m, p, 0)?, FacetAssignment::all_plus(m, p, 1)?]);
    }
    let corner = (game.num_vertices() - 1) as u32;
    choices[0][1].set_at(corner, -1);
    DeterministicStrategy::new(choices)
}

/// `1/2 + 1/2^m`.
pub fn classical_value_formula(m: usize) -> Rational {
    assert!(m >= 2, "dimension must be at least 2");
    let pow = BigInt::one() << m;
    Rational::new(BigInt::one(), BigInt::from(2)) + Rational::new(BigInt::one(), pow)
}

#[derive(Clone, Debug)]
pub struct ClassicalOptimum {
    pub value: Rational,
    /// Lowest-index maximizer in enumeration order.
    pub strategy: DeterministicStrategy,
    /// Number of strategy profiles enumerated.
    pub profiles: u64,
}

/// Slots read per player, and `(a, b, shared mask)` for every player pair.
type QuestionPlan = (Vec<usize>, Vec<(usize, usize, u64)>);

/// Exact classical value by exhaustive enumeration of deterministic strategies.
///
/// `m = 2` may run unrestricted; `m = 3` requires `restrict_parity`, which only
/// enumerates facet assignments that already satisfy their parity condition.
pub fn brute_force_classical_value(m: usize, restrict_parity: bool) -> Result<ClassicalOptimum> {
    check_range(m, 2, 3)?;
    if m == 3 && !restrict_parity {
        return Err(Error::Malformed("m = 3 enumeration requires the parity restriction".into()));
    }
    let game = Game::new(m)?;
    let facet_len = game.facet_len();
    let slots = 2 * m;

    // Option lists per slot k = 2(p-1) + b: facet codes and the matching global vertex masks.
    let mut codes: Vec<Vec<u64>> = Vec::with_capacity(slots);
    let mut masks: Vec<Vec<u64>> = Vec::with_capacity(slots);
    let mut facet_mask = vec![0u64; slots];
    let mut odd_target = vec![false; slots];
    for p in 1..=m {
        for b in 0..2u8 {
            let k = 2 * (p - 1) + b as usize;
            odd_target[k] = p == 1 && b == 1;
            for j in 0..facet_len {
                facet_mask[k] |= 1 << facet_vertex_code(m, p, b, j);
            }
            let (cs, ms): (Vec<u64>, Vec<u64>) = (0..1u64 << facet_len)
                .filter(|c| !restrict_parity || (c.count_ones() % 2 == 1) == odd_target[k])
                .map(|c| {
                    let mask = (0..facet_len)
                        .filter(|j| c >> j & 1 == 1)
                        .fold(0u64, |acc, j| acc | 1 << facet_vertex_code(m, p, b, j));
                    (c, mask)
                })
                .unzip();
            codes.push(cs);
            masks.push(ms);
        }
    }
    let n_opt = codes[0].len() as u64;
    debug_assert!(codes.iter().all(|c| c.len() as u64 == n_opt));

    // Per question: the slot each player reads, and shared-vertex masks for every pair.
    let plan: Vec<QuestionPlan> = game
        .questions()
        .map(|q| {
            let ks: Vec<usize> = (1..=m).map(|p| 2 * (p - 1) + q.bit(p) as usize).collect();
            let mut pairs = Vec::new();
            for a in 0..m {
                for b in a + 1..m {
                    pairs.push((a, b, facet_mask[ks[a]] & facet_mask[ks[b]]));
                }
            }
            (ks, pairs)
        })
        .collect();

    let rest = n_opt.pow(slots as u32 - 1);
    let wins_of = |digits: &[usize]| -> u32 {
        let mut wins = 0;
        let mut chosen = [0u64; 3];
        'q: for (ks, pairs) in &plan {
            for (p, &k) in ks.iter().enumerate() {
                let mask = masks[k][digits[k]];
                if (mask.count_ones() % 2 == 1) != odd_target[k] {
                    continue 'q;
                }
                chosen[p] = mask;
            }
            for &(a, b, shared) in pairs {
                if (chosen[a] ^ chosen[b]) & shared != 0 {
                    continue 'q;
                }
            }
            wins += 1;
        }
        wins
    };

    let (best_wins, best_idx) = (0..n_opt)
        .into_par_iter()
        .map(|d0| {
            let mut digits = vec![0usize; slots];
            digits[0] = d0 as usize;
            let mut best = (0u32, u64::MAX);
            for r in 0..rest {
                let mut x = r;
                for k in (1..slots).rev() {
                    digits[k] = (x % n_opt) as usize;
                    x /= n_opt;
                }
                let w = wins_of(&digits);
                if w > best.0 || best.1 == u64::MAX {
                    best = (w, d0 * rest + r);
                }
            }
            best
        })
        .reduce(|| (0, u64::MAX), |a, b| if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) { b } else { a });

    let mut choices = Vec::with_capacity(m);
    let mut x = best_idx;
    let mut digits = vec![0usize; slots];
    for k in (0..slots).rev() {
        digits[k] = (x % n_opt) as usize;
        x /= n_opt;
    }
    for p in 1..=m {
        let pick = |b: u8| {
            let k = 2 * (p - 1) + b as usize;
            FacetAssignment::from_code(m, p, b, codes[k][digits[k]])
        };
        choices.push([pick(0)?, pick(1)?]);
    }
    Ok(ClassicalOptimum {
        value: Rational::new(BigInt::from(best_wins), BigInt::from(game.num_vertices())),
        strategy: DeterministicStrategy::new(choices)?,
        profiles: n_opt.pow(slots as u32),
    })
}
