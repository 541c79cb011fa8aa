//! Hypercube game combinatorics: vertices, facets, answers and the winning predicate.
//!
//! Coordinates are 1-based, matching player indices. A vertex or question
//! `(x_1, ..., x_m)` has canonical code `sum x_k 2^(m-k)`, so `x_1` is the most
//! significant bit. A facet `{x : x_i = q_i}` lists its `2^(m-1)` vertices in
//! ascending code order, and every facet assignment is indexed that way.
//!
//! Signs are stored as bits, `0 -> +1` and `1 -> -1`, so products are XOR
//! reductions.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{check_range, Error, Result};

/// Largest dimension for which answers can be built and evaluated.
pub const MAX_M: usize = 24;

/// The game `HC_m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Game {
    m: usize,
}

impl Game {
    pub fn new(m: usize) -> Result<Self> {
        check_range(m, 2, MAX_M)?;
        Ok(Self { m })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn num_vertices(&self) -> usize {
        1 << self.m
    }

    pub fn facet_len(&self) -> usize {
        1 << (self.m - 1)
    }

    /// All `2^m` questions in ascending code order.
    pub fn questions(&self) -> impl Iterator<Item = Question> + '_ {
        (0..1u32 << self.m).map(move |c| Question::from_code(self.m, c))
    }
}

macro_rules! bit_string {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub struct $name {
            m: u8,
            code: u32,
        }

        impl $name {
            /// Builds from explicit bits `(b_1, ..., b_m)`.
            pub fn new(bits: &[u8]) -> Result<Self> {
                check_range(bits.len(), 1, MAX_M)?;
                let mut code = 0u32;
                for &b in bits {
                    if b > 1 {
                        return Err(Error::Malformed(format!("bit value {b}")));
                    }
                    code = (code << 1) | b as u32;
                }
                Ok(Self { m: bits.len() as u8, code })
            }

            /// Panics if `code` has bits at or above position `m`.
            pub fn from_code(m: usize, code: u32) -> Self {
                assert!((1..=MAX_M).contains(&m), "dimension {m} out of range");
                assert!(code >> m == 0, "code {code} too wide for m = {m}");
                Self { m: m as u8, code }
            }

            pub fn m(&self) -> usize {
                self.m as usize
            }

            pub fn code(&self) -> u32 {
                self.code
            }

            /// Coordinate `k` (1-based).
            pub fn bit(&self, k: usize) -> u8 {
                debug_assert!(k >= 1 && k <= self.m());
                ((self.code >> (self.m() - k)) & 1) as u8
            }

            pub fn bits(&self) -> Vec<u8> {
                (1..=self.m()).map(|k| self.bit(k)).collect()
            }
        }

        impl fmt::Debug for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{}(", stringify!($name))?;
                for k in 1..=self.m() {
                    write!(f, "{}", self.bit(k))?;
                }
                write!(f, ")")
            }
        }

        impl Serialize for $name {
            fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
                self.bits().serialize(s)
            }
        }

        impl<'de> Deserialize<'de> for $name {
            fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
                let bits = Vec::<u8>::deserialize(d)?;
                Self::new(&bits).map_err(serde::de::Error::custom)
            }
        }
    };
}

bit_string!(
    /// A hypercube corner `x in {0,1}^m`.
    Vertex
);
bit_string!(
    /// The referee's question `q in {0,1}^m`.
    Question
);

#[inline]
fn pos(m: usize, coord: usize) -> usize {
    m - coord
}

/// Position of vertex `code` inside the facet of `player` (the fixed coordinate is dropped).
#[inline]
pub(crate) fn facet_index(m: usize, player: usize, code: u32) -> usize {
    let p = pos(m, player);
    let code = code as usize;
    ((code >> (p + 1)) << p) | (code & ((1 << p) - 1))
}

/// Inverse of [`facet_index`].
#[inline]
pub(crate) fn facet_vertex_code(m: usize, player: usize, bit: u8, idx: usize) -> u32 {
    let p = pos(m, player);
    (((idx >> p) << (p + 1)) | ((bit as usize) << p) | (idx & ((1 << p) - 1))) as u32
}

/// Vertex codes with the given coordinates fixed, ascending.
pub(crate) fn vertices_with(m: usize, fixed: &[(usize, u8)]) -> impl Iterator<Item = u32> {
    let mut fixed_mask = 0u32;
    let mut fixed_val = 0u32;
    for &(coord, b) in fixed {
        fixed_mask |= 1 << pos(m, coord);
        fixed_val |= (b as u32) << pos(m, coord);
    }
    let free: Vec<u32> = (0..m as u32).filter(|p| fixed_mask >> p & 1 == 0).collect();
    (0..1u32 << free.len()).map(move |k| {
        let mut code = fixed_val;
        for (j, &p) in free.iter().enumerate() {
            code |= ((k >> j) & 1) << p;
        }
        code
    })
}

fn check_player(m: usize, player: usize) -> Result<()> {
    check_range(m, 2, MAX_M)?;
    if player == 0 || player > m {
        return Err(Error::Player { player, m });
    }
    Ok(())
}

fn check_bit(b: u8) -> Result<()> {
    if b > 1 {
        return Err(Error::Malformed(format!("bit value {b}")));
    }
    Ok(())
}

/// Packed sign bits.
#[derive(Clone, PartialEq, Eq, Hash)]
struct SignBits {
    len: usize,
    words: Vec<u64>,
}

impl SignBits {
    fn zeros(len: usize) -> Self {
        Self { len, words: vec![0; len.div_ceil(64)] }
    }

    #[inline]
    fn get(&self, i: usize) -> bool {
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    #[inline]
    fn set(&mut self, i: usize, v: bool) {
        let w = &mut self.words[i / 64];
        if v {
            *w |= 1 << (i % 64);
        } else {
            *w &= !(1 << (i % 64));
        }
    }

    fn parity(&self) -> bool {
        self.words.iter().map(|w| w.count_ones()).sum::<u32>() % 2 == 1
    }
}

/// One player's `±1` labelling of their facet `{x : x_player = question_bit}`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FacetAssignment {
    m: usize,
    player: usize,
    question_bit: u8,
    bits: SignBits,
}

impl FacetAssignment {
    /// The all-`+1` assignment.
    pub fn all_plus(m: usize, player: usize, question_bit: u8) -> Result<Self> {
        check_player(m, player)?;
        check_bit(question_bit)?;
        Ok(Self { m, player, question_bit, bits: SignBits::zeros(1 << (m - 1)) })
    }

    /// From signs in facet order; every entry must be `+1` or `-1`.
    pub fn new(m: usize, player: usize, question_bit: u8, signs: &[i8]) -> Result<Self> {
        let mut a = Self::all_plus(m, player, question_bit)?;
        if signs.len() != a.len() {
            return Err(Error::Malformed(format!(
                "facet of m = {m} has {} vertices, got {} signs",
                a.len(),
                signs.len()
            )));
        }
        for (j, &s) in signs.iter().enumerate() {
            match s {
                1 => {}
                -1 => a.bits.set(j, true),
                _ => return Err(Error::Malformed(format!("sign value {s}"))),
            }
        }
        Ok(a)
    }

    /// From a bit code (bit `j` set means vertex `j` gets `-1`); needs `2^(m-1) <= 64`.
    pub fn from_code(m: usize, player: usize, question_bit: u8, code: u64) -> Result<Self> {
        let mut a = Self::all_plus(m, player, question_bit)?;
        if a.len() > 64 || (a.len() < 64 && code >> a.len() != 0) {
            return Err(Error::Malformed(format!("code {code:#x} does not fit a facet of m = {m}")));
        }
        a.bits.words[0] = code;
        Ok(a)
    }

    /// Inverse of [`FacetAssignment::from_code`]; `None` when the facet is wider than 64.
    pub fn code(&self) -> Option<u64> {
        (self.len() <= 64).then(|| self.bits.words[0])
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn player(&self) -> usize {
        self.player
    }

    pub fn question_bit(&self) -> u8 {
        self.question_bit
    }

    pub fn len(&self) -> usize {
        self.bits.len
    }

    pub fn is_empty(&self) -> bool {
        self.bits.len == 0
    }

    /// Sign at facet position `idx`.
    pub fn sign(&self, idx: usize) -> i8 {
        if self.bits.get(idx) {
            -1
        } else {
            1
        }
    }

    pub fn set_sign(&mut self, idx: usize, sign: i8) {
        debug_assert!(sign == 1 || sign == -1);
        self.bits.set(idx, sign < 0);
    }

    /// Whether the vertex with this code lies on the facet.
    #[inline]
    pub(crate) fn covers(&self, code: u32) -> bool {
        ((code >> pos(self.m, self.player)) & 1) as u8 == self.question_bit
    }

    #[inline]
    pub(crate) fn is_minus_at(&self, code: u32) -> bool {
        debug_assert!(self.covers(code));
        self.bits.get(facet_index(self.m, self.player, code))
    }

    /// Sign at `v`, or `None` if `v` is not on this facet.
    pub fn sign_at(&self, v: &Vertex) -> Option<i8> {
        if v.m() != self.m || !self.covers(v.code()) {
            return None;
        }
        Some(if self.is_minus_at(v.code()) { -1 } else { 1 })
    }

    /// Sets the sign at vertex code `code`, which must be on the facet.
    pub(crate) fn set_at(&mut self, code: u32, sign: i8) {
        debug_assert!(self.covers(code));
        let idx = facet_index(self.m, self.player, code);
        self.set_sign(idx, sign);
    }

    pub fn signs(&self) -> Vec<i8> {
        (0..self.len()).map(|j| self.sign(j)).collect()
    }

    /// Product of all signs.
    pub fn product(&self) -> i8 {
        if self.bits.parity() {
            -1
        } else {
            1
        }
    }

    pub fn vertices(&self) -> Vec<Vertex> {
        (0..self.len())
            .map(|j| Vertex::from_code(self.m, facet_vertex_code(self.m, self.player, self.question_bit, j)))
            .collect()
    }
}

impl fmt::Debug for FacetAssignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "a{}[q={}](", self.player, self.question_bit)?;
        for j in 0..self.len().min(64) {
            f.write_str(if self.bits.get(j) { "-" } else { "+" })?;
        }
        if self.len() > 64 {
            f.write_str("...")?;
        }
        write!(f, ")")
    }
}

#[derive(Serialize, Deserialize)]
struct RawFacet {
    player: usize,
    question_bit: u8,
    values: Vec<i8>,
}

impl Serialize for FacetAssignment {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        RawFacet { player: self.player, question_bit: self.question_bit, values: self.signs() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for FacetAssignment {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = RawFacet::deserialize(d)?;
        let n = raw.values.len();
        if !n.is_power_of_two() {
            return Err(serde::de::Error::custom(format!("facet length {n} is not a power of two")));
        }
        let m = n.trailing_zeros() as usize + 1;
        FacetAssignment::new(m, raw.player, raw.question_bit, &raw.values).map_err(serde::de::Error::custom)
    }
}

/// The joint answer `(a_1, ..., a_m)`.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
#[serde(try_from = "Vec<FacetAssignment>", into = "Vec<FacetAssignment>")]
pub struct Answer {
    assignments: Vec<FacetAssignment>,
}

impl TryFrom<Vec<FacetAssignment>> for Answer {
    type Error = Error;

    fn try_from(v: Vec<FacetAssignment>) -> Result<Self> {
        Answer::new(v)
    }
}

impl From<Answer> for Vec<FacetAssignment> {
    fn from(a: Answer) -> Self {
        a.assignments
    }
}

impl Answer {
    /// Assignment `k` must belong to player `k + 1`, all in the same dimension.
    pub fn new(assignments: Vec<FacetAssignment>) -> Result<Self> {
        let m = assignments.first().map(|a| a.m).unwrap_or(0);
        check_range(m, 2, MAX_M)?;
        if assignments.len() != m {
            return Err(Error::Malformed(format!("expected {m} assignments, got {}", assignments.len())));
        }
        for (k, a) in assignments.iter().enumerate() {
            if a.m != m || a.player != k + 1 {
                return Err(Error::Malformed(format!(
                    "assignment {k} belongs to player {} in dimension {}",
                    a.player, a.m
                )));
            }
        }
        Ok(Self { assignments })
    }

    pub fn m(&self) -> usize {
        self.assignments.len()
    }

    /// Assignment of `player` (1-based).
    pub fn get(&self, player: usize) -> &FacetAssignment {
        &self.assignments[player - 1]
    }

    pub fn assignments(&self) -> &[FacetAssignment] {
        &self.assignments
    }

    /// The question this answer responds to, read off the facets.
    pub fn question(&self) -> Question {
        let code = self.assignments.iter().fold(0u32, |c, a| (c << 1) | a.question_bit as u32);
        Question::from_code(self.m(), code)
    }
}

/// The `2^(m-1)` vertices with `x_i = q_i`, ascending.
pub fn facet_vertices(m: usize, i: usize, q_i: u8) -> Result<Vec<Vertex>> {
    check_player(m, i)?;
    check_bit(q_i)?;
    Ok(vertices_with(m, &[(i, q_i)]).map(|c| Vertex::from_code(m, c)).collect())
}

/// The `2^(m-2)` vertices with `x_1 = q1` and `x_i = q_i`, ascending.
pub fn intersection_vertices(m: usize, q1: u8, i: usize, q_i: u8) -> Result<Vec<Vertex>> {
    check_player(m, i)?;
    if i < 2 {
        return Err(Error::Player { player: i, m });
    }
    check_bit(q1)?;
    check_bit(q_i)?;
    Ok(vertices_with(m, &[(1, q1), (i, q_i)]).map(|c| Vertex::from_code(m, c)).collect())
}

/// Product of the assignment equals `(-1)^{q_1}` for player 1 and `+1` otherwise.
pub fn parity_ok(a: &FacetAssignment) -> bool {
    let target_minus = a.player == 1 && a.question_bit == 1;
    a.bits.parity() == target_minus
}

fn assert_matches(answer: &Answer, q: &Question) {
    assert_eq!(answer.question(), *q, "answer does not respond to question");
}

/// Every pair of players agrees on every shared vertex.
pub fn consistency_ok(answer: &Answer, q: &Question) -> bool {
    assert_matches(answer, q);
    let m = answer.m();
    for i in 1..=m {
        for j in i + 1..=m {
            let (ai, aj) = (answer.get(i), answer.get(j));
            let shared = vertices_with(m, &[(i, q.bit(i)), (j, q.bit(j))]);
            for code in shared {
                if ai.is_minus_at(code) != aj.is_minus_at(code) {
                    return false;
                }
            }
        }
    }
    true
}

/// The winning predicate `V(a|q)`.
pub fn predicate(answer: &Answer, q: &Question) -> bool {
    answer.assignments.iter().all(parity_ok) && consistency_ok(answer, q)
}

/// `Π_{q1,q_i}(a)`: product of `a` over `X_1 ∩ X_i`. `a` must belong to player 1 or player `i`.
pub fn product_over_intersection(a: &FacetAssignment, i: usize, q1: u8, q_i: u8) -> Result<i8> {
    check_player(a.m, i)?;
    if i < 2 {
        return Err(Error::Player { player: i, m: a.m });
    }
    let on_facet = match a.player {
        1 => a.question_bit == q1,
        p if p == i => a.question_bit == q_i,
        _ => false,
    };
    if !on_facet {
        return Err(Error::DisjointFacet { player: a.player, bit: a.question_bit });
    }
    let minus = vertices_with(a.m, &[(1, q1), (i, q_i)]).filter(|&c| a.is_minus_at(c)).count();
    Ok(if minus % 2 == 1 { -1 } else { 1 })
}

/// The relaxed predicate: players 1 and `i` agree on the product over `X_1 ∩ X_i` for all `i >= 2`.
pub fn relaxed_predicate(answer: &Answer, q: &Question) -> bool {
    assert_matches(answer, q);
    let a1 = answer.get(1);
    (2..=answer.m()).all(|i| {
        let p1 = product_over_intersection(a1, i, q.bit(1), q.bit(i)).expect("facet checked");
        let pi = product_over_intersection(answer.get(i), i, q.bit(1), q.bit(i)).expect("facet checked");
        p1 == pi
    })
}

/// Embeds the bit answers of the standard CHSH game into `HC_2`.
pub fn chsh_bit_embedding(a1: u8, a2: u8, q: &Question) -> Result<Answer> {
    if q.m() != 2 {
        return Err(Error::Dimension { m: q.m(), min: 2, max: 2 });
    }
    check_bit(a1)?;
    check_bit(a2)?;
    let s1: i8 = if a1 == 0 { 1 } else { -1 };
    let s2: i8 = if a2 == 0 { 1 } else { -1 };
    let flip: i8 = if q.bit(1) == 1 { -1 } else { 1 };
    // facet order: player 1 -> (q1,0),(q1,1); player 2 -> (0,q2),(1,q2)
    Answer::new(vec![
        FacetAssignment::new(2, 1, q.bit(1), &[s1, flip * s1])?,
        FacetAssignment::new(2, 2, q.bit(2), &[s2, s2])?,
    ])
}
