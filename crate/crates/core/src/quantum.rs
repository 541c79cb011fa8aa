//! The GHZ quantum strategy, its winning probabilities, and the quantum value.
//!
//! Player 1 measures `Z_{q_1 π/2}`; player `i >= 2` measures `Z_{(-1)^{q_i} α}`,
//! all on one shared `m`-qubit GHZ state. Outcomes are written on the four
//! corners `(q_1,0..0)`, `(q_1,1..1)`, `(x_1,q_i..q_i)`; every other vertex gets `+1`.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4};

use rayon::prelude::*;

use crate::error::{check_range, Error, Result};
use crate::game::{parity_ok, predicate, Answer, FacetAssignment, Game, Question};
use crate::linalg::{ComplexMatrix, StateVector, C64};
use crate::search::GridGolden;

/// Largest number of qubits simulated.
pub const MAX_QUBITS: usize = 12;
/// Largest exponent `M` accepted by [`maximize_r`].
pub const MAX_EXPONENT: u32 = 1000;

/// `Z_θ = [[cos θ, sin θ], [sin θ, -cos θ]]`.
pub fn z_theta(theta: f64) -> ComplexMatrix {
    let (s, c) = theta.sin_cos();
    ComplexMatrix::from_real(2, &[c, s, s, -c]).expect("2x2")
}

/// `(|0...0⟩ + |1...1⟩) / √2`.
pub fn ghz_state(m: usize) -> Result<StateVector> {
    check_range(m, 2, MAX_QUBITS)?;
    let mut amps = vec![C64::new(0.0, 0.0); 1 << m];
    amps[0] = C64::new(FRAC_1_SQRT_2, 0.0);
    amps[(1 << m) - 1] = C64::new(FRAC_1_SQRT_2, 0.0);
    StateVector::new(amps)
}

/// Measurement angle of one player for one question bit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeasurementAngle {
    pub player: usize,
    pub question_bit: u8,
    pub alpha: f64,
}

impl MeasurementAngle {
    pub fn theta(&self) -> f64 {
        match (self.player, self.question_bit) {
            (1, b) => b as f64 * FRAC_PI_2,
            (_, 0) => self.alpha,
            _ => -self.alpha,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuantumStrategy {
    m: usize,
    alpha: f64,
}

impl QuantumStrategy {
    /// `α` must lie in `[0, π/2]`.
    pub fn new(m: usize, alpha: f64) -> Result<Self> {
        Game::new(m)?;
        if !(-1e-12..=FRAC_PI_2 + 1e-12).contains(&alpha) {
            return Err(Error::Malformed(format!("alpha = {alpha} outside [0, pi/2]")));
        }
        Ok(Self { m, alpha: alpha.clamp(0.0, FRAC_PI_2) })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn angle(&self, player: usize, question_bit: u8) -> MeasurementAngle {
        MeasurementAngle { player, question_bit, alpha: self.alpha }
    }

    /// The observable `Z_{θ_{q,i}}` measured by `player`.
    pub fn observable(&self, player: usize, question_bit: u8) -> ComplexMatrix {
        z_theta(self.angle(player, question_bit).theta())
    }

    /// Projector onto outcome `outcome` (`±1`) of `player`'s measurement.
    pub fn projector(&self, player: usize, question_bit: u8, outcome: i8) -> ComplexMatrix {
        let o = self.observable(player, question_bit).scale(outcome as f64);
        (&ComplexMatrix::identity(2) + &o).scale(0.5)
    }

    /// What `player` writes on their facet after seeing `outcome`; depends only on local data.
    pub fn player_assignment(&self, player: usize, question_bit: u8, outcome: i8) -> FacetAssignment {
        let m = self.m;
        let top = 1u32 << (m - 1);
        let rest_ones = top - 1;
        let mut a = FacetAssignment::all_plus(m, player, question_bit).expect("valid player");
        if player == 1 {
            let base = question_bit as u32 * top;
            let flip = if question_bit == 1 { -1 } else { 1 };
            a.set_at(base, outcome);
            a.set_at(base | rest_ones, flip * outcome);
        } else {
            let rest = if question_bit == 1 { rest_ones } else { 0 };
            a.set_at(rest, outcome);
            a.set_at(top | rest, outcome);
        }
        debug_assert!(parity_ok(&a), "corner rules always satisfy parity");
        a
    }
}

/// Measurement outcomes `(o_1, ..., o_m)`, each `±1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct OutcomeTuple(Vec<i8>);

impl OutcomeTuple {
    pub fn new(values: Vec<i8>) -> Result<Self> {
        if values.iter().any(|&o| o != 1 && o != -1) {
            return Err(Error::Malformed("outcomes must be +1 or -1".into()));
        }
        Ok(Self(values))
    }

    /// Bit `m - i` of `index` set means player `i` saw `-1`.
    pub fn from_index(m: usize, index: usize) -> Self {
        Self((1..=m).map(|i| if index >> (m - i) & 1 == 1 { -1 } else { 1 }).collect())
    }

    pub fn index(&self) -> usize {
        self.0.iter().fold(0, |acc, &o| (acc << 1) | (o == -1) as usize)
    }

    pub fn get(&self, player: usize) -> i8 {
        self.0[player - 1]
    }

    pub fn values(&self) -> &[i8] {
        &self.0
    }
}

fn check_sim(strategy: &QuantumStrategy, q: &Question) -> StateVector {
    assert_eq!(q.m(), strategy.m, "question dimension mismatch");
    ghz_state(strategy.m).expect("dimension within simulation cap")
}

/// `⟨⊗_i (I + o_i Z_{θ_i})/2⟩` on the GHZ state, by applying each projector in turn.
pub fn outcome_probability(strategy: &QuantumStrategy, q: &Question, o: &OutcomeTuple) -> f64 {
    let psi = check_sim(strategy, q);
    let projected = (1..=strategy.m)
        .fold(psi, |v, i| v.apply_qubit(&strategy.projector(i, q.bit(i), o.get(i)), i));
    projected.norm_sqr()
}

/// Full outcome distribution, indexed by [`OutcomeTuple::index`], from one basis rotation per qubit.
pub fn outcome_distribution(strategy: &QuantumStrategy, q: &Question) -> Vec<f64> {
    let psi = check_sim(strategy, q);
    let rotated = (1..=strategy.m).fold(psi, |v, i| {
        let (s, c) = (strategy.angle(i, q.bit(i)).theta() / 2.0).sin_cos();
        // rows are the +1 and -1 eigenvectors of Z_θ
        let basis_change = ComplexMatrix::from_real(2, &[c, s, -s, c]).expect("2x2");
        v.apply_qubit(&basis_change, i)
    });
    rotated.amplitudes().iter().map(|z| z.norm_sqr()).collect()
}

/// The joint answer the players send for outcomes `o`.
pub fn outcome_to_answer(strategy: &QuantumStrategy, q: &Question, o: &OutcomeTuple) -> Answer {
    let assignments = (1..=strategy.m).map(|i| strategy.player_assignment(i, q.bit(i), o.get(i))).collect();
    Answer::new(assignments).expect("one assignment per player")
}

/// `P_q` by summing outcome probabilities over winning answers.
pub fn winning_probability_simulated(strategy: &QuantumStrategy, q: &Question) -> f64 {
    outcome_distribution(strategy, q)
        .iter()
        .enumerate()
        .filter(|(_, &p)| p > 0.0)
        .filter(|(idx, _)| predicate(&outcome_to_answer(strategy, q, &OutcomeTuple::from_index(strategy.m, *idx)), q))
        .map(|(_, p)| p)
        .sum()
}

/// `P_q = ⟨∏_{i>=2} (I + (-1)^{q_1 q_i} O_{q_1,1} O_{q_i,i}) / 2⟩`.
pub fn winning_probability_operator(strategy: &QuantumStrategy, q: &Question) -> f64 {
    let psi = check_sim(strategy, q);
    let first = strategy.observable(1, q.bit(1));
    let v = (2..=strategy.m).fold(psi.clone(), |v, i| {
        let sign = if q.bit(1) & q.bit(i) == 1 { -1.0 } else { 1.0 };
        let flipped = v.apply_qubit(&strategy.observable(i, q.bit(i)), i).apply_qubit(&first, 1);
        v.plus(&flipped.scaled(sign)).scaled(0.5)
    });
    psi.inner(&v).re
}

/// Mean of `P_q` over all questions; summed in question order.
pub fn average_win<F>(strategy: &QuantumStrategy, per_question: F) -> f64
where
    F: Fn(&QuantumStrategy, &Question) -> f64 + Sync,
{
    let game = Game::new(strategy.m).expect("validated");
    let qs: Vec<Question> = game.questions().collect();
    let probs: Vec<f64> = qs.par_iter().map(|q| per_question(strategy, q)).collect();
    probs.iter().sum::<f64>() / qs.len() as f64
}

/// `[(1+cos α)^(m-1) + (1+sin α)^(m-1)] / 2^m`, the single-letter objective at `α`.
///
/// The simulated GHZ strategy reaches this average only for `m = 2` or `α = 0`;
/// for `m >= 3` the `q_1 = 1` questions average to `2^-(m-1)` plus at most one
/// `sin^(m-1) α` term, see the tests.
pub fn average_win_analytic(m: usize, alpha: f64) -> f64 {
    assert!(m >= 2);
    let e = (m - 1) as i32;
    let (s, c) = alpha.sin_cos();
    0.5 * (((1.0 + c) / 2.0).powi(e) + ((1.0 + s) / 2.0).powi(e))
}

/// `r(θ) = (1+cos θ)^M + (1+sin θ)^M`.
pub fn r_function(theta: f64, exponent: u32) -> f64 {
    let (s, c) = theta.sin_cos();
    if exponent > 50 {
        let e = exponent as f64;
        (e * (1.0 + c).ln()).exp() + (e * s.ln_1p()).exp()
    } else {
        (1.0 + c).powi(exponent as i32) + (1.0 + s).powi(exponent as i32)
    }
}

/// `r(θ) - 2^M - 1`, computed without cancellation.
pub fn r_excess(theta: f64, exponent: u32) -> f64 {
    let e = exponent as f64;
    let half = (theta / 2.0).sin();
    // (1 + cos θ)^M = 2^M (1 - sin²(θ/2))^M
    let cos_part = 2f64.powi(exponent as i32) * (e * (-half * half).ln_1p()).exp_m1();
    let sin_part = (e * theta.sin().ln_1p()).exp_m1();
    cos_part + sin_part
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RMaximum {
    pub exponent: u32,
    pub theta_star: f64,
    pub r_star: f64,
    /// `r_star - 2^M - 1`, accurate where `r_star` itself has rounded it away.
    pub excess: f64,
}

/// Maximizes `r` over `[0, π/4]`; `r(θ) = r(π/2 - θ)` covers the rest.
pub fn maximize_r(exponent: u32) -> RMaximum {
    assert!((1..=MAX_EXPONENT).contains(&exponent), "exponent {exponent} out of range");
    let search = GridGolden::default();
    let best = search.maximize(|t| r_excess(t, exponent), 0.0, FRAC_PI_4);
    let cell = FRAC_PI_4 / (search.grid_points - 1) as f64;
    let theta = polish(best.x, cell, exponent);
    let excess = r_excess(theta, exponent);
    // at a flat maximum the two values differ only by rounding
    let (theta_star, excess) =
        if excess >= best.value - 8.0 * f64::EPSILON * best.value.abs() { (theta, excess) } else { (best.x, best.value) };
    RMaximum { exponent, theta_star, r_star: r_function(theta_star, exponent), excess }
}

/// `log(cos θ (1+sin θ)^(M-1)) - log(sin θ (1+cos θ)^(M-1))`: positive where `r` increases.
fn slope_log_ratio(theta: f64, exponent: u32) -> f64 {
    let (s, c) = theta.sin_cos();
    let k = (exponent - 1) as f64;
    (c.ln() + k * s.ln_1p()) - (s.ln() + k * c.ln_1p())
}

/// Sharpens `x` by bisecting on the sign of `r'` within one grid cell either side.
///
/// Golden section only resolves a flat maximum to about `sqrt(eps)`; the derivative
/// crosses zero linearly, so its sign pins the maximizer to rounding level.
fn polish(x: f64, cell: f64, exponent: u32) -> f64 {
    let slope = |t: f64| slope_log_ratio(t, exponent);
    let mut a = (x - cell).max(0.0);
    let mut b = (x + cell).min(FRAC_PI_4);
    if slope(b) >= 0.0 {
        return if b == FRAC_PI_4 { b } else { x };
    }
    if a > 0.0 && slope(a) <= 0.0 {
        return x;
    }
    loop {
        let mid = a + (b - a) / 2.0;
        if mid <= a || mid >= b {
            break;
        }
        if slope(mid) > 0.0 {
            a = mid;
        } else {
            b = mid;
        }
    }
    a
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuantumValue {
    pub m: usize,
    pub theta_star: f64,
    /// `ω_q`.
    pub value: f64,
    /// `ω_q - ω_c = ω_q - 1/2 - 1/2^m`, computed directly.
    pub advantage: f64,
}

impl QuantumValue {
    /// `ω_q - 1/2`, exact to double precision even when `value` rounds to `0.5`.
    pub fn above_half(&self) -> f64 {
        2f64.powi(-(self.m as i32)) + self.advantage
    }
}

/// `ω_q(HC_m) = max_θ r(θ) / 2^m` with exponent `m - 1`.
pub fn quantum_value(m: usize) -> Result<QuantumValue> {
    check_range(m, 2, MAX_EXPONENT as usize + 1)?;
    let opt = maximize_r(m as u32 - 1);
    let scale = 2f64.powi(-(m as i32));
    let advantage = opt.excess * scale;
    Ok(QuantumValue { m, theta_star: opt.theta_star, value: 0.5 + scale + advantage, advantage })
}

/// Bounds on `ω_q - ω_c`: `((m-1)/4^m, 8(m-1)/4^m)`.
pub fn advantage_bounds(m: usize) -> (f64, f64) {
    assert!(m >= 2);
    let q = 4f64.powi(-(m as i32));
    ((m - 1) as f64 * q, 8.0 * (m - 1) as f64 * q)
}

/// Bounds on `ω_q`; the upper one is clamped at 1.
pub fn quantum_value_bounds(m: usize) -> (f64, f64) {
    let (lo, hi) = advantage_bounds(m);
    let base = 0.5 + 2f64.powi(-(m as i32));
    (base + lo, (base + hi).min(1.0))
}
