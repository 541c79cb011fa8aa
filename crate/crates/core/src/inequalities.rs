//! Numerical checks of the converse bound: edge observables, the generalized
//! CHSH inequality `⟨(I+S)^M + (I+T)^M⟩ <= r*(M)` and the bounds on `r*`.

use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::game::{product_over_intersection, Question};
use crate::linalg::{expectation, is_reflection, matpow, tensor, ComplexMatrix, StateVector, C64, OPERATOR_TOL};
use crate::quantum::{ghz_state, maximize_r, winning_probability_simulated, z_theta, QuantumStrategy};
use crate::search::GridGolden;

/// Slack allowed by the converse-chain checks.
pub const CHAIN_TOL: f64 = 1e-10;

/// Hermitian `S`, `T` of equal dimension with `S² + T² = I`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConstrainedPair {
    s: ComplexMatrix,
    t: ComplexMatrix,
}

impl ConstrainedPair {
    pub fn new(s: ComplexMatrix, t: ComplexMatrix) -> Result<Self> {
        if s.dim() != t.dim() {
            return Err(Error::DimensionMismatch { left: s.dim(), right: t.dim() });
        }
        for m in [&s, &t] {
            let dev = m.hermitian_deviation();
            if dev > OPERATOR_TOL {
                return Err(Error::NotHermitian(dev));
            }
        }
        let pair = Self { s, t };
        let res = pair.residual();
        if res > OPERATOR_TOL {
            return Err(Error::Constraint(res));
        }
        Ok(pair)
    }

    pub fn s(&self) -> &ComplexMatrix {
        &self.s
    }

    pub fn t(&self) -> &ComplexMatrix {
        &self.t
    }

    pub fn dim(&self) -> usize {
        self.s.dim()
    }

    /// `‖S² + T² - I‖_max`.
    pub fn residual(&self) -> f64 {
        constraint_residual(&self.s, &self.t)
    }
}

fn constraint_residual(s: &ComplexMatrix, t: &ComplexMatrix) -> f64 {
    (&(s * s) + &(t * t)).max_abs_diff(&ComplexMatrix::identity(s.dim()))
}

/// `Σ_o Π_{q_1,q_i}(a(o)) M^o`: the owner's measurement read through the intersection product.
#[derive(Clone, Debug, PartialEq)]
pub struct EdgeObservable {
    pub owner: usize,
    pub partner: usize,
    pub q1: u8,
    pub qi: u8,
    /// Single-qubit operator acting on the owner's slot.
    pub operator: ComplexMatrix,
}

/// Edge observable of `owner` (1 or `partner`) on the edge between players 1 and `partner`.
pub fn induced_edge_observable(
    strategy: &QuantumStrategy,
    owner: usize,
    partner: usize,
    q1: u8,
    qi: u8,
) -> Result<EdgeObservable> {
    let m = strategy.m();
    if partner < 2 || partner > m {
        return Err(Error::Player { player: partner, m });
    }
    if owner != 1 && owner != partner {
        return Err(Error::Player { player: owner, m });
    }
    let own_bit = if owner == 1 { q1 } else { qi };
    let mut operator = ComplexMatrix::zeros(2);
    for o in [1i8, -1] {
        let a = strategy.player_assignment(owner, own_bit, o);
        let sign = product_over_intersection(&a, partner, q1, qi)?;
        operator = &operator + &strategy.projector(owner, own_bit, o).scale(sign as f64);
    }
    Ok(EdgeObservable { owner, partner, q1, qi, operator })
}

/// All edge observables of a strategy, indexed by partner, owner side and question bits.
#[derive(Clone, Debug)]
pub struct EdgeFamily {
    m: usize,
    /// `[partner - 2][owner is partner][q1][qi]`
    ops: Vec<[[[ComplexMatrix; 2]; 2]; 2]>,
}

impl EdgeFamily {
    pub fn new(strategy: &QuantumStrategy) -> Result<Self> {
        let m = strategy.m();
        let ops = (2..=m)
            .map(|i| {
                let build = |owner, q1, qi| induced_edge_observable(strategy, owner, i, q1, qi).map(|e| e.operator);
                Ok([
                    [[build(1, 0, 0)?, build(1, 0, 1)?], [build(1, 1, 0)?, build(1, 1, 1)?]],
                    [[build(i, 0, 0)?, build(i, 0, 1)?], [build(i, 1, 0)?, build(i, 1, 1)?]],
                ])
            })
            .collect::<Result<_>>()?;
        Ok(Self { m, ops })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// `O_{q1,qi,owner}` on the edge to `partner`; `owner` is 1 or `partner`.
    pub fn get(&self, owner: usize, partner: usize, q1: u8, qi: u8) -> &ComplexMatrix {
        &self.ops[partner - 2][(owner != 1) as usize][q1 as usize][qi as usize]
    }

    pub fn get_mut(&mut self, owner: usize, partner: usize, q1: u8, qi: u8) -> &mut ComplexMatrix {
        &mut self.ops[partner - 2][(owner != 1) as usize][q1 as usize][qi as usize]
    }

    /// Largest deviation from `O_{q1,qi,1} = (-1)^{q1} O_{q1,1-qi,1}` and `O_{q1,qi,i} = O_{1-q1,qi,i}`.
    pub fn parity_residual(&self) -> f64 {
        let mut worst = 0f64;
        for i in 2..=self.m {
            for q1 in 0..2u8 {
                for qi in 0..2u8 {
                    let sign = if q1 == 1 { -1.0 } else { 1.0 };
                    let first = self.get(1, i, q1, qi).max_abs_diff(&self.get(1, i, q1, 1 - qi).scale(sign));
                    let other = self.get(i, i, q1, qi).max_abs_diff(self.get(i, i, 1 - q1, qi));
                    worst = worst.max(first).max(other);
                }
            }
        }
        worst
    }

    /// The pair `(S_i, T_i)` on the two-qubit space of players 1 and `i`, unchecked.
    pub fn s_t(&self, i: usize) -> Result<(ComplexMatrix, ComplexMatrix)> {
        let (sum, diff) = self.partner_halves(i);
        Ok((tensor(self.get(1, i, 0, 0), &sum)?, tensor(self.get(1, i, 1, 0), &diff)?))
    }

    /// `(O_{0,0,i} + O_{0,1,i}) / 2` and `(O_{0,0,i} - O_{0,1,i}) / 2`.
    fn partner_halves(&self, i: usize) -> (ComplexMatrix, ComplexMatrix) {
        let (a, b) = (self.get(i, i, 0, 0), self.get(i, i, 0, 1));
        ((a + b).scale(0.5), (a - b).scale(0.5))
    }
}

/// `S_i = O_{0,0,1}(O_{0,0,i} + O_{0,1,i})/2`, `T_i = O_{1,0,1}(O_{0,0,i} - O_{0,1,i})/2`.
pub fn build_s_t(strategy: &QuantumStrategy, i: usize) -> Result<ConstrainedPair> {
    let family = EdgeFamily::new(strategy)?;
    if i < 2 || i > strategy.m() {
        return Err(Error::Player { player: i, m: strategy.m() });
    }
    let (s, t) = family.s_t(i)?;
    ConstrainedPair::new(s, t)
}

/// `⊗` of single-qubit factors on an `m`-qubit space, identity elsewhere.
pub fn embed(m: usize, factors: &[(usize, &ComplexMatrix)]) -> Result<ComplexMatrix> {
    let id = ComplexMatrix::identity(2);
    (1..=m).try_fold(ComplexMatrix::identity(1), |acc, k| {
        let f = factors.iter().find(|(q, _)| *q == k).map_or(&id, |(_, op)| *op);
        tensor(&acc, f)
    })
}

/// Largest `‖[X, Y]‖_max` within `{S_i}` and within `{T_i}` on the full `m`-qubit space.
pub fn family_commutator_norm(strategy: &QuantumStrategy) -> Result<f64> {
    let family = EdgeFamily::new(strategy)?;
    let m = strategy.m();
    let mut s_ops = Vec::new();
    let mut t_ops = Vec::new();
    for i in 2..=m {
        let (sum, diff) = family.partner_halves(i);
        s_ops.push(embed(m, &[(1, family.get(1, i, 0, 0)), (i, &sum)])?);
        t_ops.push(embed(m, &[(1, family.get(1, i, 1, 0)), (i, &diff)])?);
    }
    let mut worst = 0f64;
    for ops in [&s_ops, &t_ops] {
        for (k, a) in ops.iter().enumerate() {
            for b in &ops[k + 1..] {
                worst = worst.max((a * b).max_abs_diff(&(b * a)));
            }
        }
    }
    Ok(worst)
}

/// `2 x 2` real reflection `Z_φ` with `φ` uniform on `[0, 2π)`.
fn random_reflection<R: Rng>(rng: &mut R) -> ComplexMatrix {
    z_theta(rng.random_range(0.0..TAU))
}

/// Block pair: `T = ⊕ diag(β_j, -β_j)`, `S = ⊕ √(1-β_j²) R_j`.
pub fn random_constrained_pair(dim_half: usize, seed: u64) -> Result<ConstrainedPair> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let betas: Vec<f64> = (0..dim_half).map(|_| rng.random_range(0.0..=1.0)).collect();
    pair_from_betas(&betas, &mut rng)
}

/// Block pair with the given `β_j` and random reflections.
pub fn pair_from_betas<R: Rng>(betas: &[f64], rng: &mut R) -> Result<ConstrainedPair> {
    if betas.is_empty() {
        return Err(Error::Malformed("need at least one block".into()));
    }
    let (mut s_blocks, mut t_blocks) = (Vec::new(), Vec::new());
    for &b in betas {
        s_blocks.push(random_reflection(rng).scale((1.0 - b * b).max(0.0).sqrt()));
        t_blocks.push(ComplexMatrix::diag(&[b, -b]));
    }
    ConstrainedPair::new(ComplexMatrix::direct_sum(&s_blocks), ComplexMatrix::direct_sum(&t_blocks))
}

/// `S = A_0 ⊗ (B_0 + B_1)/2`, `T = A_1 ⊗ (B_0 - B_1)/2`.
pub fn chsh_style_pair(
    a0: &ComplexMatrix,
    a1: &ComplexMatrix,
    b0: &ComplexMatrix,
    b1: &ComplexMatrix,
) -> Result<ConstrainedPair> {
    if ![a0, a1, b0, b1].iter().all(|m| is_reflection(m)) {
        return Err(Error::NotReflection);
    }
    let s = tensor(a0, &(b0 + b1).scale(0.5))?;
    let t = tensor(a1, &(b0 - b1).scale(0.5))?;
    ConstrainedPair::new(s, t)
}

/// CHSH-style pair with every observable a `Z_θ`.
pub fn chsh_angles_pair(angles: [f64; 4]) -> ConstrainedPair {
    let [a0, a1, b0, b1] = angles.map(z_theta);
    chsh_style_pair(&a0, &a1, &b0, &b1).expect("Z_θ are reflections")
}

/// Uniformly random unit vector in `C^dim`.
pub fn random_state<R: Rng>(dim: usize, rng: &mut R) -> StateVector {
    loop {
        let amps: Vec<C64> = (0..dim)
            .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        if let Ok(psi) = StateVector::normalized(amps) {
            return psi;
        }
    }
}

/// `⟨(I+S)^M + (I+T)^M⟩_ψ`.
pub fn lemma2_lhs(pair: &ConstrainedPair, psi: &StateVector, exponent: u32) -> Result<f64> {
    lemma2_expression(pair.s(), pair.t(), psi, exponent)
}

/// `⟨(I+S)^M + (I+T)^M⟩_ψ` for any Hermitian `S`, `T`, without the constraint.
pub fn lemma2_expression(s: &ComplexMatrix, t: &ComplexMatrix, psi: &StateVector, exponent: u32) -> Result<f64> {
    if exponent == 0 || exponent > 64 {
        return Err(Error::Malformed(format!("exponent {exponent} outside 1..=64")));
    }
    if s.dim() != t.dim() {
        return Err(Error::DimensionMismatch { left: s.dim(), right: t.dim() });
    }
    let id = ComplexMatrix::identity(s.dim());
    let lhs = &matpow(&(&id + s), exponent) + &matpow(&(&id + t), exponent);
    expectation(&lhs, psi)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Lemma2Check {
    pub exponent: u32,
    pub lhs: f64,
    pub r_star: f64,
    /// `r_star - lhs`; negative means the inequality is violated.
    pub margin: f64,
    pub pass: bool,
}

/// `lemma2_lhs <= r*(M) + tol`.
pub fn verify_lemma2(pair: &ConstrainedPair, psi: &StateVector, exponent: u32, tol: f64) -> Result<Lemma2Check> {
    let lhs = lemma2_lhs(pair, psi, exponent)?;
    let r_star = maximize_r(exponent).r_star;
    Ok(Lemma2Check { exponent, lhs, r_star, margin: r_star - lhs, pass: lhs <= r_star + tol })
}

/// One randomized instance: pair, state and exponent, all derived from `seed`.
#[derive(Clone, Debug)]
pub struct Lemma2Instance {
    pub seed: u64,
    pub pair: ConstrainedPair,
    pub psi: StateVector,
    pub exponent: u32,
    pub chsh_style: bool,
}

/// Every fourth instance is a CHSH-style pair with random angles (dimension 4);
/// the rest are block pairs of dimension `2..=max_dim` (even).
pub fn sample_lemma2_instance(seed: u64, max_dim: usize, max_power: u32) -> Result<Lemma2Instance> {
    if max_dim < 2 || max_power == 0 {
        return Err(Error::Malformed(format!("need max_dim >= 2 and max_power >= 1, got {max_dim}, {max_power}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let exponent = rng.random_range(1..=max_power);
    let chsh_style = max_dim >= 4 && seed % 4 == 3;
    let pair = if chsh_style {
        chsh_angles_pair([(); 4].map(|_| rng.random_range(-PI..PI)))
    } else {
        let half = rng.random_range(1..=max_dim / 2);
        let betas: Vec<f64> = (0..half).map(|_| rng.random_range(0.0..=1.0)).collect();
        pair_from_betas(&betas, &mut rng)?
    };
    let psi = random_state(pair.dim(), &mut rng);
    Ok(Lemma2Instance { seed, pair, psi, exponent, chsh_style })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Lemma3Check {
    pub exponent: u32,
    /// `r* - 2^M - 1`.
    pub excess: f64,
    /// `M / 2^(M+1)`.
    pub lower: f64,
    /// `8M / 2^(M+1)`.
    pub upper: f64,
    pub pass: bool,
}

/// `2^M + 1 + M/2^(M+1) <= r*(M) <= 2^M + 1 + 8M/2^(M+1)`, compared on the excess over `2^M + 1`.
pub fn verify_lemma3(exponent: u32) -> Lemma3Check {
    let opt = maximize_r(exponent);
    let unit = 2f64.powi(-(exponent as i32) - 1);
    let lower = exponent as f64 * unit;
    let upper = 8.0 * lower;
    Lemma3Check { exponent, excess: opt.excess, lower, upper, pass: lower <= opt.excess && opt.excess <= upper }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ConverseCheck {
    pub win: f64,
    pub relaxed: f64,
    /// `relaxed - win`; the relaxation holds when this is `>= -tol`.
    pub gap: f64,
    pub parity_residual: f64,
    pub constraint_residual: f64,
    pub pass: bool,
}

/// `P_q <= ⟨∏_{i>=2} (I + O_{q1,qi,1} O_{q1,qi,i})/2⟩`, the edge parity identities, and `S_i² + T_i² = I`.
pub fn verify_converse_chain(strategy: &QuantumStrategy, q: &Question) -> Result<ConverseCheck> {
    verify_converse_chain_with(strategy, &EdgeFamily::new(strategy)?, q)
}

/// As [`verify_converse_chain`], with edge observables supplied by the caller.
pub fn verify_converse_chain_with(
    strategy: &QuantumStrategy,
    family: &EdgeFamily,
    q: &Question,
) -> Result<ConverseCheck> {
    let m = strategy.m();
    if q.m() != m || family.m() != m {
        return Err(Error::DimensionMismatch { left: m, right: q.m().max(family.m()) });
    }
    let psi = ghz_state(m)?;
    let q1 = q.bit(1);
    let v = (2..=m).fold(psi.clone(), |v, i| {
        let qi = q.bit(i);
        let flipped = v.apply_qubit(family.get(i, i, q1, qi), i).apply_qubit(family.get(1, i, q1, qi), 1);
        v.plus(&flipped).scaled(0.5)
    });
    let relaxed = psi.inner(&v).re;
    let win = winning_probability_simulated(strategy, q);
    let parity_residual = family.parity_residual();
    let mut constraint = 0f64;
    for i in 2..=m {
        let (s, t) = family.s_t(i)?;
        constraint = constraint.max(constraint_residual(&s, &t));
    }
    let gap = relaxed - win;
    Ok(ConverseCheck {
        win,
        relaxed,
        gap,
        parity_residual,
        constraint_residual: constraint,
        pass: gap >= -CHAIN_TOL && parity_residual <= CHAIN_TOL && constraint <= CHAIN_TOL,
    })
}

/// Coordinate ascent over the four CHSH angles on the Bell state, from a seeded start.
///
/// Returns the best `⟨(I+S) + (I+T)⟩` found and its angles.
pub fn chsh_tightness_search(seed: u64, rounds: usize) -> (f64, [f64; 4]) {
    let psi = ghz_state(2).expect("two qubits");
    let value = |a: [f64; 4]| lemma2_lhs(&chsh_angles_pair(a), &psi, 1).expect("4-dim");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut angles = [(); 4].map(|_| rng.random_range(-PI..PI));
    let mut best = value(angles);
    let search = GridGolden { grid_points: 64, ..GridGolden::default() };
    for _ in 0..rounds {
        let before = best;
        for k in 0..4 {
            let line = |x: f64| {
                let mut a = angles;
                a[k] = x;
                value(a)
            };
            let found = search.maximize(line, -PI, PI);
            if found.value > best {
                angles[k] = found.x;
                best = found.value;
            }
        }
        if best - before < 1e-15 {
            break;
        }
    }
    (best, angles)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::Game;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, SQRT_2};

    fn x() -> ComplexMatrix {
        ComplexMatrix::from_real(2, &[0.0, 1.0, 1.0, 0.0]).unwrap()
    }

    fn z() -> ComplexMatrix {
        ComplexMatrix::diag(&[1.0, -1.0])
    }

    #[test]
    fn ghz_edge_observables() {
        // owner 1: (-1)^{q1 qi} Z_{θ_{q1,1}}; owner i: Z_{θ_{qi,i}}
        for m in 2..=4 {
            let s = QuantumStrategy::new(m, 0.3).unwrap();
            for i in 2..=m {
                for q1 in 0..2u8 {
                    for qi in 0..2u8 {
                        let e1 = induced_edge_observable(&s, 1, i, q1, qi).unwrap();
                        let sign = if q1 & qi == 1 { -1.0 } else { 1.0 };
                        assert!(e1.operator.max_abs_diff(&s.observable(1, q1).scale(sign)) < 1e-15);
                        let ei = induced_edge_observable(&s, i, i, q1, qi).unwrap();
                        assert!(ei.operator.max_abs_diff(&s.observable(i, qi)) < 1e-15);
                        assert!(is_reflection(&e1.operator) && is_reflection(&ei.operator));
                    }
                }
            }
            assert!(EdgeFamily::new(&s).unwrap().parity_residual() <= 1e-10);
        }
        let s = QuantumStrategy::new(3, 0.3).unwrap();
        assert!(induced_edge_observable(&s, 2, 3, 0, 0).is_err());
        assert!(induced_edge_observable(&s, 1, 1, 0, 0).is_err());
    }

    #[test]
    fn s_t_examples() {
        for m in 2..=4 {
            for alpha in [0.0, 0.4, FRAC_PI_4, 1.2, FRAC_PI_2] {
                let s = QuantumStrategy::new(m, alpha).unwrap();
                for i in 2..=m {
                    assert!(build_s_t(&s, i).unwrap().residual() <= 1e-10);
                }
                assert!(family_commutator_norm(&s).unwrap() <= 1e-10);
            }
        }
        let pair = build_s_t(&QuantumStrategy::new(2, FRAC_PI_4).unwrap(), 2).unwrap();
        let psi = ghz_state(2).unwrap();
        let sum = pair.s() + pair.t();
        assert!((expectation(&sum, &psi).unwrap() - SQRT_2).abs() < 1e-10);
    }

    #[test]
    fn constrained_pair_rejects() {
        let h = ComplexMatrix::identity(2);
        assert!(matches!(ConstrainedPair::new(h.clone(), h.clone()), Err(Error::Constraint(_))));
        assert!(matches!(
            ConstrainedPair::new(h.clone(), ComplexMatrix::zeros(4)),
            Err(Error::DimensionMismatch { .. })
        ));
        let mut skew = ComplexMatrix::zeros(2);
        skew.set(0, 1, C64::new(0.5, 0.0));
        assert!(matches!(ConstrainedPair::new(skew, ComplexMatrix::zeros(2)), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn block_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let zero = pair_from_betas(&[0.0, 0.0, 0.0], &mut rng).unwrap();
        assert_eq!(*zero.t(), ComplexMatrix::zeros(6));
        assert!(is_reflection(zero.s()));
        let one = pair_from_betas(&[1.0, 1.0], &mut rng).unwrap();
        assert!(one.s().max_abs_diff(&ComplexMatrix::zeros(4)) == 0.0);
        assert!(is_reflection(one.t()));
        let p = random_constrained_pair(4, 42).unwrap();
        assert!(p.residual() <= 1e-12);
        assert_eq!(p, random_constrained_pair(4, 42).unwrap());
    }

    #[test]
    fn chsh_pair_examples() {
        let (b0, b1) = (z_theta(FRAC_PI_4), z_theta(-FRAC_PI_4));
        let pair = chsh_style_pair(&z(), &x(), &b0, &b1).unwrap();
        let psi = ghz_state(2).unwrap();
        assert!((expectation(&(pair.s() + pair.t()), &psi).unwrap() - SQRT_2).abs() < 1e-12);
        assert!(pair.residual() <= 1e-10);
        assert!((lemma2_lhs(&pair, &psi, 1).unwrap() - (2.0 + SQRT_2)).abs() < 1e-12);
        let check = verify_lemma2(&pair, &psi, 1, 1e-9).unwrap();
        assert!(check.pass && check.margin.abs() < 1e-9);

        let same = chsh_style_pair(&z(), &x(), &b0, &b0).unwrap();
        assert_eq!(*same.t(), ComplexMatrix::zeros(4));
        assert!(matches!(chsh_style_pair(&z().scale(2.0), &x(), &b0, &b1), Err(Error::NotReflection)));
    }

    #[test]
    fn lemma2_trivial_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let psi = random_state(4, &mut rng);
        let zero = ComplexMatrix::zeros(4);
        let id = ConstrainedPair::new(ComplexMatrix::identity(4), ComplexMatrix::zeros(4)).unwrap();
        for e in 1..=6u32 {
            assert!((lemma2_expression(&zero, &zero, &psi, e).unwrap() - 2.0).abs() < 1e-12);
            let expected = 2f64.powi(e as i32) + 1.0;
            assert!((lemma2_lhs(&id, &psi, e).unwrap() - expected).abs() < 1e-9);
            assert!(verify_lemma2(&id, &psi, e, 1e-9).unwrap().pass);
        }
        assert!(lemma2_lhs(&id, &psi, 0).is_err());
        assert!(lemma2_lhs(&id, &psi, 65).is_err());
    }

    #[test]
    fn lemma3_examples() {
        let c1 = verify_lemma3(1);
        assert!(c1.pass);
        assert!((c1.lower + 3.0 - 3.25).abs() < 1e-15 && (c1.upper + 3.0 - 5.0).abs() < 1e-15);
        let c2 = verify_lemma3(2);
        assert!(c2.pass && (c2.lower + 5.0 - 5.25).abs() < 1e-15 && (c2.upper + 5.0 - 7.0).abs() < 1e-15);
        for e in 1..=64 {
            assert!(verify_lemma3(e).pass, "M={e}");
        }
    }

    #[test]
    fn converse_chain_m3_grid() {
        let game = Game::new(3).unwrap();
        for k in 0..16 {
            let s = QuantumStrategy::new(3, k as f64 * FRAC_PI_2 / 15.0).unwrap();
            for q in game.questions() {
                assert!(verify_converse_chain(&s, &q).unwrap().pass, "k={k} q={q:?}");
            }
        }
    }

    #[test]
    fn converse_chain_tight_in_two_player_case() {
        let s = QuantumStrategy::new(2, FRAC_PI_4).unwrap();
        for q in Game::new(2).unwrap().questions() {
            let c = verify_converse_chain(&s, &q).unwrap();
            assert!(c.gap.abs() < 1e-12, "{c:?}");
        }
    }

    #[test]
    fn converse_negative_control() {
        let s = QuantumStrategy::new(3, 0.5).unwrap();
        let mut family = EdgeFamily::new(&s).unwrap();
        *family.get_mut(1, 2, 1, 1) = x();
        let q = Question::new(&[0, 1, 1]).unwrap();
        let c = verify_converse_chain_with(&s, &family, &q).unwrap();
        assert!(!c.pass && c.parity_residual > 0.1);
    }

    #[test]
    fn tightness_search_reaches_optimum() {
        let (best, _) = chsh_tightness_search(42, 500);
        assert!((best - (2.0 + SQRT_2)).abs() < 1e-6, "{best}");
    }

    #[test]
    fn sampled_instances_are_reproducible() {
        let a = sample_lemma2_instance(7, 8, 6).unwrap();
        let b = sample_lemma2_instance(7, 8, 6).unwrap();
        assert_eq!(a.pair, b.pair);
        assert_eq!(a.psi, b.psi);
        assert!(a.chsh_style && a.pair.dim() == 4);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn lemma2_holds_on_block_pairs(seed in any::<u64>(), half in 1usize..=4, e in 1u32..=6) {
            let pair = random_constrained_pair(half, seed).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
            let psi = random_state(pair.dim(), &mut rng);
            let check = verify_lemma2(&pair, &psi, e, 1e-9).unwrap();
            prop_assert!(check.pass, "{:?}", check);
        }

        #[test]
        fn lemma2_holds_on_chsh_pairs(a in -PI..PI, b in -PI..PI, c in -PI..PI, d in -PI..PI, seed in any::<u64>(), e in 1u32..=6) {
            let pair = chsh_angles_pair([a, b, c, d]);
            prop_assert!(pair.residual() <= 1e-10);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let psi = random_state(4, &mut rng);
            prop_assert!(verify_lemma2(&pair, &psi, e, 1e-9).unwrap().pass);
        }
    }
}
