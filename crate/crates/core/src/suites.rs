//! Verification suites driving the module checks and collecting [`VerificationReport`]s.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, SQRT_2};

use rayon::prelude::*;
use serde_json::json;

use crate::classical::{brute_force_classical_value, classical_value_formula, Rational};
use crate::error::{check_range, Result};
use crate::game::Game;
use crate::inequalities::{
    chsh_angles_pair, chsh_tightness_search, family_commutator_norm, sample_lemma2_instance, verify_converse_chain,
    verify_lemma2, verify_lemma3, EdgeFamily, CHAIN_TOL,
};
use crate::nosignalling::{
    build_ns_correlation, ns_winning_probability, support_in_z, verify_no_signalling, verify_normalization,
};
use crate::quantum::{
    advantage_bounds, average_win, average_win_analytic, ghz_state, quantum_value, winning_probability_simulated,
    QuantumStrategy, MAX_EXPONENT,
};
use crate::report::{CheckRecord, VerificationReport};

/// Default tolerance of the strategy-formula agreement.
pub const QUANTUM_TOL: f64 = 1e-10;
/// Default slack of the generalized CHSH inequality.
pub const LEMMA2_TOL: f64 = 1e-9;
/// Closeness required of the tight CHSH configuration.
pub const TIGHTNESS_TOL: f64 = 1e-6;

pub const SUITES: [&str; 7] = ["classical", "quantum", "nosignalling", "lemma2", "lemma3", "converse", "all"];

/// `count` evenly spaced angles covering `[0, π/2]`.
pub fn alpha_grid(count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![0.0],
        n => (0..n).map(|k| k as f64 * FRAC_PI_2 / (n - 1) as f64).collect(),
    }
}

fn rational_json(r: &Rational) -> serde_json::Value {
    json!(format!("{}/{}", r.numer(), r.denom()))
}

/// Brute-force optimum against `1/2 + 1/2^m`; `m = 3` uses the parity-restricted enumeration.
pub fn classical_suite(ms: &[usize], seed: u64) -> Result<VerificationReport> {
    let mut rep = VerificationReport::new("classical", seed);
    let mut rows = Vec::new();
    for &m in ms {
        check_range(m, 2, 3)?;
        let opt = brute_force_classical_value(m, m == 3)?;
        let formula = classical_value_formula(m);
        let matches = opt.value == formula;
        rep.push(CheckRecord::exact(format!("m={m}/value"), rational_json(&formula), rational_json(&opt.value), matches));
        rows.push(json!({
            "m": m,
            "brute_force": rational_json(&opt.value),
            "formula": rational_json(&formula),
            "profiles": opt.profiles,
            "match": matches,
        }));
    }
    rep.note("rows", rows);
    Ok(rep)
}

/// Quantum value checks and simulated-versus-closed-form agreement.
pub fn quantum_suite(ms: &[usize], alpha_samples: usize, tol: f64, seed: u64) -> Result<VerificationReport> {
    let mut rep = VerificationReport::new("quantum", seed);
    let v2 = quantum_value(2)?;
    rep.push(CheckRecord::close("m=2/value", (2.0 + SQRT_2) / 4.0, v2.value, 1e-9));
    rep.push(CheckRecord::close("m=2/theta_star", FRAC_PI_4, v2.theta_star, 1e-6));
    let alphas = alpha_grid(alpha_samples);
    let mut worst = 0f64;
    for &m in ms {
        check_range(m, 2, 6)?;
        let v = quantum_value(m)?;
        let (lo, hi) = advantage_bounds(m);
        rep.push(CheckRecord::at_least(format!("m={m}/advantage_lower"), lo, v.advantage, 0.0));
        rep.push(CheckRecord::at_most(format!("m={m}/advantage_upper"), hi, v.advantage, 0.0));
        let results: Vec<(f64, f64)> = alphas
            .par_iter()
            .map(|&alpha| {
                let s = QuantumStrategy::new(m, alpha).expect("grid inside [0, pi/2]");
                (average_win(&s, winning_probability_simulated), average_win_analytic(m, alpha))
            })
            .collect();
        for (k, (sim, formula)) in results.into_iter().enumerate() {
            worst = worst.max((sim - formula).abs());
            rep.push(CheckRecord::close(format!("m={m}/alpha[{k}]/average"), formula, sim, tol));
        }
    }
    rep.note("alpha_samples", alphas.len());
    rep.note("tol", tol);
    rep.note("worst_abs_diff", worst);
    Ok(rep)
}

/// Exact normalization, no-signalling marginals and perfect winning.
///
/// Subsets of every size are checked up to `subset_max` players.
pub fn nosignalling_suite(ms: &[usize], seed: u64) -> Result<VerificationReport> {
    let mut rep = VerificationReport::new("nosignalling", seed);
    let mut rows = Vec::new();
    for &m in ms {
        let corr = build_ns_correlation(m)?;
        let subset_max = if m <= 3 { m } else { 2 };
        let normalization = verify_normalization(&corr);
        let no_signalling = (1..=subset_max).all(|k| verify_no_signalling(&corr, k));
        let value = ns_winning_probability(&corr);
        let one = Rational::from_integer(1.into());
        rep.push(CheckRecord::holds(format!("m={m}/normalization"), normalization));
        rep.push(CheckRecord::holds(format!("m={m}/no_signalling"), no_signalling));
        rep.push(CheckRecord::holds(format!("m={m}/support_in_z"), support_in_z(&corr)));
        rep.push(CheckRecord::exact(format!("m={m}/value"), rational_json(&one), rational_json(&value), value == one));
        rows.push(json!({
            "m": m,
            "normalization": normalization,
            "no_signalling": no_signalling,
            "subset_max": subset_max,
            "value": rational_json(&value),
        }));
    }
    rep.note("rows", rows);
    Ok(rep)
}

/// Randomized generalized CHSH inequality plus the tight CHSH configuration.
pub fn lemma2_suite(trials: usize, max_dim: usize, max_power: u32, tol: f64, seed: u64) -> Result<VerificationReport> {
    let mut rep = VerificationReport::new("lemma2", seed);
    check_range(max_dim, 2, 64)?;
    check_range(max_power as usize, 1, 64)?;
    let results = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let inst = sample_lemma2_instance(seed.wrapping_add(t), max_dim, max_power)?;
            let check = verify_lemma2(&inst.pair, &inst.psi, inst.exponent, tol)?;
            Ok((inst, check))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut worst = f64::INFINITY;
    let mut worst_by_power = vec![f64::INFINITY; max_power as usize];
    for (inst, check) in &results {
        worst = worst.min(check.margin);
        let w = &mut worst_by_power[inst.exponent as usize - 1];
        *w = w.min(check.margin);
        rep.push(CheckRecord::at_most(
            format!("trial[{}]/dim={}/M={}", inst.seed, inst.pair.dim(), inst.exponent),
            check.r_star,
            check.lhs,
            tol,
        ));
    }
    // the optimal CHSH angles reach r*(1) = 2 + √2
    let pair = chsh_angles_pair([0.0, FRAC_PI_2, FRAC_PI_4, -FRAC_PI_4]);
    let tight = verify_lemma2(&pair, &ghz_state(2)?, 1, tol)?;
    rep.push(CheckRecord::close("chsh_optimal/M=1", 2.0 + SQRT_2, tight.lhs, TIGHTNESS_TOL));
    rep.push(CheckRecord::close("chsh_optimal/r_star", 2.0 + SQRT_2, tight.r_star, TIGHTNESS_TOL));
    let (found, _) = chsh_tightness_search(seed, 500);
    rep.push(CheckRecord::close("chsh_search/M=1", 2.0 + SQRT_2, found, TIGHTNESS_TOL));
    rep.note("trials", trials);
    rep.note("max_dim", max_dim);
    rep.note("max_power", max_power);
    rep.note("tol", tol);
    rep.note("worst_margin", if trials > 0 { json!(worst) } else { json!(null) });
    let per_power: Vec<_> = worst_by_power.iter().map(|w| if w.is_finite() { json!(w) } else { json!(null) }).collect();
    rep.note("worst_margin_by_power", per_power);
    Ok(rep)
}

/// Bounds on `r*(M)` for `M = 1..=m_max`.
pub fn lemma3_suite(m_max: u32, seed: u64) -> Result<VerificationReport> {
    let mut rep = VerificationReport::new("lemma3", seed);
    check_range(m_max as usize, 1, MAX_EXPONENT as usize)?;
    let checks: Vec<_> = (1..=m_max).into_par_iter().map(verify_lemma3).collect();
    for c in checks {
        rep.push(CheckRecord::at_least(format!("M={}/lower", c.exponent), c.lower, c.excess, 0.0));
        rep.push(CheckRecord::at_most(format!("M={}/upper", c.exponent), c.upper, c.excess, 0.0));
    }
    rep.note("m_max", m_max);
    Ok(rep)
}

/// Converse chain for every question over an `alpha_samples`-point grid.
pub fn converse_suite(ms: &[usize], alpha_samples: usize, seed: u64) -> Result<VerificationReport> {
    let mut rep = VerificationReport::new("converse", seed);
    let alphas = alpha_grid(alpha_samples);
    let mut worst_gap = f64::INFINITY;
    for &m in ms {
        check_range(m, 2, 6)?;
        let game = Game::new(m)?;
        let per_alpha = alphas
            .par_iter()
            .map(|&alpha| {
                let s = QuantumStrategy::new(m, alpha)?;
                let family = EdgeFamily::new(&s)?;
                let checks =
                    game.questions().map(|q| verify_converse_chain(&s, &q).map(|c| (q, c))).collect::<Result<Vec<_>>>()?;
                Ok((family.parity_residual(), family_commutator_norm(&s)?, checks))
            })
            .collect::<Result<Vec<_>>>()?;
        for (k, (parity, commutator, checks)) in per_alpha.into_iter().enumerate() {
            let tag = format!("m={m}/alpha[{k}]");
            let min_gap = checks.iter().map(|(_, c)| c.gap).fold(f64::INFINITY, f64::min);
            let constraint = checks.iter().map(|(_, c)| c.constraint_residual).fold(0.0, f64::max);
            worst_gap = worst_gap.min(min_gap);
            rep.push(CheckRecord::at_least(format!("{tag}/relaxation"), 0.0, min_gap, CHAIN_TOL));
            rep.push(CheckRecord::at_most(format!("{tag}/parity_identities"), 0.0, parity, CHAIN_TOL));
            rep.push(CheckRecord::at_most(format!("{tag}/s2_plus_t2"), 0.0, constraint, CHAIN_TOL));
            rep.push(CheckRecord::at_most(format!("{tag}/family_commutators"), 0.0, commutator, CHAIN_TOL));
            for (q, c) in checks.iter().filter(|(_, c)| !c.pass) {
                rep.push(CheckRecord::holds(format!("{tag}/q={:?}", q.bits()), c.pass));
            }
        }
    }
    rep.note("alpha_samples", alphas.len());
    rep.note("worst_gap", worst_gap);
    Ok(rep)
}

/// Options shared by all suites; `None` means the suite's default.
#[derive(Clone, Debug, Default)]
pub struct SuiteOptions {
    pub m: Option<usize>,
    pub m_max: Option<usize>,
    pub trials: Option<usize>,
    pub dim: Option<usize>,
    pub max_power: Option<u32>,
    pub tol: Option<f64>,
    pub seed: u64,
    pub quick: bool,
}

impl SuiteOptions {
    fn ms(&self, lo: usize, hi: usize, quick_hi: usize) -> Vec<usize> {
        match self.m {
            Some(m) => vec![m],
            None => (lo..=if self.quick { hi.min(quick_hi) } else { hi }).collect(),
        }
    }
}

/// Runs a suite by name; `None` for an unknown name.
pub fn run_suite(name: &str, opts: &SuiteOptions) -> Option<Result<VerificationReport>> {
    let seed = opts.seed;
    let report = match name {
        "classical" => classical_suite(&opts.ms(2, 3, 3), seed),
        "quantum" => quantum_suite(&opts.ms(2, 6, 4), 32, opts.tol.unwrap_or(QUANTUM_TOL), seed),
        "nosignalling" => nosignalling_suite(&opts.ms(2, 4, 4), seed),
        "lemma2" => lemma2_suite(
            opts.trials.unwrap_or(if opts.quick { 100 } else { 1000 }),
            opts.dim.unwrap_or(8),
            opts.max_power.unwrap_or(6),
            opts.tol.unwrap_or(LEMMA2_TOL),
            seed,
        ),
        "lemma3" => lemma3_suite(opts.m_max.unwrap_or(64) as u32, seed),
        "converse" => converse_suite(&opts.ms(2, 5, 4), 16, seed),
        "all" => {
            let mut all = VerificationReport::new("all", seed);
            for sub in &SUITES[..SUITES.len() - 1] {
                match run_suite(sub, opts).expect("known suite") {
                    Ok(r) => all.absorb(r),
                    Err(e) => return Some(Err(e)),
                }
            }
            all.note("quick", opts.quick);
            Ok(all)
        }
        _ => return None,
    };
    Some(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classical_small() {
        let rep = classical_suite(&[2], 1).unwrap();
        assert!(rep.pass);
        assert_eq!(rep.summary["rows"][0]["brute_force"], "3/4");
        assert!(classical_suite(&[4], 1).is_err());
    }

    #[test]
    fn quantum_two_player_passes() {
        let rep = quantum_suite(&[2], 32, QUANTUM_TOL, 42).unwrap();
        assert!(rep.pass, "{:?}", rep.failures().collect::<Vec<_>>());
        assert_eq!(rep.checks.len(), 2 + 2 + 32);
    }

    #[test]
    fn quantum_three_player_mismatch_is_reported() {
        let rep = quantum_suite(&[3], 4, QUANTUM_TOL, 42).unwrap();
        assert!(!rep.pass);
        // α = 0 is the one grid point where both sides agree
        assert!(rep.checks.iter().find(|c| c.name == "m=3/alpha[0]/average").unwrap().pass);
    }

    #[test]
    fn nosignalling_and_converse() {
        let ns = nosignalling_suite(&[2, 3], 0).unwrap();
        assert!(ns.pass);
        assert_eq!(ns.summary["rows"][1]["value"], "1/1");
        let conv = converse_suite(&[2, 3], 4, 0).unwrap();
        assert!(conv.pass, "{:?}", conv.failures().collect::<Vec<_>>());
    }

    #[test]
    fn lemma_suites() {
        let l2 = lemma2_suite(40, 8, 6, LEMMA2_TOL, 42).unwrap();
        assert!(l2.pass, "{:?}", l2.failures().collect::<Vec<_>>());
        assert_eq!(l2, lemma2_suite(40, 8, 6, LEMMA2_TOL, 42).unwrap());
        assert!(lemma3_suite(64, 0).unwrap().pass);
    }

    #[test]
    fn dispatch() {
        assert!(run_suite("nope", &SuiteOptions::default()).is_none());
        let opts = SuiteOptions { m: Some(2), ..SuiteOptions::default() };
        assert!(run_suite("classical", &opts).unwrap().unwrap().pass);
        assert_eq!(alpha_grid(3), vec![0.0, FRAC_PI_4, FRAC_PI_2]);
    }
}
