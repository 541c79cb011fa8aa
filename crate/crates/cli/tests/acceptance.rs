//! Acceptance criteria, one `[PASS]`/`[FAIL]` line each. Exits non-zero if any fails.

use std::f64::consts::{FRAC_PI_4, SQRT_2};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use hcgame_core::classical::{brute_force_classical_value, classical_value_formula, Rational};
use hcgame_core::game::{chsh_bit_embedding, predicate, Game};
use hcgame_core::nosignalling::{build_ns_correlation, ns_winning_probability, verify_no_signalling, verify_normalization};
use hcgame_core::quantum::{
    advantage_bounds, average_win, average_win_analytic, quantum_value, winning_probability_simulated, QuantumStrategy,
};
use hcgame_core::report::{fmt_rational_sig, fmt_sig};
use hcgame_core::suites::{alpha_grid, converse_suite, lemma2_suite};

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn single_threaded<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new().num_threads(1).build().expect("pool").install(f)
}

fn rat(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}

fn within(elapsed: Duration, budget_secs: u64) -> bool {
    elapsed <= Duration::from_secs(budget_secs)
}

fn classical_exact() -> Outcome {
    let two = brute_force_classical_value(2, false).expect("m=2");
    let start = Instant::now();
    let three = single_threaded(|| brute_force_classical_value(3, true).expect("m=3"));
    let elapsed = start.elapsed();
    let pass = two.value == rat(3, 4)
        && three.value == rat(5, 8)
        && two.value == classical_value_formula(2)
        && three.value == classical_value_formula(3)
        && within(elapsed, 60);
    outcome(pass, format!("m=2: {}, m=3: {} in {:.2?} (budget 60s)", two.value, three.value, elapsed))
}

fn quantum_two_players() -> Outcome {
    let v = quantum_value(2).expect("m=2");
    let dv = (v.value - (2.0 + SQRT_2) / 4.0).abs();
    let dt = (v.theta_star - FRAC_PI_4).abs();
    outcome(dv <= 1e-9 && dt <= 1e-6, format!("|value - (2+√2)/4| = {dv:.3e} (tol 1e-9), |θ* - π/4| = {dt:.3e} (tol 1e-6)"))
}

fn strategy_formula_agreement() -> Outcome {
    let start = Instant::now();
    let mut worst = (0f64, 0usize, 0f64);
    let mut failures = 0;
    for m in 2..=6 {
        for alpha in alpha_grid(32) {
            let s = QuantumStrategy::new(m, alpha).expect("alpha in range");
            let diff = (average_win(&s, winning_probability_simulated) - average_win_analytic(m, alpha)).abs();
            if diff > 1e-10 {
                failures += 1;
            }
            if diff > worst.0 {
                worst = (diff, m, alpha);
            }
        }
    }
    let elapsed = start.elapsed();
    outcome(
        failures == 0 && within(elapsed, 30),
        format!(
            "{failures}/160 (m, α) pairs off by more than 1e-10; worst {:.3e} at m={}, α={:.4}; {:.2?} (budget 30s)",
            worst.0, worst.1, worst.2, elapsed
        ),
    )
}

fn bound_containment() -> Outcome {
    // compared on ω_q - ω_c, since 1/2 + 1/2^m absorbs the bounds in f64 from m = 27 on
    let bad: Vec<usize> = (3..=30)
        .filter(|&m| {
            let v = quantum_value(m).expect("m in range");
            let (lo, hi) = advantage_bounds(m);
            !(lo <= v.advantage && v.advantage <= hi)
        })
        .collect();
    outcome(bad.is_empty(), format!("m=3..30 outside bounds: {bad:?}"))
}

fn nosignalling_perfect() -> Outcome {
    let start = Instant::now();
    let mut notes = Vec::new();
    let mut pass = true;
    for m in 2..=4 {
        let corr = build_ns_correlation(m).expect("m <= 4");
        let sizes = if m <= 3 { m } else { 2 };
        let norm = verify_normalization(&corr);
        let ns = (1..=sizes).all(|k| verify_no_signalling(&corr, k));
        let value = ns_winning_probability(&corr);
        pass &= norm && ns && value == rat(1, 1);
        notes.push(format!("m={m}: norm={norm} ns(1..={sizes})={ns} value={value}"));
    }
    let elapsed = start.elapsed();
    outcome(pass && within(elapsed, 10), format!("{}; {:.2?} (budget 10s)", notes.join(", "), elapsed))
}

fn lemma2_property() -> Outcome {
    let rep = lemma2_suite(1000, 8, 6, 1e-9, 42).expect("valid options");
    let trials = rep.checks.iter().filter(|c| c.name.starts_with("trial[")).count();
    let worst = rep.summary["worst_margin"].as_f64().unwrap_or(f64::NAN);
    let failed: Vec<&str> = rep.failures().map(|c| c.name.as_str()).collect();
    outcome(
        rep.pass && trials == 1000,
        format!("{trials} trials, worst margin {worst:.3e}, CHSH equality within 1e-6; failures: {failed:?}"),
    )
}

fn converse_chain() -> Outcome {
    let rep = converse_suite(&[2, 3, 4, 5], 16, 42).expect("valid options");
    let gap = rep.summary["worst_gap"].as_f64().unwrap_or(f64::NAN);
    outcome(
        rep.pass,
        format!("{} checks over m=2..5 and 16 α, smallest relaxation gap {gap:.3e}, {} failed", rep.checks.len(), rep.failures().count()),
    )
}

fn strict_advantage() -> Outcome {
    let bad: Vec<usize> = (2..=20)
        .filter(|&m| {
            let v = quantum_value(m).expect("m in range");
            let (_, hi) = advantage_bounds(m);
            !(v.advantage > 0.0 && v.advantage <= hi)
        })
        .collect();
    outcome(bad.is_empty(), format!("m=2..20 violating 0 < ω_q - ω_c <= 8(m-1)/4^m: {bad:?}"))
}

fn chsh_equivalence() -> Outcome {
    let mut checked = 0;
    let mut bad = Vec::new();
    for q in Game::new(2).expect("m=2").questions() {
        for a1 in 0..2u8 {
            for a2 in 0..2u8 {
                let answer = chsh_bit_embedding(a1, a2, &q).expect("m=2 question");
                let expected = (a1 ^ a2) == (q.bit(1) & q.bit(2));
                checked += 1;
                if predicate(&answer, &q) != expected {
                    bad.push((a1, a2, q.bits()));
                }
            }
        }
    }
    outcome(bad.is_empty() && checked == 16, format!("{checked} distinct (a1, a2, q) triples, mismatches: {bad:?}"))
}

fn figure_data() -> Outcome {
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_hcgame"))
            .args(["figure3", "--m-max", "12", "--jobs", "1"])
            .output()
            .expect("binary runs")
    };
    let (a, b) = (run(), run());
    if !a.status.success() {
        return outcome(false, format!("figure3 exited with {:?}", a.status.code()));
    }
    let identical = a.stdout == b.stdout;
    let text = String::from_utf8(a.stdout).expect("UTF-8");
    let mut lines = text.lines();
    let header_ok = lines.next() == Some("m,classical,quantum,nosignalling");
    let mut problems = Vec::new();
    let mut rows = 0;
    for (line, m) in lines.zip(2usize..) {
        rows += 1;
        let cols: Vec<&str> = line.split(',').collect();
        let classical = classical_value_formula(m);
        let c_ok = cols.len() == 4 && cols[0] == m.to_string() && cols[1] == fmt_rational_sig(&classical);
        let exact_ok = m > 3 || brute_force_classical_value(m, m == 3).expect("m <= 3").value == classical;
        let q = quantum_value(m).expect("m in range");
        let q_ok = cols.get(2) == Some(&fmt_sig(q.value).as_str())
            && cols[2].parse::<f64>().is_ok_and(|x| ((x - q.value) / q.value).abs() <= 5e-12);
        let ns_ok = cols.get(3) == Some(&"1")
            && (m > 4 || ns_winning_probability(&build_ns_correlation(m).expect("m <= 4")) == rat(1, 1));
        if !(c_ok && exact_ok && q_ok && ns_ok) {
            problems.push(m);
        }
    }
    let gap12 = quantum_value(12).expect("m=12").advantage;
    let gap_ok = gap12 <= 8.0 * 11.0 / 2f64.powi(24);
    outcome(
        identical && header_ok && rows == 11 && problems.is_empty() && gap_ok,
        format!("{rows} rows, byte-identical reruns: {identical}, mismatched m: {problems:?}, gap at m=12 {gap12:.3e}"),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("classical value exact", classical_exact),
        ("quantum value, m=2", quantum_two_players),
        ("strategy-formula agreement", strategy_formula_agreement),
        ("bound containment", bound_containment),
        ("no-signalling perfection", nosignalling_perfect),
        ("generalized CHSH property suite", lemma2_property),
        ("converse-chain numerics", converse_chain),
        ("strict quantum advantage", strict_advantage),
        ("CHSH equivalence", chsh_equivalence),
        ("figure data", figure_data),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = check();
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("[{tag}] {:>2} {name}: {} ({:.2?})", k + 1, o.detail, start.elapsed());
        failed += !o.pass as usize;
    }
    println!("acceptance: {}/{} passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
