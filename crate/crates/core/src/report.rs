//! Value tables, decimal rendering and verification reports.

use std::fmt::Write as _;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::classical::{classical_value_formula, Rational};
use crate::error::{check_range, Error, Result};
use crate::quantum::quantum_value;

/// Significant digits of every rendered decimal.
pub const SIG_DIGITS: u32 = 12;
/// Largest `m` accepted by the value tables.
pub const MAX_TABLE_M: usize = 64;

/// `x` to [`SIG_DIGITS`] significant digits, rounding half to even on its exact binary value.
pub fn fmt_sig(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    fmt_rational_sig(&Rational::from_float(x).expect("finite"))
}

/// Exact rational to [`SIG_DIGITS`] significant digits, rounding half to even.
///
/// Plain notation for exponents in `-5..15`, scientific otherwise; trailing zeros trimmed.
pub fn fmt_rational_sig(r: &Rational) -> String {
    if r.is_zero() {
        return "0".into();
    }
    let neg = r.is_negative();
    let a = r.abs();
    // smallest e with a < 10^(e+1)
    let ten = Rational::from_integer(BigInt::from(10));
    let mut e = estimate_exponent(&a);
    while a >= pow10(e + 1, &ten) {
        e += 1;
    }
    while a < pow10(e, &ten) {
        e -= 1;
    }
    let digits = SIG_DIGITS as i32;
    let mut n = round_half_even(&(&a / pow10(e - digits + 1, &ten)));
    if n == BigInt::from(10).pow(SIG_DIGITS) {
        n /= 10;
        e += 1;
    }
    let s = n.to_string();
    let body = if (-5..15).contains(&e) {
        plain(&s, e)
    } else {
        let mantissa = trim(&format!("{}.{}", &s[..1], &s[1..]));
        format!("{mantissa}e{e}")
    };
    if neg {
        format!("-{body}")
    } else {
        body
    }
}

fn estimate_exponent(a: &Rational) -> i32 {
    let bits = a.numer().bits() as f64 - a.denom().bits() as f64;
    (bits * std::f64::consts::LOG10_2).floor() as i32
}

fn pow10(e: i32, ten: &Rational) -> Rational {
    if e >= 0 {
        ten.pow(e)
    } else {
        Rational::one() / ten.pow(-e)
    }
}

fn round_half_even(x: &Rational) -> BigInt {
    let (q, r) = x.numer().div_rem(x.denom());
    let twice: BigInt = r * 2;
    match twice.cmp(x.denom()) {
        std::cmp::Ordering::Less => q,
        std::cmp::Ordering::Greater => q + 1,
        std::cmp::Ordering::Equal => {
            if q.is_even() {
                q
            } else {
                q + 1
            }
        }
    }
}

/// Digits `s` (no sign) times `10^(e - len + 1)` in positional notation.
fn plain(s: &str, e: i32) -> String {
    let len = s.len() as i32;
    let out = if e < 0 {
        format!("0.{}{}", "0".repeat((-e - 1) as usize), s)
    } else if e + 1 >= len {
        format!("{}{}", s, "0".repeat((e + 1 - len) as usize))
    } else {
        format!("{}.{}", &s[..(e + 1) as usize], &s[(e + 1) as usize..])
    };
    trim(&out)
}

fn trim(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

/// One row of the value table.
#[derive(Clone, Debug, PartialEq)]
pub struct ValueRow {
    pub m: usize,
    pub omega_c: Rational,
    pub omega_q: f64,
    pub theta_star: f64,
    pub omega_ns: Rational,
    /// `ω_q - ω_c`.
    pub advantage: f64,
    /// `ω_q - 1/2`, resolved where `omega_q` has rounded to `0.5`.
    pub above_half: f64,
}

/// Rows for `m_min..=m_max`, `2 <= m_min <= m_max <= 64`.
pub fn value_rows(m_min: usize, m_max: usize) -> Result<Vec<ValueRow>> {
    check_range(m_min, 2, MAX_TABLE_M)?;
    check_range(m_max, m_min, MAX_TABLE_M)?;
    (m_min..=m_max)
        .into_par_iter()
        .map(|m| {
            let q = quantum_value(m)?;
            Ok(ValueRow {
                m,
                omega_c: classical_value_formula(m),
                omega_q: q.value,
                theta_star: q.theta_star,
                omega_ns: Rational::one(),
                advantage: q.advantage,
                above_half: q.above_half(),
            })
        })
        .collect()
}

fn rational_string(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// `m,omega_c,omega_c_exact,omega_q,theta_star,omega_ns,advantage`.
pub fn rows_to_csv(rows: &[ValueRow]) -> String {
    let mut out = String::from("m,omega_c,omega_c_exact,omega_q,theta_star,omega_ns,advantage\n");
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.m,
            fmt_rational_sig(&r.omega_c),
            rational_string(&r.omega_c),
            fmt_sig(r.omega_q),
            fmt_sig(r.theta_star),
            fmt_rational_sig(&r.omega_ns),
            fmt_sig(r.advantage)
        )
        .expect("write to string");
    }
    out
}

/// A decimal rendered to [`SIG_DIGITS`] as a JSON number.
fn sig_number(s: &str) -> Value {
    let x: f64 = s.parse().expect("rendered decimal");
    serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
}

/// Pretty JSON array with one object per row; rationals also given exactly.
pub fn rows_to_json(rows: &[ValueRow]) -> String {
    let items: Vec<Value> = rows
        .iter()
        .map(|r| {
            serde_json::json!({
                "m": r.m,
                "omega_c": sig_number(&fmt_rational_sig(&r.omega_c)),
                "omega_c_exact": rational_string(&r.omega_c),
                "omega_q": sig_number(&fmt_sig(r.omega_q)),
                "theta_star": sig_number(&fmt_sig(r.theta_star)),
                "omega_ns": sig_number(&fmt_rational_sig(&r.omega_ns)),
                "omega_ns_exact": rational_string(&r.omega_ns),
                "advantage": sig_number(&fmt_sig(r.advantage)),
            })
        })
        .collect();
    let mut s = serde_json::to_string_pretty(&items).expect("serializable");
    s.push('\n');
    s
}

/// `m,classical,quantum,nosignalling`, formatted exactly as in [`rows_to_csv`].
pub fn figure3_csv(rows: &[ValueRow]) -> String {
    let mut out = String::from("m,classical,quantum,nosignalling\n");
    for r in rows {
        writeln!(out, "{},{},{},{}", r.m, fmt_rational_sig(&r.omega_c), fmt_sig(r.omega_q), fmt_rational_sig(&r.omega_ns))
            .expect("write to string");
    }
    out
}

/// Row invariants: `ω_c < ω_q < ω_ns = 1`, and `ω_q` strictly decreasing in `m`.
pub fn check_rows(rows: &[ValueRow]) -> Vec<CheckRecord> {
    let mut checks = Vec::new();
    for r in rows {
        checks.push(CheckRecord::at_least(format!("m={}/advantage_positive", r.m), 0.0, r.advantage, 0.0).strict());
        checks.push(CheckRecord::exact(
            format!("m={}/omega_ns", r.m),
            rational_string(&Rational::one()),
            rational_string(&r.omega_ns),
            r.omega_ns == Rational::one(),
        ));
        checks.push(CheckRecord::at_least(format!("m={}/omega_q_below_one", r.m), r.omega_q, 1.0, 0.0).strict());
    }
    for w in rows.windows(2) {
        let name = format!("m={}->{}/omega_q_decreasing", w[0].m, w[1].m);
        checks.push(CheckRecord::at_least(name, w[1].above_half, w[0].above_half, 0.0).strict());
    }
    checks
}

/// One verified quantity.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckRecord {
    pub name: String,
    pub expected: Value,
    pub actual: Value,
    pub tolerance: f64,
    /// Slack left before the check fails; negative on failure.
    pub margin: f64,
    pub pass: bool,
}

fn num(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or_else(|| Value::String(x.to_string()), Value::Number)
}

impl CheckRecord {
    /// `|actual - expected| <= tolerance`.
    pub fn close(name: impl Into<String>, expected: f64, actual: f64, tolerance: f64) -> Self {
        let margin = tolerance - (actual - expected).abs();
        Self { name: name.into(), expected: num(expected), actual: num(actual), tolerance, margin, pass: margin >= 0.0 }
    }

    /// `actual >= bound - tolerance`.
    pub fn at_least(name: impl Into<String>, bound: f64, actual: f64, tolerance: f64) -> Self {
        let margin = actual - bound + tolerance;
        Self { name: name.into(), expected: num(bound), actual: num(actual), tolerance, margin, pass: margin >= 0.0 }
    }

    /// `actual <= bound + tolerance`.
    pub fn at_most(name: impl Into<String>, bound: f64, actual: f64, tolerance: f64) -> Self {
        let margin = bound + tolerance - actual;
        Self { name: name.into(), expected: num(bound), actual: num(actual), tolerance, margin, pass: margin >= 0.0 }
    }

    /// Turns a non-strict comparison with zero tolerance into a strict one.
    pub fn strict(mut self) -> Self {
        self.pass = self.margin > 0.0;
        self
    }

    /// Exact comparison of rendered values.
    pub fn exact(name: impl Into<String>, expected: impl Into<Value>, actual: impl Into<Value>, pass: bool) -> Self {
        Self {
            name: name.into(),
            expected: expected.into(),
            actual: actual.into(),
            tolerance: 0.0,
            margin: if pass { 0.0 } else { -1.0 },
            pass,
        }
    }

    /// A boolean property.
    pub fn holds(name: impl Into<String>, pass: bool) -> Self {
        Self::exact(name, true, pass, pass)
    }
}

/// Result of one verification suite.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerificationReport {
    pub suite: String,
    pub seed: u64,
    pub pass: bool,
    pub summary: Map<String, Value>,
    pub checks: Vec<CheckRecord>,
}

impl VerificationReport {
    pub fn new(suite: impl Into<String>, seed: u64) -> Self {
        Self { suite: suite.into(), seed, pass: true, summary: Map::new(), checks: Vec::new() }
    }

    pub fn push(&mut self, check: CheckRecord) {
        self.pass &= check.pass;
        self.checks.push(check);
    }

    pub fn note(&mut self, key: &str, value: impl Into<Value>) {
        self.summary.insert(key.into(), value.into());
    }

    /// Folds another report in, prefixing its check names and summary keys with its suite.
    pub fn absorb(&mut self, other: VerificationReport) {
        self.summary.insert(other.suite.clone(), Value::Object(other.summary));
        self.summary.insert(format!("{}_pass", other.suite), Value::Bool(other.pass));
        for mut c in other.checks {
            c.name = format!("{}/{}", other.suite, c.name);
            self.push(c);
        }
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckRecord> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("serializable");
        s.push('\n');
        s
    }
}

/// Parses `A..B` or `A..=B` (both inclusive) or a single `A`.
pub fn parse_m_range(s: &str) -> Result<(usize, usize)> {
    let bad = || Error::Malformed(format!("bad range {s:?}; expected A..B"));
    let (a, b) = match s.split_once("..") {
        Some((a, b)) => (a, b.trim_start_matches('=')),
        None => (s, s),
    };
    let a: usize = a.trim().parse().map_err(|_| bad())?;
    let b: usize = b.trim().parse().map_err(|_| bad())?;
    if a > b {
        return Err(bad());
    }
    Ok((a, b))
}
