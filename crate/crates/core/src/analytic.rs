//! Numerical side: `L(1, χ)` by truncated summation, the logarithmic mean
//! of a modified character against its Euler-factor prediction, the mean
//! value in the principal case, and the base-`q` digit lower bound for the
//! minimal −1 count.

use std::fmt;
use std::ops::{Add, Sub};

use rayon::prelude::*;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::arith::is_prime;
use crate::characters::{ModifiedCharacter, RealCharacter, SignFunction};
use crate::patterns::{self, PatternError};

/// Tolerance used for `L(1, χ)` inside log-mean reports.
pub const DEFAULT_L_TOLERANCE: f64 = 1e-7;

const MAX_L_TERMS: u64 = 4_000_000_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalyticError {
    #[error("L(1, χ) diverges for a principal character")]
    PrincipalCharacter,
    #[error("expected a principal base character")]
    NotPrincipal,
    #[error("tolerance must be positive and finite, got {0}")]
    InvalidTolerance(f64),
    #[error("tolerance {0} needs more than {MAX_L_TERMS} terms")]
    ToleranceTooFine(f64),
    #[error("{0} is not an odd prime")]
    NotOddPrime(u64),
    #[error("length {l} must be below the modulus {q}")]
    LengthOutOfRange { l: u64, q: u64 },
    #[error("the digit bound needs q < k (q = {q}, k = {k})")]
    Regime { q: u64, k: u64 },
    #[error("{0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Pattern(#[from] PatternError),
}

/// Neumaier-compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(self) -> f64 {
        self.sum + self.carry
    }
}

/// Harmonic-type sum `Σ_{n=N}^{1} v(n)/n`, accumulated from the top down.
fn descending_sum(values: impl DoubleEndedIterator<Item = (u64, i8)>) -> f64 {
    let mut acc = CompensatedSum::default();
    for (n, v) in values.rev() {
        if v != 0 {
            acc.add(v as f64 / n as f64);
        }
    }
    acc.value()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LValue {
    pub value: f64,
    /// Certified bound on `|L(1, χ) - value|`.
    pub error_bound: f64,
    pub terms: u64,
}

/// `L(1, χ) ≈ Σ_{n <= M} χ(n)/n` with `M` the least multiple of `q` with
/// `q/M <= tol`.
///
/// Partial sums of a non-principal character over any interval are at most
/// `q` in size, so partial summation bounds the tail by `q/M`.
pub fn l_value(chi: &RealCharacter, tol: f64) -> Result<LValue, AnalyticError> {
    if chi.is_principal() {
        return Err(AnalyticError::PrincipalCharacter);
    }
    if !(tol.is_finite() && tol > 0.0) {
        return Err(AnalyticError::InvalidTolerance(tol));
    }
    let q = chi.modulus();
    let needed = (q as f64 / tol).ceil();
    if needed > MAX_L_TERMS as f64 {
        return Err(AnalyticError::ToleranceTooFine(tol));
    }
    let terms = (needed as u64).div_ceil(q).max(1) * q;
    let value = descending_sum((1..=terms).map(|n| (n, chi.value(n))));
    Ok(LValue {
        value,
        error_bound: q as f64 / terms as f64,
        terms,
    })
}

/// `Π_{p | q} (1 - η(p)/p)^{-1}`, so that `L(1, χ̃) = euler_factor · L(1, χ)`.
pub fn euler_factor(chi: &ModifiedCharacter) -> f64 {
    chi.eta()
        .iter()
        .map(|&(p, s)| 1.0 / (1.0 - s as f64 / p as f64))
        .product()
}

fn serialize_eta<S: Serializer>(eta: &[(u64, i8)], s: S) -> Result<S::Ok, S::Error> {
    s.collect_map(eta.iter().map(|(p, v)| (p.to_string(), v)))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LogMeanReport {
    pub q: u64,
    #[serde(serialize_with = "serialize_eta")]
    pub eta: Vec<(u64, i8)>,
    #[serde(rename = "Q")]
    pub big_q: u64,
    /// `(1/log Q) Σ_{n <= Q} χ̃(n)/n`
    pub lhs: f64,
    /// `(1/log Q) · euler_factor · L(1, χ)`
    pub rhs: f64,
    pub diff: f64,
    /// `q · Q^{-1/8}`
    pub bound_scale: f64,
    /// `diff / bound_scale`
    pub ratio: f64,
    pub l_value: LValue,
}

/// Reports for each `Q` in `points`, sharing one `L(1, χ)` evaluation.
pub fn log_mean_sweep(
    chi: &ModifiedCharacter,
    points: &[u64],
    tol: f64,
) -> Result<Vec<LogMeanReport>, AnalyticError> {
    if let Some(&bad) = points.iter().find(|&&big_q| big_q < 10) {
        return Err(AnalyticError::InvalidArgument(format!("Q must be at least 10, got {bad}")));
    }
    let l = l_value(chi.base(), tol)?;
    let top = points.iter().copied().max().unwrap_or(0);
    let values: Vec<i8> = (1..=top).into_par_iter().map(|n| chi.value(n)).collect();
    let factor = euler_factor(chi);
    let q = chi.modulus();
    Ok(points
        .par_iter()
        .map(|&big_q| {
            let log_q = (big_q as f64).ln();
            let sum = descending_sum((1..=big_q).map(|n| (n, values[n as usize - 1])));
            let lhs = sum / log_q;
            let rhs = factor * l.value / log_q;
            let diff = (lhs - rhs).abs();
            let bound_scale = q as f64 * (big_q as f64).powf(-0.125);
            LogMeanReport {
                q,
                eta: chi.eta().to_vec(),
                big_q,
                lhs,
                rhs,
                diff,
                bound_scale,
                ratio: diff / bound_scale,
                l_value: l,
            }
        })
        .collect())
}

pub fn log_mean_report(chi: &ModifiedCharacter, big_q: u64) -> Result<LogMeanReport, AnalyticError> {
    Ok(log_mean_sweep(chi, &[big_q], DEFAULT_L_TOLERANCE)?.remove(0))
}

/// Mean value of `χ̃` over a principal base:
/// `Π_{p | q} (1 - 1/p) / (1 - η(p)/p)`.
pub fn principal_mean(chi: &ModifiedCharacter) -> Result<f64, AnalyticError> {
    if chi.base().kind() != crate::characters::CharacterKind::Principal {
        return Err(AnalyticError::NotPrincipal);
    }
    Ok(chi
        .eta()
        .iter()
        .map(|&(p, s)| {
            let p = p as f64;
            (1.0 - 1.0 / p) / (1.0 - s as f64 / p)
        })
        .product())
}

/// Limiting average of the window sum `Σ_{m<k} χ̃(n+m)`, i.e. `k` times
/// [`principal_mean`].
pub fn principal_window_mean(chi: &ModifiedCharacter, k: u64) -> Result<f64, AnalyticError> {
    Ok(k as f64 * principal_mean(chi)?)
}

/// `(1/N) Σ_{n <= N} f(n)`.
pub fn empirical_mean<F: SignFunction>(f: &F, n: u64) -> f64 {
    let total: i64 = (1..=n).into_par_iter().map(|m| f.value(m) as i64).sum();
    total as f64 / n as f64
}

/// A number of the form `m/2`, stored as `m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HalfInt(i64);

impl HalfInt {
    pub fn from_twice(twice: i64) -> Self {
        HalfInt(twice)
    }

    pub fn from_int(n: i64) -> Self {
        HalfInt(2 * n)
    }

    pub fn twice(self) -> i64 {
        self.0
    }

    pub fn to_f64(self) -> f64 {
        self.0 as f64 / 2.0
    }
}

impl Add for HalfInt {
    type Output = HalfInt;
    fn add(self, rhs: Self) -> Self {
        HalfInt(self.0 + rhs.0)
    }
}

impl Sub for HalfInt {
    type Output = HalfInt;
    fn sub(self, rhs: Self) -> Self {
        HalfInt(self.0 - rhs.0)
    }
}

impl fmt::Display for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.0 < 0 { "-" } else { "" };
        let a = self.0.unsigned_abs();
        if a.is_multiple_of(2) {
            write!(f, "{sign}{}", a / 2)
        } else {
            write!(f, "{sign}{}.5", a / 2)
        }
    }
}

impl Serialize for HalfInt {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.0 % 2 == 0 {
            s.serialize_i64(self.0 / 2)
        } else {
            s.serialize_f64(self.to_f64())
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DigitDecomposition {
    pub k: u64,
    pub q: u64,
    /// `a_0, …, a_ν` with `a_ν != 0`.
    pub digits: Vec<u64>,
    /// `k_j = Σ_{i >= j} a_i q^{i-j}`, so `k_0 = k`.
    pub levels: Vec<u64>,
}

impl DigitDecomposition {
    /// Index of the leading digit.
    pub fn top(&self) -> usize {
        self.digits.len() - 1
    }
}

pub fn digits_base_q(k: u64, q: u64) -> Result<DigitDecomposition, AnalyticError> {
    if k == 0 || q < 2 {
        return Err(AnalyticError::InvalidArgument(format!("need k >= 1 and q >= 2 (k = {k}, q = {q})")));
    }
    let mut digits = Vec::new();
    let mut levels = Vec::new();
    let mut rest = k;
    while rest > 0 {
        levels.push(rest);
        digits.push(rest % q);
        rest /= q;
    }
    Ok(DigitDecomposition { k, q, digits, levels })
}

fn check_odd_prime(q: u64) -> Result<(), AnalyticError> {
    if q.is_multiple_of(2) || !is_prime(q) {
        return Err(AnalyticError::NotOddPrime(q));
    }
    Ok(())
}

/// `max_{q-l <= n <= q} Σ_{m=0}^{l} χ_q(n+m)` for the Legendre character,
/// which vanishes at multiples of `q`.
pub fn s_prime(q: u64, l: u64) -> Result<i64, AnalyticError> {
    check_odd_prime(q)?;
    if l >= q {
        return Err(AnalyticError::LengthOutOfRange { l, q });
    }
    let chi = RealCharacter::kronecker(q).expect("odd prime modulus");
    Ok((q - l..=q)
        .map(|n| (0..=l).map(|m| chi.value(n + m) as i64).sum::<i64>())
        .max()
        .expect("nonempty range"))
}

/// `(l - S'_q(l)) / 2`.
pub fn delta_prime(q: u64, l: u64) -> Result<HalfInt, AnalyticError> {
    Ok(HalfInt::from_twice(l as i64 - s_prime(q, l)?))
}

/// How the window-sum term for the leading digit is bounded.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TopTerm {
    /// Proven cap: `min(a_ν, 2)` for `q = 3`, the trivial `a_ν` otherwise.
    ProvenCap,
    /// Best window sum found by scanning the modified character with
    /// `η(q) = eta`. Only a lower estimate of the true maximum, so the
    /// resulting bound is not certified.
    Empirical { eta: i64, search_bound: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DigitBound {
    pub q: u64,
    pub k: u64,
    pub decomposition: DigitDecomposition,
    /// `S'_q(a_i)` for `i < ν`.
    pub s_prime_terms: Vec<i64>,
    /// Value used for the leading-digit window sum.
    pub top_term: i64,
    /// `½(q-1) Σ_{i>=1} k_i + ½(Σ a_i - Σ_{i<ν} S'_q(a_i) - top_term)`
    pub value: HalfInt,
    pub certified: bool,
    /// `½k - ½(⌊log_3 k⌋ + 2)`, for `q = 3` only.
    pub closed_form: Option<HalfInt>,
}

pub fn digit_lower_bound(q: u64, k: u64, top: TopTerm) -> Result<DigitBound, AnalyticError> {
    check_odd_prime(q)?;
    if q >= k {
        return Err(AnalyticError::Regime { q, k });
    }
    let decomposition = digits_base_q(k, q)?;
    let nu = decomposition.top();
    let digits = &decomposition.digits;
    let s_prime_terms = digits[..nu]
        .iter()
        .map(|&a| s_prime(q, a))
        .collect::<Result<Vec<_>, _>>()?;
    let leading = digits[nu];
    let (top_term, certified) = match top {
        TopTerm::ProvenCap => (if q == 3 { leading.min(2) } else { leading } as i64, true),
        TopTerm::Empirical { eta, search_bound } => {
            let chi = ModifiedCharacter::uniform(RealCharacter::kronecker(q).expect("odd prime"), eta)
                .map_err(|e| AnalyticError::InvalidArgument(e.to_string()))?;
            let est = patterns::min_minus_window(&chi, leading, search_bound)?;
            (est.best_window.window_sum, false)
        }
    };
    let complete: u64 = decomposition.levels[1..].iter().sum();
    let digit_sum: u64 = digits.iter().sum();
    let twice = (q as i64 - 1) * complete as i64 + digit_sum as i64
        - s_prime_terms.iter().sum::<i64>()
        - top_term;
    let closed_form = (q == 3).then(|| HalfInt::from_twice(k as i64 - (nu as i64 + 2)));
    Ok(DigitBound {
        q,
        k,
        decomposition,
        s_prime_terms,
        top_term,
        value: HalfInt::from_twice(twice),
        certified,
        closed_form,
    })
}
