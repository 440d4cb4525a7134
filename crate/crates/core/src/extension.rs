//! Extending a modified character to a function with `k` consecutive +1
//! values by flipping its sign at a few large primes.
//!
//! Take the window `{n+1, …, n+k}` with the fewest −1 values, say at offsets
//! `J = {a_1, …, a_r}`, and `r` distinct primes `p_j > k` not dividing `q`.
//! Any `n'` with
//!
//! * `n' ≡ n (mod q^β)`, β large enough that no `n+a` is divisible by a
//!   `q`-part that the congruence cannot see, and
//! * `n' + a_j ≡ p_j (mod p_j²)`, so `p_j ∥ n' + a_j`,
//!
//! has `χ̃(n'+a) = χ̃(n+a)` for every offset, `p_j` dividing only
//! `n'+a_j` in the window, and therefore `χ̃·λ_{P}` equal to +1 on
//! `{n'+1, …, n'+k}`. Every result is re-checked by direct evaluation.

use thiserror::Error;

use crate::arith::{crt_solve, is_prime, valuation_unchecked, ArithError, CongruenceSystem, MAX_MODULUS};
use crate::characters::{CMFunction, CharacterError, ModifiedCharacter};
use crate::patterns::{self, PatternError, WindowReport, MAX_ARGUMENT};

/// Bound on how many CRT solutions `n0, n0 + L, …` are tried.
pub const RETRY_CAP: u32 = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExtensionError {
    #[error("congruence modulus exceeds 2^63; try a smaller search bound or fewer primes")]
    Overflow,
    #[error("{0}")]
    InvalidInput(String),
    #[error("no verified window within {RETRY_CAP} CRT solutions")]
    RetryExhausted(Box<ExtensionPlan>),
    #[error(transparent)]
    Arith(ArithError),
    #[error(transparent)]
    Pattern(#[from] PatternError),
    #[error(transparent)]
    Character(#[from] CharacterError),
}

impl From<ArithError> for ExtensionError {
    fn from(e: ArithError) -> Self {
        match e {
            ArithError::Overflow => ExtensionError::Overflow,
            other => ExtensionError::Arith(other),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtensionPlan {
    pub chi: ModifiedCharacter,
    pub k: u64,
    /// Window of `chi` with the fewest −1 values.
    pub base_window: WindowReport,
    /// Offsets of the −1 values in `base_window`.
    pub offsets: Vec<u64>,
    /// `primes[j]` is flipped to fix offset `offsets[j]`.
    pub primes: Vec<u64>,
    pub q_power_exponent: u32,
    pub crt: CongruenceSystem,
    pub crt_modulus: u64,
    pub witness: u64,
    pub verified: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Extension {
    pub f: CMFunction,
    pub plan: ExtensionPlan,
}

impl Extension {
    pub fn witness(&self) -> u64 {
        self.plan.witness
    }
}

/// The `r` smallest primes greater than `k` that do not divide `q`.
pub fn select_primes(k: u64, q: u64, r: usize) -> Vec<u64> {
    (k + 1..)
        .filter(|&p| !q.is_multiple_of(p) && is_prime(p))
        .take(r)
        .collect()
}

fn checked_pow(base: u64, exp: u32) -> Option<u64> {
    base.checked_pow(exp).filter(|&v| v <= MAX_MODULUS)
}

/// Least β >= 1 with `p^((β-1)·e_p + 1) > n + k` for every `p^e_p ∥ q`.
///
/// For prime `q` this is the least β with `q^β > n + k`. It guarantees
/// `v_p(n+a) <= (β-1)·e_p` on the window, so reducing mod `q^β` fixes both
/// the `q`-part of `n+a` and its cofactor modulo `q`.
pub fn q_power_exponent(q: u64, n: u64, k: u64) -> Result<u32, ExtensionError> {
    let top = n.checked_add(k).ok_or(ExtensionError::Overflow)?;
    let factors = crate::arith::factorize(q)?;
    let mut beta = 1u32;
    for &(p, e) in factors.factors() {
        // smallest t with p^t > top, then (β-1)e + 1 >= t
        let mut t = 0u32;
        let mut pow = 1u128;
        while pow <= top as u128 {
            pow *= p as u128;
            t += 1;
        }
        let need = if t <= 1 { 1 } else { (t - 1).div_ceil(e) + 1 };
        beta = beta.max(need);
    }
    Ok(beta)
}

/// Congruences `n' ≡ n (mod q^β)` and `n' ≡ p_j - a_j (mod p_j²)`.
pub fn build_crt(
    n: u64,
    offsets: &[u64],
    primes: &[u64],
    q: u64,
    k: u64,
) -> Result<(CongruenceSystem, u32), ExtensionError> {
    if offsets.len() != primes.len() {
        return Err(ExtensionError::InvalidInput(format!(
            "{} offsets but {} primes",
            offsets.len(),
            primes.len()
        )));
    }
    for (i, &p) in primes.iter().enumerate() {
        if !is_prime(p) || p <= k || q.is_multiple_of(p) || primes[..i].contains(&p) {
            return Err(ExtensionError::InvalidInput(format!(
                "{p} is not a distinct prime > {k} coprime to {q}"
            )));
        }
    }
    if let Some(&a) = offsets.iter().find(|&&a| a == 0 || a > k) {
        return Err(ExtensionError::InvalidInput(format!("offset {a} outside 1..={k}")));
    }
    let mut sys = CongruenceSystem::new();
    let mut beta = 0;
    if q > 1 {
        beta = q_power_exponent(q, n, k)?;
        let modulus = checked_pow(q, beta).ok_or(ExtensionError::Overflow)?;
        sys.push(n % modulus, modulus)?;
    }
    for (&a, &p) in offsets.iter().zip(primes) {
        let modulus = checked_pow(p, 2).ok_or(ExtensionError::Overflow)?;
        sys.push(p - a, modulus)?;
    }
    Ok((sys, beta))
}

/// Checks the window `{n'+1, …, n'+k}` of `f = χ̃·λ_P` directly, together
/// with the structural facts the construction relies on.
pub fn verify_plan(plan: &ExtensionPlan) -> bool {
    let Ok(f) = CMFunction::new(plan.chi.clone(), plan.primes.iter().copied()) else {
        return false;
    };
    let (n, n_prime, k) = (plan.base_window.start, plan.witness, plan.k);
    if n_prime.checked_add(k).is_none_or(|end| end > MAX_ARGUMENT) {
        return false;
    }
    for a in 1..=k {
        let m = n_prime + a;
        if f.value(m) != 1 {
            return false;
        }
        let hits: Vec<usize> = plan
            .primes
            .iter()
            .enumerate()
            .filter(|(_, &p)| m % p == 0)
            .map(|(j, _)| j)
            .collect();
        match plan.offsets.iter().position(|&o| o == a) {
            Some(j) => {
                if hits != [j] || valuation_unchecked(m, plan.primes[j]).is_multiple_of(2) {
                    return false;
                }
            }
            None => {
                if !hits.is_empty() || plan.chi.value(m) != plan.chi.value(n + a) {
                    return false;
                }
            }
        }
    }
    true
}

// Plan for one base window: CRT solutions n0, n0 + L, … up to the retry cap.
fn plan_for(chi: &ModifiedCharacter, k: u64, base_window: WindowReport, primes: &[u64]) -> Result<ExtensionPlan, ExtensionError> {
    let offsets = base_window.minus_offsets();
    let (crt, beta) = build_crt(base_window.start, &offsets, primes, chi.modulus(), k)?;
    let (first, crt_modulus) = crt_solve(&crt)?;
    let mut plan = ExtensionPlan {
        chi: chi.clone(),
        k,
        base_window,
        offsets,
        primes: primes.to_vec(),
        q_power_exponent: beta,
        crt,
        crt_modulus,
        witness: first,
        verified: false,
    };
    for step in 0..RETRY_CAP as u64 {
        let Some(candidate) = crt_modulus.checked_mul(step).and_then(|d| d.checked_add(first)) else {
            break;
        };
        plan.witness = candidate;
        if verify_plan(&plan) {
            plan.verified = true;
            return Ok(plan);
        }
    }
    plan.witness = first;
    Err(ExtensionError::RetryExhausted(Box::new(plan)))
}

/// Builds a function over `chi` with `k` consecutive +1 values, flipping as
/// few primes as the best window within `search_bound` allows.
///
/// Every window attaining the minimum is a valid base; the one whose verified
/// witness `n'` is least wins. Since `n' ≡ n (mod q^β)` with `q^β > n`, a
/// base at `n` never yields `n' < n`, which bounds the search.
pub fn extend(chi: &ModifiedCharacter, k: u64, search_bound: u64) -> Result<Extension, ExtensionError> {
    if k == 0 {
        return Err(ExtensionError::InvalidInput("k must be positive".into()));
    }
    let q = chi.modulus();
    let estimate = patterns::min_minus_window_par(chi, k, search_bound)?;
    let primes = select_primes(k, q, estimate.value as usize);
    let starts = patterns::starts_with_sum(chi, k, search_bound, estimate.best_window.window_sum)?;
    let mut best: Option<ExtensionPlan> = None;
    let mut first_err = None;
    for n in starts {
        if best.as_ref().is_some_and(|b| q > 1 && n > b.witness) {
            break;
        }
        let window = patterns::sign_pattern(chi, n, k)?;
        match plan_for(chi, k, window, &primes) {
            Ok(plan) => {
                if best.as_ref().is_none_or(|b| plan.witness < b.witness) {
                    best = Some(plan);
                }
            }
            Err(e) => {
                first_err.get_or_insert(e);
            }
        }
    }
    match best {
        Some(plan) => {
            let f = CMFunction::new(chi.clone(), plan.primes.iter().copied())?;
            Ok(Extension { f, plan })
        }
        None => Err(first_err.expect("the minimizing window is always a candidate")),
    }
}

/// Number of flipped primes `p > k` with `p ∤ q`.
pub fn jset_size(f: &CMFunction, k: u64) -> usize {
    let q = f.modulus();
    f.flips().iter().filter(|&&p| p > k && !q.is_multiple_of(p)).count()
}
