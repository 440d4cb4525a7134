//! Known functions of small length and a harness that checks their runs.

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::arith::is_prime;
use crate::characters::{CMFunction, CharacterKind, ModifiedCharacter, RealCharacter};
use crate::patterns::longest_run;

pub const DEFAULT_LIMIT: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CatalogError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("{0} is not congruent to 2 mod 5")]
    WrongResidue(u64),
    #[error("limit must be at least 1000, got {0}")]
    LimitTooSmall(u64),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CatalogEntry {
    pub name: String,
    pub f: CMFunction,
    pub claimed_length: u64,
    pub source: String,
}

fn modified(q: u64, kind: CharacterKind, sign: i64) -> ModifiedCharacter {
    let base = RealCharacter::new(q, kind).expect("catalog moduli are valid");
    ModifiedCharacter::uniform(base, sign).expect("catalog signs are ±1")
}

fn entry(name: String, chi: ModifiedCharacter, claimed_length: u64, source: &str) -> CatalogEntry {
    CatalogEntry {
        name,
        f: CMFunction::unflipped(chi),
        claimed_length,
        source: source.to_string(),
    }
}

/// The two length-2 functions: Legendre mod 3 with `f(3) = (-1)^i`.
pub fn schur_functions() -> Vec<CatalogEntry> {
    (1..=2)
        .map(|i| {
            let sign = if i % 2 == 0 { 1 } else { -1 };
            entry(
                format!("schur_f{i}"),
                modified(3, CharacterKind::Kronecker, sign),
                2,
                "Schur",
            )
        })
        .collect()
}

/// The thirteen length-3 functions, in the order `f_(q,i)` for
/// `q ∈ {5, 7, 11, 13, 53}`, then `f_(4,i)`, then `g`.
pub fn hudson_functions() -> Vec<CatalogEntry> {
    const SOURCE: &str = "Hudson";
    let mut out = Vec::with_capacity(13);
    for q in [5u64, 7, 11, 13, 53, 4] {
        for i in 1..=2 {
            let sign = if i % 2 == 0 { 1 } else { -1 };
            out.push(entry(
                format!("f_({q},{i})"),
                modified(q, CharacterKind::Kronecker, sign),
                3,
                SOURCE,
            ));
        }
    }
    out.push(entry("g".into(), modified(2, CharacterKind::Principal, -1), 3, SOURCE));
    out
}

/// Legendre mod 5 with `f(5) = 1`, flipped at one prime `p0 ≡ 2 (mod 5)`.
pub fn length4_family(p0: u64) -> Result<CatalogEntry, CatalogError> {
    if !is_prime(p0) {
        return Err(CatalogError::NotPrime(p0));
    }
    if p0 % 5 != 2 {
        return Err(CatalogError::WrongResidue(p0));
    }
    let f = CMFunction::new(modified(5, CharacterKind::Kronecker, 1), [p0]).expect("p0 is coprime to 5");
    Ok(CatalogEntry {
        name: format!("length4_p{p0}"),
        f,
        claimed_length: 4,
        source: "length-4 family over the Legendre symbol mod 5".into(),
    })
}

/// Schur, Hudson and the length-4 family member at `p0 = 7`.
pub fn default_catalog() -> Vec<CatalogEntry> {
    let mut all = schur_functions();
    all.extend(hudson_functions());
    all.push(length4_family(7).expect("7 is admissible"));
    all
}

/// Checks by exhaustion that no completely multiplicative ±1 function has
/// length 1: one of `(f(1), f(2))`, `(f(4), f(5))`, `(f(9), f(10))` is
/// always `(+1, +1)`.
pub fn no_length1_check() -> bool {
    [1i8, -1].iter().all(|&f2| {
        [1i8, -1].iter().all(|&f5| {
            let (f1, f4, f9) = (1, f2 * f2, 1);
            let f10 = f2 * f5;
            (f1 == 1 && f2 == 1) || (f4 == 1 && f5 == 1) || (f9 == 1 && f10 == 1)
        })
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LengthCheck {
    pub name: String,
    pub function: String,
    pub claimed_length: u64,
    pub observed_length: u64,
    /// Least `n` with `f = +1` on `{n+1, …, n+observed_length}`.
    pub witness: u64,
    /// A run of the claimed length exists below the limit.
    pub reaches_claim: bool,
    /// No longer run exists below the limit. Evidence only, not a proof.
    pub no_longer_run_below_limit: bool,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct KnownLengthReport {
    pub limit: u64,
    pub rows: Vec<LengthCheck>,
    pub all_pass: bool,
    pub note: String,
}

impl KnownLengthReport {
    pub fn failures(&self) -> impl Iterator<Item = &LengthCheck> {
        self.rows.iter().filter(|r| !r.pass)
    }
}

/// Runs [`longest_run`] on every entry up to `limit`, in parallel; rows keep
/// catalog order.
pub fn verify_known_lengths(entries: &[CatalogEntry], limit: u64) -> Result<KnownLengthReport, CatalogError> {
    if limit < 1000 {
        return Err(CatalogError::LimitTooSmall(limit));
    }
    let rows: Vec<LengthCheck> = entries
        .par_iter()
        .map(|e| {
            let (observed, witness) = longest_run(&e.f, limit);
            let reaches_claim = observed >= e.claimed_length;
            let no_longer = observed <= e.claimed_length;
            LengthCheck {
                name: e.name.clone(),
                function: e.f.to_string(),
                claimed_length: e.claimed_length,
                observed_length: observed,
                witness,
                reaches_claim,
                no_longer_run_below_limit: no_longer,
                pass: reaches_claim && no_longer,
            }
        })
        .collect();
    let all_pass = rows.iter().all(|r| r.pass);
    Ok(KnownLengthReport {
        limit,
        rows,
        all_pass,
        note: format!("absence of longer runs is checked on [1, {limit}] only"),
    })
}
