//! Real characters, modified characters and completely multiplicative
//! ±1 functions built from them.
//!
//! A [`CMFunction`] is stored by its defining data (base character, the
//! signs at primes dividing the modulus, and a finite set of flipped primes)
//! and evaluated on demand. Evaluation only needs the valuations at the
//! primes dividing the modulus and at the flipped primes, plus one residue
//! lookup for the remaining cofactor, so it is exact for every `n < 2^64`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::{self, gcd, is_prime, kronecker, valuation_unchecked, ArithError};

const TABLE_LIMIT: u64 = 1 << 22;
const MAX_KRONECKER_MODULUS: u64 = 1 << 60;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CharacterError {
    #[error("the modulus must be at least 1")]
    ZeroModulus,
    #[error("modulus {0} is too large for a Kronecker character")]
    ModulusTooLarge(u64),
    #[error("functions are evaluated at positive integers only")]
    ZeroArgument,
    #[error("eta key {0} is not prime")]
    EtaKeyNotPrime(u64),
    #[error("eta key {prime} does not divide the modulus {modulus}")]
    EtaKeyNotDivisor { prime: u64, modulus: u64 },
    #[error("missing eta for prime divisor {0} of the modulus")]
    MissingEta(u64),
    #[error("sign must be +1 or -1, got {0}")]
    InvalidSign(i64),
    #[error("flipped value {0} is not prime")]
    FlipNotPrime(u64),
    #[error("flipped prime {prime} divides the modulus {modulus}")]
    FlipDividesModulus { prime: u64, modulus: u64 },
    #[error("products are only defined for functions over the same modified character")]
    BaseMismatch,
    #[error(transparent)]
    Arith(#[from] ArithError),
}

/// Anything that assigns a sign to every positive integer.
pub trait SignFunction: Sync {
    /// Value at `n >= 1`. Callers guarantee `n != 0`.
    fn value(&self, n: u64) -> i8;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CharacterKind {
    Principal,
    Kronecker,
}

impl fmt::Display for CharacterKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CharacterKind::Principal => write!(f, "principal"),
            CharacterKind::Kronecker => write!(f, "kronecker"),
        }
    }
}

/// A real Dirichlet character modulo `q`.
///
/// The Kronecker kind is `n ↦ (D/n)` on integers coprime to `q`, where
/// `q = 2^e·m` with `m` odd, `m* = ±m ≡ 1 (mod 4)`, and `D = m*` for
/// `e <= 1`, `D = -4·m*` for `e >= 2`. For odd `q` this is the Jacobi symbol
/// `(n/q)`; for `q = 4` it is the nontrivial character mod 4.
#[derive(Clone)]
pub struct RealCharacter {
    modulus: u64,
    kind: CharacterKind,
    discriminant: i64,
    prime_divisors: Vec<u64>,
    table: Option<Arc<[i8]>>,
}

impl fmt::Debug for RealCharacter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RealCharacter")
            .field("modulus", &self.modulus)
            .field("kind", &self.kind)
            .field("discriminant", &self.discriminant)
            .finish()
    }
}

impl PartialEq for RealCharacter {
    fn eq(&self, other: &Self) -> bool {
        self.modulus == other.modulus && self.kind == other.kind
    }
}

impl Eq for RealCharacter {}

impl RealCharacter {
    pub fn new(modulus: u64, kind: CharacterKind) -> Result<Self, CharacterError> {
        if modulus == 0 {
            return Err(CharacterError::ZeroModulus);
        }
        let discriminant = match kind {
            CharacterKind::Principal => 1,
            CharacterKind::Kronecker => {
                if modulus > MAX_KRONECKER_MODULUS {
                    return Err(CharacterError::ModulusTooLarge(modulus));
                }
                let e = modulus.trailing_zeros();
                let m = (modulus >> e) as i64;
                let m_star = if m % 4 == 1 { m } else { -m };
                if e >= 2 {
                    -4 * m_star
                } else {
                    m_star
                }
            }
        };
        let prime_divisors = arith::prime_divisors(modulus)?;
        let mut chi = RealCharacter {
            modulus,
            kind,
            discriminant,
            prime_divisors,
            table: None,
        };
        if modulus <= TABLE_LIMIT {
            let table: Vec<i8> = (0..modulus).map(|r| chi.value_uncached(r)).collect();
            chi.table = Some(table.into());
        }
        Ok(chi)
    }

    pub fn principal(modulus: u64) -> Result<Self, CharacterError> {
        Self::new(modulus, CharacterKind::Principal)
    }

    pub fn kronecker(modulus: u64) -> Result<Self, CharacterError> {
        Self::new(modulus, CharacterKind::Kronecker)
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn kind(&self) -> CharacterKind {
        self.kind
    }

    /// `D` with `χ(n) = (D/n)` on integers coprime to the modulus.
    pub fn discriminant(&self) -> i64 {
        self.discriminant
    }

    pub fn prime_divisors(&self) -> &[u64] {
        &self.prime_divisors
    }

    /// True when the character is identically 1 on integers coprime to `q`.
    pub fn is_principal(&self) -> bool {
        match self.kind {
            CharacterKind::Principal => true,
            CharacterKind::Kronecker => {
                let d = self.discriminant;
                d > 0 && {
                    let r = (d as f64).sqrt() as i64;
                    (r.saturating_sub(1)..=r + 1).any(|s| s * s == d)
                }
            }
        }
    }

    fn value_uncached(&self, n: u64) -> i8 {
        if gcd(n, self.modulus) != 1 {
            return 0;
        }
        self.coprime_value_uncached(n)
    }

    fn coprime_value_uncached(&self, c: u64) -> i8 {
        match self.kind {
            CharacterKind::Principal => 1,
            CharacterKind::Kronecker => kronecker(self.discriminant, c),
        }
    }

    /// `χ(n)`, zero when `gcd(n, q) > 1`.
    pub fn value(&self, n: u64) -> i8 {
        match &self.table {
            Some(t) => t[(n % self.modulus) as usize],
            None => self.value_uncached(n),
        }
    }

    // c must be coprime to the modulus.
    #[inline]
    fn coprime_value(&self, c: u64) -> i8 {
        match &self.table {
            Some(t) => t[(c % self.modulus) as usize],
            None => self.coprime_value_uncached(c),
        }
    }
}

impl fmt::Display for RealCharacter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} mod {}", self.kind, self.modulus)
    }
}

fn check_sign(s: i64) -> Result<i8, CharacterError> {
    match s {
        1 => Ok(1),
        -1 => Ok(-1),
        other => Err(CharacterError::InvalidSign(other)),
    }
}

/// A real character whose values at primes dividing the modulus are
/// replaced by chosen signs `η(p)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModifiedCharacter {
    base: RealCharacter,
    eta: Vec<(u64, i8)>,
}

impl ModifiedCharacter {
    /// Fails unless `eta` has exactly the prime divisors of the modulus as
    /// keys, each mapped to ±1.
    pub fn new(base: RealCharacter, eta: &BTreeMap<u64, i64>) -> Result<Self, CharacterError> {
        for &p in eta.keys() {
            if !is_prime(p) {
                return Err(CharacterError::EtaKeyNotPrime(p));
            }
            if !base.modulus.is_multiple_of(p) {
                return Err(CharacterError::EtaKeyNotDivisor {
                    prime: p,
                    modulus: base.modulus,
                });
            }
        }
        let mut signs = Vec::with_capacity(base.prime_divisors.len());
        for &p in &base.prime_divisors {
            let s = *eta.get(&p).ok_or(CharacterError::MissingEta(p))?;
            signs.push((p, check_sign(s)?));
        }
        Ok(ModifiedCharacter { base, eta: signs })
    }

    pub fn from_pairs(base: RealCharacter, eta: &[(u64, i64)]) -> Result<Self, CharacterError> {
        Self::new(base, &eta.iter().copied().collect())
    }

    /// Same sign at every prime divisor; convenient for prime-power moduli.
    pub fn uniform(base: RealCharacter, sign: i64) -> Result<Self, CharacterError> {
        let eta: BTreeMap<u64, i64> = base.prime_divisors.iter().map(|&p| (p, sign)).collect();
        Self::new(base, &eta)
    }

    pub fn base(&self) -> &RealCharacter {
        &self.base
    }

    pub fn modulus(&self) -> u64 {
        self.base.modulus
    }

    /// `(p, η(p))` for each prime `p | q`, increasing in `p`.
    pub fn eta(&self) -> &[(u64, i8)] {
        &self.eta
    }

    pub fn eta_at(&self, p: u64) -> Option<i8> {
        self.eta.iter().find(|&&(q, _)| q == p).map(|&(_, s)| s)
    }

    pub fn eval(&self, n: u64) -> Result<i8, CharacterError> {
        if n == 0 {
            return Err(CharacterError::ZeroArgument);
        }
        Ok(self.value(n))
    }

    /// `χ̃(n)` for `n >= 1`.
    #[inline]
    pub fn value(&self, n: u64) -> i8 {
        debug_assert!(n != 0);
        let mut c = n;
        let mut sign = 1i8;
        for &(p, eta) in &self.eta {
            let mut v = 0u32;
            while c.is_multiple_of(p) {
                c /= p;
                v += 1;
            }
            if eta < 0 && v % 2 == 1 {
                sign = -sign;
            }
        }
        sign * self.base.coprime_value(c)
    }
}

impl SignFunction for ModifiedCharacter {
    fn value(&self, n: u64) -> i8 {
        ModifiedCharacter::value(self, n)
    }
}

impl fmt::Display for ModifiedCharacter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} [", self.base)?;
        for (i, (p, s)) in self.eta.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{p}={}", if *s > 0 { "+1" } else { "-1" })?;
        }
        write!(f, "]")
    }
}

/// `f = χ̃ · λ_S`: a modified character with its values flipped at the
/// primes of a finite set `S` coprime to the modulus.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CMFunction {
    chi: ModifiedCharacter,
    flips: Vec<u64>,
}

impl CMFunction {
    pub fn new(chi: ModifiedCharacter, flips: impl IntoIterator<Item = u64>) -> Result<Self, CharacterError> {
        let flips: BTreeSet<u64> = flips.into_iter().collect();
        for &p in &flips {
            if !is_prime(p) {
                return Err(CharacterError::FlipNotPrime(p));
            }
            if chi.modulus().is_multiple_of(p) {
                return Err(CharacterError::FlipDividesModulus {
                    prime: p,
                    modulus: chi.modulus(),
                });
            }
        }
        Ok(CMFunction {
            chi,
            flips: flips.into_iter().collect(),
        })
    }

    /// The modified character itself, no flips.
    pub fn unflipped(chi: ModifiedCharacter) -> Self {
        CMFunction { chi, flips: Vec::new() }
    }

    pub fn chi(&self) -> &ModifiedCharacter {
        &self.chi
    }

    pub fn modulus(&self) -> u64 {
        self.chi.modulus()
    }

    /// Flipped primes, increasing.
    pub fn flips(&self) -> &[u64] {
        &self.flips
    }

    pub fn eval(&self, n: u64) -> Result<i8, CharacterError> {
        if n == 0 {
            return Err(CharacterError::ZeroArgument);
        }
        Ok(self.value(n))
    }

    #[inline]
    pub fn value(&self, n: u64) -> i8 {
        let mut s = self.chi.value(n);
        for &p in &self.flips {
            if n.is_multiple_of(p) && valuation_unchecked(n, p) % 2 == 1 {
                s = -s;
            }
        }
        s
    }

    /// Pointwise product of two functions over the same modified character.
    ///
    /// Since `χ̃² = 1`, the product is `λ_{S Δ S'}`, represented over the
    /// principal character mod 1.
    pub fn product(&self, other: &CMFunction) -> Result<CMFunction, CharacterError> {
        if self.chi != other.chi {
            return Err(CharacterError::BaseMismatch);
        }
        let a: BTreeSet<u64> = self.flips.iter().copied().collect();
        let b: BTreeSet<u64> = other.flips.iter().copied().collect();
        let one = ModifiedCharacter::new(RealCharacter::principal(1)?, &BTreeMap::new())?;
        CMFunction::new(one, a.symmetric_difference(&b).copied())
    }
}

impl SignFunction for CMFunction {
    fn value(&self, n: u64) -> i8 {
        CMFunction::value(self, n)
    }
}

impl fmt::Display for CMFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.chi)?;
        if !self.flips.is_empty() {
            let list: Vec<String> = self.flips.iter().map(u64::to_string).collect();
            write!(f, " flips {{{}}}", list.join(", "))?;
        }
        Ok(())
    }
}

/// `𝔻(f, g; x)` summed over the given primes (all primes `<= x`).
pub fn distance_over_primes<F: SignFunction, G: SignFunction>(f: &F, g: &G, primes: &[u64]) -> f64 {
    primes
        .iter()
        .filter(|&&p| f.value(p) != g.value(p))
        .map(|&p| 2.0 / p as f64)
        .sum::<f64>()
        .sqrt()
}

/// Pretentious distance `(Σ_{p <= x} (1 - f(p)g(p))/p)^{1/2}` for ±1 functions.
pub fn pretentious_distance<F: SignFunction, G: SignFunction>(f: &F, g: &G, x: u64) -> f64 {
    distance_over_primes(f, g, &arith::primes_up_to(x))
}
