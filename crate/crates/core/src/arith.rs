//! Exact integer primitives: primality, factorization, valuations, the
//! Kronecker symbol and a congruence-system solver.
//!
//! Everything here works on `u64` with `u128` intermediates. Overflow is
//! reported as an error instead of wrapping.

use std::fmt;
use std::sync::OnceLock;

use thiserror::Error;

/// Largest modulus a congruence solution may carry.
pub const MAX_MODULUS: u64 = 1 << 63;

const TRIAL_DIVISION_LIMIT: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ArithError {
    #[error("zero has no factorization")]
    Zero,
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("congruence system has no solution")]
    NoSolution,
    #[error("combined modulus exceeds 2^63")]
    Overflow,
    #[error("invalid congruence x = {residue} mod {modulus}")]
    InvalidCongruence { residue: u64, modulus: u64 },
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin; the first twelve prime bases are enough for
/// every 64-bit input.
pub fn is_prime(n: u64) -> bool {
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for &p in &BASES {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'witness: for &a in &BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Sieve of Eratosthenes; all primes `<= limit` in increasing order.
pub fn primes_up_to(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let limit = limit as usize;
    let mut composite = vec![false; limit + 1];
    let mut primes = Vec::new();
    for i in 2..=limit {
        if composite[i] {
            continue;
        }
        primes.push(i as u64);
        let mut j = i * i;
        while j <= limit {
            composite[j] = true;
            j += i;
        }
    }
    primes
}

fn small_primes() -> &'static [u64] {
    static TABLE: OnceLock<Vec<u64>> = OnceLock::new();
    TABLE.get_or_init(|| primes_up_to(TRIAL_DIVISION_LIMIT))
}

/// Canonical prime factorization of a positive integer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Factorization {
    n: u64,
    factors: Vec<(u64, u32)>,
}

impl Factorization {
    pub fn n(&self) -> u64 {
        self.n
    }

    /// `(prime, exponent)` pairs with strictly increasing primes.
    pub fn factors(&self) -> &[(u64, u32)] {
        &self.factors
    }

    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        self.factors.iter().map(|&(p, _)| p)
    }

    /// Multiplies the prime powers back together.
    pub fn recompose(&self) -> u64 {
        self.factors
            .iter()
            .fold(1u64, |acc, &(p, e)| acc * p.pow(e))
    }
}

impl fmt::Display for Factorization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            return write!(f, "1");
        }
        for (i, (p, e)) in self.factors.iter().enumerate() {
            if i > 0 {
                write!(f, " * ")?;
            }
            if *e == 1 {
                write!(f, "{p}")?;
            } else {
                write!(f, "{p}^{e}")?;
            }
        }
        Ok(())
    }
}

// Brent's variant of Pollard rho. `n` must be odd and composite.
fn pollard_rho(n: u64) -> u64 {
    let mut seed = 1u64;
    loop {
        let c = seed;
        let f = |x: u64| (mul_mod(x, x, n) + c) % n;
        let (mut x, mut y, mut g) = (2u64, 2u64, 1u64);
        let mut q = 1u64;
        let mut ys = 2u64;
        let mut r = 1u64;
        const BATCH: u64 = 128;
        while g == 1 {
            x = y;
            for _ in 0..r {
                y = f(y);
            }
            let mut done = 0;
            while done < r && g == 1 {
                ys = y;
                for _ in 0..BATCH.min(r - done) {
                    y = f(y);
                    q = mul_mod(q, x.abs_diff(y), n);
                }
                g = gcd(q, n);
                done += BATCH;
            }
            r *= 2;
        }
        if g == n {
            loop {
                ys = f(ys);
                g = gcd(x.abs_diff(ys), n);
                if g > 1 {
                    break;
                }
            }
        }
        if g != n {
            return g;
        }
        seed += 1;
    }
}

fn split_large(n: u64, out: &mut Vec<u64>) {
    if n == 1 {
        return;
    }
    if is_prime(n) {
        out.push(n);
        return;
    }
    let d = pollard_rho(n);
    split_large(d, out);
    split_large(n / d, out);
}

pub fn factorize(n: u64) -> Result<Factorization, ArithError> {
    if n == 0 {
        return Err(ArithError::Zero);
    }
    let mut rest = n;
    let mut factors = Vec::new();
    for &p in small_primes() {
        if p * p > rest {
            break;
        }
        if rest.is_multiple_of(p) {
            let mut e = 0;
            while rest.is_multiple_of(p) {
                rest /= p;
                e += 1;
            }
            factors.push((p, e));
        }
    }
    if rest > 1 {
        if rest < TRIAL_DIVISION_LIMIT * TRIAL_DIVISION_LIMIT || is_prime(rest) {
            factors.push((rest, 1));
        } else {
            let mut large = Vec::new();
            split_large(rest, &mut large);
            large.sort_unstable();
            for p in large {
                match factors.last_mut() {
                    Some((q, e)) if *q == p => *e += 1,
                    _ => factors.push((p, 1)),
                }
            }
        }
    }
    Ok(Factorization { n, factors })
}

/// Exponent of `p` in `n` (the `ν` with `p^ν ∥ n`).
pub fn valuation(n: u64, p: u64) -> Result<u32, ArithError> {
    if n == 0 {
        return Err(ArithError::Zero);
    }
    if !is_prime(p) {
        return Err(ArithError::NotPrime(p));
    }
    Ok(valuation_unchecked(n, p))
}

/// Like [`valuation`] without the primality check; `n > 0`, `p >= 2`.
#[inline]
pub(crate) fn valuation_unchecked(mut n: u64, p: u64) -> u32 {
    let mut v = 0;
    while n.is_multiple_of(p) {
        n /= p;
        v += 1;
    }
    v
}

/// Distinct prime divisors of `n`, increasing. Empty for `n = 1`.
pub fn prime_divisors(n: u64) -> Result<Vec<u64>, ArithError> {
    Ok(factorize(n)?.primes().collect())
}

/// The Kronecker symbol `(n / q)` for `q >= 1`.
///
/// Completely multiplicative in `n`, zero exactly when `gcd(n, q) > 1`,
/// and equal to the Legendre symbol when `q` is an odd prime.
pub fn kronecker(n: i64, q: u64) -> i8 {
    if q == 0 {
        return if n.unsigned_abs() == 1 { 1 } else { 0 };
    }
    let mut sign = 1i8;
    let mut m = q;
    let tz = m.trailing_zeros();
    if tz > 0 {
        if n % 2 == 0 {
            return 0;
        }
        m >>= tz;
        if tz % 2 == 1 && matches!(n.rem_euclid(8), 3 | 5) {
            sign = -sign;
        }
    }
    // m is odd from here on.
    if n < 0 && m % 4 == 3 {
        sign = -sign;
    }
    let mut a = n.unsigned_abs() % m;
    while a != 0 {
        let tz = a.trailing_zeros();
        a >>= tz;
        if tz % 2 == 1 && matches!(m % 8, 3 | 5) {
            sign = -sign;
        }
        if a % 4 == 3 && m % 4 == 3 {
            sign = -sign;
        }
        std::mem::swap(&mut a, &mut m);
        a %= m;
    }
    if m == 1 {
        sign
    } else {
        0
    }
}

/// One congruence `x ≡ residue (mod modulus)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct Congruence {
    pub residue: u64,
    pub modulus: u64,
}

/// A list of congruences with residues reduced below their moduli.
#[derive(Debug, Clone, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(transparent)]
pub struct CongruenceSystem {
    congruences: Vec<Congruence>,
}

impl CongruenceSystem {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, residue: u64, modulus: u64) -> Result<(), ArithError> {
        if modulus < 2 || residue >= modulus {
            return Err(ArithError::InvalidCongruence { residue, modulus });
        }
        self.congruences.push(Congruence { residue, modulus });
        Ok(())
    }

    pub fn from_pairs(pairs: &[(u64, u64)]) -> Result<Self, ArithError> {
        let mut sys = Self::new();
        for &(r, m) in pairs {
            sys.push(r, m)?;
        }
        Ok(sys)
    }

    pub fn congruences(&self) -> &[Congruence] {
        &self.congruences
    }

    pub fn is_empty(&self) -> bool {
        self.congruences.is_empty()
    }

    pub fn is_satisfied_by(&self, x: u64) -> bool {
        self.congruences.iter().all(|c| x % c.modulus == c.residue)
    }
}

// Inverse of a modulo m for gcd(a, m) = 1, m >= 1.
fn inv_mod(a: u64, m: u64) -> u64 {
    let (mut old_r, mut r) = (a as i128 % m as i128, m as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    old_s.rem_euclid(m as i128) as u64
}

/// Solves a system of congruences by pairwise merging.
///
/// Returns the least nonnegative solution together with the lcm of the
/// moduli. Moduli need not be coprime; inconsistent systems give
/// [`ArithError::NoSolution`]. The empty system yields `(0, 1)`.
pub fn crt_solve(sys: &CongruenceSystem) -> Result<(u64, u64), ArithError> {
    let (mut x, mut m) = (0u64, 1u64);
    for c in sys.congruences() {
        let g = gcd(m, c.modulus);
        let diff = c.residue as i128 - x as i128;
        if diff % g as i128 != 0 {
            return Err(ArithError::NoSolution);
        }
        let reduced = c.modulus / g;
        let lcm = (m as u128) * (reduced as u128);
        if lcm > MAX_MODULUS as u128 {
            return Err(ArithError::Overflow);
        }
        let t = if reduced == 1 {
            0
        } else {
            let step = (diff / g as i128).rem_euclid(reduced as i128) as u64;
            mul_mod(step, inv_mod((m / g) % reduced, reduced), reduced)
        };
        x = ((x as u128 + m as u128 * t as u128) % lcm) as u64;
        m = lcm as u64;
    }
    Ok((x, m))
}
