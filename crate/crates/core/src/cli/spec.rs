//! JSON documents read and written by the command line: function specs and
//! extension certificates.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

use crate::arith::{is_prime, MAX_MODULUS};
use crate::characters::{CMFunction, CharacterError, CharacterKind, ModifiedCharacter, RealCharacter};
use crate::extension::ExtensionPlan;
use crate::patterns::{sign_pattern, MAX_ARGUMENT};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpecError {
    #[error("schema violation: {0}")]
    Schema(String),
    #[error("eta key {0:?} is not a decimal integer")]
    EtaKeyNotInteger(String),
    #[error("eta key {0} is not prime")]
    EtaKeyNotPrime(u64),
    #[error("eta key {prime} does not divide modulus {modulus}")]
    EtaKeyNotDivisor { prime: u64, modulus: u64 },
    #[error("missing eta for prime divisor {0} of the modulus")]
    MissingEta(u64),
    #[error("eta value {0} is not +1 or -1")]
    InvalidSign(i64),
    #[error("flip {0} is not prime")]
    FlipNotPrime(u64),
    #[error("flip {prime} divides modulus {modulus}")]
    FlipDividesModulus { prime: u64, modulus: u64 },
    #[error("flips must be strictly increasing")]
    FlipsNotIncreasing,
    #[error("invalid modulus: {0}")]
    Modulus(String),
}

impl From<CharacterError> for SpecError {
    fn from(e: CharacterError) -> Self {
        match e {
            CharacterError::EtaKeyNotPrime(p) => SpecError::EtaKeyNotPrime(p),
            CharacterError::EtaKeyNotDivisor { prime, modulus } => SpecError::EtaKeyNotDivisor { prime, modulus },
            CharacterError::MissingEta(p) => SpecError::MissingEta(p),
            CharacterError::InvalidSign(s) => SpecError::InvalidSign(s),
            CharacterError::FlipNotPrime(p) => SpecError::FlipNotPrime(p),
            CharacterError::FlipDividesModulus { prime, modulus } => SpecError::FlipDividesModulus { prime, modulus },
            other => SpecError::Modulus(other.to_string()),
        }
    }
}

fn eta_map<S: Serializer>(eta: &[(u64, i64)], s: S) -> Result<S::Ok, S::Error> {
    s.collect_map(eta.iter().map(|(p, v)| (p.to_string(), v)))
}

/// Serialized form of a [`CMFunction`].
///
/// ```json
/// {"modulus": 5, "kind": "kronecker", "eta": {"5": 1}, "flips": [7]}
/// ```
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FunctionSpec {
    pub modulus: u64,
    pub kind: CharacterKind,
    /// `(prime, sign)` in increasing prime order.
    #[serde(serialize_with = "eta_map")]
    pub eta: Vec<(u64, i64)>,
    pub flips: Vec<u64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    modulus: u64,
    kind: CharacterKind,
    eta: BTreeMap<String, i64>,
    #[serde(default)]
    flips: Vec<u64>,
}

impl FunctionSpec {
    pub fn from_function(f: &CMFunction) -> Self {
        FunctionSpec {
            modulus: f.modulus(),
            kind: f.chi().base().kind(),
            eta: f.chi().eta().iter().map(|&(p, s)| (p, s as i64)).collect(),
            flips: f.flips().to_vec(),
        }
    }

    pub fn from_character(chi: &ModifiedCharacter) -> Self {
        Self::from_function(&CMFunction::unflipped(chi.clone()))
    }

    pub fn parse(text: &str) -> Result<Self, SpecError> {
        let raw: RawSpec = serde_json::from_str(text).map_err(|e| SpecError::Schema(e.to_string()))?;
        Self::from_raw(raw)
    }

    fn from_raw(raw: RawSpec) -> Result<Self, SpecError> {
        let mut eta = Vec::with_capacity(raw.eta.len());
        for (key, sign) in raw.eta {
            let p: u64 = key
                .trim()
                .parse()
                .map_err(|_| SpecError::EtaKeyNotInteger(key.clone()))?;
            eta.push((p, sign));
        }
        eta.sort_unstable();
        if raw.flips.windows(2).any(|w| w[0] >= w[1]) {
            return Err(SpecError::FlipsNotIncreasing);
        }
        Ok(FunctionSpec {
            modulus: raw.modulus,
            kind: raw.kind,
            eta,
            flips: raw.flips,
        })
    }

    /// Checks every constraint and builds the function.
    pub fn build(&self) -> Result<CMFunction, SpecError> {
        for &(p, _) in &self.eta {
            if !is_prime(p) {
                return Err(SpecError::EtaKeyNotPrime(p));
            }
        }
        let base = RealCharacter::new(self.modulus, self.kind)?;
        let chi = ModifiedCharacter::new(base, &self.eta.iter().copied().collect())?;
        if self.flips.windows(2).any(|w| w[0] >= w[1]) {
            return Err(SpecError::FlipsNotIncreasing);
        }
        Ok(CMFunction::new(chi, self.flips.iter().copied())?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("spec serializes")
    }
}

/// Parses and validates a function spec document.
pub fn parse_function_spec(text: &str) -> Result<CMFunction, SpecError> {
    FunctionSpec::parse(text)?.build()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Certificate {
    pub base_spec: serde_json::Value,
    pub k: u64,
    pub base_window_start: u64,
    #[serde(rename = "offsets_J")]
    pub offsets_j: Vec<u64>,
    pub primes: Vec<u64>,
    pub beta: u32,
    pub crt_modulus: u64,
    pub witness: u64,
    pub pattern: Vec<i8>,
}

impl Certificate {
    pub fn from_plan(plan: &ExtensionPlan) -> Self {
        let spec = FunctionSpec::from_character(&plan.chi);
        let f = CMFunction::new(plan.chi.clone(), plan.primes.iter().copied()).expect("plan primes are admissible");
        let pattern = sign_pattern(&f, plan.witness, plan.k).expect("verified window").pattern;
        Certificate {
            base_spec: serde_json::to_value(&spec).expect("spec serializes"),
            k: plan.k,
            base_window_start: plan.base_window.start,
            offsets_j: plan.offsets.clone(),
            primes: plan.primes.clone(),
            beta: plan.q_power_exponent,
            crt_modulus: plan.crt_modulus,
            witness: plan.witness,
            pattern,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CertificateCheck {
    pub window_all_plus: bool,
    pub pattern_matches: bool,
    pub congruences_hold: bool,
    pub primes_admissible: bool,
    pub valid: bool,
}

/// Re-derives everything a certificate claims from its own fields.
pub fn verify_certificate(cert: &Certificate) -> Result<CertificateCheck, SpecError> {
    let raw: RawSpec =
        serde_json::from_value(cert.base_spec.clone()).map_err(|e| SpecError::Schema(e.to_string()))?;
    let spec = FunctionSpec::from_raw(raw)?;
    if !spec.flips.is_empty() {
        return Err(SpecError::Schema("base_spec must not carry flips".into()));
    }
    let base = spec.build()?;
    let q = spec.modulus;
    let k = cert.k;

    let mut sorted = cert.primes.clone();
    sorted.sort_unstable();
    sorted.dedup();
    let primes_admissible = sorted.len() == cert.primes.len()
        && cert.primes.len() == cert.offsets_j.len()
        && (cert.primes.len() as u64) <= k / 2
        && cert.primes.iter().all(|&p| is_prime(p) && p > k && q % p != 0);

    let f = CMFunction::new(base.chi().clone(), cert.primes.iter().copied());
    let in_range = cert.witness.checked_add(k).is_some_and(|e| e <= MAX_ARGUMENT) && k > 0;
    let (window_all_plus, pattern_matches) = match (&f, in_range) {
        (Ok(f), true) => {
            let w = sign_pattern(f, cert.witness, k).expect("range checked");
            (w.is_all_plus(), w.pattern == cert.pattern)
        }
        _ => (false, false),
    };

    let q_part = q
        .checked_pow(cert.beta)
        .filter(|&m| m <= MAX_MODULUS)
        .is_some_and(|m| cert.witness % m == cert.base_window_start % m);
    let prime_parts = cert.offsets_j.iter().zip(&cert.primes).all(|(&a, &p)| {
        p.checked_mul(p)
            .is_some_and(|p2| (cert.witness as u128 + a as u128) % p2 as u128 == p as u128)
    });
    let congruences_hold = (q == 1 || q_part) && prime_parts;

    Ok(CertificateCheck {
        window_all_plus,
        pattern_matches,
        congruences_hold,
        primes_admissible,
        valid: window_all_plus && pattern_matches && congruences_hold && primes_admissible,
    })
}
