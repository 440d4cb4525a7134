//! Sign patterns on windows `{n+1, …, n+k}`, longest +1 runs and the
//! minimal number of −1 values over a scanned range of windows.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::characters::{ModifiedCharacter, SignFunction};

/// Windows whose end exceeds this are rejected.
pub const MAX_ARGUMENT: u64 = (1 << 63) - 1;

/// Windows per chunk in a partitioned scan.
const CHUNK: u64 = 1 << 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PatternError {
    #[error("window {{{start}+1, …, {start}+{k}}} leaves the 63-bit range")]
    Overflow { start: u64, k: u64 },
    #[error("window length must be positive")]
    EmptyWindow,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowReport {
    /// The window is `{start+1, …, start+k}`.
    pub start: u64,
    pub k: u64,
    pub pattern: Vec<i8>,
    pub minus_count: u64,
    pub window_sum: i64,
}

impl WindowReport {
    fn from_pattern(start: u64, pattern: Vec<i8>) -> Self {
        let minus_count = pattern.iter().filter(|&&s| s < 0).count() as u64;
        let window_sum = pattern.iter().map(|&s| s as i64).sum();
        WindowReport {
            start,
            k: pattern.len() as u64,
            pattern,
            minus_count,
            window_sum,
        }
    }

    /// Offsets `a ∈ {1..k}` with value −1 at `start + a`.
    pub fn minus_offsets(&self) -> Vec<u64> {
        self.pattern
            .iter()
            .enumerate()
            .filter(|(_, &s)| s < 0)
            .map(|(i, _)| i as u64 + 1)
            .collect()
    }

    pub fn is_all_plus(&self) -> bool {
        self.minus_count == 0
    }
}

fn check_window(start: u64, k: u64) -> Result<(), PatternError> {
    if k == 0 {
        return Err(PatternError::EmptyWindow);
    }
    match start.checked_add(k) {
        Some(end) if end <= MAX_ARGUMENT => Ok(()),
        _ => Err(PatternError::Overflow { start, k }),
    }
}

pub fn sign_pattern<F: SignFunction>(f: &F, start: u64, k: u64) -> Result<WindowReport, PatternError> {
    check_window(start, k)?;
    let pattern = (start + 1..=start + k).map(|m| f.value(m)).collect();
    Ok(WindowReport::from_pattern(start, pattern))
}

/// Longest run of consecutive +1 values inside `[1, limit]`.
///
/// Returns `(length, witness)` where the run is `{witness+1, …, witness+length}`
/// and `witness` is the least start attaining the maximum. This is a lower
/// bound on the length of `f`.
pub fn longest_run<F: SignFunction>(f: &F, limit: u64) -> (u64, u64) {
    let mut best = (0u64, 0u64);
    let mut current = 0u64;
    for m in 1..=limit {
        if f.value(m) > 0 {
            current += 1;
            if current > best.0 {
                best = (current, m - current);
            }
        } else {
            current = 0;
        }
    }
    best
}

/// Best window found by [`min_minus_window`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeltaEstimate {
    pub q: u64,
    pub k: u64,
    pub best_window: WindowReport,
    pub search_bound: u64,
    /// Least −1 count over windows starting at `n ∈ [0, search_bound]`:
    /// an upper bound on the true minimum.
    pub value: u64,
}

/// `max(10^6, q^3)`, saturating.
pub fn default_search_bound(q: u64) -> u64 {
    q.checked_pow(3).unwrap_or(u64::MAX).max(1_000_000)
}

// Best (max sum, least start) over windows starting in [lo, hi].
fn scan_range<F: SignFunction>(f: &F, k: u64, lo: u64, hi: u64) -> (i64, u64) {
    let vals: Vec<i8> = (lo + 1..=hi + k).map(|m| f.value(m)).collect();
    let k = k as usize;
    let mut sum: i64 = vals[..k].iter().map(|&s| s as i64).sum();
    let mut best = (sum, lo);
    for i in 1..=(hi - lo) as usize {
        sum += vals[i + k - 1] as i64 - vals[i - 1] as i64;
        if sum > best.0 {
            best = (sum, lo + i as u64);
        }
    }
    best
}

fn merge(a: (i64, u64), b: (i64, u64)) -> (i64, u64) {
    if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) {
        b
    } else {
        a
    }
}

fn finish<F: SignFunction>(f: &F, q: u64, k: u64, search_bound: u64, best: (i64, u64)) -> DeltaEstimate {
    let best_window = sign_pattern(f, best.1, k).expect("window checked before scanning");
    debug_assert_eq!(best_window.window_sum, best.0);
    DeltaEstimate {
        q,
        k,
        value: best_window.minus_count,
        best_window,
        search_bound,
    }
}

/// Scans every window `{n+1, …, n+k}` with `0 <= n <= search_bound` and
/// keeps the one with the fewest −1 values (least `n` on ties).
pub fn min_minus_window(
    chi: &ModifiedCharacter,
    k: u64,
    search_bound: u64,
) -> Result<DeltaEstimate, PatternError> {
    min_minus_window_of(chi, chi.modulus(), k, search_bound, false)
}

/// Same result as [`min_minus_window`], computed over range chunks on the
/// current rayon pool.
pub fn min_minus_window_par(
    chi: &ModifiedCharacter,
    k: u64,
    search_bound: u64,
) -> Result<DeltaEstimate, PatternError> {
    min_minus_window_of(chi, chi.modulus(), k, search_bound, true)
}

/// Window search for any sign function; `q` is only recorded in the result.
pub fn min_minus_window_of<F: SignFunction>(
    f: &F,
    q: u64,
    k: u64,
    search_bound: u64,
    parallel: bool,
) -> Result<DeltaEstimate, PatternError> {
    check_window(search_bound, k)?;
    let best = if parallel {
        let chunks = search_bound / CHUNK + 1;
        (0..chunks)
            .into_par_iter()
            .map(|c| {
                let lo = c * CHUNK;
                let hi = (lo + CHUNK - 1).min(search_bound);
                scan_range(f, k, lo, hi)
            })
            .reduce_with(merge)
            .expect("at least one chunk")
    } else {
        scan_range(f, k, 0, search_bound)
    };
    Ok(finish(f, q, k, search_bound, best))
}

/// Every start `n ∈ [0, search_bound]` whose window has the given sum, in
/// increasing order.
pub fn starts_with_sum<F: SignFunction>(f: &F, k: u64, search_bound: u64, sum: i64) -> Result<Vec<u64>, PatternError> {
    check_window(search_bound, k)?;
    let chunks = search_bound / CHUNK + 1;
    let parts: Vec<Vec<u64>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let lo = c * CHUNK;
            let hi = (lo + CHUNK - 1).min(search_bound);
            let vals: Vec<i8> = (lo + 1..=hi + k).map(|m| f.value(m)).collect();
            let k = k as usize;
            let mut s: i64 = vals[..k].iter().map(|&v| v as i64).sum();
            let mut out = Vec::new();
            for i in 0..=(hi - lo) as usize {
                if i > 0 {
                    s += vals[i + k - 1] as i64 - vals[i - 1] as i64;
                }
                if s == sum {
                    out.push(lo + i as u64);
                }
            }
            out
        })
        .collect();
    Ok(parts.concat())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::characters::{CMFunction, CharacterKind, RealCharacter};
    use proptest::prelude::*;

    fn chi(q: u64, sign: i64) -> ModifiedCharacter {
        ModifiedCharacter::uniform(RealCharacter::kronecker(q).unwrap(), sign).unwrap()
    }

    // Independent oracle: recompute every window from scratch.
    fn brute_min_minus(chi: &ModifiedCharacter, k: u64, bound: u64) -> (u64, u64) {
        (0..=bound)
            .map(|n| {
                let minus = (n + 1..=n + k).filter(|&m| chi.value(m) < 0).count() as u64;
                (minus, n)
            })
            .min()
            .unwrap()
    }

    #[test]
    fn sign_pattern_examples() {
        let c3 = chi(3, 1);
        let w = sign_pattern(&c3, 2, 2).unwrap();
        assert_eq!(w.pattern, [1, 1]);
        assert_eq!(w.minus_count, 0);
        let w = sign_pattern(&c3, 0, 1).unwrap();
        assert_eq!(w.pattern, [1]);
        let c5 = chi(5, 1);
        let w = sign_pattern(&c5, 3, 4).unwrap();
        assert_eq!(w.pattern, [1, 1, 1, -1]);
        assert_eq!(w.minus_count, 1);
        assert_eq!(w.window_sum, 2);
        assert_eq!(w.minus_offsets(), [4]);
    }

    #[test]
    fn sign_pattern_rejects_overflow() {
        let c3 = chi(3, 1);
        assert!(matches!(sign_pattern(&c3, MAX_ARGUMENT - 2, 5), Err(PatternError::Overflow { .. })));
        assert!(sign_pattern(&c3, MAX_ARGUMENT - 5, 5).is_ok());
        assert_eq!(sign_pattern(&c3, 0, 0), Err(PatternError::EmptyWindow));
    }

    #[test]
    fn longest_run_examples() {
        let schur2 = CMFunction::unflipped(chi(3, 1));
        let (len, witness) = longest_run(&schur2, 100);
        assert_eq!(len, 2);
        assert_eq!(witness, 2);
        let g = CMFunction::unflipped(
            ModifiedCharacter::uniform(RealCharacter::new(2, CharacterKind::Principal).unwrap(), -1).unwrap(),
        );
        assert_eq!(longest_run(&g, 100), (3, 2));
        let l4 = CMFunction::new(chi(5, 1), [7]).unwrap();
        assert_eq!(longest_run(&l4, 100), (4, 3));
    }

    #[test]
    fn min_minus_window_examples() {
        let est = min_minus_window(&chi(3, 1), 3, 10_000).unwrap();
        assert_eq!(est.value, brute_min_minus(&chi(3, 1), 3, 10_000).0);
        assert_eq!(est.value, 1);
        // {3,4,5,6} = (-,+,+,+) ties {4,5,6,7} = (+,+,+,-) and comes first
        let est = min_minus_window(&chi(5, 1), 4, 10_000).unwrap();
        assert_eq!((est.value, est.best_window.start), brute_min_minus(&chi(5, 1), 4, 10_000));
        assert_eq!((est.value, est.best_window.start), (1, 2));
        assert_eq!(est.best_window.pattern, [-1, 1, 1, 1]);
        for q in [3, 4, 5, 7] {
            let est = min_minus_window(&chi(q, -1), 1, 17).unwrap();
            assert_eq!(est.value, 0);
            assert_eq!(est.best_window.start, 0);
        }
    }

    #[test]
    fn min_minus_matches_brute_force() {
        for (q, s) in [(3, 1), (3, -1), (4, 1), (7, -1), (11, 1), (13, -1)] {
            for k in [2, 5, 9, 16] {
                let est = min_minus_window(&chi(q, s), k, 3000).unwrap();
                assert_eq!((est.value, est.best_window.start), brute_min_minus(&chi(q, s), k, 3000));
            }
        }
    }

    #[test]
    fn starts_with_sum_matches_brute_force() {
        let c = chi(7, -1);
        for k in [3u64, 6, 11] {
            let best = min_minus_window(&c, k, 200_000).unwrap().best_window.window_sum;
            let starts = starts_with_sum(&c, k, 200_000, best).unwrap();
            let brute: Vec<u64> = (0..=200_000u64)
                .filter(|&n| (n + 1..=n + k).map(|m| c.value(m) as i64).sum::<i64>() == best)
                .collect();
            assert_eq!(starts, brute);
        }
    }

    #[test]
    fn parallel_matches_serial() {
        for (q, s) in [(3, 1), (5, -1), (13, 1)] {
            for k in [3, 8, 21] {
                let a = min_minus_window(&chi(q, s), k, 300_000).unwrap();
                let b = min_minus_window_par(&chi(q, s), k, 300_000).unwrap();
                assert_eq!(a, b);
            }
        }
    }

    #[test]
    fn value_nonincreasing_in_bound() {
        let c = chi(7, 1);
        let mut last = u64::MAX;
        for bound in [10, 100, 1000, 10_000, 100_000] {
            let v = min_minus_window(&c, 12, bound).unwrap().value;
            assert!(v <= last);
            last = v;
        }
    }

    #[test]
    fn longest_run_nondecreasing_in_limit() {
        let f = CMFunction::new(chi(13, -1), [17, 19]).unwrap();
        let mut last = 0;
        for limit in [2, 10, 100, 1000, 10_000, 100_000] {
            let (len, _) = longest_run(&f, limit);
            assert!(len >= last);
            last = len;
        }
    }

    proptest! {
        #[test]
        fn window_identity(start in 0u64..(1u64 << 62), k in 1u64..64, q in prop::sample::select(vec![3u64, 4, 5, 7, 11, 13, 53]), s in prop::sample::select(vec![1i64, -1])) {
            let w = sign_pattern(&chi(q, s), start, k).unwrap();
            prop_assert_eq!(k as i64 - 2 * w.minus_count as i64, w.window_sum);
            prop_assert_eq!(w.window_sum.rem_euclid(2), (k % 2) as i64);
            prop_assert!(w.pattern.iter().all(|&v| v == 1 || v == -1));
        }
    }
}
