//! Acceptance criteria, one PASS/FAIL line each. Exits non-zero if any fails.

use std::process::ExitCode;
use std::time::Instant;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use signpattern::analytic::{self, TopTerm, DEFAULT_L_TOLERANCE};
use signpattern::arith::gcd;
use signpattern::catalog::{self, CatalogEntry};
use signpattern::characters::pretentious_distance;
use signpattern::cli::{self, parse_function_spec, verify_certificate, Certificate};
use signpattern::extension::{self, jset_size};
use signpattern::patterns::{self, default_search_bound};
use signpattern::{CMFunction, ModifiedCharacter, RealCharacter};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn chi(q: u64, sign: i64) -> ModifiedCharacter {
    ModifiedCharacter::uniform(RealCharacter::kronecker(q).unwrap(), sign).unwrap()
}

fn principal(q: u64, eta: &[(u64, i64)]) -> ModifiedCharacter {
    ModifiedCharacter::from_pairs(RealCharacter::principal(q).unwrap(), eta).unwrap()
}

fn upper_bound_table() -> Outcome {
    let mut failures = Vec::new();
    let mut runs = 0;
    for q in [3u64, 4, 5, 7, 11, 13] {
        for sign in [1, -1] {
            let c = chi(q, sign);
            for k in 2..=32u64 {
                let est = patterns::min_minus_window_par(&c, k, 1_000_000).unwrap();
                runs += 1;
                if est.value > k / 2 {
                    failures.push(format!("q={q} eta={sign:+} k={k} value={}", est.value));
                }
            }
        }
    }
    outcome(
        failures.is_empty(),
        format!("{runs} scans at bound 10^6, {} above floor(k/2) {:?}", failures.len(), failures),
    )
}

fn lower_bound_sandwich() -> Outcome {
    let mut above_scan = Vec::new();
    let mut below_closed = Vec::new();
    let mut above_half = Vec::new();
    for k in 4..=60u64 {
        let bound = analytic::digit_lower_bound(3, k, TopTerm::ProvenCap).unwrap();
        let closed = bound.closed_form.expect("q = 3");
        if bound.value < closed {
            below_closed.push(k);
        }
        for sign in [1, -1] {
            let value = patterns::min_minus_window_par(&chi(3, sign), k, 1_000_000).unwrap().value;
            // compare 2·bound with 2·value to stay in integers
            if bound.value.twice() > 2 * value as i64 {
                above_scan.push(format!("k={k} eta={sign:+}: {} > {value}", bound.value));
            }
            if value > k / 2 {
                above_half.push(format!("k={k} eta={sign:+}"));
            }
        }
    }
    outcome(
        above_scan.is_empty() && below_closed.is_empty() && above_half.is_empty(),
        format!(
            "chain > scanned value in {} cases {:?}; chain < closed form for k in {:?}; scan > floor(k/2) in {:?}",
            above_scan.len(),
            above_scan,
            below_closed,
            above_half
        ),
    )
}

fn extension_certificates() -> Outcome {
    let mut problems = Vec::new();
    let mut summary = Vec::new();
    for (q, k) in [(5u64, 4u64), (5, 10), (7, 8), (3, 12)] {
        let c = chi(q, 1);
        let ext = match extension::extend(&c, k, default_search_bound(q)) {
            Ok(ext) => ext,
            Err(e) => {
                problems.push(format!("({q},{k}): extend failed: {e}"));
                continue;
            }
        };
        let text = serde_json::to_string(&Certificate::from_plan(&ext.plan)).unwrap();
        let cert: Certificate = serde_json::from_str(&text).unwrap();
        let check = verify_certificate(&cert).unwrap();
        if !check.valid {
            problems.push(format!("({q},{k}): certificate rejected {check:?}"));
        }
        // independent re-evaluation from the certificate fields alone
        let base = parse_function_spec(&cert.base_spec.to_string()).unwrap();
        let f = CMFunction::new(base.chi().clone(), cert.primes.iter().copied()).unwrap();
        if !(cert.witness + 1..=cert.witness + k).all(|m| f.eval(m) == Ok(1)) {
            problems.push(format!("({q},{k}): window not all +1"));
        }
        if !cert.primes.iter().all(|&p| p > k && gcd(p, q) == 1) {
            problems.push(format!("({q},{k}): inadmissible flips {:?}", cert.primes));
        }
        if cert.primes.len() as u64 > k / 2 || jset_size(&f, k) as u64 > k / 2 {
            problems.push(format!("({q},{k}): {} flips exceed floor(k/2)", cert.primes.len()));
        }
        if (q, k) == (5, 4) && (cert.primes != [7] || cert.witness != 3) {
            problems.push(format!("(5,4): flips {:?} witness {}", cert.primes, cert.witness));
        }
        summary.push(format!("({q},{k}) flips {:?} witness {}", cert.primes, cert.witness));
    }
    outcome(problems.is_empty(), format!("{}; {:?}", summary.join(", "), problems))
}

fn catalog_lengths() -> Outcome {
    let mut entries = catalog::default_catalog();
    for p0 in [17, 37] {
        entries.push(catalog::length4_family(p0).unwrap());
    }
    let report = catalog::verify_known_lengths(&entries, catalog::DEFAULT_LIMIT).unwrap();
    let expect = |name: &str| match name {
        n if n.starts_with("schur") => 2,
        n if n.starts_with("length4") => 4,
        _ => 3,
    };
    let mut wrong: Vec<String> = report
        .rows
        .iter()
        .filter(|r| r.observed_length != expect(&r.name) || !r.pass)
        .map(|r| format!("{} observed {}", r.name, r.observed_length))
        .collect();
    let counts = (
        report.rows.iter().filter(|r| r.name.starts_with("schur")).count(),
        report.rows.iter().filter(|r| expect(&r.name) == 3).count(),
        report.rows.iter().filter(|r| r.name.starts_with("length4")).count(),
    );
    if counts != (2, 13, 3) {
        wrong.push(format!("row counts {counts:?}"));
    }
    outcome(
        wrong.is_empty(),
        format!("{} rows at limit 10^7 ({}); {:?}", report.rows.len(), report.note, wrong),
    )
}

fn log_mean_numerics() -> Outcome {
    let points = [10_000u64, 100_000, 1_000_000, 10_000_000];
    let mut problems = Vec::new();
    let mut summary = Vec::new();
    for (q, sign) in [(5u64, 1i64), (5, -1), (3, -1)] {
        let reports = analytic::log_mean_sweep(&chi(q, sign), &points, DEFAULT_L_TOLERANCE).unwrap();
        let diffs: Vec<f64> = reports.iter().map(|r| r.diff).collect();
        if !diffs.windows(2).all(|w| w[1] < w[0]) {
            problems.push(format!("q={q} eta={sign:+}: diff not strictly decreasing {diffs:?}"));
        }
        let base = reports[0].ratio;
        if let Some(r) = reports.iter().find(|r| r.ratio >= 10.0 * base) {
            problems.push(format!("q={q} eta={sign:+}: ratio {} at Q={} vs {base}", r.ratio, r.big_q));
        }
        summary.push(format!(
            "q={q} eta={sign:+} diff {}",
            diffs.iter().map(|&d| cli::fmt_sig(d)).collect::<Vec<_>>().join(" > ")
        ));
    }
    outcome(problems.is_empty(), format!("{}; {:?}", summary.join("; "), problems))
}

fn principal_means() -> Outcome {
    let cases = [(principal(2, &[(2, -1)]), 1.0 / 3.0), (principal(6, &[(2, -1), (3, -1)]), 1.0 / 6.0)];
    let mut detail = Vec::new();
    let mut pass = true;
    for (c, quoted) in cases {
        let mean = analytic::principal_mean(&c).unwrap();
        let observed = analytic::empirical_mean(&c, 1_000_000);
        let ok = (observed - mean).abs() <= 1e-3 && (mean - quoted).abs() < 1e-12;
        pass &= ok;
        detail.push(format!("{c}: mean {} observed {}", cli::fmt_sig(mean), cli::fmt_sig(observed)));
    }
    outcome(pass, detail.join("; "))
}

fn no_length_one() -> Outcome {
    outcome(catalog::no_length1_check(), "all 4 assignments of (f(2), f(5)) leave a +1 pair")
}

fn catalog_functions() -> Vec<CatalogEntry> {
    let mut all = catalog::default_catalog();
    for p0 in [17, 37] {
        all.push(catalog::length4_family(p0).unwrap());
    }
    all
}

fn multiplicativity() -> Result<String, String> {
    let entries = catalog_functions();
    for e in &entries {
        let table: Vec<i8> = (0..=1_000_000u64).map(|n| if n == 0 { 0 } else { e.f.value(n) }).collect();
        for a in 1..=1000u64 {
            for b in 1..=1000u64 {
                if table[(a * b) as usize] != table[a as usize] * table[b as usize] {
                    return Err(format!("{}: f({a}·{b}) != f({a})f({b})", e.name));
                }
            }
        }
    }
    Ok(format!("{} functions, a,b <= 1000", entries.len()))
}

fn triangle_inequality() -> Result<String, String> {
    let mut triples = 0;
    let bases = [(3u64, "kronecker"), (4, "kronecker"), (5, "kronecker"), (13, "kronecker"), (2, "principal")];
    for (q, kind) in bases {
        let mut group = Vec::new();
        for sign in [1, -1] {
            let base = if kind == "principal" {
                RealCharacter::principal(q).unwrap()
            } else {
                RealCharacter::kronecker(q).unwrap()
            };
            let c = ModifiedCharacter::uniform(base, sign).unwrap();
            let flips: Vec<u64> = [7u64, 11, 17, 19, 23].iter().copied().filter(|&p| q % p != 0).collect();
            for set in [vec![], vec![flips[0]], vec![flips[1]], vec![flips[0], flips[2]], vec![flips[3], flips[4]]] {
                group.push(CMFunction::new(c.clone(), set).unwrap());
            }
        }
        let n = group.len();
        let mut d = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                d[i][j] = pretentious_distance(&group[i], &group[j], 100_000);
            }
        }
        for i in 0..n {
            for j in 0..n {
                for l in 0..n {
                    triples += 1;
                    if d[i][l] > d[i][j] + d[j][l] + 1e-12 {
                        return Err(format!("{} / {} / {}", group[i], group[j], group[l]));
                    }
                }
            }
        }
    }
    Ok(format!("{triples} ordered triples at x = 10^5"))
}

fn window_identity() -> Result<String, String> {
    let entries = catalog_functions();
    let mut rng = StdRng::seed_from_u64(0x5eed);
    for _ in 0..10_000 {
        let e = &entries[rng.gen_range(0..entries.len())];
        let start = rng.gen_range(0..1u64 << 62);
        let k = rng.gen_range(1..=64u64);
        let w = patterns::sign_pattern(&e.f, start, k).unwrap();
        let sum: i64 = w.pattern.iter().map(|&s| s as i64).sum();
        if k as i64 - 2 * w.minus_count as i64 != w.window_sum || sum != w.window_sum {
            return Err(format!("{} at {start}, k={k}", e.name));
        }
    }
    Ok("10^4 seeded random windows".into())
}

fn run_cli(args: &[&str]) -> Vec<u8> {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = cli::run(std::iter::once("signpattern").chain(args.iter().copied()), &mut out, &mut err);
    assert_eq!(code, 0, "{}", String::from_utf8_lossy(&err));
    out
}

fn determinism() -> Result<String, String> {
    for (q, sign, k) in [(3u64, 1i64, 7u64), (4, -1, 12), (11, 1, 20), (13, -1, 31)] {
        let a = patterns::min_minus_window(&chi(q, sign), k, 1_000_000).unwrap();
        let b = patterns::min_minus_window_par(&chi(q, sign), k, 1_000_000).unwrap();
        if a != b || serde_json::to_string(&a).unwrap() != serde_json::to_string(&b).unwrap() {
            return Err(format!("q={q} eta={sign:+} k={k}"));
        }
    }
    let args = ["delta", "--q", "7", "--eta", "7=-1", "--k", "9", "--format", "json"];
    let serial = run_cli(&[&["--jobs", "1"], &args[..]].concat());
    let parallel = run_cli(&[&["--jobs", "4"], &args[..]].concat());
    if serial != parallel {
        return Err("cli output differs between --jobs 1 and --jobs 4".into());
    }
    Ok("serial == parallel for 4 scans and the cli".into())
}

fn property_suites() -> Outcome {
    let results = [
        ("multiplicativity", multiplicativity()),
        ("triangle", triangle_inequality()),
        ("window identity", window_identity()),
        ("determinism", determinism()),
    ];
    let pass = results.iter().all(|(_, r)| r.is_ok());
    let detail = results
        .iter()
        .map(|(name, r)| match r {
            Ok(s) => format!("{name}: {s}"),
            Err(s) => format!("{name}: FAILED {s}"),
        })
        .collect::<Vec<_>>()
        .join("; ");
    outcome(pass, detail)
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("upper-bound table", upper_bound_table),
        ("lower-bound sandwich (q = 3)", lower_bound_sandwich),
        ("extension certificates", extension_certificates),
        ("catalog lengths at 10^7", catalog_lengths),
        ("logarithmic mean numerics", log_mean_numerics),
        ("principal means", principal_means),
        ("no length-1 function", no_length_one),
        ("property suites", property_suites),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let o = check();
        let secs = t.elapsed().as_secs_f64();
        println!(
            "{} criterion {}: {name} [{secs:.1}s] {}",
            if o.pass { "PASS" } else { "FAIL" },
            i + 1,
            o.detail
        );
        failed += usize::from(!o.pass);
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
