//! Command-line front end. [`run`] parses arguments, dispatches to the
//! library and writes the result in the requested format.
//!
//! Exit codes: 0 success, 1 verification failure (or a computation that
//! could not complete), 2 usage or parse error.

mod spec;

use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::Value;

use crate::analytic::{self, TopTerm, DEFAULT_L_TOLERANCE};
use crate::catalog;
use crate::characters::{pretentious_distance, CMFunction, CharacterKind};
use crate::extension;
use crate::patterns::{self, default_search_bound};

pub use spec::{parse_function_spec, verify_certificate, Certificate, CertificateCheck, FunctionSpec, SpecError};

#[derive(Parser, Debug)]
#[command(name = "signpattern", version, about = "Sign patterns of completely multiplicative ±1 functions")]
struct Cli {
    /// Worker threads for scans; 0 uses every core. Output does not depend on it.
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Table,
}

#[derive(Args, Debug, Clone)]
struct FunctionArgs {
    /// Modulus of the base character.
    #[arg(long)]
    q: Option<u64>,
    #[arg(long, value_enum, default_value_t = KindArg::Kronecker)]
    kind: KindArg,
    /// Sign at a prime divisor of q, as `p=+1` or `p=-1`; repeat per prime.
    #[arg(long = "eta", value_name = "P=SIGN")]
    eta: Vec<String>,
    /// Prime at which the value is flipped; repeatable.
    #[arg(long = "flip", value_name = "P")]
    flips: Vec<u64>,
    /// Function spec file; overrides the inline flags above.
    #[arg(long)]
    spec: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum KindArg {
    Principal,
    Kronecker,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Least number of −1 values over length-k windows.
    Delta {
        #[command(flatten)]
        func: FunctionArgs,
        #[arg(long)]
        k: u64,
        /// Largest window start scanned; defaults to max(10^6, q^3).
        #[arg(long)]
        bound: Option<u64>,
    },
    /// Extend a modified character to k consecutive +1 values and print a certificate.
    Extend {
        #[command(flatten)]
        func: FunctionArgs,
        #[arg(long)]
        k: u64,
        #[arg(long)]
        bound: Option<u64>,
    },
    /// Longest run of +1 values up to a limit.
    Scan {
        #[command(flatten)]
        func: FunctionArgs,
        #[arg(long, default_value_t = 1_000_000)]
        limit: u64,
    },
    /// Logarithmic mean against its Euler-factor prediction, for several Q.
    Lmean {
        #[command(flatten)]
        func: FunctionArgs,
        /// Comma-separated cutoffs Q.
        #[arg(long, value_delimiter = ',', default_values_t = [10_000u64, 100_000, 1_000_000, 10_000_000])]
        points: Vec<u64>,
        /// Tolerance for L(1, χ).
        #[arg(long, default_value_t = DEFAULT_L_TOLERANCE)]
        tol: f64,
    },
    /// Digit lower bound for the number of flips (q an odd prime below k).
    LowerBound {
        #[arg(long)]
        q: u64,
        #[arg(long)]
        k: u64,
        /// Bound the leading digit by a scanned window sum with this η(q) instead of the proven cap.
        #[arg(long, value_name = "SIGN", allow_hyphen_values = true)]
        empirical_eta: Option<i64>,
        #[arg(long)]
        bound: Option<u64>,
    },
    /// Check the catalog of known lengths.
    VerifyCatalog {
        #[arg(long, default_value_t = catalog::DEFAULT_LIMIT)]
        limit: u64,
        /// Extra members p0 ≡ 2 (mod 5) of the length-4 family.
        #[arg(long = "family", value_delimiter = ',')]
        family: Vec<u64>,
    },
    /// Re-check an extension certificate from its own fields.
    VerifyCertificate {
        #[arg(long)]
        cert: PathBuf,
    },
    /// Pretentious distance between two spec files.
    Distance {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        against: PathBuf,
        #[arg(long, default_value_t = 100_000)]
        x: u64,
    },
}

enum Failure {
    Usage(String),
    Verification(String),
}

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Verification(e.to_string())
    }
}

fn usage(e: impl std::fmt::Display) -> Failure {
    Failure::Usage(e.to_string())
}

struct Output {
    json: Value,
    csv: String,
    table: String,
    ok: bool,
}

/// Runs the command line given by `args` (including the program name).
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = out.write_all(text.as_bytes());
                return 0;
            }
            let _ = err.write_all(text.as_bytes());
            return 2;
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.jobs).build() {
        Ok(p) => p,
        Err(e) => {
            let _ = writeln!(err, "error: cannot start {} workers: {e}", cli.jobs);
            return 1;
        }
    };
    match pool.install(|| dispatch(cli.command)) {
        Ok(o) => {
            let text = match cli.format {
                Format::Json => {
                    let mut v = o.json;
                    round_floats(&mut v);
                    serde_json::to_string_pretty(&v).expect("json value") + "\n"
                }
                Format::Csv => o.csv,
                Format::Table => o.table,
            };
            let _ = out.write_all(text.as_bytes());
            if o.ok {
                0
            } else {
                let _ = writeln!(err, "verification failed");
                1
            }
        }
        Err(Failure::Usage(m)) => {
            let _ = writeln!(err, "error: {m}");
            2
        }
        Err(Failure::Verification(m)) => {
            let _ = writeln!(err, "error: {m}");
            1
        }
    }
}

fn read_spec(path: &PathBuf) -> Result<CMFunction, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    parse_function_spec(&text).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn parse_eta(item: &str) -> Result<(String, i64), Failure> {
    let (p, s) = item
        .split_once('=')
        .ok_or_else(|| usage(format!("--eta expects P=SIGN, got {item:?}")))?;
    let sign = match s.trim() {
        "+1" | "1" | "+" => 1,
        "-1" | "-" => -1,
        other => return Err(usage(format!("--eta sign must be +1 or -1, got {other:?}"))),
    };
    Ok((p.trim().to_string(), sign))
}

impl FunctionArgs {
    fn build(&self) -> Result<CMFunction, Failure> {
        if let Some(path) = &self.spec {
            return read_spec(path);
        }
        let q = self.q.ok_or_else(|| usage("either --q or --spec is required"))?;
        let mut eta = serde_json::Map::new();
        for item in &self.eta {
            let (p, s) = parse_eta(item)?;
            eta.insert(p, s.into());
        }
        let kind = match self.kind {
            KindArg::Principal => CharacterKind::Principal,
            KindArg::Kronecker => CharacterKind::Kronecker,
        };
        let mut flips = self.flips.clone();
        flips.sort_unstable();
        flips.dedup();
        let doc = serde_json::json!({ "modulus": q, "kind": kind, "eta": eta, "flips": flips });
        parse_function_spec(&doc.to_string()).map_err(usage)
    }
}

fn dispatch(command: Command) -> Result<Output, Failure> {
    match command {
        Command::Delta { func, k, bound } => delta(&func.build()?, k, bound),
        Command::Extend { func, k, bound } => extend(&func.build()?, k, bound),
        Command::Scan { func, limit } => scan(&func.build()?, limit),
        Command::Lmean { func, points, tol } => lmean(&func.build()?, &points, tol),
        Command::LowerBound {
            q,
            k,
            empirical_eta,
            bound,
        } => lower_bound(q, k, empirical_eta, bound),
        Command::VerifyCatalog { limit, family } => verify_catalog(limit, &family),
        Command::VerifyCertificate { cert } => check_certificate(&cert),
        Command::Distance { spec, against, x } => distance(&read_spec(&spec)?, &read_spec(&against)?, x),
    }
}

fn spec_value(f: &CMFunction) -> Value {
    serde_json::to_value(FunctionSpec::from_function(f)).expect("spec serializes")
}

fn signs(pattern: &[i8]) -> String {
    pattern.iter().map(|&s| if s > 0 { '+' } else { '-' }).collect()
}

fn join<T: ToString>(items: &[T]) -> String {
    items.iter().map(T::to_string).collect::<Vec<_>>().join(";")
}

fn eta_text(f: &CMFunction) -> String {
    let parts: Vec<String> = f.chi().eta().iter().map(|&(p, s)| format!("{p}={s:+}")).collect();
    parts.join(";")
}

fn table(rows: &[(&str, String)]) -> String {
    let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    let mut s = String::new();
    for (k, v) in rows {
        let _ = writeln!(s, "{k:<width$}  {v}");
    }
    s
}

fn delta(f: &CMFunction, k: u64, bound: Option<u64>) -> Result<Output, Failure> {
    let q = f.modulus();
    let bound = bound.unwrap_or_else(|| default_search_bound(q));
    let parallel = rayon::current_num_threads() > 1;
    let est = patterns::min_minus_window_of(f, q, k, bound, parallel).map_err(usage)?;
    let w = &est.best_window;

    #[derive(Serialize)]
    struct Row<'a> {
        function: Value,
        q: u64,
        k: u64,
        search_bound: u64,
        value: u64,
        witness: u64,
        window_sum: i64,
        pattern: &'a [i8],
        minus_offsets: Vec<u64>,
    }
    let row = Row {
        function: spec_value(f),
        q,
        k,
        search_bound: bound,
        value: est.value,
        witness: w.start,
        window_sum: w.window_sum,
        pattern: &w.pattern,
        minus_offsets: w.minus_offsets(),
    };
    let csv = format!(
        "q,eta,flips,k,search_bound,value,witness,window_sum,pattern\n{q},{},{},{k},{bound},{},{},{},{}\n",
        eta_text(f),
        join(f.flips()),
        est.value,
        w.start,
        w.window_sum,
        signs(&w.pattern)
    );
    let tbl = table(&[
        ("function", f.to_string()),
        ("k", k.to_string()),
        ("search bound", bound.to_string()),
        ("value", est.value.to_string()),
        ("witness", format!("{} (window {}..={})", w.start, w.start + 1, w.start + k)),
        ("window sum", w.window_sum.to_string()),
        ("pattern", signs(&w.pattern)),
        ("minus offsets", join(&w.minus_offsets())),
    ]);
    Ok(Output {
        json: serde_json::to_value(row)?,
        csv,
        table: tbl,
        ok: true,
    })
}

fn extend(f: &CMFunction, k: u64, bound: Option<u64>) -> Result<Output, Failure> {
    if !f.flips().is_empty() {
        return Err(usage("extend takes a modified character; remove the flips"));
    }
    let bound = bound.unwrap_or_else(|| default_search_bound(f.modulus()));
    let ext = match extension::extend(f.chi(), k, bound) {
        Ok(ext) => ext,
        Err(extension::ExtensionError::InvalidInput(m)) => return Err(usage(m)),
        Err(e) => return Err(e.into()),
    };
    let cert = Certificate::from_plan(&ext.plan);
    let csv = format!(
        "k,base_window_start,offsets_J,primes,beta,crt_modulus,witness,pattern\n{},{},{},{},{},{},{},{}\n",
        cert.k,
        cert.base_window_start,
        join(&cert.offsets_j),
        join(&cert.primes),
        cert.beta,
        cert.crt_modulus,
        cert.witness,
        signs(&cert.pattern)
    );
    let tbl = table(&[
        ("base", f.chi().to_string()),
        ("k", cert.k.to_string()),
        ("base window start", cert.base_window_start.to_string()),
        ("offsets J", join(&cert.offsets_j)),
        ("flips", join(&cert.primes)),
        ("beta", cert.beta.to_string()),
        ("crt modulus", cert.crt_modulus.to_string()),
        (
            "witness",
            format!("{} (window {}..={})", cert.witness, cert.witness + 1, cert.witness + k),
        ),
        ("pattern", signs(&cert.pattern)),
        ("extended", ext.f.to_string()),
    ]);
    Ok(Output {
        json: serde_json::to_value(&cert)?,
        csv,
        table: tbl,
        ok: ext.plan.verified,
    })
}

fn scan(f: &CMFunction, limit: u64) -> Result<Output, Failure> {
    let (length, witness) = patterns::longest_run(f, limit);

    #[derive(Serialize)]
    struct Row {
        function: Value,
        limit: u64,
        length: u64,
        witness: u64,
    }
    let csv = format!(
        "q,kind,eta,flips,limit,length,witness\n{},{},{},{},{limit},{length},{witness}\n",
        f.modulus(),
        f.chi().base().kind(),
        eta_text(f),
        join(f.flips()),
    );
    let tbl = table(&[
        ("function", f.to_string()),
        ("limit", limit.to_string()),
        ("longest run", length.to_string()),
        ("witness", format!("{witness} (run {}..={})", witness + 1, witness + length)),
    ]);
    Ok(Output {
        json: serde_json::to_value(Row {
            function: spec_value(f),
            limit,
            length,
            witness,
        })?,
        csv,
        table: tbl,
        ok: true,
    })
}

fn lmean(f: &CMFunction, points: &[u64], tol: f64) -> Result<Output, Failure> {
    if !f.flips().is_empty() {
        return Err(usage("lmean takes a modified character; remove the flips"));
    }
    let reports = analytic::log_mean_sweep(f.chi(), points, tol).map_err(usage)?;
    let eta = eta_text(f);
    let mut csv = String::from("q,eta,Q,lhs,rhs,diff,bound_scale,ratio\n");
    let mut tbl = format!("{}\n{:>10}  {:>18}  {:>18}  {:>18}  {:>18}\n", f.chi(), "Q", "lhs", "rhs", "diff", "ratio");
    for r in &reports {
        let _ = writeln!(
            csv,
            "{},{eta},{},{},{},{},{},{}",
            r.q,
            r.big_q,
            fmt_sig(r.lhs),
            fmt_sig(r.rhs),
            fmt_sig(r.diff),
            fmt_sig(r.bound_scale),
            fmt_sig(r.ratio)
        );
        let _ = writeln!(
            tbl,
            "{:>10}  {:>18}  {:>18}  {:>18}  {:>18}",
            r.big_q,
            fmt_sig(r.lhs),
            fmt_sig(r.rhs),
            fmt_sig(r.diff),
            fmt_sig(r.ratio)
        );
    }
    if let Some(r) = reports.first() {
        let _ = writeln!(
            tbl,
            "L(1, chi) = {} ± {} ({} terms)",
            fmt_sig(r.l_value.value),
            fmt_sig(r.l_value.error_bound),
            r.l_value.terms
        );
    }
    Ok(Output {
        json: serde_json::to_value(&reports)?,
        csv,
        table: tbl,
        ok: true,
    })
}

fn lower_bound(q: u64, k: u64, empirical_eta: Option<i64>, bound: Option<u64>) -> Result<Output, Failure> {
    let top = match empirical_eta {
        Some(eta) => TopTerm::Empirical {
            eta,
            search_bound: bound.unwrap_or_else(|| default_search_bound(q)),
        },
        None => TopTerm::ProvenCap,
    };
    let b = analytic::digit_lower_bound(q, k, top).map_err(usage)?;
    let closed = b.closed_form.map(|c| c.to_string()).unwrap_or_default();
    let csv = format!(
        "q,k,value,certified,closed_form,top_term,digits\n{q},{k},{},{},{closed},{},{}\n",
        b.value,
        b.certified,
        b.top_term,
        join(&b.decomposition.digits)
    );
    let tbl = table(&[
        ("q", q.to_string()),
        ("k", k.to_string()),
        ("digits", join(&b.decomposition.digits)),
        ("leading term", b.top_term.to_string()),
        ("lower bound", b.value.to_string()),
        ("certified", b.certified.to_string()),
        ("closed form", if closed.is_empty() { "n/a".into() } else { closed }),
    ]);
    Ok(Output {
        json: serde_json::to_value(&b)?,
        csv,
        table: tbl,
        ok: true,
    })
}

fn verify_catalog(limit: u64, family: &[u64]) -> Result<Output, Failure> {
    let mut entries = catalog::default_catalog();
    for &p0 in family {
        if p0 == 7 {
            continue;
        }
        entries.push(catalog::length4_family(p0).map_err(usage)?);
    }
    let report = catalog::verify_known_lengths(&entries, limit).map_err(usage)?;
    let mut csv = String::from("name,claimed_length,observed_length,witness,pass\n");
    let mut tbl = format!(
        "{:<14}  {:>7}  {:>8}  {:>10}  {}\n",
        "name", "claimed", "observed", "witness", "result"
    );
    for r in &report.rows {
        let _ = writeln!(
            csv,
            "{},{},{},{},{}",
            r.name, r.claimed_length, r.observed_length, r.witness, r.pass
        );
        let _ = writeln!(
            tbl,
            "{:<14}  {:>7}  {:>8}  {:>10}  {}",
            r.name,
            r.claimed_length,
            r.observed_length,
            r.witness,
            if r.pass { "PASS" } else { "FAIL" }
        );
    }
    let _ = writeln!(tbl, "{}", report.note);
    Ok(Output {
        json: serde_json::to_value(&report)?,
        csv,
        table: tbl,
        ok: report.all_pass,
    })
}

fn check_certificate(path: &PathBuf) -> Result<Output, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    let cert: Certificate =
        serde_json::from_str(&text).map_err(|e| usage(format!("{}: schema violation: {e}", path.display())))?;
    let check = verify_certificate(&cert).map_err(usage)?;
    let csv = format!(
        "valid,window_all_plus,pattern_matches,congruences_hold,primes_admissible\n{},{},{},{},{}\n",
        check.valid, check.window_all_plus, check.pattern_matches, check.congruences_hold, check.primes_admissible
    );
    let tbl = table(&[
        ("window all +1", check.window_all_plus.to_string()),
        ("pattern matches", check.pattern_matches.to_string()),
        ("congruences hold", check.congruences_hold.to_string()),
        ("primes admissible", check.primes_admissible.to_string()),
        ("valid", check.valid.to_string()),
    ]);
    Ok(Output {
        json: serde_json::to_value(&check)?,
        csv,
        table: tbl,
        ok: check.valid,
    })
}

fn distance(f: &CMFunction, g: &CMFunction, x: u64) -> Result<Output, Failure> {
    let d = pretentious_distance(f, g, x);
    Ok(Output {
        json: serde_json::json!({ "f": spec_value(f), "g": spec_value(g), "x": x, "distance": d }),
        csv: format!("x,distance\n{x},{}\n", fmt_sig(d)),
        table: table(&[
            ("f", f.to_string()),
            ("g", g.to_string()),
            ("x", x.to_string()),
            ("distance", fmt_sig(d)),
        ]),
        ok: true,
    })
}

/// Formats `x` with 12 significant digits, dropping trailing zeros.
pub fn fmt_sig(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{x:.11e}");
    let (mant, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..12).contains(&exp) {
        let fixed = format!("{:.*}", (11 - exp) as usize, x);
        trim_zeros(&fixed).to_string()
    } else {
        format!("{}e{exp}", trim_zeros(mant))
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn round_floats(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().expect("f64");
            let r: f64 = fmt_sig(x).parse().unwrap_or(x);
            if let Some(num) = serde_json::Number::from_f64(r) {
                *n = num;
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_floats),
        Value::Object(map) => map.values_mut().for_each(round_floats),
        _ => {}
    }
}
