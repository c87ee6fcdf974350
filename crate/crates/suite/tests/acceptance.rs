//! Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#[path = "../../core/tests/suites/mod.rs"]
mod suites;

use primeconst::families::{admissible_a, factorial_n0};
use primeconst::interval::parse_rational;
use primeconst::sequences::{fit_gap_constant, is_prime};
use primeconst::verifier;
use primeconst::Exec;
use primeconst_cli::document::ResultDocument;
use rug::ops::Pow;
use rug::{Integer, Rational};
use serde_json::Value;
use std::time::{Duration, Instant};

const MILLS_PREFIX: &str = "1.30637788386";
const MILLS_CHAIN: [&str; 4] = ["2", "11", "1361", "2521008887"];
const MILLS_LIMIT: Duration = Duration::from_secs(60);
const WRIGHT_CHAIN: [&str; 4] = ["2", "5", "37", "137438953481"];
const WRIGHT_LIMIT: Duration = Duration::from_secs(30);
const FACTORIAL_LIMIT: Duration = Duration::from_secs(120);
const FACTORIAL_N0_MAX: u64 = 10_000;
const FIT_LIMIT: u64 = 10_000_000;
/// Decimal places carried by the integer-root digit oracle.
const ORACLE_PLACES: u32 = 40;
/// GMP Miller-Rabin repetitions used as an independent primality oracle.
const GMP_REPS: u32 = 40;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

/// Runs the command-line front end in process; diagnostics go to stderr.
fn primeconst(args: &[&str]) -> (u8, String) {
    let mut out = Vec::new();
    let code = primeconst_cli::run(std::iter::once("primeconst").chain(args.iter().copied()), &mut out);
    (code, String::from_utf8(out).expect("utf-8 output"))
}

fn compute(args: &[&str]) -> Result<ResultDocument, String> {
    let (code, out) = primeconst(&[&["compute"], args].concat());
    if code != 0 {
        return Err(format!("compute {} exited {code}", args.join(" ")));
    }
    ResultDocument::parse(&out).map_err(|e| e.to_string())
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn trial_division(n: u64) -> bool {
    n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| !n.is_multiple_of(d))
}

/// GMP's probabilistic test, plus trial division where that is cheap.
fn oracle_prime(n: &Integer) -> bool {
    match n.to_u64() {
        Some(v) if v < 1 << 40 => trial_division(v),
        _ => n.is_probably_prime(GMP_REPS) != rug::integer::IsPrime::No,
    }
}

fn oracle_next_prime(from: &Integer) -> Integer {
    let mut u = from.clone();
    while !oracle_prime(&u) {
        u += 1u32;
    }
    u
}

fn chain_of(doc: &ResultDocument) -> Vec<Integer> {
    doc.chain.iter().map(|e| e.v_n.parse().unwrap()).collect()
}

/// `floor(10^places * v^(1/r))` as a decimal string with the point placed.
fn root_digits(v: &Integer, r: u32, places: u32) -> String {
    let scaled: Integer = v * Integer::from(10).pow(places * r);
    let root = scaled.root(r).to_string();
    let (int, frac) = root.split_at(root.len() - places as usize);
    format!("{}.{frac}", if int.is_empty() { "0" } else { int })
}

fn common_prefix(a: &str, b: &str) -> String {
    a.chars().zip(b.chars()).take_while(|(x, y)| x == y).map(|(x, _)| x).collect()
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let doc = compute(&["--family", "mills", "--terms", "5", "--digits", "12"])?;
    let elapsed = start.elapsed();
    let chain = chain_of(&doc);
    ensure(chain.len() == 5, || format!("{} terms", chain.len()))?;
    for (got, want) in chain.iter().zip(MILLS_CHAIN) {
        ensure(got.to_string() == want, || format!("chain {chain:?}"))?;
    }
    // each term is the least prime >= the cube of the previous one
    for w in chain.windows(2) {
        let cube = w[0].clone().pow(3u32);
        let next = oracle_next_prime(&cube);
        ensure(next == w[1], || format!("oracle gives {next} after {}^3, chain has {}", w[0], w[1]))?;
    }
    // A lies in [v^(3^-n), (v+1)^(3^-n)) with n = 5
    let v = &chain[4];
    let r = 3u32.pow(5);
    let lo = root_digits(v, r, ORACLE_PLACES);
    let hi = root_digits(&Integer::from(v + 1u32), r, ORACLE_PLACES);
    let certain = common_prefix(&lo, &hi);
    ensure(certain.starts_with(MILLS_PREFIX), || format!("oracle certifies only {certain}"))?;
    ensure(doc.digits.starts_with(MILLS_PREFIX), || format!("digits {}", doc.digits))?;
    ensure(lo.starts_with(&doc.digits), || format!("digits {} disagree with oracle {lo}", doc.digits))?;
    ensure(elapsed < MILLS_LIMIT, || format!("took {elapsed:.1?}"))?;
    Ok(format!(
        "chain 2, 11, 1361, 2521008887, {}; digits {} ({:.2?}, limit {:?})",
        chain[4], doc.digits, elapsed, MILLS_LIMIT
    ))
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let doc = compute(&["--family", "wright", "--terms", "4"])?;
    let elapsed = start.elapsed();
    let chain = chain_of(&doc);
    for (got, want) in chain.iter().zip(WRIGHT_CHAIN) {
        ensure(got.to_string() == want, || format!("chain {chain:?}"))?;
    }
    ensure(chain.len() == 4, || format!("{} terms", chain.len()))?;
    for w in chain.windows(2) {
        let e = w[0].to_u32().ok_or("exponent out of range")?;
        let h = Integer::from(2).pow(e);
        let h_next = Integer::from(2).pow(e + 1);
        ensure(oracle_next_prime(&h) == w[1], || format!("least prime >= 2^{e} is not {}", w[1]))?;
        // h(v) <= w < h(v + 1) - 1
        ensure(h <= w[1] && Integer::from(&w[1] + 1u32) < h_next, || format!("step inequality fails at {}", w[0]))?;
    }
    let r = doc.to_result().map_err(|e| e.to_string())?;
    let floors = verifier::verify_floors(&r, None, Exec::default());
    ensure(floors.passed(), || format!("{floors:?}"))?;
    ensure(elapsed < WRIGHT_LIMIT, || format!("took {elapsed:.1?}"))?;
    Ok(format!("chain {}; step inequalities exact ({elapsed:.2?}, limit {WRIGHT_LIMIT:?})", WRIGHT_CHAIN.join(", ")))
}

fn criterion_3() -> Outcome {
    let two = Rational::from(2);
    let a = admissible_a(&two, &two).map_err(|e| e.to_string())?;
    let doc = compute(&["--family", "farhi-power:xi=2,k=2", "--terms", "3"])?;
    let param = doc.parameters.get("a").ok_or("no parameter a")?;
    ensure(parse_rational(param).ok() == Some(a.clone()), || format!("a = {param}, admissible_a = {a}"))?;
    let chain = chain_of(&doc);
    ensure(chain.len() == 3, || format!("{} terms", chain.len()))?;
    for v in &chain {
        ensure(oracle_prime(v), || format!("{v} is composite"))?;
    }
    let r = doc.to_result().map_err(|e| e.to_string())?;
    let floors = verifier::verify_floors(&r, None, Exec::default());
    ensure(floors.passed(), || format!("{floors:?}"))?;
    Ok(format!("a = {a}; chain {chain:?} all prime; floors pass at {} bits", floors.precision))
}

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let k = Rational::from((3, 2));
    let eps = Rational::from((1, 2));
    let c = fit_gap_constant(FIT_LIMIT, &k, Exec::default()).map_err(|e| e.to_string())?;
    let cq = Rational::from_f64(c).ok_or("non-finite fit")?;
    let n0 = factorial_n0(&k, &eps, &cq).map_err(|e| e.to_string())?;
    ensure(n0 <= FACTORIAL_N0_MAX, || {
        format!("c_1.5 = {c} over primes to {FIT_LIMIT}; factorial_n0 = {n0} > {FACTORIAL_N0_MAX}, chain not attempted")
    })?;
    let doc = compute(&["--family", "farhi-factorial:k=1.5,eps=0.5", "--terms", "5"])?;
    let r = doc.to_result().map_err(|e| e.to_string())?;
    let floors = verifier::verify_floors(&r, None, Exec::default());
    let src = primeconst::sequences::SequenceSource::primes();
    let membership = verifier::verify_membership(&r, &src, Exec::default());
    ensure(floors.passed() && membership.passed(), || "verification failed".into())?;
    let elapsed = start.elapsed();
    ensure(elapsed < FACTORIAL_LIMIT, || format!("took {elapsed:.1?}"))?;
    Ok(format!("c = {c}, n0 = {n0}; 5-term chain verified ({elapsed:.2?})"))
}

fn criterion_5() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let path = dir.path().join("not-div-4.txt");
    let top = 3_000_000u64;
    let list: String = (1..=top).filter(|i| i % 4 != 0).map(|i| format!("{i}\n")).collect();
    std::fs::write(&path, list).map_err(|e| e.to_string())?;
    let src = format!("file:{}", path.display());
    let doc = compute(&["--family", "geometric:A=5", "--source", &src, "--terms", "10"])?;
    let chain = chain_of(&doc);
    ensure(chain.len() == 10, || format!("{} terms", chain.len()))?;
    // greedy subsequence by brute force: least member >= 5 v
    let member = |u: u64| u >= 1 && !u.is_multiple_of(4);
    let mut want = vec![(1..).find(|&u| member(u)).unwrap()];
    while want.len() < 10 {
        let from = 5 * want.last().unwrap();
        want.push((from..).find(|&u| member(u)).unwrap());
    }
    let got: Vec<u64> = chain.iter().map(|v| v.to_u64().unwrap()).collect();
    ensure(got == want, || format!("chain {got:?}, oracle {want:?}"))?;
    // every point of the bracket reproduces the chain
    let n_first = doc.chain[0].n;
    let lo = parse_rational(&doc.inner.lo).map_err(|e| e.to_string())?;
    let hi = parse_rational(&doc.inner.hi).map_err(|e| e.to_string())?;
    for (i, v) in got.iter().enumerate() {
        let scale = Rational::from(Integer::from(5).pow((n_first + i as u64) as u32));
        let fl = |x: &Rational| Rational::from(x * &scale).floor().numer().to_u64().unwrap();
        ensure(fl(&lo) == *v && fl(&hi) == *v && member(*v), || format!("floor mismatch at term {i}"))?;
    }
    ensure(got.windows(2).all(|w| w[0] < w[1]), || "not increasing".into())?;
    Ok(format!("chain {got:?} matches brute force; bracket floors all members"))
}

fn criterion_6() -> Outcome {
    let start = Instant::now();
    let results: Vec<(&str, Result<(), String>)> = std::thread::scope(|s| {
        let handles: Vec<_> = suites::ALL
            .iter()
            .map(|&(name, f)| (name, s.spawn(f)))
            .collect();
        handles
            .into_iter()
            .map(|(name, h)| (name, h.join().unwrap_or_else(|_| Err("panicked".into()))))
            .collect()
    });
    let failed: Vec<String> = results
        .iter()
        .filter_map(|(name, r)| r.as_ref().err().map(|e| format!("{name}: {e}")))
        .collect();
    ensure(failed.is_empty(), || failed.join("; "))?;
    Ok(format!("{} suites x 1000 cases, fixed seed ({:.1?})", results.len(), start.elapsed()))
}

fn criterion_7() -> Outcome {
    for n in 0..1_000_000u64 {
        ensure(is_prime(&Integer::from(n)).0 == trial_division(n), || format!("disagree at {n}"))?;
    }
    let (code, out) = primeconst(&["gaps", "--limit", "10000000", "--g", "pow:1", "--json"]);
    ensure(code == 0, || format!("gaps exited {code}"))?;
    let r: Value = serde_json::from_str(&out).map_err(|e| e.to_string())?;
    ensure(r["violation_count"] == 0 && r["indeterminate"].as_array().is_some_and(Vec::is_empty), || out.clone())?;
    Ok(format!(
        "is_prime = trial division on [0, 10^6); {} prime pairs to 10^7, 0 violations of g(x) = x",
        r["pairs_checked"]
    ))
}

fn criterion_8() -> Outcome {
    let mut hashes = Vec::new();
    for family in ["mills", "farhi-power:xi=2,k=2", "lambda-power:lambda=3/2,M=1000"] {
        let a = compute(&["--family", family, "--terms", "3"])?;
        let b = compute(&["--family", family, "--terms", "3"])?;
        ensure(a.integrity.is_some() && a.integrity == b.integrity, || format!("{family}: hashes differ"))?;
        hashes.push(format!("{family} {}", &a.integrity.unwrap()[..19]));
    }
    Ok(hashes.join(", "))
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("mills reproduction", criterion_1),
        ("wright reproduction", criterion_2),
        ("farhi-power instance", criterion_3),
        ("farhi-factorial instance", criterion_4),
        ("geometric file-source instance", criterion_5),
        ("property suites", criterion_6),
        ("oracle equivalence", criterion_7),
        ("determinism", criterion_8),
    ];
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {} {name} [{secs:.1} s]: {detail}", i + 1),
            Err(detail) => {
                failures += 1;
                println!("FAIL {} {name} [{secs:.1} s]: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} of {} criteria pass", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
