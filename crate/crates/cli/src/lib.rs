//! Command-line front end: `compute`, `verify`, `gaps`, `hypothesis`.

pub mod cache;
pub mod document;

use anyhow::{anyhow, bail, Context};
use cache::{Cache, CacheKey, Recorder};
use clap::{Args, Parser, Subcommand};
use document::ResultDocument;
use primeconst::constructor::{self, extract_digits, ConstructorConfig, SeedPolicy};
use primeconst::families::{
    check_hypothesis, FamilyDescriptor, FamilySpec, GapFunction, HypothesisConfig, HypothesisReport, SourceFit,
};
use primeconst::interval::{parse_rational, DEFAULT_PRECISION, DEFAULT_PRECISION_MAX};
use primeconst::sequences::{
    fit_gap_constant, scan_gaps, FileSequence, GapReport, PrimalityConfig, PrimeSource, SequenceSource,
    DEFAULT_INDEX_LIMIT,
};
use primeconst::sequences::primality::DEFAULT_MR_ROUNDS;
use primeconst::verifier::{self, Status, TermCheck, VerificationReport};
use primeconst::{Error, Exec};
use rug::{Integer, Rational};
use serde_json::{json, Value};
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

pub const EXIT_OK: u8 = 0;
pub const EXIT_FAILURE: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_GAP_VIOLATION: u8 = 3;
pub const EXIT_PRECISION: u8 = 4;
pub const EXIT_EXHAUSTED: u8 = 5;
pub const EXIT_VERIFY_FAILED: u8 = 6;

/// Default upper limit for fitted gap constants and maximal gaps.
pub const DEFAULT_FIT_LIMIT: u64 = 10_000_000;

#[derive(Parser, Debug)]
#[command(name = "primeconst", version, about = "Certified prime-representing constants")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Build a chain of terms and a certified bracket for the constant.
    Compute(ComputeArgs),
    /// Re-check a result document independently.
    Verify(VerifyArgs),
    /// Scan gaps between consecutive terms, or fit a log-power gap constant.
    Gaps(GapsArgs),
    /// Check the family hypotheses at sampled points.
    Hypothesis(HypothesisArgs),
}

#[derive(Args, Debug, Clone)]
pub struct SourceArgs {
    /// `primes` or `file:PATH` (one integer per line, `#` comments).
    #[arg(long, default_value = "primes")]
    pub source: String,
    /// Extra random-base Miller-Rabin rounds above 2^64.
    #[arg(long, default_value_t = DEFAULT_MR_ROUNDS)]
    pub mr_rounds: u32,
    /// Range used to fit omitted constants (farhi-factorial c, lambda-power M).
    #[arg(long, default_value_t = DEFAULT_FIT_LIMIT)]
    pub fit_limit: u64,
}

#[derive(Args, Debug)]
pub struct ComputeArgs {
    /// Family spec, e.g. `mills`, `farhi-power:xi=2,k=2`, `geometric:A=5`.
    #[arg(long)]
    pub family: String,
    /// Override the gap function, e.g. `pow:2/3`, `logpow:c=2,k=1.5,offset=1`.
    #[arg(long = "g")]
    pub gap: Option<String>,
    /// Number of chain terms (default depends on the family).
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub terms: Option<u64>,
    /// Significant digits to aim for.
    #[arg(long, default_value_t = 20)]
    pub digits: usize,
    #[command(flatten)]
    pub source: SourceArgs,
    #[arg(long, default_value_t = DEFAULT_PRECISION)]
    pub precision_start: u32,
    #[arg(long, env = "PRIMECONST_PRECISION_MAX", default_value_t = DEFAULT_PRECISION_MAX)]
    pub precision_max: u32,
    /// Seed with the source term of this 0-based ordinal.
    #[arg(long)]
    pub seed_index: Option<u64>,
    /// JSON Lines checkpoint to resume from and append to.
    #[arg(long)]
    pub resume: Option<PathBuf>,
    /// Write the result document here.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Print the result document (the default).
    #[arg(long, conflicts_with = "plain")]
    pub json: bool,
    /// Print only the certified digits.
    #[arg(long)]
    pub plain: bool,
    /// Omit the timestamp.
    #[arg(long)]
    pub no_timestamp: bool,
    /// Log each certified term to stderr.
    #[arg(long, short)]
    pub verbose: bool,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Floor-check precision (default: twice the construction precision).
    #[arg(long)]
    pub precision: Option<u32>,
    #[arg(long, default_value_t = 100)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub rng_seed: u64,
    #[arg(long)]
    pub json: bool,
}

#[derive(Args, Debug)]
pub struct GapsArgs {
    /// Check pairs `(u, u')` with `u' <= limit`.
    #[arg(long)]
    pub limit: String,
    /// Gap function to test; defaults to `pow:1`.
    #[arg(long = "g", conflicts_with = "fit")]
    pub gap: Option<String>,
    /// Fit `c` in `g(x) = c (ln x)^k + 1`, e.g. `k=1.5`.
    #[arg(long)]
    pub fit: Option<String>,
    #[command(flatten)]
    pub source: SourceArgs,
    /// Violations listed in the report.
    #[arg(long, default_value_t = 20)]
    pub show: usize,
    #[arg(long)]
    pub json: bool,
}

#[derive(Args, Debug)]
pub struct HypothesisArgs {
    #[arg(long)]
    pub family: String,
    #[arg(long = "g")]
    pub gap: Option<String>,
    /// Inclusive index range `A..B`.
    #[arg(long)]
    pub n_range: Option<String>,
    #[arg(long, default_value_t = 100)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub rng_seed: u64,
    #[command(flatten)]
    pub source: SourceArgs,
    #[arg(long)]
    pub json: bool,
}

/// An error with its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub error: anyhow::Error,
}

impl Failure {
    fn usage(error: impl Into<anyhow::Error>) -> Self {
        Failure {
            code: EXIT_USAGE,
            error: error.into(),
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(error: anyhow::Error) -> Self {
        let code = match error.downcast_ref::<Error>() {
            Some(Error::GapViolation(_)) => EXIT_GAP_VIOLATION,
            Some(Error::PrecisionExhausted { .. }) => EXIT_PRECISION,
            Some(Error::SequenceExhausted(_)) => EXIT_EXHAUSTED,
            Some(Error::Parse(_)) | Some(Error::SequenceFile { .. }) => EXIT_USAGE,
            _ => EXIT_FAILURE,
        };
        Failure { code, error }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        anyhow::Error::from(e).into()
    }
}

type CmdResult = Result<u8, Failure>;

/// Parses `args` and runs the command, writing results to `out`.
pub fn run<I, T>(args: I, out: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let result = match cli.command {
        Command::Compute(a) => compute(a, out),
        Command::Verify(a) => verify(a, out),
        Command::Gaps(a) => gaps(a, out),
        Command::Hypothesis(a) => hypothesis(a, out),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            f.code
        }
    }
}

fn open_source(spec: &str, mr_rounds: u32) -> anyhow::Result<SequenceSource> {
    if spec == "primes" {
        let cfg = PrimalityConfig { mr_rounds };
        return Ok(SequenceSource::Primes(PrimeSource::new(cfg, DEFAULT_INDEX_LIMIT, Exec::default())));
    }
    let Some(path) = spec.strip_prefix("file:") else {
        bail!("unknown source {spec:?}; expected primes or file:PATH");
    };
    Ok(SequenceSource::file(FileSequence::load(Path::new(path))?))
}

fn resolve_family(spec: &str, gap: Option<&str>, source: &SequenceSource, args: &SourceArgs) -> anyhow::Result<FamilyDescriptor> {
    let parsed: FamilySpec = spec.parse()?;
    let fit = SourceFit {
        source,
        limit: args.fit_limit,
        exec: Exec::default(),
    };
    let mut fam = parsed.resolve(&fit)?;
    if let Some(g) = gap {
        fam = fam.with_gap(g.parse::<GapFunction>()?);
    }
    Ok(fam)
}

fn write_out(out: &mut dyn Write, text: &str) -> anyhow::Result<()> {
    writeln!(out, "{text}")?;
    Ok(())
}

fn compute(a: ComputeArgs, out: &mut dyn Write) -> CmdResult {
    if a.precision_start < 2 || a.precision_max < a.precision_start {
        return Err(Failure::usage(anyhow!("need 2 <= --precision-start <= --precision-max")));
    }
    let source = open_source(&a.source.source, a.source.mr_rounds).map_err(Failure::usage)?;
    let family = resolve_family(&a.family, a.gap.as_deref(), &source, &a.source).map_err(Failure::usage)?;
    let terms = a.terms.unwrap_or_else(|| family.default_terms());
    let policy = match a.seed_index {
        Some(k) => SeedPolicy::ExplicitIndex(k),
        None => SeedPolicy::SmallestAdmissible,
    };
    let policy_text = match policy {
        SeedPolicy::ExplicitIndex(k) => format!("index:{k}"),
        SeedPolicy::SmallestAdmissible => "smallest-admissible".to_string(),
    };
    let config = ConstructorConfig {
        precision_start: a.precision_start,
        precision_max: a.precision_max,
        ..ConstructorConfig::default()
    };
    for note in &family.assumptions {
        eprintln!("assumption: {note}");
    }
    let mut cache = match &a.resume {
        Some(path) => Some(
            Cache::open(
                path,
                CacheKey {
                    family_spec: family.to_spec(),
                    gap: family.gap.to_spec(),
                    source: source.describe(),
                    seed_policy: policy_text.clone(),
                },
            )
            .map_err(Failure::usage)?,
        ),
        None => None,
    };
    let replay = match cache.as_mut() {
        Some(c) => c.load().map_err(Failure::usage)?,
        None => Vec::new(),
    };
    let mut recorder = Recorder {
        cache: cache.as_mut(),
        verbose: a.verbose,
    };
    let result = constructor::run(&family, &source, terms, a.digits, policy, &config, &replay, &mut recorder)
        .map_err(Failure::from)?;
    if result.digits.significant() < a.digits {
        eprintln!(
            "warning: {} of {} requested digits certified; more terms are needed for more digits",
            result.digits.significant(),
            a.digits
        );
    }
    let stamp = (!a.no_timestamp).then(cache::unix_now);
    let doc = ResultDocument::from_result(&result, &policy_text, a.source.mr_rounds, stamp);
    let rendered = doc.render();
    if let Some(path) = &a.out {
        std::fs::write(path, format!("{rendered}\n"))
            .with_context(|| format!("writing {}", path.display()))
            .map_err(Failure::from)?;
    }
    if a.plain {
        write_out(out, &doc.digits)?;
    } else if a.out.is_none() || a.json {
        write_out(out, &rendered)?;
    }
    Ok(EXIT_OK)
}

fn term_json(t: &TermCheck) -> Value {
    json!({"n": t.n, "v_n": t.v.to_string(), "status": t.status.as_str(), "detail": t.detail})
}

fn hypothesis_json(r: &HypothesisReport) -> Value {
    let finding = |f: &primeconst::families::Finding| json!({"n": f.n, "check": f.kind.as_str(), "x": f.x, "detail": f.detail});
    json!({
        "family": r.family,
        "n_range": [r.n_lo, r.n_hi],
        "samples": r.samples,
        "seed": r.seed,
        "window": [r.window.0, r.window.1],
        "certified": r.certified,
        "structural": r.structural,
        "violations": r.violations.iter().map(finding).collect::<Vec<_>>(),
        "indeterminate": r.indeterminate.iter().map(finding).collect::<Vec<_>>(),
        "summary": r.summary(),
    })
}

/// Outcome of `verify` beyond the core report.
struct DocumentChecks {
    integrity: bool,
    digits: Option<String>,
}

fn verify_json(doc: &ResultDocument, checks: &DocumentChecks, rep: &VerificationReport) -> Value {
    json!({
        "family_spec": doc.family_spec,
        "integrity": if checks.integrity { "ok" } else { "mismatch" },
        "digits": match &checks.digits { None => json!("ok"), Some(e) => json!(e) },
        "floors": {
            "passed": rep.floors.passed(),
            "precision_bits": rep.floors.precision,
            "bracket_errors": rep.floors.bracket_errors,
            "terms": rep.floors.terms.iter().map(term_json).collect::<Vec<_>>(),
        },
        "membership": {
            "passed": rep.membership.passed(),
            "ordering_errors": rep.membership.ordering_errors,
            "terms": rep.membership.terms.iter().map(term_json).collect::<Vec<_>>(),
        },
        "hypotheses": {
            "passed": rep.hypotheses.passed(),
            "sampled": hypothesis_json(&rep.hypotheses.sampled),
            "realized": rep.hypotheses.realized.iter().map(term_json).collect::<Vec<_>>(),
            "assumptions": rep.hypotheses.assumptions,
        },
        "warnings": rep.warnings(),
        "passed": checks.integrity && checks.digits.is_none() && rep.passed(),
    })
}

fn status_line(name: &str, passed: bool, terms: &[TermCheck]) -> String {
    let mut s = format!("{name}: {}", if passed { "pass" } else { "FAIL" });
    for t in terms.iter().filter(|t| t.status != Status::Pass) {
        s.push_str(&format!("\n  n = {} (v = {}): {} - {}", t.n, t.v, t.status, t.detail));
    }
    s
}

fn verify(a: VerifyArgs, out: &mut dyn Write) -> CmdResult {
    let text = std::fs::read_to_string(&a.input)
        .with_context(|| format!("reading {}", a.input.display()))
        .map_err(Failure::usage)?;
    let doc = ResultDocument::parse(&text).map_err(Failure::usage)?;
    let integrity = doc.integrity_ok();
    let result = doc.to_result().map_err(Failure::usage)?;
    let source = open_source(&doc.source, doc.mr_rounds).map_err(Failure::usage)?;
    let recomputed = extract_digits(result.bracket.lo(), result.bracket.hi(), usize::MAX >> 1);
    let digits = (!recomputed.text.starts_with(&doc.digits))
        .then(|| format!("digits {:?} are not certified by the bracket ({:?})", doc.digits, recomputed.text));
    let hcfg = HypothesisConfig {
        samples: a.samples,
        seed: a.rng_seed,
        ..HypothesisConfig::default()
    };
    let rep = verifier::verify(&result, &source, &hcfg, a.precision).map_err(Failure::from)?;
    let checks = DocumentChecks { integrity, digits };
    let passed = checks.integrity && checks.digits.is_none() && rep.passed();
    if a.json {
        write_out(out, &serde_json::to_string_pretty(&verify_json(&doc, &checks, &rep)).expect("json"))?;
    } else {
        let mut lines = vec![
            format!("family: {} (g = {})", doc.family_spec, doc.gap),
            format!("integrity: {}", if checks.integrity { "ok" } else { "MISMATCH" }),
            format!("digits: {}", checks.digits.as_deref().unwrap_or("ok")),
        ];
        let mut floors = status_line("floors", rep.floors.passed(), &rep.floors.terms);
        for e in &rep.floors.bracket_errors {
            floors.push_str(&format!("\n  {e}"));
        }
        lines.push(floors + &format!(" ({} terms at {} bits)", rep.floors.terms.len(), rep.floors.precision));
        let mut membership = status_line("membership", rep.membership.passed(), &rep.membership.terms);
        for e in &rep.membership.ordering_errors {
            membership.push_str(&format!("\n  {e}"));
        }
        lines.push(membership);
        let mut hyp = status_line("hypotheses", rep.hypotheses.passed(), &rep.hypotheses.realized);
        hyp.push_str(&format!("\n  {}", rep.hypotheses.sampled.summary()));
        for f in &rep.hypotheses.sampled.violations {
            hyp.push_str(&format!("\n  violation: {} at n = {}, x = {}: {}", f.kind, f.n, f.x, f.detail));
        }
        lines.push(hyp);
        for w in rep.warnings() {
            lines.push(format!("warning: {w}"));
        }
        for note in &rep.hypotheses.assumptions {
            lines.push(format!("assumption: {note}"));
        }
        lines.push(format!("result: {}", if passed { "PASS" } else { "FAIL" }));
        write_out(out, &lines.join("\n"))?;
    }
    Ok(if passed { EXIT_OK } else { EXIT_VERIFY_FAILED })
}

fn parse_k(text: &str) -> anyhow::Result<Rational> {
    let v = text.strip_prefix("k=").unwrap_or(text);
    let k = parse_rational(v)?;
    if k <= 0 {
        bail!("k must be positive");
    }
    Ok(k)
}

fn gap_report_json(r: &GapReport, show: usize) -> Value {
    let pair = |p: &primeconst::sequences::GapPair| json!({"index": p.index, "term": p.term.to_string(), "next": p.next.to_string()});
    json!({
        "limit": r.limit.to_string(),
        "gap_function": r.gap_function,
        "pairs_checked": r.pairs_checked,
        "max_gap": r.max_gap.to_string(),
        "argmax_term": r.argmax_term.as_ref().map(|t| t.to_string()),
        "violation_count": r.violation_count,
        "violations": r.violations.iter().take(show).map(pair).collect::<Vec<_>>(),
        "indeterminate": r.indeterminate.iter().map(pair).collect::<Vec<_>>(),
        "fitted_constant": r.fitted_constant,
    })
}

fn gaps(a: GapsArgs, out: &mut dyn Write) -> CmdResult {
    let limit: Integer = a
        .limit
        .parse::<Integer>()
        .ok()
        .or_else(|| parse_rational(&a.limit).ok().filter(|q| *q.denom() == 1).map(|q| q.numer().clone()))
        .ok_or_else(|| Failure::usage(anyhow!("--limit must be an integer, got {:?}", a.limit)))?;
    if limit < 3 {
        return Err(Failure::usage(anyhow!("--limit must be at least 3")));
    }
    let source = open_source(&a.source.source, a.source.mr_rounds).map_err(Failure::usage)?;
    let (g, fitted) = match &a.fit {
        Some(k) => {
            let k = parse_k(k).map_err(Failure::usage)?;
            let lim = limit
                .to_u64()
                .ok_or_else(|| Failure::usage(anyhow!("--limit too large to fit")))?;
            if !matches!(source, SequenceSource::Primes(_)) {
                return Err(Failure::usage(anyhow!("--fit works over primes only")));
            }
            let c = fit_gap_constant(lim, &k, Exec::default()).map_err(Failure::from)?;
            let cq = Rational::from_f64(c).expect("finite fit");
            (GapFunction::log_power(cq, k, Rational::from(1))?, Some(c))
        }
        None => {
            let spec = a.gap.as_deref().unwrap_or("pow:1");
            (spec.parse::<GapFunction>().map_err(Failure::usage)?, None)
        }
    };
    let mut report = scan_gaps(&source, &limit, &g).map_err(|e| match e {
        Error::Domain(_) => Failure::usage(e),
        other => other.into(),
    })?;
    report.fitted_constant = fitted;
    if a.json {
        write_out(out, &serde_json::to_string_pretty(&gap_report_json(&report, a.show)).expect("json"))?;
    } else {
        let mut lines = vec![
            format!("source: {}", source.describe()),
            format!("limit: {}", report.limit),
            format!("g: {}", report.gap_function),
            format!("pairs checked: {}", report.pairs_checked),
            format!(
                "max gap: {}{}",
                report.max_gap,
                report.argmax_term.as_ref().map(|t| format!(" after {t}")).unwrap_or_default()
            ),
        ];
        if let Some(c) = fitted {
            lines.push(format!("fitted c: {c}"));
        }
        lines.push(format!("violations: {}", report.violation_count));
        for p in report.violations.iter().take(a.show) {
            lines.push(format!("  #{}: {} -> {} (gap {})", p.index, p.term, p.next, Integer::from(&p.next - &p.term)));
        }
        if !report.indeterminate.is_empty() {
            lines.push(format!("indeterminate: {}", report.indeterminate.len()));
        }
        write_out(out, &lines.join("\n"))?;
    }
    Ok(EXIT_OK)
}

fn parse_range(text: &str) -> anyhow::Result<(u64, u64)> {
    let (a, b) = text
        .split_once("..=")
        .or_else(|| text.split_once(".."))
        .ok_or_else(|| anyhow!("expected A..B, got {text:?}"))?;
    let (a, b) = (a.trim().parse::<u64>()?, b.trim().parse::<u64>()?);
    if b < a {
        bail!("empty range {text:?}");
    }
    Ok((a, b))
}

fn hypothesis(a: HypothesisArgs, out: &mut dyn Write) -> CmdResult {
    let source = open_source(&a.source.source, a.source.mr_rounds).map_err(Failure::usage)?;
    let family = resolve_family(&a.family, a.gap.as_deref(), &source, &a.source).map_err(Failure::usage)?;
    let (lo, hi) = match &a.n_range {
        Some(r) => parse_range(r).map_err(Failure::usage)?,
        None => (family.n0, family.n0 + 5),
    };
    if a.samples == 0 {
        return Err(Failure::usage(anyhow!("--samples must be positive")));
    }
    let cfg = HypothesisConfig {
        samples: a.samples,
        seed: a.rng_seed,
        ..HypothesisConfig::default()
    };
    let report = check_hypothesis(&family, lo, hi, &cfg).map_err(|e| match e {
        Error::Domain(_) => Failure::usage(e),
        other => other.into(),
    })?;
    if a.json {
        write_out(out, &serde_json::to_string_pretty(&hypothesis_json(&report)).expect("json"))?;
    } else {
        let mut lines = vec![
            format!("family: {} (g = {})", report.family, family.gap),
            format!("window: [{}, {}]", report.window.0, report.window.1),
            report.summary(),
        ];
        for f in &report.violations {
            lines.push(format!("violation: {} at n = {}, x = {}: {}", f.kind, f.n, f.x, f.detail));
        }
        if !report.indeterminate.is_empty() {
            lines.push(format!(
                "{} checks left undecided (e.g. {} at n = {}, x = {})",
                report.indeterminate.len(),
                report.indeterminate[0].kind,
                report.indeterminate[0].n,
                report.indeterminate[0].x
            ));
        }
        for note in &family.assumptions {
            lines.push(format!("assumption: {note}"));
        }
        write_out(out, &lines.join("\n"))?;
    }
    Ok(EXIT_OK)
}
