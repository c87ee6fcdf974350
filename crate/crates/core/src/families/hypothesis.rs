//! Sampled, certified checks of the family hypotheses.

use super::FamilyDescriptor;
use crate::interval::{compare, format_rational, BigInterval, CertifiedOrder};
use crate::{Error, Exec, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rug::{Float, Rational};
use std::fmt;

const GOLDEN: f64 = 0.618_033_988_749_894_9;
const SAMPLE_BITS: u32 = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CheckKind {
    /// `g(f_{n+1}(x)) <= f'_{n+1}(x) / f'_n(x)`.
    GapRelation,
    /// `f_{n+1}(x) > f_n(x)`.
    SequenceIncrease,
    /// `f_n(x_i) < f_n(x_{i+1})` for sorted samples.
    FamilyIncreasing,
    /// The derivative ratio is nondecreasing across sorted samples.
    RatioMonotone,
}

impl CheckKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CheckKind::GapRelation => "gap-relation",
            CheckKind::SequenceIncrease => "sequence-increase",
            CheckKind::FamilyIncreasing => "family-increasing",
            CheckKind::RatioMonotone => "ratio-monotone",
        }
    }
}

impl fmt::Display for CheckKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Finding {
    pub n: u64,
    pub kind: CheckKind,
    /// Sample point (or `lo..hi` pair) as decimal text.
    pub x: String,
    pub detail: String,
}

#[derive(Clone, Debug)]
pub struct HypothesisConfig {
    pub samples: usize,
    pub seed: u64,
    /// Window `[a + lo, a + hi]` for domains unbounded above.
    pub window_lo_offset: Rational,
    pub window_hi_offset: Rational,
    pub precision: u32,
    pub precision_max: u32,
    pub exec: Exec,
}

impl Default for HypothesisConfig {
    fn default() -> Self {
        HypothesisConfig {
            samples: 100,
            seed: 0,
            window_lo_offset: Rational::from((1, 1000)),
            window_hi_offset: Rational::from(1000),
            precision: 128,
            precision_max: 4096,
            exec: Exec::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HypothesisReport {
    pub family: String,
    pub n_lo: u64,
    pub n_hi: u64,
    pub samples: usize,
    pub seed: u64,
    pub window: (String, String),
    /// Checks settled in favour of the hypothesis.
    pub certified: u64,
    /// Monotonicity checks skipped because the ratio does not depend on `x`.
    pub structural: u64,
    pub violations: Vec<Finding>,
    pub indeterminate: Vec<Finding>,
}

impl HypothesisReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn total(&self) -> u64 {
        self.certified + self.violations.len() as u64 + self.indeterminate.len() as u64
    }

    pub fn summary(&self) -> String {
        format!(
            "certified {} of {} checks at {} sample points for n = {}..={}; {} violations, {} indeterminate",
            self.certified,
            self.total(),
            self.samples,
            self.n_lo,
            self.n_hi,
            self.violations.len(),
            self.indeterminate.len()
        )
    }
}

enum Outcome {
    Certified,
    Violated(Finding),
    Open(Finding),
}

/// Repeats `decide` with growing precision until it returns a verdict.
fn settle<F>(cfg: &HypothesisConfig, decide: F) -> (Option<bool>, String)
where
    F: Fn(u32) -> Result<(Option<bool>, bool, String)>,
{
    let mut prec = cfg.precision;
    loop {
        match decide(prec) {
            Ok((Some(v), _, detail)) => return (Some(v), detail),
            Ok((None, finite, detail)) => {
                if !finite || prec >= cfg.precision_max {
                    return (None, format!("{detail} (at {prec} bits)"));
                }
            }
            Err(e) => return (None, e.to_string()),
        }
        prec = (prec * 2).min(cfg.precision_max);
    }
}

fn order_verdict(order: CertifiedOrder, strict: bool) -> Option<bool> {
    match order {
        CertifiedOrder::CertainlyLess => Some(true),
        CertifiedOrder::CertainlyEqual => Some(!strict),
        CertifiedOrder::CertainlyGreater => Some(false),
        CertifiedOrder::Indeterminate => None,
    }
}

fn describe(x: &Float) -> String {
    FamilyDescriptor::describe_point(x)
}

/// Quasi-random points strictly inside the sampling window, sorted.
fn sample_points(family: &FamilyDescriptor, cfg: &HypothesisConfig) -> (Vec<Float>, (Rational, Rational)) {
    let (lo, hi) = family.sample_window(&cfg.window_lo_offset, &cfg.window_hi_offset);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let start: f64 = rng.random();
    let span = Rational::from(&hi - &lo);
    let mut pts: Vec<Float> = (0..cfg.samples)
        .filter_map(|i| {
            let t = (start + (i as f64 + 1.0) * GOLDEN).fract().clamp(1e-9, 1.0 - 1e-9);
            let q: Rational = &lo + Rational::from_f64(t).unwrap() * &span;
            let x = Float::with_val(SAMPLE_BITS, &q);
            let inside = x > family.domain_lo
                && family.domain_hi.as_ref().is_none_or(|b| x < *b);
            inside.then_some(x)
        })
        .collect();
    pts.sort_by(|a, b| a.partial_cmp(b).expect("finite samples"));
    (pts, (lo, hi))
}

/// Certifies the family hypotheses at quasi-random sample points for every
/// `n` in `n_lo..=n_hi`. Sampling, not proof: a clean report means "held at
/// every sampled point".
pub fn check_hypothesis(
    family: &FamilyDescriptor,
    n_lo: u64,
    n_hi: u64,
    cfg: &HypothesisConfig,
) -> Result<HypothesisReport> {
    if cfg.samples == 0 {
        return Err(Error::Domain("at least one sample is required".into()));
    }
    if n_lo < family.min_index() || n_hi < n_lo {
        return Err(Error::Domain(format!(
            "index range {n_lo}..={n_hi} invalid for {} (starts at {})",
            family.name(),
            family.min_index()
        )));
    }
    let (pts, (wlo, whi)) = sample_points(family, cfg);
    let mut tasks: Vec<(u64, CheckKind, usize)> = Vec::new();
    let mut structural = 0u64;
    for n in n_lo..=n_hi {
        for i in 0..pts.len() {
            tasks.push((n, CheckKind::GapRelation, i));
            tasks.push((n, CheckKind::SequenceIncrease, i));
        }
        for i in 0..pts.len().saturating_sub(1) {
            if pts[i] == pts[i + 1] {
                continue;
            }
            tasks.push((n, CheckKind::FamilyIncreasing, i));
            if family.ratio_depends_on_x() {
                tasks.push((n, CheckKind::RatioMonotone, i));
            } else {
                structural += 1;
            }
        }
    }
    let outcomes = cfg.exec.map(&tasks, |&(n, kind, i)| {
        let x = BigInterval::point(pts[i].clone());
        let (verdict, detail) = match kind {
            CheckKind::GapRelation => settle(cfg, |p| {
                let m = family.hypothesis_margin(n, &x, p)?;
                let v = if *m.lo() >= 0 {
                    Some(true)
                } else if *m.hi() < 0 {
                    Some(false)
                } else {
                    None
                };
                Ok((v, m.is_finite(), format!("ratio - g(f_(n+1)) in {m}")))
            }),
            CheckKind::SequenceIncrease => settle(cfg, |p| {
                let a = family.eval(n, &x, p)?;
                let b = family.eval(n + 1, &x, p)?;
                let finite = a.is_finite() && b.is_finite();
                Ok((order_verdict(compare(&a, &b), true), finite, format!("f_n = {a}, f_(n+1) = {b}")))
            }),
            CheckKind::FamilyIncreasing | CheckKind::RatioMonotone => {
                let y = BigInterval::point(pts[i + 1].clone());
                settle(cfg, |p| {
                    let (a, b) = if kind == CheckKind::FamilyIncreasing {
                        (family.eval(n, &x, p)?, family.eval(n, &y, p)?)
                    } else {
                        (family.derivative_ratio(n, &x, p)?, family.derivative_ratio(n, &y, p)?)
                    };
                    let finite = a.is_finite() && b.is_finite();
                    let strict = kind == CheckKind::FamilyIncreasing;
                    let v = if strict {
                        order_verdict(compare(&a, &b), true)
                    } else if *a.hi() <= *b.lo() {
                        Some(true)
                    } else if *a.lo() > *b.hi() {
                        Some(false)
                    } else {
                        None
                    };
                    Ok((v, finite, format!("{a} then {b}")))
                })
            }
        };
        let point = match kind {
            CheckKind::FamilyIncreasing | CheckKind::RatioMonotone => {
                format!("{}..{}", describe(&pts[i]), describe(&pts[i + 1]))
            }
            _ => describe(&pts[i]),
        };
        let finding = || Finding {
            n,
            kind,
            x: point.clone(),
            detail: detail.clone(),
        };
        match verdict {
            Some(true) => Outcome::Certified,
            Some(false) => Outcome::Violated(finding()),
            None => Outcome::Open(finding()),
        }
    });
    let mut report = HypothesisReport {
        family: family.to_spec(),
        n_lo,
        n_hi,
        samples: pts.len(),
        seed: cfg.seed,
        window: (format_rational(&wlo), format_rational(&whi)),
        certified: 0,
        structural,
        violations: Vec::new(),
        indeterminate: Vec::new(),
    };
    for o in outcomes {
        match o {
            Outcome::Certified => report.certified += 1,
            Outcome::Violated(f) => report.violations.push(f),
            Outcome::Open(f) => report.indeterminate.push(f),
        }
    }
    Ok(report)
}
