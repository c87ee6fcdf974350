//! Independent re-checks of a finished construction.
//!
//! Nothing here trusts the constructor: floors are recomputed from the
//! recorded bracket, terms are re-certified against the source, and the
//! hypotheses are re-evaluated at the realized chain points.

use crate::constructor::{ChainLink, ConstructionResult};
use crate::families::{check_hypothesis, FamilyDescriptor, HypothesisConfig, HypothesisReport};
use crate::interval::BigInterval;
use crate::sequences::{Membership, SequenceSource};
use crate::{Exec, Result};
use rug::Integer;
use std::fmt;

/// Extra doublings tried before a check is left indeterminate.
const RETRIES: u32 = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Status {
    Pass,
    Fail,
    Indeterminate,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Indeterminate => "indeterminate",
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Verdict on one chain term.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TermCheck {
    pub n: u64,
    pub v: Integer,
    pub status: Status,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FloorReport {
    pub precision: u32,
    /// Problems with the bracket itself, independent of any term.
    pub bracket_errors: Vec<String>,
    pub terms: Vec<TermCheck>,
}

impl FloorReport {
    pub fn passed(&self) -> bool {
        self.bracket_errors.is_empty() && self.terms.iter().all(|t| t.status == Status::Pass)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MembershipReport {
    pub terms: Vec<TermCheck>,
    pub ordering_errors: Vec<String>,
    pub warnings: Vec<String>,
}

impl MembershipReport {
    pub fn passed(&self) -> bool {
        self.ordering_errors.is_empty() && self.terms.iter().all(|t| t.status == Status::Pass)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HypothesisVerification {
    pub sampled: HypothesisReport,
    /// `g(h_n(v)) <= h_n(v + 1) - h_n(v)` at each realized `v_n`.
    pub realized: Vec<TermCheck>,
    pub assumptions: Vec<String>,
}

impl HypothesisVerification {
    pub fn passed(&self) -> bool {
        self.sampled.passed() && self.realized.iter().all(|t| t.status != Status::Fail)
    }

    pub fn warnings(&self) -> Vec<String> {
        let mut out: Vec<String> = self
            .sampled
            .indeterminate
            .iter()
            .map(|f| format!("hypothesis {} at n = {}, x = {}: undecided ({})", f.kind, f.n, f.x, f.detail))
            .collect();
        out.extend(
            self.realized
                .iter()
                .filter(|t| t.status == Status::Indeterminate)
                .map(|t| format!("realized-point check at n = {}: undecided ({})", t.n, t.detail)),
        );
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerificationReport {
    pub floors: FloorReport,
    pub membership: MembershipReport,
    pub hypotheses: HypothesisVerification,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.floors.passed() && self.membership.passed() && self.hypotheses.passed()
    }

    pub fn warnings(&self) -> Vec<String> {
        let mut w = self.membership.warnings.clone();
        w.extend(self.hypotheses.warnings());
        w
    }
}

fn ladder(prec: u32) -> impl Iterator<Item = u32> {
    (0..=RETRIES).map(move |i| prec.saturating_mul(1 << i))
}

fn floor_check(family: &FamilyDescriptor, link: &ChainLink, inner: &BigInterval, prec: u32) -> TermCheck {
    let v1 = Integer::from(&link.v + 1u32);
    let mut detail = String::new();
    for p in ladder(prec) {
        let e = match family.eval(link.n, &inner.with_prec(p.max(inner.prec())), p) {
            Ok(e) => e,
            Err(err) => {
                detail = err.to_string();
                break;
            }
        };
        let status = if *e.lo() >= link.v && *e.hi() < v1 {
            Status::Pass
        } else if *e.hi() < link.v || *e.lo() >= v1 {
            Status::Fail
        } else {
            detail = format!("f_n over the bracket is {e} at {p} bits");
            continue;
        };
        return TermCheck {
            n: link.n,
            v: link.v.clone(),
            status,
            detail: format!("f_n over the bracket is {e}"),
        };
    }
    TermCheck {
        n: link.n,
        v: link.v.clone(),
        status: Status::Indeterminate,
        detail,
    }
}

/// Certifies `floor(f_n(A)) = v_n` for every `A` in the inner bracket and
/// every recorded term, at `precision` bits (twice the construction
/// precision when `None`).
pub fn verify_floors(result: &ConstructionResult, precision: Option<u32>, exec: Exec) -> FloorReport {
    let prec = precision.unwrap_or(result.precision.saturating_mul(2));
    let inner = &result.inner;
    let mut bracket_errors = Vec::new();
    if inner.lo() > inner.hi() {
        bracket_errors.push(format!("inner bracket {inner} is empty"));
    }
    if !result.bracket.contains(inner) {
        bracket_errors.push(format!("inner bracket {inner} escapes {}", result.bracket));
    }
    let terms = exec.map(&result.chain, |link| floor_check(&result.family, link, inner, prec));
    FloorReport {
        precision: prec,
        bracket_errors,
        terms,
    }
}

/// Re-certifies every term against `source` and checks the chain is
/// strictly increasing.
pub fn verify_membership(result: &ConstructionResult, source: &SequenceSource, exec: Exec) -> MembershipReport {
    let certs = exec.map(&result.chain, |link| source.certify(&link.v));
    let mut terms = Vec::new();
    let mut warnings = Vec::new();
    for (link, cert) in result.chain.iter().zip(certs) {
        let (status, detail) = match cert {
            None => (Status::Fail, format!("not a term of {}", source.describe())),
            Some(t) => {
                if let (Membership::Prime(claimed), Membership::Prime(found)) = (link.membership, t.membership) {
                    if found < claimed {
                        warnings.push(format!(
                            "n = {}: recorded as {claimed}, re-certified only as {found}",
                            link.n
                        ));
                    }
                }
                (Status::Pass, t.membership.to_string())
            }
        };
        terms.push(TermCheck {
            n: link.n,
            v: link.v.clone(),
            status,
            detail,
        });
    }
    let mut ordering_errors = Vec::new();
    for w in result.chain.windows(2) {
        if w[1].v <= w[0].v {
            ordering_errors.push(format!("v_{} = {} does not exceed v_{} = {}", w[1].n, w[1].v, w[0].n, w[0].v));
        }
        if w[1].n != w[0].n + 1 {
            ordering_errors.push(format!("index jumps from {} to {}", w[0].n, w[1].n));
        }
        if let (Some(a), Some(b)) = (w[0].k, w[1].k) {
            if b <= a {
                ordering_errors.push(format!("source ordinal does not increase at n = {}", w[1].n));
            }
        }
    }
    if result.chain.first().is_some_and(|l| l.n != result.family.n0) {
        ordering_errors.push(format!("chain does not start at n0 = {}", result.family.n0));
    }
    MembershipReport {
        terms,
        ordering_errors,
        warnings,
    }
}

fn realized_check(family: &FamilyDescriptor, link: &ChainLink, prec: u32) -> TermCheck {
    let mut detail = String::new();
    for p in ladder(prec) {
        let eval = || -> Result<(BigInterval, BigInterval)> {
            let h0 = family.h_apply(link.n, &link.v, 0, p)?.enclosure(p);
            let h1 = family.h_apply(link.n, &link.v, 1, p)?.enclosure(p);
            Ok((family.gap.eval(&h0, p), h1.sub(&h0)))
        };
        let (g, diff) = match eval() {
            Ok(x) => x,
            Err(e) => {
                detail = e.to_string();
                break;
            }
        };
        if !g.is_finite() || !diff.is_finite() {
            detail = format!("values leave the exponent range at {p} bits");
            break;
        }
        let status = if g.hi() <= diff.lo() {
            Status::Pass
        } else if g.lo() > diff.hi() {
            Status::Fail
        } else {
            detail = format!("g(h) = {g}, difference = {diff}");
            continue;
        };
        return TermCheck {
            n: link.n,
            v: link.v.clone(),
            status,
            detail: format!("g(h) = {g}, difference = {diff}"),
        };
    }
    TermCheck {
        n: link.n,
        v: link.v.clone(),
        status: Status::Indeterminate,
        detail,
    }
}

/// Re-runs the sampled hypothesis checks over the indices the chain used and
/// checks the step inequality at each realized term.
pub fn verify_hypotheses(result: &ConstructionResult, config: &HypothesisConfig) -> Result<HypothesisVerification> {
    let family = &result.family;
    let n_lo = family.n0.max(family.min_index());
    let last = result.chain.last().map_or(n_lo, |l| l.n);
    let n_hi = last.saturating_sub(1).max(n_lo);
    let sampled = check_hypothesis(family, n_lo, n_hi, config)?;
    let steps = &result.chain[..result.chain.len().saturating_sub(1)];
    let realized = config
        .exec
        .map(steps, |link| realized_check(family, link, config.precision.max(result.precision)));
    Ok(HypothesisVerification {
        sampled,
        realized,
        assumptions: result.assumptions.clone(),
    })
}

/// All three checks.
pub fn verify(
    result: &ConstructionResult,
    source: &SequenceSource,
    hypothesis: &HypothesisConfig,
    floor_precision: Option<u32>,
) -> Result<VerificationReport> {
    Ok(VerificationReport {
        floors: verify_floors(result, floor_precision, hypothesis.exec),
        membership: verify_membership(result, source, hypothesis.exec),
        hypotheses: verify_hypotheses(result, hypothesis)?,
    })
}
