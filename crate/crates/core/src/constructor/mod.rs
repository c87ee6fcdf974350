//! Greedy term selection and nested-interval refinement.

mod digits;

pub use digits::{extract_digits, Digits};

use crate::families::{FamilyDescriptor, HValue};
use crate::interval::{BigInterval, DEFAULT_PRECISION, DEFAULT_PRECISION_MAX};
use crate::sequences::{Bound, Membership, SequenceSource, Term};
use crate::{Error, GapViolationInfo, Result};
use rug::{Float, Integer};

/// Candidates examined by [`init`] before giving up.
pub const DEFAULT_SEED_SCAN: u64 = 100_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SeedPolicy {
    SmallestAdmissible,
    /// Use the source term with this 0-based ordinal.
    ExplicitIndex(u64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ConstructorConfig {
    pub precision_start: u32,
    pub precision_max: u32,
    pub seed_scan: u64,
}

impl Default for ConstructorConfig {
    fn default() -> Self {
        ConstructorConfig {
            precision_start: DEFAULT_PRECISION,
            precision_max: DEFAULT_PRECISION_MAX,
            seed_scan: DEFAULT_SEED_SCAN,
        }
    }
}

/// `x_n = f_n^{-1}(v_n)` and `y_n = f_n^{-1}(v_n + 1)` around the current term.
#[derive(Clone, Debug, PartialEq)]
pub struct ConstructionState {
    pub n: u64,
    /// Source ordinal of `v`, when known.
    pub k: Option<u64>,
    pub v: Integer,
    pub membership: Membership,
    pub x: BigInterval,
    pub y: BigInterval,
    pub precision: u32,
}

/// One certified chain term.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChainLink {
    pub n: u64,
    pub k: Option<u64>,
    pub v: Integer,
    pub membership: Membership,
    /// Working precision once this term was certified.
    pub precision_bits: u32,
}

impl ChainLink {
    fn of(state: &ConstructionState) -> Self {
        ChainLink {
            n: state.n,
            k: state.k,
            v: state.v.clone(),
            membership: state.membership,
            precision_bits: state.precision,
        }
    }
}

/// A precision increase and what forced it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Escalation {
    pub n: u64,
    pub from_bits: u32,
    pub to_bits: u32,
    pub reason: String,
}

#[derive(Clone, Debug)]
pub struct ConstructionResult {
    pub family: FamilyDescriptor,
    pub source: String,
    pub chain: Vec<ChainLink>,
    /// `[X.lo, Y.hi]` for the last term.
    pub bracket: BigInterval,
    /// `[X.hi, Y.lo)`: every point reconstructs the whole chain.
    pub inner: BigInterval,
    pub precision: u32,
    pub digits: Digits,
    pub assumptions: Vec<String>,
    pub diagnostics: Vec<Escalation>,
}

impl ConstructionResult {
    /// Midpoint of the bracket, for display. Any point of `inner` serves equally.
    pub fn display_point(&self) -> Float {
        self.bracket.midpoint()
    }
}

/// Precision ladder shared by a session.
struct Ladder<'a> {
    cap: u32,
    log: &'a mut Vec<Escalation>,
}

impl Ladder<'_> {
    fn bump(&mut self, n: u64, prec: u32, reason: &str) -> Result<u32> {
        match crate::interval::escalate(prec, self.cap) {
            Some(next) => {
                self.log.push(Escalation {
                    n,
                    from_bits: prec,
                    to_bits: next,
                    reason: reason.to_string(),
                });
                Ok(next)
            }
            None => Err(Error::PrecisionExhausted {
                bits: prec,
                context: format!("n = {n}: {reason}"),
            }),
        }
    }
}

fn inverses(
    family: &FamilyDescriptor,
    n: u64,
    v: &Integer,
    mut prec: u32,
    ladder: &mut Ladder<'_>,
) -> Result<(BigInterval, BigInterval, u32)> {
    let w = Integer::from(v + 1u32);
    loop {
        let x = family.eval_inverse_integer(n, v, prec)?;
        let y = family.eval_inverse_integer(n, &w, prec)?;
        if x.hi() < y.lo() {
            return Ok((x, y, prec));
        }
        prec = ladder.bump(n, prec, "x_n and y_n not separated")?;
    }
}

fn admitted(
    family: &FamilyDescriptor,
    n: u64,
    v: &Integer,
    mut prec: u32,
    ladder: &mut Ladder<'_>,
) -> Result<(bool, u32)> {
    loop {
        if let Some(ok) = family.admits(n, v, prec)? {
            return Ok((ok, prec));
        }
        prec = ladder.bump(n, prec, "seed domain membership undecided")?;
    }
}

fn seed_state(
    family: &FamilyDescriptor,
    term: Term,
    prec: u32,
    ladder: &mut Ladder<'_>,
) -> Result<ConstructionState> {
    let n = family.n0;
    let (x, y, prec) = inverses(family, n, &term.value, prec, ladder)?;
    Ok(ConstructionState {
        n,
        k: term.index,
        v: term.value,
        membership: term.membership,
        x,
        y,
        precision: prec,
    })
}

fn init_inner(
    family: &FamilyDescriptor,
    source: &SequenceSource,
    policy: SeedPolicy,
    config: &ConstructorConfig,
    ladder: &mut Ladder<'_>,
) -> Result<ConstructionState> {
    let n = family.n0;
    let mut prec = config.precision_start;
    let not_found = |msg: String| Error::SeedNotFound(format!("{} at n = {n}: {msg}", family.name()));
    let exhausted = |e: Error| match e {
        Error::SequenceExhausted(m) | Error::NotFound(m) => not_found(m),
        other => other,
    };
    if let SeedPolicy::ExplicitIndex(k) = policy {
        let term = source.term_at(k).map_err(exhausted)?;
        let (ok, p) = admitted(family, n, &term.value, prec, ladder)?;
        if !ok {
            return Err(not_found(format!("term #{k} = {} lies outside ]λ, μ − 1[", term.value)));
        }
        return seed_state(family, term, p, ladder);
    }
    let lam = family.lower_image(n, prec)?;
    let start = lam
        .lo()
        .to_integer_round(rug::float::Round::Down)
        .map(|(i, _)| i)
        .ok_or_else(|| not_found(format!("λ = {lam} is not finite")))?;
    let mut term = source.next_term_geq(&Bound::Exact(start)).map_err(exhausted)?;
    for _ in 0..config.seed_scan {
        let (ok, p) = admitted(family, n, &term.value, prec, ladder)?;
        prec = p;
        if ok {
            return seed_state(family, term, prec, ladder);
        }
        let lam = family.lower_image(n, prec)?;
        if *lam.hi() < term.value {
            return Err(not_found(format!(
                "smallest term above λ, {}, already reaches μ − 1",
                term.value
            )));
        }
        let next = Integer::from(&term.value + 1u32);
        term = source.next_term_geq(&Bound::Exact(next)).map_err(exhausted)?;
    }
    Err(not_found(format!("no admissible term among {} candidates", config.seed_scan)))
}

/// Seeds the chain at `n0` with a term certified inside `]λ_{n0}, μ_{n0} − 1[`.
pub fn init(
    family: &FamilyDescriptor,
    source: &SequenceSource,
    policy: SeedPolicy,
    config: &ConstructorConfig,
) -> Result<(ConstructionState, Vec<Escalation>)> {
    let mut log = Vec::new();
    let mut ladder = Ladder {
        cap: config.precision_max,
        log: &mut log,
    };
    let state = init_inner(family, source, policy, config, &mut ladder)?;
    Ok((state, log))
}

fn h_values(
    family: &FamilyDescriptor,
    n: u64,
    v: &Integer,
    prec: u32,
) -> Result<(HValue, HValue)> {
    let h0 = family.h_apply(n, v, 0, prec)?;
    let h1 = family.h_apply(n, v, 1, prec)?;
    for h in [&h0, &h1] {
        if let HValue::Enclosed { enclosure, .. } = h {
            if !enclosure.is_finite() {
                return Err(Error::PrecisionExhausted {
                    bits: prec,
                    context: format!("n = {n}: h_n({v}) leaves the floating-point exponent range"),
                });
            }
        }
    }
    Ok((h0, h1))
}

fn describe_h(h: &HValue) -> String {
    match h {
        HValue::Exact(v) => v.to_string(),
        HValue::Enclosed { ceil: Some(c), .. } => format!("a value with ceiling {c}"),
        HValue::Enclosed { enclosure, .. } => enclosure.to_string(),
    }
}

fn check_nesting(prev: &ConstructionState, x: &BigInterval, y: &BigInterval, n: u64) -> Result<()> {
    if x.hi() < prev.x.lo() {
        return Err(Error::NestingViolation {
            n,
            detail: format!("x moved down from {} to {}", prev.x, x),
        });
    }
    if y.lo() > prev.y.hi() {
        return Err(Error::NestingViolation {
            n,
            detail: format!("y moved up from {} to {}", prev.y, y),
        });
    }
    Ok(())
}

/// Certifies `h_n(v_n) <= w` and `w + 1 < h_n(v_n + 1)` for a candidate `w`.
fn certify_step(
    family: &FamilyDescriptor,
    state: &ConstructionState,
    w: &Integer,
    mut prec: u32,
    ladder: &mut Ladder<'_>,
) -> Result<u32> {
    let n = state.n;
    loop {
        let (h0, h1) = h_values(family, n, &state.v, prec)?;
        let below = h0.exceeds(w).map(|gt| !gt);
        let w1 = Integer::from(w + 1u32);
        match (below, h1.exceeds(&w1)) {
            (Some(true), Some(true)) => return Ok(prec),
            (Some(false), _) => {
                return Err(Error::Domain(format!(
                    "n = {n}: {w} lies below h_n({}) = {}",
                    state.v,
                    describe_h(&h0)
                )))
            }
            (_, Some(false)) => return Err(gap_violation(state, w, &h1, prec)),
            _ => prec = ladder.bump(n, prec, "step inequality undecided")?,
        }
    }
}

fn gap_violation(state: &ConstructionState, w: &Integer, h1: &HValue, prec: u32) -> Error {
    Error::GapViolation(Box::new(GapViolationInfo {
        n: state.n,
        v_n: state.v.clone(),
        v_next: w.clone(),
        bound: format!("h_n(v_n + 1) - 1 with h_n(v_n + 1) = {}", describe_h(h1)),
        precision: prec,
    }))
}

fn advance(
    family: &FamilyDescriptor,
    state: &ConstructionState,
    term: Term,
    prec: u32,
    ladder: &mut Ladder<'_>,
) -> Result<ConstructionState> {
    let n = state.n + 1;
    let (x, y, prec) = inverses(family, n, &term.value, prec, ladder)?;
    check_nesting(state, &x, &y, n)?;
    Ok(ConstructionState {
        n,
        k: term.index,
        v: term.value,
        membership: term.membership,
        x,
        y,
        precision: prec,
    })
}

fn step_inner(
    family: &FamilyDescriptor,
    source: &SequenceSource,
    state: &ConstructionState,
    ladder: &mut Ladder<'_>,
) -> Result<ConstructionState> {
    let n = state.n;
    let mut prec = state.precision;
    let term = loop {
        let (h0, _) = h_values(family, n, &state.v, prec)?;
        match source.next_term_geq(&h0.bound()) {
            Ok(t) => break t,
            Err(Error::IndeterminateBound(_)) => {
                prec = ladder.bump(n, prec, "h_n(v_n) too wide to place the next term")?
            }
            Err(e) => return Err(e),
        }
    };
    let prec = certify_step(family, state, &term.value, prec, ladder)?;
    advance(family, state, term, prec, ladder)
}

/// Picks `v_{n+1}`, the smallest term `>= h_n(v_n)`, and certifies
/// `v_{n+1} + 1 < h_n(v_n + 1)`.
pub fn step(
    family: &FamilyDescriptor,
    source: &SequenceSource,
    state: &ConstructionState,
    config: &ConstructorConfig,
) -> Result<(ConstructionState, Vec<Escalation>)> {
    let mut log = Vec::new();
    let mut ladder = Ladder {
        cap: config.precision_max,
        log: &mut log,
    };
    let next = step_inner(family, source, state, &mut ladder)?;
    Ok((next, log))
}

/// Re-establishes a recorded step without the search: membership and both
/// step inequalities are re-certified at the recorded precision.
fn replay_inner(
    family: &FamilyDescriptor,
    source: &SequenceSource,
    state: &ConstructionState,
    link: &ChainLink,
    ladder: &mut Ladder<'_>,
) -> Result<ConstructionState> {
    let bad = |msg: String| Error::Parse(format!("cached step n = {}: {msg}", link.n));
    if link.n != state.n + 1 {
        return Err(bad(format!("expected n = {}", state.n + 1)));
    }
    let term = source
        .certify(&link.v)
        .ok_or_else(|| bad(format!("{} is not a term of {}", link.v, source.describe())))?;
    let prec = link.precision_bits.max(state.precision);
    let prec = certify_step(family, state, &term.value, prec, ladder)?;
    advance(family, state, term, prec, ladder)
}

/// Progress hooks for [`run`].
pub trait Observer {
    /// Called once per certified term, including the seed.
    fn on_link(&mut self, _link: &ChainLink, _replayed: bool) -> Result<()> {
        Ok(())
    }
}

pub struct Silent;

impl Observer for Silent {}

/// Seeds and extends the chain to `terms` terms, then raises precision on the
/// last bracket until `digit_goal` digits are certified, the enclosures stop
/// mattering, or the cap is reached.
///
/// `replay` holds previously certified links (seed first) to resume from.
#[allow(clippy::too_many_arguments)]
pub fn run(
    family: &FamilyDescriptor,
    source: &SequenceSource,
    terms: u64,
    digit_goal: usize,
    policy: SeedPolicy,
    config: &ConstructorConfig,
    replay: &[ChainLink],
    observer: &mut dyn Observer,
) -> Result<ConstructionResult> {
    if terms == 0 {
        return Err(Error::Domain("at least one term is required".into()));
    }
    let mut log = Vec::new();
    let mut ladder = Ladder {
        cap: config.precision_max,
        log: &mut log,
    };
    let replay = &replay[..replay.len().min(terms as usize)];
    let mut state = match replay.first() {
        Some(seed) => {
            if seed.n != family.n0 {
                return Err(Error::Parse(format!(
                    "cached seed has n = {}, family starts at {}",
                    seed.n, family.n0
                )));
            }
            let term = source.certify(&seed.v).ok_or_else(|| {
                Error::Parse(format!("cached seed {} is not a term", seed.v))
            })?;
            let (ok, prec) = admitted(family, seed.n, &seed.v, seed.precision_bits, &mut ladder)?;
            if !ok {
                return Err(Error::Parse(format!("cached seed {} is not admissible", seed.v)));
            }
            seed_state(family, term, prec, &mut ladder)?
        }
        None => init_inner(family, source, policy, config, &mut ladder)?,
    };
    observer.on_link(&ChainLink::of(&state), !replay.is_empty())?;
    let mut chain = vec![ChainLink::of(&state)];
    for i in 1..terms as usize {
        let (next, replayed) = match replay.get(i) {
            Some(link) => (replay_inner(family, source, &state, link, &mut ladder)?, true),
            None => (step_inner(family, source, &state, &mut ladder)?, false),
        };
        state = next;
        let link = ChainLink::of(&state);
        observer.on_link(&link, replayed)?;
        chain.push(link);
    }
    let (x, y, prec, digits) = refine(family, &state, digit_goal, &mut ladder)?;
    let bracket = BigInterval::new(x.lo().clone(), y.hi().clone());
    let mut top = y.lo().clone();
    top.next_down();
    let inner = BigInterval::new(x.hi().clone(), top);
    Ok(ConstructionResult {
        family: family.clone(),
        source: source.describe(),
        chain,
        bracket,
        inner,
        precision: prec,
        digits,
        assumptions: family.assumptions.clone(),
        diagnostics: log,
    })
}

/// Enclosure widths below `gap * 2^-NEGLIGIBLE` no longer limit the digits.
const NEGLIGIBLE: i32 = 40;

fn fraction_cap(prec: u32) -> usize {
    (prec as f64 * std::f64::consts::LOG10_2) as usize + 2
}

fn refine(
    family: &FamilyDescriptor,
    state: &ConstructionState,
    digit_goal: usize,
    ladder: &mut Ladder<'_>,
) -> Result<(BigInterval, BigInterval, u32, Digits)> {
    let (mut x, mut y, mut prec) = (state.x.clone(), state.y.clone(), state.precision);
    loop {
        let digits = extract_digits(x.lo(), y.hi(), fraction_cap(prec));
        if digits.significant() >= digit_goal {
            return Ok((x, y, prec, digits));
        }
        let gap = Float::with_val(prec, y.lo() - x.hi());
        let slack = gap >> NEGLIGIBLE;
        if x.width() < slack && y.width() < slack {
            return Ok((x, y, prec, digits));
        }
        let Some(next) = crate::interval::escalate(prec, ladder.cap) else {
            return Ok((x, y, prec, digits));
        };
        ladder.log.push(Escalation {
            n: state.n,
            from_bits: prec,
            to_bits: next,
            reason: format!("{} of {digit_goal} digits certified", digits.significant()),
        });
        prec = next;
        x = family.eval_inverse_integer(state.n, &state.v, prec)?;
        y = family.eval_inverse_integer(state.n, &Integer::from(&state.v + 1u32), prec)?;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interval::parse_rational;
    use crate::sequences::{FileSequence, PrimalityCertainty};
    use rug::Rational;

    fn q(s: &str) -> Rational {
        parse_rational(s).unwrap()
    }

    fn chain(r: &ConstructionResult) -> Vec<String> {
        r.chain.iter().map(|l| l.v.to_string()).collect()
    }

    fn go(family: &FamilyDescriptor, source: &SequenceSource, terms: u64, digits: usize) -> Result<ConstructionResult> {
        run(family, source, terms, digits, SeedPolicy::SmallestAdmissible, &ConstructorConfig::default(), &[], &mut Silent)
    }

    #[test]
    fn mills_chain_and_digits() {
        let r = go(&FamilyDescriptor::mills(), &SequenceSource::primes(), 4, 10).unwrap();
        assert_eq!(chain(&r), ["2", "11", "1361", "2521008887"]);
        assert!(r.digits.text.starts_with("1.306377883"), "{}", r.digits.text);
        assert!(r.bracket.contains(&r.inner));
        assert_eq!(r.chain[3].membership, Membership::Prime(PrimalityCertainty::SieveProven));
    }

    #[test]
    fn mills_seed_from_zero() {
        let fam = FamilyDescriptor::mills().with_n0(0);
        let (s, _) = init(&fam, &SequenceSource::primes(), SeedPolicy::SmallestAdmissible, &ConstructorConfig::default()).unwrap();
        assert_eq!(s.v, 2);
        assert!(s.x.contains_integer(&Integer::from(2)) && s.y.contains_integer(&Integer::from(3)));
    }

    #[test]
    fn wright_chain() {
        let r = go(&FamilyDescriptor::wright(), &SequenceSource::primes(), 4, 0).unwrap();
        assert_eq!(chain(&r), ["2", "5", "37", "137438953481"]);
        let e = go(&FamilyDescriptor::wright(), &SequenceSource::primes(), 5, 0).unwrap_err();
        assert!(matches!(e, Error::PrecisionExhausted { .. }), "{e}");
    }

    #[test]
    fn geometric_over_odd_numbers() {
        let odds = FileSequence::from_terms((0..200u32).map(|i| Integer::from(2 * i + 1)).collect(), "odds").unwrap();
        let fam = FamilyDescriptor::geometric(q("4")).unwrap();
        let src = SequenceSource::file(odds);
        let (s, _) = init(&fam, &src, SeedPolicy::ExplicitIndex(1), &ConstructorConfig::default()).unwrap();
        assert_eq!(s.v, 3);
        let (s, _) = step(&fam, &src, &s, &ConstructorConfig::default()).unwrap();
        assert_eq!(s.v, 13);
    }

    #[test]
    fn gap_violation_is_reported() {
        let evens = FileSequence::from_terms((1..100u32).map(|i| Integer::from(10 * i)).collect(), "tens").unwrap();
        let fam = FamilyDescriptor::geometric(q("1.5")).unwrap();
        let e = go(&fam, &SequenceSource::file(evens), 3, 0).unwrap_err();
        let Error::GapViolation(info) = e else { panic!("{e}") };
        assert_eq!((info.n, info.v_n.to_u32(), info.v_next.to_u32()), (1, Some(10), Some(20)));
    }

    #[test]
    fn empty_source_has_no_seed() {
        let empty = FileSequence::from_terms(Vec::new(), "empty").unwrap();
        let e = go(&FamilyDescriptor::mills(), &SequenceSource::file(empty), 2, 0).unwrap_err();
        assert!(matches!(e, Error::SeedNotFound(_)), "{e}");
    }

    #[test]
    fn single_term_bracket_is_the_seed_interval() {
        let r = go(&FamilyDescriptor::mills(), &SequenceSource::primes(), 1, 0).unwrap();
        assert_eq!(r.chain.len(), 1);
        let lo = 2f64.cbrt();
        let hi = 3f64.cbrt();
        assert!((r.bracket.lo().to_f64() - lo).abs() < 1e-15 && (r.bracket.hi().to_f64() - hi).abs() < 1e-15);
    }

    #[test]
    fn replay_matches_fresh_run() {
        let fam = FamilyDescriptor::mills();
        let src = SequenceSource::primes();
        let full = go(&fam, &src, 4, 12).unwrap();
        let resumed = run(&fam, &src, 4, 12, SeedPolicy::SmallestAdmissible, &ConstructorConfig::default(), &full.chain[..3], &mut Silent).unwrap();
        assert_eq!(resumed.chain, full.chain);
        assert_eq!(resumed.bracket, full.bracket);
        assert_eq!(resumed.digits, full.digits);
        let mut forged = full.chain.clone();
        forged[2].v = Integer::from(1367);
        assert!(run(&fam, &src, 4, 0, SeedPolicy::SmallestAdmissible, &ConstructorConfig::default(), &forged, &mut Silent).is_err());
    }

    #[test]
    fn mills_five_terms_at_512_bits() {
        let cfg = ConstructorConfig { precision_start: 512, ..ConstructorConfig::default() };
        let r = run(&FamilyDescriptor::mills(), &SequenceSource::primes(), 5, 20, SeedPolicy::SmallestAdmissible, &cfg, &[], &mut Silent).unwrap();
        assert!(r.digits.significant() >= 20, "{}", r.digits.text);
    }
}
