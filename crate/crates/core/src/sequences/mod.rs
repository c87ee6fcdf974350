//! Integer sequences feeding the construction: primes or a user list.

mod file;
mod gaps;
pub mod primality;
pub mod sieve;

pub use file::FileSequence;
pub use gaps::{fit_gap_constant, scan_gaps, GapPair, GapReport};
pub use primality::{is_prime, is_prime_with, PrimalityCertainty, PrimalityConfig};

use crate::interval::BigInterval;
use crate::{Error, Exec, Result};
use rug::Integer;
use sieve::{prefilter_window, SegmentCache, SEGMENT_SPAN, SIEVE_PROVEN_LIMIT};
use std::fmt;
use std::str::FromStr;
use std::sync::Mutex;

/// Default bound below which prime ordinals are reported.
pub const DEFAULT_INDEX_LIMIT: u64 = 100_000_000;

const WINDOW: u32 = 8192;
const BATCH: usize = 64;

/// Why a term is known to belong to its source.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Membership {
    Prime(PrimalityCertainty),
    /// Present in a file-backed list.
    Listed,
}

impl Membership {
    pub fn as_str(self) -> &'static str {
        match self {
            Membership::Prime(c) => c.as_str(),
            Membership::Listed => "listed",
        }
    }
}

impl fmt::Display for Membership {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Membership {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "listed" {
            Ok(Membership::Listed)
        } else {
            s.parse().map(Membership::Prime)
        }
    }
}

/// A certified member of a source.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Term {
    pub value: Integer,
    /// 0-based ordinal in the source, when cheaply known.
    pub index: Option<u64>,
    pub membership: Membership,
}

/// Lower bound handed to [`SequenceSource::next_term_geq`].
#[derive(Clone, Debug)]
pub enum Bound {
    Exact(Integer),
    /// A certified enclosure of a real bound `H`; the answer is the smallest
    /// term `>= H`.
    Interval(BigInterval),
}

/// Primes, produced by a segmented sieve below 10^10 and by primality tests
/// above.
#[derive(Debug)]
pub struct PrimeSource {
    cache: SegmentCache,
    primality: PrimalityConfig,
    index_limit: u64,
    exec: Exec,
    /// `prefix[i]` = number of primes below `i * SEGMENT_SPAN`.
    prefix: Mutex<Vec<u64>>,
}

impl Default for PrimeSource {
    fn default() -> Self {
        PrimeSource::new(PrimalityConfig::default(), DEFAULT_INDEX_LIMIT, Exec::default())
    }
}

impl PrimeSource {
    pub fn new(primality: PrimalityConfig, index_limit: u64, exec: Exec) -> Self {
        PrimeSource {
            cache: SegmentCache::default(),
            primality,
            index_limit: index_limit.min(SIEVE_PROVEN_LIMIT),
            exec,
            prefix: Mutex::new(vec![0]),
        }
    }

    pub fn primality(&self) -> PrimalityConfig {
        self.primality
    }

    pub fn exec(&self) -> Exec {
        self.exec
    }

    fn prefix_count(&self, seg: u64) -> u64 {
        let mut prefix = self.prefix.lock().expect("prefix counts poisoned");
        while prefix.len() as u64 <= seg {
            let i = prefix.len() as u64 - 1;
            let count = self.cache.segment_for(i * SEGMENT_SPAN).count_below(u64::MAX);
            let last = *prefix.last().unwrap();
            prefix.push(last + count);
        }
        prefix[seg as usize]
    }

    /// Ordinal of the prime `p`, if below the index limit.
    fn ordinal(&self, p: u64) -> Option<u64> {
        if p >= self.index_limit {
            return None;
        }
        let seg = p / SEGMENT_SPAN;
        Some(self.prefix_count(seg) + self.cache.segment_for(p).count_below(p))
    }

    fn sieve_term(&self, p: u64) -> Term {
        Term {
            value: Integer::from(p),
            index: self.ordinal(p),
            membership: Membership::Prime(PrimalityCertainty::SieveProven),
        }
    }

    fn test_term(&self, value: Integer, certainty: PrimalityCertainty) -> Term {
        let index = value.to_u64().and_then(|p| self.ordinal(p));
        Term {
            value,
            index,
            membership: Membership::Prime(certainty),
        }
    }

    /// Smallest prime `>= c`.
    pub fn next_prime_geq(&self, c: &Integer) -> Term {
        let mut pos = match c.to_u64() {
            Some(v) => v.max(2),
            None if *c < 2 => 2,
            None => return self.window_search_up(c.clone()),
        };
        while pos < SIEVE_PROVEN_LIMIT {
            let seg = self.cache.segment_for(pos);
            match seg.next_prime_geq(pos) {
                Some(p) if p < SIEVE_PROVEN_LIMIT => return self.sieve_term(p),
                Some(_) => break,
                None => pos = seg.end(),
            }
        }
        self.window_search_up(Integer::from(pos.max(SIEVE_PROVEN_LIMIT)))
    }

    fn window_search_up(&self, mut start: Integer) -> Term {
        loop {
            let offsets = prefilter_window(&start, WINDOW);
            let candidates: Vec<Integer> = offsets
                .iter()
                .map(|&o| Integer::from(&start + o))
                .collect();
            for batch in candidates.chunks(BATCH) {
                let found = self.exec.position_first(batch, |n| {
                    is_prime_with(n, &self.primality).0
                });
                if let Some(i) = found {
                    let value = batch[i].clone();
                    let (_, certainty) = is_prime_with(&value, &self.primality);
                    return self.test_term(value, certainty);
                }
            }
            start += WINDOW;
        }
    }

    /// Largest prime `< v`, if any.
    pub fn prev_prime_lt(&self, v: &Integer) -> Option<Term> {
        if *v <= 2 {
            return None;
        }
        if let Some(top) = v.to_u64().filter(|&t| t <= SIEVE_PROVEN_LIMIT) {
            let mut pos = top;
            loop {
                let seg = self.cache.segment_for(pos - 1);
                if let Some(p) = seg.prev_prime_lt(pos) {
                    return Some(self.sieve_term(p));
                }
                if seg.base() == 0 {
                    return None;
                }
                pos = seg.base();
            }
        }
        let mut end = v.clone();
        loop {
            if end <= SIEVE_PROVEN_LIMIT {
                return self.prev_prime_lt(&end);
            }
            let start = Integer::from(&end - WINDOW).max(Integer::from(SIEVE_PROVEN_LIMIT));
            let len = Integer::from(&end - &start).to_u32().expect("window length");
            let offsets = prefilter_window(&start, len);
            let candidates: Vec<Integer> = offsets
                .iter()
                .rev()
                .map(|&o| Integer::from(&start + o))
                .collect();
            for batch in candidates.chunks(BATCH) {
                let found = self.exec.position_first(batch, |n| {
                    is_prime_with(n, &self.primality).0
                });
                if let Some(i) = found {
                    let value = batch[i].clone();
                    let (_, certainty) = is_prime_with(&value, &self.primality);
                    return Some(self.test_term(value, certainty));
                }
            }
            end = start;
        }
    }

    /// Membership certificate for `v`, or `None` if `v` is not prime.
    pub fn certify(&self, v: &Integer) -> Option<Term> {
        match v.to_u64() {
            Some(p) if p < SIEVE_PROVEN_LIMIT => {
                let prime = p >= 2 && self.cache.segment_for(p).is_prime(p);
                prime.then(|| self.sieve_term(p))
            }
            _ => {
                let (prime, certainty) = is_prime_with(v, &self.primality);
                prime.then(|| self.test_term(v.clone(), certainty))
            }
        }
    }

    /// The prime with 0-based ordinal `k`; limited to primes below the index limit.
    pub fn term_at(&self, k: u64) -> Result<Term> {
        let limit_seg = self.index_limit.div_ceil(SEGMENT_SPAN);
        let mut seg = 0;
        while seg < limit_seg && self.prefix_count(seg + 1) <= k {
            seg += 1;
        }
        let base = seg * SEGMENT_SPAN;
        let skip = k - self.prefix_count(seg);
        let p = self
            .cache
            .segment_for(base)
            .primes()
            .nth(skip as usize)
            .filter(|&p| p < self.index_limit)
            .ok_or_else(|| {
                Error::NotFound(format!(
                    "prime #{k} lies beyond the index limit {}",
                    self.index_limit
                ))
            })?;
        Ok(self.sieve_term(p))
    }
}

/// Where the terms `u_n` come from.
#[derive(Debug)]
pub enum SequenceSource {
    Primes(PrimeSource),
    File(FileSequence),
}

impl SequenceSource {
    pub fn primes() -> Self {
        SequenceSource::Primes(PrimeSource::default())
    }

    pub fn file(seq: FileSequence) -> Self {
        SequenceSource::File(seq)
    }

    /// `primes` or `file:<origin>`.
    pub fn describe(&self) -> String {
        match self {
            SequenceSource::Primes(_) => "primes".to_string(),
            SequenceSource::File(f) => format!("file:{}", f.origin()),
        }
    }

    /// Smallest term `>= bound`, certified.
    ///
    /// For an interval bound the candidate is the smallest term `>=` the
    /// ceiling of its lower end; if that term is not certainly above the upper
    /// end the bound is too wide and `IndeterminateBound` is returned.
    pub fn next_term_geq(&self, bound: &Bound) -> Result<Term> {
        let (c, iv) = match bound {
            Bound::Exact(c) => (c.clone(), None),
            Bound::Interval(iv) => {
                let c = iv
                    .lo()
                    .is_finite()
                    .then(|| iv.ceil_lo())
                    .flatten()
                    .ok_or_else(|| Error::IndeterminateBound(format!("unbounded {iv}")))?;
                (c, Some(iv))
            }
        };
        let term = match self {
            SequenceSource::Primes(p) => p.next_prime_geq(&c),
            SequenceSource::File(f) => {
                let i = f.lower_bound(&c);
                let value = f.terms().get(i).cloned().ok_or_else(|| {
                    Error::SequenceExhausted(format!("no listed term >= {c} in {}", f.origin()))
                })?;
                Term {
                    value,
                    index: Some(i as u64),
                    membership: Membership::Listed,
                }
            }
        };
        if let Some(iv) = iv {
            if *iv.hi() > term.value {
                return Err(Error::IndeterminateBound(format!(
                    "term {} inside bound {iv}",
                    term.value
                )));
            }
        }
        Ok(term)
    }

    /// Largest term `< v`.
    pub fn prev_term_below(&self, v: &Integer) -> Option<Term> {
        match self {
            SequenceSource::Primes(p) => p.prev_prime_lt(v),
            SequenceSource::File(f) => {
                let i = f.lower_bound(v);
                (i > 0).then(|| Term {
                    value: f.terms()[i - 1].clone(),
                    index: Some(i as u64 - 1),
                    membership: Membership::Listed,
                })
            }
        }
    }

    /// Membership certificate for `v`, or `None` if it is not a term.
    pub fn certify(&self, v: &Integer) -> Option<Term> {
        match self {
            SequenceSource::Primes(p) => p.certify(v),
            SequenceSource::File(f) => f.position(v).map(|i| Term {
                value: v.clone(),
                index: Some(i as u64),
                membership: Membership::Listed,
            }),
        }
    }

    pub fn term_at(&self, k: u64) -> Result<Term> {
        match self {
            SequenceSource::Primes(p) => p.term_at(k),
            SequenceSource::File(f) => {
                let value = f.terms().get(k as usize).cloned().ok_or_else(|| {
                    Error::SequenceExhausted(format!("{} has no term #{k}", f.origin()))
                })?;
                Ok(Term {
                    value,
                    index: Some(k),
                    membership: Membership::Listed,
                })
            }
        }
    }

    pub fn exec(&self) -> Exec {
        match self {
            SequenceSource::Primes(p) => p.exec(),
            SequenceSource::File(_) => Exec::default(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rug::ops::Pow;
    use rug::Float;

    fn trial(n: u64) -> bool {
        n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| !n.is_multiple_of(d))
    }

    fn next(src: &SequenceSource, c: u64) -> Term {
        src.next_term_geq(&Bound::Exact(Integer::from(c))).unwrap()
    }

    #[test]
    fn next_prime_examples() {
        let src = SequenceSource::primes();
        let t = next(&src, 8);
        assert_eq!(t.value, 11);
        assert_eq!(t.index, Some(4));
        assert_eq!(next(&src, 1331).value, 1361);
        let t = next(&src, 2);
        assert_eq!((t.value.to_u64(), t.index), (Some(2), Some(0)));
        assert_eq!(next(&src, 0).value, 2);
    }

    #[test]
    fn next_prime_matches_linear_search() {
        let src = SequenceSource::primes();
        for b in (0..5000u64).chain((999_000..1_000_000).step_by(13)) {
            let expect = (b..).find(|&m| trial(m)).unwrap();
            assert_eq!(next(&src, b).value, expect, "bound {b}");
        }
    }

    #[test]
    fn beyond_sieve_range() {
        let src = SequenceSource::primes();
        let t = next(&src, 1u64 << 37);
        assert_eq!(t.value, 137_438_953_481u64);
        assert_eq!(t.membership, Membership::Prime(PrimalityCertainty::DeterministicMR));
        assert_eq!(t.index, None);
        let big = Integer::from(1331u32).pow(3) * Integer::from(10u32).pow(30);
        let t = src.next_term_geq(&Bound::Exact(big.clone())).unwrap();
        assert!(t.value >= big && t.value.is_probably_prime(40) != rug::integer::IsPrime::No);
        assert_eq!(t.membership, Membership::Prime(PrimalityCertainty::ProbabilisticBPSW));
        let p = src.prev_term_below(&t.value).unwrap();
        assert!(p.value < big);
    }

    #[test]
    fn straddling_the_sieve_limit() {
        let src = SequenceSource::primes();
        let below = src.prev_term_below(&Integer::from(SIEVE_PROVEN_LIMIT)).unwrap();
        assert_eq!(below.value, 9_999_999_967u64);
        let above = next(&src, 9_999_999_968);
        assert_eq!(above.value, 10_000_000_019u64);
        assert_eq!(
            src.prev_term_below(&Integer::from(10_000_000_019u64)).unwrap().value,
            9_999_999_967u64
        );
    }

    #[test]
    fn interval_bounds() {
        let src = SequenceSource::primes();
        let iv = BigInterval::new(Float::with_val(64, 7.5), Float::with_val(64, 7.9));
        assert_eq!(src.next_term_geq(&Bound::Interval(iv)).unwrap().value, 11);
        let wide = BigInterval::new(Float::with_val(64, 7.5), Float::with_val(64, 12.0));
        assert!(matches!(
            src.next_term_geq(&Bound::Interval(wide)),
            Err(Error::IndeterminateBound(_))
        ));
        let mut lo = Float::with_val(64, 11);
        lo.next_down();
        let tight = BigInterval::new(lo, Float::with_val(64, 11));
        assert_eq!(src.next_term_geq(&Bound::Interval(tight)).unwrap().value, 11);
    }

    #[test]
    fn ordinals_and_term_at() {
        let src = SequenceSource::primes();
        assert_eq!(src.term_at(0).unwrap().value, 2);
        assert_eq!(src.term_at(4).unwrap().value, 11);
        assert_eq!(src.term_at(216_815).unwrap().value, 2_999_999);
        let p = src.certify(&Integer::from(2_999_999u64)).unwrap();
        assert_eq!(p.index, Some(216_815));
        assert!(src.certify(&Integer::from(1362)).is_none());
        assert!(src.certify(&Integer::from(1)).is_none());
    }

    #[test]
    fn file_source_lookups() {
        let seq = FileSequence::parse("1\n3\n5\n7\n9\n11\n13\n15\n", "odd").unwrap();
        let src = SequenceSource::file(seq);
        let t = next(&src, 12);
        assert_eq!((t.value.to_u64(), t.index), (Some(13), Some(6)));
        assert!(matches!(
            src.next_term_geq(&Bound::Exact(Integer::from(16))),
            Err(Error::SequenceExhausted(_))
        ));
        assert_eq!(src.prev_term_below(&Integer::from(13)).unwrap().value, 11);
        assert!(src.prev_term_below(&Integer::from(1)).is_none());
        assert_eq!(src.certify(&Integer::from(9)).unwrap().index, Some(4));
        assert!(src.certify(&Integer::from(10)).is_none());
        assert_eq!(src.describe(), "file:odd");
    }
}
