//! Segmented sieve of Eratosthenes over odd residues, plus a small-prime
//! prefilter for windows far beyond the sieve-proven range.

use rug::Integer;
use std::collections::{HashMap, VecDeque};
use std::sync::{Arc, Mutex, OnceLock};

/// Odd residues per segment.
pub const SEGMENT_ODDS: u64 = 1 << 20;
/// Integers covered by one segment.
pub const SEGMENT_SPAN: u64 = 2 * SEGMENT_ODDS;
/// Largest value (exclusive) whose primality a segment sieve settles.
pub const SIEVE_PROVEN_LIMIT: u64 = 10_000_000_000;
/// Base primes reach past sqrt(SIEVE_PROVEN_LIMIT + SEGMENT_SPAN).
const BASE_PRIME_LIMIT: u32 = 100_200;
/// Primes used to prefilter candidate windows above the sieve range.
const PREFILTER_LIMIT: u32 = 1 << 16;

const DEFAULT_CACHE_SEGMENTS: usize = 16;

/// Odd primes up to `BASE_PRIME_LIMIT`, plus 2 at the front.
pub fn base_primes() -> &'static [u32] {
    static PRIMES: OnceLock<Vec<u32>> = OnceLock::new();
    PRIMES.get_or_init(|| simple_sieve(BASE_PRIME_LIMIT))
}

fn simple_sieve(limit: u32) -> Vec<u32> {
    let n = limit as usize + 1;
    let mut composite = vec![false; n];
    let mut out = Vec::new();
    for i in 2..n {
        if composite[i] {
            continue;
        }
        out.push(i as u32);
        let mut j = i * i;
        while j < n {
            composite[j] = true;
            j += i;
        }
    }
    out
}

/// One sieved block `[base, base + SEGMENT_SPAN)`; bit `i` stands for `base + 2i + 1`.
#[derive(Debug)]
pub struct Segment {
    base: u64,
    composite: Vec<u64>,
}

impl Segment {
    /// Sieves the segment starting at `base` (a multiple of `SEGMENT_SPAN`).
    pub fn sieve(base: u64) -> Segment {
        assert_eq!(base % SEGMENT_SPAN, 0, "unaligned segment base");
        let end = base + SEGMENT_SPAN;
        assert!(
            end <= SIEVE_PROVEN_LIMIT + SEGMENT_SPAN,
            "segment beyond the sieve-proven range"
        );
        let mut composite = vec![0u64; (SEGMENT_ODDS / 64) as usize];
        let mut mark = |idx: u64| composite[(idx >> 6) as usize] |= 1u64 << (idx & 63);
        if base == 0 {
            mark(0); // 1 is not prime
        }
        for &p in &base_primes()[1..] {
            let p = p as u64;
            if p * p >= end {
                break;
            }
            let mut start = (p * p).max(base.div_ceil(p) * p);
            if start.is_multiple_of(2) {
                start += p;
            }
            let mut idx = (start - base - 1) / 2;
            while idx < SEGMENT_ODDS {
                mark(idx);
                idx += p;
            }
        }
        Segment { base, composite }
    }

    pub fn base(&self) -> u64 {
        self.base
    }

    pub fn end(&self) -> u64 {
        self.base + SEGMENT_SPAN
    }

    fn odd_is_prime(&self, idx: u64) -> bool {
        self.composite[(idx >> 6) as usize] & (1u64 << (idx & 63)) == 0
    }

    /// Primality of `n`, which must lie in this segment.
    pub fn is_prime(&self, n: u64) -> bool {
        debug_assert!(n >= self.base && n < self.end());
        if n == 2 {
            return true;
        }
        if n.is_multiple_of(2) {
            return false;
        }
        self.odd_is_prime((n - self.base - 1) / 2)
    }

    /// Smallest prime `>= n` inside this segment.
    pub fn next_prime_geq(&self, n: u64) -> Option<u64> {
        let n = n.max(self.base);
        if n <= 2 && self.base == 0 {
            return Some(2);
        }
        if n >= self.end() {
            return None;
        }
        let mut idx = (n - self.base) / 2; // odd base + 2i + 1 >= n
        if self.base + 2 * idx + 1 < n {
            idx += 1;
        }
        while idx < SEGMENT_ODDS {
            let word = self.composite[(idx >> 6) as usize] | ((1u64 << (idx & 63)) - 1);
            if word != u64::MAX {
                let bit = (!word).trailing_zeros() as u64;
                return Some(self.base + 2 * ((idx & !63) + bit) + 1);
            }
            idx = (idx & !63) + 64;
        }
        None
    }

    /// Largest prime `< n` inside this segment.
    pub fn prev_prime_lt(&self, n: u64) -> Option<u64> {
        if n <= self.base {
            return None;
        }
        let n = n.min(self.end());
        // largest odd < n
        let mut cand = if n.is_multiple_of(2) { n - 1 } else { n - 2 };
        while cand > self.base && cand >= 3 {
            if self.odd_is_prime((cand - self.base - 1) / 2) {
                return Some(cand);
            }
            cand -= 2;
        }
        if self.base == 0 && n > 2 {
            return Some(2);
        }
        None
    }

    /// All primes in the segment in increasing order.
    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        let two = (self.base == 0).then_some(2u64);
        let base = self.base;
        two.into_iter().chain(
            self.composite
                .iter()
                .enumerate()
                .flat_map(move |(w, &word)| {
                    let mut free = !word;
                    std::iter::from_fn(move || {
                        if free == 0 {
                            return None;
                        }
                        let bit = free.trailing_zeros() as u64;
                        free &= free - 1;
                        Some(base + 2 * (w as u64 * 64 + bit) + 1)
                    })
                }),
        )
    }

    /// Number of primes in `[base, limit)`.
    pub fn count_below(&self, limit: u64) -> u64 {
        if limit <= self.base {
            return 0;
        }
        if limit >= self.end() {
            let odd: u64 = self.composite.iter().map(|w| (!w).count_ones() as u64).sum();
            return odd + u64::from(self.base == 0);
        }
        self.primes().take_while(|&p| p < limit).count() as u64
    }
}

/// LRU cache of sieved segments, keyed by segment base.
#[derive(Debug)]
pub struct SegmentCache {
    capacity: usize,
    inner: Mutex<CacheState>,
}

#[derive(Debug, Default)]
struct CacheState {
    map: HashMap<u64, Arc<Segment>>,
    order: VecDeque<u64>,
}

impl Default for SegmentCache {
    fn default() -> Self {
        SegmentCache::new(DEFAULT_CACHE_SEGMENTS)
    }
}

impl SegmentCache {
    pub fn new(capacity: usize) -> Self {
        SegmentCache {
            capacity: capacity.max(1),
            inner: Mutex::new(CacheState::default()),
        }
    }

    pub fn base_of(n: u64) -> u64 {
        n - n % SEGMENT_SPAN
    }

    /// Segment containing `n`, sieving it on a miss.
    pub fn segment_for(&self, n: u64) -> Arc<Segment> {
        let base = Self::base_of(n);
        {
            let mut state = self.inner.lock().expect("segment cache poisoned");
            if let Some(seg) = state.map.get(&base).cloned() {
                state.order.retain(|&b| b != base);
                state.order.push_back(base);
                return seg;
            }
        }
        // sieve outside the lock; a racing caller may sieve the same block
        let seg = Arc::new(Segment::sieve(base));
        let mut state = self.inner.lock().expect("segment cache poisoned");
        if let Some(existing) = state.map.get(&base).cloned() {
            return existing;
        }
        state.map.insert(base, Arc::clone(&seg));
        state.order.push_back(base);
        while state.order.len() > self.capacity {
            if let Some(old) = state.order.pop_front() {
                state.map.remove(&old);
            }
        }
        seg
    }

    pub fn len(&self) -> usize {
        self.inner.lock().expect("segment cache poisoned").map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Offsets `i` in `0..len` for which `start + i` has no prime factor below
/// 2^16. Requires `start > 2^16` so no prefilter prime is itself a candidate.
pub fn prefilter_window(start: &Integer, len: u32) -> Vec<u32> {
    assert!(*start > PREFILTER_LIMIT, "prefilter window too low");
    let mut keep = vec![true; len as usize];
    for &p in base_primes() {
        if p >= PREFILTER_LIMIT {
            break;
        }
        let r = start.mod_u(p);
        let mut i = ((p - r) % p) as usize;
        while i < keep.len() {
            keep[i] = false;
            i += p as usize;
        }
    }
    keep.iter()
        .enumerate()
        .filter_map(|(i, &k)| k.then_some(i as u32))
        .collect()
}
