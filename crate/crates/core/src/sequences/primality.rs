//! Primality testing: deterministic Miller-Rabin below 2^64, BPSW above.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rug::Integer;
use std::fmt;
use std::str::FromStr;

/// How strongly a primality verdict is established.
///
/// Ordered from weakest to strongest.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PrimalityCertainty {
    /// BPSW plus random-base Miller-Rabin rounds; no known counterexample.
    ProbabilisticBPSW,
    /// Miller-Rabin with a witness set proven complete below 2^64.
    DeterministicMR,
    /// Established by exhaustive sieving or trial division.
    SieveProven,
}

impl PrimalityCertainty {
    pub fn is_deterministic(self) -> bool {
        self != PrimalityCertainty::ProbabilisticBPSW
    }

    pub fn as_str(self) -> &'static str {
        match self {
            PrimalityCertainty::ProbabilisticBPSW => "probabilistic-bpsw",
            PrimalityCertainty::DeterministicMR => "deterministic-mr",
            PrimalityCertainty::SieveProven => "sieve-proven",
        }
    }
}

impl fmt::Display for PrimalityCertainty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PrimalityCertainty {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "probabilistic-bpsw" => Ok(PrimalityCertainty::ProbabilisticBPSW),
            "deterministic-mr" => Ok(PrimalityCertainty::DeterministicMR),
            "sieve-proven" => Ok(PrimalityCertainty::SieveProven),
            other => Err(crate::Error::Parse(format!("unknown certainty {other:?}"))),
        }
    }
}

/// Default number of extra random-base Miller-Rabin rounds above 2^64.
pub const DEFAULT_MR_ROUNDS: u32 = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PrimalityConfig {
    pub mr_rounds: u32,
}

impl Default for PrimalityConfig {
    fn default() -> Self {
        PrimalityConfig {
            mr_rounds: DEFAULT_MR_ROUNDS,
        }
    }
}

/// Sinclair's seven bases: a complete Miller-Rabin witness set for n < 2^64.
const MR64_BASES: [u64; 7] = [2, 325, 9375, 28178, 450775, 9780504, 1795265022];

const SMALL_PRIMES: [u32; 25] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89,
    97,
];

/// Primality with the default configuration.
pub fn is_prime(n: &Integer) -> (bool, PrimalityCertainty) {
    is_prime_with(n, &PrimalityConfig::default())
}

pub fn is_prime_with(n: &Integer, config: &PrimalityConfig) -> (bool, PrimalityCertainty) {
    if *n < 2 {
        return (false, PrimalityCertainty::SieveProven);
    }
    if let Some(small) = n.to_u64() {
        return (is_prime_u64(small), PrimalityCertainty::DeterministicMR);
    }
    for &p in &SMALL_PRIMES {
        if n.is_divisible_u(p) {
            return (false, PrimalityCertainty::SieveProven);
        }
    }
    if !strong_probable_prime(n, &Integer::from(2)) {
        return (false, PrimalityCertainty::DeterministicMR);
    }
    if !strong_lucas_probable_prime(n) {
        return (false, PrimalityCertainty::DeterministicMR);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(n.to_u64_wrapping() ^ 0x9e37_79b9_7f4a_7c15);
    let span = Integer::from(n - 3u32);
    for _ in 0..config.mr_rounds {
        // base in [2, n-2]
        let r: u128 = rng.random();
        let base = Integer::from(r) % &span + 2u32;
        if !strong_probable_prime(n, &base) {
            return (false, PrimalityCertainty::DeterministicMR);
        }
    }
    (true, PrimalityCertainty::ProbabilisticBPSW)
}

/// Deterministic primality for 64-bit integers.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &SMALL_PRIMES {
        let p = p as u64;
        if n == p {
            return true;
        }
        if n.is_multiple_of(p) {
            return false;
        }
    }
    if n < 97 * 97 {
        return true;
    }
    let d = (n - 1) >> (n - 1).trailing_zeros();
    let s = (n - 1).trailing_zeros();
    'bases: for &base in &MR64_BASES {
        let a = base % n;
        if a == 0 {
            continue;
        }
        let mut x = pow_mod_u64(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod_u64(x, x, n);
            if x == n - 1 {
                continue 'bases;
            }
        }
        return false;
    }
    true
}

fn mul_mod_u64(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod_u64(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod_u64(acc, base, m);
        }
        base = mul_mod_u64(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Strong probable-prime test to `base` for odd `n > 2`.
pub fn strong_probable_prime(n: &Integer, base: &Integer) -> bool {
    let n_minus_1 = Integer::from(n - 1u32);
    let s = n_minus_1.find_one(0).expect("n > 1");
    let d = Integer::from(&n_minus_1 >> s);
    let mut x = match base.clone().pow_mod(&d, n) {
        Ok(x) => x,
        Err(_) => return false,
    };
    if x == 1 || x == n_minus_1 {
        return true;
    }
    for _ in 1..s {
        x.square_mut();
        x %= n;
        if x == n_minus_1 {
            return true;
        }
        if x == 1 {
            return false;
        }
    }
    false
}

/// Strong Lucas probable-prime test with Selfridge's parameter choice
/// (`P = 1`, `Q = (1 − D)/4`, first `D` in 5, −7, 9, −11, … with `(D/n) = −1`).
pub fn strong_lucas_probable_prime(n: &Integer) -> bool {
    if *n == 2 {
        return true;
    }
    if n.is_even() || *n < 2 || n.is_perfect_square() {
        return false;
    }
    let mut d = 5i64;
    loop {
        let jac = Integer::from(d).jacobi(n);
        if jac == -1 {
            break;
        }
        if jac == 0 && d.abs() != *n {
            return false;
        }
        d = if d > 0 { -(d + 2) } else { -d + 2 };
    }
    let p = Integer::from(1);
    let q = Integer::from((1 - d) / 4);
    let big_d = Integer::from(d);

    let reduce = |x: Integer| -> Integer {
        let mut r = x % n;
        if r < 0 {
            r += n;
        }
        r
    };
    let half = |x: Integer| -> Integer {
        let x = if x.is_odd() { x + n } else { x };
        x >> 1
    };

    let n_plus_1 = Integer::from(n + 1u32);
    let s = n_plus_1.find_one(0).expect("n + 1 > 0");
    let k = Integer::from(&n_plus_1 >> s);

    // U_1 = 1, V_1 = P, Q^1
    let mut u = Integer::from(1);
    let mut v = p.clone();
    let mut qk = reduce(q.clone());
    let bits = k.significant_bits();
    for i in (0..bits - 1).rev() {
        // index doubling: U_2m = U_m V_m, V_2m = V_m^2 − 2 Q^m
        u = reduce(u * &v);
        v = reduce(Integer::from(v.square_ref()) - Integer::from(&qk << 1));
        qk = reduce(qk.square());
        if k.get_bit(i) {
            // index increment: U_{m+1} = (P U + V)/2, V_{m+1} = (D U + P V)/2
            let new_u = half(reduce(Integer::from(&p * &u) + &v));
            let new_v = half(reduce(Integer::from(&big_d * &u) + Integer::from(&p * &v)));
            u = new_u;
            v = new_v;
            qk = reduce(qk * &q);
        }
    }
    if u == 0 || v == 0 {
        return true;
    }
    for _ in 1..s {
        v = reduce(Integer::from(v.square_ref()) - Integer::from(&qk << 1));
        if v == 0 {
            return true;
        }
        qk = reduce(qk.square());
    }
    false
}
