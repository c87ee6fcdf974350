//! Outward-rounded interval arithmetic over MPFR floats.
//!
//! Every irrational quantity in a construction lives in a [`BigInterval`]:
//! the lower endpoint is rounded toward −∞ and the upper endpoint toward +∞,
//! so an interval computed from enclosures of exact operands always encloses
//! the exact result. Infinite endpoints are allowed and mean "unbounded";
//! any NaN produced along the way widens the offending endpoint to ±∞.
//!
//! The transcendental kernels (`exp`, `ln`, `exp2`, `log2`, `pow`, `root`)
//! are MPFR's correctly rounded implementations, evaluated once per endpoint
//! with the appropriate rounding direction.

mod decimal;

pub use decimal::{exact_decimal, format_rational, parse_rational};

use crate::Error;
use rug::float::{Constant, Round};
use rug::ops::{AssignRound, Pow};
use rug::{Float, Integer, Rational};
use std::cmp::Ordering;
use std::fmt;

/// Starting working precision in bits.
pub const DEFAULT_PRECISION: u32 = 128;

/// Default hard cap on the working precision in bits.
pub const DEFAULT_PRECISION_MAX: u32 = 1 << 20;

/// Outcome of comparing two enclosures.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CertifiedOrder {
    CertainlyLess,
    CertainlyGreater,
    /// Both operands are the same exact point.
    CertainlyEqual,
    Indeterminate,
}

impl CertifiedOrder {
    pub fn reverse(self) -> Self {
        match self {
            CertifiedOrder::CertainlyLess => CertifiedOrder::CertainlyGreater,
            CertifiedOrder::CertainlyGreater => CertifiedOrder::CertainlyLess,
            other => other,
        }
    }
}

/// Binary operation selector for [`arith`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

/// Unary elementary function selector for [`elementary`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ElementaryOp {
    Exp,
    Ln,
    Exp2,
    Log2,
}

/// Closed interval `[lo, hi]` with MPFR endpoints.
///
/// Immutable once built; all operations return new intervals.
#[derive(Clone, PartialEq)]
pub struct BigInterval {
    lo: Float,
    hi: Float,
}

fn rounded<T>(prec: u32, value: T, round: Round) -> Float
where
    Float: AssignRound<T, Round = Round, Ordering = Ordering>,
{
    let mut f = Float::new(prec);
    f.assign_round(value, round);
    f
}

fn sanitize_lo(mut f: Float) -> Float {
    if f.is_nan() {
        f = Float::with_val(f.prec(), rug::float::Special::NegInfinity);
    }
    f
}

fn sanitize_hi(mut f: Float) -> Float {
    if f.is_nan() {
        f = Float::with_val(f.prec(), rug::float::Special::Infinity);
    }
    f
}

fn min_of(values: [Float; 4]) -> Float {
    let [a, b, c, d] = values;
    let ab = if a <= b { a } else { b };
    let cd = if c <= d { c } else { d };
    if ab <= cd {
        ab
    } else {
        cd
    }
}

fn max_of(values: [Float; 4]) -> Float {
    let [a, b, c, d] = values;
    let ab = if a >= b { a } else { b };
    let cd = if c >= d { c } else { d };
    if ab >= cd {
        ab
    } else {
        cd
    }
}

/// Endpoint product with the interval convention `0 · ∞ = 0`.
fn mul_endpoint(prec: u32, a: &Float, b: &Float, round: Round) -> Float {
    if a.is_zero() || b.is_zero() {
        return Float::new(prec);
    }
    rounded(prec, a * b, round)
}

impl BigInterval {
    /// Builds `[lo, hi]`. Panics if `lo > hi`.
    pub fn new(lo: Float, hi: Float) -> Self {
        let lo = sanitize_lo(lo);
        let hi = sanitize_hi(hi);
        assert!(lo <= hi, "interval endpoints out of order: {lo} > {hi}");
        BigInterval { lo, hi }
    }

    pub fn point(x: Float) -> Self {
        assert!(!x.is_nan(), "NaN point");
        BigInterval {
            lo: x.clone(),
            hi: x,
        }
    }

    /// Enclosure of an integer; exact whenever `n` fits in `prec` bits.
    pub fn from_integer(n: &Integer, prec: u32) -> Self {
        let prec = prec.max(2);
        BigInterval {
            lo: rounded(prec, n, Round::Down),
            hi: rounded(prec, n, Round::Up),
        }
    }

    pub fn from_u64(n: u64, prec: u32) -> Self {
        Self::from_integer(&Integer::from(n), prec)
    }

    pub fn from_rational(q: &Rational, prec: u32) -> Self {
        let prec = prec.max(2);
        BigInterval {
            lo: rounded(prec, q, Round::Down),
            hi: rounded(prec, q, Round::Up),
        }
    }

    /// `[0, +∞]`-style unbounded enclosure.
    pub fn entire(prec: u32) -> Self {
        BigInterval {
            lo: Float::with_val(prec, rug::float::Special::NegInfinity),
            hi: Float::with_val(prec, rug::float::Special::Infinity),
        }
    }

    /// Enclosure of ln 2.
    pub fn ln2(prec: u32) -> Self {
        BigInterval {
            lo: rounded(prec, Constant::Log2, Round::Down),
            hi: rounded(prec, Constant::Log2, Round::Up),
        }
    }

    pub fn lo(&self) -> &Float {
        &self.lo
    }

    pub fn hi(&self) -> &Float {
        &self.hi
    }

    /// Working precision: the larger endpoint precision.
    pub fn prec(&self) -> u32 {
        self.lo.prec().max(self.hi.prec())
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn is_finite(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    /// Upper bound on `hi − lo`.
    pub fn width(&self) -> Float {
        rounded(self.prec(), &self.hi - &self.lo, Round::Up)
    }

    /// Upper bound on the width relative to the smallest magnitude in the interval.
    pub fn relative_width(&self) -> Float {
        let p = self.prec();
        let mag = if self.lo.is_sign_positive() {
            self.lo.clone()
        } else if self.hi.is_sign_negative() {
            Float::with_val(p, -&self.hi)
        } else {
            return Float::with_val(p, rug::float::Special::Infinity);
        };
        if mag.is_zero() {
            return Float::with_val(p, rug::float::Special::Infinity);
        }
        rounded(p, &self.width() / &mag, Round::Up)
    }

    /// Rounds the endpoints outward to `prec` bits.
    pub fn with_prec(&self, prec: u32) -> Self {
        BigInterval {
            lo: rounded(prec, &self.lo, Round::Down),
            hi: rounded(prec, &self.hi, Round::Up),
        }
    }

    pub fn contains_float(&self, x: &Float) -> bool {
        self.lo <= *x && *x <= self.hi
    }

    pub fn contains_integer(&self, n: &Integer) -> bool {
        self.lo <= *n && self.hi >= *n
    }

    pub fn contains_rational(&self, q: &Rational) -> bool {
        self.lo <= *q && self.hi >= *q
    }

    /// `other ⊆ self`.
    pub fn contains(&self, other: &BigInterval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn overlaps(&self, other: &BigInterval) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }

    pub fn hull(&self, other: &BigInterval) -> Self {
        let p = self.prec().max(other.prec());
        let lo = if self.lo <= other.lo { &self.lo } else { &other.lo };
        let hi = if self.hi >= other.hi { &self.hi } else { &other.hi };
        BigInterval {
            lo: rounded(p, lo, Round::Down),
            hi: rounded(p, hi, Round::Up),
        }
    }

    /// Midpoint of the endpoints (display only; not an enclosure).
    pub fn midpoint(&self) -> Float {
        let p = self.prec() + 1;
        let mut m = Float::with_val(p, &self.lo + &self.hi);
        m /= 2;
        m
    }

    pub fn neg(&self) -> Self {
        BigInterval {
            lo: Float::with_val(self.hi.prec(), -&self.hi),
            hi: Float::with_val(self.lo.prec(), -&self.lo),
        }
    }

    pub fn add(&self, other: &BigInterval) -> Self {
        let p = self.prec().max(other.prec());
        BigInterval::new(
            rounded(p, &self.lo + &other.lo, Round::Down),
            rounded(p, &self.hi + &other.hi, Round::Up),
        )
    }

    pub fn sub(&self, other: &BigInterval) -> Self {
        let p = self.prec().max(other.prec());
        BigInterval::new(
            rounded(p, &self.lo - &other.hi, Round::Down),
            rounded(p, &self.hi - &other.lo, Round::Up),
        )
    }

    pub fn mul(&self, other: &BigInterval) -> Self {
        let p = self.prec().max(other.prec());
        let (a, b) = (self, other);
        let lo = min_of([
            mul_endpoint(p, &a.lo, &b.lo, Round::Down),
            mul_endpoint(p, &a.lo, &b.hi, Round::Down),
            mul_endpoint(p, &a.hi, &b.lo, Round::Down),
            mul_endpoint(p, &a.hi, &b.hi, Round::Down),
        ]);
        let hi = max_of([
            mul_endpoint(p, &a.lo, &b.lo, Round::Up),
            mul_endpoint(p, &a.lo, &b.hi, Round::Up),
            mul_endpoint(p, &a.hi, &b.lo, Round::Up),
            mul_endpoint(p, &a.hi, &b.hi, Round::Up),
        ]);
        BigInterval::new(lo, hi)
    }

    pub fn div(&self, other: &BigInterval) -> Result<Self, Error> {
        if other.lo <= 0 && other.hi >= 0 {
            return Err(Error::DivisionByIntervalContainingZero);
        }
        let p = self.prec().max(other.prec());
        let (a, b) = (self, other);
        let corner = |x: &Float, y: &Float, round: Round| {
            let q = rounded(p, x / y, round);
            match round {
                Round::Down => sanitize_lo(q),
                _ => sanitize_hi(q),
            }
        };
        let lo = min_of([
            corner(&a.lo, &b.lo, Round::Down),
            corner(&a.lo, &b.hi, Round::Down),
            corner(&a.hi, &b.lo, Round::Down),
            corner(&a.hi, &b.hi, Round::Down),
        ]);
        let hi = max_of([
            corner(&a.lo, &b.lo, Round::Up),
            corner(&a.lo, &b.hi, Round::Up),
            corner(&a.hi, &b.lo, Round::Up),
            corner(&a.hi, &b.hi, Round::Up),
        ]);
        Ok(BigInterval::new(lo, hi))
    }

    pub fn mul_integer(&self, n: &Integer) -> Self {
        self.mul(&BigInterval::from_integer(n, self.prec()))
    }

    pub fn div_integer(&self, n: &Integer) -> Result<Self, Error> {
        self.div(&BigInterval::from_integer(n, self.prec()))
    }

    fn require_positive(&self, what: &str) -> Result<(), Error> {
        if self.lo > 0 {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "{what} needs a positive argument, got lower endpoint {}",
                self.lo.to_string_radix(10, Some(12))
            )))
        }
    }

    pub fn exp(&self) -> Self {
        let p = self.prec();
        BigInterval::new(
            rounded(p, self.lo.exp_ref(), Round::Down),
            rounded(p, self.hi.exp_ref(), Round::Up),
        )
    }

    pub fn exp2(&self) -> Self {
        let p = self.prec();
        BigInterval::new(
            rounded(p, self.lo.exp2_ref(), Round::Down),
            rounded(p, self.hi.exp2_ref(), Round::Up),
        )
    }

    pub fn ln(&self) -> Result<Self, Error> {
        self.require_positive("ln")?;
        let p = self.prec();
        Ok(BigInterval::new(
            rounded(p, self.lo.ln_ref(), Round::Down),
            rounded(p, self.hi.ln_ref(), Round::Up),
        ))
    }

    pub fn log2(&self) -> Result<Self, Error> {
        self.require_positive("log2")?;
        let p = self.prec();
        Ok(BigInterval::new(
            rounded(p, self.lo.log2_ref(), Round::Down),
            rounded(p, self.hi.log2_ref(), Round::Up),
        ))
    }

    /// `self^r` for a positive base and real exponent.
    ///
    /// `x^y` is monotone in each argument separately on `x > 0`, so the
    /// extremes sit at the four corners.
    pub fn pow_real(&self, r: &BigInterval) -> Result<Self, Error> {
        self.require_positive("pow_real")?;
        let p = self.prec().max(r.prec());
        let corner = |x: &Float, y: &Float, round: Round| rounded(p, x.pow(y), round);
        let lo = min_of([
            corner(&self.lo, &r.lo, Round::Down),
            corner(&self.lo, &r.hi, Round::Down),
            corner(&self.hi, &r.lo, Round::Down),
            corner(&self.hi, &r.hi, Round::Down),
        ]);
        let hi = max_of([
            corner(&self.lo, &r.lo, Round::Up),
            corner(&self.lo, &r.hi, Round::Up),
            corner(&self.hi, &r.lo, Round::Up),
            corner(&self.hi, &r.hi, Round::Up),
        ]);
        Ok(BigInterval::new(sanitize_lo(lo), sanitize_hi(hi)))
    }

    /// `self^e` for a nonnegative integer exponent (any sign of base).
    pub fn pow_integer(&self, e: &Integer) -> Self {
        assert!(*e >= 0, "negative integer exponent");
        let p = self.prec();
        if *e == 0 {
            return BigInterval::from_u64(1, p);
        }
        let even = e.is_even();
        let up = |x: &Float| rounded(p, x.pow(e), Round::Up);
        let down = |x: &Float| rounded(p, x.pow(e), Round::Down);
        if self.lo >= 0 || !even {
            BigInterval::new(down(&self.lo), up(&self.hi))
        } else if self.hi <= 0 {
            BigInterval::new(down(&self.hi), up(&self.lo))
        } else {
            let mag = if Float::with_val(p, -&self.lo) >= self.hi {
                Float::with_val(p, -&self.lo)
            } else {
                self.hi.clone()
            };
            BigInterval::new(Float::new(p), up(&mag))
        }
    }

    pub fn pow_u64(&self, e: u64) -> Self {
        self.pow_integer(&Integer::from(e))
    }

    /// Real `k`-th root of a nonnegative interval.
    pub fn root(&self, k: u32) -> Result<Self, Error> {
        assert!(k >= 1);
        if self.lo < 0 {
            return Err(Error::Domain(format!(
                "root of an interval reaching below zero ({})",
                self.lo.to_string_radix(10, Some(12))
            )));
        }
        let p = self.prec();
        let mut lo = Float::with_val(p, &self.lo);
        lo.root_round(k, Round::Down);
        let mut hi = Float::with_val(p, &self.hi);
        hi.root_round(k, Round::Up);
        Ok(BigInterval::new(lo, hi))
    }

    /// Certified ceiling: `Some(c)` when every real in the interval has ceiling `c`.
    pub fn certified_ceil(&self) -> Option<Integer> {
        if !self.is_finite() {
            return None;
        }
        let (lo, _) = self.lo.to_integer_round(Round::Up)?;
        let (hi, _) = self.hi.to_integer_round(Round::Up)?;
        (lo == hi).then_some(lo)
    }

    /// Certified floor: `Some(f)` when every real in the interval has floor `f`.
    pub fn certified_floor(&self) -> Option<Integer> {
        if !self.is_finite() {
            return None;
        }
        let (lo, _) = self.lo.to_integer_round(Round::Down)?;
        let (hi, _) = self.hi.to_integer_round(Round::Down)?;
        (lo == hi).then_some(lo)
    }

    /// Smallest integer that is `>=` every point of the interval's lower end.
    pub fn ceil_lo(&self) -> Option<Integer> {
        self.lo.to_integer_round(Round::Up).map(|(c, _)| c)
    }
}

impl fmt::Debug for BigInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for BigInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = Some(((self.prec() as f64) * std::f64::consts::LOG10_2).ceil() as usize + 1);
        write!(
            f,
            "[{}, {}]",
            self.lo.to_string_radix_round(10, digits, Round::Down),
            self.hi.to_string_radix_round(10, digits, Round::Up)
        )
    }
}

/// Two-operand arithmetic dispatcher.
pub fn arith(op: ArithOp, a: &BigInterval, b: &BigInterval) -> Result<BigInterval, Error> {
    Ok(match op {
        ArithOp::Add => a.add(b),
        ArithOp::Sub => a.sub(b),
        ArithOp::Mul => a.mul(b),
        ArithOp::Div => a.div(b)?,
    })
}

/// Elementary-function dispatcher.
pub fn elementary(op: ElementaryOp, a: &BigInterval) -> Result<BigInterval, Error> {
    match op {
        ElementaryOp::Exp => Ok(a.exp()),
        ElementaryOp::Exp2 => Ok(a.exp2()),
        ElementaryOp::Ln => a.ln(),
        ElementaryOp::Log2 => a.log2(),
    }
}

/// Certified comparison of two enclosures.
pub fn compare(a: &BigInterval, b: &BigInterval) -> CertifiedOrder {
    if a.hi < b.lo {
        CertifiedOrder::CertainlyLess
    } else if a.lo > b.hi {
        CertifiedOrder::CertainlyGreater
    } else if a.is_point() && b.is_point() && a.lo == b.lo {
        CertifiedOrder::CertainlyEqual
    } else {
        CertifiedOrder::Indeterminate
    }
}

/// Certified `a <= b` for every pair of reals drawn from the two enclosures.
pub fn certainly_le(a: &BigInterval, b: &BigInterval) -> bool {
    a.hi <= b.lo
}

/// Certified `a < b`.
pub fn certainly_lt(a: &BigInterval, b: &BigInterval) -> bool {
    a.hi < b.lo
}

/// Next precision on the doubling ladder, or `None` past the cap.
pub fn escalate(prec: u32, cap: u32) -> Option<u32> {
    let next = prec.checked_mul(2)?;
    (next <= cap).then_some(next)
}
