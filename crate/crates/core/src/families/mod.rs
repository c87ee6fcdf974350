//! Function families `f_n`, their inverses, derivative ratios and step maps
//! `h_n = f_{n+1} ∘ f_n^{-1}`.

pub mod admissible;
mod gap;
mod hypothesis;
mod spec;

pub use admissible::{admissible_a, factorial_n0};
pub use gap::GapFunction;
pub use hypothesis::{check_hypothesis, CheckKind, Finding, HypothesisConfig, HypothesisReport};
pub use spec::{FamilySpec, FitContext, NoFit, SourceFit};

use crate::interval::{format_rational, BigInterval};
use crate::sequences::Bound;
use crate::{Error, Result};
use rug::ops::Pow;
use rug::{Float, Integer, Rational};

/// Exact integer paths are abandoned above this many bits.
pub const MAX_EXACT_BITS: u64 = 1 << 24;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FamilyKind {
    /// `f_n(x) = x^(3^n)`.
    Mills,
    /// `f_0 = id`, `f_{n+1} = 2^(f_n)`.
    Wright,
    /// `f_n(x) = x^(n^xi)`.
    FarhiPower { xi: Rational, k: Rational },
    /// `f_n(x) = (n!)^(k + eps) x`.
    FarhiFactorial {
        k: Rational,
        eps: Rational,
        c: Rational,
    },
    /// `f_n(x) = A^n x`.
    GeometricA { a: Rational },
    /// `f_n(x) = lambda x^n`.
    LambdaPower { lambda: Rational, m: Integer },
}

/// A family with its domain `]a, b[`, start index and gap bound.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FamilyDescriptor {
    pub kind: FamilyKind,
    pub n0: u64,
    pub domain_lo: Rational,
    /// `None` is `+∞`.
    pub domain_hi: Option<Rational>,
    pub gap: GapFunction,
    pub assumptions: Vec<String>,
}

/// `h_n(w)` for an integer `w`: exact, or an enclosure with a certified ceiling
/// when one is available.
#[derive(Clone, Debug, PartialEq)]
pub enum HValue {
    Exact(Integer),
    Enclosed {
        ceil: Option<Integer>,
        enclosure: BigInterval,
    },
}

impl HValue {
    fn enclosed(enclosure: BigInterval) -> HValue {
        HValue::Enclosed {
            ceil: enclosure.certified_ceil(),
            enclosure,
        }
    }

    /// Certified `ceil(h)`.
    pub fn ceil(&self) -> Option<Integer> {
        match self {
            HValue::Exact(v) => Some(v.clone()),
            HValue::Enclosed { ceil, .. } => ceil.clone(),
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, HValue::Exact(_))
    }

    pub fn enclosure(&self, prec: u32) -> BigInterval {
        match self {
            HValue::Exact(v) => exact_integer(v, prec),
            HValue::Enclosed { enclosure, .. } => enclosure.clone(),
        }
    }

    /// Search bound equivalent to `>= h`: for an integer `u`, `u >= h` iff
    /// `u >= ceil(h)`.
    pub fn bound(&self) -> Bound {
        match self.ceil() {
            Some(c) => Bound::Exact(c),
            None => match self {
                HValue::Enclosed { enclosure, .. } => Bound::Interval(enclosure.clone()),
                HValue::Exact(_) => unreachable!(),
            },
        }
    }

    /// Certified `w < h` for an integer `w`, or `None` if undecided.
    pub fn exceeds(&self, w: &Integer) -> Option<bool> {
        if let Some(c) = self.ceil() {
            return Some(*w < c);
        }
        let HValue::Enclosed { enclosure, .. } = self else {
            unreachable!()
        };
        if *enclosure.lo() > *w {
            Some(true)
        } else if *enclosure.hi() <= *w {
            Some(false)
        } else {
            None
        }
    }
}

/// Point enclosure of an integer, widened in precision until exact.
pub fn exact_integer(v: &Integer, prec: u32) -> BigInterval {
    let bits = v.significant_bits().max(2);
    BigInterval::from_integer(v, prec.max(bits))
}

fn exact_rational(q: &Rational, prec: u32) -> BigInterval {
    if *q.denom() == 1 {
        exact_integer(q.numer(), prec)
    } else {
        BigInterval::from_rational(q, prec)
    }
}

fn lift(x: &BigInterval, prec: u32) -> BigInterval {
    if x.prec() < prec {
        x.with_prec(prec)
    } else {
        x.clone()
    }
}

fn rational_bits(q: &Rational) -> u64 {
    (q.numer().significant_bits() + q.denom().significant_bits()) as u64
}

fn as_integer(q: &Rational) -> Option<&Integer> {
    (*q.denom() == 1).then(|| q.numer())
}

/// `(ceil((num/den)^(1/q)), exact)` for positive `num`, `den`.
pub fn ceil_root_ratio(num: &Integer, den: &Integer, q: u32) -> (Integer, bool) {
    let floor = Integer::from(num / den);
    let r = floor.root(q);
    let exact = Integer::from(Pow::pow(&r, q)) * den == *num;
    if exact {
        (r, true)
    } else {
        (r + 1u32, false)
    }
}

fn factorial(n: u64) -> Integer {
    Integer::from(Integer::factorial(n as u32))
}

impl FamilyDescriptor {
    pub fn mills() -> Self {
        FamilyDescriptor {
            kind: FamilyKind::Mills,
            n0: 1,
            domain_lo: Rational::from(1),
            domain_hi: None,
            gap: GapFunction::power_two_thirds(),
            assumptions: Vec::new(),
        }
    }

    pub fn wright() -> Self {
        FamilyDescriptor {
            kind: FamilyKind::Wright,
            n0: 0,
            domain_lo: Rational::new(),
            domain_hi: None,
            gap: GapFunction::LinearLog2,
            assumptions: Vec::new(),
        }
    }

    /// Power family on `]a, ∞[` with `g(x) = (ln x)^(k+1)`.
    pub fn farhi_power(xi: Rational, k: Rational, a: Rational) -> Result<Self> {
        if xi <= 1 || k <= 1 {
            return Err(Error::Domain("farhi-power needs xi > 1 and k > 1".into()));
        }
        if a <= 1 {
            return Err(Error::Domain("farhi-power needs a > 1".into()));
        }
        let gap = GapFunction::log_power(Rational::from(1), Rational::from(&k + 1u32), Rational::new())?;
        Ok(FamilyDescriptor {
            kind: FamilyKind::FarhiPower { xi, k },
            n0: 1,
            domain_lo: a,
            domain_hi: None,
            gap,
            assumptions: Vec::new(),
        })
    }

    /// Factorial family on `]1, 2[` with `g(x) = c (ln x)^k + 1`.
    pub fn farhi_factorial(k: Rational, eps: Rational, c: Rational, n0: u64) -> Result<Self> {
        if k <= 1 || eps <= 0 || c <= 0 {
            return Err(Error::Domain(
                "farhi-factorial needs k > 1, eps > 0 and c > 0".into(),
            ));
        }
        if n0 < 1 {
            return Err(Error::Domain("farhi-factorial needs n0 >= 1".into()));
        }
        let gap = GapFunction::log_power(c.clone(), k.clone(), Rational::from(1))?;
        Ok(FamilyDescriptor {
            kind: FamilyKind::FarhiFactorial { k, eps, c },
            n0,
            domain_lo: Rational::from(1),
            domain_hi: Some(Rational::from(2)),
            gap,
            assumptions: Vec::new(),
        })
    }

    /// `A^n x` on `]0, ∞[` with constant `g = A`.
    pub fn geometric(a: Rational) -> Result<Self> {
        if a <= 1 {
            return Err(Error::Domain("geometric needs A > 1".into()));
        }
        Ok(FamilyDescriptor {
            gap: GapFunction::constant(a.clone()),
            kind: FamilyKind::GeometricA { a },
            n0: 1,
            domain_lo: Rational::new(),
            domain_hi: None,
            assumptions: Vec::new(),
        })
    }

    /// `lambda x^n` on `]max(1, M+1), ∞[` with constant `g = M + 1`.
    pub fn lambda_power(lambda: Rational, m: Integer) -> Result<Self> {
        if lambda <= 0 || m < 1 {
            return Err(Error::Domain("lambda-power needs lambda > 0 and M >= 1".into()));
        }
        let m1 = Rational::from(Integer::from(&m + 1u32));
        Ok(FamilyDescriptor {
            kind: FamilyKind::LambdaPower { lambda, m },
            n0: 1,
            domain_lo: m1.clone(),
            domain_hi: None,
            gap: GapFunction::constant(m1),
            assumptions: Vec::new(),
        })
    }

    pub fn with_gap(mut self, gap: GapFunction) -> Self {
        self.gap = gap;
        self
    }

    pub fn with_n0(mut self, n0: u64) -> Self {
        self.n0 = n0;
        self
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            FamilyKind::Mills => "mills",
            FamilyKind::Wright => "wright",
            FamilyKind::FarhiPower { .. } => "farhi-power",
            FamilyKind::FarhiFactorial { .. } => "farhi-factorial",
            FamilyKind::GeometricA { .. } => "geometric",
            FamilyKind::LambdaPower { .. } => "lambda-power",
        }
    }

    /// Smallest `n` at which `f_n` is defined.
    pub fn min_index(&self) -> u64 {
        match self.kind {
            FamilyKind::Mills | FamilyKind::Wright | FamilyKind::GeometricA { .. } => 0,
            _ => 1,
        }
    }

    /// Default chain length for the CLI.
    pub fn default_terms(&self) -> u64 {
        match self.kind {
            FamilyKind::Mills | FamilyKind::FarhiPower { .. } => 6,
            FamilyKind::Wright => 4,
            _ => 12,
        }
    }

    /// Whether `f'_{n+1}/f'_n` depends on `x`.
    pub fn ratio_depends_on_x(&self) -> bool {
        !matches!(
            self.kind,
            FamilyKind::FarhiFactorial { .. } | FamilyKind::GeometricA { .. }
        )
    }

    fn check_index(&self, n: u64) -> Result<()> {
        if n < self.min_index() {
            return Err(Error::Domain(format!(
                "{} is defined from n = {}, got n = {n}",
                self.name(),
                self.min_index()
            )));
        }
        Ok(())
    }

    fn check_domain(&self, x: &BigInterval) -> Result<()> {
        let below = *x.lo() < self.domain_lo;
        let above = self.domain_hi.as_ref().is_some_and(|b| *x.hi() > *b);
        if below || above {
            return Err(Error::Domain(format!(
                "{x} leaves the closed domain [{}, {}]",
                format_rational(&self.domain_lo),
                self.domain_hi
                    .as_ref()
                    .map(format_rational)
                    .unwrap_or_else(|| "inf".into())
            )));
        }
        Ok(())
    }

    /// `k + eps` for the factorial family.
    fn factorial_exponent(&self) -> Option<Rational> {
        match &self.kind {
            FamilyKind::FarhiFactorial { k, eps, .. } => Some(Rational::from(k + eps)),
            _ => None,
        }
    }

    /// Enclosure of `m^s` for a positive integer `m`.
    fn int_pow_rational(m: &Integer, s: &Rational, prec: u32) -> BigInterval {
        match as_integer(s).and_then(|e| e.to_u32()) {
            Some(e) if (m.significant_bits() as u64) * (e as u64) <= MAX_EXACT_BITS => {
                exact_integer(&Integer::from(Pow::pow(m, e)), prec)
            }
            _ => BigInterval::from_integer(m, prec)
                .pow_real(&BigInterval::from_rational(s, prec))
                .expect("positive base"),
        }
    }

    /// Enclosure of `n^xi` and, when integral, its exact value.
    fn power_exponent(n: u64, xi: &Rational, prec: u32) -> (BigInterval, Option<Integer>) {
        if let Some(e) = as_integer(xi).and_then(|e| e.to_u32()) {
            let v = Integer::from(n).pow(e);
            return (exact_integer(&v, prec), Some(v));
        }
        (Self::int_pow_rational(&Integer::from(n), xi, prec), None)
    }

    /// Exact `f_n(x)` for rational `x` when the family exponent is integral
    /// and the result stays small.
    fn eval_exact(&self, n: u64, x: &Rational) -> Option<Rational> {
        let xbits = rational_bits(x).max(1);
        let pow_q = |e: u64| -> Option<Rational> {
            if xbits.checked_mul(e)? > MAX_EXACT_BITS {
                return None;
            }
            let e = u32::try_from(e).ok()?;
            Some(Rational::from(x.pow(e)))
        };
        match &self.kind {
            FamilyKind::Mills => pow_q(3u64.checked_pow(u32::try_from(n).ok()?)?),
            FamilyKind::Wright => {
                let mut y = x.clone();
                for _ in 0..n {
                    let e = as_integer(&y)?.to_u64().filter(|&e| e <= MAX_EXACT_BITS)?;
                    y = Rational::from(Integer::from(1) << e as u32);
                }
                Some(y)
            }
            FamilyKind::FarhiPower { xi, .. } => {
                let e = as_integer(xi)?.to_u32()?;
                pow_q(n.checked_pow(e)?)
            }
            FamilyKind::FarhiFactorial { .. } => {
                let s = self.factorial_exponent()?;
                let e = as_integer(&s)?.to_u32()?;
                let f = factorial(n);
                if (f.significant_bits() as u64) * (e as u64) > MAX_EXACT_BITS {
                    return None;
                }
                Some(Rational::from(f.pow(e)) * x)
            }
            FamilyKind::GeometricA { a } => {
                if rational_bits(a) * n > MAX_EXACT_BITS {
                    return None;
                }
                Some(Rational::from(a.pow(u32::try_from(n).ok()?)) * x)
            }
            FamilyKind::LambdaPower { lambda, .. } => Some(pow_q(n)? * lambda),
        }
    }

    /// Certified enclosure of `f_n(x)`.
    pub fn eval(&self, n: u64, x: &BigInterval, prec: u32) -> Result<BigInterval> {
        self.check_index(n)?;
        self.check_domain(x)?;
        if x.is_point() {
            if let Some(q) = x.lo().to_rational() {
                if let Some(v) = self.eval_exact(n, &q) {
                    return Ok(exact_rational(&v, prec));
                }
            }
        }
        let x = lift(x, prec);
        Ok(match &self.kind {
            FamilyKind::Mills => x.pow_integer(&Integer::from(3).pow(n as u32)),
            FamilyKind::Wright => {
                let mut y = x;
                for _ in 0..n {
                    y = y.exp2();
                }
                y
            }
            FamilyKind::FarhiPower { xi, .. } => match Self::power_exponent(n, xi, prec) {
                (_, Some(e)) => x.pow_integer(&e),
                (e, None) => x.pow_real(&e)?,
            },
            FamilyKind::FarhiFactorial { .. } => {
                let s = self.factorial_exponent().unwrap();
                Self::int_pow_rational(&factorial(n), &s, prec).mul(&x)
            }
            FamilyKind::GeometricA { a } => {
                exact_rational(&Rational::from(a.pow(n as u32)), prec).mul(&x)
            }
            FamilyKind::LambdaPower { lambda, .. } => {
                exact_rational(lambda, prec).mul(&x.pow_u64(n))
            }
        })
    }

    /// `f_n(q)` for a rational point, exact when possible.
    pub fn eval_rational(&self, n: u64, q: &Rational, prec: u32) -> Result<BigInterval> {
        self.check_index(n)?;
        if let Some(v) = self.eval_exact(n, q) {
            return Ok(exact_rational(&v, prec));
        }
        self.eval(n, &BigInterval::from_rational(q, prec), prec)
    }

    /// Certified enclosure of `f_n^{-1}(y)`, in closed form.
    pub fn eval_inverse(&self, n: u64, y: &BigInterval, prec: u32) -> Result<BigInterval> {
        self.check_index(n)?;
        let y = lift(y, prec);
        match &self.kind {
            FamilyKind::Mills => {
                let e = Integer::from(3).pow(n as u32);
                match e.to_u32() {
                    Some(e) => y.root(e),
                    None => {
                        let inv = BigInterval::from_u64(1, prec).div(&exact_integer(&e, prec))?;
                        y.pow_real(&inv)
                    }
                }
            }
            FamilyKind::Wright => {
                let mut x = y;
                for _ in 0..n {
                    x = x.log2()?;
                }
                Ok(x)
            }
            FamilyKind::FarhiPower { xi, .. } => match Self::power_exponent(n, xi, prec) {
                (_, Some(e)) if e.to_u32().is_some() => y.root(e.to_u32().unwrap()),
                (e, _) => {
                    let inv = BigInterval::from_u64(1, prec).div(&e)?;
                    y.pow_real(&inv)
                }
            },
            FamilyKind::FarhiFactorial { .. } => {
                let s = self.factorial_exponent().unwrap();
                y.div(&Self::int_pow_rational(&factorial(n), &s, prec))
            }
            FamilyKind::GeometricA { a } => {
                y.div(&exact_rational(&Rational::from(a.pow(n as u32)), prec))
            }
            FamilyKind::LambdaPower { lambda, .. } => {
                let z = y.div(&exact_rational(lambda, prec))?;
                if *z.lo() < 0 {
                    return Err(Error::Domain(format!("{z} below zero")));
                }
                z.root(u32::try_from(n).map_err(|_| Error::Domain("index too large".into()))?)
            }
        }
    }

    /// `f_n^{-1}(v)` for an integer, evaluated at `prec` bits.
    pub fn eval_inverse_integer(&self, n: u64, v: &Integer, prec: u32) -> Result<BigInterval> {
        self.eval_inverse(n, &BigInterval::from_integer(v, prec), prec)
    }

    /// Certified enclosure of `f'_{n+1}(x) / f'_n(x)`.
    pub fn derivative_ratio(&self, n: u64, x: &BigInterval, prec: u32) -> Result<BigInterval> {
        self.check_index(n)?;
        self.check_domain(x)?;
        let x = lift(x, prec);
        Ok(match &self.kind {
            FamilyKind::Mills => {
                let e = Integer::from(3).pow(n as u32) * 2u32;
                BigInterval::from_u64(3, prec).mul(&x.pow_integer(&e))
            }
            FamilyKind::Wright => BigInterval::ln2(prec).mul(&self.eval(n + 1, &x, prec)?),
            FamilyKind::FarhiPower { xi, .. } => {
                let base = Rational::from((n + 1, n));
                if let Some(e) = as_integer(xi).and_then(|e| e.to_u32()) {
                    let coeff = base.pow(e);
                    let d = Integer::from(n + 1).pow(e) - Integer::from(n).pow(e);
                    exact_rational(&coeff, prec).mul(&x.pow_integer(&d))
                } else {
                    let xi_iv = BigInterval::from_rational(xi, prec);
                    let coeff = BigInterval::from_rational(&base, prec).pow_real(&xi_iv)?;
                    let (hi, _) = Self::power_exponent(n + 1, xi, prec);
                    let (lo, _) = Self::power_exponent(n, xi, prec);
                    coeff.mul(&x.pow_real(&hi.sub(&lo))?)
                }
            }
            FamilyKind::FarhiFactorial { .. } => {
                let s = self.factorial_exponent().unwrap();
                Self::int_pow_rational(&Integer::from(n + 1), &s, prec)
            }
            FamilyKind::GeometricA { a } => exact_rational(a, prec),
            FamilyKind::LambdaPower { .. } => {
                exact_rational(&Rational::from((n + 1, n)), prec).mul(&x)
            }
        })
    }

    /// Enclosure of `h_n(y)` for a real `y`, in closed form.
    pub fn h_eval(&self, n: u64, y: &BigInterval, prec: u32) -> Result<BigInterval> {
        self.check_index(n)?;
        let y = lift(y, prec);
        Ok(match &self.kind {
            FamilyKind::Mills => y.pow_u64(3),
            FamilyKind::Wright => y.exp2(),
            FamilyKind::FarhiPower { xi, .. } => {
                let base = Rational::from((n + 1, n));
                let r = match as_integer(xi).and_then(|e| e.to_u32()) {
                    Some(e) => exact_rational(&base.pow(e), prec),
                    None => BigInterval::from_rational(&base, prec)
                        .pow_real(&BigInterval::from_rational(xi, prec))?,
                };
                y.pow_real(&r)?
            }
            FamilyKind::FarhiFactorial { .. } => {
                let s = self.factorial_exponent().unwrap();
                Self::int_pow_rational(&Integer::from(n + 1), &s, prec).mul(&y)
            }
            FamilyKind::GeometricA { a } => exact_rational(a, prec).mul(&y),
            FamilyKind::LambdaPower { lambda, .. } => {
                let l = exact_rational(lambda, prec);
                let r = BigInterval::from_rational(&Rational::from((n + 1, n)), prec);
                l.mul(&y.div(&l)?.pow_real(&r)?)
            }
        })
    }

    /// `h_n(v + offset)` with exact integer arithmetic wherever the value or
    /// its ceiling is an integer computable by roots of integers.
    pub fn h_apply(&self, n: u64, v: &Integer, offset: u32, prec: u32) -> Result<HValue> {
        self.check_index(n)?;
        let w = Integer::from(v + offset);
        if w <= 0 {
            return Err(Error::Domain(format!("h_n needs a positive argument, got {w}")));
        }
        let wbits = w.significant_bits() as u64;
        let fallback = |prec: u32| -> Result<HValue> {
            Ok(HValue::enclosed(self.h_eval(n, &BigInterval::from_integer(&w, prec), prec)?))
        };
        match &self.kind {
            FamilyKind::Mills => Ok(HValue::Exact(w.pow(3))),
            FamilyKind::Wright => match w.to_u32().filter(|&e| e as u64 <= MAX_EXACT_BITS) {
                Some(e) => Ok(HValue::Exact(Integer::from(1) << e)),
                None => fallback(prec),
            },
            FamilyKind::FarhiPower { xi, .. } => {
                let Some(e) = as_integer(xi).and_then(|e| e.to_u32()) else {
                    return fallback(prec);
                };
                let p = Integer::from(n + 1).pow(e);
                let q = Integer::from(n).pow(e);
                match (p.to_u64(), q.to_u32()) {
                    (Some(p), Some(q)) if wbits.saturating_mul(p) <= MAX_EXACT_BITS => {
                        let num = Integer::from(Pow::pow(&w, p as u32));
                        let (c, exact) = ceil_root_ratio(&num, &Integer::from(1), q);
                        if exact {
                            Ok(HValue::Exact(c))
                        } else {
                            let enclosure = BigInterval::from_integer(&num, prec).root(q)?;
                            Ok(HValue::Enclosed {
                                ceil: Some(c),
                                enclosure,
                            })
                        }
                    }
                    _ => fallback(prec),
                }
            }
            FamilyKind::FarhiFactorial { .. } => {
                let s = self.factorial_exponent().unwrap();
                let (p, q) = (s.numer(), s.denom());
                let base_bits = Integer::from(n + 1).significant_bits() as u64;
                match (p.to_u32(), q.to_u32()) {
                    (Some(p), Some(q))
                        if base_bits * p as u64 + wbits * q as u64 <= MAX_EXACT_BITS =>
                    {
                        let num = Integer::from(n + 1).pow(p) * Integer::from(Pow::pow(&w, q));
                        let (c, exact) = ceil_root_ratio(&num, &Integer::from(1), q);
                        if exact {
                            Ok(HValue::Exact(c))
                        } else {
                            let enclosure = BigInterval::from_integer(&num, prec).root(q)?;
                            Ok(HValue::Enclosed {
                                ceil: Some(c),
                                enclosure,
                            })
                        }
                    }
                    _ => fallback(prec),
                }
            }
            FamilyKind::GeometricA { a } => {
                let h = Rational::from(a * &w);
                if *h.denom() == 1 {
                    Ok(HValue::Exact(h.numer().clone()))
                } else {
                    let ceil = h.clone().ceil().numer().clone();
                    Ok(HValue::Enclosed {
                        ceil: Some(ceil),
                        enclosure: BigInterval::from_rational(&h, prec),
                    })
                }
            }
            FamilyKind::LambdaPower { lambda, .. } => {
                let Some(nn) = u32::try_from(n).ok().filter(|_| wbits * (n + 1) <= MAX_EXACT_BITS)
                else {
                    return fallback(prec);
                };
                // lambda (w / lambda)^((n+1)/n) = (w^(n+1) / lambda)^(1/n)
                let num = Integer::from(Pow::pow(&w, nn + 1)) * lambda.denom();
                let den = lambda.numer().clone();
                let (c, exact) = ceil_root_ratio(&num, &den, nn);
                if exact {
                    Ok(HValue::Exact(c))
                } else {
                    let ratio = Rational::from((num, den));
                    let enclosure = BigInterval::from_rational(&ratio, prec).root(nn)?;
                    Ok(HValue::Enclosed {
                        ceil: Some(c),
                        enclosure,
                    })
                }
            }
        }
    }

    /// `f_n(a)`: the infimum `λ_n` of `f_n` on the domain.
    pub fn lower_image(&self, n: u64, prec: u32) -> Result<BigInterval> {
        self.eval_rational(n, &self.domain_lo, prec)
    }

    /// `f_n(b)`, or `None` for an unbounded image.
    pub fn upper_image(&self, n: u64, prec: u32) -> Result<Option<BigInterval>> {
        self.domain_hi
            .as_ref()
            .map(|b| self.eval_rational(n, b, prec))
            .transpose()
    }

    /// Certified `v ∈ ]λ_n, μ_n − 1[`, or `None` if undecided at `prec`.
    pub fn admits(&self, n: u64, v: &Integer, prec: u32) -> Result<Option<bool>> {
        let lam = self.lower_image(n, prec)?;
        let above = if *lam.hi() < *v {
            true
        } else if *lam.lo() >= *v {
            return Ok(Some(false));
        } else {
            return Ok(None);
        };
        let Some(mu) = self.upper_image(n, prec)? else {
            return Ok(Some(above));
        };
        let w = Integer::from(v + 1u32);
        if *mu.lo() > w {
            Ok(Some(true))
        } else if *mu.hi() <= w {
            Ok(Some(false))
        } else {
            Ok(None)
        }
    }

    /// `f'_{n+1}/f'_n(x) − g(f_{n+1}(x))`, with the equality cases settled
    /// symbolically.
    pub fn hypothesis_margin(&self, n: u64, x: &BigInterval, prec: u32) -> Result<BigInterval> {
        match (&self.kind, &self.gap) {
            (FamilyKind::Wright, GapFunction::LinearLog2) => {
                self.check_index(n)?;
                self.check_domain(x)?;
                Ok(BigInterval::from_u64(0, prec))
            }
            (FamilyKind::GeometricA { a }, GapFunction::Constant { value }) => {
                self.check_index(n)?;
                self.check_domain(x)?;
                Ok(BigInterval::from_rational(&Rational::from(a - value), prec))
            }
            _ => {
                let ratio = self.derivative_ratio(n, x, prec)?;
                let next = self.eval(n + 1, x, prec)?;
                Ok(ratio.sub(&self.gap.eval(&next, prec)))
            }
        }
    }

    /// Sample window for hypothesis checks: the domain clamped to
    /// `[a + lo_offset, a + hi_offset]` when unbounded above.
    pub fn sample_window(&self, lo_offset: &Rational, hi_offset: &Rational) -> (Rational, Rational) {
        match &self.domain_hi {
            Some(b) => (self.domain_lo.clone(), b.clone()),
            None => (
                Rational::from(&self.domain_lo + lo_offset),
                Rational::from(&self.domain_lo + hi_offset),
            ),
        }
    }

    /// Decimal rendering of a point for reports.
    pub fn describe_point(x: &Float) -> String {
        x.to_string_radix(10, Some(12))
    }
}
