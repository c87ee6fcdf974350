//! Parameter solvers: the smallest admissible domain start `a` for the power
//! family and the smallest start index `n0` for the factorial family.

use crate::interval::BigInterval;
use crate::{Error, Result};
use rug::ops::Pow;
use rug::{Integer, Rational};

const BISECTION_CAP: usize = 400;
const SCAN_CAP: u64 = 10_000_000;
const N0_SCAN: u64 = 1_000_000;
const N0_CERTIFY_SPAN: u64 = 1000;
const CERT_PRECISIONS: [u32; 3] = [128, 512, 2048];

fn rat(q: &Rational, prec: u32) -> BigInterval {
    BigInterval::from_rational(q, prec)
}

fn int(n: u64, prec: u32) -> BigInterval {
    BigInterval::from_u64(n, prec)
}

/// Largest root of `t/2 = (k+1) ln t` (the crossing beyond `t = 2(k+1)`).
fn crossing(kf: f64) -> Result<f64> {
    let phi = |t: f64| t / 2.0 - (kf + 1.0) * t.ln();
    let mut lo = 2.0 * (kf + 1.0);
    if phi(lo) >= 0.0 {
        return Ok(lo);
    }
    let mut hi = 2.0 * lo;
    let mut steps = 0;
    while phi(hi) < 0.0 {
        hi *= 2.0;
        steps += 1;
        if steps > 1000 {
            return Err(Error::ConvergenceFailure("no upper bracket for the crossing".into()));
        }
    }
    for _ in 0..BISECTION_CAP {
        if hi - lo <= 1e-15 * hi {
            return Ok(hi);
        }
        let mid = 0.5 * (lo + hi);
        if phi(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::ConvergenceFailure(format!(
        "bisection for the crossing exceeded {BISECTION_CAP} iterations"
    )))
}

/// `psi(n) = 2(k+1) ln(n+1) / n^(xi-1)`; returns the maximizing scan range end.
fn psi_max(xf: f64, kf: f64) -> Result<(f64, u64)> {
    let mut best = f64::NEG_INFINITY;
    for n in 1..=SCAN_CAP {
        let nf = n as f64;
        let psi = 2.0 * (kf + 1.0) * (nf + 1.0).ln() / nf.powf(xf - 1.0);
        best = best.max(psi);
        // psi is decreasing from here on once (xi-1)(n+1)ln(n+1) > n
        if (xf - 1.0) * (nf + 1.0) * (nf + 1.0).ln() > nf {
            return Ok((best, n));
        }
    }
    Err(Error::ConvergenceFailure(format!(
        "index scan for the (n+1)-power constraint did not settle below n = {SCAN_CAP}"
    )))
}

/// Rounds `a > 0` up to six significant digits.
fn round_up_6(a: f64) -> Rational {
    let e = a.log10().floor() as i32;
    let shift = 5 - e;
    let scale = Rational::from(Integer::from(10).pow(shift.unsigned_abs()));
    let scaled = if shift >= 0 {
        Rational::from_f64(a).unwrap() * &scale
    } else {
        Rational::from_f64(a).unwrap() / &scale
    };
    let units = scaled.ceil();
    if shift >= 0 {
        units / scale
    } else {
        units * scale
    }
}

fn one_unit_6(a: &Rational) -> Rational {
    let e = a.to_f64().log10().floor() as i32;
    let shift = e - 5;
    let ten = Rational::from(Integer::from(10).pow(shift.unsigned_abs()));
    if shift >= 0 {
        ten
    } else {
        Rational::from(1) / ten
    }
}

/// Certifies both constraints at `a` using the f64 scan end `n_stop`.
fn certify_a(a: &Rational, xi: &Rational, k: &Rational, n_stop: u64, prec: u32) -> bool {
    let ln_a = rat(a, prec).ln().expect("a > 1");
    let k1 = rat(&Rational::from(k + 1u32), prec);
    let t = BigInterval::point(ln_a.lo().clone());
    // t/2 - (k+1) ln t >= 0, with t past the minimum of the left side
    let t_min = k1.mul(&int(2, prec));
    if *t.lo() < *t_min.hi() {
        return false;
    }
    let Ok(lt) = t.ln() else { return false };
    let lhs = t.div(&int(2, prec)).expect("nonzero").sub(&k1.mul(&lt));
    if *lhs.lo() < 0 {
        return false;
    }
    let xi1 = rat(&Rational::from(xi - 1u32), prec);
    for n in 1..=n_stop {
        let psi = int(2, prec)
            .mul(&k1)
            .mul(&int(n + 1, prec).ln().expect("positive"))
            .div(&int(n, prec).pow_real(&xi1).expect("positive"))
            .expect("nonzero");
        if *psi.hi() > *ln_a.lo() {
            return false;
        }
    }
    // decreasing tail: (xi-1)(n+1) ln(n+1) > n at n_stop
    let tail = xi1
        .mul(&int(n_stop + 1, prec))
        .mul(&int(n_stop + 1, prec).ln().expect("positive"));
    *tail.lo() > n_stop
}

/// Smallest six-significant-digit `a` such that `(ln x)^(k+1) <= sqrt(x)` for
/// all `x > a` and `(n+1)^(k+1) <= a^(n^(xi-1)/2)` for all `n >= 1`.
pub fn admissible_a(xi: &Rational, k: &Rational) -> Result<Rational> {
    if *xi <= 1 || *k <= 1 {
        return Err(Error::Domain("admissible_a needs xi > 1 and k > 1".into()));
    }
    let (xf, kf) = (xi.to_f64(), k.to_f64());
    let t5 = crossing(kf)?;
    let (psi, n_stop) = psi_max(xf, kf)?;
    let a = t5.max(psi).exp();
    if !a.is_finite() {
        return Err(Error::ConvergenceFailure(format!("a = exp({}) overflows", t5.max(psi))));
    }
    let mut cand = round_up_6(a);
    for _ in 0..100 {
        if certify_a(&cand, xi, k, n_stop, 256) {
            return Ok(cand);
        }
        let step = one_unit_6(&cand);
        cand += step;
    }
    Err(Error::ConvergenceFailure("could not certify a candidate for a".into()))
}

fn f64_holds(n: u64, k: f64, s: f64, c: f64) -> bool {
    let m = (n + 1) as f64;
    let lhs = c * (s * m * m.ln() + std::f64::consts::LN_2).powf(k) + 1.0;
    lhs <= m.powf(s)
}

/// Both sides of the factorial step inequality at `n`:
/// `c (s (n+1) ln(n+1) + ln 2)^k + 1` and `(n+1)^s`.
fn sides(n: u64, k: &Rational, s: &Rational, c: &Rational, prec: u32) -> (BigInterval, BigInterval) {
    let m = int(n + 1, prec);
    let inner = rat(s, prec)
        .mul(&m)
        .mul(&m.ln().expect("positive"))
        .add(&BigInterval::ln2(prec));
    let lhs = rat(c, prec)
        .mul(&inner.pow_real(&rat(k, prec)).expect("positive"))
        .add(&int(1, prec));
    let rhs = m.pow_real(&rat(s, prec)).expect("positive");
    (lhs, rhs)
}

/// Certified verdict of the factorial step inequality at `n`.
pub fn factorial_step_holds(n: u64, k: &Rational, eps: &Rational, c: &Rational) -> Option<bool> {
    let s = Rational::from(k + eps);
    for prec in CERT_PRECISIONS {
        let (lhs, rhs) = sides(n, k, &s, c, prec);
        if *lhs.hi() <= *rhs.lo() {
            return Some(true);
        }
        if *lhs.lo() > *rhs.hi() {
            return Some(false);
        }
    }
    None
}

fn tail_increasing(n: u64, k: &Rational, s: &Rational, c: &Rational) -> bool {
    for prec in CERT_PRECISIONS {
        let (l0, r0) = sides(n, k, s, c, prec);
        let (l1, r1) = sides(n + 1, k, s, c, prec);
        let (Ok(q0), Ok(q1)) = (r0.div(&l0), r1.div(&l1)) else {
            return false;
        };
        if *q0.hi() < *q1.lo() {
            return true;
        }
        if *q0.lo() >= *q1.hi() {
            return false;
        }
    }
    false
}

/// Smallest `n0 >= 2` such that the factorial step inequality holds for every
/// `n >= n0`.
///
/// Found by an f64 scan up to 10^6, then certified with intervals on
/// `n0..=n0+1000`, refuted at `n0 - 1`, and closed by checking that the
/// ratio of the two sides still increases at `n0 + 1000`.
pub fn factorial_n0(k: &Rational, eps: &Rational, c: &Rational) -> Result<u64> {
    if *k <= 1 || *eps <= 0 || *c <= 0 {
        return Err(Error::Domain("factorial_n0 needs k > 1, eps > 0, c > 0".into()));
    }
    let s = Rational::from(k + eps);
    let (kf, sf, cf) = (k.to_f64(), s.to_f64(), c.to_f64());
    let last_fail = (2..=N0_SCAN).rev().find(|&n| !f64_holds(n, kf, sf, cf));
    let mut n0 = last_fail.map_or(2, |n| n + 1);
    let not_found = || {
        Error::NotFound(format!(
            "no start index up to {N0_SCAN} for k = {}, eps = {}, c = {}",
            crate::interval::format_rational(k),
            crate::interval::format_rational(eps),
            crate::interval::format_rational(c)
        ))
    };
    loop {
        if n0 > N0_SCAN {
            return Err(not_found());
        }
        while n0 > 2 && factorial_step_holds(n0 - 1, k, eps, c) == Some(true) {
            n0 -= 1;
        }
        let span = n0..=n0 + N0_CERTIFY_SPAN;
        match span.into_iter().find(|&n| factorial_step_holds(n, k, eps, c) != Some(true)) {
            Some(bad) => n0 = bad + 1,
            None => break,
        }
    }
    if !tail_increasing(n0 + N0_CERTIFY_SPAN, k, &s, c) {
        return Err(Error::NotFound(format!(
            "side ratio not increasing at n = {}",
            n0 + N0_CERTIFY_SPAN
        )));
    }
    Ok(n0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interval::parse_rational;
    use rug::Float;

    fn q(s: &str) -> Rational {
        parse_rational(s).unwrap()
    }

    #[test]
    fn power_family_start() {
        let a = admissible_a(&q("2"), &q("2")).unwrap();
        assert_eq!(a, q("24128100"));
        // independent oracle: (ln x)^3 <= sqrt(x) sampled beyond a, and fails just below the crossing
        let af = a.to_f64();
        for i in 0..2000 {
            let x = af * (1.0 + i as f64 * 0.01);
            assert!(x.ln().powi(3) <= x.sqrt() * (1.0 + 1e-12), "x = {x}");
        }
        let x = 24_128_000.0f64;
        assert!(x.ln().powi(3) > x.sqrt());
        // (n+1)^3 <= a^(n/2) for n = 1..50 and a = 10 fails at n = 1
        for n in 1..=50u32 {
            assert!(((n + 1) as f64).powi(3) <= af.powf(n as f64 / 2.0));
        }
        assert!(8.0 > 10f64.powf(0.5));
    }

    #[test]
    fn power_family_start_other_parameters() {
        for (xi, k) in [("3/2", "3/2"), ("3", "2"), ("1.1", "1.5")] {
            let a = admissible_a(&q(xi), &q(k)).unwrap();
            let (xf, kf) = (q(xi).to_f64(), q(k).to_f64());
            let af = a.to_f64();
            for n in 1..2000u32 {
                let n = n as f64;
                assert!((n + 1.0).powf(kf + 1.0) <= af.powf(n.powf(xf - 1.0) / 2.0) * (1.0 + 1e-9));
            }
        }
        assert!(admissible_a(&q("1"), &q("2")).is_err());
        assert!(admissible_a(&q("2"), &q("1")).is_err());
    }

    fn oracle_n0(k: f64, s: f64, c: f64, upto: u64) -> Option<u64> {
        // high-precision oracle independent of the interval module
        let holds = |n: u64| {
            let p = 256;
            let m = Float::with_val(p, n + 1);
            let ln2 = Float::with_val(p, rug::float::Constant::Log2);
            let inner = Float::with_val(p, &m * Float::with_val(p, m.ln_ref())) * s + ln2;
            let lhs = inner.pow(k) * c + 1u32;
            let rhs = m.pow(s);
            lhs <= rhs
        };
        let last = (2..=upto).rev().find(|&n| !holds(n))?;
        Some(last + 1)
    }

    #[test]
    fn factorial_start_index() {
        let n0 = factorial_n0(&q("1.5"), &q("0.5"), &q("2")).unwrap();
        assert_eq!(Some(n0), oracle_n0(1.5, 2.0, 2.0, 100_000));
        assert_eq!(factorial_step_holds(n0, &q("1.5"), &q("0.5"), &q("2")), Some(true));
        assert_eq!(factorial_step_holds(n0 - 1, &q("1.5"), &q("0.5"), &q("2")), Some(false));
        let n_small = factorial_n0(&q("1.5"), &q("0.5"), &q("0.01")).unwrap();
        assert_eq!(Some(n_small).filter(|&n| n > 2), oracle_n0(1.5, 2.0, 0.01, 100_000));
    }

    #[test]
    fn factorial_start_is_monotone_in_c() {
        let mut prev = 0;
        for c in ["0.01", "0.02", "0.04", "0.08", "0.16", "0.32", "0.64", "1.28"] {
            let n0 = factorial_n0(&q("2"), &q("1"), &q(c)).unwrap();
            assert!(n0 >= prev, "c = {c}: {n0} < {prev}");
            prev = n0;
        }
    }

    #[test]
    fn factorial_start_not_found() {
        assert!(matches!(
            factorial_n0(&q("2"), &q("0.001"), &q("1000")),
            Err(Error::NotFound(_))
        ));
    }
}
