//! Nondecreasing gap bounds `g`.

use crate::interval::{format_rational, parse_rational, BigInterval};
use crate::{Error, Result};
use rug::{Float, Integer, Rational};
use std::fmt;
use std::str::FromStr;

/// The bound `g` in `u_{k+1} - u_k <= g(u_k) - 1`.
///
/// Each variant is nondecreasing on the whole real line; below its
/// positivity threshold it takes its floor value (0 for powers, `offset` for
/// log powers).
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GapFunction {
    /// `x^e` for `x > 0`, else 0.
    Power { exponent: Rational },
    /// `(ln 2) x`.
    LinearLog2,
    /// `c (ln x)^k + offset` for `x > 1`, else `offset`.
    LogPower {
        c: Rational,
        k: Rational,
        offset: Rational,
    },
    Constant { value: Rational },
}

impl GapFunction {
    /// `x^(2/3)`.
    pub fn power_two_thirds() -> Self {
        GapFunction::Power {
            exponent: Rational::from((2, 3)),
        }
    }

    pub fn power(exponent: Rational) -> Result<Self> {
        if exponent < 0 {
            return Err(Error::Parse(format!(
                "power exponent must be nonnegative, got {}",
                format_rational(&exponent)
            )));
        }
        Ok(GapFunction::Power { exponent })
    }

    pub fn log_power(c: Rational, k: Rational, offset: Rational) -> Result<Self> {
        if c < 0 || k <= 0 {
            return Err(Error::Parse("log power needs c >= 0 and k > 0".into()));
        }
        Ok(GapFunction::LogPower { c, k, offset })
    }

    pub fn constant(value: Rational) -> Self {
        GapFunction::Constant { value }
    }

    /// Enclosure of `g(x)` for a single point.
    pub fn eval_point(&self, x: &Float, prec: u32) -> BigInterval {
        let px = BigInterval::point(Float::with_val(prec.max(x.prec()), x));
        match self {
            GapFunction::Power { exponent } => {
                if *x <= 0 {
                    return BigInterval::from_u64(0, prec);
                }
                let num = exponent.numer();
                let raised = px.pow_integer(num);
                match exponent.denom().to_u32() {
                    Some(1) => raised,
                    Some(q) => raised.root(q).expect("positive base"),
                    None => {
                        let e = BigInterval::from_rational(exponent, prec);
                        px.pow_real(&e).expect("positive base")
                    }
                }
            }
            GapFunction::LinearLog2 => BigInterval::ln2(prec).mul(&px),
            GapFunction::LogPower { c, k, offset } => {
                let off = BigInterval::from_rational(offset, prec);
                if *x <= 1 {
                    return off;
                }
                let l = px.ln().expect("x > 1");
                let lk = match k.denom().to_u32() {
                    Some(1) => l.pow_integer(k.numer()),
                    _ => l
                        .pow_real(&BigInterval::from_rational(k, prec))
                        .expect("ln x > 0"),
                };
                BigInterval::from_rational(c, prec).mul(&lk).add(&off)
            }
            GapFunction::Constant { value } => BigInterval::from_rational(value, prec),
        }
    }

    /// Enclosure of `g` over an interval, using monotonicity.
    pub fn eval(&self, x: &BigInterval, prec: u32) -> BigInterval {
        if let GapFunction::Constant { value } = self {
            return BigInterval::from_rational(value, prec);
        }
        let lo = self.eval_point(x.lo(), prec);
        let hi = if x.is_point() {
            lo.clone()
        } else {
            self.eval_point(x.hi(), prec)
        };
        BigInterval::new(lo.lo().clone(), hi.hi().clone())
    }

    pub fn eval_integer(&self, n: &Integer, prec: u32) -> BigInterval {
        self.eval(&BigInterval::from_integer(n, prec), prec)
    }

    /// Canonical mini-language form, e.g. `pow:2/3` or `logpow:c=2,k=1.5,offset=1`.
    pub fn to_spec(&self) -> String {
        match self {
            GapFunction::Power { exponent } => format!("pow:{}", format_rational(exponent)),
            GapFunction::LinearLog2 => "linlog2".to_string(),
            GapFunction::LogPower { c, k, offset } => format!(
                "logpow:c={},k={},offset={}",
                format_rational(c),
                format_rational(k),
                format_rational(offset)
            ),
            GapFunction::Constant { value } => format!("const:{}", format_rational(value)),
        }
    }
}

impl fmt::Display for GapFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_spec())
    }
}

impl FromStr for GapFunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (head, rest) = s.split_once(':').unwrap_or((s, ""));
        match head {
            "pow" => GapFunction::power(parse_rational(rest)?),
            "linlog2" if rest.is_empty() => Ok(GapFunction::LinearLog2),
            "const" => Ok(GapFunction::constant(parse_rational(rest)?)),
            "logpow" => {
                let (mut c, mut k, mut offset) = (None, None, Rational::new());
                for kv in rest.split(',').filter(|p| !p.is_empty()) {
                    let (key, val) = kv
                        .split_once('=')
                        .ok_or_else(|| Error::Parse(format!("expected key=value, got {kv:?}")))?;
                    let val = parse_rational(val)?;
                    match key.trim() {
                        "c" => c = Some(val),
                        "k" => k = Some(val),
                        "offset" => offset = val,
                        other => return Err(Error::Parse(format!("unknown logpow key {other:?}"))),
                    }
                }
                let c = c.ok_or_else(|| Error::Parse("logpow needs c=".into()))?;
                let k = k.ok_or_else(|| Error::Parse("logpow needs k=".into()))?;
                GapFunction::log_power(c, k, offset)
            }
            _ => Err(Error::Parse(format!(
                "unknown gap function {s:?} (expected pow:E, linlog2, logpow:c=..,k=.., const:V)"
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn at(g: &GapFunction, x: f64) -> BigInterval {
        g.eval_point(&Float::with_val(64, x), 128)
    }

    #[test]
    fn values() {
        let g = GapFunction::power_two_thirds();
        assert!(at(&g, 8.0).contains_float(&Float::with_val(8, 4)));
        assert!((at(&g, 2.0).lo().to_f64() - 1.5874010519681994).abs() < 1e-15);
        assert!(at(&g, -3.0).is_point());
        let w = GapFunction::LinearLog2;
        assert!((at(&w, 2.0).hi().to_f64() - 2.0 * std::f64::consts::LN_2).abs() < 1e-15);
        let lp: GapFunction = "logpow:c=2,k=3/2,offset=1".parse().unwrap();
        let expect = 2.0 * 10f64.ln().powf(1.5) + 1.0;
        let v = at(&lp, 10.0);
        assert!((v.lo().to_f64() - expect).abs() < 1e-12);
        assert_eq!(at(&lp, 0.5).lo().to_f64(), 1.0);
    }

    #[test]
    fn text_round_trip() {
        for s in ["pow:2/3", "pow:1", "linlog2", "logpow:c=1.5,k=2,offset=1", "const:1000000000"] {
            let g: GapFunction = s.parse().unwrap();
            assert_eq!(g.to_spec(), s);
        }
        assert_eq!("const:1e9".parse::<GapFunction>().unwrap().to_spec(), "const:1000000000");
        assert!("logpow:c=1".parse::<GapFunction>().is_err());
        assert!("logpow:c=1,k=2,z=3".parse::<GapFunction>().is_err());
        assert!("pow:-1".parse::<GapFunction>().is_err());
        assert!("cubic".parse::<GapFunction>().is_err());
    }

    #[test]
    fn interval_eval_is_monotone_hull() {
        let g = GapFunction::power_two_thirds();
        let x = BigInterval::new(Float::with_val(64, 1), Float::with_val(64, 27));
        let v = g.eval(&x, 64);
        assert!(v.contains_float(&Float::with_val(8, 1)));
        assert!(v.contains_float(&Float::with_val(8, 9)));
        let inf = BigInterval::new(Float::with_val(64, 1), Float::with_val(64, f64::INFINITY));
        assert!(g.eval(&inf, 64).hi().is_infinite());
    }
}
