use crate::Error;
use rug::ops::Pow;
use rug::{Float, Integer, Rational};

/// Exact base-10 rendering of a finite float.
///
/// A binary float `m · 2^-e` has exactly `e` fractional decimal digits, so
/// the rendering is lossless and parses back to the identical value.
pub fn exact_decimal(x: &Float) -> Option<String> {
    let q = x.to_rational()?;
    Some(rational_to_exact_decimal(&q).expect("float denominators are powers of two"))
}

/// Exact decimal rendering of a rational whose denominator is `2^a · 5^b`.
pub(crate) fn rational_to_exact_decimal(q: &Rational) -> Option<String> {
    let (num, den) = (q.numer(), q.denom());
    let twos = den.find_one(0).unwrap_or(0);
    let mut rest = Integer::from(den >> twos);
    let mut fives = 0u32;
    while rest.is_divisible_u(5) {
        rest /= 5u32;
        fives += 1;
    }
    if rest != 1 {
        return None;
    }
    let scale = twos.max(fives);
    // num / (2^twos 5^fives) = num * 2^(scale-twos) * 5^(scale-fives) / 10^scale
    let scaled = Integer::from(num.abs_ref())
        * (Integer::from(1) << (scale - twos))
        * Integer::from(5).pow(scale - fives);
    let mut digits = scaled.to_string();
    let scale = scale as usize;
    if digits.len() <= scale {
        digits = "0".repeat(scale + 1 - digits.len()) + &digits;
    }
    let (int_part, frac_part) = digits.split_at(digits.len() - scale);
    let frac_part = frac_part.trim_end_matches('0');
    let sign = if *num < 0 { "-" } else { "" };
    Some(if frac_part.is_empty() {
        format!("{sign}{int_part}")
    } else {
        format!("{sign}{int_part}.{frac_part}")
    })
}

/// Canonical text for a rational: an exact decimal when one exists, else `p/q`.
pub fn format_rational(q: &Rational) -> String {
    rational_to_exact_decimal(q).unwrap_or_else(|| format!("{}/{}", q.numer(), q.denom()))
}

/// Parses `"12"`, `"-1.25"`, `"2/3"`, `"1e9"`, `"2.5e-3"` into an exact rational.
pub fn parse_rational(text: &str) -> Result<Rational, Error> {
    let s = text.trim();
    let bad = || Error::Parse(format!("not a number: {text:?}"));
    if s.is_empty() {
        return Err(bad());
    }
    if let Some((n, d)) = s.split_once('/') {
        let n = parse_rational(n)?;
        let d = parse_rational(d)?;
        if d == 0 {
            return Err(Error::Parse(format!("zero denominator in {text:?}")));
        }
        return Ok(n / d);
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(pos) => {
            let e: i32 = s[pos + 1..].parse().map_err(|_| bad())?;
            (&s[..pos], e)
        }
        None => (s, 0),
    };
    let (neg, body) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
        return Err(bad());
    }
    let all_digits = format!("{int_part}{frac_part}");
    let mut value = Rational::from(all_digits.parse::<Integer>().map_err(|_| bad())?);
    let shift = exponent - frac_part.len() as i32;
    let ten_pow = Integer::from(10).pow(shift.unsigned_abs());
    if shift >= 0 {
        value *= ten_pow;
    } else {
        value /= ten_pow;
    }
    if neg {
        value = -value;
    }
    Ok(value)
}
