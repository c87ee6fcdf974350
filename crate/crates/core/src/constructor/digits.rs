//! Certified decimal prefixes of a bracket.

use rug::{Float, Integer, Rational};

/// Decimal digits shared by every real in a bracket.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Digits {
    /// `"1.3063"`, `"2."`, or empty when the integer part is undecided.
    pub text: String,
    pub integer_undecided: bool,
}

impl Digits {
    /// Number of significant digits in `text`.
    pub fn significant(&self) -> usize {
        self.text
            .chars()
            .filter(|c| c.is_ascii_digit())
            .skip_while(|&c| c == '0')
            .count()
    }
}

/// Longest decimal string `D` such that truncating any real in `[lo, hi]`
/// yields an expansion starting with `D`. At most `max_fraction` digits after
/// the point are produced.
pub fn extract_digits(lo: &Float, hi: &Float, max_fraction: usize) -> Digits {
    let undecided = Digits {
        text: String::new(),
        integer_undecided: true,
    };
    let (Some(lo), Some(hi)) = (lo.to_rational(), hi.to_rational()) else {
        return undecided;
    };
    if lo < 0 || hi < lo {
        return undecided;
    }
    let (mut flo, ilo) = lo.fract_floor(Integer::new());
    let (mut fhi, ihi) = hi.fract_floor(Integer::new());
    if ilo != ihi {
        return undecided;
    }
    let mut text = format!("{ilo}.");
    for _ in 0..max_fraction {
        flo *= 10u32;
        fhi *= 10u32;
        let dlo = Rational::from(flo.floor_ref());
        let dhi = Rational::from(fhi.floor_ref());
        if dlo != dhi {
            break;
        }
        text.push_str(&dlo.numer().to_string());
        flo -= &dlo;
        fhi -= &dhi;
    }
    Digits {
        text,
        integer_undecided: false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interval::parse_rational;

    fn f(s: &str) -> Float {
        Float::with_val(256, &parse_rational(s).unwrap())
    }

    #[test]
    fn shared_prefix() {
        let d = extract_digits(&f("1.30637"), &f("1.30638"), 50);
        assert_eq!(d.text, "1.3063");
        assert_eq!(d.significant(), 5);
        let d = extract_digits(&f("1.9"), &f("2.1"), 50);
        assert!(d.integer_undecided && d.text.is_empty());
        assert_eq!(extract_digits(&f("2.1"), &f("2.9"), 50).text, "2.");
        // 2^-10 and 2^-10 + 2^-20
        let d = extract_digits(&f("0.0009765625"), &f("0.00097751617431640625"), 50);
        assert_eq!(d.text, "0.00097");
        assert_eq!(d.significant(), 2);
    }

    #[test]
    fn points_stop_at_the_cap() {
        let x = f("0.5");
        assert_eq!(extract_digits(&x, &x, 4).text, "0.5000");
    }

    #[test]
    fn truncation_not_rounding() {
        assert_eq!(extract_digits(&f("1.25"), &f("1.3125"), 20).text, "1.");
        assert_eq!(extract_digits(&f("1.25"), &f("1.28125"), 20).text, "1.2");
    }
}
