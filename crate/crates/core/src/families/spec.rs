//! The family mini-language: `mills`, `wright`, `farhi-power:xi=2,k=2`,
//! `farhi-factorial:k=1.5,eps=0.5`, `geometric:A=5`, `lambda-power:lambda=1`.

use super::{admissible_a, factorial_n0, FamilyDescriptor, FamilyKind, GapFunction};
use crate::interval::{format_rational, parse_rational};
use crate::sequences::{fit_gap_constant, scan_gaps, SequenceSource};
use crate::{Error, Exec, Result};
use rug::{Integer, Rational};
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

/// Supplies empirically fitted parameters when a spec leaves them out.
pub trait FitContext {
    /// Gap constant `c` for exponent `k`, with a one-line provenance note.
    fn fit_constant(&self, k: &Rational) -> Result<(Rational, String)>;
    /// Largest gap between consecutive source terms, with a provenance note.
    fn max_gap(&self) -> Result<(Integer, String)>;
}

/// Refuses to fit; every parameter must be explicit.
#[derive(Clone, Copy, Debug, Default)]
pub struct NoFit;

impl FitContext for NoFit {
    fn fit_constant(&self, _k: &Rational) -> Result<(Rational, String)> {
        Err(Error::Parse("farhi-factorial needs an explicit c=".into()))
    }

    fn max_gap(&self) -> Result<(Integer, String)> {
        Err(Error::Parse("lambda-power needs an explicit M=".into()))
    }
}

/// Fits against a sequence source, scanning primes up to `limit`.
pub struct SourceFit<'a> {
    pub source: &'a SequenceSource,
    pub limit: u64,
    pub exec: Exec,
}

impl FitContext for SourceFit<'_> {
    fn fit_constant(&self, k: &Rational) -> Result<(Rational, String)> {
        if !matches!(self.source, SequenceSource::Primes(_)) {
            return Err(Error::Parse(
                "gap constants are only fitted over primes; pass c= explicitly".into(),
            ));
        }
        let c = fit_gap_constant(self.limit, k, self.exec)?;
        let c = Rational::from_f64(c).expect("finite fit");
        let note = format!(
            "c = {} fitted over consecutive primes up to {}; gaps beyond that range are assumed to obey the same bound",
            format_rational(&c),
            self.limit
        );
        Ok((c, note))
    }

    fn max_gap(&self) -> Result<(Integer, String)> {
        let (limit, what) = match self.source {
            SequenceSource::Primes(_) => (Integer::from(self.limit), "primes"),
            SequenceSource::File(f) => (
                f.terms().last().cloned().unwrap_or_default(),
                "listed terms",
            ),
        };
        let huge = GapFunction::constant(Rational::from(Integer::from(1) << 4096u32));
        let report = scan_gaps(self.source, &limit, &huge)?;
        let note = format!(
            "M = {} is the largest gap between consecutive {what} up to {limit}; later gaps are assumed not to exceed it",
            report.max_gap
        );
        Ok((report.max_gap, note))
    }
}

/// A parsed but unresolved family spec.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FamilySpec {
    pub name: String,
    pub params: BTreeMap<String, String>,
}

impl FromStr for FamilySpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (name, rest) = s.split_once(':').unwrap_or((s, ""));
        let mut params = BTreeMap::new();
        for kv in rest.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("expected key=value, got {kv:?}")))?;
            if params.insert(k.trim().to_string(), v.trim().to_string()).is_some() {
                return Err(Error::Parse(format!("duplicate key {:?}", k.trim())));
            }
        }
        let allowed: &[&str] = match name {
            "mills" => &["n0"],
            "wright" => &[],
            "farhi-power" => &["xi", "k", "a"],
            "farhi-factorial" => &["k", "eps", "c", "n0"],
            "geometric" => &["A"],
            "lambda-power" => &["lambda", "M"],
            other => return Err(Error::Parse(format!("unknown family {other:?}"))),
        };
        if let Some(bad) = params.keys().find(|k| !allowed.contains(&k.as_str())) {
            return Err(Error::Parse(format!(
                "unknown key {bad:?} for {name} (allowed: {})",
                allowed.join(", ")
            )));
        }
        Ok(FamilySpec {
            name: name.to_string(),
            params,
        })
    }
}

impl fmt::Display for FamilySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)?;
        for (i, (k, v)) in self.params.iter().enumerate() {
            write!(f, "{}{k}={v}", if i == 0 { ':' } else { ',' })?;
        }
        Ok(())
    }
}

impl FamilySpec {
    fn rational(&self, key: &str) -> Result<Option<Rational>> {
        self.params.get(key).map(|v| parse_rational(v)).transpose()
    }

    fn required(&self, key: &str) -> Result<Rational> {
        self.rational(key)?
            .ok_or_else(|| Error::Parse(format!("{} needs {key}=", self.name)))
    }

    fn index(&self, key: &str) -> Result<Option<u64>> {
        self.params
            .get(key)
            .map(|v| {
                v.parse::<u64>()
                    .map_err(|_| Error::Parse(format!("{key} must be a nonnegative integer, got {v:?}")))
            })
            .transpose()
    }

    /// Builds the descriptor, filling omitted parameters from `ctx` and the
    /// admissibility solvers.
    pub fn resolve(&self, ctx: &dyn FitContext) -> Result<FamilyDescriptor> {
        match self.name.as_str() {
            "mills" => Ok(FamilyDescriptor::mills().with_n0(self.index("n0")?.unwrap_or(1))),
            "wright" => Ok(FamilyDescriptor::wright()),
            "farhi-power" => {
                let xi = self.required("xi")?;
                let k = self.required("k")?;
                let min_a = admissible_a(&xi, &k)?;
                let a = match self.rational("a")? {
                    Some(a) if a < min_a => {
                        return Err(Error::Parse(format!(
                            "a = {} is below the admissible minimum {}",
                            format_rational(&a),
                            format_rational(&min_a)
                        )))
                    }
                    Some(a) => a,
                    None => min_a,
                };
                FamilyDescriptor::farhi_power(xi, k, a)
            }
            "farhi-factorial" => {
                let k = self.required("k")?;
                let eps = self.required("eps")?;
                let mut notes = Vec::new();
                let c = match self.rational("c")? {
                    Some(c) => c,
                    None => {
                        let (c, note) = ctx.fit_constant(&k)?;
                        notes.push(note);
                        c
                    }
                };
                let n0 = match self.index("n0")? {
                    Some(n0) => {
                        match factorial_n0(&k, &eps, &c) {
                            Ok(min) if n0 < min => notes.push(format!(
                                "n0 = {n0} is below {min}, the smallest start index certified for every later step"
                            )),
                            Ok(_) => {}
                            Err(_) => notes.push(format!(
                                "n0 = {n0} was chosen without a certified start index"
                            )),
                        }
                        n0
                    }
                    None => factorial_n0(&k, &eps, &c)?,
                };
                let mut fam = FamilyDescriptor::farhi_factorial(k, eps, c, n0)?;
                fam.assumptions.extend(notes);
                Ok(fam)
            }
            "geometric" => {
                let a = self.required("A")?;
                let mut fam = FamilyDescriptor::geometric(a.clone())?;
                fam.assumptions.push(format!(
                    "consecutive source terms are assumed to differ by at most {}",
                    format_rational(&Rational::from(&a - 1u32))
                ));
                Ok(fam)
            }
            "lambda-power" => {
                let lambda = self.required("lambda")?;
                let (m, note) = match self.rational("M")? {
                    Some(m) if *m.denom() == 1 => (m.numer().clone(), None),
                    Some(_) => return Err(Error::Parse("M must be an integer".into())),
                    None => {
                        let (m, note) = ctx.max_gap()?;
                        (m, Some(note))
                    }
                };
                let mut fam = FamilyDescriptor::lambda_power(lambda, m)?;
                fam.assumptions.extend(note);
                Ok(fam)
            }
            other => Err(Error::Parse(format!("unknown family {other:?}"))),
        }
    }
}

impl FamilyDescriptor {
    /// Parses a spec whose parameters are all explicit.
    pub fn parse_resolved(spec: &str) -> Result<Self> {
        spec.parse::<FamilySpec>()?.resolve(&NoFit)
    }

    /// Fully resolved spec; parsing it back with [`NoFit`] rebuilds the family
    /// (up to assumptions and gap overrides).
    pub fn to_spec(&self) -> String {
        let mut spec = FamilySpec {
            name: self.name().to_string(),
            params: BTreeMap::new(),
        };
        let mut put = |k: &str, v: String| {
            spec.params.insert(k.to_string(), v);
        };
        match &self.kind {
            FamilyKind::Mills => {
                if self.n0 != 1 {
                    put("n0", self.n0.to_string());
                }
            }
            FamilyKind::Wright => {}
            FamilyKind::FarhiPower { xi, k } => {
                put("xi", format_rational(xi));
                put("k", format_rational(k));
                put("a", format_rational(&self.domain_lo));
            }
            FamilyKind::FarhiFactorial { k, eps, c } => {
                put("k", format_rational(k));
                put("eps", format_rational(eps));
                put("c", format_rational(c));
                put("n0", self.n0.to_string());
            }
            FamilyKind::GeometricA { a } => put("A", format_rational(a)),
            FamilyKind::LambdaPower { lambda, m } => {
                put("lambda", format_rational(lambda));
                put("M", m.to_string());
            }
        }
        spec.to_string()
    }

    /// Flat parameter map for reports.
    pub fn parameters(&self) -> BTreeMap<String, String> {
        let mut out = BTreeMap::new();
        let spec: FamilySpec = self.to_spec().parse().expect("canonical spec parses");
        out.extend(spec.params);
        out.insert("n0".into(), self.n0.to_string());
        out.insert("domain_lo".into(), format_rational(&self.domain_lo));
        out.insert(
            "domain_hi".into(),
            self.domain_hi
                .as_ref()
                .map(format_rational)
                .unwrap_or_else(|| "inf".into()),
        );
        out.insert("g".into(), self.gap.to_spec());
        out
    }
}
