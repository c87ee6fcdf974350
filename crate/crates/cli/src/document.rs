//! The JSON result document and its integrity hash.

use anyhow::{anyhow, bail, Context, Result};
use primeconst::constructor::{ChainLink, ConstructionResult, Digits};
use primeconst::families::{FamilyDescriptor, FamilySpec, GapFunction, NoFit};
use primeconst::interval::{exact_decimal, parse_rational};
use primeconst::sequences::Membership;
use primeconst::BigInterval;
use rug::{Float, Integer};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;

pub const SCHEMA_VERSION: u64 = 1;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainEntry {
    pub n: u64,
    /// Source ordinal, when known.
    pub k_n: Option<String>,
    pub v_n: String,
    pub certainty: String,
    pub precision_bits: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BracketDoc {
    pub lo: String,
    pub hi: String,
    pub precision_bits: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InnerDoc {
    pub lo: String,
    pub hi: String,
}

/// Everything needed to re-verify a construction. Big numbers are decimal
/// strings; bracket endpoints are the exact values of binary floats.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResultDocument {
    pub schema_version: u64,
    pub family_spec: String,
    pub gap: String,
    pub parameters: BTreeMap<String, String>,
    pub source: String,
    pub seed_policy: String,
    pub mr_rounds: u32,
    pub chain: Vec<ChainEntry>,
    pub bracket: BracketDoc,
    pub inner: InnerDoc,
    pub digits: String,
    pub assumptions: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub integrity: Option<String>,
}

fn decimal(x: &Float) -> String {
    exact_decimal(x).expect("finite bracket endpoint")
}

/// Parses an exact decimal back into a float, widening precision until the
/// value is represented exactly.
fn float_of(text: &str, prec: u32) -> Result<Float> {
    let q = parse_rational(text)?;
    let mut p = prec.max(2);
    loop {
        let f = Float::with_val(p, &q);
        if f == q {
            return Ok(f);
        }
        if p >= 1 << 24 {
            bail!("{text} is not a binary float value");
        }
        p *= 2;
    }
}

impl ResultDocument {
    pub fn from_result(r: &ConstructionResult, seed_policy: &str, mr_rounds: u32, timestamp: Option<u64>) -> Self {
        let mut doc = ResultDocument {
            schema_version: SCHEMA_VERSION,
            family_spec: r.family.to_spec(),
            gap: r.family.gap.to_spec(),
            parameters: r.family.parameters(),
            source: r.source.clone(),
            seed_policy: seed_policy.to_string(),
            mr_rounds,
            chain: r
                .chain
                .iter()
                .map(|l| ChainEntry {
                    n: l.n,
                    k_n: l.k.map(|k| k.to_string()),
                    v_n: l.v.to_string(),
                    certainty: l.membership.to_string(),
                    precision_bits: l.precision_bits,
                })
                .collect(),
            bracket: BracketDoc {
                lo: decimal(r.bracket.lo()),
                hi: decimal(r.bracket.hi()),
                precision_bits: r.precision,
            },
            inner: InnerDoc {
                lo: decimal(r.inner.lo()),
                hi: decimal(r.inner.hi()),
            },
            digits: r.digits.text.clone(),
            assumptions: r.assumptions.clone(),
            timestamp,
            integrity: None,
        };
        doc.integrity = Some(doc.digest());
        doc
    }

    /// Compact JSON with sorted keys, without `integrity` and `timestamp`.
    pub fn canonical(&self) -> String {
        let mut bare = self.clone();
        bare.integrity = None;
        bare.timestamp = None;
        let value = serde_json::to_value(&bare).expect("document serializes");
        serde_json::to_string(&value).expect("value serializes")
    }

    pub fn digest(&self) -> String {
        format!("sha256:{}", hex::encode(Sha256::digest(self.canonical().as_bytes())))
    }

    pub fn integrity_ok(&self) -> bool {
        self.integrity.as_deref() == Some(self.digest().as_str())
    }

    /// Pretty JSON with sorted keys.
    pub fn render(&self) -> String {
        let value = serde_json::to_value(self).expect("document serializes");
        serde_json::to_string_pretty(&value).expect("value serializes")
    }

    pub fn parse(text: &str) -> Result<Self> {
        let doc: ResultDocument = serde_json::from_str(text).context("malformed result document")?;
        if doc.schema_version != SCHEMA_VERSION {
            bail!("unsupported schema_version {}", doc.schema_version);
        }
        Ok(doc)
    }

    pub fn family(&self) -> Result<FamilyDescriptor> {
        let spec: FamilySpec = self.family_spec.parse()?;
        let gap: GapFunction = self.gap.parse()?;
        let mut fam = spec.resolve(&NoFit)?.with_gap(gap);
        fam.assumptions = self.assumptions.clone();
        Ok(fam)
    }

    /// Rebuilds the construction claim for the verifier.
    pub fn to_result(&self) -> Result<ConstructionResult> {
        let family = self.family()?;
        let chain = self
            .chain
            .iter()
            .map(|e| {
                Ok(ChainLink {
                    n: e.n,
                    k: e.k_n.as_deref().map(str::parse).transpose().context("k_n")?,
                    v: e.v_n.parse::<Integer>().map_err(|_| anyhow!("bad v_n {:?}", e.v_n))?,
                    membership: e.certainty.parse::<Membership>()?,
                    precision_bits: e.precision_bits,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        if chain.is_empty() {
            bail!("empty chain");
        }
        let prec = self.bracket.precision_bits;
        let bracket = BigInterval::new(float_of(&self.bracket.lo, prec)?, float_of(&self.bracket.hi, prec)?);
        let inner = BigInterval::new(float_of(&self.inner.lo, prec)?, float_of(&self.inner.hi, prec)?);
        Ok(ConstructionResult {
            family,
            source: self.source.clone(),
            chain,
            bracket,
            inner,
            precision: prec,
            digits: Digits {
                text: self.digits.clone(),
                integer_undecided: self.digits.is_empty(),
            },
            assumptions: self.assumptions.clone(),
            diagnostics: Vec::new(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use primeconst::constructor::{run, ConstructorConfig, SeedPolicy, Silent};
    use primeconst::sequences::SequenceSource;

    fn mills_doc() -> ResultDocument {
        let r = run(
            &FamilyDescriptor::mills(),
            &SequenceSource::primes(),
            3,
            6,
            SeedPolicy::SmallestAdmissible,
            &ConstructorConfig::default(),
            &[],
            &mut Silent,
        )
        .unwrap();
        ResultDocument::from_result(&r, "smallest-admissible", 16, Some(1))
    }

    #[test]
    fn canonical_form_is_sorted_and_stable() {
        let doc = mills_doc();
        let c = doc.canonical();
        assert!(c.starts_with("{\"assumptions\":"));
        assert!(!c.contains("integrity") && !c.contains("timestamp"));
        let mut later = doc.clone();
        later.timestamp = Some(99);
        assert_eq!(later.digest(), doc.digest());
        assert!(doc.integrity_ok());
    }

    #[test]
    fn round_trips_through_text() {
        let doc = mills_doc();
        let back = ResultDocument::parse(&doc.render()).unwrap();
        assert_eq!(back, doc);
        let r = back.to_result().unwrap();
        assert_eq!(r.chain.len(), 3);
        assert_eq!(decimal(r.inner.hi()), doc.inner.hi);
    }

    #[test]
    fn tampering_breaks_integrity() {
        let mut doc = mills_doc();
        doc.digits.push('7');
        assert!(!doc.integrity_ok());
        let mut doc = mills_doc();
        doc.gap = "pow:1".into();
        assert!(!doc.integrity_ok());
    }

    #[test]
    fn rejects_unknown_fields_and_versions() {
        let doc = mills_doc();
        let text = doc.render().replacen('{', "{\"extra\": 1,", 1);
        assert!(ResultDocument::parse(&text).is_err());
        let mut v2 = doc;
        v2.schema_version = 2;
        assert!(ResultDocument::parse(&v2.render()).is_err());
    }
}
