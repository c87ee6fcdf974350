use crate::{Error, Result};
use rug::Integer;
use std::path::Path;

/// A finite, strictly increasing list of integers read from text.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FileSequence {
    terms: Vec<Integer>,
    origin: String,
}

impl FileSequence {
    /// Validates that `terms` is strictly increasing.
    pub fn from_terms(terms: Vec<Integer>, origin: impl Into<String>) -> Result<Self> {
        for (i, pair) in terms.windows(2).enumerate() {
            if pair[1] <= pair[0] {
                return Err(Error::SequenceFile {
                    line: i + 2,
                    message: format!("{} does not exceed previous term {}", pair[1], pair[0]),
                });
            }
        }
        Ok(FileSequence {
            terms,
            origin: origin.into(),
        })
    }

    /// One base-10 integer per line; blank lines and `#` comments are skipped.
    /// Errors name the 1-based line number.
    pub fn parse(text: &str, origin: impl Into<String>) -> Result<Self> {
        let mut terms: Vec<Integer> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let value: Integer = body.parse().map_err(|_| Error::SequenceFile {
                line,
                message: format!("not an integer: {body:?}"),
            })?;
            if let Some(prev) = terms.last() {
                if value <= *prev {
                    return Err(Error::SequenceFile {
                        line,
                        message: format!("{value} does not exceed previous term {prev}"),
                    });
                }
            }
            terms.push(value);
        }
        Ok(FileSequence {
            terms,
            origin: origin.into(),
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text, path.display().to_string())
    }

    pub fn terms(&self) -> &[Integer] {
        &self.terms
    }

    pub fn origin(&self) -> &str {
        &self.origin
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Position of the first term `>= c`.
    pub fn lower_bound(&self, c: &Integer) -> usize {
        self.terms.partition_point(|t| t < c)
    }

    pub fn position(&self, v: &Integer) -> Option<usize> {
        self.terms.binary_search(v).ok()
    }
}
