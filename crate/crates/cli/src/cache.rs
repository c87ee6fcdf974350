//! Append-only JSON Lines checkpoint of certified chain terms.

use anyhow::{bail, Context, Result};
use primeconst::constructor::{ChainLink, Observer};
use primeconst::sequences::Membership;
use rug::Integer;
use serde::{Deserialize, Serialize};
use std::fs::{File, OpenOptions};
use std::io::{Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CacheEntry {
    pub family_spec: String,
    pub gap: String,
    pub source: String,
    pub seed_policy: String,
    pub n: u64,
    pub k_n: Option<String>,
    pub v_n: String,
    pub certainty: String,
    pub precision: u32,
    pub timestamp: u64,
}

/// Identifies the construction a cache line belongs to.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CacheKey {
    pub family_spec: String,
    pub gap: String,
    pub source: String,
    pub seed_policy: String,
}

impl CacheEntry {
    fn matches(&self, key: &CacheKey) -> bool {
        self.family_spec == key.family_spec
            && self.gap == key.gap
            && self.source == key.source
            && self.seed_policy == key.seed_policy
    }

    fn link(&self) -> Result<ChainLink> {
        Ok(ChainLink {
            n: self.n,
            k: self.k_n.as_deref().map(str::parse).transpose()?,
            v: self.v_n.parse::<Integer>().context("v_n")?,
            membership: self.certainty.parse::<Membership>()?,
            precision_bits: self.precision,
        })
    }
}

pub fn unix_now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

/// An exclusively locked cache file.
pub struct Cache {
    file: File,
    path: PathBuf,
    key: CacheKey,
    /// Lines written by this session.
    pub appended: usize,
}

impl Cache {
    pub fn open(path: &Path, key: CacheKey) -> Result<Self> {
        let file = OpenOptions::new()
            .read(true)
            .append(true)
            .create(true)
            .open(path)
            .with_context(|| format!("opening cache {}", path.display()))?;
        match file.try_lock() {
            Ok(()) => {}
            Err(std::fs::TryLockError::WouldBlock) => {
                bail!("cache {} is locked by another process", path.display())
            }
            Err(std::fs::TryLockError::Error(e)) => return Err(e.into()),
        }
        Ok(Cache {
            file,
            path: path.to_path_buf(),
            key,
            appended: 0,
        })
    }

    /// The recorded chain for this key, seed first. A torn final line from an
    /// interrupted write is cut off.
    pub fn load(&mut self) -> Result<Vec<ChainLink>> {
        let mut text = String::new();
        self.file.seek(SeekFrom::Start(0))?;
        self.file.read_to_string(&mut text)?;
        if !text.is_empty() && !text.ends_with('\n') {
            let keep = text.rfind('\n').map_or(0, |i| i + 1);
            text.truncate(keep);
            self.file.set_len(keep as u64)?;
            self.file.sync_data()?;
        }
        let mut chain: Vec<ChainLink> = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let entry: CacheEntry = serde_json::from_str(line)
                .with_context(|| format!("{} line {}", self.path.display(), i + 1))?;
            if !entry.matches(&self.key) {
                continue;
            }
            let link = entry.link()?;
            match chain.last() {
                Some(last) if link.n <= last.n => {
                    // A restarted construction: keep the newest run.
                    chain.retain(|l| l.n < link.n);
                    chain.push(link);
                }
                Some(last) if link.n != last.n + 1 => {
                    bail!("{} line {}: gap in recorded indices", self.path.display(), i + 1)
                }
                _ => chain.push(link),
            }
        }
        Ok(chain)
    }

    pub fn append(&mut self, link: &ChainLink) -> Result<()> {
        let entry = CacheEntry {
            family_spec: self.key.family_spec.clone(),
            gap: self.key.gap.clone(),
            source: self.key.source.clone(),
            seed_policy: self.key.seed_policy.clone(),
            n: link.n,
            k_n: link.k.map(|k| k.to_string()),
            v_n: link.v.to_string(),
            certainty: link.membership.to_string(),
            precision: link.precision_bits,
            timestamp: unix_now(),
        };
        let mut line = serde_json::to_string(&entry)?;
        line.push('\n');
        self.file.write_all(line.as_bytes())?;
        self.file.sync_data()?;
        self.appended += 1;
        Ok(())
    }
}

/// Records fresh links in the cache and logs progress to stderr.
pub struct Recorder<'a> {
    pub cache: Option<&'a mut Cache>,
    pub verbose: bool,
}

impl Observer for Recorder<'_> {
    fn on_link(&mut self, link: &ChainLink, replayed: bool) -> primeconst::Result<()> {
        if self.verbose {
            eprintln!(
                "n = {}: v = {} ({}, {} bits){}",
                link.n,
                link.v,
                link.membership,
                link.precision_bits,
                if replayed { ", from cache" } else { "" }
            );
        }
        if replayed {
            return Ok(());
        }
        if let Some(cache) = self.cache.as_deref_mut() {
            cache
                .append(link)
                .map_err(|e| primeconst::Error::Io(std::io::Error::other(e.to_string())))?;
        }
        Ok(())
    }
}
