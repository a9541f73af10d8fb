use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};

use dashmap::DashMap;

use super::key::CorrelatorKey;
use crate::error::{Error, Result};
use crate::exact::{is_canonical, parse_rational, Rational};

pub const CACHE_HEADER: &str = "kappa-psi-cache v1";

/// Concurrent memo table. Values are write-once: a second insert of a
/// different value is an internal consistency error.
#[derive(Debug, Default)]
pub struct Cache {
    map: DashMap<CorrelatorKey, Rational>,
    hits: AtomicU64,
    misses: AtomicU64,
}

impl Cache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, key: &CorrelatorKey) -> Option<Rational> {
        // clone out so no shard lock outlives the lookup
        let found = self.map.get(key).map(|v| v.value().clone());
        match found {
            Some(_) => self.hits.fetch_add(1, Ordering::Relaxed),
            None => self.misses.fetch_add(1, Ordering::Relaxed),
        };
        found
    }

    pub fn insert(&self, key: CorrelatorKey, value: Rational) -> Result<()> {
        use dashmap::mapref::entry::Entry;
        match self.map.entry(key) {
            Entry::Occupied(e) => {
                if e.get() != &value {
                    return Err(Error::Consistency(format!(
                        "{} cached as {} but recomputed as {}",
                        e.key(),
                        e.get(),
                        value
                    )));
                }
            }
            Entry::Vacant(e) => {
                e.insert(value);
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn hits(&self) -> u64 {
        self.hits.load(Ordering::Relaxed)
    }

    pub fn misses(&self) -> u64 {
        self.misses.load(Ordering::Relaxed)
    }

    /// Snapshot sorted by key.
    pub fn entries(&self) -> Vec<(CorrelatorKey, Rational)> {
        let mut v: Vec<_> = self
            .map
            .iter()
            .map(|e| (e.key().clone(), e.value().clone()))
            .collect();
        v.sort_by(|a, b| a.0.cmp(&b.0));
        v
    }

    pub fn merge_from(&self, other: &Cache) -> Result<()> {
        for (k, v) in other.entries() {
            self.insert(k, v)?;
        }
        Ok(())
    }

    pub fn write_to(&self, mut w: impl Write) -> Result<()> {
        writeln!(w, "{CACHE_HEADER}")?;
        for (k, v) in self.entries() {
            writeln!(w, "{};v={}", k.record(), v)?;
        }
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut buf = Vec::new();
        self.write_to(&mut buf)?;
        let tmp = path.with_extension("tmp");
        fs::write(&tmp, buf)?;
        fs::rename(&tmp, path)?;
        Ok(())
    }

    /// Reads a cache file, validating the header and every record against the
    /// dimension constraint.
    pub fn read_from(r: impl BufRead) -> Result<Cache> {
        let mut lines = r.lines();
        match lines.next() {
            Some(Ok(h)) if h.trim_end() == CACHE_HEADER => {}
            Some(Err(e)) => return Err(e.into()),
            _ => return Err(Error::CacheCorrupt("missing or unknown header".into())),
        }
        let cache = Cache::new();
        for (lineno, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let corrupt = |why: &str| Error::CacheCorrupt(format!("line {}: {why}", lineno + 2));
            let (key, v) = CorrelatorKey::parse_record(&line).map_err(|e| corrupt(&e.to_string()))?;
            if !key.is_admissible() {
                return Err(corrupt(&format!("{key} fails the dimension gate")));
            }
            let value = parse_rational(v).map_err(|e| corrupt(&e.to_string()))?;
            if !is_canonical(&value) || value.to_string() != v.trim() {
                return Err(corrupt("value not in canonical form"));
            }
            cache
                .insert(key, value)
                .map_err(|e| corrupt(&e.to_string()))?;
        }
        Ok(cache)
    }

    pub fn load(path: &Path) -> Result<Cache> {
        let f = fs::File::open(path)?;
        Self::read_from(BufReader::new(f))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat;

    #[test]
    fn insert_is_write_once() {
        let c = Cache::new();
        let k = CorrelatorKey::psi(1, vec![1]);
        c.insert(k.clone(), rat(1, 24)).unwrap();
        c.insert(k.clone(), rat(1, 24)).unwrap();
        assert!(matches!(c.insert(k.clone(), rat(1, 12)), Err(Error::Consistency(_))));
        assert_eq!(c.get(&k), Some(rat(1, 24)));
        assert_eq!(c.hits(), 1);
        assert!(c.get(&CorrelatorKey::psi(1, vec![0])).is_none());
        assert_eq!(c.misses(), 1);
    }

    #[test]
    fn text_roundtrip() {
        let c = Cache::new();
        c.insert(CorrelatorKey::psi(1, vec![1]), rat(1, 24)).unwrap();
        c.insert(CorrelatorKey::new(2, "1:3".parse().unwrap(), vec![]), rat(43, 2880)).unwrap();
        let mut buf = Vec::new();
        c.write_to(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(
            text,
            "kappa-psi-cache v1\ng=1;k=-;t=1;v=1/24\ng=2;k=1:3;t=;v=43/2880\n"
        );
        let back = Cache::read_from(buf.as_slice()).unwrap();
        assert_eq!(back.entries(), c.entries());
    }

    #[test]
    fn corrupt_files_rejected() {
        let bad_header = "kappa-psi-cache v2\n";
        assert!(matches!(Cache::read_from(bad_header.as_bytes()), Err(Error::CacheCorrupt(_))));
        let bad_dim = "kappa-psi-cache v1\ng=1;k=-;t=0;v=1\n";
        assert!(matches!(Cache::read_from(bad_dim.as_bytes()), Err(Error::CacheCorrupt(_))));
        let bad_value = "kappa-psi-cache v1\ng=1;k=-;t=1;v=2/48\n";
        assert!(matches!(Cache::read_from(bad_value.as_bytes()), Err(Error::CacheCorrupt(_))));
        let dup = "kappa-psi-cache v1\ng=1;k=-;t=1;v=1/24\ng=1;k=-;t=1;v=1/12\n";
        assert!(matches!(Cache::read_from(dup.as_bytes()), Err(Error::CacheCorrupt(_))));
    }
}
