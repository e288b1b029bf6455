//! On-disk lookup cache: one JSON file per domain, expired after a TTL.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::{Mutex, RwLock};

use chrono::{DateTime, Duration, Utc};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use tracing::warn;

use super::rank::{RankProvider, RankRecord};
use super::whois::{try_lookup_whois, WhoisProvider, WhoisRecord};

pub const DEFAULT_TTL_DAYS: i64 = 7;

/// Filesystem-safe name for a domain (IPv6 hosts carry brackets and colons).
pub fn file_stem(domain: &str) -> String {
    domain
        .to_ascii_lowercase()
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || matches!(c, '.' | '-' | '_') {
                c
            } else {
                '_'
            }
        })
        .collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct Entry<T> {
    stored_at: DateTime<Utc>,
    value: T,
}

pub struct DiskCache<T> {
    dir: PathBuf,
    ttl: Duration,
    memo: RwLock<HashMap<String, Entry<T>>>,
    write_lock: Mutex<()>,
}

impl<T: Serialize + DeserializeOwned + Clone> DiskCache<T> {
    pub fn open(dir: impl Into<PathBuf>, ttl: Duration) -> std::io::Result<Self> {
        let dir = dir.into();
        std::fs::create_dir_all(&dir)?;
        Ok(Self {
            dir,
            ttl,
            memo: RwLock::new(HashMap::new()),
            write_lock: Mutex::new(()),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{}.json", file_stem(key)))
    }

    pub fn get(&self, key: &str, now: DateTime<Utc>) -> Option<T> {
        let fresh = |e: &Entry<T>| now - e.stored_at < self.ttl;
        if let Some(e) = self.memo.read().unwrap().get(key) {
            if fresh(e) {
                return Some(e.value.clone());
            }
        }
        let text = std::fs::read_to_string(self.path(key)).ok()?;
        let entry: Entry<T> = match serde_json::from_str(&text) {
            Ok(e) => e,
            Err(e) => {
                warn!(key, error = %e, "ignoring unreadable cache entry");
                return None;
            }
        };
        if !fresh(&entry) {
            return None;
        }
        let value = entry.value.clone();
        self.memo.write().unwrap().insert(key.to_string(), entry);
        Some(value)
    }

    pub fn put(&self, key: &str, value: &T, now: DateTime<Utc>) {
        let entry = Entry {
            stored_at: now,
            value: value.clone(),
        };
        let _guard = self.write_lock.lock().unwrap();
        let path = self.path(key);
        let tmp = path.with_extension("json.tmp");
        let written = serde_json::to_vec(&entry)
            .map_err(std::io::Error::other)
            .and_then(|bytes| std::fs::write(&tmp, bytes))
            .and_then(|_| std::fs::rename(&tmp, &path));
        if let Err(e) = written {
            warn!(key, error = %e, "cache write failed");
        }
        self.memo.write().unwrap().insert(key.to_string(), entry);
    }
}

/// WHOIS lookups through a cache. Transport failures are not cached.
pub struct CachedWhois<P> {
    pub provider: P,
    pub cache: DiskCache<WhoisRecord>,
}

impl<P: WhoisProvider> CachedWhois<P> {
    pub fn new(provider: P, cache: DiskCache<WhoisRecord>) -> Self {
        Self { provider, cache }
    }

    pub fn lookup_at(&self, domain: &str, now: DateTime<Utc>) -> WhoisRecord {
        if let Some(r) = self.cache.get(domain, now) {
            return r;
        }
        match try_lookup_whois(domain, &self.provider) {
            Ok(r) => {
                self.cache.put(domain, &r, now);
                r
            }
            Err(e) => {
                warn!(domain, error = %e, "whois lookup failed");
                WhoisRecord::not_found(domain)
            }
        }
    }

    pub fn lookup(&self, domain: &str) -> WhoisRecord {
        self.lookup_at(domain, Utc::now())
    }
}

pub struct CachedRank<P> {
    pub provider: P,
    pub cache: DiskCache<RankRecord>,
}

impl<P: RankProvider> CachedRank<P> {
    pub fn new(provider: P, cache: DiskCache<RankRecord>) -> Self {
        Self { provider, cache }
    }

    pub fn lookup_at(&self, domain: &str, now: DateTime<Utc>) -> RankRecord {
        if let Some(r) = self.cache.get(domain, now) {
            return r;
        }
        let r = self.provider.lookup(domain);
        self.cache.put(domain, &r, now);
        r
    }
}

impl<P: RankProvider> RankProvider for CachedRank<P> {
    fn lookup(&self, domain: &str) -> RankRecord {
        self.lookup_at(domain, Utc::now())
    }
}
