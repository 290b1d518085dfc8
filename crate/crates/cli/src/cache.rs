//! Content-addressed report cache.

use std::path::PathBuf;

use anyhow::{Context, Result};
use sha2::{Digest, Sha256};

/// Overrides the cache directory when `--cache` is absent.
pub const CACHE_ENV: &str = "PIWB_CACHE_DIR";

pub struct Cache {
    dir: Option<PathBuf>,
}

impl Cache {
    pub fn new(flag: Option<PathBuf>) -> Self {
        Cache { dir: flag.or_else(|| std::env::var_os(CACHE_ENV).map(PathBuf::from)) }
    }

    pub fn disabled() -> Self {
        Cache { dir: None }
    }

    pub fn key(parts: &[&str]) -> String {
        let mut h = Sha256::new();
        for p in parts {
            h.update((p.len() as u64).to_le_bytes());
            h.update(p.as_bytes());
        }
        hex::encode(h.finalize())
    }

    /// The stored report for `parts`, computing and storing it on a miss.
    /// The flag is true on a hit.
    pub fn get_or_compute(&self, parts: &[&str], compute: impl FnOnce() -> Result<String>) -> Result<(String, bool)> {
        let Some(dir) = &self.dir else { return Ok((compute()?, false)) };
        let path = dir.join(format!("{}.txt", Self::key(parts)));
        if let Ok(s) = std::fs::read_to_string(&path) {
            return Ok((s, true));
        }
        let s = compute()?;
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let tmp = path.with_extension("tmp");
        std::fs::write(&tmp, &s).with_context(|| format!("writing {}", tmp.display()))?;
        std::fs::rename(&tmp, &path)?;
        Ok((s, false))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn keys_separate_field_boundaries() {
        assert_ne!(Cache::key(&["ab", "c"]), Cache::key(&["a", "bc"]));
        assert_eq!(Cache::key(&["x"]).len(), 64);
    }

    #[test]
    fn second_lookup_hits() {
        let dir = std::env::temp_dir().join(format!("piwb-cache-test-{}", std::process::id()));
        let c = Cache::new(Some(dir.clone()));
        let (a, hit) = c.get_or_compute(&["k"], || Ok("report\n".into())).unwrap();
        assert!(!hit);
        let (b, hit) = c.get_or_compute(&["k"], || panic!("recomputed")).unwrap();
        assert!(hit);
        assert_eq!(a, b);
        std::fs::remove_dir_all(dir).unwrap();
    }
}
