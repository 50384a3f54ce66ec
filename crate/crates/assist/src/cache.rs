//! On-disk cache of fetched documents.
//!
//! Each entry is `<sha256(iri)>.body` holding the raw bytes and
//! `<sha256(iri)>.meta` holding one tab-separated line:
//! `iri content-type fetched-at-unix-seconds`.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use sha2::{Digest, Sha256};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CachedDocument {
    pub iri: String,
    pub content_type: Option<String>,
    pub fetched_at: SystemTime,
    pub body: Vec<u8>,
}

impl CachedDocument {
    pub fn age(&self) -> Duration {
        SystemTime::now().duration_since(self.fetched_at).unwrap_or_default()
    }
}

#[derive(Debug, Clone)]
pub struct DiskCache {
    dir: PathBuf,
}

pub fn cache_key(iri: &str) -> String {
    hex::encode(Sha256::digest(iri.as_bytes()))
}

impl DiskCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        DiskCache { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn paths(&self, iri: &str) -> (PathBuf, PathBuf) {
        let key = cache_key(iri);
        (self.dir.join(format!("{key}.body")), self.dir.join(format!("{key}.meta")))
    }

    /// The cached copy of `iri`, whatever its age. Unreadable or mismatched
    /// entries count as missing.
    pub fn get(&self, iri: &str) -> Option<CachedDocument> {
        let (body_path, meta_path) = self.paths(iri);
        let meta = fs::read_to_string(meta_path).ok()?;
        let mut fields = meta.trim_end_matches('\n').split('\t');
        let stored_iri = fields.next()?;
        if stored_iri != iri {
            return None;
        }
        let content_type = fields.next().filter(|s| !s.is_empty()).map(str::to_string);
        let secs: u64 = fields.next()?.parse().ok()?;
        let body = fs::read(body_path).ok()?;
        Some(CachedDocument {
            iri: iri.to_string(),
            content_type,
            fetched_at: UNIX_EPOCH + Duration::from_secs(secs),
            body,
        })
    }

    pub fn put(&self, iri: &str, content_type: Option<&str>, body: &[u8]) -> io::Result<()> {
        fs::create_dir_all(&self.dir)?;
        let (body_path, meta_path) = self.paths(iri);
        let now = SystemTime::now().duration_since(UNIX_EPOCH).unwrap_or_default().as_secs();
        let content_type = content_type.unwrap_or("").replace(['\t', '\n'], " ");
        // body first so a reader never sees metadata without its body
        write_atomic(&body_path, body)?;
        write_atomic(&meta_path, format!("{iri}\t{content_type}\t{now}\n").as_bytes())
    }
}

fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let tmp = path.with_extension(format!("tmp{}", std::process::id()));
    fs::write(&tmp, bytes)?;
    fs::rename(tmp, path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let cache = DiskCache::new(dir.path());
        assert!(cache.get("http://x/g").is_none());
        cache.put("http://x/g", Some("text/turtle"), b"<a> <b> <c> .").unwrap();
        let doc = cache.get("http://x/g").unwrap();
        assert_eq!(doc.body, b"<a> <b> <c> .");
        assert_eq!(doc.content_type.as_deref(), Some("text/turtle"));
        assert!(doc.age() < Duration::from_secs(60));
        let key = cache_key("http://x/g");
        assert_eq!(key.len(), 64);
        assert!(dir.path().join(format!("{key}.meta")).exists());
    }
}
