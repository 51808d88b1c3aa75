//! Content-addressed JSON cache of expensive results.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use dpbrauer::lattice::{build_picard_lattice, DegreeSpec};
use dpbrauer::subgroups::Tier;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const SCHEMA_VERSION: u32 = 1;
pub const ALGORITHM_VERSION: &str = "1";
pub const CACHE_DIR_ENV: &str = "DPBRAUER_CACHE_DIR";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PayloadKind {
    SubgroupClasses,
    Table,
    LemmaReport,
}

impl PayloadKind {
    fn name(self) -> &'static str {
        match self {
            PayloadKind::SubgroupClasses => "subgroup-classes",
            PayloadKind::Table => "table",
            PayloadKind::LemmaReport => "lemma-report",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContentKey {
    pub kind: PayloadKind,
    pub degree: DegreeSpec,
    pub tier: Tier,
    pub algorithm_version: String,
    /// SHA-256 of the generating reflections of the Weyl group.
    pub generator_digest: String,
}

impl ContentKey {
    pub fn new(kind: PayloadKind, degree: DegreeSpec, tier: Tier) -> Self {
        let lattice = build_picard_lattice(degree);
        let mut h = Sha256::new();
        for g in lattice.simple_reflections() {
            for x in g.entries() {
                h.update(x.to_le_bytes());
            }
            h.update(b";");
        }
        Self {
            kind,
            degree,
            tier,
            algorithm_version: ALGORITHM_VERSION.to_string(),
            generator_digest: hex(&h.finalize()),
        }
    }

    fn file_name(&self) -> String {
        let json = serde_json::to_vec(self).expect("serializable key");
        let digest = hex(&Sha256::digest(&json));
        format!("{}-d{}-{}.json", self.kind.name(), self.degree, &digest[..16])
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Serialize, Deserialize)]
pub struct CacheEntry {
    pub schema_version: u32,
    pub content_key: ContentKey,
    pub payload: serde_json::Value,
}

#[derive(Debug, Serialize)]
pub struct CacheListing {
    pub file: String,
    pub kind: Option<PayloadKind>,
    pub degree: Option<DegreeSpec>,
    pub bytes: u64,
    pub current: bool,
}

pub struct Cache {
    dir: PathBuf,
}

impl Cache {
    pub fn new(dir: PathBuf) -> Self {
        Self { dir }
    }

    /// `--cache-dir`, else the environment variable, else the user data
    /// directory.
    pub fn default_dir() -> PathBuf {
        if let Some(d) = std::env::var_os(CACHE_DIR_ENV) {
            return PathBuf::from(d);
        }
        dirs::data_local_dir()
            .or_else(dirs::home_dir)
            .unwrap_or_else(std::env::temp_dir)
            .join("dpbrauer")
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// The cached payload for `key`, if present, current and well formed.
    pub fn load<T: DeserializeOwned>(&self, key: &ContentKey) -> Option<T> {
        let bytes = fs::read(self.dir.join(key.file_name())).ok()?;
        let entry: CacheEntry = serde_json::from_slice(&bytes).ok()?;
        if entry.schema_version != SCHEMA_VERSION || &entry.content_key != key {
            return None;
        }
        serde_json::from_value(entry.payload).ok()
    }

    /// Write-then-rename, so readers never see a partial file.
    pub fn store<T: Serialize>(&self, key: &ContentKey, payload: &T) -> io::Result<()> {
        fs::create_dir_all(&self.dir)?;
        let entry = CacheEntry {
            schema_version: SCHEMA_VERSION,
            content_key: key.clone(),
            payload: serde_json::to_value(payload).map_err(io::Error::other)?,
        };
        let mut tmp = tempfile::NamedTempFile::new_in(&self.dir)?;
        serde_json::to_writer(&mut tmp, &entry).map_err(io::Error::other)?;
        tmp.flush()?;
        tmp.persist(self.dir.join(key.file_name())).map_err(|e| e.error)?;
        Ok(())
    }

    pub fn list(&self) -> io::Result<Vec<CacheListing>> {
        let mut out = Vec::new();
        let entries = match fs::read_dir(&self.dir) {
            Ok(e) => e,
            Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(out),
            Err(e) => return Err(e),
        };
        for entry in entries {
            let entry = entry?;
            let name = entry.file_name().to_string_lossy().into_owned();
            if !name.ends_with(".json") {
                continue;
            }
            let parsed: Option<CacheEntry> = fs::read(entry.path())
                .ok()
                .and_then(|b| serde_json::from_slice(&b).ok());
            out.push(CacheListing {
                bytes: entry.metadata()?.len(),
                kind: parsed.as_ref().map(|e| e.content_key.kind),
                degree: parsed.as_ref().map(|e| e.content_key.degree),
                current: parsed.is_some_and(|e| {
                    e.schema_version == SCHEMA_VERSION
                        && e.content_key.algorithm_version == ALGORITHM_VERSION
                }),
                file: name,
            });
        }
        out.sort_by(|a, b| a.file.cmp(&b.file));
        Ok(out)
    }

    /// Removes cache files; returns how many.
    pub fn clear(&self) -> io::Result<usize> {
        let listing = self.list()?;
        for item in &listing {
            fs::remove_file(self.dir.join(&item.file))?;
        }
        Ok(listing.len())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn key(kind: PayloadKind) -> ContentKey {
        ContentKey::new(kind, DegreeSpec::new(6).unwrap(), Tier::Exhaustive)
    }

    #[test]
    fn round_trip_and_clear() {
        let dir = tempfile::tempdir().unwrap();
        let cache = Cache::new(dir.path().join("c"));
        assert!(cache.list().unwrap().is_empty());
        let k = key(PayloadKind::Table);
        assert_eq!(cache.load::<Vec<u32>>(&k), None);
        cache.store(&k, &vec![1u32, 2, 3]).unwrap();
        assert_eq!(cache.load::<Vec<u32>>(&k), Some(vec![1, 2, 3]));
        assert_eq!(cache.load::<Vec<u32>>(&key(PayloadKind::LemmaReport)), None);
        let listing = cache.list().unwrap();
        assert_eq!(listing.len(), 1);
        assert!(listing[0].current);
        assert_eq!(cache.clear().unwrap(), 1);
        assert_eq!(cache.load::<Vec<u32>>(&k), None);
    }

    #[test]
    fn stale_schema_is_ignored() {
        let dir = tempfile::tempdir().unwrap();
        let cache = Cache::new(dir.path().to_path_buf());
        let k = key(PayloadKind::Table);
        cache.store(&k, &7u32).unwrap();
        let path = dir.path().join(k.file_name());
        let mut entry: CacheEntry = serde_json::from_slice(&fs::read(&path).unwrap()).unwrap();
        entry.schema_version = 0;
        fs::write(&path, serde_json::to_vec(&entry).unwrap()).unwrap();
        assert_eq!(cache.load::<u32>(&k), None);
        assert!(!cache.list().unwrap()[0].current);
    }

    #[test]
    fn keys_separate_degrees_and_tiers() {
        let a = ContentKey::new(PayloadKind::Table, DegreeSpec::new(4).unwrap(), Tier::Exhaustive);
        let b = ContentKey::new(PayloadKind::Table, DegreeSpec::new(4).unwrap(), Tier::Extended);
        let c = ContentKey::new(PayloadKind::Table, DegreeSpec::new(5).unwrap(), Tier::Exhaustive);
        assert_ne!(a.file_name(), b.file_name());
        assert_ne!(a.file_name(), c.file_name());
        assert_ne!(a.generator_digest, c.generator_digest);
        assert_eq!(a.file_name(), a.clone().file_name());
    }
}
