//! On-disk store of per-degree image lattices.
//!
//! Each lattice lives in its own JSON file named by the SHA-256 of a key that
//! covers every input it depends on. A file whose stored key does not match is
//! treated as a miss.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use gammaspin::linalg::Vector;
use gammaspin::{Family, GroupModel, ImageModule, TheorySpec};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Bumped whenever the lattice computation changes in a way that alters rows.
const FORMAT: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct Key {
    format: u32,
    engine: String,
    family: Family,
    m: u32,
    n: u32,
    max_factors: usize,
    degree: u32,
}

#[derive(Serialize, Deserialize)]
struct Entry {
    key: Key,
    rows: Vec<Vector>,
}

pub struct Cache {
    dir: PathBuf,
}

impl Cache {
    pub fn new(dir: PathBuf) -> Cache {
        Cache { dir }
    }

    fn key(model: &GroupModel, theory: TheorySpec, max_factors: usize, degree: u32) -> Key {
        Key {
            format: FORMAT,
            engine: env!("CARGO_PKG_VERSION").to_string(),
            family: model.family(),
            m: model.m(),
            n: theory.n(),
            max_factors,
            degree,
        }
    }

    fn path(&self, key: &Key) -> PathBuf {
        let bytes = serde_json::to_vec(key).expect("key serializes");
        self.dir.join(format!("{:x}.json", Sha256::digest(bytes)))
    }

    fn read(&self, key: &Key) -> Option<Vec<Vector>> {
        let text = fs::read(self.path(key)).ok()?;
        let entry: Entry = serde_json::from_slice(&text).ok()?;
        (entry.key == *key).then_some(entry.rows)
    }

    /// The module for this configuration, rebuilt from stored lattices when all
    /// degrees are present and computed (then stored) otherwise.
    pub fn module(&self, model: &GroupModel, theory: TheorySpec, max_factors: usize) -> io::Result<ImageModule> {
        let degrees: Vec<u32> = (0..=model.top_degree()).step_by(2).collect();
        let stored: Option<BTreeMap<u32, Vec<Vector>>> = degrees
            .iter()
            .map(|&d| self.read(&Self::key(model, theory, max_factors, d)).map(|rows| (d, rows)))
            .collect();
        if let Some(lattices) = stored {
            return Ok(ImageModule::with_lattices(model, theory, max_factors, lattices));
        }
        let module = ImageModule::with_max_factors(model, theory, max_factors);
        fs::create_dir_all(&self.dir)?;
        for (d, rows) in module.all_lattice_rows() {
            let key = Self::key(model, theory, max_factors, d);
            write_atomic(&self.path(&key), &serde_json::to_vec(&Entry { key, rows })?)?;
        }
        Ok(module)
    }
}

fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let tmp = path.with_extension(format!("tmp{}", std::process::id()));
    fs::write(&tmp, bytes)?;
    fs::rename(tmp, path)
}

/// `--cache-dir`, then `GAMMASPIN_CACHE_DIR`, then `$HOME/.cache/gammaspin`.
pub fn default_dir() -> Option<PathBuf> {
    if let Some(d) = std::env::var_os("GAMMASPIN_CACHE_DIR") {
        return Some(PathBuf::from(d));
    }
    std::env::var_os("HOME").map(|h| PathBuf::from(h).join(".cache").join("gammaspin"))
}
