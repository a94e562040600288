//! Run manifests: what was run, on which inputs, and the checksum of every
//! output, so a run can be repeated and verified byte for byte.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::io::{read_json, write_json};

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(sha256_hex(&bytes))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunManifest {
    /// Arguments after the program name.
    pub command: Vec<String>,
    /// SHA-256 over the input checksums in path order.
    pub config_hash: String,
    pub inputs: BTreeMap<String, String>,
    pub seed: Option<u64>,
    pub version: String,
    pub outputs: BTreeMap<String, String>,
}

impl RunManifest {
    pub fn new(command: Vec<String>, seed: Option<u64>) -> Self {
        Self {
            config_hash: sha256_hex(b""),
            command,
            inputs: BTreeMap::new(),
            seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            outputs: BTreeMap::new(),
        }
    }

    pub fn add_input(&mut self, path: &Path) -> Result<()> {
        if path.is_dir() {
            for f in list_files(path)? {
                self.inputs.insert(f.display().to_string(), sha256_file(&f)?);
            }
        } else {
            self.inputs.insert(path.display().to_string(), sha256_file(path)?);
        }
        let mut h = Sha256::new();
        for (p, sum) in &self.inputs {
            h.update(p.as_bytes());
            h.update([0]);
            h.update(sum.as_bytes());
            h.update(b"\n");
        }
        self.config_hash = hex::encode(h.finalize());
        Ok(())
    }

    pub fn add_output(&mut self, path: &Path) -> Result<()> {
        self.outputs.insert(path.display().to_string(), sha256_file(path)?);
        Ok(())
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_json(path, self)
    }

    pub fn read(path: &Path) -> Result<Self> {
        read_json(path)
    }

    /// Outputs whose current checksum differs from the recorded one, or that
    /// are missing.
    pub fn mismatches(&self) -> Vec<String> {
        self.outputs
            .iter()
            .filter(|(p, sum)| sha256_file(Path::new(p)).map_or(true, |s| &s != *sum))
            .map(|(p, _)| p.clone())
            .collect()
    }
}

/// Regular files under `dir`, recursively, in sorted order.
pub fn list_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    let mut entries: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .map(|e| e.map(|e| e.path()).map_err(|e| Error::io(dir, e)))
        .collect::<Result<_>>()?;
    entries.sort();
    for p in entries {
        if p.is_dir() {
            out.extend(list_files(&p)?);
        } else {
            out.push(p);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn checksums_detect_changes() {
        let dir = tempfile::tempdir().unwrap();
        let f = dir.path().join("a.txt");
        std::fs::write(&f, b"hello").unwrap();
        let mut m = RunManifest::new(vec!["x".into()], Some(3));
        m.add_input(&f).unwrap();
        m.add_output(&f).unwrap();
        assert_eq!(m.outputs.values().next().unwrap(), &sha256_hex(b"hello"));
        assert!(m.mismatches().is_empty());
        let mp = dir.path().join("manifest.json");
        m.write(&mp).unwrap();
        assert_eq!(RunManifest::read(&mp).unwrap(), m);
        std::fs::write(&f, b"changed").unwrap();
        assert_eq!(m.mismatches().len(), 1);
    }
}
