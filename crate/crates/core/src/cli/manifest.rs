use std::collections::BTreeMap;
use std::fs::{self, OpenOptions};
use std::io::{self, Read};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const LOCK_FILE: &str = ".lock";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputDigest {
    pub path: PathBuf,
    pub sha256: String,
}

/// Record of one invocation: what went in and where everything came out.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub format: String,
    /// Version of this crate that produced the run.
    pub version: String,
    pub command: String,
    pub config: serde_json::Value,
    pub inputs: Vec<InputDigest>,
    /// Artifact role → file name relative to the output directory.
    pub artifacts: BTreeMap<String, String>,
}

impl RunManifest {
    pub fn new(command: &str, config: serde_json::Value) -> Self {
        Self {
            format: "seqcsg-run".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            config,
            inputs: Vec::new(),
            artifacts: BTreeMap::new(),
        }
    }

    pub fn add_input(&mut self, path: &Path) -> Result<()> {
        self.inputs.push(InputDigest {
            path: path.to_path_buf(),
            sha256: sha256_file(path)?,
        });
        Ok(())
    }

    pub fn artifact(&mut self, role: &str, file: &str) -> &mut Self {
        self.artifacts.insert(role.into(), file.into());
        self
    }

    pub fn load(dir: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&fs::read_to_string(dir.join(MANIFEST_FILE))?)?)
    }
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let mut file = fs::File::open(path)?;
    let mut hasher = Sha256::new();
    let mut buf = [0u8; 64 * 1024];
    loop {
        let n = file.read(&mut buf)?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(hex::encode(hasher.finalize()))
}

/// Exclusive claim on an output directory, released on drop.
#[derive(Debug)]
pub struct OutputDir {
    pub path: PathBuf,
    lock: PathBuf,
}

impl OutputDir {
    /// Creates `path` if needed, takes the lock, and refuses to reuse a
    /// directory that already holds a manifest unless `force` is set.
    pub fn claim(path: &Path, force: bool) -> Result<Self> {
        fs::create_dir_all(path)?;
        let lock = path.join(LOCK_FILE);
        match OpenOptions::new().write(true).create_new(true).open(&lock) {
            Ok(_) => {}
            Err(e) if e.kind() == io::ErrorKind::AlreadyExists => {
                return Err(Error::Config(format!(
                    "{} is in use by another run (remove {} if that run is gone)",
                    path.display(),
                    lock.display()
                )))
            }
            Err(e) => return Err(e.into()),
        }
        let claimed = Self {
            path: path.to_path_buf(),
            lock,
        };
        if path.join(MANIFEST_FILE).exists() && !force {
            return Err(Error::Config(format!(
                "{} already holds a run manifest; pass --force to overwrite",
                path.display()
            )));
        }
        Ok(claimed)
    }

    pub fn file(&self, name: &str) -> PathBuf {
        self.path.join(name)
    }

    pub fn write_manifest(&self, manifest: &RunManifest) -> Result<()> {
        fs::write(self.file(MANIFEST_FILE), serde_json::to_string_pretty(manifest)?)?;
        Ok(())
    }
}

impl Drop for OutputDir {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.lock);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn claim_refuses_existing_manifest_and_concurrent_use() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("run");
        {
            let claimed = OutputDir::claim(&out, false).unwrap();
            assert!(matches!(OutputDir::claim(&out, false), Err(Error::Config(_))));
            claimed
                .write_manifest(&RunManifest::new("train", serde_json::json!({})))
                .unwrap();
        }
        assert!(matches!(OutputDir::claim(&out, false), Err(Error::Config(_))));
        assert!(OutputDir::claim(&out, true).is_ok());
    }

    #[test]
    fn digest_of_known_bytes() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x");
        fs::write(&p, b"abc").unwrap();
        assert_eq!(
            sha256_file(&p).unwrap(),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
