//! Run artifacts are rendered in memory and committed only after the whole
//! computation succeeded, each file through a temp file and an atomic rename.

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use sha2::{Digest, Sha256};
use tempfile::NamedTempFile;
use twistlab::{Error, Result};

use crate::config::RunConfig;

#[derive(Debug, Default)]
pub struct Artifacts {
    files: Vec<(String, Vec<u8>)>,
}

impl Artifacts {
    pub fn add(&mut self, name: &str, bytes: Vec<u8>) {
        self.files.push((name.to_string(), bytes));
    }

    /// Renders through any of the library's `write_*` functions.
    pub fn render(&mut self, name: &str, f: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<()> {
        let mut buf = Vec::new();
        f(&mut buf)?;
        self.add(name, buf);
        Ok(())
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.files.iter().map(|(n, _)| n.as_str())
    }

    /// Writes every artifact plus `manifest.txt`, which is itself a valid
    /// config for rerunning the command.
    pub fn commit(self, out_dir: &Path, command: &str, config: &RunConfig, seed: u64) -> Result<()> {
        std::fs::create_dir_all(out_dir)?;
        let mut manifest = String::new();
        writeln!(manifest, "# twistlab {} manifest", env!("CARGO_PKG_VERSION")).unwrap();
        writeln!(manifest, "command={command}").unwrap();
        for (k, v) in config.entries() {
            if k != "command" {
                writeln!(manifest, "{k}={v}").unwrap();
            }
        }
        writeln!(manifest, "# seed {seed}").unwrap();
        for (name, bytes) in &self.files {
            writeln!(manifest, "# sha256 {name} {:x}", Sha256::digest(bytes)).unwrap();
        }
        let mut staged = Vec::with_capacity(self.files.len() + 1);
        for (name, bytes) in self.files.iter().map(|(n, b)| (n.as_str(), b.as_slice())).chain([("manifest.txt", manifest.as_bytes())]) {
            let mut tmp = NamedTempFile::new_in(out_dir)?;
            tmp.write_all(bytes)?;
            tmp.as_file().sync_all()?;
            staged.push((tmp, out_dir.join(name)));
        }
        for (tmp, dest) in staged {
            tmp.persist(&dest).map_err(|e| Error::Io(e.error))?;
        }
        Ok(())
    }
}
