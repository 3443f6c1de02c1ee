//! Atomic file output and the run manifest.

use std::fs;
use std::path::{Path, PathBuf};

use sfwm_core::io::write_key_values;
use sha2::{Digest, Sha256};

use crate::error::CliError;

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Collects outputs of one command and writes each file via a temporary
/// sibling and a rename.
pub struct OutputDir {
    dir: PathBuf,
    written: Vec<(String, String)>,
    notes: Vec<(String, String)>,
}

impl OutputDir {
    pub fn create(dir: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.to_path_buf(), source })?;
        Ok(Self { dir: dir.to_path_buf(), written: Vec::new(), notes: Vec::new() })
    }

    /// Extra manifest entry, such as the hash of an input file.
    pub fn note(&mut self, key: &str, value: String) {
        self.notes.push((key.to_string(), value));
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        let path = self.dir.join(name);
        let tmp = self.dir.join(format!(".{name}.tmp"));
        let io = |source| CliError::Io { path: path.clone(), source };
        fs::write(&tmp, bytes).map_err(io)?;
        fs::rename(&tmp, &path).map_err(io)?;
        self.written.push((name.to_string(), sha256_hex(bytes)));
        Ok(())
    }

    /// Serialises with `f` into memory, then writes atomically.
    pub fn write_with(
        &mut self,
        name: &str,
        f: impl FnOnce(&mut Vec<u8>) -> sfwm_core::Result<()>,
    ) -> Result<(), CliError> {
        let mut buf = Vec::new();
        f(&mut buf)?;
        self.write(name, &buf)
    }

    pub fn write_pairs(&mut self, name: &str, pairs: &[(String, String)]) -> Result<(), CliError> {
        self.write_with(name, |w| write_key_values(w, pairs))
    }

    /// `manifest.txt`: command, config hash, seed, notes and the hash of every
    /// file written so far.
    pub fn finish(mut self, command: &str, config_text: &str, seed: u64) -> Result<(), CliError> {
        let mut pairs = vec![
            ("command".to_string(), command.to_string()),
            ("config_sha256".to_string(), sha256_hex(config_text.as_bytes())),
            ("seed".to_string(), seed.to_string()),
        ];
        pairs.append(&mut self.notes);
        pairs.extend(self.written.iter().map(|(n, h)| (format!("sha256.{n}"), h.clone())));
        self.write_pairs("manifest.txt", &pairs)
    }
}
