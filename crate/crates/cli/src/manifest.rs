//! `manifest.txt`: a key=value record of everything needed to re-run a
//! command, plus input digests, output paths and phase timings.

use std::fs::File;
use std::io::{self, Read};
use std::path::Path;

use hardlda_core::textio;
use sha2::{Digest, Sha256};

use crate::CliError;

pub const MANIFEST_FILE: &str = "manifest.txt";

#[derive(Debug, Clone, Default)]
pub struct Manifest {
    pairs: Vec<(String, String)>,
}

impl Manifest {
    pub fn new(command: &str) -> Self {
        let mut m = Manifest::default();
        m.set("command", command);
        m.set("version", env!("CARGO_PKG_VERSION"));
        m
    }

    /// Insert or replace `key`.
    pub fn set(&mut self, key: impl Into<String>, value: impl ToString) {
        let key = key.into();
        let value = value.to_string();
        match self.pairs.iter_mut().find(|(k, _)| *k == key) {
            Some(slot) => slot.1 = value,
            None => self.pairs.push((key, value)),
        }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.pairs.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    /// Records the path of an input file and its SHA-256.
    pub fn input(&mut self, key: &str, path: &Path) -> Result<(), CliError> {
        self.set(format!("input.{key}"), path.display());
        self.set(format!("digest.{key}"), sha256_file(path)?);
        Ok(())
    }

    /// Records both files of a corpus directory.
    pub fn corpus_input(&mut self, key: &str, dir: &Path) -> Result<(), CliError> {
        self.set(format!("input.{key}"), dir.display());
        for file in [hardlda_core::corpus::DOCWORD_FILE, hardlda_core::corpus::VOCAB_FILE] {
            let stem = file.trim_end_matches(".txt");
            self.set(format!("digest.{key}.{stem}"), sha256_file(&dir.join(file))?);
        }
        Ok(())
    }

    pub fn output(&mut self, key: &str, path: &Path) {
        self.set(format!("output.{key}"), path.display());
    }

    pub fn phase_secs(&mut self, phase: &str, secs: f64) {
        self.set(format!("secs.{phase}"), format!("{secs:.6}"));
    }

    pub fn pairs(&self) -> &[(String, String)] {
        &self.pairs
    }

    pub fn save(&self, dir: &Path) -> Result<(), CliError> {
        textio::save_key_values(&dir.join(MANIFEST_FILE), &self.pairs)?;
        Ok(())
    }

    pub fn load(dir: &Path) -> Result<Self, CliError> {
        Ok(Manifest { pairs: textio::load_key_values(&dir.join(MANIFEST_FILE))? })
    }
}

pub fn sha256_file(path: &Path) -> Result<String, CliError> {
    let digest = || -> io::Result<String> {
        let mut file = File::open(path)?;
        let mut hasher = Sha256::new();
        let mut buf = [0u8; 1 << 16];
        loop {
            let n = file.read(&mut buf)?;
            if n == 0 {
                break;
            }
            hasher.update(&buf[..n]);
        }
        Ok(format!("{:x}", hasher.finalize()))
    };
    digest().map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}
