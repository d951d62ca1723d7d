//! Run manifests: the input digest, the fully merged configuration, and
//! the artifacts a command wrote, so a run can be reproduced from its
//! manifest alone. The manifest is the only output carrying a timestamp.

use crate::config::ConfigEcho;
use crate::CliError;
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

#[derive(Debug, Serialize)]
pub struct FileStamp {
    pub path: PathBuf,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct Manifest {
    pub command: &'static str,
    pub toolkit_version: &'static str,
    pub created_utc: String,
    pub data: Option<FileStamp>,
    pub w_init: Option<FileStamp>,
    pub inputs: Vec<FileStamp>,
    pub config: ConfigEcho,
    pub outputs: Vec<FileStamp>,
}

pub fn sha256_file(path: &Path) -> Result<String, CliError> {
    let bytes = std::fs::read(path)
        .map_err(|e| CliError::Data(format!("cannot read {}: {e}", path.display())))?;
    Ok(format!("{:x}", Sha256::digest(&bytes)))
}

pub fn stamp(path: &Path) -> Result<FileStamp, CliError> {
    Ok(FileStamp {
        path: path.to_path_buf(),
        sha256: sha256_file(path)?,
    })
}

impl Manifest {
    pub fn new(command: &'static str, config: ConfigEcho) -> Self {
        Manifest {
            command,
            toolkit_version: env!("CARGO_PKG_VERSION"),
            created_utc: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            data: None,
            w_init: None,
            inputs: Vec::new(),
            config,
            outputs: Vec::new(),
        }
    }

    pub fn write(&self, out_dir: &Path) -> Result<(), CliError> {
        let text = serde_json::to_string_pretty(self)
            .expect("manifest serialization cannot fail");
        write_output(out_dir, "manifest.json", &text)?;
        Ok(())
    }
}

/// Write one artifact under `out_dir`, creating the directory first.
pub fn write_output(out_dir: &Path, name: &str, text: &str) -> Result<PathBuf, CliError> {
    std::fs::create_dir_all(out_dir)
        .map_err(|e| CliError::Data(format!("cannot create {}: {e}", out_dir.display())))?;
    let path = out_dir.join(name);
    std::fs::write(&path, text)
        .map_err(|e| CliError::Data(format!("cannot write {}: {e}", path.display())))?;
    Ok(path)
}
