//! Every command writes a manifest next to its outputs: the fully resolved
//! configuration, tool version, checksums of the cache files it read, and the
//! list of files it wrote. Re-running the same command single-threaded
//! reproduces the outputs byte for byte.

use anyhow::Result;
use serde::Serialize;

use crate::config::RunConfig;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

#[derive(Serialize)]
pub struct Manifest<'a> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: Vec<String>,
    pub threads: Option<usize>,
    pub config: &'a RunConfig,
    /// CRC-64 (hex) of every cache file consumed.
    pub cache_checksums: BTreeMap<String, String>,
    pub outputs: Vec<String>,
}

pub struct ManifestBuilder {
    out_dir: PathBuf,
    cache_checksums: BTreeMap<String, String>,
    outputs: Vec<String>,
}

impl ManifestBuilder {
    pub fn new(out_dir: &Path) -> Self {
        Self {
            out_dir: out_dir.to_path_buf(),
            cache_checksums: BTreeMap::new(),
            outputs: Vec::new(),
        }
    }

    pub fn record_cache(&mut self, path: &Path) -> Result<()> {
        let bytes = std::fs::read(path)?;
        let crc = chaology_core::eigen::crc64(&bytes);
        self.cache_checksums
            .insert(path.display().to_string(), format!("{crc:016x}"));
        Ok(())
    }

    /// Writes a text output file and records it.
    pub fn write_output(&mut self, name: &str, contents: &str) -> Result<PathBuf> {
        let path = self.out_dir.join(name);
        std::fs::write(&path, contents)?;
        self.outputs.push(path.display().to_string());
        Ok(path)
    }

    pub fn finish(self, config: &RunConfig, threads: Option<usize>) -> Result<PathBuf> {
        let manifest = Manifest {
            tool: "chaology",
            version: env!("CARGO_PKG_VERSION"),
            command: std::env::args().collect(),
            threads,
            config,
            cache_checksums: self.cache_checksums,
            outputs: self.outputs,
        };
        let path = self.out_dir.join("manifest.json");
        std::fs::write(&path, serde_json::to_string_pretty(&manifest)?)?;
        Ok(path)
    }
}
