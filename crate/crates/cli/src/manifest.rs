use std::fs;
use std::path::Path;
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::{Context, Failure};

pub const MANIFEST_FILE: &str = "run.json";

/// Provenance of one run, written next to its outputs.
#[derive(Debug, Serialize)]
pub struct RunManifest<'a, P: Serialize> {
    pub subcommand: &'a str,
    pub params: &'a P,
    /// SHA-256 of the input dataset's `dataset.json`, which pins both data files.
    pub dataset_checksum: Option<String>,
    pub seed: Option<u64>,
    pub version: &'static str,
    pub threads: usize,
    pub wall_time_seconds: f64,
}

pub fn dataset_checksum(dir: &Path) -> Result<String, Failure> {
    let bytes = fs::read(dir.join("dataset.json"))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

pub struct Run<'a, P: Serialize> {
    pub subcommand: &'a str,
    pub params: &'a P,
    pub seed: Option<u64>,
    pub started: Instant,
}

impl<'a, P: Serialize> Run<'a, P> {
    pub fn start(subcommand: &'a str, params: &'a P, seed: Option<u64>) -> Self {
        Self { subcommand, params, seed, started: Instant::now() }
    }

    pub fn finish(self, out: &Path, dataset: Option<&Path>, ctx: &Context) -> Result<(), Failure> {
        let manifest = RunManifest {
            subcommand: self.subcommand,
            params: self.params,
            dataset_checksum: dataset.map(dataset_checksum).transpose()?,
            seed: self.seed,
            version: env!("CARGO_PKG_VERSION"),
            threads: ctx.threads,
            wall_time_seconds: self.started.elapsed().as_secs_f64(),
        };
        write_json(&out.join(MANIFEST_FILE), &manifest, true)
    }
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T, pretty: bool) -> Result<(), Failure> {
    let mut bytes = if pretty { serde_json::to_vec_pretty(value)? } else { serde_json::to_vec(value)? };
    bytes.push(b'\n');
    fs::write(path, bytes)?;
    Ok(())
}
