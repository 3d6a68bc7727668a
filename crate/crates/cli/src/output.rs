//! Result persistence. Computations hand finished tables to a single writer
//! thread; nothing else touches the output directory.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::mpsc::{self, Sender};
use std::thread::{self, JoinHandle};

use cascade_qed::config::ResolvedConfig;
use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Serialize)]
pub struct OutputRecord {
    /// Relative to the manifest.
    pub path: String,
    pub sha256: String,
    pub bytes: usize,
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: Vec<String>,
    pub subcommand: String,
    pub preset: Option<String>,
    pub version: &'static str,
    pub config: ResolvedConfig,
    pub seeds: Vec<u64>,
    pub jobs: usize,
    pub wall_time_s: f64,
    pub status: &'static str,
    pub notes: Vec<String>,
    pub outputs: Vec<OutputRecord>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

enum Job {
    File { name: String, body: String },
}

pub struct Writer {
    tx: Option<Sender<Job>>,
    handle: Option<JoinHandle<std::io::Result<Vec<OutputRecord>>>>,
}

impl Writer {
    pub fn new(dir: &Path) -> std::io::Result<Self> {
        fs::create_dir_all(dir)?;
        let (tx, rx) = mpsc::channel::<Job>();
        let root = dir.to_path_buf();
        let handle = thread::spawn(move || {
            let mut records = Vec::new();
            for job in rx {
                let Job::File { name, body } = job;
                let path = root.join(&name);
                if let Some(parent) = path.parent() {
                    fs::create_dir_all(parent)?;
                }
                fs::write(&path, body.as_bytes())?;
                records.push(OutputRecord {
                    sha256: sha256_hex(body.as_bytes()),
                    bytes: body.len(),
                    path: name,
                });
            }
            Ok(records)
        });
        Ok(Self {
            tx: Some(tx),
            handle: Some(handle),
        })
    }

    pub fn put(&self, name: impl Into<String>, body: String) {
        if let Some(tx) = &self.tx {
            // a send only fails once the writer has died; finish() reports why
            let _ = tx.send(Job::File {
                name: name.into(),
                body,
            });
        }
    }

    /// Flushes all pending files and returns their records in write order.
    pub fn finish(mut self) -> std::io::Result<Vec<OutputRecord>> {
        drop(self.tx.take());
        match self.handle.take().map(JoinHandle::join) {
            Some(Ok(r)) => r,
            Some(Err(_)) => Err(std::io::Error::other("writer thread panicked")),
            None => Ok(Vec::new()),
        }
    }
}

pub fn write_manifest(dir: &Path, manifest: &RunManifest) -> std::io::Result<PathBuf> {
    let path = dir.join("manifest.json");
    let mut text = serde_json::to_string_pretty(manifest).map_err(std::io::Error::other)?;
    text.push('\n');
    fs::write(&path, text)?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn records_match_files() {
        let dir = std::env::temp_dir().join(format!("cascade-writer-{}", std::process::id()));
        let w = Writer::new(&dir).unwrap();
        w.put("a.csv", "x\n1\n".into());
        w.put("sub/b.csv", "y\n2\n".into());
        let recs = w.finish().unwrap();
        assert_eq!(recs.len(), 2);
        for r in &recs {
            let body = fs::read(dir.join(&r.path)).unwrap();
            assert_eq!(sha256_hex(&body), r.sha256);
        }
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
        fs::remove_dir_all(dir).unwrap();
    }
}
