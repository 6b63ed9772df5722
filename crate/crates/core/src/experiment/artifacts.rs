use std::collections::BTreeMap;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::{Error, Result};

pub const LOCK_FILE: &str = ".solarcast.lock";
pub const PARTIAL_SUFFIX: &str = ".partial";

/// Exclusive claim on an output directory, released on drop.
#[derive(Debug)]
pub struct OutputLock {
    path: PathBuf,
}

impl OutputLock {
    pub fn acquire(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let path = dir.join(LOCK_FILE);
        match fs::OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(mut f) => {
                let _ = writeln!(f, "{}", std::process::id());
                Ok(OutputLock { path })
            }
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => Err(Error::Config(format!(
                "output directory {} is in use by another run (delete {} if it is stale)",
                dir.display(),
                path.display()
            ))),
            Err(e) => Err(Error::io(&path, e)),
        }
    }
}

impl Drop for OutputLock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.path);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArtifactEntry {
    /// Path relative to the output directory.
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

/// Writes files inside one directory through a `.partial` temporary that is
/// renamed only when the writer succeeds.
#[derive(Debug)]
pub struct ArtifactWriter {
    dir: PathBuf,
    entries: Vec<ArtifactEntry>,
}

struct HashingWriter<W> {
    inner: W,
    hasher: Sha256,
    bytes: u64,
}

impl<W: Write> Write for HashingWriter<W> {
    fn write(&mut self, buf: &[u8]) -> std::io::Result<usize> {
        let n = self.inner.write(buf)?;
        self.hasher.update(&buf[..n]);
        self.bytes += n as u64;
        Ok(n)
    }

    fn flush(&mut self) -> std::io::Result<()> {
        self.inner.flush()
    }
}

impl ArtifactWriter {
    pub fn new(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        Ok(ArtifactWriter { dir, entries: Vec::new() })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    /// Writes `name` via `body`. On failure the `.partial` file is left behind.
    pub fn write(&mut self, name: &str, body: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<PathBuf> {
        if Path::new(name).is_absolute() || name.split(['/', '\\']).any(|c| c == "..") {
            return Err(Error::Config(format!("artifact name '{name}' escapes the output directory")));
        }
        let target = self.dir.join(name);
        if let Some(parent) = target.parent() {
            fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
        let partial = PathBuf::from(format!("{}{PARTIAL_SUFFIX}", target.display()));
        let file = fs::File::create(&partial).map_err(|e| Error::io(&partial, e))?;
        let mut w = HashingWriter {
            inner: BufWriter::new(file),
            hasher: Sha256::new(),
            bytes: 0,
        };
        body(&mut w)?;
        w.flush().map_err(|e| Error::io(&partial, e))?;
        let HashingWriter { inner, hasher, bytes } = w;
        drop(inner);
        fs::rename(&partial, &target).map_err(|e| Error::io(&target, e))?;
        self.entries.retain(|e| e.path != name);
        self.entries.push(ArtifactEntry {
            path: name.to_string(),
            sha256: hex::encode(hasher.finalize()),
            bytes,
        });
        tracing::info!(path = %target.display(), "wrote artifact");
        Ok(target)
    }

    pub fn entries(&self) -> &[ArtifactEntry] {
        &self.entries
    }
}

/// Provenance record written next to the artifacts of every command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub tool_version: String,
    pub config_hash: String,
    pub seed: Option<u64>,
    pub started_at: String,
    pub finished_at: String,
    pub row_counts: BTreeMap<String, usize>,
    pub metrics: BTreeMap<String, BTreeMap<String, f64>>,
    pub notes: BTreeMap<String, String>,
    pub artifacts: Vec<ArtifactEntry>,
}

impl RunManifest {
    pub fn start(command: impl Into<String>, config_hash: impl Into<String>, seed: Option<u64>) -> Self {
        RunManifest {
            command: command.into(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            config_hash: config_hash.into(),
            seed,
            started_at: now(),
            finished_at: String::new(),
            row_counts: BTreeMap::new(),
            metrics: BTreeMap::new(),
            notes: BTreeMap::new(),
            artifacts: Vec::new(),
        }
    }

    pub fn count(&mut self, key: impl Into<String>, n: usize) {
        self.row_counts.insert(key.into(), n);
    }

    pub fn note(&mut self, key: impl Into<String>, value: impl Into<String>) {
        self.notes.insert(key.into(), value.into());
    }

    /// Finishes the manifest and writes it as `manifest_<command>.json`.
    pub fn finish(mut self, writer: &mut ArtifactWriter) -> Result<PathBuf> {
        self.finished_at = now();
        self.artifacts = writer.entries().to_vec();
        let name = format!("manifest_{}.json", self.command);
        writer.write(&name, |w| {
            serde_json::to_writer_pretty(&mut *w, &self).map_err(|e| Error::Config(e.to_string()))?;
            writeln!(w).map_err(|e| Error::io(&name, e))
        })
    }
}

/// SHA-256 over a list of key/value pairs, for commands without a config file.
pub fn hash_parts<'a>(parts: impl IntoIterator<Item = (&'a str, String)>) -> String {
    let mut h = Sha256::new();
    for (k, v) in parts {
        h.update(k.as_bytes());
        h.update([0]);
        h.update(v.as_bytes());
        h.update([0]);
    }
    hex::encode(h.finalize())
}

fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lock_is_exclusive_and_released() {
        let dir = tempfile::tempdir().unwrap();
        let lock = OutputLock::acquire(dir.path()).unwrap();
        assert!(matches!(OutputLock::acquire(dir.path()), Err(Error::Config(_))));
        drop(lock);
        assert!(OutputLock::acquire(dir.path()).is_ok());
    }

    #[test]
    fn failed_write_leaves_partial() {
        let dir = tempfile::tempdir().unwrap();
        let mut w = ArtifactWriter::new(dir.path()).unwrap();
        let err = w.write("a.csv", |out| {
            out.write_all(b"half").unwrap();
            Err(Error::EmptyInput("boom".into()))
        });
        assert!(err.is_err());
        assert!(dir.path().join("a.csv.partial").exists());
        assert!(!dir.path().join("a.csv").exists());
        assert!(w.entries().is_empty());
    }

    #[test]
    fn successful_write_is_hashed() {
        let dir = tempfile::tempdir().unwrap();
        let mut w = ArtifactWriter::new(dir.path()).unwrap();
        w.write("sub/b.txt", |out| out.write_all(b"abc").map_err(|e| Error::io("b", e))).unwrap();
        assert_eq!(fs::read_to_string(dir.path().join("sub/b.txt")).unwrap(), "abc");
        let e = &w.entries()[0];
        assert_eq!(e.sha256, "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
        assert_eq!(e.bytes, 3);
        assert!(w.write("../x", |_| Ok(())).is_err());
    }

    #[test]
    fn manifest_lists_artifacts() {
        let dir = tempfile::tempdir().unwrap();
        let mut w = ArtifactWriter::new(dir.path()).unwrap();
        w.write("x.csv", |out| out.write_all(b"1\n").map_err(|e| Error::io("x", e))).unwrap();
        let mut m = RunManifest::start("test", "h", Some(1));
        m.count("rows", 4);
        let path = m.finish(&mut w).unwrap();
        let back: RunManifest = serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap();
        assert_eq!(back.artifacts.len(), 1);
        assert_eq!(back.row_counts["rows"], 4);
    }
}
