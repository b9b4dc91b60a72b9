use std::fs::{File, OpenOptions};
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;

/// An append-only file of JSON lines.
#[derive(Debug, Clone)]
pub struct EventLog {
    path: PathBuf,
    /// Flush to disk before an append returns.
    durable: bool,
}

impl EventLog {
    pub fn new(path: PathBuf, durable: bool) -> Self {
        EventLog { path, durable }
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    /// Reads every record. A final line cut short by a crash is dropped and
    /// trimmed from the file so later appends start on a clean line.
    pub fn load<T: DeserializeOwned>(&self) -> Result<Vec<T>, String> {
        let mut bytes = Vec::new();
        match File::open(&self.path) {
            Ok(mut f) => f.read_to_end(&mut bytes).map_err(|e| self.err(e))?,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
            Err(e) => return Err(self.err(e)),
        };
        let complete = bytes.iter().rposition(|&b| b == b'\n').map_or(0, |i| i + 1);
        if complete < bytes.len() {
            let tail = &bytes[complete..];
            if serde_json::from_slice::<T>(tail).is_err() {
                tracing::warn!(path = %self.path.display(), "dropping torn final record");
                OpenOptions::new()
                    .write(true)
                    .open(&self.path)
                    .and_then(|f| f.set_len(complete as u64))
                    .map_err(|e| self.err(e))?;
                bytes.truncate(complete);
            } else {
                OpenOptions::new().append(true).open(&self.path).and_then(|mut f| f.write_all(b"\n")).map_err(|e| self.err(e))?;
            }
        }
        let text = std::str::from_utf8(&bytes).map_err(|e| format!("{}: {e}", self.path.display()))?;
        text.lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
            .map(|(n, l)| serde_json::from_str(l).map_err(|e| format!("{} line {}: {e}", self.path.display(), n + 1)))
            .collect()
    }

    /// Appends all records with a single write.
    pub fn append<T: Serialize>(&self, records: &[T]) -> Result<(), String> {
        if records.is_empty() {
            return Ok(());
        }
        let mut buf = Vec::new();
        for record in records {
            serde_json::to_writer(&mut buf, record).map_err(|e| e.to_string())?;
            buf.push(b'\n');
        }
        let mut file = OpenOptions::new().create(true).append(true).open(&self.path).map_err(|e| self.err(e))?;
        file.write_all(&buf).map_err(|e| self.err(e))?;
        if self.durable {
            file.sync_data().map_err(|e| self.err(e))?;
        }
        Ok(())
    }

    fn err(&self, e: std::io::Error) -> String {
        format!("{}: {e}", self.path.display())
    }
}
