//! Append-only JSONL history, one entry per line, rotated by size.
//!
//! The live file is `history.jsonl`; rotated files are `history.NNNNNN.jsonl`
//! with increasing sequence numbers. Every append is fsynced before it
//! returns, so an entry the caller saw acknowledged survives a crash. A torn
//! final line (crash mid-write) is cut off when the log is reopened and
//! skipped by readers.

use std::fs::{self, File, OpenOptions};
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use chrono::{DateTime, Utc};
use tracing::warn;

use crate::verdict::{HistoryEntry, UserAction, Verdict};

pub const CURRENT: &str = "history.jsonl";
pub const DEFAULT_MAX_BYTES: u64 = 8 * 1024 * 1024;

struct Writer {
    file: File,
    len: u64,
    last: Option<DateTime<Utc>>,
    next_seq: u64,
}

pub struct HistoryLog {
    dir: PathBuf,
    max_bytes: u64,
    writer: Mutex<Writer>,
}

fn rotated_seq(name: &str) -> Option<u64> {
    let mid = name.strip_prefix("history.")?.strip_suffix(".jsonl")?;
    if mid.len() == 6 && mid.bytes().all(|b| b.is_ascii_digit()) {
        mid.parse().ok()
    } else {
        None
    }
}

/// Rotated files, oldest first.
fn rotated_files(dir: &Path) -> io::Result<Vec<(u64, PathBuf)>> {
    let mut out = Vec::new();
    for e in fs::read_dir(dir)? {
        let e = e?;
        if let Some(seq) = e.file_name().to_str().and_then(rotated_seq) {
            out.push((seq, e.path()));
        }
    }
    out.sort();
    Ok(out)
}

fn sync_dir(dir: &Path) -> io::Result<()> {
    File::open(dir)?.sync_all()
}

/// Parse every complete line; a line that fails to parse is logged and skipped.
fn parse_lines(path: &Path, bytes: &[u8]) -> Vec<HistoryEntry> {
    let mut out = Vec::new();
    for (i, line) in bytes.split(|&b| b == b'\n').enumerate() {
        if line.iter().all(u8::is_ascii_whitespace) {
            continue;
        }
        match serde_json::from_slice::<HistoryEntry>(line) {
            Ok(e) => out.push(e),
            Err(e) => {
                warn!(file = %path.display(), line = i + 1, error = %e, "skipping history line")
            }
        }
    }
    out
}

impl HistoryLog {
    pub fn open(dir: &Path, max_bytes: u64) -> io::Result<Self> {
        fs::create_dir_all(dir)?;
        let path = dir.join(CURRENT);
        let mut file = OpenOptions::new()
            .create(true)
            .read(true)
            .append(true)
            .open(&path)?;
        let bytes = fs::read(&path)?;
        let keep = match bytes.iter().rposition(|&b| b == b'\n') {
            Some(i) => i + 1,
            None => 0,
        };
        if keep < bytes.len() {
            warn!(
                file = %path.display(),
                dropped = bytes.len() - keep,
                "truncating torn history line"
            );
            file.set_len(keep as u64)?;
            file.sync_all()?;
        }
        let last = parse_lines(&path, &bytes[..keep])
            .last()
            .map(|e| e.recorded_at);
        let next_seq = rotated_files(dir)?.last().map_or(1, |(s, _)| s + 1);
        file.flush()?;
        Ok(Self {
            dir: dir.to_path_buf(),
            max_bytes: max_bytes.max(1),
            writer: Mutex::new(Writer {
                file,
                len: keep as u64,
                last,
                next_seq,
            }),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// Append and fsync. Returns the stored entry once it is durable.
    pub fn append(&self, verdict: Verdict, user_action: UserAction) -> io::Result<HistoryEntry> {
        let mut w = self.writer.lock().unwrap_or_else(|p| p.into_inner());
        let now = Utc::now();
        let recorded_at = match w.last {
            Some(last) if last > now => last,
            _ => now,
        };
        let entry = HistoryEntry {
            verdict,
            user_action,
            recorded_at,
        };
        let mut line = serde_json::to_vec(&entry).map_err(io::Error::other)?;
        line.push(b'\n');

        if w.len > 0 && w.len + line.len() as u64 > self.max_bytes {
            self.rotate(&mut w)?;
        }
        w.file.write_all(&line)?;
        w.file.sync_data()?;
        w.len += line.len() as u64;
        w.last = Some(recorded_at);
        Ok(entry)
    }

    fn rotate(&self, w: &mut Writer) -> io::Result<()> {
        w.file.sync_all()?;
        let target = self.dir.join(format!("history.{:06}.jsonl", w.next_seq));
        fs::rename(self.dir.join(CURRENT), &target)?;
        w.file = OpenOptions::new()
            .create(true)
            .read(true)
            .append(true)
            .open(self.dir.join(CURRENT))?;
        sync_dir(&self.dir)?;
        w.next_seq += 1;
        w.len = 0;
        w.last = None;
        Ok(())
    }

    /// Newest first, holding the writer lock so a rotation cannot slip in.
    pub fn recent(&self, limit: usize) -> io::Result<Vec<HistoryEntry>> {
        let _w = self.writer.lock().unwrap_or_else(|p| p.into_inner());
        read_history(&self.dir, limit)
    }
}

/// Read up to `limit` entries, newest first, without taking the log over.
/// A missing directory reads as empty.
pub fn read_history(dir: &Path, limit: usize) -> io::Result<Vec<HistoryEntry>> {
    if !dir.exists() || limit == 0 {
        return Ok(Vec::new());
    }
    let mut files = vec![dir.join(CURRENT)];
    files.extend(rotated_files(dir)?.into_iter().rev().map(|(_, p)| p));
    let mut out = Vec::new();
    for path in files {
        let bytes = match fs::read(&path) {
            Ok(b) => b,
            Err(e) if e.kind() == io::ErrorKind::NotFound => continue,
            Err(e) => return Err(e),
        };
        let mut entries = parse_lines(&path, &bytes);
        entries.reverse();
        for e in entries {
            out.push(e);
            if out.len() == limit {
                return Ok(out);
            }
        }
    }
    Ok(out)
}
