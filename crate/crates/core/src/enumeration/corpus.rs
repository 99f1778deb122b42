//! JSON-lines corpus files: one header record, then one canonical
//! configuration per line in canonical-key order.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use super::{EnumerationMeta, Mode, StableSet};
use crate::labeled::LabeledConfig;

pub const CORPUS_FORMAT: &str = "chipfire-stable-set";
pub const CORPUS_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("corpus i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("corpus is empty (no header line)")]
    MissingHeader,
    #[error("line {line}: {detail}")]
    Malformed { line: usize, detail: String },
    #[error("line 1: corpus format {found:?} is not {CORPUS_FORMAT:?}")]
    WrongFormat { found: String },
    #[error("line 1: corpus version {found} is not supported (expected {CORPUS_VERSION})")]
    VersionMismatch { found: u32 },
    #[error("header promises {expected} configurations, body has {found}")]
    CountMismatch { expected: u64, found: u64 },
    #[error("body digest {found} does not match header digest {expected}")]
    ChecksumMismatch { expected: String, found: String },
    #[error("line {line}: configuration repeats an earlier one")]
    Duplicate { line: usize },
    #[error("line {line}: configuration is not stable")]
    NotStable { line: usize },
    #[error("line {line}: configuration has {found} chips, header says {expected}")]
    WrongChipCount { line: usize, expected: u32, found: u32 },
}

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    format: String,
    version: u32,
    ell: u32,
    count: u64,
    mode: Mode,
    explored_states: u64,
    max_frontier: u64,
    sha256: String,
}

fn body_digest<'a>(lines: impl IntoIterator<Item = &'a str>) -> String {
    let mut hasher = Sha256::new();
    for line in lines {
        hasher.update(line.as_bytes());
        hasher.update(b"\n");
    }
    hex::encode(hasher.finalize())
}

/// Writes `ss` as a corpus; the output is byte-identical for equal sets.
pub fn save(ss: &StableSet, path: &Path) -> Result<(), CorpusError> {
    let keys = ss.keys();
    let header = Header {
        format: CORPUS_FORMAT.to_string(),
        version: CORPUS_VERSION,
        ell: ss.ell,
        count: keys.len() as u64,
        mode: ss.meta.mode,
        explored_states: ss.meta.explored_states,
        max_frontier: ss.meta.max_frontier,
        sha256: body_digest(keys.iter().map(String::as_str)),
    };
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "{}", serde_json::to_string(&header).expect("header serializes"))?;
    for key in &keys {
        writeln!(out, "{key}")?;
    }
    out.flush()?;
    Ok(())
}

/// Reads a corpus back, checking the header, digest, and every member.
pub fn load(path: &Path) -> Result<StableSet, CorpusError> {
    let mut lines = BufReader::new(File::open(path)?).lines();
    let header_line = lines.next().ok_or(CorpusError::MissingHeader)??;
    let header: Header = serde_json::from_str(&header_line)
        .map_err(|e| CorpusError::Malformed { line: 1, detail: format!("bad header: {e}") })?;
    if header.format != CORPUS_FORMAT {
        return Err(CorpusError::WrongFormat { found: header.format });
    }
    if header.version != CORPUS_VERSION {
        return Err(CorpusError::VersionMismatch { found: header.version });
    }
    let n_chips = 1u32
        .checked_shl(header.ell)
        .filter(|_| header.ell >= 1 && header.ell < 32)
        .map(|p| p - 1)
        .ok_or_else(|| CorpusError::Malformed { line: 1, detail: format!("unusable layer count {}", header.ell) })?;

    let mut body = Vec::new();
    for (i, line) in lines.enumerate() {
        body.push((i + 2, line?));
    }
    let found = body_digest(body.iter().map(|(_, l)| l.as_str()));
    let mut seen = HashSet::new();
    let mut configs = Vec::with_capacity(body.len());
    for (line, text) in &body {
        let config = LabeledConfig::from_json(text)
            .map_err(|e| CorpusError::Malformed { line: *line, detail: e.to_string() })?;
        if config.n_chips() != n_chips {
            return Err(CorpusError::WrongChipCount { line: *line, expected: n_chips, found: config.n_chips() });
        }
        if !config.is_stable() {
            return Err(CorpusError::NotStable { line: *line });
        }
        if !seen.insert(config.canonical_json()) {
            return Err(CorpusError::Duplicate { line: *line });
        }
        configs.push(config);
    }
    if body.len() as u64 != header.count {
        return Err(CorpusError::CountMismatch { expected: header.count, found: body.len() as u64 });
    }
    if found != header.sha256 {
        return Err(CorpusError::ChecksumMismatch { expected: header.sha256, found });
    }
    let meta = EnumerationMeta {
        explored_states: header.explored_states,
        max_frontier: header.max_frontier,
        mode: header.mode,
    };
    Ok(StableSet::new(header.ell, configs, meta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::enumeration::enumerate;

    fn saved_three() -> (tempfile::TempDir, std::path::PathBuf, String) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("z3.jsonl");
        save(&enumerate(3, Mode::Full).unwrap(), &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        (dir, path, text)
    }

    #[test]
    fn round_trip_keeps_keys() {
        let (_dir, path, text) = saved_three();
        let loaded = load(&path).unwrap();
        assert_eq!(loaded.keys(), enumerate(3, Mode::Full).unwrap().keys());
        assert_eq!(text.lines().count(), 7);
        assert!(text.starts_with(r#"{"format":"chipfire-stable-set","version":1,"ell":3,"count":6,"mode":"full""#));
    }

    #[test]
    fn truncation_reports_a_line() {
        let (_dir, path, text) = saved_three();
        let cut = &text[..text.len() - 10];
        std::fs::write(&path, cut).unwrap();
        match load(&path) {
            Err(CorpusError::Malformed { line, .. }) => assert_eq!(line, 7),
            other => panic!("expected malformed line, got {other:?}"),
        }
    }

    #[test]
    fn dropped_line_is_a_count_mismatch() {
        let (_dir, path, text) = saved_three();
        let fewer: Vec<&str> = text.lines().take(6).collect();
        std::fs::write(&path, fewer.join("\n") + "\n").unwrap();
        assert!(matches!(load(&path), Err(CorpusError::CountMismatch { expected: 6, found: 5 })));
    }

    #[test]
    fn tampered_body_fails_the_digest() {
        let (_dir, path, text) = saved_three();
        let mut lines: Vec<String> = text.lines().map(str::to_string).collect();
        lines.swap(1, 2);
        std::fs::write(&path, lines.join("\n") + "\n").unwrap();
        assert!(matches!(load(&path), Err(CorpusError::ChecksumMismatch { .. })));
    }

    #[test]
    fn version_and_duplicates_are_rejected() {
        let (_dir, path, text) = saved_three();
        std::fs::write(&path, text.replacen("\"version\":1", "\"version\":9", 1)).unwrap();
        assert!(matches!(load(&path), Err(CorpusError::VersionMismatch { found: 9 })));

        let mut lines: Vec<String> = text.lines().map(str::to_string).collect();
        lines[2] = lines[1].clone();
        std::fs::write(&path, lines.join("\n") + "\n").unwrap();
        assert!(matches!(load(&path), Err(CorpusError::Duplicate { line: 3 })));
    }
}
