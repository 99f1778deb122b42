//! Binary frontier snapshots for resuming a long enumeration.
//!
//! Layout (little endian): 8-byte magic, `u32` version, `u8` layers,
//! `u8` mode, two padding bytes, `u32` depth, `u64` explored states,
//! `u64` largest frontier, `u64` state count, the packed states, and a
//! SHA-256 digest of everything before it.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use sha2::{Digest, Sha256};
use thiserror::Error;

use super::state::Packed;
use super::Mode;

const MAGIC: &[u8; 8] = b"CHIPFCK\0";
pub const CHECKPOINT_VERSION: u32 = 1;
const HEADER_LEN: usize = 8 + 4 + 4 + 4 + 8 + 8 + 8;

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("checkpoint i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("not a frontier checkpoint (bad magic)")]
    BadMagic,
    #[error("checkpoint version {found} is not supported (expected {CHECKPOINT_VERSION})")]
    VersionMismatch { found: u32 },
    #[error("checkpoint is truncated")]
    Truncated,
    #[error("checkpoint digest does not match its contents")]
    ChecksumMismatch,
    #[error("checkpoint has unknown mode byte {0}")]
    BadMode(u8),
    #[error("checkpoint is for {found_ell} layers in {found_mode} mode, not {ell} layers in {mode} mode")]
    ParameterMismatch { ell: u32, mode: Mode, found_ell: u32, found_mode: Mode },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Checkpoint {
    pub ell: u32,
    pub mode: Mode,
    pub depth: u32,
    pub explored_states: u64,
    pub max_frontier: u64,
    pub(crate) frontier: Vec<Packed>,
}

impl Checkpoint {
    pub fn frontier_len(&self) -> usize {
        self.frontier.len()
    }

    fn encode_header(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(HEADER_LEN);
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
        out.push(self.ell as u8);
        out.push(match self.mode {
            Mode::Full => 0,
            Mode::Scheduled => 1,
        });
        out.extend_from_slice(&[0, 0]);
        out.extend_from_slice(&self.depth.to_le_bytes());
        out.extend_from_slice(&self.explored_states.to_le_bytes());
        out.extend_from_slice(&self.max_frontier.to_le_bytes());
        out.extend_from_slice(&(self.frontier.len() as u64).to_le_bytes());
        out
    }

    /// Writes to a sibling temporary file and renames it into place.
    pub fn save(&self, path: &Path) -> Result<(), CheckpointError> {
        let tmp = path.with_extension("partial");
        {
            let mut hasher = Sha256::new();
            let mut out = BufWriter::new(File::create(&tmp)?);
            let header = self.encode_header();
            hasher.update(&header);
            out.write_all(&header)?;
            for state in &self.frontier {
                let bytes = state.to_le_bytes();
                hasher.update(bytes);
                out.write_all(&bytes)?;
            }
            out.write_all(&hasher.finalize())?;
            out.flush()?;
        }
        std::fs::rename(&tmp, path)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Checkpoint, CheckpointError> {
        let mut bytes = Vec::new();
        BufReader::new(File::open(path)?).read_to_end(&mut bytes)?;
        Checkpoint::decode(&bytes)
    }

    fn decode(bytes: &[u8]) -> Result<Checkpoint, CheckpointError> {
        if bytes.len() < 8 || &bytes[..8] != MAGIC {
            return Err(CheckpointError::BadMagic);
        }
        if bytes.len() < HEADER_LEN {
            return Err(CheckpointError::Truncated);
        }
        let u32_at = |at: usize| u32::from_le_bytes(bytes[at..at + 4].try_into().unwrap());
        let u64_at = |at: usize| u64::from_le_bytes(bytes[at..at + 8].try_into().unwrap());
        let version = u32_at(8);
        if version != CHECKPOINT_VERSION {
            return Err(CheckpointError::VersionMismatch { found: version });
        }
        let mode = match bytes[13] {
            0 => Mode::Full,
            1 => Mode::Scheduled,
            other => return Err(CheckpointError::BadMode(other)),
        };
        let count = u64_at(36) as usize;
        let body_end = count
            .checked_mul(8)
            .and_then(|n| n.checked_add(HEADER_LEN))
            .ok_or(CheckpointError::Truncated)?;
        if bytes.len() != body_end + 32 {
            return Err(CheckpointError::Truncated);
        }
        if Sha256::digest(&bytes[..body_end]).as_slice() != &bytes[body_end..] {
            return Err(CheckpointError::ChecksumMismatch);
        }
        let frontier = bytes[HEADER_LEN..body_end]
            .chunks_exact(8)
            .map(|c| u64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        Ok(Checkpoint {
            ell: u32::from(bytes[12]),
            mode,
            depth: u32_at(16),
            explored_states: u64_at(20),
            max_frontier: u64_at(28),
            frontier,
        })
    }
}
