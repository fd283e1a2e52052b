//! Model checkpoint file format.
//!
//! Layout, all integers and floats little-endian:
//!
//! ```text
//! offset  size            field
//! 0       8               magic b"COMBIGCN"
//! 8       4               format version (u32, currently 1)
//! 12      8               n_users (u64)
//! 20      8               n_items (u64)
//! 28      8               dim (u64)
//! 36      n_users*dim*8   user embeddings, row-major f64
//! ...     n_items*dim*8   item embeddings, row-major f64
//! ```

use crate::error::{CliError, CliResult};
use combigcn_core::{DenseMatrix, EmbeddingTable};
use std::fs;
use std::path::Path;

pub const MAGIC: [u8; 8] = *b"COMBIGCN";
pub const VERSION: u32 = 1;

pub fn write_checkpoint(path: &Path, phi: &EmbeddingTable) -> CliResult<()> {
    let n = phi.n_users();
    let m = phi.n_items();
    let d = phi.dim();
    let mut bytes = Vec::with_capacity(36 + (n + m) * d * 8);
    bytes.extend_from_slice(&MAGIC);
    bytes.extend_from_slice(&VERSION.to_le_bytes());
    bytes.extend_from_slice(&(n as u64).to_le_bytes());
    bytes.extend_from_slice(&(m as u64).to_le_bytes());
    bytes.extend_from_slice(&(d as u64).to_le_bytes());
    for &v in phi.user_embed().data() {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    for &v in phi.item_embed().data() {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    fs::write(path, bytes)?;
    Ok(())
}

pub fn read_checkpoint(path: &Path) -> CliResult<EmbeddingTable> {
    let bytes = fs::read(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    if bytes.len() < 36 || bytes[..8] != MAGIC {
        return Err(CliError::Input(format!(
            "bad checkpoint header in {}",
            path.display()
        )));
    }
    let version = u32::from_le_bytes(bytes[8..12].try_into().expect("sized slice"));
    if version != VERSION {
        return Err(CliError::Input(format!(
            "unsupported checkpoint version {version} (expected {VERSION})"
        )));
    }
    let read_u64 = |at: usize| u64::from_le_bytes(bytes[at..at + 8].try_into().expect("sized"));
    let n = read_u64(12) as usize;
    let m = read_u64(20) as usize;
    let d = read_u64(28) as usize;
    let expected = 36 + (n + m) * d * 8;
    if bytes.len() != expected {
        return Err(CliError::Input(format!(
            "checkpoint {} is {} bytes, expected {expected} for n={n} m={m} d={d}",
            path.display(),
            bytes.len()
        )));
    }
    let mut floats = bytes[36..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("sized")));
    let user: Vec<f64> = floats.by_ref().take(n * d).collect();
    let item: Vec<f64> = floats.collect();
    let user = DenseMatrix::from_vec(n, d, user).map_err(|e| CliError::Input(e.to_string()))?;
    let item = DenseMatrix::from_vec(m, d, item).map_err(|e| CliError::Input(e.to_string()))?;
    EmbeddingTable::from_parts(user, item).map_err(|e| CliError::Input(e.to_string()))
}
