//! The interaction log file format: UTF-8 TSV, one `user<TAB>item` pair per
//! line, `#` lines ignored.

use crate::error::{CliError, CliResult};
use combigcn_core::{InteractionDataset, RawInteractionLog};
use std::fs;
use std::io::Write;
use std::path::Path;

pub fn read_interactions(path: &Path) -> CliResult<RawInteractionLog> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    let mut records = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let lineno = lineno + 1;
        let line = line.trim_end_matches('\r');
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut fields = line.split('\t');
        let user = fields.next().unwrap_or("");
        let item = fields.next().unwrap_or("");
        if user.is_empty() || item.is_empty() || fields.next().is_some() {
            return Err(CliError::Input(format!(
                "{}: line {lineno}: expected `user<TAB>item`, got {line:?}",
                path.display()
            )));
        }
        records.push((user.to_string(), item.to_string()));
    }
    Ok(RawInteractionLog::new(records))
}

/// Writes interactions in ascending (user id, item id) order, which keeps
/// repeated runs byte-identical.
pub fn write_interactions(path: &Path, ds: &InteractionDataset) -> CliResult<()> {
    let mut out = String::new();
    for (u, i) in ds.pairs() {
        out.push_str(ds.user_key(u));
        out.push('\t');
        out.push_str(ds.item_key(i));
        out.push('\n');
    }
    let mut file = fs::File::create(path)?;
    file.write_all(out.as_bytes())?;
    Ok(())
}
