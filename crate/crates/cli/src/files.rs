use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use qrank_core::io::{parse_mask, parse_q, parse_tensor};
use qrank_core::{ObservationMask, OrthoMatrix, Tensor3};
use tempfile::NamedTempFile;

/// Orthonormality tolerance for user-supplied transforms.
pub const Q_FILE_TOL: f64 = 1e-6;

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

pub fn read_tensor(path: &Path) -> Result<Tensor3> {
    parse_tensor(&read(path)?).with_context(|| format!("{}", path.display()))
}

pub fn read_mask(path: &Path) -> Result<ObservationMask> {
    parse_mask(&read(path)?).with_context(|| format!("{}", path.display()))
}

pub fn read_q(path: &Path) -> Result<OrthoMatrix> {
    parse_q(&read(path)?, Q_FILE_TOL).with_context(|| format!("{}", path.display()))
}

/// Writes through a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let ctx = || format!("cannot write {}", path.display());
    let mut tmp = NamedTempFile::new_in(dir).with_context(ctx)?;
    tmp.write_all(contents.as_bytes()).with_context(ctx)?;
    tmp.as_file().sync_all().with_context(ctx)?;
    tmp.persist(path).map_err(|e| e.error).with_context(ctx)?;
    Ok(())
}
