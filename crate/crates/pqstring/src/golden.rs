//! Reference equations stored as `name = expr` text files.

use std::collections::BTreeMap;
use std::path::PathBuf;

use crate::diffpoly::{parse_assignments_with, DiffPoly};
use crate::error::{Error, Result};
use crate::gdtools::omega_hook;
use crate::hirota::bracket;

/// Environment variable overriding the golden-file root.
pub const GOLDEN_ENV: &str = "PQSTRING_GOLDEN_DIR";

pub fn golden_dir() -> PathBuf {
    std::env::var_os(GOLDEN_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("golden"))
}

/// Functions available in golden expressions: `omega<j>(f)` and the bracket
/// `br(f, g) = f_x g − f g_x`.
pub fn hook(name: &str, args: &[DiffPoly]) -> Option<Result<DiffPoly>> {
    if name == "br" {
        return Some(match args {
            [f, g] => Ok(bracket(f, g)),
            _ => Err(Error::InvalidInput("br takes two arguments".into())),
        });
    }
    omega_hook(name, args)
}

/// Loads `<root>/<name>.txt` with [`hook`] available in expressions.
pub fn load(name: &str) -> Result<BTreeMap<String, DiffPoly>> {
    let path = golden_dir().join(format!("{name}.txt"));
    let src = std::fs::read_to_string(&path)
        .map_err(|e| Error::InvalidInput(format!("cannot read golden file {}: {e}", path.display())))?;
    parse_assignments_with(&src, &hook)
}

/// Fetches one entry, failing with the file and key in the message.
pub fn entry(map: &BTreeMap<String, DiffPoly>, key: &str) -> Result<DiffPoly> {
    map.get(key)
        .cloned()
        .ok_or_else(|| Error::InvalidInput(format!("golden entry `{key}` missing")))
}
