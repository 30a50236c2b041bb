pub mod evaluate;
pub mod generate;
pub mod unmix;

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{bail, Context, Result};

/// Read a plain key=value file (comments and blank lines allowed).
pub fn read_key_values(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))?;
    let mut map = BTreeMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            bail!("{}: line {}: expected key=value", path.display(), lineno + 1);
        };
        map.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(map)
}
