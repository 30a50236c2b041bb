//! Plain key=value config files and the flags > config > defaults merge.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, Context, Result};

const KNOWN_KEYS: &[&str] = &[
    "cube",
    "segmentation",
    "K",
    "alpha",
    "lambda",
    "T",
    "burn_in",
    "seed",
    "threads",
    "mode",
    "estimator",
    "seeds_file",
    "block",
    "out_dir",
];

/// Parsed config file contents.
#[derive(Debug, Default)]
pub struct ConfigFile {
    values: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config file {}", path.display()))?;
        let mut values = BTreeMap::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                bail!(
                    "{}: line {}: expected key=value",
                    path.display(),
                    lineno + 1
                );
            };
            let key = key.trim();
            if !KNOWN_KEYS.contains(&key) {
                bail!("{}: unknown config key `{key}`", path.display());
            }
            values.insert(key.to_string(), value.trim().to_string());
        }
        Ok(Self { values })
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        match self.values.get(key) {
            None => Ok(None),
            Some(raw) => match raw.parse::<T>() {
                Ok(v) => Ok(Some(v)),
                Err(e) => bail!("config key `{key}`: invalid value `{raw}`: {e}"),
            },
        }
    }

    pub fn get_path(&self, key: &str) -> Option<PathBuf> {
        self.values.get(key).map(PathBuf::from)
    }
}

/// flags > config > default.
pub fn resolve<T>(flag: Option<T>, config: Option<T>, default: T) -> T {
    flag.or(config).unwrap_or(default)
}

/// flags > config, no default.
pub fn resolve_required<T>(flag: Option<T>, config: Option<T>, what: &str) -> Result<T> {
    flag.or(config)
        .with_context(|| format!("missing required option --{what} (or config key)"))
}

/// Threads: flag > config > PMLDA_THREADS env > 1.
pub fn resolve_threads(flag: Option<usize>, config: Option<usize>) -> Result<usize> {
    let from_env = match std::env::var("PMLDA_THREADS") {
        Ok(raw) => Some(
            raw.parse::<usize>()
                .with_context(|| format!("PMLDA_THREADS: invalid value `{raw}`"))?,
        ),
        Err(_) => None,
    };
    let threads = flag.or(config).or(from_env).unwrap_or(1);
    if threads == 0 {
        bail!("threads must be >= 1");
    }
    Ok(threads)
}
