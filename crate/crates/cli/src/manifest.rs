use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use sha2::{Digest, Sha256};

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).with_context(|| format!("hashing {}", path.display()))?;
    Ok(hex::encode(Sha256::digest(bytes)))
}

pub fn manifest_path(artifact: &Path) -> PathBuf {
    let mut name = artifact.as_os_str().to_owned();
    name.push(".manifest.toml");
    PathBuf::from(name)
}

/// Writes `<artifact>.manifest.toml` with the command, input hashes, output
/// hash and resolved configuration. Contains nothing time-dependent.
pub fn write_manifest(artifact: &Path, command: &str, inputs: &[&Path], config_toml: &str) -> Result<()> {
    let mut s = format!("command = \"{command}\"\noutput_sha256 = \"{}\"\n\n[inputs]\n", sha256_file(artifact)?);
    for input in inputs {
        s.push_str(&format!("{:?} = \"{}\"\n", input.display().to_string(), sha256_file(input)?));
    }
    s.push_str("\n[config]\n");
    s.push_str(&indent_tables(config_toml));
    let path = manifest_path(artifact);
    std::fs::write(&path, s).with_context(|| format!("writing {}", path.display()))
}

// Nest the config's own tables under [config].
fn indent_tables(config: &str) -> String {
    config
        .lines()
        .map(|l| match l.strip_prefix('[') {
            Some(rest) => format!("[config.{rest}\n"),
            None => format!("{l}\n"),
        })
        .collect()
}
