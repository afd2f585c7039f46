//! CSV artifacts, atomic file writes and run manifests.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

/// Real number rounded to 12 significant digits, printed in the shortest
/// form that round-trips the rounded value.
pub fn real(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    if x == 0.0 {
        return "0".into();
    }
    let rounded: f64 = format!("{x:.11e}").parse().expect("formatted float parses");
    let a = rounded.abs();
    if (1e-4..1e12).contains(&a) {
        format!("{rounded}")
    } else {
        format!("{rounded:e}")
    }
}

/// Real number with six decimals, for the oracle table.
pub fn fixed6(x: f64) -> String {
    // Avoid printing "-0.000000".
    let s = format!("{x:.6}");
    if s.trim_start_matches('-')
        .chars()
        .all(|c| c == '0' || c == '.')
    {
        "0.000000".into()
    } else {
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Csv {
    text: String,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        Self {
            text: format!("{}\n", header.join(",")),
        }
    }

    pub fn row<S: AsRef<str>>(&mut self, cells: &[S]) {
        let cells: Vec<&str> = cells.iter().map(AsRef::as_ref).collect();
        self.text.push_str(&cells.join(","));
        self.text.push('\n');
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }
}

/// Writes through a temporary file in the same directory and renames it
/// into place, so readers never see a partial file.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let name = path
        .file_name()
        .context("artifact path has no file name")?
        .to_string_lossy();
    let tmp = dir.join(format!(".{name}.tmp{}", std::process::id()));
    {
        let mut f =
            fs::File::create(&tmp).with_context(|| format!("creating {}", tmp.display()))?;
        f.write_all(contents.as_bytes())?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path).with_context(|| format!("renaming into {}", path.display()))?;
    Ok(())
}

/// Collects the files a command writes.
#[derive(Debug)]
pub struct Artifacts {
    dir: PathBuf,
    written: Vec<String>,
}

impl Artifacts {
    pub fn new(dir: &Path) -> Self {
        Self {
            dir: dir.to_path_buf(),
            written: Vec::new(),
        }
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn write(&mut self, name: &str, contents: &str) -> Result<PathBuf> {
        let path = self.path(name);
        write_atomic(&path, contents)?;
        self.written.push(name.to_string());
        Ok(path)
    }

    pub fn names(&self) -> &[String] {
        &self.written
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub command_line: Vec<String>,
    /// SHA-256 of the resolved configuration text.
    pub config_digest: String,
    pub seed: u64,
    pub deterministic: bool,
    pub threads: usize,
    pub artifacts: Vec<String>,
    pub wall_clock_seconds: f64,
    pub version: String,
}

pub fn digest(text: &str) -> String {
    Sha256::digest(text.as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

impl RunManifest {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        command: &str,
        config_text: &str,
        seed: u64,
        deterministic: bool,
        threads: usize,
        artifacts: &Artifacts,
        elapsed: Duration,
    ) -> Self {
        Self {
            command: command.into(),
            command_line: std::env::args().collect(),
            config_digest: digest(config_text),
            seed,
            deterministic,
            threads,
            artifacts: artifacts.names().to_vec(),
            wall_clock_seconds: elapsed.as_secs_f64(),
            version: env!("CARGO_PKG_VERSION").into(),
        }
    }

    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join(format!("{}.manifest.toml", self.command));
        write_atomic(&path, &toml::to_string(self).expect("manifest serializes"))?;
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(real(0.1 + 0.2), "0.3");
        assert_eq!(real(1.0 / 3.0), "0.333333333333");
        assert_eq!(real(2.0 / 3.0), "0.666666666667");
        assert_eq!(real(1.234e-7), "1.234e-7");
        assert_eq!(real(-1.0), "-1");
        assert_eq!(real(0.0), "0");
        assert_eq!(real(f64::NAN), "NaN");
    }

    #[test]
    fn six_decimals() {
        assert_eq!(fixed6(2.0 / 3.0), "0.666667");
        assert_eq!(fixed6(-1e-12), "0.000000");
        assert_eq!(fixed6(-1.0 / 3.0), "-0.333333");
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = std::env::temp_dir().join(format!("qtemporal-out-{}", std::process::id()));
        let p = dir.join("a.csv");
        write_atomic(&p, "x\n").unwrap();
        write_atomic(&p, "y\n").unwrap();
        assert_eq!(fs::read_to_string(&p).unwrap(), "y\n");
        let leftovers = fs::read_dir(&dir).unwrap().count();
        assert_eq!(leftovers, 1);
        fs::remove_dir_all(dir).unwrap();
    }

    #[test]
    fn digest_is_sha256() {
        assert_eq!(
            digest(""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
    }
}
