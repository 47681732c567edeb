use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use disperse::table::Table;
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

/// One declared check with its measured value.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: &str, passed: bool, detail: impl Into<String>) -> Self {
        Self { name: name.to_string(), passed, detail: detail.into() }
    }

    /// `value < limit`; NaN fails.
    pub fn below(name: &str, value: f64, limit: f64) -> Self {
        Self::new(name, value < limit, format!("{value:.6e} < {limit:.1e}"))
    }

    pub fn line(&self) -> String {
        format!("{} {} ({})", if self.passed { "PASS" } else { "FAIL" }, self.name, self.detail)
    }
}

/// Everything a subcommand produces before it is written out.
#[derive(Debug, Default)]
pub struct Report {
    pub checks: Vec<Check>,
    pub tables: Vec<(String, Table)>,
    pub summary: serde_json::Map<String, Value>,
}

impl Report {
    pub fn check(&mut self, check: Check) {
        self.checks.push(check);
    }

    pub fn table(&mut self, name: &str, table: Table) {
        self.tables.push((name.to_string(), table));
    }

    pub fn note<T: Serialize>(&mut self, key: &str, value: T) {
        self.summary.insert(key.to_string(), serde_json::to_value(value).expect("serializable summary"));
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

pub fn digest(text: &str) -> String {
    Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    subcommand: &'a str,
    config_digest: String,
    config: &'a str,
    outputs: Vec<String>,
    timings: Value,
    checks: &'a [Check],
    passed: bool,
}

/// Writes `<name>.csv` per table, `summary.json` and `manifest.json`. Files
/// are written one at a time in a fixed order.
pub fn write_outputs(
    out: &Path,
    subcommand: &str,
    resolved: &str,
    report: &Report,
    elapsed: Duration,
) -> std::io::Result<PathBuf> {
    fs::create_dir_all(out)?;
    let mut outputs = Vec::new();
    for (name, table) in &report.tables {
        let file = format!("{name}.csv");
        fs::write(out.join(&file), table.to_csv())?;
        outputs.push(file);
    }
    let summary = serde_json::to_string_pretty(&Value::Object(report.summary.clone()))?;
    fs::write(out.join("summary.json"), summary + "\n")?;
    outputs.push("summary.json".into());
    fs::write(out.join("config.toml"), resolved)?;
    outputs.push("config.toml".into());
    let manifest = Manifest {
        subcommand,
        config_digest: digest(resolved),
        config: resolved,
        outputs,
        timings: json!({ "wall_seconds": elapsed.as_secs_f64() }),
        checks: &report.checks,
        passed: report.passed(),
    };
    let path = out.join("manifest.json");
    fs::write(&path, serde_json::to_string_pretty(&manifest)? + "\n")?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_is_sha256_hex() {
        assert_eq!(digest(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    }

    #[test]
    fn nan_never_passes() {
        assert!(!Check::below("x", f64::NAN, 1.0).passed);
        assert!(Check::below("x", 0.5, 1.0).passed);
    }
}
