use std::fs;
use std::io::Write;
use std::path::PathBuf;

use anyhow::Context;
use serde_json::Value;

use crate::{Format, GlobalArgs};

/// A command's result in both output formats.
pub struct Report {
    pub json: Value,
    pub csv: String,
    /// Extra findings that do not fit the CSV table; printed to stderr in CSV mode.
    pub csv_side: Option<Value>,
    pub passed: bool,
}

impl Report {
    pub fn new(json: Value, csv: String) -> Self {
        Report {
            json,
            csv,
            csv_side: None,
            passed: true,
        }
    }
}

/// `--out` joined onto `--out-dir` (or `AVALANCHE_OUT_DIR`) when relative.
fn resolve(global: &GlobalArgs) -> Option<PathBuf> {
    let out = global.out.as_ref()?;
    match &global.out_dir {
        Some(dir) if out.is_relative() => Some(dir.join(out)),
        _ => Some(out.clone()),
    }
}

pub fn emit(report: &Report, global: &GlobalArgs) -> anyhow::Result<()> {
    let text = match global.format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&report.json)?;
            s.push('\n');
            s
        }
        Format::Csv => {
            if let Some(side) = &report.csv_side {
                eprintln!("{}", serde_json::to_string(side)?);
            }
            report.csv.clone()
        }
    };
    match resolve(global) {
        Some(path) => {
            if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                fs::create_dir_all(parent)
                    .with_context(|| format!("creating {}", parent.display()))?;
            }
            fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
        }
    }
    Ok(())
}
