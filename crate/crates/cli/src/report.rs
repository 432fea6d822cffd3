//! Report assembly and emission.
//!
//! A run produces one deterministic body — JSON object or CSV table —
//! plus wall-clock timings. The body goes to stdout (and `--out`);
//! timings go to stderr only, so byte-comparing stdout across runs is the
//! reproducibility check.

use std::fs;
use std::path::Path;

use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::system_file::CliError;

pub struct RunReport {
    /// Deterministic JSON body; keys serialize in sorted order.
    pub body: Value,
    /// The same data as one flat table (header first) for `--format csv`.
    pub csv: Vec<Vec<String>>,
    /// Labelled wall-clock milliseconds; never part of the body.
    pub timings: Vec<(String, f64)>,
}

/// Hex SHA-256 of the raw input file, recorded in every body so a report
/// can be tied back to the exact document that produced it.
pub fn input_digest(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    format!("{:x}", hasher.finalize())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

fn render(report: &RunReport, format: Format) -> String {
    match format {
        Format::Json => {
            let mut text = serde_json::to_string_pretty(&report.body)
                .expect("report bodies are plain JSON values");
            text.push('\n');
            text
        }
        Format::Csv => {
            let mut text = String::new();
            for row in &report.csv {
                text.push_str(&row.join(","));
                text.push('\n');
            }
            text
        }
    }
}

/// Prints the body to stdout, mirrors it to `--out` when given, and sends
/// timings to stderr.
pub fn emit(report: &RunReport, format: Format, out: Option<&Path>) -> Result<(), CliError> {
    let text = render(report, format);
    print!("{text}");
    if let Some(path) = out {
        fs::write(path, &text)
            .map_err(|e| CliError::validation(format!("writing {}: {e}", path.display())))?;
    }
    for (label, ms) in &report.timings {
        eprintln!("# timing {label}: {ms:.2} ms");
    }
    Ok(())
}
