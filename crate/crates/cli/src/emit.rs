//! Artifacts and the summary lines.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::Context;
use caustica::suite::{Report, Table};
use serde::Serialize;
use serde_json::{json, Value};

pub const SCHEMA_VERSION: u32 = 1;

pub fn write_table(table: &Table, path: &Path) -> anyhow::Result<()> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut w = csv::Writer::from_writer(BufWriter::new(file));
    w.write_record(&table.header)?;
    for row in &table.rows {
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct Document<'a> {
    schema_version: u32,
    command: &'a str,
    title: &'a str,
    passed: bool,
    seed: u64,
    checks: &'a [caustica::suite::Check],
    meta: &'a std::collections::BTreeMap<String, String>,
    #[serde(skip_serializing_if = "Value::is_null")]
    extra: Value,
}

pub fn write_json(command: &str, report: &Report, seed: u64, extra: Value, path: &Path) -> anyhow::Result<()> {
    let doc = Document {
        schema_version: SCHEMA_VERSION,
        command,
        title: &report.title,
        passed: report.passed(),
        seed,
        checks: &report.checks,
        meta: &report.meta,
        extra,
    };
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, &doc)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

/// Where the CSV and JSON of one run go.
pub struct Outputs {
    pub csv: Option<PathBuf>,
    pub json: PathBuf,
}

impl Outputs {
    /// `out` names the table; the JSON sits next to it. A `.json` path names
    /// the JSON, and the table then takes the `.csv` sibling.
    pub fn from(out: &Path) -> Self {
        if out.extension().is_some_and(|e| e == "json") {
            Self {
                csv: Some(out.with_extension("csv")),
                json: out.to_path_buf(),
            }
        } else {
            Self {
                csv: Some(out.to_path_buf()),
                json: out.with_extension("json"),
            }
        }
    }
}

/// Prints the checks and writes the artifacts; returns whether all passed.
pub fn finish(command: &str, report: &Report, seed: u64, extra: Value, out: &Outputs) -> anyhow::Result<bool> {
    for c in &report.checks {
        println!("{c}");
    }
    if let Some(csv) = &out.csv {
        if !report.table.is_empty() {
            write_table(&report.table, csv)?;
            println!("wrote {}", csv.display());
        }
    }
    write_json(command, report, seed, extra, &out.json)?;
    println!("wrote {}", out.json.display());
    Ok(report.passed())
}

pub fn fits_json(fits: &[(String, caustica::kernel_probe::SingularityFit)]) -> Value {
    Value::Array(fits.iter().map(|(m, f)| json!({ "model": m, "fit": f })).collect())
}
