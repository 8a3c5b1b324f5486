use std::io::Write;

use serde::Serialize;

use crate::config::Common;
use crate::CliError;

/// A CSV table with string cells.
pub struct Table {
    pub name: String,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: impl Into<String>, header: &[&'static str]) -> Self {
        Table { name: name.into(), header: header.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    fn write_to<W: Write>(&self, w: W) -> Result<(), CliError> {
        let mut csv = csv::Writer::from_writer(w);
        csv.write_record(&self.header)?;
        for r in &self.rows {
            csv.write_record(r)?;
        }
        csv.flush()?;
        Ok(())
    }
}

/// Shortest round-trip formatting, so identical runs give identical bytes.
pub fn num(x: f64) -> String {
    format!("{x:e}")
}

/// Write `<out>/<name>.csv`, or the table to stdout without `--out`.
pub fn emit(common: &Common, table: &Table) -> Result<(), CliError> {
    match &common.out {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            let path = dir.join(format!("{}.csv", table.name));
            table.write_to(std::fs::File::create(&path)?)?;
            eprintln!("wrote {}", path.display());
            Ok(())
        }
        None => table.write_to(std::io::stdout().lock()),
    }
}

/// Write the JSON sidecar `<out>/<name>.json`; skipped without `--out`.
pub fn emit_json<T: Serialize>(common: &Common, name: &str, value: &T) -> Result<(), CliError> {
    if let Some(dir) = &common.out {
        std::fs::create_dir_all(dir)?;
        let path = dir.join(format!("{name}.json"));
        let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Internal(e.to_string()))?;
        std::fs::write(&path, text + "\n")?;
        eprintln!("wrote {}", path.display());
    }
    Ok(())
}
