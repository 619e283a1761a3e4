//! CSV input and output for grouped observations.
//!
//! Files are UTF-8, comma separated, with a header row. Counts are base-10
//! integers; categorical cells are matched against declared levels after
//! trimming whitespace. Columns not named in the config are ignored.

use std::io::{Read, Write};
use std::path::Path;

use super::config::ModelConfig;
use crate::design::{validate_dataset, Dataset, Observation, Violation};
use crate::error::{Error, Result};

/// Reads `path` into a validated dataset. Row numbers in errors count data
/// rows from 1 (the header is not a row).
pub fn parse_csv(path: &Path, config: &ModelConfig) -> Result<Dataset> {
    let file = std::fs::File::open(path).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        detail: e.to_string(),
    })?;
    read_csv(file, config).map_err(|e| match e {
        Error::Validation(_) | Error::Parse { .. } => e,
        other => Error::Parse {
            path: path.to_path_buf(),
            detail: other.to_string(),
        },
    })
}

pub fn read_csv<R: Read>(reader: R, config: &ModelConfig) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Config(format!("column `{name}` not found in header")))
    };
    let y_col = find(&config.response.successes)?;
    let n_col = find(&config.response.trials)?;
    let var_cols = config
        .variables
        .iter()
        .map(|v| find(&v.name))
        .collect::<Result<Vec<_>>>()?;

    let count = |record: &csv::StringRecord, col: usize, row: usize, what: &str| -> Result<u64> {
        let cell = record.get(col).unwrap_or("");
        cell.parse::<u64>().map_err(|_| {
            Error::Config(format!("row {row}: {what} `{cell}` is not a non-negative integer"))
        })
    };

    let mut rows = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let record = record?;
        let row = i + 1;
        let successes = count(&record, y_col, row, &config.response.successes)?;
        let trials = count(&record, n_col, row, &config.response.trials)?;
        let levels = var_cols
            .iter()
            .map(|&c| record.get(c).unwrap_or("").to_string())
            .collect();
        rows.push(Observation {
            successes,
            trials,
            levels,
        });
    }
    let data = Dataset::new(config.variables.clone(), rows);
    let violations = validate_dataset(&data);
    if !violations.is_empty() {
        return Err(Error::Validation(
            violations
                .into_iter()
                .map(|v| Violation {
                    row: v.row + 1,
                    reason: v.reason,
                })
                .collect(),
        ));
    }
    Ok(data)
}

/// Writes `data` with one column per variable followed by the successes and
/// trials columns named in `config`.
pub fn write_csv<W: Write>(data: &Dataset, config: &ModelConfig, writer: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(writer);
    let mut header: Vec<&str> = data.variables.iter().map(|v| v.name.as_str()).collect();
    header.push(&config.response.successes);
    header.push(&config.response.trials);
    w.write_record(&header)?;
    for row in &data.rows {
        let mut rec: Vec<String> = row.levels.clone();
        rec.push(row.successes.to_string());
        rec.push(row.trials.to_string());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}
