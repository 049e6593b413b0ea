//! CSV result files.

use std::fs::OpenOptions;
use std::io::{BufRead, BufReader};
use std::path::Path;

use super::sweep::{SweepResult, SweepRow};
use crate::error::{Error, Result};

pub const CSV_HEADER: &str = "scheme,estimator,U,M,Mp,Tc,KriceDb,EsN0Db,blocks,symbols,symbolErrors,ser,serCi95,bits,bitErrors,ber,seed,configDigest";

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io { path: path.to_path_buf(), source }
}

fn csv_err(path: &Path) -> impl FnOnce(csv::Error) -> Error + '_ {
    move |source| Error::Csv { path: path.to_path_buf(), source }
}

/// Writes the rows of `result` to `path`. A new or empty file gets the
/// header; an existing file must already start with it and only gets rows
/// appended.
pub fn write_results(result: &SweepResult, path: &Path) -> Result<()> {
    let existing = match std::fs::File::open(path) {
        Ok(f) => {
            let mut first = String::new();
            BufReader::new(f).read_line(&mut first).map_err(io_err(path))?;
            Some(first)
        }
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => None,
        Err(e) => return Err(io_err(path)(e)),
    };
    let needs_header = match existing.as_deref() {
        None | Some("") => true,
        Some(line) if line.trim_end() == CSV_HEADER => false,
        Some(_) => {
            return Err(Error::Io {
                path: path.to_path_buf(),
                source: std::io::Error::new(
                    std::io::ErrorKind::InvalidData,
                    "existing file does not start with the result header",
                ),
            })
        }
    };
    let file = OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(io_err(path))?;
    let mut w = csv::WriterBuilder::new().has_headers(needs_header).from_writer(file);
    for row in &result.rows {
        w.serialize(row).map_err(csv_err(path))?;
    }
    if needs_header && result.rows.is_empty() {
        w.write_record(CSV_HEADER.split(',')).map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))?;
    Ok(())
}

/// Parses a file written by [`write_results`]; wall times are not stored
/// and come back empty.
pub fn read_results(path: &Path) -> Result<SweepResult> {
    let mut r = csv::Reader::from_path(path).map_err(csv_err(path))?;
    let header = r.headers().map_err(csv_err(path))?.iter().collect::<Vec<_>>().join(",");
    if header != CSV_HEADER {
        return Err(Error::Io {
            path: path.to_path_buf(),
            source: std::io::Error::new(std::io::ErrorKind::InvalidData, format!("unexpected header {header:?}")),
        });
    }
    let rows = r
        .deserialize::<SweepRow>()
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(csv_err(path))?;
    Ok(SweepResult { rows, ..Default::default() })
}
