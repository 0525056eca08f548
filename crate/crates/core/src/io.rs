//! CSV ingestion of finite populations and CSV/JSON emission of results.
//!
//! Floats are written by [`format_float`]: the shortest decimal string that
//! parses back to the same `f64`.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::mcmc::Trace;
use crate::survey::FinitePopulation;

/// Reads a population from a CSV file. See [`parse_population`].
pub fn load_population(path: impl AsRef<Path>) -> Result<FinitePopulation> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_population(file)
}

/// Parses a population from CSV with a header row.
///
/// The `value` column is required; integer `stratum` and `cluster` columns are
/// optional. A label column must be filled on every row or on none. Errors
/// name the 1-based line of the file (the header is line 1).
pub fn parse_population(reader: impl Read) -> Result<FinitePopulation> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| Error::Malformed {
            line: 1,
            message: e.to_string(),
        })?
        .clone();
    if headers.is_empty() || (headers.len() == 1 && headers[0].is_empty()) {
        return Err(Error::EmptyInput);
    }
    let find = |name: &str| headers.iter().position(|h| h.eq_ignore_ascii_case(name));
    let value_col = find("value").ok_or_else(|| Error::Malformed {
        line: 1,
        message: "header has no `value` column".into(),
    })?;
    let label_cols = [("stratum", find("stratum")), ("cluster", find("cluster"))];

    let mut values = Vec::new();
    let mut labels: [Vec<Option<i64>>; 2] = [Vec::new(), Vec::new()];
    for (i, record) in rdr.records().enumerate() {
        let line = i + 2;
        let record = record.map_err(|e| Error::Malformed {
            line,
            message: e.to_string(),
        })?;
        let raw = record.get(value_col).unwrap_or("");
        let v: f64 = raw.parse().map_err(|_| Error::Malformed {
            line,
            message: format!("value `{raw}` is not a number"),
        })?;
        if !v.is_finite() {
            return Err(Error::Malformed {
                line,
                message: format!("value `{raw}` is not finite"),
            });
        }
        values.push(v);
        for (slot, (name, col)) in labels.iter_mut().zip(&label_cols) {
            let Some(col) = col else { continue };
            let raw = record.get(*col).unwrap_or("");
            let label = if raw.is_empty() {
                None
            } else {
                Some(raw.parse::<i64>().map_err(|_| Error::Malformed {
                    line,
                    message: format!("{name} label `{raw}` is not an integer"),
                })?)
            };
            slot.push(label);
        }
    }
    if values.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut pop = FinitePopulation::new(values)?;
    for (column, (name, col)) in labels.into_iter().zip(&label_cols) {
        if col.is_none() || column.iter().all(Option::is_none) {
            continue;
        }
        if column.iter().any(Option::is_none) {
            return Err(Error::PartialLabeling((*name).to_string()));
        }
        let column: Vec<i64> = column.into_iter().flatten().collect();
        pop = if *name == "stratum" {
            pop.with_strata(column)?
        } else {
            pop.with_clusters(column)?
        };
    }
    Ok(pop)
}

/// Shortest round-trip decimal, in positional or exponent form, whichever is shorter.
pub fn format_float(x: f64) -> String {
    let plain = x.to_string();
    let sci = format!("{x:e}");
    if sci.len() < plain.len() {
        sci
    } else {
        plain
    }
}

/// Writes `header` and `rows` as CSV.
pub fn write_csv<W: Write>(out: W, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(header).map_err(io)?;
    for row in rows {
        w.write_record(&row).map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

/// Trace as CSV: `iteration, x0, ..., x{d-1}, accepted`.
pub fn write_trace_csv<W: Write>(out: W, trace: &Trace) -> Result<()> {
    let d = trace.dimension();
    let mut header = vec!["iteration".to_string()];
    header.extend((0..d).map(|j| format!("x{j}")));
    header.push("accepted".into());
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let rows = trace
        .samples
        .iter()
        .zip(&trace.accepted)
        .enumerate()
        .map(|(i, (x, a))| {
            let mut row = vec![i.to_string()];
            row.extend(x.iter().map(|v| format_float(*v)));
            row.push(u8::from(*a).to_string());
            row
        });
    write_csv(out, &header_refs, rows)
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Error::Io(e.to_string()))?;
    s.push('\n');
    Ok(s)
}
