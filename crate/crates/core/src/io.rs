//! CSV serialisation of fields and convergence reports.
//!
//! A field file starts with `#` comment lines. One of them,
//! `# field: {json}`, describes the grid, quantity, method and time; the
//! others are free-form. Then come `x,y,value` rows with y as the outer
//! index. Numbers are written with 17 significant digits, so reading a
//! file back reproduces every value bit for bit.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::analysis::ConvergenceReport;
use crate::error::{Error, Result};
use crate::field::{Grid2D, Method, Quantity, SolutionField};

const FIELD_TAG: &str = "# field: ";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
struct FieldHeader {
    grid: Grid2D,
    quantity: Quantity,
    method: Method,
    t: f64,
}

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes `field` as CSV; each entry of `comments` becomes a `#` line.
pub fn write_field_csv<W: Write>(
    mut w: W,
    field: &SolutionField,
    comments: &[String],
) -> Result<()> {
    for c in comments {
        for line in c.lines() {
            writeln!(w, "# {line}")?;
        }
    }
    let header = FieldHeader {
        grid: field.grid,
        quantity: field.quantity,
        method: field.method,
        t: field.t,
    };
    writeln!(w, "{FIELD_TAG}{}", serde_json::to_string(&header)?)?;

    let mut out = csv::Writer::from_writer(w);
    out.write_record(["x", "y", "value"])?;
    let grid = field.grid;
    let xs: Vec<String> = grid.xs().into_iter().map(num).collect();
    for j in 0..grid.ny {
        let y = num(grid.y(j));
        for (i, x) in xs.iter().enumerate() {
            out.write_record([x.as_str(), y.as_str(), num(field.at(i, j)).as_str()])?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Reads a field written by [`write_field_csv`].
pub fn read_field_csv<R: Read>(r: R) -> Result<SolutionField> {
    let mut reader = BufReader::new(r);
    let mut header = None;
    let mut body = String::new();
    let mut line = String::new();
    while reader.read_line(&mut line)? > 0 {
        if let Some(json) = line.strip_prefix(FIELD_TAG) {
            header = Some(serde_json::from_str::<FieldHeader>(json.trim())?);
        } else if !line.starts_with('#') {
            body.push_str(&line);
        }
        line.clear();
    }
    let header = header.ok_or_else(|| Error::Io("missing '# field:' header line".into()))?;
    let grid = header.grid;
    let grid = Grid2D::with_spacing(grid.lx, grid.ly, grid.nx, grid.ny, grid.spacing)?;

    let mut values = Vec::with_capacity(grid.len());
    let mut rows = csv::Reader::from_reader(body.as_bytes());
    for (k, record) in rows.records().enumerate() {
        let record = record?;
        let parse = |idx: usize| -> Result<f64> {
            record
                .get(idx)
                .ok_or_else(|| Error::Io(format!("row {k} has too few columns")))?
                .trim()
                .parse::<f64>()
                .map_err(|e| Error::Io(format!("row {k}: {e}")))
        };
        if k >= grid.len() {
            return Err(Error::Io(format!("more than {} rows", grid.len())));
        }
        let (i, j) = (k % grid.nx, k / grid.nx);
        if parse(0)? != grid.x(i) || parse(1)? != grid.y(j) {
            return Err(Error::Io(format!("row {k} is not at grid node ({i}, {j})")));
        }
        values.push(parse(2)?);
    }
    SolutionField::new(grid, header.quantity, header.method, header.t, values)
}

pub fn save_field(path: &Path, field: &SolutionField, comments: &[String]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_field_csv(&mut w, field, comments)?;
    w.flush()?;
    Ok(())
}

pub fn load_field(path: &Path) -> Result<SolutionField> {
    read_field_csv(File::open(path)?)
}

/// One CSV row per record, preceded by `#` lines naming the method and
/// reference resolution.
pub fn write_report_csv<W: Write>(mut w: W, report: &ConvergenceReport) -> Result<()> {
    writeln!(w, "# method: {}", report.method)?;
    writeln!(w, "# compare: {:?}", report.compare)?;
    writeln!(w, "# reference_M: {}", report.reference_m)?;
    let mut out = csv::Writer::from_writer(w);
    for r in &report.records {
        out.serialize(r)?;
    }
    out.flush()?;
    Ok(())
}

pub fn save_report(path: &Path, report: &ConvergenceReport) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_report_csv(&mut w, report)?;
    w.flush()?;
    Ok(())
}

/// Writes any serialisable value as pretty JSON.
pub fn save_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}
