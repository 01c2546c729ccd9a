//! CSV tables. Headers are mandatory and must match exactly; numbers use a
//! decimal point and must be finite.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::conclab::CheckOutcome;
use crate::error::{Error, Result};
use crate::optimize::GridRow;
use crate::partition::{Assignment, FeatureTable};
use crate::table::SampleTable;

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

fn create(path: &Path) -> Result<File> {
    File::create(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

struct Rows {
    label: String,
    header: Vec<String>,
    records: Vec<(u64, csv::StringRecord)>,
}

impl Rows {
    fn err(&self, line: u64, message: impl Into<String>) -> Error {
        Error::Csv {
            path: self.label.clone(),
            line,
            message: message.into(),
        }
    }

    fn number(&self, line: u64, field: &str, column: &str) -> Result<f64> {
        let v: f64 = field.trim().parse().map_err(|_| {
            let hint = if field.contains(',') { " (use a decimal point, not a comma)" } else { "" };
            self.err(line, format!("column `{column}`: `{field}` is not a number{hint}"))
        })?;
        if !v.is_finite() {
            return Err(self.err(line, format!("column `{column}`: `{field}` is not finite")));
        }
        Ok(v)
    }
}

fn read_rows(reader: impl Read, label: &str) -> Result<Rows> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(reader);
    let mut header = None;
    let mut records = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::Csv {
            path: label.to_string(),
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        if header.is_none() {
            header = Some(rec.iter().map(|s| s.trim_start_matches('\u{feff}').to_string()).collect());
        } else {
            records.push((line, rec));
        }
    }
    let header = header.ok_or_else(|| Error::Csv {
        path: label.to_string(),
        line: 1,
        message: "missing header row".into(),
    })?;
    Ok(Rows {
        label: label.to_string(),
        header,
        records,
    })
}

fn expect_header(rows: &Rows, expected: &[&str]) -> Result<()> {
    if rows.header.iter().map(String::as_str).ne(expected.iter().copied()) {
        return Err(rows.err(
            1,
            format!("header must be `{}`, found `{}`", expected.join(","), rows.header.join(",")),
        ));
    }
    Ok(())
}

fn expect_width(rows: &Rows, line: u64, rec: &csv::StringRecord) -> Result<()> {
    if rec.len() != rows.header.len() {
        return Err(rows.err(line, format!("expected {} fields, found {}", rows.header.len(), rec.len())));
    }
    Ok(())
}

/// `id,loss`.
pub fn parse_losses(reader: impl Read, label: &str) -> Result<SampleTable> {
    let rows = read_rows(reader, label)?;
    expect_header(&rows, &["id", "loss"])?;
    let mut ids = Vec::with_capacity(rows.records.len());
    let mut losses = Vec::with_capacity(rows.records.len());
    for (line, rec) in &rows.records {
        expect_width(&rows, *line, rec)?;
        ids.push(rec[0].to_string());
        losses.push(rows.number(*line, &rec[1], "loss")?);
    }
    SampleTable::new(ids, losses).map_err(|e| rows.err(0, e.to_string()))
}

/// `id,f1,...,fd`.
pub fn parse_features(reader: impl Read, label: &str) -> Result<FeatureTable> {
    let rows = read_rows(reader, label)?;
    let dim = rows.header.len().saturating_sub(1);
    let expected: Vec<String> = std::iter::once("id".to_string())
        .chain((1..=dim).map(|j| format!("f{j}")))
        .collect();
    if dim == 0 {
        return Err(rows.err(1, "header must be `id,f1,...,fd` with d >= 1"));
    }
    expect_header(&rows, &expected.iter().map(String::as_str).collect::<Vec<_>>())?;
    let mut ids = Vec::with_capacity(rows.records.len());
    let mut data = Vec::with_capacity(rows.records.len() * dim);
    for (line, rec) in &rows.records {
        expect_width(&rows, *line, rec)?;
        ids.push(rec[0].to_string());
        for j in 1..=dim {
            data.push(rows.number(*line, &rec[j], &expected[j])?);
        }
    }
    FeatureTable::from_flat(ids, dim, data).map_err(|e| rows.err(0, e.to_string()))
}

/// `id,cell`.
pub fn parse_assignments(reader: impl Read, label: &str) -> Result<Assignment> {
    let rows = read_rows(reader, label)?;
    expect_header(&rows, &["id", "cell"])?;
    let mut ids = Vec::with_capacity(rows.records.len());
    let mut cells = Vec::with_capacity(rows.records.len());
    for (line, rec) in &rows.records {
        expect_width(&rows, *line, rec)?;
        ids.push(rec[0].to_string());
        let cell = rec[1]
            .trim()
            .parse::<usize>()
            .map_err(|_| rows.err(*line, format!("column `cell`: `{}` is not a cell index", &rec[1])))?;
        cells.push(cell);
    }
    Assignment::new(ids, cells).map_err(|e| rows.err(0, e.to_string()))
}

pub fn read_losses(path: &Path) -> Result<SampleTable> {
    parse_losses(open(path)?, &path.display().to_string())
}

pub fn read_features(path: &Path) -> Result<FeatureTable> {
    parse_features(open(path)?, &path.display().to_string())
}

pub fn read_assignments(path: &Path) -> Result<Assignment> {
    parse_assignments(open(path)?, &path.display().to_string())
}

fn writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().has_headers(false).from_writer(w)
}

fn write_err(label: &str, e: impl std::fmt::Display) -> Error {
    Error::Csv {
        path: label.to_string(),
        line: 0,
        message: e.to_string(),
    }
}

fn finish<W: Write>(mut w: csv::Writer<W>, label: &str) -> Result<()> {
    w.flush().map_err(|e| write_err(label, e))
}

/// Shortest decimal text that parses back to the same `f64`.
fn num(x: f64) -> String {
    format!("{x:?}")
}

pub fn write_losses(w: impl Write, table: &SampleTable) -> Result<()> {
    let mut out = writer(w);
    let label = "losses";
    out.write_record(["id", "loss"]).map_err(|e| write_err(label, e))?;
    for (id, l) in table.ids().iter().zip(table.losses()) {
        out.write_record([id.as_str(), &num(*l)]).map_err(|e| write_err(label, e))?;
    }
    finish(out, label)
}

pub fn write_features(w: impl Write, table: &FeatureTable) -> Result<()> {
    let mut out = writer(w);
    let label = "features";
    let mut header = vec!["id".to_string()];
    header.extend((1..=table.dim()).map(|j| format!("f{j}")));
    out.write_record(&header).map_err(|e| write_err(label, e))?;
    for (i, id) in table.ids().iter().enumerate() {
        let mut rec = vec![id.clone()];
        rec.extend(table.row(i).iter().map(|&x| num(x)));
        out.write_record(&rec).map_err(|e| write_err(label, e))?;
    }
    finish(out, label)
}

pub fn write_assignments(w: impl Write, a: &Assignment) -> Result<()> {
    let mut out = writer(w);
    let label = "assignments";
    out.write_record(["id", "cell"]).map_err(|e| write_err(label, e))?;
    for (id, c) in a.ids().iter().zip(a.cells()) {
        out.write_record([id.as_str(), &c.to_string()]).map_err(|e| write_err(label, e))?;
    }
    finish(out, label)
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(String::new, num)
}

/// `K,alpha,gamma,u_hat,g,unc,bound,valid`; terms of rows that could not be
/// evaluated are left empty.
pub fn write_grid(w: impl Write, rows: &[GridRow]) -> Result<()> {
    let mut out = writer(w);
    let label = "grid";
    out.write_record(["K", "alpha", "gamma", "u_hat", "g", "unc", "bound", "valid"])
        .map_err(|e| write_err(label, e))?;
    for r in rows {
        out.write_record([
            r.k.to_string(),
            num(r.alpha),
            num(r.gamma),
            opt(r.u_hat),
            opt(r.g),
            opt(r.unc),
            opt(r.bound),
            r.valid.to_string(),
        ])
        .map_err(|e| write_err(label, e))?;
    }
    finish(out, label)
}

/// `check,params,estimate,bound,margin,pass`.
pub fn write_checks(w: impl Write, outcomes: &[CheckOutcome]) -> Result<()> {
    let mut out = writer(w);
    let label = "checks";
    out.write_record(["check", "params", "estimate", "bound", "margin", "pass"])
        .map_err(|e| write_err(label, e))?;
    for o in outcomes {
        out.write_record([
            o.check.clone(),
            o.params.clone(),
            num(o.estimate),
            num(o.bound),
            num(o.margin),
            o.pass.to_string(),
        ])
        .map_err(|e| write_err(label, e))?;
    }
    finish(out, label)
}

/// Write `f`'s output to a file.
pub fn write_file(path: &Path, f: impl FnOnce(&mut File) -> Result<()>) -> Result<()> {
    let mut file = create(path)?;
    f(&mut file)
}
