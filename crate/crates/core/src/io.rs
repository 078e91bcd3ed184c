//! Dataset ingestion and density tabulation.

use std::fmt;
use std::fs::File;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A CSV column, by 1-based position or by header name.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Column {
    Index(usize),
    Name(String),
}

impl FromStr for Column {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.parse::<usize>() {
            Ok(0) => Err(Error::Input("column positions start at 1".into())),
            Ok(i) => Ok(Column::Index(i)),
            Err(_) if !s.is_empty() => Ok(Column::Name(s.to_string())),
            Err(_) => Err(Error::Input("empty column name".into())),
        }
    }
}

impl fmt::Display for Column {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Column::Index(i) => write!(f, "#{i}"),
            Column::Name(n) => write!(f, "`{n}`"),
        }
    }
}

/// Column layout of the tree table. Defaults: plot id in column 1, diameter
/// (cm) in column 10, height (m) in column 11.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DbhLayout {
    pub plot: Column,
    pub dbh: Column,
    pub height: Column,
}

impl Default for DbhLayout {
    fn default() -> Self {
        DbhLayout {
            plot: Column::Index(1),
            dbh: Column::Index(10),
            height: Column::Index(11),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Measure {
    Dbh,
    Height,
}

impl FromStr for Measure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dbh" => Ok(Measure::Dbh),
            "height" => Ok(Measure::Height),
            _ => Err(Error::Unknown {
                kind: "column",
                name: s.to_string(),
            }),
        }
    }
}

struct Table {
    header: Option<Vec<String>>,
    rows: Vec<Vec<String>>,
}

fn is_missing(s: &str) -> bool {
    matches!(s.trim(), "" | "NA" | "na" | "NaN" | "nan" | ".")
}

fn read_table(path: &Path) -> Result<Table> {
    let file = File::open(path).map_err(|e| Error::Input(format!("cannot open {}: {e}", path.display())))?;
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file);
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::Input(format!("{}: {e}", path.display())))?;
        rows.push(rec.iter().map(str::to_string).collect::<Vec<_>>());
    }
    // a first row with any non-numeric, non-missing field is a header
    let header = match rows.first() {
        Some(first) if first.iter().any(|f| !is_missing(f) && f.parse::<f64>().is_err()) => Some(rows.remove(0)),
        _ => None,
    };
    Ok(Table { header, rows })
}

impl Table {
    fn index(&self, col: &Column, path: &Path) -> Result<usize> {
        match col {
            Column::Index(i) => {
                let width = self
                    .header
                    .as_ref()
                    .map(Vec::len)
                    .into_iter()
                    .chain(self.rows.iter().map(Vec::len))
                    .max()
                    .unwrap_or(0);
                if *i > width {
                    return Err(Error::Input(format!(
                        "{}: column {col} does not exist (the file has {width} columns)",
                        path.display()
                    )));
                }
                Ok(i - 1)
            }
            Column::Name(name) => self
                .header
                .as_ref()
                .and_then(|h| h.iter().position(|f| f == name))
                .ok_or_else(|| Error::Input(format!("{}: no column named {col}", path.display()))),
        }
    }
}

fn parse_cell(row: &[String], i: usize, line: usize, path: &Path) -> Result<Option<f64>> {
    match row.get(i) {
        None => Ok(None),
        Some(s) if is_missing(s) => Ok(None),
        Some(s) => s
            .parse::<f64>()
            .map(Some)
            .map_err(|_| Error::Input(format!("{}: row {line}: `{s}` is not a number", path.display()))),
    }
}

fn plot_rows<'a>(t: &'a Table, path: &Path, layout: &DbhLayout, plot: i64) -> Result<Vec<(usize, &'a Vec<String>)>> {
    if t.rows.is_empty() {
        return Err(Error::DegenerateSample(format!("{} has no data rows", path.display())));
    }
    let pi = t.index(&layout.plot, path)?;
    let offset = if t.header.is_some() { 2 } else { 1 };
    let mut out = Vec::new();
    for (r, row) in t.rows.iter().enumerate() {
        if let Some(v) = parse_cell(row, pi, r + offset, path)? {
            if v == plot as f64 {
                out.push((r + offset, row));
            }
        }
    }
    if out.is_empty() {
        return Err(Error::Input(format!("{}: plot {plot} not found", path.display())));
    }
    Ok(out)
}

/// One measurement column of one plot, missing values dropped, file order kept.
pub fn load_dbh(path: impl AsRef<Path>, plot: i64, measure: Measure, layout: &DbhLayout) -> Result<Vec<f64>> {
    let path = path.as_ref();
    let t = read_table(path)?;
    let rows = plot_rows(&t, path, layout, plot)?;
    let ci = t.index(
        match measure {
            Measure::Dbh => &layout.dbh,
            Measure::Height => &layout.height,
        },
        path,
    )?;
    let mut out = Vec::with_capacity(rows.len());
    for (line, row) in rows {
        if let Some(v) = parse_cell(row, ci, line, path)? {
            out.push(v);
        }
    }
    if out.is_empty() {
        return Err(Error::DegenerateSample(format!("plot {plot} has no {measure:?} values")));
    }
    Ok(out)
}

/// Paired (height, diameter) values of one plot; a row is dropped when
/// either value is missing.
pub fn load_dbh_pairs(path: impl AsRef<Path>, plot: i64, layout: &DbhLayout) -> Result<(Vec<f64>, Vec<f64>)> {
    let path = path.as_ref();
    let t = read_table(path)?;
    let rows = plot_rows(&t, path, layout, plot)?;
    let di = t.index(&layout.dbh, path)?;
    let hi = t.index(&layout.height, path)?;
    let (mut h, mut d) = (Vec::new(), Vec::new());
    for (line, row) in rows {
        if let (Some(hv), Some(dv)) = (parse_cell(row, hi, line, path)?, parse_cell(row, di, line, path)?) {
            h.push(hv);
            d.push(dv);
        }
    }
    if h.is_empty() {
        return Err(Error::DegenerateSample(format!("plot {plot} has no complete height-diameter pairs")));
    }
    Ok((h, d))
}

/// All non-missing values of one column (default: the first).
pub fn load_values(path: impl AsRef<Path>, column: Option<&Column>) -> Result<Vec<f64>> {
    let path = path.as_ref();
    let t = read_table(path)?;
    let ci = match column {
        Some(c) => t.index(c, path)?,
        None => 0,
    };
    let offset = if t.header.is_some() { 2 } else { 1 };
    let mut out = Vec::with_capacity(t.rows.len());
    for (r, row) in t.rows.iter().enumerate() {
        if let Some(v) = parse_cell(row, ci, r + offset, path)? {
            out.push(v);
        }
    }
    if out.is_empty() {
        return Err(Error::DegenerateSample(format!("{} contains no values", path.display())));
    }
    Ok(out)
}

/// Sample summary echoed in reports.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InputDigest {
    pub n: usize,
    pub min: f64,
    pub max: f64,
}

impl InputDigest {
    pub fn of(data: &[f64]) -> Self {
        InputDigest {
            n: data.len(),
            min: data.iter().cloned().fold(f64::INFINITY, f64::min),
            max: data.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        }
    }
}

/// Evenly spaced grid from `min` to `max`. `min == max` gives one point.
pub fn grid(min: f64, max: f64, points: usize) -> Result<Vec<f64>> {
    if !(min.is_finite() && max.is_finite()) || min > max {
        return Err(Error::Domain(format!("invalid grid [{min}, {max}]")));
    }
    if points == 0 {
        return Err(Error::Domain("grid needs at least one point".into()));
    }
    if min == max || points == 1 {
        return Ok(vec![min]);
    }
    let step = (max - min) / (points - 1) as f64;
    Ok((0..points)
        .map(|i| if i + 1 == points { max } else { min + step * i as f64 })
        .collect())
}

/// `(x, f(x))` over a grid.
pub fn tabulate<F: Fn(f64) -> f64>(f: F, min: f64, max: f64, points: usize) -> Result<Vec<(f64, f64)>> {
    Ok(grid(min, max, points)?.into_iter().map(|x| (x, f(x))).collect())
}

/// Two-column CSV with header `x,<value_name>`.
pub fn write_table<W: Write>(out: W, value_name: &str, rows: &[(f64, f64)]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["x", value_name])?;
    for (x, y) in rows {
        w.write_record([x.to_string(), y.to_string()])?;
    }
    w.flush()?;
    Ok(())
}
