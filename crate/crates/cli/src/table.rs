//! Result tables and their CSV and JSON encodings.

use std::io::Write;
use std::str::FromStr;

use serde_json::{json, Map, Value as Json};

use crate::config::Config;
use crate::experiments::{Cell, Column, ColumnKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(format!("`{other}` is not one of csv, json")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    /// Values of the swept parameters, in axis order.
    pub axes: Vec<f64>,
    pub cells: Vec<Cell>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Metadata {
    pub experiment: String,
    pub code_version: String,
    pub config: String,
    pub wall_time_s: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultTable {
    /// Axis columns first, then experiment columns; `errors` is implicit.
    pub columns: Vec<Column>,
    pub n_axes: usize,
    pub rows: Vec<Row>,
    pub metadata: Metadata,
}

/// Shortest round-trip decimal, switching to exponent form for very large or
/// small magnitudes.
pub fn fmt_real(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || (1e-4..1e15).contains(&a) || !v.is_finite() {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

impl ResultTable {
    pub fn new(cfg: &Config, rows: Vec<Row>, wall_time_s: f64) -> Self {
        let mut columns: Vec<Column> = cfg
            .axes
            .iter()
            .map(|a| Column {
                name: a.spec.name,
                kind: ColumnKind::Real,
                unit: a.spec.kind.unit(),
            })
            .collect();
        columns.extend(cfg.experiment.columns.iter().cloned());
        Self {
            columns,
            n_axes: cfg.axes.len(),
            rows,
            metadata: Metadata {
                experiment: cfg.experiment.name.to_string(),
                code_version: format!("mixread {}", env!("CARGO_PKG_VERSION")),
                config: cfg.source.clone(),
                wall_time_s,
            },
        }
    }

    /// Flattened header with complex columns split into `_re`/`_im`.
    pub fn header(&self) -> Vec<(String, &'static str)> {
        let mut out = Vec::new();
        for c in &self.columns {
            match c.kind {
                ColumnKind::Complex => {
                    out.push((format!("{}_re", c.name), c.unit));
                    out.push((format!("{}_im", c.name), c.unit));
                }
                _ => out.push((c.name.to_string(), c.unit)),
            }
        }
        out.push(("errors".to_string(), ""));
        out
    }

    fn flat_row(&self, row: &Row) -> Vec<Option<FlatValue>> {
        let mut out: Vec<Option<FlatValue>> = row.axes.iter().map(|v| Some(FlatValue::Real(*v))).collect();
        for (i, c) in self.columns[self.n_axes..].iter().enumerate() {
            let cell = row.cells.get(i).copied().unwrap_or(Cell::Missing);
            match (c.kind, cell) {
                (ColumnKind::Complex, Cell::Complex(z)) => {
                    out.push(Some(FlatValue::Real(z.re)));
                    out.push(Some(FlatValue::Real(z.im)));
                }
                (ColumnKind::Complex, _) => {
                    out.push(None);
                    out.push(None);
                }
                (_, Cell::Real(v)) => out.push(Some(FlatValue::Real(v))),
                (_, Cell::Integer(v)) => out.push(Some(FlatValue::Integer(v))),
                (_, _) => out.push(None),
            }
        }
        out
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let m = &self.metadata;
        writeln!(w, "# experiment: {}", m.experiment)?;
        writeln!(w, "# code_version: {}", m.code_version)?;
        writeln!(w, "# wall_time_s: {}", m.wall_time_s)?;
        let header = self.header();
        let units: Vec<String> = header
            .iter()
            .filter(|(_, u)| !u.is_empty())
            .map(|(n, u)| format!("{n}={u}"))
            .collect();
        writeln!(w, "# units: {}", units.join(" "))?;
        for line in m.config.lines() {
            writeln!(w, "# config: {line}")?;
        }
        let mut csv = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(w);
        csv.write_record(header.iter().map(|(n, _)| n.as_str()))?;
        for row in &self.rows {
            let mut record: Vec<String> = self
                .flat_row(row)
                .into_iter()
                .map(|v| match v {
                    Some(FlatValue::Real(x)) => fmt_real(x),
                    Some(FlatValue::Integer(i)) => i.to_string(),
                    None => String::new(),
                })
                .collect();
            record.push(row.error.clone().unwrap_or_default());
            csv.write_record(&record)?;
        }
        csv.flush()
    }

    pub fn to_json(&self) -> Json {
        let m = &self.metadata;
        let header = self.header();
        let units: Map<String, Json> = header
            .iter()
            .filter(|(_, u)| !u.is_empty())
            .map(|(n, u)| (n.clone(), Json::from(*u)))
            .collect();
        let rows: Vec<Json> = self
            .rows
            .iter()
            .map(|row| {
                let mut values: Vec<Json> = self
                    .flat_row(row)
                    .into_iter()
                    .map(|v| match v {
                        Some(FlatValue::Real(x)) => Json::from(x),
                        Some(FlatValue::Integer(i)) => Json::from(i),
                        None => Json::Null,
                    })
                    .collect();
                values.push(row.error.clone().map_or(Json::Null, Json::from));
                Json::Array(values)
            })
            .collect();
        json!({
            "metadata": {
                "experiment": m.experiment,
                "code_version": m.code_version,
                "wall_time_s": m.wall_time_s,
                "units": units,
                "config": m.config,
            },
            "columns": header.iter().map(|(n, _)| n.clone()).collect::<Vec<_>>(),
            "rows": rows,
        })
    }

    pub fn write_json<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        serde_json::to_writer_pretty(&mut w, &self.to_json())?;
        writeln!(w)
    }

    pub fn write<W: Write>(&self, w: W, format: Format) -> std::io::Result<()> {
        match format {
            Format::Csv => self.write_csv(w),
            Format::Json => self.write_json(w),
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum FlatValue {
    Real(f64),
    Integer(i64),
}
