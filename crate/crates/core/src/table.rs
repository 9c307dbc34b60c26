//! Exchange format for mass tables: JSON documents and CSV/TSV rows with
//! exact rationals written as "num/den".

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mass::{mass_times_weyl, MassEntry, MassTable};
use crate::reduce::{BoundReport, OddMassTable};
use crate::roots::{Filters, RootSystem};
use crate::scalar::{format_decimal, format_rational, parse_rational};

pub const TABLE_SCHEMA: u32 = 1;
const DECIMAL_DIGITS: usize = 15;

#[derive(Debug, Error)]
pub enum TableError {
    #[error("malformed table: {0}")]
    Malformed(String),
    #[error("unsupported table schema {0}")]
    Schema(u32),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
    Tsv,
}

#[derive(Serialize, Deserialize)]
struct MassRow {
    root_system: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    coefficient: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    mass: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    mass_times_weyl: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    decimal: Option<String>,
}

#[derive(Serialize, Deserialize)]
struct MassDoc {
    schema: u32,
    dimension: u32,
    max_rank: usize,
    filters: Filters,
    solver: String,
    genus_mass: String,
    entries: Vec<MassRow>,
}

fn rows_of(table: &MassTable, all: bool) -> Vec<MassRow> {
    table
        .entries
        .iter()
        .filter(|e| all || e.mass.as_ref().map_or(true, |m| !m.is_zero()))
        .map(|e| match &e.mass {
            Some(m) => MassRow {
                root_system: e.root_system.to_string(),
                coefficient: Some(format_rational(&e.coefficient)),
                mass: Some(format_rational(m)),
                mass_times_weyl: Some(format_rational(&mass_times_weyl(&e.root_system, m))),
                decimal: Some(format_decimal(m, DECIMAL_DIGITS)),
            },
            None => MassRow {
                root_system: e.root_system.to_string(),
                coefficient: Some(format_rational(&e.coefficient)),
                mass: None,
                mass_times_weyl: None,
                decimal: Some(format_decimal(&e.coefficient, DECIMAL_DIGITS)),
            },
        })
        .collect()
}

/// Serialises a mass table; zero masses are kept only with `all`.
pub fn mass_table_to_json(table: &MassTable, all: bool) -> String {
    let doc = MassDoc {
        schema: TABLE_SCHEMA,
        dimension: table.dim,
        max_rank: table.max_rank,
        filters: table.filters,
        solver: table.solver_version.clone(),
        genus_mass: format_rational(&table.total),
        entries: rows_of(table, all),
    };
    serde_json::to_string_pretty(&doc).expect("in-memory serialisation")
}

fn rational(s: &str) -> Result<BigRational, TableError> {
    parse_rational(s).ok_or_else(|| TableError::Malformed(format!("not a rational: {s:?}")))
}

pub fn mass_table_from_json(text: &str) -> Result<MassTable, TableError> {
    let doc: MassDoc = serde_json::from_str(text)?;
    if doc.schema != TABLE_SCHEMA {
        return Err(TableError::Schema(doc.schema));
    }
    let entries = doc
        .entries
        .iter()
        .map(|row| {
            let root_system: RootSystem =
                row.root_system.parse().map_err(|e| TableError::Malformed(format!("{e}")))?;
            let coefficient = row.coefficient.as_deref().map(rational).transpose()?.unwrap_or_else(BigRational::zero);
            let mass = row.mass.as_deref().map(rational).transpose()?;
            Ok(MassEntry { root_system, coefficient, mass })
        })
        .collect::<Result<Vec<_>, TableError>>()?;
    Ok(MassTable {
        dim: doc.dimension,
        max_rank: doc.max_rank,
        filters: doc.filters,
        total: rational(&doc.genus_mass)?,
        solver_version: doc.solver,
        entries,
    })
}

fn delimited(header: &[&str], rows: Vec<Vec<String>>, format: Format) -> String {
    let delim = if format == Format::Tsv { b'\t' } else { b',' };
    let mut w = csv::WriterBuilder::new().delimiter(delim).from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(&r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
}

pub fn emit_mass_table(table: &MassTable, all: bool, format: Format) -> String {
    if format == Format::Json {
        return mass_table_to_json(table, all);
    }
    let rows = rows_of(table, all);
    if table.is_complete() {
        let body = rows
            .into_iter()
            .map(|r| vec![r.root_system, r.mass.unwrap_or_default(), r.mass_times_weyl.unwrap_or_default(), r.decimal.unwrap_or_default()])
            .collect();
        delimited(&["root_system", "mass", "mass_times_weyl", "decimal"], body, format)
    } else {
        let body = rows
            .into_iter()
            .map(|r| vec![r.root_system, r.coefficient.unwrap_or_default(), r.decimal.unwrap_or_default()])
            .collect();
        delimited(&["root_system", "coefficient", "decimal"], body, format)
    }
}

/// Reads the `root_system` and `mass` columns of a CSV/TSV mass table.
pub fn parse_mass_rows(text: &str, format: Format) -> Result<Vec<(RootSystem, BigRational)>, TableError> {
    let delim = if format == Format::Tsv { b'\t' } else { b',' };
    let mut r = csv::ReaderBuilder::new().delimiter(delim).from_reader(text.as_bytes());
    let headers = r.headers()?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name).ok_or_else(|| TableError::Malformed(format!("missing column {name}")));
    let (ci, cm) = (col("root_system")?, col("mass")?);
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let rs = rec[ci].parse().map_err(|e| TableError::Malformed(format!("{e}")))?;
        out.push((rs, rational(&rec[cm])?));
    }
    Ok(out)
}

#[derive(Serialize)]
struct OddRow {
    dimension: usize,
    root_system: String,
    mass: String,
    decimal: String,
}

pub fn emit_odd_table(odd: &OddMassTable, format: Format) -> String {
    let rows: Vec<OddRow> = odd
        .rows()
        .into_iter()
        .map(|(n, r, m)| OddRow {
            dimension: n,
            root_system: r.to_string(),
            decimal: format_decimal(&m, DECIMAL_DIGITS),
            mass: format_rational(&m),
        })
        .collect();
    match format {
        Format::Json => serde_json::to_string_pretty(&serde_json::json!({
            "schema": TABLE_SCHEMA,
            "base_dimension": odd.base_dim,
            "entries": rows,
        }))
        .expect("in-memory serialisation"),
        _ => delimited(
            &["dimension", "root_system", "mass", "decimal"],
            rows.into_iter().map(|r| vec![r.dimension.to_string(), r.root_system, r.mass, r.decimal]).collect(),
            format,
        ),
    }
}

pub fn emit_bounds(base: u32, reports: &[BoundReport], format: Format) -> String {
    match format {
        Format::Json => {
            let rows: Vec<_> = reports
                .iter()
                .map(|b| {
                    serde_json::json!({
                        "dimension": b.n,
                        "bound": b.beta.to_string(),
                        "root_systems": b.root_systems,
                        "mass": format_rational(&b.mass),
                        "decimal": format_decimal(&b.mass, DECIMAL_DIGITS),
                    })
                })
                .collect();
            serde_json::to_string_pretty(&serde_json::json!({ "base_dimension": base, "bounds": rows }))
                .expect("in-memory serialisation")
        }
        _ => delimited(
            &["dimension", "bound", "root_systems", "mass", "decimal"],
            reports
                .iter()
                .map(|b| {
                    let m = format_rational(&b.mass);
                    vec![b.n.to_string(), b.beta.to_string(), b.root_systems.to_string(), m, format_decimal(&b.mass, DECIMAL_DIGITS)]
                })
                .collect(),
            format,
        ),
    }
}

/// A single exact value, wrapped for JSON.
pub fn emit_value(name: &str, value: &BigRational, format: Option<Format>) -> String {
    let v = format_rational(value);
    match format {
        Some(Format::Json) => serde_json::json!({ name: v }).to_string(),
        _ => v,
    }
}

pub fn emit_integer(name: &str, value: &BigInt, format: Option<Format>) -> String {
    emit_value(name, &BigRational::from_integer(value.clone()), format)
}
