//! Output formats: sweep rows as CSV and JSON (with run metadata), and a
//! JSON density-matrix dump for handing states between runs.
//!
//! Everything here is deterministic: fixed column order, fixed 9
//! significant-digit scientific notation, and no timestamps in the data.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::DensityMatrix;
use crate::sweep::{RowOutcome, RowValues, SweepRow, SweepSpec, SweepVariable};

/// CSV header shared by emission and parsing.
pub const CSV_HEADER: &str =
    "variable,value,detector,model,w00,witness,a_opt,s_opt,p0,p1,herald_prob";

/// Scientific notation with 9 significant digits.
fn sig9(x: f64) -> String {
    format!("{x:.8e}")
}

fn parse_f64(field: &str, raw: &str) -> Result<f64> {
    raw.parse::<f64>()
        .map_err(|_| Error::config(field, format!("not a number: {raw:?}")))
}

/// Render rows as CSV text (header + one line per row). Failed rows keep
/// all 11 columns, with the numeric cells empty.
pub fn csv_string(rows: &[SweepRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&row.variable.to_string());
        out.push(',');
        out.push_str(&sig9(row.value));
        out.push(',');
        out.push_str(&row.detector);
        out.push(',');
        out.push_str(row.model);
        match &row.outcome {
            RowOutcome::Ok(v) => {
                for x in [
                    v.w00,
                    v.witness,
                    v.a_opt,
                    v.s_opt,
                    v.p0,
                    v.p1,
                    v.herald_prob,
                ] {
                    out.push(',');
                    out.push_str(&sig9(x));
                }
            }
            RowOutcome::Failed { .. } => out.push_str(",,,,,,,"),
        }
        out.push('\n');
    }
    out
}

pub fn write_csv(rows: &[SweepRow], path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(csv_string(rows).as_bytes())?;
    Ok(())
}

/// Parse CSV produced by [`csv_string`] back into rows. Rows with empty
/// numeric cells come back as failed rows (the reason column is not part of
/// the CSV format).
pub fn parse_csv<R: Read>(reader: R) -> Result<Vec<SweepRow>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(reader);
    {
        let headers = rdr.headers()?;
        let expected: Vec<&str> = CSV_HEADER.split(',').collect();
        if headers.iter().collect::<Vec<_>>() != expected {
            return Err(Error::config(
                "csv.header",
                format!("unexpected header {:?}", headers.iter().collect::<Vec<_>>()),
            ));
        }
    }
    let mut rows = Vec::new();
    for record in rdr.records() {
        let record = record?;
        if record.len() != 11 {
            return Err(Error::config(
                "csv.row",
                format!("expected 11 columns, got {}", record.len()),
            ));
        }
        let variable: SweepVariable = record[0].parse()?;
        let value = parse_f64("csv.value", &record[1])?;
        let detector = record[2].to_string();
        let model = match &record[3] {
            "PNRD" => "PNRD",
            "NPNRD" => "NPNRD",
            "IMPNRD" => "IMPNRD",
            "IMNPNRD" => "IMNPNRD",
            other => {
                return Err(Error::config(
                    "csv.model",
                    format!("unknown detector model label {other:?}"),
                ))
            }
        };
        let numeric: Vec<&str> = (4..11).map(|i| record.get(i).unwrap_or("")).collect();
        let outcome = if numeric.iter().all(|s| s.is_empty()) {
            RowOutcome::Failed {
                reason: String::new(),
            }
        } else {
            let mut vals = [0.0; 7];
            for (slot, (raw, name)) in vals.iter_mut().zip(numeric.iter().zip([
                "csv.w00",
                "csv.witness",
                "csv.a_opt",
                "csv.s_opt",
                "csv.p0",
                "csv.p1",
                "csv.herald_prob",
            ])) {
                *slot = parse_f64(name, raw)?;
            }
            RowOutcome::Ok(RowValues {
                w00: vals[0],
                witness: vals[1],
                a_opt: vals[2],
                s_opt: vals[3],
                p0: vals[4],
                p1: vals[5],
                herald_prob: vals[6],
            })
        };
        rows.push(SweepRow {
            variable,
            value,
            detector,
            model,
            outcome,
        });
    }
    Ok(rows)
}

/// Witness-search description recorded in run metadata.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct WitnessMeta {
    pub a_points: usize,
    pub s_points: usize,
    pub s_max: f64,
    pub r_max: f64,
    pub refine_tol: f64,
}

/// Run metadata accompanying the JSON row mirror.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RunMeta {
    pub nmax: usize,
    pub variable: String,
    pub points: usize,
    pub detectors: Vec<String>,
    pub witness: WitnessMeta,
    pub preset_table: String,
}

impl RunMeta {
    pub fn from_spec(spec: &SweepSpec) -> Self {
        RunMeta {
            nmax: spec.nmax(),
            variable: spec.variable.to_string(),
            points: spec.grid.len(),
            detectors: spec
                .detectors
                .iter()
                .map(|d| format!("{}:{}", d.label, d.model.label()))
                .collect(),
            witness: WitnessMeta {
                a_points: spec.witness_cfg.a_grid.len(),
                s_points: spec.witness_cfg.s_grid.len(),
                s_max: spec.witness_cfg.s_grid.last().copied().unwrap_or(0.0),
                r_max: spec.witness_cfg.r_max,
                refine_tol: spec.witness_cfg.refine_tol,
            },
            preset_table: crate::presets::PRESET_TABLE_ID.to_string(),
        }
    }
}

#[derive(Serialize)]
struct JsonRow<'a> {
    variable: &'a str,
    value: f64,
    detector: &'a str,
    model: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    w00: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    witness: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    a_opt: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    s_opt: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    p0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    p1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    herald_prob: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<&'a str>,
}

#[derive(Serialize)]
struct JsonDoc<'a> {
    meta: &'a RunMeta,
    rows: Vec<JsonRow<'a>>,
}

/// JSON mirror of the CSV rows plus run metadata.
pub fn json_string(meta: &RunMeta, rows: &[SweepRow]) -> Result<String> {
    let json_rows: Vec<JsonRow> = rows
        .iter()
        .map(|row| {
            let (values, error) = match &row.outcome {
                RowOutcome::Ok(v) => (Some(v), None),
                RowOutcome::Failed { reason } => (None, Some(reason.as_str())),
            };
            JsonRow {
                variable: row.variable.name(),
                value: row.value,
                detector: &row.detector,
                model: row.model,
                w00: values.map(|v| v.w00),
                witness: values.map(|v| v.witness),
                a_opt: values.map(|v| v.a_opt),
                s_opt: values.map(|v| v.s_opt),
                p0: values.map(|v| v.p0),
                p1: values.map(|v| v.p1),
                herald_prob: values.map(|v| v.herald_prob),
                error,
            }
        })
        .collect();
    Ok(serde_json::to_string_pretty(&JsonDoc {
        meta,
        rows: json_rows,
    })?)
}

pub fn write_json(meta: &RunMeta, rows: &[SweepRow], path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(json_string(meta, rows)?.as_bytes())?;
    w.write_all(b"\n")?;
    Ok(())
}

/// Portable density-matrix dump: dimension, row-major elements, and the
/// trace clipped away by the cutoff.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct DmDump {
    pub dim: usize,
    pub elements: Vec<f64>,
    pub trace_deficit: f64,
}

impl DmDump {
    pub fn from_state(rho: &DensityMatrix) -> Self {
        let dim = rho.dim();
        let mut elements = Vec::with_capacity(dim * dim);
        for l in 0..dim {
            for n in 0..dim {
                elements.push(rho.element(l, n));
            }
        }
        DmDump {
            dim,
            elements,
            trace_deficit: rho.trace_deficit(),
        }
    }

    /// Rebuild the state, re-running all physicality validation.
    pub fn to_state(&self) -> Result<DensityMatrix> {
        if self.dim == 0 {
            return Err(Error::config("state.dim", "dimension must be positive"));
        }
        let needed = self.dim.checked_mul(self.dim).ok_or_else(|| {
            Error::config("state.dim", format!("dimension {} is too large", self.dim))
        })?;
        if self.elements.len() != needed {
            return Err(Error::config(
                "state.elements",
                format!(
                    "dim {} needs {} elements, got {}",
                    self.dim,
                    needed,
                    self.elements.len()
                ),
            ));
        }
        let mat = DMatrix::from_row_slice(self.dim, self.dim, &self.elements);
        DensityMatrix::from_parts(mat, self.trace_deficit)
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}
