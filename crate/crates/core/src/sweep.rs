//! Parameter sweeps: vary one experiment or detector parameter over a grid,
//! prepare the kitten state for every (grid value, detector) pair, and
//! record Wigner-origin and witness results in deterministic row order.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fock::{wigner_origin, SqueezedVacuumSpec};
use crate::subtraction::{prepare_kitten_detailed, DetectorModel, ExperimentParams};
use crate::witness::{evaluate_witness, linspace, WitnessConfig};

/// The experiment or detector parameter a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVariable {
    V0Db,
    R1,
    R2,
    EtaApd,
    EtaHd,
    Pdc,
    ModePurity,
}

impl SweepVariable {
    pub const ALL: [SweepVariable; 7] = [
        SweepVariable::V0Db,
        SweepVariable::R1,
        SweepVariable::R2,
        SweepVariable::EtaApd,
        SweepVariable::EtaHd,
        SweepVariable::Pdc,
        SweepVariable::ModePurity,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            SweepVariable::V0Db => "v0_db",
            SweepVariable::R1 => "r1",
            SweepVariable::R2 => "r2",
            SweepVariable::EtaApd => "eta_apd",
            SweepVariable::EtaHd => "eta_hd",
            SweepVariable::Pdc => "pdc",
            SweepVariable::ModePurity => "mode_purity",
        }
    }

    fn value_in_range(&self, v: f64) -> bool {
        if !v.is_finite() {
            return false;
        }
        match self {
            SweepVariable::V0Db => v < 0.0,
            SweepVariable::R1 => (0.0..1.0).contains(&v),
            SweepVariable::R2 => v > 0.0 && v < 1.0,
            SweepVariable::EtaApd | SweepVariable::EtaHd => v > 0.0 && v <= 1.0,
            SweepVariable::Pdc => (0.0..1.0).contains(&v),
            SweepVariable::ModePurity => (0.0..=1.0).contains(&v),
        }
    }

    /// Default figure-reproduction grid: 41 points, log-spaced for dark
    /// counts and linear otherwise.
    pub fn default_grid(&self) -> Vec<f64> {
        match self {
            SweepVariable::V0Db => linspace(-6.0, -0.1, 41),
            SweepVariable::R1 => linspace(0.0, 0.6, 41),
            SweepVariable::R2 => linspace(0.01, 0.3, 41),
            SweepVariable::EtaApd => linspace(0.01, 1.0, 41),
            SweepVariable::EtaHd => linspace(0.3, 1.0, 41),
            SweepVariable::Pdc => logspace(1e-6, 1e-2, 41),
            SweepVariable::ModePurity => linspace(0.3, 1.0, 41),
        }
    }
}

impl fmt::Display for SweepVariable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepVariable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let needle = s.to_ascii_lowercase();
        SweepVariable::ALL
            .into_iter()
            .find(|v| v.name() == needle)
            .ok_or_else(|| {
                Error::config(
                    "sweep.variable",
                    format!(
                        "unknown variable {s:?}; expected one of {}",
                        SweepVariable::ALL.map(|v| v.name()).join(", ")
                    ),
                )
            })
    }
}

/// `n` log-spaced points covering `[lo, hi]` inclusive.
pub fn logspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo, "logspace needs 0 < lo < hi");
    linspace(lo.ln(), hi.ln(), n)
        .into_iter()
        .enumerate()
        .map(|(i, x)| {
            if i == n - 1 {
                hi
            } else if i == 0 {
                lo
            } else {
                x.exp()
            }
        })
        .collect()
}

/// One detector to evaluate per grid point: a display label plus the model.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectorEntry {
    /// Catalog name, or "ideal".
    pub label: String,
    pub model: DetectorModel,
}

impl DetectorEntry {
    pub fn new(label: impl Into<String>, model: DetectorModel) -> Self {
        DetectorEntry {
            label: label.into(),
            model,
        }
    }
}

/// Stock curve set matching the four-line figures: the reference Si and
/// InGaAs detectors in both imperfect behaviors, plus the two ideal limits.
pub fn default_detectors() -> Vec<DetectorEntry> {
    let si = crate::presets::lookup("si-aqr-12").expect("catalog entry");
    let ingaas = crate::presets::lookup("ingaas-id200").expect("catalog entry");
    vec![
        DetectorEntry::new(si.name, si.to_model(true)),
        DetectorEntry::new(si.name, si.to_model(false)),
        DetectorEntry::new(ingaas.name, ingaas.to_model(true)),
        DetectorEntry::new(ingaas.name, ingaas.to_model(false)),
        DetectorEntry::new("ideal", DetectorModel::ideal_pnrd()),
        DetectorEntry::new("ideal", DetectorModel::ideal_npnrd()),
    ]
}

/// Complete description of one sweep.
#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub variable: SweepVariable,
    /// Ascending grid of values for `variable`.
    pub grid: Vec<f64>,
    pub detectors: Vec<DetectorEntry>,
    /// Parameters held fixed (except the swept one).
    pub base: ExperimentParams,
    pub witness_cfg: WitnessConfig,
}

impl SweepSpec {
    /// Sweep at the reference configuration with default grid and detectors.
    pub fn reference(variable: SweepVariable) -> Self {
        SweepSpec {
            variable,
            grid: variable.default_grid(),
            detectors: default_detectors(),
            base: ExperimentParams::default(),
            witness_cfg: WitnessConfig::default(),
        }
    }

    pub fn nmax(&self) -> usize {
        self.base.spec.nmax()
    }

    fn validate(&self) -> Result<()> {
        if self.grid.is_empty() {
            return Err(Error::config("sweep.grid", "grid must not be empty"));
        }
        if !self.grid.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::config(
                "sweep.grid",
                "grid must be strictly ascending",
            ));
        }
        if let Some(v) = self
            .grid
            .iter()
            .find(|&&v| !self.variable.value_in_range(v))
        {
            return Err(Error::config(
                "sweep.grid",
                format!(
                    "value {v} outside the physical range of variable {}",
                    self.variable
                ),
            ));
        }
        if self.detectors.is_empty() {
            return Err(Error::config(
                "sweep.detectors",
                "at least one detector entry is required",
            ));
        }
        Ok(())
    }
}

/// Numeric outputs of one successful grid evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RowValues {
    pub w00: f64,
    pub witness: f64,
    pub a_opt: f64,
    pub s_opt: f64,
    pub p0: f64,
    pub p1: f64,
    pub herald_prob: f64,
}

/// Result of one grid evaluation: values, or the numerical reason it could
/// not be evaluated (never silently dropped).
#[derive(Debug, Clone, PartialEq)]
pub enum RowOutcome {
    Ok(RowValues),
    Failed { reason: String },
}

/// One emitted row: `(grid value, detector)` coordinates plus the outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub variable: SweepVariable,
    pub value: f64,
    pub detector: String,
    pub model: &'static str,
    pub outcome: RowOutcome,
}

impl SweepRow {
    pub fn values(&self) -> Option<&RowValues> {
        match &self.outcome {
            RowOutcome::Ok(v) => Some(v),
            RowOutcome::Failed { .. } => None,
        }
    }
}

/// Substitute the swept value into the base parameters or detector model.
/// Ideal detectors ignore dark-count and efficiency substitution: they stay
/// the ideal reference curves of the figures.
fn apply_variable(
    variable: SweepVariable,
    value: f64,
    base: &ExperimentParams,
    model: &DetectorModel,
) -> Result<(ExperimentParams, DetectorModel)> {
    let mut params = *base;
    let mut det = *model;
    match variable {
        SweepVariable::V0Db => {
            let spec = SqueezedVacuumSpec::from_v0_db(value, base.spec.nmax())?;
            params = ExperimentParams::new(spec, base.r1, base.r2, base.mode_purity, base.eta_hd)?;
        }
        SweepVariable::R1 => {
            params =
                ExperimentParams::new(base.spec, value, base.r2, base.mode_purity, base.eta_hd)?;
        }
        SweepVariable::R2 => {
            params =
                ExperimentParams::new(base.spec, base.r1, value, base.mode_purity, base.eta_hd)?;
        }
        SweepVariable::ModePurity => {
            params = ExperimentParams::new(base.spec, base.r1, base.r2, value, base.eta_hd)?;
        }
        SweepVariable::EtaHd => {
            params = ExperimentParams::new(base.spec, base.r1, base.r2, base.mode_purity, value)?;
        }
        SweepVariable::EtaApd => {
            if !det.ideal() {
                det = DetectorModel::imperfect(det.pdc(), value, det.resolving())?
                    .with_clicks(det.clicks())?;
            }
        }
        SweepVariable::Pdc => {
            if !det.ideal() {
                det = DetectorModel::imperfect(value, det.eta(), det.resolving())?
                    .with_clicks(det.clicks())?;
            }
        }
    }
    Ok((params, det))
}

fn evaluate_point(spec: &SweepSpec, value: f64, entry: &DetectorEntry) -> Result<SweepRow> {
    let row = |outcome| SweepRow {
        variable: spec.variable,
        value,
        detector: entry.label.clone(),
        model: entry.model.label(),
        outcome,
    };
    let run = || -> Result<RowValues> {
        let (params, det) = apply_variable(spec.variable, value, &spec.base, &entry.model)?;
        let prep = prepare_kitten_detailed(&params, &det)?;
        let wit = evaluate_witness(&prep.state, &spec.witness_cfg)?;
        Ok(RowValues {
            w00: wigner_origin(&prep.state),
            witness: wit.witness_value,
            a_opt: wit.a_opt,
            s_opt: wit.s_opt,
            p0: wit.p0,
            p1: wit.p1,
            herald_prob: prep.herald_probability,
        })
    };
    match run() {
        Ok(values) => Ok(row(RowOutcome::Ok(values))),
        Err(e) if e.is_numerical() => Ok(row(RowOutcome::Failed {
            reason: e.to_string(),
        })),
        Err(e) => Err(e),
    }
}

/// Evaluate the whole grid × detector matrix. Work items run in parallel;
/// rows come back in `(grid value, detector)` order regardless of
/// scheduling, and numerical failures become explicit failed rows.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    let jobs: Vec<(f64, &DetectorEntry)> = spec
        .grid
        .iter()
        .flat_map(|&v| spec.detectors.iter().map(move |d| (v, d)))
        .collect();
    jobs.par_iter()
        .map(|(value, entry)| evaluate_point(spec, *value, entry))
        .collect()
}

/// Row column selectable for crossing extraction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowColumn {
    W00,
    Witness,
}

impl RowColumn {
    fn of(&self, v: &RowValues) -> f64 {
        match self {
            RowColumn::W00 => v.w00,
            RowColumn::Witness => v.witness,
        }
    }
}

/// Grid value where `column` crosses `threshold`, linearly interpolated
/// between the first pair of consecutive successful rows that bracket it.
/// `None` when the series never brackets the threshold.
///
/// Expects rows from a single detector series (filter first when a sweep
/// carried several detectors).
pub fn find_crossing(rows: &[SweepRow], column: RowColumn, threshold: f64) -> Option<f64> {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter_map(|r| r.values().map(|v| (r.value, column.of(v))))
        .collect();
    for pair in pts.windows(2) {
        let (x0, y0) = pair[0];
        let (x1, y1) = pair[1];
        if (y0 - threshold) == 0.0 {
            return Some(x0);
        }
        if (y0 - threshold) * (y1 - threshold) < 0.0 {
            return Some(x0 + (threshold - y0) * (x1 - x0) / (y1 - y0));
        }
    }
    match pts.last() {
        Some(&(x, y)) if y == threshold => Some(x),
        _ => None,
    }
}
