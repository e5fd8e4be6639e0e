//! Run configuration parsed from TOML.
//!
//! A config file carries up to five sections — `[experiment]`, `[detector]`,
//! `[witness]`, `[sweep]`, `[output]` — each optional and each field
//! optional, falling back to the reference defaults. Unknown keys are
//! rejected so typos fail loudly instead of silently running the defaults.

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::fock::SqueezedVacuumSpec;
use crate::presets;
use crate::subtraction::{DetectorModel, ExperimentParams};
use crate::sweep::{default_detectors, logspace, DetectorEntry, SweepSpec, SweepVariable};
use crate::witness::{linspace, WitnessConfig, DEFAULT_R_MAX};

/// Top-level config file contents; every section has a defaulted fallback.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(default)]
    pub experiment: ExperimentSection,
    #[serde(default)]
    pub detector: DetectorSection,
    #[serde(default)]
    pub witness: WitnessSection,
    #[serde(default)]
    pub sweep: SweepSection,
    #[serde(default)]
    pub output: OutputSection,
}

/// `[experiment]`: preparation parameters held fixed unless swept.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    /// Pure squeezing level in dB (non-positive), default −4.67.
    pub v0_db: Option<f64>,
    /// Input impurity, default 0.1771.
    pub r1: Option<f64>,
    /// Tap reflectivity, default 0.08.
    pub r2: Option<f64>,
    /// Heralding mode purity, default 0.8.
    pub mode_purity: Option<f64>,
    /// Homodyne efficiency, default 0.85.
    pub eta_hd: Option<f64>,
    /// Truncation level, default 40.
    pub nmax: Option<usize>,
}

/// `[detector]`: the tap detector used by single-state commands.
///
/// Either name a catalog `preset` or give explicit `pdc`/`eta`; the ideal
/// models take neither. `model` picks one of the four behaviors
/// (pnrd, npnrd, impnrd, imnpnrd).
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectorSection {
    pub preset: Option<String>,
    pub pdc: Option<f64>,
    pub eta: Option<f64>,
    pub model: Option<String>,
    /// Heralding click count, default 1.
    pub clicks: Option<usize>,
}

/// `[witness]`: search-grid shape for the non-Gaussianity witness.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WitnessSection {
    /// Points on the mixing-weight grid over [0,1], default 101.
    pub a_points: Option<usize>,
    /// Points on the anti-squeezing grid over [0, s_max], default 61.
    pub s_points: Option<usize>,
    /// Upper end of the anti-squeezing grid, default 1.0.
    pub s_max: Option<f64>,
    /// Gaussian-boundary inner search bracket, default 3.0.
    pub r_max: Option<f64>,
    /// Golden-section termination width, default 1e-6.
    pub refine_tol: Option<f64>,
}

/// `[sweep]`: swept variable, grid, and detector set.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    /// One of v0_db, r1, r2, eta_apd, eta_hd, pdc, mode_purity; default pdc.
    pub variable: Option<String>,
    pub from: Option<f64>,
    pub to: Option<f64>,
    pub points: Option<usize>,
    /// Logarithmic grid spacing (needs positive endpoints), default false.
    pub log: Option<bool>,
    /// Detector references as `preset:model` (e.g. `si-aqr-12:imnpnrd`) or
    /// `ideal:pnrd` / `ideal:npnrd`; default is the stock six-detector set.
    pub detectors: Option<Vec<String>>,
}

/// `[output]`: optional artifact destinations.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub csv: Option<String>,
    pub json: Option<String>,
    /// Density-matrix dump destination for single-state commands.
    pub dump_state: Option<String>,
}

impl ConfigFile {
    /// Parse a TOML document, rejecting unknown keys.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::config("config", e.to_string()))
    }

    /// Preparation parameters with reference defaults filled in.
    pub fn resolve_experiment(&self) -> Result<ExperimentParams> {
        let e = &self.experiment;
        let spec = SqueezedVacuumSpec::from_v0_db(e.v0_db.unwrap_or(-4.67), e.nmax.unwrap_or(40))?;
        ExperimentParams::new(
            spec,
            e.r1.unwrap_or(0.1771),
            e.r2.unwrap_or(0.08),
            e.mode_purity.unwrap_or(0.8),
            e.eta_hd.unwrap_or(0.85),
        )
    }

    /// Detector for single-state commands; defaults to the InGaAs reference
    /// preset in its non-resolving behavior.
    pub fn resolve_detector(&self) -> Result<DetectorEntry> {
        let d = &self.detector;
        let (ideal, resolving) =
            parse_model_name(d.model.as_deref().unwrap_or("imnpnrd"), "detector.model")?;
        let explicit = d.pdc.is_some() || d.eta.is_some();
        let mut entry = if ideal {
            if d.preset.is_some() || explicit {
                return Err(Error::config(
                    "detector.model",
                    "ideal models (pnrd, npnrd) take no preset, pdc, or eta",
                ));
            }
            if resolving {
                DetectorEntry::new("ideal", DetectorModel::ideal_pnrd())
            } else {
                DetectorEntry::new("ideal", DetectorModel::ideal_npnrd())
            }
        } else if explicit {
            if d.preset.is_some() {
                return Err(Error::config(
                    "detector.preset",
                    "give either a preset or explicit pdc/eta, not both",
                ));
            }
            let (Some(pdc), Some(eta)) = (d.pdc, d.eta) else {
                return Err(Error::config(
                    "detector.pdc",
                    "explicit detectors need both pdc and eta",
                ));
            };
            DetectorEntry::new("custom", DetectorModel::imperfect(pdc, eta, resolving)?)
        } else {
            let preset = presets::lookup(d.preset.as_deref().unwrap_or("ingaas-id200"))?;
            DetectorEntry::new(preset.name, preset.to_model(resolving))
        };
        if let Some(m) = d.clicks {
            entry.model = entry.model.with_clicks(m)?;
        }
        Ok(entry)
    }

    /// Witness search configuration with default grids filled in.
    pub fn resolve_witness(&self) -> Result<WitnessConfig> {
        let w = &self.witness;
        let a_points = w.a_points.unwrap_or(101);
        if a_points == 0 {
            return Err(Error::config("witness.a_points", "need at least one point"));
        }
        let s_points = w.s_points.unwrap_or(61);
        if s_points == 0 {
            return Err(Error::config("witness.s_points", "need at least one point"));
        }
        let s_max = w.s_max.unwrap_or(1.0);
        if !s_max.is_finite() || s_max <= 0.0 {
            return Err(Error::config("witness.s_max", "must be positive"));
        }
        let cfg = WitnessConfig {
            a_grid: linspace(0.0, 1.0, a_points),
            s_grid: linspace(0.0, s_max, s_points),
            r_max: w.r_max.unwrap_or(DEFAULT_R_MAX),
            refine_tol: w.refine_tol.unwrap_or(1e-6),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Full sweep description: swept variable, grid, detector set, and the
    /// fixed base parameters.
    pub fn resolve_sweep(&self) -> Result<SweepSpec> {
        let s = &self.sweep;
        let variable: SweepVariable = match s.variable.as_deref() {
            Some(name) => name.parse()?,
            None => SweepVariable::Pdc,
        };
        let grid = self.resolve_grid(variable)?;
        let detectors = match &s.detectors {
            Some(names) => names
                .iter()
                .map(|name| parse_detector_ref(name))
                .collect::<Result<Vec<_>>>()?,
            None => default_detectors(),
        };
        Ok(SweepSpec {
            variable,
            grid,
            detectors,
            base: self.resolve_experiment()?,
            witness_cfg: self.resolve_witness()?,
        })
    }

    fn resolve_grid(&self, variable: SweepVariable) -> Result<Vec<f64>> {
        let s = &self.sweep;
        match (s.from, s.to, s.points) {
            (None, None, None) => {
                if s.log.is_some() {
                    return Err(Error::config(
                        "sweep.log",
                        "log spacing needs explicit from/to/points",
                    ));
                }
                Ok(variable.default_grid())
            }
            (Some(from), Some(to), Some(points)) => {
                if points == 0 {
                    return Err(Error::config("sweep.points", "need at least one point"));
                }
                if !from.is_finite() || !to.is_finite() || (points > 1 && from >= to) {
                    return Err(Error::config(
                        "sweep.from",
                        format!("endpoints must be finite with from < to, got {from}..{to}"),
                    ));
                }
                if s.log.unwrap_or(false) {
                    if from <= 0.0 {
                        return Err(Error::config(
                            "sweep.from",
                            "log spacing needs positive endpoints",
                        ));
                    }
                    Ok(logspace(from, to, points))
                } else {
                    Ok(linspace(from, to, points))
                }
            }
            _ => Err(Error::config(
                "sweep.points",
                "from, to, and points must be given together",
            )),
        }
    }
}

fn parse_model_name(name: &str, field: &str) -> Result<(bool, bool)> {
    match name.to_ascii_lowercase().as_str() {
        "pnrd" => Ok((true, true)),
        "npnrd" => Ok((true, false)),
        "impnrd" => Ok((false, true)),
        "imnpnrd" => Ok((false, false)),
        other => Err(Error::config(
            field,
            format!("unknown model '{other}'; expected pnrd, npnrd, impnrd, or imnpnrd"),
        )),
    }
}

/// Parse a sweep detector reference of the form `name:model`, where `name`
/// is `ideal` or a catalog preset.
pub fn parse_detector_ref(text: &str) -> Result<DetectorEntry> {
    let Some((name, model_name)) = text.split_once(':') else {
        return Err(Error::config(
            "sweep.detectors",
            format!("'{text}' is not of the form name:model"),
        ));
    };
    let (ideal, resolving) = parse_model_name(model_name.trim(), "sweep.detectors")?;
    let name = name.trim();
    if name.eq_ignore_ascii_case("ideal") {
        if !ideal {
            return Err(Error::config(
                "sweep.detectors",
                format!("'{text}': the ideal detector pairs with pnrd or npnrd"),
            ));
        }
        let model = if resolving {
            DetectorModel::ideal_pnrd()
        } else {
            DetectorModel::ideal_npnrd()
        };
        Ok(DetectorEntry::new("ideal", model))
    } else {
        if ideal {
            return Err(Error::config(
                "sweep.detectors",
                format!("'{text}': catalog presets pair with impnrd or imnpnrd"),
            ));
        }
        let preset = presets::lookup(name)?;
        Ok(DetectorEntry::new(preset.name, preset.to_model(resolving)))
    }
}
