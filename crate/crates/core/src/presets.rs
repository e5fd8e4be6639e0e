//! Catalog of avalanche-photodiode detector presets used in the sweeps:
//! near-infrared Si APDs and telecom InGaAs APDs with their dark-count
//! probabilities and quantum efficiencies.

use crate::error::{Error, Result};
use crate::subtraction::DetectorModel;

/// Version tag recorded in emitted metadata so output files state which
/// catalog produced them.
pub const PRESET_TABLE_ID: &str = "apd-catalog-v1";

/// One catalog entry. Either detector behavior (resolving or on-off) can be
/// derived from it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorPreset {
    pub name: &'static str,
    /// Dark-count probability per gate.
    pub pdc: f64,
    /// Quantum efficiency.
    pub eta: f64,
}

impl DetectorPreset {
    /// Imperfect detector model with this preset's dark counts and
    /// efficiency.
    pub fn to_model(&self, resolving: bool) -> DetectorModel {
        DetectorModel::imperfect(self.pdc, self.eta, resolving)
            .expect("catalog values are in range")
    }
}

/// The full catalog: five Si models and an InGaAs id200 plus three id220
/// gate settings.
pub const PRESETS: &[DetectorPreset] = &[
    DetectorPreset {
        name: "si-aqr-12",
        pdc: 5e-6,
        eta: 0.45,
    },
    DetectorPreset {
        name: "si-aqr-13",
        pdc: 2.5e-6,
        eta: 0.45,
    },
    DetectorPreset {
        name: "si-aqr-14",
        pdc: 1e-6,
        eta: 0.45,
    },
    DetectorPreset {
        name: "si-aqr-15",
        pdc: 5e-7,
        eta: 0.45,
    },
    DetectorPreset {
        name: "si-aqr-16",
        pdc: 2.5e-7,
        eta: 0.45,
    },
    DetectorPreset {
        name: "ingaas-id200",
        pdc: 1e-4,
        eta: 0.10,
    },
    DetectorPreset {
        name: "ingaas-id220-10",
        pdc: 1e-5,
        eta: 0.10,
    },
    DetectorPreset {
        name: "ingaas-id220-15",
        pdc: 2.5e-5,
        eta: 0.15,
    },
    DetectorPreset {
        name: "ingaas-id220-20",
        pdc: 5e-5,
        eta: 0.20,
    },
];

/// Wavelength-family shorthands: `si` is the stock Si APD, `ingaas` the
/// stock telecom APD.
/// Family aliases accepted by [`lookup`], mapping to catalog names.
pub const ALIASES: &[(&str, &str)] = &[("si", "si-aqr-12"), ("ingaas", "ingaas-id200")];

/// Case-insensitive preset lookup accepting catalog names and family
/// aliases.
pub fn lookup(name: &str) -> Result<&'static DetectorPreset> {
    let needle = name.to_ascii_lowercase();
    let resolved = ALIASES
        .iter()
        .find(|(alias, _)| *alias == needle)
        .map_or(needle.as_str(), |(_, target)| *target);
    PRESETS
        .iter()
        .find(|p| p.name == resolved)
        .ok_or_else(|| Error::UnknownPreset(name.to_string()))
}
