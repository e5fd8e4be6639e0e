//! Translation of laboratory observables — measured squeezing and
//! anti-squeezing variances, homodyne efficiency components — into the model
//! parameters (pure squeezing `V0`, input impurity `r1`, homodyne
//! efficiency).
//!
//! Measured variances mix the pure-state variance with vacuum noise through
//! the total detection transmission: `V_meas = T·V_pure + (1−T)` with
//! `T = eta_hd·(1−r_total)`. The estimators below invert that relation.

use crate::error::{Error, Result};

/// Laboratory observables for one calibration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibrationInput {
    /// Measured squeezed-quadrature variance, linear units (vacuum = 1).
    pub v_sqz: f64,
    /// Measured anti-squeezed-quadrature variance, linear units.
    pub v_asqz: f64,
    /// Photodiode quantum efficiency.
    pub eta_qe: f64,
    /// Propagation transmission to the homodyne detector.
    pub eta_t: f64,
    /// Interference fringe visibility.
    pub zeta: f64,
    /// Tap reflectivity used when splitting the total impurity.
    pub r2: f64,
}

impl CalibrationInput {
    pub fn validate(&self) -> Result<()> {
        if !(self.v_sqz.is_finite() && self.v_sqz > 0.0 && self.v_sqz < 1.0) {
            return Err(Error::InvalidMeasurement(format!(
                "squeezed variance must lie in (0,1), got {}",
                self.v_sqz
            )));
        }
        if !(self.v_asqz.is_finite() && self.v_asqz > 1.0) {
            return Err(Error::InvalidMeasurement(format!(
                "anti-squeezed variance must exceed 1, got {}",
                self.v_asqz
            )));
        }
        for (name, v) in [
            ("eta_qe", self.eta_qe),
            ("eta_t", self.eta_t),
            ("zeta", self.zeta),
        ] {
            if !(v.is_finite() && v > 0.0 && v <= 1.0) {
                return Err(Error::InvalidMeasurement(format!(
                    "{name} must lie in (0,1], got {v}"
                )));
            }
        }
        if !(self.r2.is_finite() && (0.0..1.0).contains(&self.r2)) {
            return Err(Error::InvalidMeasurement(format!(
                "tap reflectivity must lie in [0,1), got {}",
                self.r2
            )));
        }
        Ok(())
    }
}

/// Full calibration output: every model parameter derivable from one
/// [`CalibrationInput`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibrationResult {
    pub v0: f64,
    pub v0_db: f64,
    pub r_total: f64,
    pub r1: f64,
    pub eta_hd: f64,
}

/// Homodyne efficiency from its components: `eta_qe · eta_t · zeta²`.
pub fn homodyne_efficiency(eta_qe: f64, eta_t: f64, zeta: f64) -> f64 {
    for (name, v) in [("eta_qe", eta_qe), ("eta_t", eta_t), ("zeta", zeta)] {
        assert!(
            v.is_finite() && v > 0.0 && v <= 1.0,
            "{name} must lie in (0,1], got {v}"
        );
    }
    eta_qe * eta_t * zeta * zeta
}

/// Pure squeezed variance from the measured pair:
/// `V0 = (1 − V_sqz) / (V_asqz − 1)`.
///
/// Both variances respond to loss by the same vacuum admixture, so the
/// deviation ratio cancels the unknown transmission.
pub fn estimate_pure_squeezing(v_sqz: f64, v_asqz: f64) -> Result<f64> {
    if !(v_sqz.is_finite() && v_sqz > 0.0 && v_sqz < 1.0) {
        return Err(Error::InvalidMeasurement(format!(
            "squeezed variance must lie in (0,1), got {v_sqz}"
        )));
    }
    if !(v_asqz.is_finite() && v_asqz > 1.0) {
        return Err(Error::InvalidMeasurement(format!(
            "anti-squeezed variance must exceed 1, got {v_asqz}"
        )));
    }
    Ok((1.0 - v_sqz) / (v_asqz - 1.0))
}

/// Total impurity between the squeezer and the homodyne detector, assuming
/// the pure pair is minimum-uncertainty (`V_pure,asqz = 1/V0`):
///
/// `r_total = [eta_hd·(2−V_sqz−V_asqz) − (1−V_sqz)(1−V_asqz)] / [eta_hd·(2−V_sqz−V_asqz)]`.
pub fn estimate_total_impurity(v_sqz: f64, v_asqz: f64, eta_hd: f64) -> Result<f64> {
    if !(eta_hd.is_finite() && eta_hd > 0.0 && eta_hd <= 1.0) {
        return Err(Error::InvalidMeasurement(format!(
            "homodyne efficiency must lie in (0,1], got {eta_hd}"
        )));
    }
    let spread = 2.0 - v_sqz - v_asqz;
    let denom = eta_hd * spread;
    if denom.abs() < 1e-9 {
        return Err(Error::IllConditionedMeasurement(format!(
            "variance spread 2−V_sqz−V_asqz = {spread:.3e} leaves the impurity undetermined"
        )));
    }
    let r_total = (denom - (1.0 - v_sqz) * (1.0 - v_asqz)) / denom;
    // a perfectly pure pair can land at −1e-17 by rounding
    if r_total < 0.0 && r_total > -1e-9 {
        return Ok(0.0);
    }
    if !(0.0..1.0).contains(&r_total) {
        return Err(Error::InconsistentCalibration(format!(
            "total impurity {r_total:.4} outside [0,1); measured variances are inconsistent \
             with the assumed homodyne efficiency"
        )));
    }
    Ok(r_total)
}

/// Impurity in front of the tap once the tap's own reflectivity is removed
/// from the total: `(1−r1)(1−r2) = 1−r_total`.
pub fn split_impurity(r_total: f64, r2: f64) -> Result<f64> {
    assert!(
        r_total.is_finite() && (0.0..1.0).contains(&r_total),
        "total impurity must lie in [0,1), got {r_total}"
    );
    assert!(
        r2.is_finite() && (0.0..1.0).contains(&r2),
        "tap reflectivity must lie in [0,1), got {r2}"
    );
    let r1 = 1.0 - (1.0 - r_total) / (1.0 - r2);
    if r1 < 0.0 {
        return Err(Error::InconsistentCalibration(format!(
            "tap reflectivity {r2} already exceeds the total impurity {r_total}; \
             splitting would give r1 = {r1:.4}"
        )));
    }
    Ok(r1)
}

/// Linear variance → decibels: `10·log10(value)`.
pub fn linear_to_db(value: f64) -> Result<f64> {
    if !(value.is_finite() && value > 0.0) {
        return Err(Error::InvalidMeasurement(format!(
            "linear variance must be positive, got {value}"
        )));
    }
    Ok(10.0 * value.log10())
}

/// Decibels → linear variance: `10^(db/10)`.
pub fn db_to_linear(db: f64) -> Result<f64> {
    if !db.is_finite() {
        return Err(Error::InvalidMeasurement(format!(
            "variance level must be finite, got {db}"
        )));
    }
    Ok(10f64.powf(db / 10.0))
}

/// Run the whole chain on one input: homodyne efficiency, pure squeezing,
/// total impurity, and the pre-tap impurity split.
pub fn calibrate(input: &CalibrationInput) -> Result<CalibrationResult> {
    input.validate()?;
    let eta_hd = homodyne_efficiency(input.eta_qe, input.eta_t, input.zeta);
    let v0 = estimate_pure_squeezing(input.v_sqz, input.v_asqz)?;
    let r_total = estimate_total_impurity(input.v_sqz, input.v_asqz, eta_hd)?;
    let r1 = split_impurity(r_total, input.r2)?;
    Ok(CalibrationResult {
        v0,
        v0_db: linear_to_db(v0)?,
        r_total,
        r1,
        eta_hd,
    })
}

/// Forward model used by the calibration round-trip property: the variance a
/// homodyne detector measures when a pure variance passes a transmission
/// `eta_hd·(1−r_total)` toward it.
pub fn forward_measured_variance(v_pure: f64, r_total: f64, eta_hd: f64) -> f64 {
    let t = eta_hd * (1.0 - r_total);
    t * v_pure + (1.0 - t)
}
