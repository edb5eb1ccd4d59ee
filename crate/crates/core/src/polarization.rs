//! Jones-calculus model of the polarization transfer with pumps at 45°,
//! analyzed by a polarizing beamsplitter with finite extinction and two
//! detectors of unequal efficiency.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::resonance::{poisson_draw, NoiseModel};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JonesVector {
    h: Complex64,
    v: Complex64,
}

impl JonesVector {
    /// Normalizes `(h, v)`; fails for the zero vector.
    pub fn new(h: Complex64, v: Complex64) -> Result<Self> {
        let norm = (h.norm_sqr() + v.norm_sqr()).sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::domain("Jones vector must be non-zero and finite"));
        }
        Ok(Self {
            h: h / norm,
            v: v / norm,
        })
    }

    pub fn h(&self) -> Complex64 {
        self.h
    }

    pub fn v(&self) -> Complex64 {
        self.v
    }

    pub fn intensity_h(&self) -> f64 {
        self.h.norm_sqr()
    }

    pub fn intensity_v(&self) -> f64 {
        self.v.norm_sqr()
    }

    pub fn with_global_phase(self, phi: f64) -> Self {
        let p = Complex64::from_polar(1.0, phi);
        Self {
            h: self.h * p,
            v: self.v * p,
        }
    }
}

pub fn jones_linear(theta_deg: f64) -> JonesVector {
    let t = theta_deg.to_radians();
    JonesVector {
        h: Complex64::new(t.cos(), 0.0),
        v: Complex64::new(t.sin(), 0.0),
    }
}

pub const VALIDATED_PUMP_ANGLE_DEG: f64 = 45.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Converted {
    pub signal: JonesVector,
    /// Set when the pump angle is not the validated 45°.
    pub extrapolated: bool,
}

/// With both pumps linearly polarized at 45° the H and V probe components
/// convert with equal amplitude, so the signal inherits the probe state.
pub fn convert_polarization(probe: JonesVector, pump_angle_deg: f64) -> Converted {
    let extrapolated = (pump_angle_deg - VALIDATED_PUMP_ANGLE_DEG).abs() > 1e-9;
    if extrapolated {
        log::warn!("pump angle {pump_angle_deg}° is outside the validated 45° configuration");
    }
    Converted {
        signal: probe,
        extrapolated,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectionParams {
    /// PBS extinction ratio R (correct : leaked); `f64::INFINITY` is ideal.
    pub pbs_extinction: f64,
    /// Efficiency of detector 2 relative to detector 1.
    pub pmt_eff_ratio: f64,
    /// Error in the prepared input angle, degrees.
    #[serde(rename = "prep_error_deg")]
    pub prep_error_deg: f64,
}

impl Default for DetectionParams {
    fn default() -> Self {
        Self {
            pbs_extinction: 20.0,
            pmt_eff_ratio: 0.9,
            prep_error_deg: 0.0,
        }
    }
}

impl DetectionParams {
    pub fn ideal() -> Self {
        Self {
            pbs_extinction: f64::INFINITY,
            pmt_eff_ratio: 1.0,
            prep_error_deg: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.pbs_extinction > 1.0) {
            return Err(Error::domain("PBS extinction ratio must exceed 1"));
        }
        if !(self.pmt_eff_ratio > 0.0 && self.pmt_eff_ratio.is_finite()) {
            return Err(Error::domain("detector efficiency ratio must be positive"));
        }
        if !self.prep_error_deg.is_finite() {
            return Err(Error::domain("preparation error must be finite"));
        }
        Ok(())
    }

    /// Fraction ℓ = 1/(R+1) of each polarization sent to the wrong port.
    pub fn leakage(&self) -> f64 {
        1.0 / (self.pbs_extinction + 1.0)
    }
}

/// Relative rates in the H (channel 1) and V (channel 2) detectors.
pub fn detect_channels(signal: &JonesVector, params: &DetectionParams) -> (f64, f64) {
    let l = params.leakage();
    let (ih, iv) = (signal.intensity_h(), signal.intensity_v());
    let r1 = (1.0 - l) * ih + l * iv;
    let r2 = params.pmt_eff_ratio * ((1.0 - l) * iv + l * ih);
    (r1, r2)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolarizationScan {
    pub theta_deg: Vec<f64>,
    pub rate_ch1: Vec<f64>,
    pub rate_ch2: Vec<f64>,
}

/// Rotates the probe through `theta_grid` (degrees) with the pumps at 45°.
/// With `NoiseModel::Poisson`, rates are scaled to `peak_counts` and drawn.
pub fn polarization_scan(
    theta_grid: &[f64],
    params: &DetectionParams,
    noise: NoiseModel,
    peak_counts: f64,
    seed: u64,
) -> Result<PolarizationScan> {
    params.validate()?;
    if theta_grid.is_empty() {
        return Err(Error::domain("angle grid is empty"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = PolarizationScan {
        theta_deg: theta_grid.to_vec(),
        rate_ch1: Vec::with_capacity(theta_grid.len()),
        rate_ch2: Vec::with_capacity(theta_grid.len()),
    };
    for &theta in theta_grid {
        let input = jones_linear(theta - params.prep_error_deg);
        let signal = convert_polarization(input, VALIDATED_PUMP_ANGLE_DEG).signal;
        let (r1, r2) = detect_channels(&signal, params);
        let (r1, r2) = match noise {
            NoiseModel::None => (r1, r2),
            NoiseModel::Poisson => (
                poisson_draw(&mut rng, r1 * peak_counts),
                poisson_draw(&mut rng, r2 * peak_counts),
            ),
        };
        out.rate_ch1.push(r1);
        out.rate_ch2.push(r2);
    }
    Ok(out)
}

/// Fraction of efficiency-corrected counts landing in the correct channel,
/// averaged over H and V inputs.
pub fn fidelity(params: &DetectionParams) -> Result<f64> {
    params.validate()?;
    let corrected = DetectionParams {
        pmt_eff_ratio: 1.0,
        ..*params
    };
    let correct_fraction = |theta: f64, correct_is_ch1: bool| {
        let signal = convert_polarization(
            jones_linear(theta - params.prep_error_deg),
            VALIDATED_PUMP_ANGLE_DEG,
        )
        .signal;
        let (r1, r2) = detect_channels(&signal, &corrected);
        if correct_is_ch1 {
            r1 / (r1 + r2)
        } else {
            r2 / (r1 + r2)
        }
    };
    Ok(0.5 * (correct_fraction(0.0, true) + correct_fraction(90.0, false)))
}

/// Closed form (1−ℓ)cos²ε + ℓ sin²ε.
pub fn fidelity_closed_form(params: &DetectionParams) -> f64 {
    let l = params.leakage();
    let e = params.prep_error_deg.to_radians();
    (1.0 - l) * e.cos().powi(2) + l * e.sin().powi(2)
}
