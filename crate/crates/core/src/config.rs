//! The run configuration document. Every section and key is optional and
//! defaults to the standard hydrogen setup; unknown keys are rejected with
//! the path to the offending entry.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::beam::{BeamSpec, ConjugationPattern};
use crate::detection::{default_chain, ChainElement, DetectorSpec};
use crate::dispersion::{DispersionCoefficients, DispersionModel, LAB_TEMPERATURE_K};
use crate::error::{Error, Result};
use crate::fwm::{ConversionConfig, DensityScaling, KernelMode, DEFAULT_CELL_LENGTH};
use crate::polarization::DetectionParams;
use crate::resonance::ResonanceParams;
use crate::units::{Direction, FwmQuadruple, Power, Pressure, Temperature, Wavelength};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub gas: GasSection,
    pub cell: CellSection,
    pub beams: [BeamSection; 3],
    pub quadruple: QuadrupleSection,
    pub resonance: ResonanceParams,
    pub detection: DetectionSection,
    pub polarization: DetectionParams,
    pub calibration: Option<CalibrationSection>,
    pub model: ModelSection,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GasSection {
    pub coefficients: DispersionCoefficients,
    #[serde(rename = "temperature_K")]
    pub temperature_k: f64,
}

impl Default for GasSection {
    fn default() -> Self {
        Self {
            coefficients: DispersionCoefficients::HYDROGEN,
            temperature_k: LAB_TEMPERATURE_K,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CellSection {
    pub length_m: f64,
}

impl Default for CellSection {
    fn default() -> Self {
        Self {
            length_m: DEFAULT_CELL_LENGTH,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BeamRole {
    PumpHigh,
    PumpStokes,
    Probe,
}

const ROLES: [BeamRole; 3] = [BeamRole::PumpHigh, BeamRole::PumpStokes, BeamRole::Probe];

/// One driving beam. The `beams` array is ordered high-frequency pump,
/// Stokes pump, probe.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BeamSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub role: Option<BeamRole>,
    pub wavelength_nm: f64,
    #[serde(default = "default_waist_um")]
    pub waist_um: f64,
    #[serde(default)]
    pub focus_mm: f64,
    #[serde(rename = "power_W")]
    pub power_w: f64,
    #[serde(default)]
    pub pol_deg: f64,
}

fn default_waist_um() -> f64 {
    50.0
}

impl Default for RunConfig {
    fn default() -> Self {
        let beam = |role, wavelength_nm, power_w, pol_deg| BeamSection {
            role: Some(role),
            wavelength_nm,
            waist_um: default_waist_um(),
            focus_mm: 0.0,
            power_w,
            pol_deg,
        };
        Self {
            gas: GasSection::default(),
            cell: CellSection::default(),
            beams: [
                beam(BeamRole::PumpHigh, 938.0, 0.5, 45.0),
                beam(BeamRole::PumpStokes, 1538.0, 15.0, 45.0),
                beam(BeamRole::Probe, 434.0, 3e-3, 0.0),
            ],
            quadruple: QuadrupleSection::default(),
            resonance: ResonanceParams::default(),
            detection: DetectionSection::default(),
            polarization: DetectionParams::default(),
            calibration: Some(CalibrationSection::default()),
            model: ModelSection::default(),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct QuadrupleSection {
    pub direction: Direction,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectionSection {
    pub elements: Vec<ChainElement>,
    pub qe: f64,
    pub dark_cps: f64,
    pub drift: f64,
}

impl Default for DetectionSection {
    fn default() -> Self {
        let d = DetectorSpec::default();
        Self {
            elements: default_chain(),
            qe: d.quantum_efficiency,
            dark_cps: d.dark_rate,
            drift: d.drift_fraction,
        }
    }
}

impl DetectionSection {
    pub fn detector(&self) -> DetectorSpec {
        DetectorSpec {
            quantum_efficiency: self.qe,
            dark_rate: self.dark_cps,
            drift_fraction: self.drift,
        }
    }
}

/// A measured absolute efficiency that fixes the model's scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CalibrationSection {
    pub eta: f64,
    pub at_bar: f64,
}

impl Default for CalibrationSection {
    fn default() -> Self {
        Self {
            eta: 1.0e-9,
            at_bar: 6.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ConjugationChoice {
    /// Conjugate the fields that give up energy in the chosen direction.
    #[default]
    EnergyFlow,
    /// Conjugate probe and signal.
    ProbeConjugated,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSection {
    /// Signal-mode waist; absent means matched to the driving beams.
    pub signal_waist_um: Option<f64>,
    pub density_scaling: DensityScaling,
    pub kernel: KernelMode,
    pub conjugation: ConjugationChoice,
    #[serde(rename = "detuning_MHz")]
    pub detuning_mhz: f64,
}

impl Default for ModelSection {
    fn default() -> Self {
        Self {
            signal_waist_um: None,
            density_scaling: DensityScaling::Linear,
            kernel: KernelMode::Gaussian,
            conjugation: ConjugationChoice::EnergyFlow,
            detuning_mhz: 0.0,
        }
    }
}

impl RunConfig {
    pub fn from_json_str(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            Error::Config(format!("at `{path}`: {}", e.into_inner()))
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json_str(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("configuration serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let cfg_err = |m: String| Err(Error::Config(m));
        for (i, (b, role)) in self.beams.iter().zip(ROLES).enumerate() {
            if let Some(r) = b.role {
                if r != role {
                    return cfg_err(format!("beams[{i}]: expected role {role:?}, found {r:?}"));
                }
            }
            if !(b.wavelength_nm > 0.0 && b.waist_um > 0.0 && b.power_w >= 0.0) {
                return cfg_err(format!(
                    "beams[{i}]: wavelength and waist must be positive, power non-negative"
                ));
            }
            if !(b.focus_mm.is_finite() && b.pol_deg.is_finite()) {
                return cfg_err(format!("beams[{i}]: focus and polarization must be finite"));
            }
        }
        if !(self.gas.temperature_k > 0.0) {
            return cfg_err("gas.temperature_K must be positive".into());
        }
        if !(self.cell.length_m > 0.0) {
            return cfg_err("cell.length_m must be positive".into());
        }
        if let Some(c) = self.calibration {
            if !(c.eta > 0.0 && c.at_bar > 0.0) {
                return cfg_err("calibration.eta and calibration.at_bar must be positive".into());
            }
        }
        if let Some(w) = self.model.signal_waist_um {
            if !(w > 0.0) {
                return cfg_err("model.signal_waist_um must be positive".into());
            }
        }
        let wrap = |e: Error, section: &str| Error::Config(format!("{section}: {e}"));
        self.resonance
            .validate()
            .map_err(|e| wrap(e, "resonance"))?;
        self.detection
            .detector()
            .validate()
            .map_err(|e| wrap(e, "detection"))?;
        for (i, el) in self.detection.elements.iter().enumerate() {
            el.validate()
                .map_err(|e| wrap(e, &format!("detection.elements[{i}]")))?;
        }
        if self.detection.elements.is_empty() {
            return cfg_err("detection.elements must not be empty".into());
        }
        self.polarization
            .validate()
            .map_err(|e| wrap(e, "polarization"))?;
        Ok(())
    }

    pub fn temperature(&self) -> Result<Temperature> {
        Temperature::from_kelvin(self.gas.temperature_k)
    }

    /// Efficiency model for this configuration, without calibration.
    pub fn conversion(&self) -> Result<ConversionConfig> {
        let [ph, ps, pr] = &self.beams;
        let beam = |b: &BeamSection| -> Result<BeamSpec> {
            Ok(BeamSpec::new(
                b.waist_um / 1e6,
                Wavelength::from_nm(b.wavelength_nm)?,
                Power::from_watts(b.power_w)?,
            )?
            .with_focus(b.focus_mm / 1e3)
            .with_polarization(b.pol_deg))
        };
        let (ph, ps, pr) = (beam(ph)?, beam(ps)?, beam(pr)?);
        let quadruple = FwmQuadruple::new(
            pr.wavelength,
            ph.wavelength,
            ps.wavelength,
            self.quadruple.direction,
        )?;
        let mut cfg = ConversionConfig::new(quadruple, ph, ps, pr)?;
        cfg.cell_length = self.cell.length_m;
        cfg.temperature = self.temperature()?;
        cfg.dispersion = DispersionModel::new(self.gas.coefficients);
        cfg.resonance = self.resonance;
        cfg.detuning_mhz = self.model.detuning_mhz;
        cfg.signal_waist = self.model.signal_waist_um.map(|w| w / 1e6);
        cfg.density_scaling = self.model.density_scaling;
        cfg.kernel = self.model.kernel;
        cfg.conjugation = match self.model.conjugation {
            ConjugationChoice::EnergyFlow => None,
            ConjugationChoice::ProbeConjugated => Some(ConjugationPattern::PROBE_CONJUGATED),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Efficiency model scaled to the calibration point when one is given.
    pub fn calibrated_conversion(&self) -> Result<ConversionConfig> {
        let cfg = self.conversion()?;
        match self.calibration {
            Some(c) => crate::fwm::calibrate(&cfg, c.eta, Pressure::from_bar(c.at_bar)?),
            None => Ok(cfg),
        }
    }
}
