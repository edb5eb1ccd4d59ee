//! Refractive index of molecular hydrogen.
//!
//! Refractivity at 273.15 K / 1.01325 bar comes from a two-term dispersion
//! formula; other densities are reached through the Lorentz-Lorenz relation
//! with the ideal-gas number density.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::{Pressure, Temperature, Wavelength, BOLTZMANN};

/// Reference conditions of the dispersion formula.
pub const REFERENCE_TEMPERATURE_K: f64 = 273.15;
pub const REFERENCE_PRESSURE_BAR: f64 = 1.01325;

/// Default operating temperature of the cell.
pub const LAB_TEMPERATURE_K: f64 = 293.15;

const VALID_RANGE_NM: (f64, f64) = (300.0, 2000.0);

/// Coefficients of `(n−1)·10⁶ = A₁/(B₁−σ²) + A₂/(B₂−σ²)`, σ = 1/λ in µm⁻¹.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DispersionCoefficients {
    pub a1: f64,
    pub b1: f64,
    pub a2: f64,
    pub b2: f64,
}

impl DispersionCoefficients {
    pub const HYDROGEN: Self = Self {
        a1: 14_895.6,
        b1: 180.7,
        a2: 4_903.7,
        b2: 92.0,
    };
}

impl Default for DispersionCoefficients {
    fn default() -> Self {
        Self::HYDROGEN
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DispersionModel {
    coefficients: DispersionCoefficients,
    reference_density: f64,
}

impl Default for DispersionModel {
    fn default() -> Self {
        Self::new(DispersionCoefficients::HYDROGEN)
    }
}

impl DispersionModel {
    pub fn new(coefficients: DispersionCoefficients) -> Self {
        let reference_density =
            REFERENCE_PRESSURE_BAR * 1e5 / (BOLTZMANN * REFERENCE_TEMPERATURE_K);
        Self {
            coefficients,
            reference_density,
        }
    }

    pub fn coefficients(&self) -> DispersionCoefficients {
        self.coefficients
    }

    /// Number density at the formula's reference conditions, 1/m³.
    pub fn reference_density(&self) -> f64 {
        self.reference_density
    }

    /// n − 1 at 273.15 K and 1.01325 bar.
    pub fn refractivity_std(&self, lambda: Wavelength) -> Result<f64> {
        let nm = lambda.nm();
        if nm < VALID_RANGE_NM.0 || nm > VALID_RANGE_NM.1 {
            log::warn!(
                "refractivity evaluated at {nm} nm, outside the validated 300-2000 nm range"
            );
        }
        let sigma2 = lambda.um().powi(-2);
        let c = &self.coefficients;
        let d1 = c.b1 - sigma2;
        let d2 = c.b2 - sigma2;
        if d1.abs() < 1e-9 || d2.abs() < 1e-9 {
            return Err(Error::domain(format!(
                "{nm} nm sits on a pole of the dispersion formula"
            )));
        }
        Ok((c.a1 / d1 + c.a2 / d2) * 1e-6)
    }

    /// Lorentz-Lorenz polarizability per molecule, `[(n²−1)/(n²+2)] / ρ_ref`.
    pub fn lorentz_lorenz_per_molecule(&self, lambda: Wavelength) -> Result<f64> {
        let n = 1.0 + self.refractivity_std(lambda)?;
        let n2 = n * n;
        Ok((n2 - 1.0) / (n2 + 2.0) / self.reference_density)
    }

    pub fn refractive_index(&self, lambda: Wavelength, state: &GasState) -> Result<f64> {
        if state.number_density == 0.0 {
            return Ok(1.0);
        }
        let x = self.lorentz_lorenz_per_molecule(lambda)? * state.number_density;
        if x >= 1.0 {
            return Err(Error::domain(format!(
                "Lorentz-Lorenz term {x} >= 1: density {} m^-3 is unphysical",
                state.number_density
            )));
        }
        Ok(((1.0 + 2.0 * x) / (1.0 - x)).sqrt())
    }

    /// k = 2π n / λ in 1/m.
    pub fn wavevector(&self, lambda: Wavelength, state: &GasState) -> Result<f64> {
        Ok(2.0 * PI * self.refractive_index(lambda, state)? / lambda.meters())
    }

    /// k − 2π/λ, the part of the wavevector added by the gas. Phase-mismatch
    /// sums use this to avoid cancelling four ~10⁷ m⁻¹ terms.
    pub fn excess_wavevector(&self, lambda: Wavelength, state: &GasState) -> Result<f64> {
        Ok(2.0 * PI * (self.refractive_index(lambda, state)? - 1.0) / lambda.meters())
    }
}

/// Thermodynamic state of the gas in the cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GasState {
    pub pressure: Pressure,
    pub temperature: Temperature,
    /// Molecules per m³.
    pub number_density: f64,
}

impl GasState {
    pub fn new(pressure: Pressure, temperature: Temperature) -> Self {
        Self {
            pressure,
            temperature,
            number_density: number_density(pressure, temperature),
        }
    }

    pub fn at(pressure_bar: f64, temperature_k: f64) -> Result<Self> {
        Ok(Self::new(
            Pressure::from_bar(pressure_bar)?,
            Temperature::from_kelvin(temperature_k)?,
        ))
    }

    pub fn vacuum() -> Self {
        Self::new(
            Pressure::ZERO,
            Temperature::from_kelvin(LAB_TEMPERATURE_K).expect("positive"),
        )
    }
}

/// Ideal-gas number density P/(k_B T) in 1/m³.
pub fn number_density(pressure: Pressure, temperature: Temperature) -> f64 {
    pressure.pascals() / (BOLTZMANN * temperature.kelvin())
}
