//! Gaussian beams as complex envelopes and their analytic transverse overlap.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::units::{Power, Wavelength};

/// One focused TEM00 beam. Lengths in meters; z = 0 is the cell center.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BeamSpec {
    pub waist: f64,
    pub focus_z: f64,
    pub wavelength: Wavelength,
    pub power: Power,
    /// Linear polarization angle, degrees from horizontal.
    pub polarization_deg: f64,
}

impl BeamSpec {
    pub fn new(waist: f64, wavelength: Wavelength, power: Power) -> Result<Self> {
        if !(waist.is_finite() && waist > 0.0) {
            return Err(Error::domain(format!(
                "beam waist must be positive, got {waist}"
            )));
        }
        Ok(Self {
            waist,
            focus_z: 0.0,
            wavelength,
            power,
            polarization_deg: 0.0,
        })
    }

    pub fn with_focus(mut self, focus_z: f64) -> Self {
        self.focus_z = focus_z;
        self
    }

    pub fn with_polarization(mut self, deg: f64) -> Self {
        self.polarization_deg = deg;
        self
    }

    pub fn rayleigh_range(&self) -> f64 {
        rayleigh_range(self.waist, self.wavelength)
    }

    /// Peak field amplitude of a unit-power beam, `√(2/(π w0²))` in 1/m.
    pub fn unit_power_amplitude(&self) -> f64 {
        (2.0 / (PI * self.waist * self.waist)).sqrt()
    }
}

/// zR = π w0²/λ with the vacuum wavelength.
pub fn rayleigh_range(waist: f64, wavelength: Wavelength) -> f64 {
    PI * waist * waist / wavelength.meters()
}

/// `u(r, z) = prefactor · exp(−radial_coeff · r²)` for a unit-amplitude beam.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexEnvelope {
    /// 1/(1 + iζ): carries the w0/w(z) amplitude and the Gouy phase.
    pub prefactor: Complex64,
    /// 1/(w0²(1 + iζ)) in 1/m².
    pub radial_coeff: Complex64,
}

impl ComplexEnvelope {
    /// Flat, infinitely wide field of unit amplitude.
    pub const PLANE_WAVE: ComplexEnvelope = ComplexEnvelope {
        prefactor: Complex64::new(1.0, 0.0),
        radial_coeff: Complex64::new(0.0, 0.0),
    };

    pub fn conj(self) -> Self {
        Self {
            prefactor: self.prefactor.conj(),
            radial_coeff: self.radial_coeff.conj(),
        }
    }

    pub fn at(&self, r: f64) -> Complex64 {
        self.prefactor * (-self.radial_coeff * r * r).exp()
    }
}

pub fn envelope(beam: &BeamSpec, z: f64) -> ComplexEnvelope {
    let zeta = (z - beam.focus_z) / beam.rayleigh_range();
    let q = Complex64::new(1.0, zeta);
    ComplexEnvelope {
        prefactor: q.inv(),
        radial_coeff: (q * beam.waist * beam.waist).inv(),
    }
}

/// Which of (pump_high, pump_stokes, probe, signal projection) enter conjugated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ConjugationPattern(pub [bool; 4]);

impl ConjugationPattern {
    /// ν_s = ν_pH − ν_pS + ν_probe: Stokes pump and signal projection conjugated.
    pub const UPCONVERSION: Self = Self([false, true, false, true]);
    /// ν_s = ν_probe − ν_pH + ν_pS: 938 nm pump and signal projection conjugated.
    pub const DOWNCONVERSION: Self = Self([true, false, false, true]);
    /// Driving term written as E_pH·E_pS·E_probe*, projected on the signal.
    pub const PROBE_CONJUGATED: Self = Self([false, false, true, true]);

    pub fn flipped(self) -> Self {
        Self(self.0.map(|c| !c))
    }
}

/// Closed form of ∫₀^∞ ∏ uᵢ(r) 2πr dr = π·∏ prefactorᵢ / Σ radial_coeffᵢ,
/// with conjugation applied per `pattern`.
pub fn transverse_overlap(
    envelopes: &[ComplexEnvelope; 4],
    pattern: ConjugationPattern,
) -> Result<Complex64> {
    let mut prefactor = Complex64::new(1.0, 0.0);
    let mut coeff = Complex64::new(0.0, 0.0);
    for (env, &conj) in envelopes.iter().zip(pattern.0.iter()) {
        let e = if conj { env.conj() } else { *env };
        prefactor *= e.prefactor;
        coeff += e.radial_coeff;
    }
    if !(coeff.re > 0.0) {
        return Err(Error::numerical(format!(
            "transverse overlap diverges: Σα = {coeff} has non-positive real part"
        )));
    }
    Ok(PI * prefactor / coeff)
}
