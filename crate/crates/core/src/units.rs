//! Canonical quantities and the energy-conserving four-wave quadruple.
//!
//! Every quantity carries one fixed unit: frequency in THz, vacuum
//! wavelength in nm, pressure in bar, temperature in K and power in W.
//! Conversions to SI happen only through the accessor methods here.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Speed of light in nm·THz (exact, from c = 299 792 458 m/s).
pub const SPEED_OF_LIGHT_NM_THZ: f64 = 299_792.458;

/// Speed of light in m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Boltzmann constant in J/K.
pub const BOLTZMANN: f64 = 1.380_649e-23;

pub const PASCAL_PER_BAR: f64 = 1.0e5;

fn check_positive(what: &str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::domain(format!(
            "{what} must be positive and finite, got {value}"
        )))
    }
}

fn check_non_negative(what: &str, value: f64) -> Result<f64> {
    if value.is_finite() && value >= 0.0 {
        Ok(value)
    } else {
        Err(Error::domain(format!(
            "{what} must be non-negative and finite, got {value}"
        )))
    }
}

/// Optical frequency in THz.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct Frequency(f64);

impl Frequency {
    pub fn from_thz(thz: f64) -> Result<Self> {
        check_positive("frequency", thz).map(Self)
    }

    pub fn thz(self) -> f64 {
        self.0
    }

    pub fn to_wavelength(self) -> Wavelength {
        Wavelength(SPEED_OF_LIGHT_NM_THZ / self.0)
    }
}

/// Vacuum wavelength in nm.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct Wavelength(f64);

impl Wavelength {
    pub fn from_nm(nm: f64) -> Result<Self> {
        check_positive("wavelength", nm).map(Self)
    }

    pub fn nm(self) -> f64 {
        self.0
    }

    pub fn um(self) -> f64 {
        self.0 * 1e-3
    }

    pub fn meters(self) -> f64 {
        self.0 * 1e-9
    }

    pub fn to_frequency(self) -> Frequency {
        Frequency(SPEED_OF_LIGHT_NM_THZ / self.0)
    }
}

/// Gas pressure in bar. Zero is allowed (evacuated cell).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct Pressure(f64);

impl Pressure {
    pub const ZERO: Pressure = Pressure(0.0);

    pub fn from_bar(bar: f64) -> Result<Self> {
        check_non_negative("pressure", bar).map(Self)
    }

    pub fn bar(self) -> f64 {
        self.0
    }

    pub fn pascals(self) -> f64 {
        self.0 * PASCAL_PER_BAR
    }
}

/// Absolute temperature in K.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct Temperature(f64);

impl Temperature {
    pub fn from_kelvin(k: f64) -> Result<Self> {
        check_positive("temperature", k).map(Self)
    }

    pub fn kelvin(self) -> f64 {
        self.0
    }
}

/// Optical power in W.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct Power(f64);

impl Power {
    pub fn from_watts(w: f64) -> Result<Self> {
        check_non_negative("power", w).map(Self)
    }

    pub fn watts(self) -> f64 {
        self.0
    }
}

pub fn wavelength_to_frequency(lambda: Wavelength) -> Frequency {
    lambda.to_frequency()
}

pub fn frequency_to_wavelength(nu: Frequency) -> Wavelength {
    nu.to_wavelength()
}

/// Which of the two Raman sidebands the signal sits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// ν_signal = ν_probe + ν_pump_high − ν_pump_stokes (anti-Stokes side).
    #[default]
    #[serde(alias = "upconversion")]
    Up,
    /// ν_signal = ν_probe − ν_pump_high + ν_pump_stokes (Stokes side).
    #[serde(alias = "downconversion")]
    Down,
}

/// The four fields of the mixing process. The signal is derived from the
/// other three, so energy conservation holds by construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FwmQuadruple {
    pump_high: Wavelength,
    pump_stokes: Wavelength,
    probe: Wavelength,
    signal: Wavelength,
    direction: Direction,
}

impl FwmQuadruple {
    pub fn new(
        probe: Wavelength,
        pump_high: Wavelength,
        pump_stokes: Wavelength,
        direction: Direction,
    ) -> Result<Self> {
        let raman = pump_high.to_frequency().thz() - pump_stokes.to_frequency().thz();
        let nu_signal = match direction {
            Direction::Up => probe.to_frequency().thz() + raman,
            Direction::Down => probe.to_frequency().thz() - raman,
        };
        if !(nu_signal > 0.0) {
            return Err(Error::domain(format!(
                "unphysical quadruple: signal frequency {nu_signal} THz is not positive"
            )));
        }
        Ok(Self {
            pump_high,
            pump_stokes,
            probe,
            signal: Frequency(nu_signal).to_wavelength(),
            direction,
        })
    }

    pub fn pump_high(&self) -> Wavelength {
        self.pump_high
    }

    pub fn pump_stokes(&self) -> Wavelength {
        self.pump_stokes
    }

    pub fn probe(&self) -> Wavelength {
        self.probe
    }

    pub fn signal(&self) -> Wavelength {
        self.signal
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    /// Pump difference frequency ν_pump_high − ν_pump_stokes.
    pub fn raman_shift(&self) -> Frequency {
        Frequency(self.pump_high.to_frequency().thz() - self.pump_stokes.to_frequency().thz())
    }

    /// Signed sum ±ν_pH ∓ ν_pS + ν_probe − ν_signal; zero up to rounding.
    pub fn energy_residual_thz(&self) -> f64 {
        let s = match self.direction {
            Direction::Up => 1.0,
            Direction::Down => -1.0,
        };
        s * self.pump_high.to_frequency().thz() - s * self.pump_stokes.to_frequency().thz()
            + self.probe.to_frequency().thz()
            - self.signal.to_frequency().thz()
    }
}

pub fn make_quadruple(
    probe: Wavelength,
    pump_high: Wavelength,
    pump_stokes: Wavelength,
    direction: Direction,
) -> Result<FwmQuadruple> {
    FwmQuadruple::new(probe, pump_high, pump_stokes, direction)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn nm(x: f64) -> Wavelength {
        Wavelength::from_nm(x).unwrap()
    }

    #[test]
    fn frequency_of_experiment_wavelengths() {
        assert!((nm(434.0).to_frequency().thz() - 690.766).abs() < 1e-3);
        assert!((nm(938.0).to_frequency().thz() - 319.608).abs() < 1e-3);
        assert!((nm(1538.0).to_frequency().thz() - 194.924).abs() < 1e-3);
    }

    #[test]
    fn rejects_non_positive_wavelength() {
        assert!(Wavelength::from_nm(0.0).is_err());
        assert!(Wavelength::from_nm(-434.0).is_err());
        assert!(Wavelength::from_nm(f64::NAN).is_err());
        assert!(Frequency::from_thz(0.0).is_err());
        assert!(Temperature::from_kelvin(0.0).is_err());
        assert!(Pressure::from_bar(-1.0).is_err());
        assert!(Pressure::from_bar(0.0).is_ok());
    }

    #[test]
    fn quadruple_signal_wavelengths() {
        let up = make_quadruple(nm(434.0), nm(938.0), nm(1538.0), Direction::Up).unwrap();
        assert!((up.signal().nm() - 367.64).abs() < 0.01);
        let down = make_quadruple(nm(434.0), nm(938.0), nm(1538.0), Direction::Down).unwrap();
        assert!((down.signal().nm() - 529.59).abs() < 0.01);
        let degenerate = make_quadruple(nm(434.0), nm(938.0), nm(938.0), Direction::Up).unwrap();
        assert_relative_eq!(degenerate.signal().nm(), 434.0, max_relative = 1e-14);
    }

    #[test]
    fn unphysical_quadruple_is_rejected() {
        // 1538 nm probe minus a 124 THz shift leaves ~71 THz: fine. A 2500 nm
        // probe (120 THz) cannot lose 124.7 THz.
        let err = make_quadruple(nm(2500.0), nm(938.0), nm(1538.0), Direction::Down);
        assert!(matches!(err, Err(Error::Domain(_))));
    }

    #[test]
    fn raman_shift_is_near_q1() {
        let up = make_quadruple(nm(434.0), nm(938.0), nm(1538.0), Direction::Up).unwrap();
        assert!((up.raman_shift().thz() - 124.68).abs() < 0.01);
    }

    proptest! {
        #[test]
        fn wavelength_round_trip(l in 100.0f64..10000.0) {
            let back = nm(l).to_frequency().to_wavelength().nm();
            prop_assert!(((back - l) / l).abs() < 1e-12);
        }

        #[test]
        fn energy_is_conserved(p in 300.0f64..800.0, h in 700.0f64..1100.0, s in 1100.0f64..2000.0) {
            for dir in [Direction::Up, Direction::Down] {
                let q = make_quadruple(nm(p), nm(h), nm(s), dir).unwrap();
                prop_assert!(q.energy_residual_thz().abs() < 1e-9);
            }
        }

        #[test]
        fn up_then_down_returns_probe(p in 300.0f64..800.0, h in 700.0f64..1100.0, s in 1100.0f64..2000.0) {
            let up = make_quadruple(nm(p), nm(h), nm(s), Direction::Up).unwrap();
            let back = make_quadruple(up.signal(), nm(h), nm(s), Direction::Down).unwrap();
            prop_assert!(((back.signal().nm() - p) / p).abs() < 1e-12);
            let swapped = make_quadruple(up.signal(), nm(s), nm(h), Direction::Up).unwrap();
            prop_assert!(((swapped.signal().nm() - p) / p).abs() < 1e-12);
        }
    }
}
