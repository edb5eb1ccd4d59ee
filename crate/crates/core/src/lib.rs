//! Simulation and analysis of frequency conversion by coherent anti-Stokes
//! Raman scattering in pressurized molecular hydrogen.
//!
//! The modules follow the physics chain: [`units`] and [`dispersion`] give
//! wavevectors, [`beam`] and [`fwm`] turn them into a conversion efficiency,
//! [`resonance`] and [`polarization`] model the measured scans, [`fit`]
//! reduces scans to parameters, and [`detection`] turns efficiencies into
//! counts. [`config`] and [`io`] hold the file formats used by the CLI.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod beam;
pub mod config;
pub mod detection;
pub mod dispersion;
pub mod error;
pub mod fit;
pub mod fwm;
pub mod io;
pub mod optimize;
pub mod polarization;
pub mod quadrature;
pub mod resonance;
pub mod units;

pub use beam::{BeamSpec, ComplexEnvelope, ConjugationPattern};
pub use dispersion::{DispersionCoefficients, DispersionModel, GasState};
pub use error::{Error, Result};
pub use fit::{FitParam, FitResult};
pub use fwm::{ConversionConfig, EfficiencyCurve, Execution};
pub use resonance::{NoiseModel, ResonanceParams, ScanData};
pub use units::{Direction, Frequency, FwmQuadruple, Power, Pressure, Temperature, Wavelength};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
