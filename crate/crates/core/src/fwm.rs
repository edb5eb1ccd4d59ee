//! Phase mismatch, the focused-beam overlap integral along the cell, and the
//! conversion efficiency built on it: pressure sweeps, calibration to an
//! absolute efficiency, and operating-point optimization.
//!
//! The generated signal is projected onto a Gaussian signal mode. For each
//! axial slice the transverse overlap of the three driving beams with that
//! mode is evaluated in closed form ([`transverse_overlap`]), and the
//! slices are summed with the phase factor `exp(iΔk z)` by adaptive
//! quadrature.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::beam::{envelope, transverse_overlap, BeamSpec, ComplexEnvelope, ConjugationPattern};
use crate::dispersion::{DispersionModel, GasState, LAB_TEMPERATURE_K};
use crate::error::{Error, Result};
use crate::optimize::{golden_section_max, interior_max, Maximum};
use crate::quadrature::{integrate, QuadOptions};
use crate::resonance::{lineshape, ResonanceParams};
use crate::units::{
    Direction, FwmQuadruple, Power, Pressure, Temperature, Wavelength, SPEED_OF_LIGHT,
};

/// How the signal field scales with number density.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum DensityScaling {
    /// Field ∝ ρ, intensity ∝ ρ².
    #[default]
    Linear,
    /// Field ∝ ρ², for comparison only.
    Quadratic,
}

impl DensityScaling {
    fn intensity_exponent(self) -> i32 {
        match self {
            DensityScaling::Linear => 2,
            DensityScaling::Quadratic => 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum KernelMode {
    #[default]
    Gaussian,
    /// All envelopes replaced by unit plane waves; the transverse overlap is
    /// one unit of area everywhere.
    PlaneWave,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Serial,
    #[default]
    Parallel,
}

pub const DEFAULT_CELL_LENGTH: f64 = 0.140;
pub const DEFAULT_WAIST: f64 = 50e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct ConversionConfig {
    pub quadruple: FwmQuadruple,
    pub pump_high: BeamSpec,
    pub pump_stokes: BeamSpec,
    pub probe: BeamSpec,
    /// Cell length in meters, centered on z = 0.
    pub cell_length: f64,
    pub temperature: Temperature,
    pub dispersion: DispersionModel,
    pub resonance: ResonanceParams,
    /// Pump difference detuning from the pressure-shifted line center, MHz.
    pub detuning_mhz: f64,
    /// Absolute efficiency per model unit, once calibrated.
    pub calibration: Option<f64>,
    /// Signal-mode waist override in meters; `None` uses the drive-matched mode.
    pub signal_waist: Option<f64>,
    pub density_scaling: DensityScaling,
    pub kernel: KernelMode,
    /// `None` picks the energy-flow pattern for the quadruple's direction.
    pub conjugation: Option<ConjugationPattern>,
    pub quadrature: QuadOptions,
}

impl ConversionConfig {
    pub fn new(
        quadruple: FwmQuadruple,
        pump_high: BeamSpec,
        pump_stokes: BeamSpec,
        probe: BeamSpec,
    ) -> Result<Self> {
        let cfg = Self {
            quadruple,
            pump_high,
            pump_stokes,
            probe,
            cell_length: DEFAULT_CELL_LENGTH,
            temperature: Temperature::from_kelvin(LAB_TEMPERATURE_K)?,
            dispersion: DispersionModel::default(),
            resonance: ResonanceParams::default(),
            detuning_mhz: 0.0,
            calibration: None,
            signal_waist: None,
            density_scaling: DensityScaling::Linear,
            kernel: KernelMode::Gaussian,
            conjugation: None,
            quadrature: QuadOptions::default(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// 434 nm probe, 938 nm / 1538 nm pumps at 0.5 W / 15 W, 3 mW probe,
    /// 50 µm waists focused at the center of a 140 mm cell at 293.15 K.
    pub fn standard(direction: Direction) -> Self {
        let nm = |x| Wavelength::from_nm(x).expect("positive");
        let w = |x| Power::from_watts(x).expect("positive");
        let quadruple =
            FwmQuadruple::new(nm(434.0), nm(938.0), nm(1538.0), direction).expect("physical");
        let beam = |l, p| {
            BeamSpec::new(DEFAULT_WAIST, nm(l), w(p))
                .expect("positive waist")
                .with_polarization(45.0)
        };
        Self::new(
            quadruple,
            beam(938.0, 0.5),
            beam(1538.0, 15.0),
            beam(434.0, 3e-3).with_polarization(0.0),
        )
        .expect("standard configuration is valid")
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.cell_length.is_finite() && self.cell_length > 0.0) {
            return Err(Error::domain("cell length must be positive"));
        }
        let q = &self.quadruple;
        for (name, beam, lambda) in [
            ("pump_high", &self.pump_high, q.pump_high()),
            ("pump_stokes", &self.pump_stokes, q.pump_stokes()),
            ("probe", &self.probe, q.probe()),
        ] {
            let rel = (beam.wavelength.nm() - lambda.nm()).abs() / lambda.nm();
            if rel > 1e-12 {
                return Err(Error::domain(format!(
                    "{name} beam wavelength {} nm does not match quadruple {} nm",
                    beam.wavelength.nm(),
                    lambda.nm()
                )));
            }
        }
        if let Some(w) = self.signal_waist {
            if !(w > 0.0) {
                return Err(Error::domain("signal waist must be positive"));
            }
        }
        if let Some(c) = self.calibration {
            if !(c > 0.0 && c.is_finite()) {
                return Err(Error::domain("calibration constant must be positive"));
            }
        }
        self.resonance.validate()
    }

    pub fn conjugation_pattern(&self) -> ConjugationPattern {
        self.conjugation
            .unwrap_or(match self.quadruple.direction() {
                Direction::Up => ConjugationPattern::UPCONVERSION,
                Direction::Down => ConjugationPattern::DOWNCONVERSION,
            })
    }

    /// Gaussian mode the signal is projected on: the beam whose waist
    /// matches the driving polarization at focus,
    /// 1/w_s² = 1/w_pH² + 1/w_pS² + 1/w_probe², focused with the probe.
    pub fn signal_mode(&self) -> BeamSpec {
        let waist = self.signal_waist.unwrap_or_else(|| {
            let inv = [&self.pump_high, &self.pump_stokes, &self.probe]
                .iter()
                .map(|b| b.waist.powi(-2))
                .sum::<f64>();
            inv.powf(-0.5)
        });
        BeamSpec {
            waist,
            focus_z: self.probe.focus_z,
            wavelength: self.quadruple.signal(),
            power: Power::from_watts(0.0).expect("zero"),
            polarization_deg: self.probe.polarization_deg,
        }
    }

    pub fn gas_state(&self, p: Pressure) -> GasState {
        GasState::new(p, self.temperature)
    }

    pub fn with_pump_waists(mut self, waist: f64) -> Self {
        self.pump_high.waist = waist;
        self.pump_stokes.waist = waist;
        self
    }

    pub fn with_probe_waist(mut self, waist: f64) -> Self {
        self.probe.waist = waist;
        self
    }
}

/// Δk of the configured process, 1/m. Up: k_pH − k_pS + k_probe − k_signal;
/// down: −k_pH + k_pS + k_probe − k_signal.
pub fn phase_mismatch(
    quadruple: &FwmQuadruple,
    model: &DispersionModel,
    state: &GasState,
) -> Result<f64> {
    let s = match quadruple.direction() {
        Direction::Up => 1.0,
        Direction::Down => -1.0,
    };
    // Vacuum part 2π(Σ±ν)/c, which energy conservation zeroes up to rounding.
    let vacuum = 2.0 * PI * quadruple.energy_residual_thz() * 1e12 / SPEED_OF_LIGHT;
    let gas = s * model.excess_wavevector(quadruple.pump_high(), state)?
        - s * model.excess_wavevector(quadruple.pump_stokes(), state)?
        + model.excess_wavevector(quadruple.probe(), state)?
        - model.excess_wavevector(quadruple.signal(), state)?;
    Ok(vacuum + gas)
}

fn overlap_at(config: &ConversionConfig, signal: &BeamSpec, z: f64) -> Result<Complex64> {
    match config.kernel {
        KernelMode::PlaneWave => Ok(Complex64::new(1.0, 0.0)),
        KernelMode::Gaussian => {
            let env: [ComplexEnvelope; 4] = [
                envelope(&config.pump_high, z),
                envelope(&config.pump_stokes, z),
                envelope(&config.probe, z),
                envelope(signal, z),
            ];
            transverse_overlap(&env, config.conjugation_pattern())
        }
    }
}

fn initial_panels(config: &ConversionConfig, signal: &BeamSpec, delta_k: f64) -> usize {
    let l = config.cell_length;
    let per_period = (delta_k.abs() * l / (2.0 * PI) * 8.0).ceil() as usize;
    let per_focus = match config.kernel {
        KernelMode::PlaneWave => 0,
        KernelMode::Gaussian => {
            let zr = [
                &config.pump_high,
                &config.pump_stokes,
                &config.probe,
                signal,
            ]
            .iter()
            .map(|b| b.rayleigh_range())
            .fold(f64::INFINITY, f64::min);
            (4.0 * l / zr).ceil() as usize
        }
    };
    per_period.max(per_focus).clamp(16, 1 << 16)
}

/// S = ∫ A(z) e^{iΔk z} dz over the cell for a given Δk, in m³ (m for the
/// plane-wave kernel).
pub fn axial_integral_for_mismatch(config: &ConversionConfig, delta_k: f64) -> Result<Complex64> {
    let signal = config.signal_mode();
    let half = 0.5 * config.cell_length;
    let opts = QuadOptions {
        initial_panels: initial_panels(config, &signal, delta_k),
        ..config.quadrature
    };
    // Errors from the overlap cannot occur for valid beams; they surface as
    // NaN and are caught below.
    let f = |z: f64| {
        overlap_at(config, &signal, z)
            .map(|a| a * Complex64::new(0.0, delta_k * z).exp())
            .unwrap_or(Complex64::new(f64::NAN, f64::NAN))
    };
    let q = integrate(f, -half, half, &opts)?;
    if !q.value.re.is_finite() || !q.value.im.is_finite() {
        // Re-evaluate at focus to surface the underlying error.
        overlap_at(config, &signal, 0.0)?;
        return Err(Error::numerical("axial integrand is not finite"));
    }
    Ok(q.value)
}

pub fn axial_integral(config: &ConversionConfig, state: &GasState) -> Result<Complex64> {
    let dk = phase_mismatch(&config.quadruple, &config.dispersion, state)?;
    axial_integral_for_mismatch(config, dk)
}

/// Product of the unit-power peak amplitudes of the four modes, 1/m⁴.
fn mode_normalization(config: &ConversionConfig) -> f64 {
    match config.kernel {
        KernelMode::PlaneWave => 1.0,
        KernelMode::Gaussian => [
            &config.pump_high,
            &config.pump_stokes,
            &config.probe,
            &config.signal_mode(),
        ]
        .iter()
        .map(|b| b.unit_power_amplitude())
        .product(),
    }
}

/// Conversion efficiency in model units:
/// (ρ/ρ_ref)^{2k} · |N·S|² · P_pH[W] · P_pS[W] · L(δ; Γ(P)).
pub fn relative_efficiency(config: &ConversionConfig, p: Pressure) -> Result<f64> {
    if p.bar() == 0.0 {
        return Ok(0.0);
    }
    let state = config.gas_state(p);
    let density = state.number_density / config.dispersion.reference_density();
    let s = axial_integral(config, &state)? * mode_normalization(config);
    let pumps = config.pump_high.power.watts() * config.pump_stokes.power.watts();
    let line = lineshape(config.detuning_mhz, config.resonance.fwhm(p))?;
    Ok(density.powi(config.density_scaling.intensity_exponent()) * s.norm_sqr() * pumps * line)
}

/// Calibrated efficiency C·η_rel(P).
pub fn absolute_efficiency(config: &ConversionConfig, p: Pressure) -> Result<f64> {
    let c = config
        .calibration
        .ok_or_else(|| Error::domain("configuration is not calibrated"))?;
    Ok(c * relative_efficiency(config, p)?)
}

/// Returns a copy of `config` whose absolute efficiency at `at` equals
/// `measured_eta`.
pub fn calibrate(
    config: &ConversionConfig,
    measured_eta: f64,
    at: Pressure,
) -> Result<ConversionConfig> {
    if !(measured_eta > 0.0 && measured_eta.is_finite()) {
        return Err(Error::domain("measured efficiency must be positive"));
    }
    let model = relative_efficiency(config, at)?;
    if !(model > 0.0) {
        return Err(Error::domain(format!(
            "model efficiency is zero at {} bar; cannot calibrate",
            at.bar()
        )));
    }
    let mut out = config.clone();
    out.calibration = Some(measured_eta / model);
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EfficiencyCurve {
    pub pressures: Vec<f64>,
    /// Absolute efficiency when calibrated, otherwise normalized to the peak.
    pub eta: Vec<f64>,
    pub normalized: bool,
    pub optimum_pressure: f64,
    /// Peak on the same scale as `eta`.
    pub optimum_eta: f64,
    /// Peak η_rel in model units.
    pub optimum_eta_model: f64,
    /// `None` when the curve does not fall below half maximum on both sides.
    pub fwhm_pressure: Option<f64>,
}

const REFINE_TOL_BAR: f64 = 1e-4;

fn evaluate_grid(config: &ConversionConfig, grid: &[f64], exec: Execution) -> Result<Vec<f64>> {
    let eval = |&p: &f64| relative_efficiency(config, Pressure::from_bar(p)?);
    match exec {
        Execution::Serial => grid.iter().map(eval).collect(),
        Execution::Parallel => grid.par_iter().map(eval).collect(),
    }
}

fn validate_grid(grid: &[f64]) -> Result<()> {
    if grid.len() < 3 {
        return Err(Error::domain("pressure grid needs at least 3 points"));
    }
    if grid[0] < 0.0 || grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::domain(
            "pressure grid must be non-negative and strictly increasing",
        ));
    }
    Ok(())
}

/// Evenly spaced grid from `lo` to `hi` with `steps` points.
pub fn linear_grid(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    if steps < 2 {
        return vec![lo];
    }
    (0..steps)
        .map(|i| lo + (hi - lo) * i as f64 / (steps - 1) as f64)
        .collect()
}

pub fn pressure_sweep(config: &ConversionConfig, grid: &[f64]) -> Result<EfficiencyCurve> {
    pressure_sweep_with(config, grid, Execution::Parallel)
}

pub fn pressure_sweep_with(
    config: &ConversionConfig,
    grid: &[f64],
    exec: Execution,
) -> Result<EfficiencyCurve> {
    validate_grid(grid)?;
    let raw = evaluate_grid(config, grid, exec)?;
    let (imax, _) =
        raw.iter().enumerate().fold(
            (0, f64::NEG_INFINITY),
            |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc },
        );
    if imax == 0 || imax == grid.len() - 1 {
        return Err(Error::BoundaryOptimum {
            at: grid[imax],
            lo: grid[0],
            hi: grid[grid.len() - 1],
        });
    }
    let refined = golden_section_max(
        |p| relative_efficiency(config, Pressure::from_bar(p)?),
        grid[imax - 1],
        grid[imax + 1],
        REFINE_TOL_BAR,
    )?;
    let peak = if refined.value >= raw[imax] {
        refined
    } else {
        Maximum {
            x: grid[imax],
            value: raw[imax],
        }
    };

    let half = 0.5 * peak.value;
    let crossing = |j: usize, k: usize| {
        // Linear interpolation between grid[j] (below half) and grid[k].
        let t = (half - raw[j]) / (raw[k] - raw[j]);
        grid[j] + t * (grid[k] - grid[j])
    };
    let left = (0..imax)
        .rev()
        .find(|&j| raw[j] < half)
        .map(|j| crossing(j, j + 1));
    let right = (imax + 1..grid.len())
        .find(|&j| raw[j] < half)
        .map(|j| crossing(j, j - 1));
    let fwhm = match (left, right) {
        (Some(l), Some(r)) => Some(r - l),
        _ => None,
    };

    let (eta, optimum_eta, normalized) = match config.calibration {
        Some(c) => (raw.iter().map(|v| c * v).collect(), c * peak.value, false),
        None => (raw.iter().map(|v| v / peak.value).collect(), 1.0, true),
    };
    Ok(EfficiencyCurve {
        pressures: grid.to_vec(),
        eta,
        normalized,
        optimum_pressure: peak.x,
        optimum_eta,
        optimum_eta_model: peak.value,
        fwhm_pressure: fwhm,
    })
}

pub const OPTIMIZE_TOL_BAR: f64 = 0.01;

/// Golden-section maximization of η_rel over `[lo, hi]` bar; errors when the
/// maximum sits on a bound.
pub fn optimize_pressure(config: &ConversionConfig, lo: f64, hi: f64) -> Result<Maximum> {
    Pressure::from_bar(lo)?;
    interior_max(
        |p| relative_efficiency(config, Pressure::from_bar(p)?),
        lo,
        hi,
        OPTIMIZE_TOL_BAR,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WaistTarget {
    Pumps,
    Probe,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WaistSensitivityRow {
    pub waist_m: f64,
    pub optimum_pressure_bar: f64,
    pub peak_eta_model: f64,
    pub fwhm_bar: Option<f64>,
}

pub fn waist_sensitivity(
    config: &ConversionConfig,
    target: WaistTarget,
    waists: &[f64],
    grid: &[f64],
) -> Result<Vec<WaistSensitivityRow>> {
    waists
        .iter()
        .map(|&w| {
            if !(w > 0.0) {
                return Err(Error::domain("waists must be positive"));
            }
            let cfg = match target {
                WaistTarget::Pumps => config.clone().with_pump_waists(w),
                WaistTarget::Probe => config.clone().with_probe_waist(w),
            };
            let curve = pressure_sweep(&cfg, grid)?;
            Ok(WaistSensitivityRow {
                waist_m: w,
                optimum_pressure_bar: curve.optimum_pressure,
                peak_eta_model: curve.optimum_eta_model,
                fwhm_bar: curve.fwhm_pressure,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn up() -> ConversionConfig {
        ConversionConfig::standard(Direction::Up)
    }

    fn bar(p: f64) -> Pressure {
        Pressure::from_bar(p).unwrap()
    }

    #[test]
    fn vacuum_is_phase_matched() {
        for dir in [Direction::Up, Direction::Down] {
            let c = ConversionConfig::standard(dir);
            let dk = phase_mismatch(&c.quadruple, &c.dispersion, &GasState::vacuum()).unwrap();
            assert!(dk.abs() < 1e-8, "{dir:?}: {dk}");
        }
    }

    #[test]
    fn mismatch_at_standard_conditions() {
        // Oracle: Σ ±2π(nᵢ−1)/λᵢ with the tabulated refractivities.
        let m = DispersionModel::default();
        let state = GasState::at(1.01325, 273.15).unwrap();
        let hand = |terms: &[(f64, f64)]| -> f64 {
            terms
                .iter()
                .map(|&(sign, l)| {
                    let r = m.refractivity_std(Wavelength::from_nm(l).unwrap()).unwrap();
                    sign * 2.0 * PI * r / (l * 1e-9)
                })
                .sum()
        };
        let upc = up();
        let ls = upc.quadruple.signal().nm();
        let dk = phase_mismatch(&upc.quadruple, &m, &state).unwrap();
        let oracle = hand(&[(1.0, 938.0), (-1.0, 1538.0), (1.0, 434.0), (-1.0, ls)]);
        assert!(
            (dk - oracle).abs() < 1e-3 * oracle.abs(),
            "{dk} vs {oracle}"
        );
        assert!((-56.0..-45.0).contains(&dk), "{dk}");

        let down = ConversionConfig::standard(Direction::Down);
        let ld = down.quadruple.signal().nm();
        let dk = phase_mismatch(&down.quadruple, &m, &state).unwrap();
        let oracle = hand(&[(-1.0, 938.0), (1.0, 1538.0), (1.0, 434.0), (-1.0, ld)]);
        assert!((dk - oracle).abs() < 1e-3 * oracle.abs());
        assert!((28.0..36.0).contains(&dk), "{dk}");
    }

    #[test]
    fn plane_wave_integral_is_sinc() {
        let mut c = up();
        c.kernel = KernelMode::PlaneWave;
        let s0 = axial_integral_for_mismatch(&c, 0.0).unwrap();
        assert!((s0.re - 0.14).abs() < 1e-14 && s0.im.abs() < 1e-14);
        let s = axial_integral_for_mismatch(&c, 100.0).unwrap();
        let exact = 0.14 * (7.0f64).sin() / 7.0;
        assert!((s.norm() - 0.013140).abs() < 1e-6);
        assert!((s.re - exact).abs() < 1e-8 * exact.abs());
    }

    #[test]
    fn zero_pressure_gives_zero_efficiency() {
        assert_eq!(relative_efficiency(&up(), bar(0.0)).unwrap(), 0.0);
    }

    #[test]
    fn efficiency_is_bilinear_in_pump_power() {
        let c = up();
        let base = relative_efficiency(&c, bar(5.0)).unwrap();
        let mut c2 = c.clone();
        c2.pump_stokes.power = Power::from_watts(30.0).unwrap();
        assert_eq!(relative_efficiency(&c2, bar(5.0)).unwrap(), 2.0 * base);
        let mut c3 = c.clone();
        c3.pump_high.power = Power::from_watts(1.0).unwrap();
        assert_eq!(relative_efficiency(&c3, bar(5.0)).unwrap(), 2.0 * base);
        let mut c4 = c.clone();
        c4.probe.power = Power::from_watts(1.0).unwrap();
        assert_eq!(relative_efficiency(&c4, bar(5.0)).unwrap(), base);
    }

    #[test]
    fn detuning_by_half_width_halves_efficiency() {
        let c = up();
        let p = bar(5.0);
        let on = relative_efficiency(&c, p).unwrap();
        let mut off = c.clone();
        off.detuning_mhz = 0.5 * c.resonance.fwhm(p);
        let ratio = relative_efficiency(&off, p).unwrap() / on;
        assert!((ratio - 0.5).abs() < 1e-12);
    }

    #[test]
    fn calibration_fixed_point_and_linearity() {
        let c = calibrate(&up(), 1.0e-9, bar(6.5)).unwrap();
        let at = absolute_efficiency(&c, bar(6.5)).unwrap();
        assert!((at / 1.0e-9 - 1.0).abs() < 1e-12);
        let mut doubled = c.clone();
        doubled.pump_high.power = Power::from_watts(1.0).unwrap();
        let d = absolute_efficiency(&doubled, bar(6.5)).unwrap();
        assert!((d / 2.0e-9 - 1.0).abs() < 1e-12);
        assert!(calibrate(&up(), 1e-9, bar(0.0)).is_err());
        assert!(calibrate(&up(), 0.0, bar(6.5)).is_err());
        assert!(absolute_efficiency(&up(), bar(6.5)).is_err());
    }

    #[test]
    fn mismatched_beam_wavelength_is_rejected() {
        let c = up();
        let wrong = BeamSpec::new(
            50e-6,
            Wavelength::from_nm(940.0).unwrap(),
            c.pump_high.power,
        )
        .unwrap();
        assert!(ConversionConfig::new(c.quadruple, wrong, c.pump_stokes, c.probe).is_err());
    }

    #[test]
    fn drive_matched_signal_mode() {
        let c = up();
        let w = c.signal_mode().waist;
        assert!((w - 50e-6 / 3f64.sqrt()).abs() < 1e-15);
        assert_eq!(c.signal_mode().wavelength, c.quadruple.signal());
    }

    #[test]
    fn grid_validation() {
        let c = up();
        assert!(pressure_sweep(&c, &[1.0, 2.0]).is_err());
        assert!(pressure_sweep(&c, &[1.0, 3.0, 2.0]).is_err());
        assert!(pressure_sweep(&c, &[-1.0, 1.0, 2.0]).is_err());
    }

    #[test]
    fn sweep_bounded_away_from_peak_is_flagged() {
        let r = pressure_sweep(&up(), &linear_grid(0.0, 1.0, 11));
        assert!(matches!(r, Err(Error::BoundaryOptimum { .. })));
    }

    #[test]
    fn optimize_rejects_bounds_without_peak() {
        assert!(matches!(
            optimize_pressure(&up(), 0.1, 1.0),
            Err(Error::BoundaryOptimum { .. })
        ));
    }

    #[test]
    fn golden_section_on_analytic_objective() {
        // η ∝ P² e^{−2aP} peaks at P = 1/a.
        let a = 0.17;
        let m = interior_max(
            |p| Ok(p * p * (-2.0 * a * p).exp()),
            0.1,
            30.0,
            OPTIMIZE_TOL_BAR,
        )
        .unwrap();
        assert!((m.x - 1.0 / a).abs() < OPTIMIZE_TOL_BAR);
    }
}
