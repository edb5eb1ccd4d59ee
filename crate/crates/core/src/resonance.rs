//! The Q₁(1) Raman line: pressure-shifted center, pressure-broadened
//! Lorentzian, synthetic detuning scans and the pressure-stability bound.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::Pressure;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResonanceParams {
    /// Zero-pressure line center, THz.
    #[serde(rename = "nu0_THz")]
    pub nu0_thz: f64,
    /// Collisional shift, MHz/bar.
    #[serde(rename = "shift_MHz_per_bar")]
    pub shift_mhz_per_bar: f64,
    /// Collisional broadening of the FWHM, MHz/bar.
    #[serde(rename = "fwhm_MHz_per_bar")]
    pub broadening_mhz_per_bar: f64,
    /// Zero-pressure FWHM, MHz.
    #[serde(rename = "natural_width_MHz", default)]
    pub natural_width_mhz: f64,
}

impl Default for ResonanceParams {
    fn default() -> Self {
        Self {
            nu0_thz: 124.571055,
            shift_mhz_per_bar: -80.0,
            broadening_mhz_per_bar: 40.0,
            natural_width_mhz: 0.0,
        }
    }
}

impl ResonanceParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.broadening_mhz_per_bar > 0.0) {
            return Err(Error::domain("pressure broadening must be positive"));
        }
        if !(self.natural_width_mhz >= 0.0) {
            return Err(Error::domain("natural width must be non-negative"));
        }
        if !(self.nu0_thz > 0.0) || !self.shift_mhz_per_bar.is_finite() {
            return Err(Error::domain(
                "resonance center and shift must be finite, center positive",
            ));
        }
        Ok(())
    }

    /// ν_res(P) = ν₀ + s·P, THz.
    pub fn center_frequency(&self, p: Pressure) -> f64 {
        self.nu0_thz + self.shift_mhz_per_bar * p.bar() * 1e-6
    }

    /// Offset of the pressure-shifted center from ν₀, MHz.
    pub fn center_offset_mhz(&self, p: Pressure) -> f64 {
        self.shift_mhz_per_bar * p.bar()
    }

    /// Γ(P) = Γ₀ + b·P, MHz.
    pub fn fwhm(&self, p: Pressure) -> f64 {
        self.natural_width_mhz + self.broadening_mhz_per_bar * p.bar()
    }

    /// Fractional pressure change that moves the line by one FWHM.
    pub fn pressure_stability_bound(&self, p: Pressure) -> Result<f64> {
        if self.shift_mhz_per_bar == 0.0 {
            return Err(Error::domain(
                "no pressure shift: stability bound undefined",
            ));
        }
        if !(p.bar() > 0.0) {
            return Err(Error::domain("stability bound needs a positive pressure"));
        }
        Ok(self.fwhm(p) / (self.shift_mhz_per_bar.abs() * p.bar()))
    }
}

/// Peak-normalized Lorentzian `(Γ/2)² / (δ² + (Γ/2)²)`.
pub fn lineshape(delta_mhz: f64, fwhm_mhz: f64) -> Result<f64> {
    if !(fwhm_mhz > 0.0) {
        return Err(Error::domain(format!(
            "linewidth must be positive, got {fwhm_mhz} MHz"
        )));
    }
    let hw2 = 0.25 * fwhm_mhz * fwhm_mhz;
    Ok(hw2 / (delta_mhz * delta_mhz + hw2))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum NoiseModel {
    #[default]
    None,
    Poisson,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct ScanMeta {
    pub pressure_bar: Option<f64>,
    pub duration_s: Option<f64>,
    pub seed: Option<u64>,
    /// Frequency that detuning 0 refers to, THz.
    pub reference_thz: Option<f64>,
}

/// A generic (x, y, σ) series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct ScanData {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub sigma: Vec<f64>,
    #[serde(default)]
    pub meta: ScanMeta,
}

impl ScanData {
    pub fn new(x: Vec<f64>, y: Vec<f64>, sigma: Vec<f64>) -> Result<Self> {
        let d = Self {
            x,
            y,
            sigma,
            meta: ScanMeta::default(),
        };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        if self.x.len() != self.y.len() || self.x.len() != self.sigma.len() {
            return Err(Error::domain(format!(
                "scan columns differ in length: x {}, y {}, sigma {}",
                self.x.len(),
                self.y.len(),
                self.sigma.len()
            )));
        }
        if let Some(s) = self.sigma.iter().find(|s| !(**s > 0.0)) {
            return Err(Error::domain(format!(
                "scan uncertainty must be positive, got {s}"
            )));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }
}

/// Counts-data uncertainty √max(y, 1).
pub fn poisson_sigma(y: f64) -> f64 {
    y.max(1.0).sqrt()
}

/// Evenly spaced detuning grid of `points` values spanning
/// `center ± half_span`.
pub fn detuning_grid(center_mhz: f64, half_span_mhz: f64, points: usize) -> Vec<f64> {
    if points == 1 {
        return vec![center_mhz];
    }
    (0..points)
        .map(|i| center_mhz - half_span_mhz + 2.0 * half_span_mhz * i as f64 / (points - 1) as f64)
        .collect()
}

/// Detuning scan across the line at pressure `p`. Detuning is measured from
/// ν₀, so the line sits at `s·P` MHz.
pub fn synthesize_scan(
    params: &ResonanceParams,
    p: Pressure,
    detuning_mhz: &[f64],
    peak_rate: f64,
    noise: NoiseModel,
    seed: u64,
) -> Result<ScanData> {
    params.validate()?;
    if detuning_mhz.is_empty() {
        return Err(Error::domain("detuning grid is empty"));
    }
    if !(peak_rate > 0.0) {
        return Err(Error::domain("peak rate must be positive"));
    }
    let gamma = params.fwhm(p);
    let center = params.center_offset_mhz(p);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut y = Vec::with_capacity(detuning_mhz.len());
    for &d in detuning_mhz {
        let mean = peak_rate * lineshape(d - center, gamma)?;
        let v = match noise {
            NoiseModel::None => mean,
            NoiseModel::Poisson => poisson_draw(&mut rng, mean),
        };
        y.push(v);
    }
    let sigma = y.iter().map(|&v| poisson_sigma(v)).collect();
    Ok(ScanData {
        x: detuning_mhz.to_vec(),
        y,
        sigma,
        meta: ScanMeta {
            pressure_bar: Some(p.bar()),
            duration_s: None,
            seed: Some(seed),
            reference_thz: Some(params.nu0_thz),
        },
    })
}

pub(crate) fn poisson_draw(rng: &mut ChaCha8Rng, mean: f64) -> f64 {
    if mean <= 0.0 {
        return 0.0;
    }
    Poisson::new(mean)
        .expect("positive finite mean")
        .sample(rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bar(p: f64) -> Pressure {
        Pressure::from_bar(p).unwrap()
    }

    #[test]
    fn center_and_width() {
        let r = ResonanceParams::default();
        assert_eq!(r.center_frequency(bar(0.0)), 124.571055);
        assert!((r.center_frequency(bar(16.7)) - 124.569719).abs() < 1e-9);
        let flat = ResonanceParams {
            shift_mhz_per_bar: 0.0,
            ..r
        };
        assert_eq!(
            flat.center_frequency(bar(30.0)),
            flat.center_frequency(bar(0.0))
        );
        assert!((r.fwhm(bar(16.7)) - 668.0).abs() < 1e-9);
        assert_eq!(r.fwhm(bar(0.0)), 0.0);
        assert!((r.fwhm(bar(6.5)) - 260.0).abs() < 1e-12);
    }

    #[test]
    fn lineshape_values() {
        assert_eq!(lineshape(0.0, 260.0).unwrap(), 1.0);
        assert_eq!(lineshape(130.0, 260.0).unwrap(), 0.5);
        assert!((lineshape(390.0, 260.0).unwrap() - 0.1).abs() < 1e-15);
        assert!(lineshape(0.0, 0.0).is_err());
        assert!(lineshape(0.0, -1.0).is_err());
    }

    #[test]
    fn stability_bound() {
        let r = ResonanceParams::default();
        for p in [1.0, 6.5, 16.7] {
            assert!((r.pressure_stability_bound(bar(p)).unwrap() - 0.5).abs() < 1e-12);
        }
        let half_b = ResonanceParams {
            broadening_mhz_per_bar: 20.0,
            ..r
        };
        assert!((half_b.pressure_stability_bound(bar(3.0)).unwrap() - 0.25).abs() < 1e-12);
        let double_s = ResonanceParams {
            shift_mhz_per_bar: -160.0,
            ..r
        };
        assert!((double_s.pressure_stability_bound(bar(3.0)).unwrap() - 0.25).abs() < 1e-12);
        let none = ResonanceParams {
            shift_mhz_per_bar: 0.0,
            ..r
        };
        assert!(none.pressure_stability_bound(bar(3.0)).is_err());
    }

    #[test]
    fn noise_free_scan_is_on_the_lorentzian() {
        let r = ResonanceParams::default();
        let grid = detuning_grid(-1336.0, 2004.0, 41);
        let s = synthesize_scan(&r, bar(16.7), &grid, 400.0, NoiseModel::None, 1).unwrap();
        for (x, y) in s.x.iter().zip(&s.y) {
            assert_eq!(*y, 400.0 * lineshape(x + 1336.0, 668.0).unwrap());
        }
    }

    #[test]
    fn seeded_scans_repeat() {
        let r = ResonanceParams::default();
        let grid = detuning_grid(0.0, 1000.0, 50);
        let a = synthesize_scan(&r, bar(4.0), &grid, 400.0, NoiseModel::Poisson, 17).unwrap();
        let b = synthesize_scan(&r, bar(4.0), &grid, 400.0, NoiseModel::Poisson, 17).unwrap();
        assert_eq!(a, b);
        let c = synthesize_scan(&r, bar(4.0), &grid, 400.0, NoiseModel::Poisson, 18).unwrap();
        assert_ne!(a.y, c.y);
    }

    #[test]
    fn poisson_scatter_matches_sqrt_y() {
        // Mean of (y − μ)²/μ over 50 seeds × 100 points should be 1.
        let r = ResonanceParams::default();
        let p = bar(16.7);
        let gamma = r.fwhm(p);
        let grid = detuning_grid(r.center_offset_mhz(p), 3.0 * gamma, 100);
        let mut acc = 0.0;
        let mut n = 0.0;
        for seed in 0..50 {
            let s = synthesize_scan(&r, p, &grid, 400.0, NoiseModel::Poisson, seed).unwrap();
            for (x, y) in s.x.iter().zip(&s.y) {
                let mu = 400.0 * lineshape(x - r.center_offset_mhz(p), gamma).unwrap();
                acc += (y - mu).powi(2) / mu;
                n += 1.0;
            }
        }
        assert!((acc / n - 1.0).abs() < 0.05, "{}", acc / n);
    }

    #[test]
    fn scan_validation() {
        assert!(ScanData::new(vec![1.0], vec![1.0, 2.0], vec![1.0]).is_err());
        assert!(ScanData::new(vec![1.0], vec![1.0], vec![0.0]).is_err());
        let r = ResonanceParams::default();
        assert!(synthesize_scan(&r, bar(1.0), &[], 1.0, NoiseModel::None, 0).is_err());
        assert!(synthesize_scan(&r, bar(1.0), &[0.0], 0.0, NoiseModel::None, 0).is_err());
    }

    proptest! {
        #[test]
        fn lineshape_is_even_and_bounded(d in -1e4f64..1e4, g in 1e-3f64..1e4) {
            let a = lineshape(d, g).unwrap();
            prop_assert_eq!(a, lineshape(-d, g).unwrap());
            prop_assert!(a > 0.0 && a <= 1.0);
            prop_assert!((lineshape(g / 2.0, g).unwrap() - 0.5).abs() < 1e-15);
        }

        #[test]
        fn affine_in_pressure(p in 0.0f64..60.0, q in 0.0f64..60.0) {
            let r = ResonanceParams { natural_width_mhz: 3.0, ..Default::default() };
            let mid = bar(0.5 * (p + q));
            let c = 0.5 * (r.center_frequency(bar(p)) + r.center_frequency(bar(q)));
            prop_assert!((r.center_frequency(mid) - c).abs() < 1e-12);
            let w = 0.5 * (r.fwhm(bar(p)) + r.fwhm(bar(q)));
            prop_assert!((r.fwhm(mid) - w).abs() < 1e-9);
        }
    }
}
