//! Least-squares fits that reduce scans to reported parameters.

use nalgebra::{DMatrix, DVector, Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::resonance::{detuning_grid, synthesize_scan, NoiseModel, ResonanceParams, ScanData};
use crate::units::Pressure;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitParam {
    pub name: String,
    pub value: f64,
    /// 1σ uncertainty.
    pub sigma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub model: String,
    pub params: Vec<FitParam>,
    pub chi2_reduced: f64,
    pub n_iterations: usize,
    pub converged: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagnostics: Option<String>,
}

impl FitResult {
    pub fn param(&self, name: &str) -> Option<&FitParam> {
        self.params.iter().find(|p| p.name == name)
    }

    /// Value of a named parameter; panics if the model has no such parameter.
    pub fn value(&self, name: &str) -> f64 {
        self.param(name)
            .unwrap_or_else(|| panic!("{} fit has no parameter `{name}`", self.model))
            .value
    }

    pub fn sigma(&self, name: &str) -> f64 {
        self.param(name)
            .unwrap_or_else(|| panic!("{} fit has no parameter `{name}`", self.model))
            .sigma
    }
}

fn params(names: &[&str], values: &[f64], sigmas: &[f64]) -> Vec<FitParam> {
    names
        .iter()
        .zip(values.iter().zip(sigmas))
        .map(|(n, (&value, &sigma))| FitParam {
            name: (*n).to_string(),
            value,
            sigma,
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Lorentzian

pub const LORENTZIAN_PARAMS: [&str; 4] = ["center", "fwhm", "amplitude", "offset"];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LorentzianGuess {
    pub center: f64,
    pub fwhm: f64,
    pub amplitude: f64,
    pub offset: f64,
}

impl LorentzianGuess {
    fn to_array(self) -> [f64; 4] {
        [self.center, self.fwhm, self.amplitude, self.offset]
    }

    /// Argmax for the center, half-maximum crossings for the width, min for
    /// the offset and max − min for the amplitude.
    pub fn from_data(x: &[f64], y: &[f64]) -> Self {
        let mut order: Vec<usize> = (0..x.len()).collect();
        order.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
        let xs: Vec<f64> = order.iter().map(|&i| x[i]).collect();
        let ys: Vec<f64> = order.iter().map(|&i| y[i]).collect();
        let (imax, ymax) = ys
            .iter()
            .enumerate()
            .fold(
                (0, f64::NEG_INFINITY),
                |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc },
            );
        let ymin = ys.iter().copied().fold(f64::INFINITY, f64::min);
        let half = 0.5 * (ymax + ymin);
        let cross = |j: usize, k: usize| {
            let t = (half - ys[j]) / (ys[k] - ys[j]);
            xs[j] + t * (xs[k] - xs[j])
        };
        let left = (0..imax)
            .rev()
            .find(|&j| ys[j] < half)
            .map(|j| cross(j, j + 1));
        let right = (imax + 1..ys.len())
            .find(|&j| ys[j] < half)
            .map(|j| cross(j, j - 1));
        let center = xs[imax];
        let span = xs[xs.len() - 1] - xs[0];
        let fwhm = match (left, right) {
            (Some(l), Some(r)) => r - l,
            (Some(l), None) => 2.0 * (center - l),
            (None, Some(r)) => 2.0 * (r - center),
            (None, None) => 0.5 * span,
        };
        let fwhm = if fwhm > 0.0 {
            fwhm
        } else {
            0.5 * span.max(f64::MIN_POSITIVE)
        };
        Self {
            center,
            fwhm,
            amplitude: ymax - ymin,
            offset: ymin,
        }
    }
}

pub fn lorentzian(x: f64, p: &[f64; 4]) -> f64 {
    let h = 0.5 * p[1];
    let d = x - p[0];
    p[3] + p[2] * h * h / (d * d + h * h)
}

fn lorentzian_jacobian_row(x: f64, p: &[f64; 4]) -> [f64; 4] {
    let h = 0.5 * p[1];
    let d = x - p[0];
    let den = d * d + h * h;
    let den2 = den * den;
    [
        p[2] * h * h * 2.0 * d / den2,
        p[2] * h * d * d / den2,
        h * h / den,
        1.0,
    ]
}

const MAX_ITERATIONS: usize = 100;
const STEP_TOL: f64 = 1e-10;

/// Damped Gauss–Newton (Levenberg–Marquardt) fit of
/// `offset + amplitude·L(x − center; fwhm)` weighted by the scan σ.
pub fn fit_lorentzian(data: &ScanData, init: Option<LorentzianGuess>) -> Result<FitResult> {
    data.validate()?;
    let n = data.len();
    if n < 5 {
        return Err(Error::domain(format!(
            "Lorentzian fit needs at least 5 points, got {n}"
        )));
    }
    let mut p = init
        .unwrap_or_else(|| LorentzianGuess::from_data(&data.x, &data.y))
        .to_array();
    let w: Vec<f64> = data.sigma.iter().map(|s| 1.0 / (s * s)).collect();
    let chi2 = |p: &[f64; 4]| -> f64 {
        data.x
            .iter()
            .zip(&data.y)
            .zip(&w)
            .map(|((&x, &y), &w)| w * (y - lorentzian(x, p)).powi(2))
            .sum()
    };
    let normal = |p: &[f64; 4]| -> (DMatrix<f64>, DVector<f64>) {
        let mut a = DMatrix::<f64>::zeros(4, 4);
        let mut g = DVector::<f64>::zeros(4);
        for ((&x, &y), &wi) in data.x.iter().zip(&data.y).zip(&w) {
            let j = lorentzian_jacobian_row(x, p);
            let r = y - lorentzian(x, p);
            for k in 0..4 {
                g[k] += wi * j[k] * r;
                for l in 0..4 {
                    a[(k, l)] += wi * j[k] * j[l];
                }
            }
        }
        (a, g)
    };
    let dof = (n - 4).max(1) as f64;
    let fail = |p: &[f64; 4], iterations: usize, why: String| FitResult {
        model: "lorentzian".into(),
        params: params(&LORENTZIAN_PARAMS, p, &[f64::NAN; 4]),
        chi2_reduced: chi2(p) / dof,
        n_iterations: iterations,
        converged: false,
        diagnostics: Some(why),
    };

    let mut lambda = 1e-3;
    let mut current = chi2(&p);
    let mut converged = false;
    let mut iterations = 0;
    while iterations < MAX_ITERATIONS {
        iterations += 1;
        let (a, g) = normal(&p);
        let mut damped = a.clone();
        for k in 0..4 {
            damped[(k, k)] *= 1.0 + lambda;
        }
        let Some(chol) = damped.cholesky() else {
            return Ok(fail(&p, iterations, "singular normal equations".into()));
        };
        let step = chol.solve(&g);
        let scale = [p[1].abs(), p[1].abs(), p[2].abs(), p[2].abs()];
        let small = (0..4).all(|k| step[k].abs() <= STEP_TOL * (p[k].abs() + scale[k]));
        let mut trial = p;
        for k in 0..4 {
            trial[k] += step[k];
        }
        let trial_chi2 = if trial[1] > 0.0 {
            chi2(&trial)
        } else {
            f64::INFINITY
        };
        if trial_chi2 <= current {
            p = trial;
            current = trial_chi2;
            lambda = (lambda * 0.1).max(1e-12);
        } else {
            lambda *= 10.0;
        }
        if small {
            converged = true;
            break;
        }
        if lambda > 1e16 {
            return Ok(fail(
                &p,
                iterations,
                "damping diverged without reducing chi-square".into(),
            ));
        }
    }
    if !converged {
        return Ok(fail(
            &p,
            iterations,
            format!("no convergence in {MAX_ITERATIONS} iterations"),
        ));
    }
    let (a, _) = normal(&p);
    let Some(cov) = a.try_inverse() else {
        return Ok(fail(
            &p,
            iterations,
            "singular covariance at solution".into(),
        ));
    };
    let sigmas: Vec<f64> = (0..4).map(|k| cov[(k, k)].max(0.0).sqrt()).collect();
    if sigmas.iter().any(|s| !(s.is_finite())) || p[2] == 0.0 {
        return Ok(fail(
            &p,
            iterations,
            "degenerate solution (zero amplitude)".into(),
        ));
    }
    Ok(FitResult {
        model: "lorentzian".into(),
        params: params(&LORENTZIAN_PARAMS, &p, &sigmas),
        chi2_reduced: current / dof,
        n_iterations: iterations,
        converged: true,
        diagnostics: None,
    })
}

// ---------------------------------------------------------------------------
// Straight line

/// Weighted least squares `y = slope·x + intercept`. Without σ the
/// uncertainties are scaled by the residual variance.
pub fn fit_line(x: &[f64], y: &[f64], sigma: Option<&[f64]>) -> Result<FitResult> {
    let n = x.len();
    if y.len() != n || sigma.is_some_and(|s| s.len() != n) {
        return Err(Error::domain("line fit inputs differ in length"));
    }
    if n < 2 {
        return Err(Error::domain("line fit needs at least 2 points"));
    }
    if let Some(s) = sigma {
        if s.iter().any(|v| !(*v > 0.0)) {
            return Err(Error::domain("line fit uncertainties must be positive"));
        }
    }
    let w: Vec<f64> = match sigma {
        Some(s) => s.iter().map(|v| 1.0 / (v * v)).collect(),
        None => vec![1.0; n],
    };
    let sw: f64 = w.iter().sum();
    let xm = x.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>() / sw;
    let ym = y.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>() / sw;
    let sxx: f64 = x
        .iter()
        .zip(&w)
        .map(|(&xi, &wi)| wi * (xi - xm).powi(2))
        .sum();
    if !(sxx > 0.0) {
        return Err(Error::domain("line fit needs at least 2 distinct x values"));
    }
    let sxy: f64 = x
        .iter()
        .zip(y)
        .zip(&w)
        .map(|((&xi, &yi), &wi)| wi * (xi - xm) * (yi - ym))
        .sum();
    let slope = sxy / sxx;
    let intercept = ym - slope * xm;
    let chi2: f64 = x
        .iter()
        .zip(y)
        .zip(&w)
        .map(|((&xi, &yi), &wi)| wi * (yi - slope * xi - intercept).powi(2))
        .sum();
    let dof = n.saturating_sub(2);
    let chi2_reduced = if dof > 0 { chi2 / dof as f64 } else { 0.0 };
    let var_scale = if sigma.is_some() { 1.0 } else { chi2_reduced };
    let slope_var = var_scale / sxx;
    let intercept_var = var_scale * (1.0 / sw + xm * xm / sxx);
    Ok(FitResult {
        model: "line".into(),
        params: params(
            &["slope", "intercept"],
            &[slope, intercept],
            &[slope_var.sqrt(), intercept_var.sqrt()],
        ),
        chi2_reduced,
        n_iterations: 1,
        converged: true,
        diagnostics: None,
    })
}

// ---------------------------------------------------------------------------
// Malus law

/// Fits `offset + amplitude·cos²(θ − phase)` (θ, phase in degrees) through the
/// linear form `a + b·cos2θ + c·sin2θ`.
pub fn fit_malus(theta_deg: &[f64], rates: &[f64]) -> Result<FitResult> {
    let n = theta_deg.len();
    if rates.len() != n {
        return Err(Error::domain("Malus fit inputs differ in length"));
    }
    if n < 4 {
        return Err(Error::domain("Malus fit needs at least 4 angles"));
    }
    let lo = theta_deg.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = theta_deg.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi - lo < 180.0 - 1e-9 {
        return Err(Error::domain(format!(
            "Malus fit needs angles spanning 180°, got {}°",
            hi - lo
        )));
    }
    let mut ata = Matrix3::<f64>::zeros();
    let mut aty = Vector3::<f64>::zeros();
    for (&t, &y) in theta_deg.iter().zip(rates) {
        let t2 = 2.0 * t.to_radians();
        let row = Vector3::new(1.0, t2.cos(), t2.sin());
        ata += row * row.transpose();
        aty += row * y;
    }
    let svd = ata.svd(false, false);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if !(smin > 1e-10 * smax) {
        return Err(Error::domain(
            "Malus fit design is rank deficient: angles do not sample three independent harmonics",
        ));
    }
    let inv = ata
        .try_inverse()
        .ok_or_else(|| Error::domain("Malus normal matrix is singular"))?;
    let coef = inv * aty;
    let (a, b, c) = (coef[0], coef[1], coef[2]);
    let rss: f64 = theta_deg
        .iter()
        .zip(rates)
        .map(|(&t, &y)| {
            let t2 = 2.0 * t.to_radians();
            (y - a - b * t2.cos() - c * t2.sin()).powi(2)
        })
        .sum();
    let dof = n - 3;
    let s2 = if dof > 0 { rss / dof as f64 } else { 0.0 };
    let cov = inv * s2;

    let r = (b * b + c * c).sqrt();
    let amplitude = 2.0 * r;
    // Report the phase in (−90°, 90°].
    let mut phase = 0.5 * c.atan2(b).to_degrees();
    if phase <= -90.0 + 1e-9 {
        phase += 180.0;
    }
    let offset = a - r;
    // Jacobians of (amplitude, phase, offset) with respect to (a, b, c).
    let (db_r, dc_r) = if r > 0.0 { (b / r, c / r) } else { (0.0, 0.0) };
    let (db_p, dc_p) = if r > 0.0 {
        (-0.5 * c / (r * r), 0.5 * b / (r * r))
    } else {
        (0.0, 0.0)
    };
    let var = |g: Vector3<f64>| (g.transpose() * cov * g)[(0, 0)].max(0.0).sqrt();
    let amp_sigma = var(Vector3::new(0.0, 2.0 * db_r, 2.0 * dc_r));
    let phase_sigma = var(Vector3::new(0.0, db_p, dc_p)).to_degrees();
    let offset_sigma = var(Vector3::new(1.0, -db_r, -dc_r));
    Ok(FitResult {
        model: "malus".into(),
        params: params(
            &["amplitude", "phase", "offset"],
            &[amplitude, phase, offset],
            &[amp_sigma, phase_sigma, offset_sigma],
        ),
        chi2_reduced: s2,
        n_iterations: 1,
        converged: true,
        diagnostics: None,
    })
}

// ---------------------------------------------------------------------------
// Zero-pressure extrapolation

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Extrapolation {
    pub nu0_thz: f64,
    pub nu0_sigma_thz: f64,
    pub slope_mhz_per_bar: f64,
    pub slope_sigma_mhz_per_bar: f64,
    pub line: FitResult,
}

/// Straight line through fitted centers (MHz from `reference_thz`) versus
/// pressure, weighted by the center uncertainties when all are available.
pub fn zero_pressure_extrapolation(
    series: &[(f64, FitResult)],
    reference_thz: f64,
) -> Result<Extrapolation> {
    if series.len() < 2 {
        return Err(Error::domain(
            "zero-pressure extrapolation needs at least 2 pressures",
        ));
    }
    let mut x = Vec::with_capacity(series.len());
    let mut y = Vec::with_capacity(series.len());
    let mut s = Vec::with_capacity(series.len());
    for (p, fit) in series {
        let c = fit
            .param("center")
            .ok_or_else(|| Error::domain(format!("{} fit has no center", fit.model)))?;
        if !fit.converged {
            return Err(Error::numerical(format!(
                "resonance fit at {p} bar did not converge"
            )));
        }
        x.push(*p);
        y.push(c.value);
        s.push(c.sigma);
    }
    let weights = s.iter().all(|v| *v > 0.0 && v.is_finite());
    let line = fit_line(&x, &y, weights.then_some(s.as_slice()))?;
    Ok(Extrapolation {
        nu0_thz: reference_thz + line.value("intercept") * 1e-6,
        nu0_sigma_thz: line.sigma("intercept") * 1e-6,
        slope_mhz_per_bar: line.value("slope"),
        slope_sigma_mhz_per_bar: line.sigma("slope"),
        line,
    })
}

// ---------------------------------------------------------------------------
// Pressure series

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesOptions {
    pub points: usize,
    /// Half span of each scan in units of the local FWHM.
    pub span_fwhm: f64,
    pub peak_counts: f64,
    pub noise: NoiseModel,
    /// Scan `i` uses `seed + i`.
    pub seed: u64,
}

impl Default for SeriesOptions {
    fn default() -> Self {
        Self {
            points: 100,
            span_fwhm: 3.0,
            peak_counts: 400.0,
            noise: NoiseModel::None,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesPoint {
    pub pressure_bar: f64,
    pub scan: ScanData,
    pub fit: FitResult,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesReport {
    pub points: Vec<SeriesPoint>,
    pub extrapolation: Extrapolation,
    /// Straight line through the fitted widths (MHz) versus pressure.
    pub broadening: FitResult,
}

impl SeriesReport {
    /// Line center from the extrapolated linear model, THz.
    pub fn center_at(&self, pressure_bar: f64) -> f64 {
        self.extrapolation.nu0_thz + self.extrapolation.slope_mhz_per_bar * pressure_bar * 1e-6
    }
}

/// Synthesizes a scan at each pressure, fits each with a Lorentzian and
/// extrapolates the centers to zero pressure.
pub fn pressure_series(
    params: &ResonanceParams,
    pressures: &[f64],
    opts: &SeriesOptions,
) -> Result<SeriesReport> {
    if pressures.len() < 2 {
        return Err(Error::domain("pressure series needs at least 2 pressures"));
    }
    let mut points = Vec::with_capacity(pressures.len());
    for (i, &bar) in pressures.iter().enumerate() {
        let p = Pressure::from_bar(bar)?;
        if bar == 0.0 && params.natural_width_mhz == 0.0 {
            return Err(Error::domain("line has zero width at 0 bar"));
        }
        let gamma = params.fwhm(p);
        let grid = detuning_grid(
            params.center_offset_mhz(p),
            opts.span_fwhm * gamma,
            opts.points,
        );
        let scan = synthesize_scan(
            params,
            p,
            &grid,
            opts.peak_counts,
            opts.noise,
            opts.seed.wrapping_add(i as u64),
        )?;
        let fit = fit_lorentzian(&scan, None)?;
        points.push(SeriesPoint {
            pressure_bar: bar,
            scan,
            fit,
        });
    }
    let pairs: Vec<(f64, FitResult)> = points
        .iter()
        .map(|s| (s.pressure_bar, s.fit.clone()))
        .collect();
    let extrapolation = zero_pressure_extrapolation(&pairs, params.nu0_thz)?;
    let widths: Vec<f64> = points.iter().map(|s| s.fit.value("fwhm")).collect();
    let width_sigma: Vec<f64> = points.iter().map(|s| s.fit.sigma("fwhm")).collect();
    let weighted = width_sigma.iter().all(|v| *v > 0.0 && v.is_finite());
    let broadening = fit_line(
        pressures,
        &widths,
        weighted.then_some(width_sigma.as_slice()),
    )?;
    Ok(SeriesReport {
        points,
        extrapolation,
        broadening,
    })
}
