use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use h2conv_core::config::RunConfig;
use h2conv_core::detection::simulate_toggle_experiment;
use h2conv_core::dispersion::GasState;
use h2conv_core::fit::{fit_line, fit_lorentzian, fit_malus, pressure_series, SeriesOptions};
use h2conv_core::fwm::{
    linear_grid, optimize_pressure, phase_mismatch, pressure_sweep, relative_efficiency,
};
use h2conv_core::io::{
    format_f64, gnuplot_path, gnuplot_script, read_columns_from_path, read_polarization_csv,
    read_scan_csv, write_columns, write_curve_csv, write_json, write_json_file,
    write_polarization_csv, write_scan_csv, write_toggle_csv, FitReport,
};
use h2conv_core::polarization::{fidelity, fidelity_closed_form, polarization_scan};
use h2conv_core::resonance::{detuning_grid, synthesize_scan};
use h2conv_core::units::{Pressure, Temperature, Wavelength};
use h2conv_core::{DispersionModel, Error, NoiseModel, Result, VERSION};

#[derive(Debug, Parser)]
#[command(
    name = "h2conv",
    version,
    about = "Raman frequency conversion in pressurized hydrogen"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct ConfigArg {
    /// Run configuration (JSON). Omitted keys take their default values.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
}

impl ConfigArg {
    fn load(&self) -> Result<RunConfig> {
        match &self.config {
            Some(p) => RunConfig::from_path(p),
            None => Ok(RunConfig::default()),
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Noise {
    None,
    Poisson,
}

impl From<Noise> for NoiseModel {
    fn from(n: Noise) -> Self {
        match n {
            Noise::None => NoiseModel::None,
            Noise::Poisson => NoiseModel::Poisson,
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Refractive index and wavevector of the gas at one wavelength and pressure.
    Dispersion {
        /// Vacuum wavelength in nm.
        #[arg(long = "wavelength-nm")]
        wavelength_nm: f64,
        /// Gas pressure in bar.
        #[arg(long = "pressure-bar")]
        pressure_bar: f64,
        /// Gas temperature in K [default: config value, 293.15 K].
        #[arg(long = "temperature-K")]
        temperature_k: Option<f64>,
        #[command(flatten)]
        config: ConfigArg,
        /// Also write the result as CSV to this file.
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Phase mismatch Δk (1/m) versus pressure as CSV.
    Mismatch {
        #[command(flatten)]
        config: ConfigArg,
        /// Highest pressure of the grid in bar.
        #[arg(long = "pmax-bar", default_value_t = 16.0)]
        pmax_bar: f64,
        /// Number of grid points from 0 bar to --pmax-bar.
        #[arg(long, default_value_t = 161)]
        steps: usize,
        /// CSV destination [default: standard output].
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Conversion efficiency versus pressure with optimum and FWHM.
    SweepPressure {
        #[command(flatten)]
        config: ConfigArg,
        /// Highest pressure of the grid in bar.
        #[arg(long = "pmax-bar", default_value_t = 16.0)]
        pmax_bar: f64,
        /// Number of grid points from 0 bar to --pmax-bar.
        #[arg(long, default_value_t = 161)]
        steps: usize,
        /// Curve CSV (pressure_bar, eta); a gnuplot script is written beside it.
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
        /// Summary JSON destination [default: standard output].
        #[arg(long, value_name = "FILE")]
        report: Option<PathBuf>,
    },
    /// Synthetic detuning scan across the Raman line at one pressure.
    ScanResonance {
        #[command(flatten)]
        config: ConfigArg,
        /// Gas pressure in bar.
        #[arg(long = "pressure-bar")]
        pressure_bar: f64,
        #[arg(long, value_enum, default_value = "none")]
        noise: Noise,
        /// RNG seed [default: config seed].
        #[arg(long)]
        seed: Option<u64>,
        /// Number of detuning points.
        #[arg(long, default_value_t = 100)]
        points: usize,
        /// Half span of the scan in units of the line FWHM.
        #[arg(long = "span-fwhm", default_value_t = 3.0)]
        span_fwhm: f64,
        /// Peak mean counts per point.
        #[arg(long = "peak-counts", default_value_t = 400.0)]
        peak_counts: f64,
        /// Scan CSV destination [default: standard output].
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Fit a model to tabular data and emit a fit report.
    Fit {
        #[command(subcommand)]
        model: FitModel,
    },
    /// Scans at several pressures, Lorentzian fits and zero-pressure extrapolation.
    PressureSeries {
        #[command(flatten)]
        config: ConfigArg,
        /// Comma-separated pressures in bar.
        #[arg(long, value_delimiter = ',', default_value = "4,8,12,16")]
        pressures: Vec<f64>,
        #[arg(long, value_enum, default_value = "none")]
        noise: Noise,
        /// RNG seed; scan i uses seed + i [default: config seed].
        #[arg(long)]
        seed: Option<u64>,
        /// Number of detuning points per scan.
        #[arg(long, default_value_t = 100)]
        points: usize,
        /// Peak mean counts per point.
        #[arg(long = "peak-counts", default_value_t = 400.0)]
        peak_counts: f64,
        /// Directory for the per-pressure scan CSVs.
        #[arg(long = "out-dir", value_name = "DIR")]
        out_dir: Option<PathBuf>,
        /// Report JSON destination [default: standard output].
        #[arg(long, value_name = "FILE")]
        report: Option<PathBuf>,
    },
    /// Two-channel detection while the probe polarization is rotated.
    PolarizationScan {
        #[command(flatten)]
        config: ConfigArg,
        /// Probe rotation step in degrees over 0–360°.
        #[arg(long = "theta-step", default_value_t = 5.0)]
        theta_step: f64,
        #[arg(long, value_enum, default_value = "none")]
        noise: Noise,
        /// Counts per point for a fully transmitted channel (Poisson noise only).
        #[arg(long = "peak-counts", default_value_t = 1000.0)]
        peak_counts: f64,
        /// RNG seed [default: config seed].
        #[arg(long)]
        seed: Option<u64>,
        /// Scan CSV (theta_deg, rate_ch1, rate_ch2); a gnuplot script is written beside it.
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
        /// Fidelity report destination [default: standard output].
        #[arg(long, value_name = "FILE")]
        report: Option<PathBuf>,
    },
    /// Pump on/off toggling to look for pump-induced background counts.
    Toggle {
        #[command(flatten)]
        config: ConfigArg,
        /// Number of on/off cycles.
        #[arg(long, default_value_t = 100)]
        cycles: usize,
        /// Duration of each on and each off period in seconds.
        #[arg(long, default_value_t = 10.0)]
        seconds: f64,
        /// Extra count rate while the pumps are on, counts/s.
        #[arg(long = "extra-cps", default_value_t = 0.0)]
        extra_cps: f64,
        /// RNG seed [default: config seed].
        #[arg(long)]
        seed: Option<u64>,
        /// Counts CSV (cycle, phase, counts).
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
        /// Summary JSON destination [default: standard output].
        #[arg(long, value_name = "FILE")]
        report: Option<PathBuf>,
    },
    /// Maximize the conversion efficiency over one parameter.
    Optimize {
        #[command(flatten)]
        config: ConfigArg,
        #[arg(long, value_enum)]
        param: OptimizeParam,
        /// Lower search bound in bar.
        #[arg(long = "lo-bar", default_value_t = 0.1)]
        lo_bar: f64,
        /// Upper search bound in bar.
        #[arg(long = "hi-bar", default_value_t = 16.0)]
        hi_bar: f64,
        /// Report JSON destination [default: standard output].
        #[arg(long, value_name = "FILE")]
        report: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum OptimizeParam {
    Pressure,
}

#[derive(Debug, Subcommand)]
enum FitModel {
    /// Lorentzian peak; input is a scan CSV (detuning_MHz, counts, sigma).
    Lorentzian {
        #[arg(long, value_name = "FILE")]
        input: PathBuf,
        /// Report JSON destination [default: standard output].
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Straight line through named columns, optionally weighted.
    Line {
        #[arg(long, value_name = "FILE")]
        input: PathBuf,
        /// Column holding x.
        #[arg(long = "x-column", default_value = "x")]
        x_column: String,
        /// Column holding y.
        #[arg(long = "y-column", default_value = "y")]
        y_column: String,
        /// Column holding the 1σ uncertainty of y; unweighted when omitted.
        #[arg(long = "sigma-column")]
        sigma_column: Option<String>,
        /// Report JSON destination [default: standard output].
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// cos² law in the probe angle; input is a polarization CSV
    /// (theta_deg, rate_ch1, rate_ch2).
    Malus {
        #[arg(long, value_name = "FILE")]
        input: PathBuf,
        /// Detection channel to fit.
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=2))]
        channel: u8,
        /// Report JSON destination [default: standard output].
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
}

#[derive(Serialize)]
struct Versioned<'a, T: Serialize> {
    #[serde(flatten)]
    body: T,
    config: &'a RunConfig,
    version: &'static str,
}

fn emit_json<T: Serialize>(dest: Option<&Path>, value: &T) -> Result<()> {
    match dest {
        Some(p) => write_json_file(p, value),
        None => write_json(io::stdout().lock(), value),
    }
}

fn emit_report<T: Serialize>(dest: Option<&Path>, body: T, config: &RunConfig) -> Result<()> {
    emit_json(
        dest,
        &Versioned {
            body,
            config,
            version: VERSION,
        },
    )
}

fn emit_table(dest: Option<&Path>, write: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    match dest {
        Some(p) => h2conv_core::io::write_csv_file(p, |w| write(w)),
        None => {
            let mut out = io::stdout().lock();
            write(&mut out)
        }
    }
}

fn write_plot(
    csv: &Path,
    title: &str,
    xlabel: &str,
    ylabel: &str,
    columns: &[(usize, &str)],
) -> Result<()> {
    let script = gnuplot_script(csv, title, xlabel, ylabel, columns);
    let path = gnuplot_path(csv);
    std::fs::write(&path, script).map_err(|source| Error::Io { path, source })
}

fn usage(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Dispersion {
            wavelength_nm,
            pressure_bar,
            temperature_k,
            config,
            out,
        } => {
            let cfg = config.load()?;
            let lambda = Wavelength::from_nm(wavelength_nm)?;
            let t = Temperature::from_kelvin(temperature_k.unwrap_or(cfg.gas.temperature_k))?;
            let state = GasState::new(Pressure::from_bar(pressure_bar)?, t);
            let model = DispersionModel::new(cfg.gas.coefficients);
            let n = model.refractive_index(lambda, &state)?;
            let k = model.wavevector(lambda, &state)?;
            if let Some(path) = &out {
                h2conv_core::io::write_csv_file(path, |w| {
                    write_columns(
                        w,
                        &[
                            "wavelength_nm",
                            "pressure_bar",
                            "temperature_K",
                            "n",
                            "k_per_m",
                        ],
                        &[&[wavelength_nm], &[pressure_bar], &[t.kelvin()], &[n], &[k]],
                    )
                })?;
            }
            #[derive(Serialize)]
            struct Out {
                wavelength_nm: f64,
                pressure_bar: f64,
                #[serde(rename = "temperature_K")]
                temperature_k: f64,
                number_density_per_m3: f64,
                refractive_index: f64,
                refractivity: f64,
                wavevector_per_m: f64,
            }
            emit_report(
                None,
                Out {
                    wavelength_nm,
                    pressure_bar,
                    temperature_k: t.kelvin(),
                    number_density_per_m3: state.number_density,
                    refractive_index: n,
                    refractivity: n - 1.0,
                    wavevector_per_m: k,
                },
                &cfg,
            )
        }

        Command::Mismatch {
            config,
            pmax_bar,
            steps,
            out,
        } => {
            let cfg = config.load()?;
            let conv = cfg.conversion()?;
            if !(pmax_bar > 0.0) || steps < 2 {
                return Err(usage("--pmax-bar must be positive and --steps at least 2"));
            }
            let grid = linear_grid(0.0, pmax_bar, steps);
            let dk = grid
                .iter()
                .map(|&p| {
                    phase_mismatch(
                        &conv.quadruple,
                        &conv.dispersion,
                        &conv.gas_state(Pressure::from_bar(p)?),
                    )
                })
                .collect::<Result<Vec<_>>>()?;
            emit_table(out.as_deref(), |w| {
                write_columns(w, &["pressure_bar", "delta_k_per_m"], &[&grid, &dk])
            })?;
            if let Some(p) = &out {
                write_plot(
                    p,
                    "phase mismatch",
                    "pressure (bar)",
                    "Δk (1/m)",
                    &[(2, "lines")],
                )?;
            }
            Ok(())
        }

        Command::SweepPressure {
            config,
            pmax_bar,
            steps,
            out,
            report,
        } => {
            let cfg = config.load()?;
            let conv = cfg.calibrated_conversion()?;
            if !(pmax_bar > 0.0) {
                return Err(usage("--pmax-bar must be positive"));
            }
            let curve = pressure_sweep(&conv, &linear_grid(0.0, pmax_bar, steps))?;
            if let Some(p) = &out {
                h2conv_core::io::write_csv_file(p, |w| write_curve_csv(w, &curve))?;
                write_plot(
                    p,
                    "conversion efficiency",
                    "pressure (bar)",
                    "eta",
                    &[(2, "lines")],
                )?;
            }
            #[derive(Serialize)]
            struct Summary {
                optimum_pressure_bar: f64,
                optimum_eta: f64,
                optimum_eta_model: f64,
                fwhm_bar: Option<f64>,
                normalized: bool,
                points: usize,
            }
            emit_report(
                report.as_deref(),
                Summary {
                    optimum_pressure_bar: curve.optimum_pressure,
                    optimum_eta: curve.optimum_eta,
                    optimum_eta_model: curve.optimum_eta_model,
                    fwhm_bar: curve.fwhm_pressure,
                    normalized: curve.normalized,
                    points: curve.pressures.len(),
                },
                &cfg,
            )
        }

        Command::ScanResonance {
            config,
            pressure_bar,
            noise,
            seed,
            points,
            span_fwhm,
            peak_counts,
            out,
        } => {
            let cfg = config.load()?;
            let p = Pressure::from_bar(pressure_bar)?;
            let gamma = cfg.resonance.fwhm(p);
            if !(gamma > 0.0) {
                return Err(usage("line width is zero at this pressure"));
            }
            if points < 2 || !(span_fwhm > 0.0) {
                return Err(usage(
                    "--points must be at least 2 and --span-fwhm positive",
                ));
            }
            let grid = detuning_grid(
                cfg.resonance.center_offset_mhz(p),
                span_fwhm * gamma,
                points,
            );
            let scan = synthesize_scan(
                &cfg.resonance,
                p,
                &grid,
                peak_counts,
                noise.into(),
                seed.unwrap_or(cfg.seed),
            )?;
            emit_table(out.as_deref(), |w| write_scan_csv(w, &scan))?;
            if let Some(p) = &out {
                write_plot(
                    p,
                    "resonance scan",
                    "detuning from nu0 (MHz)",
                    "counts",
                    &[(2, "points")],
                )?;
            }
            Ok(())
        }

        Command::Fit { model } => run_fit(model),

        Command::PressureSeries {
            config,
            pressures,
            noise,
            seed,
            points,
            peak_counts,
            out_dir,
            report,
        } => {
            let cfg = config.load()?;
            let opts = SeriesOptions {
                points,
                peak_counts,
                noise: noise.into(),
                seed: seed.unwrap_or(cfg.seed),
                ..SeriesOptions::default()
            };
            let rep = pressure_series(&cfg.resonance, &pressures, &opts)?;
            if let Some(dir) = &out_dir {
                std::fs::create_dir_all(dir).map_err(|source| Error::Io {
                    path: dir.clone(),
                    source,
                })?;
                for pt in &rep.points {
                    let path = dir.join(format!("scan_{}bar.csv", format_f64(pt.pressure_bar)));
                    h2conv_core::io::write_csv_file(&path, |w| write_scan_csv(w, &pt.scan))?;
                }
            }
            #[derive(Serialize)]
            struct Fit {
                pressure_bar: f64,
                fit: FitReport<()>,
            }
            #[derive(Serialize)]
            struct Out {
                fits: Vec<Fit>,
                #[serde(rename = "nu0_THz")]
                nu0_thz: f64,
                #[serde(rename = "nu0_sigma_THz")]
                nu0_sigma_thz: f64,
                #[serde(rename = "shift_MHz_per_bar")]
                shift: f64,
                #[serde(rename = "shift_sigma_MHz_per_bar")]
                shift_sigma: f64,
                #[serde(rename = "broadening_MHz_per_bar")]
                broadening: f64,
                #[serde(rename = "broadening_sigma_MHz_per_bar")]
                broadening_sigma: f64,
                options: SeriesOptions,
            }
            let fits = rep
                .points
                .iter()
                .map(|pt| Fit {
                    pressure_bar: pt.pressure_bar,
                    fit: FitReport::new(&pt.fit, ()),
                })
                .collect();
            let not_converged: Vec<f64> = rep
                .points
                .iter()
                .filter(|p| !p.fit.converged)
                .map(|p| p.pressure_bar)
                .collect();
            emit_report(
                report.as_deref(),
                Out {
                    fits,
                    nu0_thz: rep.extrapolation.nu0_thz,
                    nu0_sigma_thz: rep.extrapolation.nu0_sigma_thz,
                    shift: rep.extrapolation.slope_mhz_per_bar,
                    shift_sigma: rep.extrapolation.slope_sigma_mhz_per_bar,
                    broadening: rep.broadening.value("slope"),
                    broadening_sigma: rep.broadening.sigma("slope"),
                    options: opts,
                },
                &cfg,
            )?;
            if !not_converged.is_empty() {
                return Err(Error::Numerical {
                    message: format!("fits did not converge at {not_converged:?} bar"),
                });
            }
            Ok(())
        }

        Command::PolarizationScan {
            config,
            theta_step,
            noise,
            peak_counts,
            seed,
            out,
            report,
        } => {
            let cfg = config.load()?;
            if !(theta_step > 0.0 && theta_step <= 45.0) {
                return Err(usage("--theta-step must lie in (0, 45] degrees"));
            }
            let steps = (360.0 / theta_step).round() as usize;
            let theta = linear_grid(0.0, theta_step * steps as f64, steps + 1);
            let scan = polarization_scan(
                &theta,
                &cfg.polarization,
                noise.into(),
                peak_counts,
                seed.unwrap_or(cfg.seed),
            )?;
            if let Some(p) = &out {
                h2conv_core::io::write_csv_file(p, |w| write_polarization_csv(w, &scan))?;
                write_plot(
                    p,
                    "polarization",
                    "probe angle (deg)",
                    "rate",
                    &[(2, "linespoints"), (3, "linespoints")],
                )?;
            }
            let ch1 = fit_malus(&scan.theta_deg, &scan.rate_ch1)?;
            let ch2 = fit_malus(&scan.theta_deg, &scan.rate_ch2)?;
            #[derive(Serialize)]
            struct Out {
                fidelity: f64,
                fidelity_closed_form: f64,
                channel1: FitReport<()>,
                channel2: FitReport<()>,
                phase_difference_deg: f64,
            }
            emit_report(
                report.as_deref(),
                Out {
                    fidelity: fidelity(&cfg.polarization)?,
                    fidelity_closed_form: fidelity_closed_form(&cfg.polarization),
                    phase_difference_deg: ch2.value("phase") - ch1.value("phase"),
                    channel1: FitReport::new(&ch1, ()),
                    channel2: FitReport::new(&ch2, ()),
                },
                &cfg,
            )
        }

        Command::Toggle {
            config,
            cycles,
            seconds,
            extra_cps,
            seed,
            out,
            report,
        } => {
            let cfg = config.load()?;
            let res = simulate_toggle_experiment(
                &cfg.detection.detector(),
                extra_cps,
                cycles,
                seconds,
                seed.unwrap_or(cfg.seed),
            )?;
            if let Some(p) = &out {
                h2conv_core::io::write_csv_file(p, |w| write_toggle_csv(w, &res.records))?;
            }
            #[derive(Serialize)]
            struct Out<'a> {
                #[serde(flatten)]
                result: &'a h2conv_core::detection::ToggleResult,
                cycles: usize,
                seconds: f64,
                extra_cps: f64,
            }
            emit_report(
                report.as_deref(),
                Out {
                    result: &res,
                    cycles,
                    seconds,
                    extra_cps,
                },
                &cfg,
            )
        }

        Command::Optimize {
            config,
            param: OptimizeParam::Pressure,
            lo_bar,
            hi_bar,
            report,
        } => {
            let cfg = config.load()?;
            let conv = cfg.calibrated_conversion()?;
            if !(lo_bar >= 0.0 && hi_bar > lo_bar) {
                return Err(usage("need 0 ≤ --lo-bar < --hi-bar"));
            }
            let best = optimize_pressure(&conv, lo_bar, hi_bar)?;
            #[derive(Serialize)]
            struct Out {
                param: &'static str,
                optimum_pressure_bar: f64,
                eta: Option<f64>,
                eta_model: f64,
                tolerance_bar: f64,
            }
            let eta_model = relative_efficiency(&conv, Pressure::from_bar(best.x)?)?;
            emit_report(
                report.as_deref(),
                Out {
                    param: "pressure",
                    optimum_pressure_bar: best.x,
                    eta: conv.calibration.map(|c| c * eta_model),
                    eta_model,
                    tolerance_bar: h2conv_core::fwm::OPTIMIZE_TOL_BAR,
                },
                &cfg,
            )
        }
    }
}

#[derive(Serialize)]
struct FitInput<'a> {
    input: &'a Path,
    #[serde(flatten)]
    options: serde_json::Value,
}

fn run_fit(model: FitModel) -> Result<()> {
    let (fit, input, options, out) = match &model {
        FitModel::Lorentzian { input, out } => {
            let scan = read_scan_csv(input)?;
            (
                fit_lorentzian(&scan, None)?,
                input,
                serde_json::json!({}),
                out,
            )
        }
        FitModel::Line {
            input,
            x_column,
            y_column,
            sigma_column,
            out,
        } => {
            let mut wanted = vec![x_column.as_str(), y_column.as_str()];
            if let Some(s) = sigma_column {
                wanted.push(s);
            }
            let cols = read_columns_from_path(input, &wanted)?;
            let fit = fit_line(&cols[0], &cols[1], cols.get(2).map(Vec::as_slice))?;
            let opts = serde_json::json!({"x_column": x_column, "y_column": y_column, "sigma_column": sigma_column});
            (fit, input, opts, out)
        }
        FitModel::Malus {
            input,
            channel,
            out,
        } => {
            let scan = read_polarization_csv(input)?;
            let rates = if *channel == 1 {
                &scan.rate_ch1
            } else {
                &scan.rate_ch2
            };
            (
                fit_malus(&scan.theta_deg, rates)?,
                input,
                serde_json::json!({"channel": channel}),
                out,
            )
        }
    };
    let report = FitReport::new(&fit, FitInput { input, options });
    emit_json(out.as_deref(), &report)?;
    if !fit.converged {
        return Err(Error::Numerical {
            message: format!(
                "{} fit did not converge: {}",
                fit.model,
                fit.diagnostics.as_deref().unwrap_or("unknown")
            ),
        });
    }
    Ok(())
}
