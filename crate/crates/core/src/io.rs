//! CSV tables, JSON reports and gnuplot companion scripts.
//!
//! Numbers are written with `.` as decimal separator in shortest
//! round-trip form, so a write/read cycle is lossless. Non-finite values are
//! refused on both sides.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::detection::ToggleRecord;
use crate::error::{Error, Result};
use crate::fit::FitResult;
use crate::fwm::EfficiencyCurve;
use crate::polarization::PolarizationScan;
use crate::resonance::ScanData;

pub const SCAN_COLUMNS: [&str; 3] = ["detuning_MHz", "counts", "sigma"];
pub const CURVE_COLUMNS: [&str; 2] = ["pressure_bar", "eta"];
pub const POLARIZATION_COLUMNS: [&str; 3] = ["theta_deg", "rate_ch1", "rate_ch2"];
pub const TOGGLE_COLUMNS: [&str; 3] = ["cycle", "phase", "counts"];

/// Shortest round-trip decimal, switching to exponent form for very small or
/// very large magnitudes.
pub fn format_f64(v: f64) -> String {
    let a = v.abs();
    if a == 0.0 || (1e-4..1e15).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

fn check_finite(values: &[f64], what: &str) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(i) => Err(Error::domain(format!(
            "{what}: non-finite value at row {}",
            i + 1
        ))),
        None => Ok(()),
    }
}

/// Writes equally long columns under `headers`.
pub fn write_columns<W: Write>(out: W, headers: &[&str], columns: &[&[f64]]) -> Result<()> {
    if headers.len() != columns.len() {
        return Err(Error::domain("header and column counts differ"));
    }
    let n = columns.first().map_or(0, |c| c.len());
    if columns.iter().any(|c| c.len() != n) {
        return Err(Error::domain("columns differ in length"));
    }
    for (h, c) in headers.iter().zip(columns) {
        check_finite(c, h)?;
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(headers)?;
    for i in 0..n {
        w.write_record(columns.iter().map(|c| format_f64(c[i])))?;
    }
    w.flush().map_err(|e| Error::Csv(e.into()))?;
    Ok(())
}

/// Reads the named columns (other columns are ignored). `label` is used in
/// error messages.
pub fn read_columns<R: Read>(input: R, label: &Path, wanted: &[&str]) -> Result<Vec<Vec<f64>>> {
    let mut r = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(input);
    let headers = r.headers()?.clone();
    let idx = wanted
        .iter()
        .map(|name| {
            headers
                .iter()
                .position(|h| h == *name)
                .ok_or_else(|| Error::MissingColumn {
                    path: label.to_path_buf(),
                    column: (*name).to_string(),
                })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out = vec![Vec::new(); wanted.len()];
    for rec in r.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            Error::Parse {
                path: label.to_path_buf(),
                line,
                message: e.to_string(),
            }
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        for (k, &i) in idx.iter().enumerate() {
            let field = rec.get(i).unwrap_or("");
            let v: f64 = field.parse().map_err(|_| Error::Parse {
                path: label.to_path_buf(),
                line,
                message: format!("column `{}`: `{field}` is not a number", wanted[k]),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    path: label.to_path_buf(),
                    line,
                    message: format!("column `{}`: non-finite value", wanted[k]),
                });
            }
            out[k].push(v);
        }
    }
    Ok(out)
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
}

pub fn read_columns_from_path(path: &Path, wanted: &[&str]) -> Result<Vec<Vec<f64>>> {
    read_columns(open(path)?, path, wanted)
}

pub fn write_scan_csv<W: Write>(out: W, scan: &ScanData) -> Result<()> {
    write_columns(out, &SCAN_COLUMNS, &[&scan.x, &scan.y, &scan.sigma])
}

pub fn read_scan<R: Read>(input: R, label: &Path) -> Result<ScanData> {
    let mut cols = read_columns(input, label, &SCAN_COLUMNS)?;
    let sigma = cols.pop().expect("three columns");
    let y = cols.pop().expect("three columns");
    let x = cols.pop().expect("three columns");
    ScanData::new(x, y, sigma).map_err(|e| Error::Parse {
        path: label.to_path_buf(),
        line: 0,
        message: e.to_string(),
    })
}

pub fn read_scan_csv(path: &Path) -> Result<ScanData> {
    read_scan(open(path)?, path)
}

pub fn write_curve_csv<W: Write>(out: W, curve: &EfficiencyCurve) -> Result<()> {
    write_columns(out, &CURVE_COLUMNS, &[&curve.pressures, &curve.eta])
}

pub fn write_polarization_csv<W: Write>(out: W, scan: &PolarizationScan) -> Result<()> {
    write_columns(
        out,
        &POLARIZATION_COLUMNS,
        &[&scan.theta_deg, &scan.rate_ch1, &scan.rate_ch2],
    )
}

pub fn read_polarization_csv(path: &Path) -> Result<PolarizationScan> {
    let mut cols = read_columns_from_path(path, &POLARIZATION_COLUMNS)?;
    let rate_ch2 = cols.pop().expect("three columns");
    let rate_ch1 = cols.pop().expect("three columns");
    let theta_deg = cols.pop().expect("three columns");
    Ok(PolarizationScan {
        theta_deg,
        rate_ch1,
        rate_ch2,
    })
}

pub fn write_toggle_csv<W: Write>(out: W, records: &[ToggleRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TOGGLE_COLUMNS)?;
    for r in records {
        w.write_record([
            r.cycle.to_string(),
            r.phase.as_str().to_string(),
            format_f64(r.counts),
        ])?;
    }
    w.flush().map_err(|e| Error::Csv(e.into()))?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParamReport {
    pub value: f64,
    pub sigma: f64,
}

/// Fit result in report form, parameters keyed by name.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitReport<C: Serialize> {
    pub model: String,
    pub params: BTreeMap<String, ParamReport>,
    pub chi2_reduced: f64,
    pub converged: bool,
    pub n_iterations: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diagnostics: Option<String>,
    pub config: C,
    pub version: &'static str,
}

impl<C: Serialize> FitReport<C> {
    pub fn new(fit: &FitResult, config: C) -> Self {
        Self {
            model: fit.model.clone(),
            params: fit
                .params
                .iter()
                .map(|p| {
                    (
                        p.name.clone(),
                        ParamReport {
                            value: p.value,
                            sigma: p.sigma,
                        },
                    )
                })
                .collect(),
            chi2_reduced: fit.chi2_reduced,
            converged: fit.converged,
            n_iterations: fit.n_iterations,
            diagnostics: fit.diagnostics.clone(),
            config,
            version: crate::VERSION,
        }
    }
}

/// Pretty JSON with a trailing newline.
pub fn write_json<W: Write, T: Serialize>(mut out: W, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out).map_err(|e| Error::Json(serde_json::Error::io(e)))?;
    Ok(())
}

pub fn write_json_file<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut f = create(path)?;
    write_json(&mut f, value)?;
    f.flush().map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_csv_file(
    path: &Path,
    write: impl FnOnce(&mut BufWriter<File>) -> Result<()>,
) -> Result<()> {
    let mut f = create(path)?;
    write(&mut f)?;
    f.flush().map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Gnuplot script plotting `y_columns` of `csv_path` against its first column.
pub fn gnuplot_script(
    csv_path: &Path,
    title: &str,
    xlabel: &str,
    ylabel: &str,
    y_columns: &[(usize, &str)],
) -> String {
    let file = csv_path.file_name().map_or_else(
        || csv_path.display().to_string(),
        |f| f.to_string_lossy().into_owned(),
    );
    let mut s = String::new();
    s.push_str("set datafile separator ','\n");
    s.push_str("set key autotitle columnhead\n");
    s.push_str(&format!(
        "set title '{title}'\nset xlabel '{xlabel}'\nset ylabel '{ylabel}'\n"
    ));
    let plots: Vec<String> = y_columns
        .iter()
        .map(|(col, style)| format!("'{file}' using 1:{col} with {style}"))
        .collect();
    s.push_str(&format!("plot {}\n", plots.join(", \\\n     ")));
    s
}

/// Path of the companion script for a CSV file: `x.csv` → `x.gp`.
pub fn gnuplot_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("gp")
}
