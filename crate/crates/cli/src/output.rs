//! Number formatting and result records.

use std::fs;
use std::path::Path;

use serde::{Serialize, Serializer};

use crate::error::{CliError, CliResult};
use crate::state::LoadedState;

/// Twelve significant digits, `+inf`/`-inf` for infinities.
pub fn fmt12(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "+inf" } else { "-inf" }.into();
    }
    if v == 0.0 {
        return "0".into();
    }
    let sci = format!("{v:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..12).contains(&exp) {
        trim_zeros(format!("{:.*}", (11 - exp).max(0) as usize, v))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

/// `v` rounded to twelve significant digits.
pub fn round12(v: f64) -> f64 {
    if v.is_finite() {
        fmt12(v).parse().expect("formatted float")
    } else {
        v
    }
}

/// Extended real: a JSON number, or `"+inf"`/`"-inf"`; `null` for NaN.
#[derive(Clone, Copy, Debug)]
pub struct ExtReal(pub f64);

impl Serialize for ExtReal {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let v = self.0;
        if v.is_nan() {
            s.serialize_none()
        } else if v.is_infinite() {
            s.serialize_str(if v > 0.0 { "+inf" } else { "-inf" })
        } else {
            s.serialize_f64(round12(v))
        }
    }
}

#[derive(Debug, Serialize)]
pub struct InputDigest {
    pub role: String,
    pub name: String,
    pub path: String,
    pub sha256: String,
    pub hermitian_adjustment: ExtReal,
}

impl InputDigest {
    pub fn of(role: &str, s: &LoadedState) -> Self {
        InputDigest {
            role: role.to_string(),
            name: s.name.clone(),
            path: s.path.clone(),
            sha256: s.digest.clone(),
            hermitian_adjustment: ExtReal(s.adjustment),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct RunSummary {
    pub iterations: usize,
    pub gap: ExtReal,
    pub finite: bool,
    pub termination: String,
}

#[derive(Debug, Serialize)]
pub struct Tolerances {
    pub tol: ExtReal,
    pub max_iter: usize,
}

#[derive(Debug, Serialize)]
pub struct ResultRecord {
    pub command: String,
    pub generator: String,
    pub inputs: Vec<InputDigest>,
    pub value: ExtReal,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub divergence: Option<ExtReal>,
    pub witness_path: Option<String>,
    pub report: RunSummary,
    pub seed: u64,
    pub tolerances: Tolerances,
}

pub fn csv_writer(path: &Path) -> CliResult<csv::Writer<fs::File>> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn csv_error(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Input(format!("{}: {e}", path.display()))
}

pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> CliResult<()> {
    let mut w = csv_writer(path)?;
    w.write_record(header).map_err(|e| csv_error(path, e))?;
    for r in rows {
        w.write_record(r).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|source| CliError::Io { path: path.display().to_string(), source })
}

impl ResultRecord {
    /// Writes JSON or CSV depending on the extension of `path`.
    pub fn write(&self, path: &Path) -> CliResult<()> {
        match path.extension().and_then(|e| e.to_str()) {
            Some("json") => {
                let text = serde_json::to_string_pretty(self)
                    .map_err(|source| CliError::Json { path: path.display().to_string(), source })?;
                fs::write(path, text + "\n").map_err(|source| CliError::Io { path: path.display().to_string(), source })
            }
            Some("csv") => write_csv(path, &Self::CSV_HEADER, &[self.csv_row()]),
            _ => Err(CliError::Input(format!("{}: output must end in .json or .csv", path.display()))),
        }
    }

    const CSV_HEADER: [&'static str; 12] = [
        "command",
        "generator",
        "value",
        "divergence",
        "iterations",
        "gap",
        "finite",
        "termination",
        "seed",
        "tol",
        "max_iter",
        "inputs",
    ];

    fn csv_row(&self) -> Vec<String> {
        let inputs: Vec<String> = self.inputs.iter().map(|i| format!("{}={}", i.role, i.sha256)).collect();
        vec![
            self.command.clone(),
            self.generator.clone(),
            fmt12(self.value.0),
            self.divergence.map(|d| fmt12(d.0)).unwrap_or_default(),
            self.report.iterations.to_string(),
            fmt12(self.report.gap.0),
            self.report.finite.to_string(),
            self.report.termination.clone(),
            self.seed.to_string(),
            fmt12(self.tolerances.tol.0),
            self.tolerances.max_iter.to_string(),
            inputs.join(";"),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(fmt12(std::f64::consts::LN_2), "0.69314718056");
        assert_eq!(fmt12(1.0), "1");
        assert_eq!(fmt12(-2.5e-9), "-2.5e-9");
        assert_eq!(fmt12(123456789012345.0), "1.23456789012e14");
        assert_eq!(fmt12(9.999999999999), "10");
        assert_eq!(fmt12(-0.0), "0");
    }

    #[test]
    fn infinities_and_nan() {
        assert_eq!(fmt12(f64::INFINITY), "+inf");
        assert_eq!(fmt12(f64::NEG_INFINITY), "-inf");
        assert_eq!(serde_json::to_string(&ExtReal(f64::INFINITY)).unwrap(), "\"+inf\"");
        assert_eq!(serde_json::to_string(&ExtReal(f64::NAN)).unwrap(), "null");
        assert_eq!(serde_json::to_string(&ExtReal(0.1 + 0.2)).unwrap(), "0.3");
    }
}
