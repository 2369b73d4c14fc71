//! File formats: observation JSON and the CSV tables.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signals::SignalWindow;

use super::table1::Table1Record;
use super::table2::Table2Row;

/// `{"N": int, "y": [reals]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    #[serde(rename = "N")]
    pub n: usize,
    pub y: SignalWindow,
}

impl Observation {
    pub fn new(y: Vec<f64>) -> Result<Self> {
        Ok(Self { n: y.len(), y: SignalWindow::new(y)? })
    }

    pub fn validate(&self) -> Result<()> {
        if self.y.len() != self.n {
            return Err(Error::LengthMismatch { expected: self.n, actual: self.y.len() });
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let obs: Self = serde_json::from_str(text)?;
        obs.validate()?;
        Ok(obs)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

/// `rho,p_basic,p_energy` with shortest round-trip floats and LF endings.
pub fn table2_csv(rows: &[Table2Row]) -> String {
    let mut out = String::from("rho,p_basic,p_energy\n");
    for r in rows {
        writeln!(out, "{},{},{}", r.rho, r.p_basic, r.p_energy).expect("write to string");
    }
    out
}

/// `experiment,resolution,snr`.
pub fn table1_csv(records: &[Table1Record]) -> String {
    let mut out = String::from("experiment,resolution,snr\n");
    for r in records {
        writeln!(out, "{},{},{}", r.experiment, r.resolution, r.snr).expect("write to string");
    }
    out
}
