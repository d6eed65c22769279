//! JSON file formats: state dumps, measurement sidecars and config files.
//!
//! All three share one serialization surface. Floats are written with the
//! shortest representation that parses back to the same bits.

use std::fs;
use std::path::Path;

use bjj_core::{HalfInt, MeasurementRecord, SpinBasis, StateVector, C64};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Squared-norm tolerance accepted when loading a dump.
pub const DUMP_NORM_TOLERANCE: f64 = 1e-9;

/// `{"n_particles": N, "amplitudes": [[re, im], ...]}`, `M` ascending.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateDump {
    pub n_particles: usize,
    pub amplitudes: Vec<[f64; 2]>,
}

impl StateDump {
    pub fn from_state(state: &StateVector) -> Self {
        StateDump {
            n_particles: state.basis().n_particles(),
            amplitudes: state.amplitudes().iter().map(|c| [c.re, c.im]).collect(),
        }
    }

    /// Rebuilds the state as written, without renormalizing.
    pub fn to_state(&self) -> Result<StateVector, CliError> {
        let basis = SpinBasis::new(self.n_particles)?;
        let amplitudes: Vec<C64> = self
            .amplitudes
            .iter()
            .map(|[re, im]| C64::new(*re, *im))
            .collect();
        if amplitudes
            .iter()
            .any(|c| !(c.re.is_finite() && c.im.is_finite()))
        {
            return Err(CliError::Invalid(
                "state dump has non-finite amplitudes".into(),
            ));
        }
        let state = StateVector::from_amplitudes_unchecked(basis, amplitudes)?;
        let norm_sqr = state.norm_sqr();
        if (norm_sqr - 1.0).abs() > DUMP_NORM_TOLERANCE {
            return Err(CliError::Invalid(format!(
                "state dump is not normalized (squared norm {norm_sqr})"
            )));
        }
        Ok(state)
    }
}

/// `{"shots": S, "seed": s, "counts": [[M, count], ...]}`, `M` ascending.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecordDump {
    pub shots: u64,
    pub seed: u64,
    pub counts: Vec<(f64, u64)>,
}

impl RecordDump {
    pub fn from_record(record: &MeasurementRecord) -> Self {
        RecordDump {
            shots: record.shots,
            seed: record.seed,
            counts: record
                .counts
                .iter()
                .map(|(m, c)| (m.to_f64(), *c))
                .collect(),
        }
    }

    pub fn to_record(&self, basis: SpinBasis) -> Result<MeasurementRecord, CliError> {
        let mut counts = std::collections::BTreeMap::new();
        for &(m, c) in &self.counts {
            let m = HalfInt::from_f64(m)
                .ok_or_else(|| CliError::Invalid(format!("{m} is not a half-integer")))?;
            basis.index_of(m)?;
            counts.insert(m, c);
        }
        let total: u64 = counts.values().sum();
        if total != self.shots {
            return Err(CliError::Invalid(format!(
                "counts add up to {total}, not {} shots",
                self.shots
            )));
        }
        Ok(MeasurementRecord {
            basis,
            shots: self.shots,
            seed: self.seed,
            counts,
        })
    }
}

/// Optional settings read from `--config`. Keys mirror the protocol fields;
/// anything left out falls back to the built-in defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub n_particles: Option<usize>,
    pub charging: Option<f64>,
    pub coupling_max: Option<f64>,
    pub ramp_duration: Option<f64>,
    pub delta_split: Option<f64>,
    pub delta_detect: Option<f64>,
    pub detect_final_coupling: Option<f64>,
    pub dt: Option<f64>,
    pub sample_every: Option<usize>,
    pub allow_weak_coupling: Option<bool>,
    pub seed: Option<u64>,
    pub shots: Option<u64>,
    pub levels: Option<usize>,
    pub t_grid: Option<String>,
    pub phi_grid: Option<String>,
    pub delta_grid: Option<String>,
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("plain data serializes");
    text.push('\n');
    text
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    fs::write(path, to_json(value)).map_err(|source| CliError::Write {
        path: path.to_path_buf(),
        source,
    })
}
