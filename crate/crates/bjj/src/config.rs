//! Flag / config-file / default resolution.

use std::path::PathBuf;

use bjj_core::ProtocolConfig;
use clap::Args;
use serde::Serialize;

use crate::error::CliError;
use crate::formats::{read_json, ConfigFile};

/// Junction and ramp settings shared by every subcommand.
#[derive(Args, Debug, Clone, Default)]
pub struct ProtocolArgs {
    /// Particle number N.
    #[arg(long)]
    pub n: Option<usize>,
    /// Charging energy E_C.
    #[arg(long, allow_hyphen_values = true)]
    pub ec: Option<f64>,
    /// Imbalance δ held while splitting and recombining.
    #[arg(long, allow_hyphen_values = true)]
    pub delta: Option<f64>,
    /// Strong-coupling endpoint of the ramps.
    #[arg(long = "t-max", allow_hyphen_values = true)]
    pub t_max: Option<f64>,
    /// Ramp duration.
    #[arg(long, allow_hyphen_values = true)]
    pub duration: Option<f64>,
    /// Imbalance switched on for detection [default: |E_C|/4].
    #[arg(long = "delta-detect", allow_hyphen_values = true)]
    pub delta_detect: Option<f64>,
    /// Coupling reached at the end of the detection ramp.
    #[arg(long = "final-coupling", allow_hyphen_values = true)]
    pub final_coupling: Option<f64>,
    /// Integrator time step.
    #[arg(long, allow_hyphen_values = true)]
    pub dt: Option<f64>,
    /// Trajectory sampling stride, in steps.
    #[arg(long = "sample-every")]
    pub sample_every: Option<usize>,
    /// Run even when t-max < 10·|E_C|.
    #[arg(long = "allow-weak-coupling")]
    pub allow_weak_coupling: bool,
    /// JSON file with default values; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

impl ProtocolArgs {
    pub fn load_file(&self) -> Result<ConfigFile, CliError> {
        match &self.config {
            Some(path) => read_json(path),
            None => Ok(ConfigFile::default()),
        }
    }

    /// Merges flags over `file` over the reference setup.
    pub fn resolve(&self, file: &ConfigFile) -> ProtocolConfig {
        let n = self
            .n
            .or(file.n_particles)
            .unwrap_or(ProtocolConfig::reference().n_particles);
        let ec = self
            .ec
            .or(file.charging)
            .unwrap_or(ProtocolConfig::reference().charging);
        let base = ProtocolConfig::with_junction(n, ec);
        ProtocolConfig {
            coupling_max: self
                .t_max
                .or(file.coupling_max)
                .unwrap_or(base.coupling_max),
            ramp_duration: self
                .duration
                .or(file.ramp_duration)
                .unwrap_or(base.ramp_duration),
            delta_split: self.delta.or(file.delta_split).unwrap_or(base.delta_split),
            delta_detect: self
                .delta_detect
                .or(file.delta_detect)
                .unwrap_or(base.delta_detect),
            detect_final_coupling: self
                .final_coupling
                .or(file.detect_final_coupling)
                .unwrap_or(base.detect_final_coupling),
            dt: self.dt.or(file.dt).unwrap_or(base.dt),
            sample_every: self
                .sample_every
                .or(file.sample_every)
                .unwrap_or(base.sample_every),
            allow_weak_coupling: self.allow_weak_coupling
                || file.allow_weak_coupling.unwrap_or(false),
            ..base
        }
    }
}

/// Fully resolved settings of one invocation, recorded at the top of every
/// output. Output paths are not part of it.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: &'static str,
    pub n_particles: usize,
    pub charging: f64,
    pub coupling_max: f64,
    pub ramp_duration: f64,
    pub delta_split: f64,
    pub delta_detect: f64,
    pub detect_final_coupling: f64,
    pub dt: f64,
    pub sample_every: usize,
    pub allow_weak_coupling: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub levels: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phi: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shots: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl RunConfig {
    pub fn new(command: &'static str, p: &ProtocolConfig) -> Self {
        RunConfig {
            command,
            n_particles: p.n_particles,
            charging: p.charging,
            coupling_max: p.coupling_max,
            ramp_duration: p.ramp_duration,
            delta_split: p.delta_split,
            delta_detect: p.delta_detect,
            detect_final_coupling: p.detect_final_coupling,
            dt: p.dt,
            sample_every: p.sample_every,
            allow_weak_coupling: p.allow_weak_coupling,
            grid: None,
            levels: None,
            phi: None,
            shots: None,
            seed: None,
        }
    }

    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("plain data serializes")
    }
}
