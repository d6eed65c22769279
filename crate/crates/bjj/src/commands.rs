//! Subcommand definitions and their runners.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use bjj_core::metrology::{noon_max_fidelity, phase_estimate, sample_distribution, visibility};
use bjj_core::protocol::{delta_scan_point, detect, full_mz_stages, split_trajectory};
use bjj_core::spectral::gap_scan_row;
use bjj_core::spin::jz_distribution;
use bjj_core::{JunctionParams, ProtocolConfig};
use clap::{Parser, Subcommand};
use serde::Serialize;

use crate::config::{ProtocolArgs, RunConfig};
use crate::error::CliError;
use crate::formats::{read_json, to_json, write_json, ConfigFile, RecordDump, StateDump};
use crate::grid::parse_grid;
use crate::sweep::par_map;
use crate::table::{Cell, Table};

pub const DEFAULT_T_GRID: &str = "0:40:81";
pub const DEFAULT_DELTA_GRID: &str = "-0.03:0.03:31";

#[derive(Parser, Debug)]
#[command(
    name = "bjj",
    version,
    about = "Adiabatic Mach-Zehnder interferometry on a Bose-Josephson junction"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Lowest levels and the ground gap across a coupling grid.
    Spectrum {
        #[command(flatten)]
        protocol: ProtocolArgs,
        /// Coupling grid `start:stop:count`.
        #[arg(long = "t-grid")]
        t_grid: Option<String>,
        /// Number of levels per row.
        #[arg(long)]
        levels: Option<usize>,
        /// CSV destination [default: stdout].
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// First beam splitter: trajectory diagnostics and the final state.
    Split {
        #[command(flatten)]
        protocol: ProtocolArgs,
        /// Trajectory CSV destination [default: stdout].
        #[arg(long)]
        out: Option<PathBuf>,
        /// Where to dump the split state.
        #[arg(long = "state-out")]
        state_out: Option<PathBuf>,
    },
    /// Interference fringe over a phase grid.
    Interfere {
        #[command(flatten)]
        protocol: ProtocolArgs,
        /// Phase grid `start:stop:count`.
        #[arg(long = "phi-grid", allow_hyphen_values = true)]
        phi_grid: Option<String>,
        /// Simulated shots per phase; adds sampled columns.
        #[arg(long)]
        shots: Option<u64>,
        /// Seed of the first phase point; point k uses seed + k.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Splitter NOON fidelity against the imbalance.
    DeltaScan {
        #[command(flatten)]
        protocol: ProtocolArgs,
        /// Imbalance grid `start:stop:count`.
        #[arg(long = "delta-grid", allow_hyphen_values = true)]
        delta_grid: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Detection ramp applied to a dumped state.
    Detect {
        #[command(flatten)]
        protocol: ProtocolArgs,
        /// State dump to detect.
        #[arg(long)]
        state: PathBuf,
        /// Simulated shots; adds a count column.
        #[arg(long)]
        shots: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
        /// Where to write the sampled counts.
        #[arg(long = "record-out")]
        record_out: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Split, imprint, recombine, detect and estimate the phase.
    Full {
        #[command(flatten)]
        protocol: ProtocolArgs,
        #[arg(long, allow_hyphen_values = true)]
        phi: f64,
        #[arg(long)]
        shots: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
        /// Directory receiving every intermediate state.
        #[arg(long = "dump-states")]
        dump_states: Option<PathBuf>,
        /// JSON report destination [default: stdout].
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Spectrum {
            protocol,
            t_grid,
            levels,
            out,
        } => spectrum(&protocol, t_grid, levels, out.as_deref()),
        Command::Split {
            protocol,
            out,
            state_out,
        } => split(&protocol, out.as_deref(), state_out.as_deref()),
        Command::Interfere {
            protocol,
            phi_grid,
            shots,
            seed,
            out,
        } => interfere(&protocol, phi_grid, shots, seed, out.as_deref()),
        Command::DeltaScan {
            protocol,
            delta_grid,
            out,
        } => delta_scan(&protocol, delta_grid, out.as_deref()),
        Command::Detect {
            protocol,
            state,
            shots,
            seed,
            record_out,
            out,
        } => detect_cmd(
            &protocol,
            &state,
            shots,
            seed,
            record_out.as_deref(),
            out.as_deref(),
        ),
        Command::Full {
            protocol,
            phi,
            shots,
            seed,
            dump_states,
            out,
        } => full(
            &protocol,
            phi,
            shots,
            seed,
            dump_states.as_deref(),
            out.as_deref(),
        ),
    }
}

/// Summary lines go to stdout when the data went to a file, else to stderr.
struct Summary {
    to_stdout: bool,
}

impl Summary {
    fn new(out: Option<&Path>) -> Self {
        Summary {
            to_stdout: out.is_some(),
        }
    }

    fn line(&self, text: String) {
        if self.to_stdout {
            println!("{text}");
        } else {
            eprintln!("{text}");
        }
    }
}

fn emit(
    out: Option<&Path>,
    write: impl FnOnce(&mut dyn Write) -> Result<(), CliError>,
) -> Result<(), CliError> {
    match out {
        Some(path) => {
            let file = File::create(path).map_err(|source| CliError::Write {
                path: path.to_path_buf(),
                source,
            })?;
            let mut writer = BufWriter::new(file);
            write(&mut writer)?;
            writer.flush().map_err(|source| CliError::Write {
                path: path.to_path_buf(),
                source,
            })
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            write(&mut lock)?;
            lock.flush()?;
            Ok(())
        }
    }
}

fn grid_or_default(
    flag: Option<String>,
    file: Option<&String>,
    default: Option<&str>,
) -> Result<String, CliError> {
    flag.or_else(|| file.cloned())
        .or_else(|| default.map(str::to_string))
        .ok_or_else(|| CliError::Invalid("a grid is required".into()))
}

fn protocol_config(args: &ProtocolArgs) -> Result<(ProtocolConfig, ConfigFile), CliError> {
    let file = args.load_file()?;
    let config = args.resolve(&file);
    config.validate()?;
    Ok((config, file))
}

fn spectrum(
    args: &ProtocolArgs,
    t_grid: Option<String>,
    levels: Option<usize>,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let file = args.load_file()?;
    let config = args.resolve(&file);
    let grid_text = grid_or_default(t_grid, file.t_grid.as_ref(), Some(DEFAULT_T_GRID))?;
    let grid = parse_grid(&grid_text)?;
    let levels = levels.or(file.levels).unwrap_or(2);
    let base = JunctionParams::new(
        config.basis()?,
        config.delta_split,
        config.coupling_max,
        config.charging,
    )?;
    let rows = par_map(&grid, |_, &t| gap_scan_row(&base, t, levels))?;

    let mut run = RunConfig::new("spectrum", &config);
    run.grid = Some(grid_text);
    run.levels = Some(levels);
    let mut header = vec!["T".to_string()];
    header.extend((0..levels).map(|k| format!("E{k}")));
    header.push("gap01".into());
    let mut table = Table::new(run.to_line(), header);
    for row in &rows {
        let mut cells = vec![Cell::from(row.coupling)];
        cells.extend(row.eigenvalues.iter().map(|&e| Cell::from(e)));
        cells.push(row.gap01.into());
        table.push(cells);
    }
    emit(out, |w| table.write_to(w))?;

    let (lo, hi) = rows
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| {
            (lo.min(r.gap01), hi.max(r.gap01))
        });
    Summary::new(out).line(format!("rows = {}, gap01 in [{lo:e}, {hi:e}]", rows.len()));
    Ok(())
}

fn split(
    args: &ProtocolArgs,
    out: Option<&Path>,
    state_out: Option<&Path>,
) -> Result<(), CliError> {
    let (config, _) = protocol_config(args)?;
    let trajectory = split_trajectory(&config)?;
    let header = ["t", "T", "delta", "norm", "F0", "F1", "F0plusF1", "mean_jz"];
    let mut table = Table::new(
        RunConfig::new("split", &config).to_line(),
        header.iter().map(|h| h.to_string()).collect(),
    );
    for s in &trajectory.samples {
        table.push(vec![
            s.time.into(),
            s.coupling.into(),
            s.delta.into(),
            s.norm.into(),
            s.f0.into(),
            s.f1.into(),
            s.subspace_population.into(),
            s.mean_jz.into(),
        ]);
    }
    emit(out, |w| table.write_to(w))?;
    if let Some(path) = state_out {
        write_json(path, &StateDump::from_state(&trajectory.final_state))?;
    }
    let fit = noon_max_fidelity(&trajectory.final_state);
    let summary = Summary::new(out);
    summary.line(format!("noon_max_fidelity = {:.6}", fit.fidelity));
    summary.line(format!(
        "noon_phase = {:.6}{}",
        fit.phase,
        if fit.phase_defined {
            ""
        } else {
            " (undefined)"
        }
    ));
    summary.line(format!(
        "min F0+F1 = {:.6}",
        trajectory.min_subspace_population()
    ));
    summary.line(format!(
        "max norm drift = {:e}",
        trajectory.max_norm_drift()
    ));
    Ok(())
}

fn interfere(
    args: &ProtocolArgs,
    phi_grid: Option<String>,
    shots: Option<u64>,
    seed: Option<u64>,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let (config, file) = protocol_config(args)?;
    let grid_text = grid_or_default(phi_grid, file.phi_grid.as_ref(), None)?;
    let grid = parse_grid(&grid_text)?;
    let shots = shots.or(file.shots);
    let seed = seed.or(file.seed).unwrap_or(0);
    if shots == Some(0) {
        return Err(bjj_core::Error::NoShots.into());
    }

    struct Point {
        phi: f64,
        f0: f64,
        f1: f64,
        leakage: f64,
        sampled: Option<(u64, u64, f64, f64)>,
    }
    let points = par_map(&grid, |k, &phi| -> Result<Point, CliError> {
        let stages = full_mz_stages(&config, phi)?;
        let sampled = match shots {
            Some(shots) => {
                let dist = detect(&stages.recombined, &config)?;
                let record = sample_distribution(&dist, shots, seed.wrapping_add(k as u64))?;
                let (low, high) = (record.count_lowest(), record.count_highest());
                let estimate = phase_estimate(low, shots, config.n_particles)?;
                Some((low, high, estimate.phi_hat, estimate.std_error))
            }
            None => None,
        };
        let r = stages.result;
        Ok(Point {
            phi,
            f0: r.f0,
            f1: r.f1,
            leakage: r.residual_leakage,
            sampled,
        })
    })?;

    let mut run = RunConfig::new("interfere", &config);
    run.grid = Some(grid_text);
    run.shots = shots;
    run.seed = shots.map(|_| seed);
    let mut header: Vec<String> = ["phi", "F0", "F1", "leakage"]
        .iter()
        .map(|h| h.to_string())
        .collect();
    if shots.is_some() {
        header.extend(
            ["count_low", "count_high", "phi_hat", "std_error"]
                .iter()
                .map(|h| h.to_string()),
        );
    }
    let mut table = Table::new(run.to_line(), header);
    for p in &points {
        let mut cells = vec![p.phi.into(), p.f0.into(), p.f1.into(), p.leakage.into()];
        if let Some((low, high, phi_hat, err)) = p.sampled {
            cells.extend([Cell::from(low), high.into(), phi_hat.into(), err.into()]);
        }
        table.push(cells);
    }
    emit(out, |w| table.write_to(w))?;

    let f0: Vec<f64> = points.iter().map(|p| p.f0).collect();
    let max_dev = points
        .iter()
        .map(|p| (p.f0 - (p.phi / 2.0).cos().powi(2)).abs())
        .fold(0.0, f64::max);
    let summary = Summary::new(out);
    summary.line(format!(
        "points = {}, visibility = {:.6}",
        points.len(),
        visibility(&f0)
    ));
    summary.line(format!("max |F0 - cos^2(phi/2)| = {max_dev:.6}"));
    Ok(())
}

fn delta_scan(
    args: &ProtocolArgs,
    delta_grid: Option<String>,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let (config, file) = protocol_config(args)?;
    let grid_text = grid_or_default(
        delta_grid,
        file.delta_grid.as_ref(),
        Some(DEFAULT_DELTA_GRID),
    )?;
    let grid = parse_grid(&grid_text)?;
    let rows = par_map(&grid, |_, &delta| delta_scan_point(&config, delta))?;

    let mut run = RunConfig::new("delta-scan", &config);
    run.grid = Some(grid_text);
    let header = ["delta", "fidelity", "phase", "phase_defined"];
    let mut table = Table::new(
        run.to_line(),
        header.iter().map(|h| h.to_string()).collect(),
    );
    for row in &rows {
        table.push(vec![
            row.delta.into(),
            row.fit.fidelity.into(),
            row.fit.phase.into(),
            row.fit.phase_defined.into(),
        ]);
    }
    emit(out, |w| table.write_to(w))?;

    let worst = rows
        .iter()
        .min_by(|a, b| a.fit.fidelity.total_cmp(&b.fit.fidelity))
        .expect("grid is never empty");
    Summary::new(out).line(format!(
        "rows = {}, min fidelity = {:.6} at delta = {}",
        rows.len(),
        worst.fit.fidelity,
        worst.delta
    ));
    Ok(())
}

fn detect_cmd(
    args: &ProtocolArgs,
    state_path: &Path,
    shots: Option<u64>,
    seed: Option<u64>,
    record_out: Option<&Path>,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let dump: StateDump = read_json(state_path)?;
    let state = dump.to_state()?;
    let file = args.load_file()?;
    let n_requested = args.n.or(file.n_particles);
    if n_requested.is_some_and(|n| n != dump.n_particles) {
        return Err(CliError::Invalid(format!(
            "--n {} does not match the dumped state (N = {})",
            n_requested.unwrap_or_default(),
            dump.n_particles
        )));
    }
    let resolved = ProtocolArgs {
        n: Some(dump.n_particles),
        ..args.clone()
    };
    let config = resolved.resolve(&file);
    config.validate()?;
    let shots = shots.or(file.shots);
    let seed = seed.or(file.seed).unwrap_or(0);
    if record_out.is_some() && shots.is_none() {
        return Err(CliError::Invalid("--record-out needs --shots".into()));
    }

    let dist = detect(&state, &config)?;
    let record = shots
        .map(|s| sample_distribution(&dist, s, seed))
        .transpose()?;

    let mut run = RunConfig::new("detect", &config);
    run.shots = shots;
    run.seed = shots.map(|_| seed);
    let mut header = vec!["M".to_string(), "p".to_string()];
    if record.is_some() {
        header.push("count".into());
    }
    let mut table = Table::new(run.to_line(), header);
    let basis = dist.basis;
    for (i, &p) in dist.probabilities.iter().enumerate() {
        let mut cells = vec![Cell::from(basis.m_f64(i)), p.into()];
        if let Some(record) = &record {
            cells.push(record.count(basis.m(i)).into());
        }
        table.push(cells);
    }
    emit(out, |w| table.write_to(w))?;
    if let (Some(path), Some(record)) = (record_out, &record) {
        write_json(path, &RecordDump::from_record(record))?;
    }

    let summary = Summary::new(out);
    let j = basis.j();
    summary.line(format!("p(M=-{j}) = {:.6}", dist.p_lowest()));
    summary.line(format!("p(M=+{j}) = {:.6}", dist.p_highest()));
    Ok(())
}

#[derive(Serialize)]
struct EstimateReport {
    phi_hat: f64,
    std_error: f64,
    per_particle_error: f64,
    boundary: bool,
}

#[derive(Serialize)]
struct FullReport {
    config: RunConfig,
    phi: f64,
    f0: f64,
    f1: f64,
    leakage: f64,
    p_lowest: f64,
    p_highest: f64,
    record: RecordDump,
    estimate: EstimateReport,
}

fn full(
    args: &ProtocolArgs,
    phi: f64,
    shots: Option<u64>,
    seed: Option<u64>,
    dump_states: Option<&Path>,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let (config, file) = protocol_config(args)?;
    if !phi.is_finite() {
        return Err(bjj_core::Error::NonFinite("phi").into());
    }
    let shots = shots.or(file.shots).unwrap_or(1000);
    let seed = seed.or(file.seed).unwrap_or(0);
    if shots == 0 {
        return Err(bjj_core::Error::NoShots.into());
    }

    let stages = full_mz_stages(&config, phi)?;
    let detected = bjj_core::protocol::detect_state(&stages.recombined, &config)?;
    let dist = jz_distribution(&detected);
    let record = sample_distribution(&dist, shots, seed)?;
    let estimate = phase_estimate(record.count_lowest(), shots, config.n_particles)?;

    if let Some(dir) = dump_states {
        fs::create_dir_all(dir).map_err(|source| CliError::Write {
            path: dir.to_path_buf(),
            source,
        })?;
        for (name, state) in [
            ("split", &stages.split),
            ("imprinted", &stages.imprinted),
            ("recombined", &stages.recombined),
            ("detected", &detected),
        ] {
            write_json(
                &dir.join(format!("{name}.json")),
                &StateDump::from_state(state),
            )?;
        }
    }

    let mut run = RunConfig::new("full", &config);
    run.phi = Some(phi);
    run.shots = Some(shots);
    run.seed = Some(seed);
    let r = stages.result;
    let report = FullReport {
        config: run,
        phi,
        f0: r.f0,
        f1: r.f1,
        leakage: r.residual_leakage,
        p_lowest: dist.p_lowest(),
        p_highest: dist.p_highest(),
        record: RecordDump::from_record(&record),
        estimate: EstimateReport {
            phi_hat: estimate.phi_hat,
            std_error: estimate.std_error,
            per_particle_error: estimate.per_particle_error,
            boundary: estimate.boundary,
        },
    };
    let text = to_json(&report);
    emit(out, |w| Ok(w.write_all(text.as_bytes())?))?;
    Summary::new(out).line(format!(
        "f0 = {:.6}, f1 = {:.6}, phi_hat = {:.6} +/- {:.6}",
        r.f0, r.f1, estimate.phi_hat, estimate.std_error
    ));
    Ok(())
}
