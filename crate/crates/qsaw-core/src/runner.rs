//! Configuration-driven execution and file output.
//!
//! Every output file starts with a text header: free-form `# ` metadata
//! lines, the full configuration echoed on `#cfg key = value` lines, and a
//! terminating `#end-header` line. Time series are comma-separated text;
//! phase-space grids append a row-major (θ-major) block of little-endian
//! 64-bit floats directly after the header. Headers reparse into the exact
//! configuration that produced the file, and identical configurations
//! produce byte-identical files.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::classical::{classical_density, ClassicalDensityConfig};
use crate::config::{format_f64, parse_config, EngineChoice, ExperimentConfig, ObservableChoice};
use crate::engines::{run_exact, run_trajectories, HusimiPlan, RunPlan, RunRecord};
use crate::error::{Error, Result};
use crate::observables::{
    fit_decay_rate, quantum_cell_widths, PhaseSpaceDistribution, DEFAULT_FIT_WINDOW,
};
use crate::state::{basis_state, DensityMatrix};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "QSAW_OUT_DIR";

const VERSION: &str = env!("CARGO_PKG_VERSION");
const END_HEADER: &str = "#end-header";

/// Result of executing one configuration.
pub enum Execution {
    Quantum(RunRecord),
    Classical(PhaseSpaceDistribution),
}

/// Files written plus a one-line summary.
pub struct RunOutputs {
    pub files: Vec<PathBuf>,
    pub summary: String,
}

/// Output directory resolution: config key, else `QSAW_OUT_DIR`, else `.`.
pub fn resolve_out_dir(cfg: &ExperimentConfig) -> PathBuf {
    cfg.out_dir
        .clone()
        .or_else(|| std::env::var(OUT_DIR_ENV).ok())
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("."))
}

/// Runs the configured engine and returns its record or grid.
pub fn execute_config(cfg: &ExperimentConfig) -> Result<Execution> {
    match cfg.threads {
        Some(threads) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
            pool.install(|| execute_inner(cfg))
        }
        None => execute_inner(cfg),
    }
}

fn execute_inner(cfg: &ExperimentConfig) -> Result<Execution> {
    match cfg.engine {
        EngineChoice::Classical => execute_classical(cfg).map(Execution::Classical),
        EngineChoice::Exact | EngineChoice::Trajectories => {
            execute_quantum(cfg).map(Execution::Quantum)
        }
    }
}

fn husimi_plan(cfg: &ExperimentConfig, dim: usize) -> Option<HusimiPlan> {
    if !cfg.observables.contains(&ObservableChoice::Husimi) {
        return None;
    }
    let windows = if cfg.husimi_windows.is_empty() {
        vec![(cfg.t_max, cfg.t_max)]
    } else {
        cfg.husimi_windows.clone()
    };
    Some(HusimiPlan {
        n_theta: cfg.grid_n_theta.unwrap_or(2 * dim),
        n_n: cfg.grid_n_n.unwrap_or(dim),
        windows,
    })
}

fn execute_quantum(cfg: &ExperimentConfig) -> Result<RunRecord> {
    let params = cfg.map_params()?;
    let psi0 = basis_state(&params, cfg.initial.resolve(params.dim()))?;
    let model = crate::noise::NoiseModel::new(cfg.gamma)?;
    let plan = RunPlan {
        fidelity_reference: Some(psi0.clone()),
        husimi: husimi_plan(cfg, params.dim()),
        exact_dim_cap: cfg.exact_cap,
    };
    match cfg.engine {
        EngineChoice::Exact => {
            let rho0 = DensityMatrix::from_pure(&psi0);
            run_exact(&params, &model, &rho0, cfg.t_max, &plan)
        }
        EngineChoice::Trajectories => {
            let count = cfg.trajectories.unwrap_or(1);
            run_trajectories(&params, &model, &psi0, cfg.t_max, count, cfg.seed, &plan)
        }
        EngineChoice::Classical => unreachable!(),
    }
}

fn execute_classical(cfg: &ExperimentConfig) -> Result<PhaseSpaceDistribution> {
    let dim = 1usize
        .checked_shl(cfg.qubits as u32)
        .ok_or_else(|| Error::Config("n_q too large".into()))?;
    let planck = 2.0 * std::f64::consts::PI * cfg.cells as f64 / dim as f64;
    let (sigma_theta, sigma_n) = quantum_cell_widths(planck);
    let n0 = cfg.initial.resolve(dim);
    classical_density(&ClassicalDensityConfig {
        chaos: cfg.chaos,
        cells: cfg.cells,
        dim,
        p0: planck * n0 as f64,
        n_pts: cfg.classical_points.unwrap_or(100_000),
        window: cfg.classical_window.unwrap_or((0, cfg.t_max)),
        sigma_theta,
        sigma_n,
        n_theta: cfg.grid_n_theta.unwrap_or(2 * dim),
        n_n: cfg.grid_n_n.unwrap_or(dim),
    })
}

/// Executes and writes all requested output files.
pub fn run_config(cfg: &ExperimentConfig) -> Result<RunOutputs> {
    let execution = execute_config(cfg)?;
    let out_dir = resolve_out_dir(cfg);
    let files = write_outputs(cfg, &execution, &out_dir)?;
    Ok(RunOutputs { summary: summarize(cfg, &execution), files })
}

/// One-line run summary: final fidelity, final IPR and the fitted decay
/// rate when enough of the series sits above the fit floor.
pub fn summarize(cfg: &ExperimentConfig, execution: &Execution) -> String {
    match execution {
        Execution::Quantum(record) => {
            let mut line = format!(
                "{}: engine={} t_max={}",
                cfg.name,
                record.engine.label(),
                record.t_max
            );
            if let Some(f) = record.fidelity.as_ref().and_then(|s| s.values().last()) {
                line.push_str(&format!(" final_f={f:.6}"));
            }
            if let Some(xi) = record.ipr.last() {
                line.push_str(&format!(" final_xi={xi:.4}"));
            }
            if let Some(series) = &record.fidelity {
                if let Ok(fit) = fit_decay_rate(series, DEFAULT_FIT_WINDOW) {
                    line.push_str(&format!(
                        " gamma_fit={:.6} stderr={:.6}",
                        fit.rate, fit.stderr
                    ));
                }
            }
            line
        }
        Execution::Classical(dist) => {
            let (nt, nn) = dist.dims();
            format!(
                "{}: engine=classical grid={nt}x{nn} mean_abs_n={:.4}",
                cfg.name,
                dist.mean_abs_momentum()
            )
        }
    }
}

/// Writes the files selected by the configuration's observables.
pub fn write_outputs(
    cfg: &ExperimentConfig,
    execution: &Execution,
    out_dir: &Path,
) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out_dir)?;
    let mut files = Vec::new();
    match execution {
        Execution::Quantum(record) => {
            if cfg.observables.contains(&ObservableChoice::Series) {
                let path = out_dir.join(format!("{}.series.csv", cfg.name));
                write_series(&path, cfg, record)?;
                files.push(path);
            }
            if cfg.observables.contains(&ObservableChoice::Momentum) {
                let path = out_dir.join(format!("{}.wn.csv", cfg.name));
                write_momentum(&path, cfg, record)?;
                files.push(path);
            }
            for win in &record.husimi {
                let path = out_dir
                    .join(format!("{}.husimi-{}-{}.psd", cfg.name, win.window.0, win.window.1));
                write_phase_space(&path, cfg, &win.dist, Some(win.window))?;
                files.push(path);
            }
        }
        Execution::Classical(dist) => {
            let path = out_dir.join(format!("{}.classical.psd", cfg.name));
            write_phase_space(&path, cfg, dist, cfg.classical_window)?;
            files.push(path);
        }
    }
    Ok(files)
}

fn header(kind: &str, cfg: &ExperimentConfig, extra: &[(String, String)]) -> String {
    let mut out = format!("# qsaw {kind}\n# version = {VERSION}\n");
    for (k, v) in extra {
        out.push_str(&format!("# {k} = {v}\n"));
    }
    for line in cfg.serialize().lines() {
        out.push_str("#cfg ");
        out.push_str(line);
        out.push('\n');
    }
    out.push_str(END_HEADER);
    out.push('\n');
    out
}

fn write_series(path: &Path, cfg: &ExperimentConfig, record: &RunRecord) -> Result<()> {
    let mut out = header(
        "timeseries",
        cfg,
        &[("columns".into(), "t,fidelity,ipr".into())],
    );
    for t in 0..record.snapshots() {
        let f = record
            .fidelity
            .as_ref()
            .and_then(|s| s.get(t))
            .map_or_else(|| "nan".into(), format_f64);
        out.push_str(&format!("{t},{f},{}\n", format_f64(record.ipr[t])));
    }
    fs::write(path, out)?;
    Ok(())
}

fn write_momentum(path: &Path, cfg: &ExperimentConfig, record: &RunRecord) -> Result<()> {
    let mut out = header("momentum", cfg, &[("columns".into(), "t,n,w".into())]);
    for (t, dist) in record.momentum.iter().enumerate() {
        for (i, w) in dist.weights().iter().enumerate() {
            out.push_str(&format!("{t},{},{}\n", dist.momentum_at(i), format_f64(*w)));
        }
    }
    fs::write(path, out)?;
    Ok(())
}

fn write_phase_space(
    path: &Path,
    cfg: &ExperimentConfig,
    dist: &PhaseSpaceDistribution,
    window: Option<(usize, usize)>,
) -> Result<()> {
    let (n_theta, n_n) = dist.dims();
    let (sigma_theta, sigma_n) = dist.sigma();
    let mut extra = vec![
        ("layout".to_string(), "theta-major little-endian f64".to_string()),
        ("n_theta".to_string(), n_theta.to_string()),
        ("n_n".to_string(), n_n.to_string()),
        ("theta_step".to_string(), format_f64(2.0 * std::f64::consts::PI / n_theta as f64)),
        ("n_min".to_string(), format_f64(dist.momentum_at(0))),
        ("n_step".to_string(), format_f64(dist.momentum_at(1) - dist.momentum_at(0))),
        ("sigma_theta".to_string(), format_f64(sigma_theta)),
        ("sigma_n".to_string(), format_f64(sigma_n)),
        ("norm_const".to_string(), format_f64(dist.norm_const())),
    ];
    if let Some((a, b)) = window {
        extra.push(("window".to_string(), format!("{a}:{b}")));
    }
    let mut file = fs::File::create(path)?;
    file.write_all(header("phase-space", cfg, &extra).as_bytes())?;
    let mut bytes = Vec::with_capacity(dist.values().len() * 8);
    for v in dist.values() {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    file.write_all(&bytes)?;
    Ok(())
}

/// Splits a written file into its header lines and trailing payload.
fn split_header(bytes: &[u8]) -> Result<(Vec<String>, &[u8])> {
    let marker = format!("{END_HEADER}\n");
    let pos = bytes
        .windows(marker.len())
        .position(|w| w == marker.as_bytes())
        .ok_or_else(|| Error::Config("missing #end-header marker".into()))?;
    let head = std::str::from_utf8(&bytes[..pos])
        .map_err(|_| Error::Config("header is not UTF-8".into()))?;
    Ok((head.lines().map(str::to_string).collect(), &bytes[pos + marker.len()..]))
}

/// Reparses the `#cfg` header block of any output file.
pub fn read_config_echo(path: &Path) -> Result<ExperimentConfig> {
    let bytes = fs::read(path)?;
    let (lines, _) = split_header(&bytes)?;
    let mut text = String::new();
    for line in &lines {
        if let Some(rest) = line.strip_prefix("#cfg ") {
            text.push_str(rest);
            text.push('\n');
        }
    }
    parse_config(&text)
}

/// Reads back a phase-space file: configuration echo plus the grid.
pub fn read_phase_space(path: &Path) -> Result<(ExperimentConfig, PhaseSpaceDistribution)> {
    let bytes = fs::read(path)?;
    let (lines, payload) = split_header(&bytes)?;
    let meta = |key: &str| -> Result<f64> {
        lines
            .iter()
            .find_map(|l| l.strip_prefix(&format!("# {key} = ")))
            .ok_or_else(|| Error::Config(format!("missing header field {key}")))?
            .parse::<f64>()
            .map_err(|_| Error::Config(format!("bad header field {key}")))
    };
    let n_theta = meta("n_theta")? as usize;
    let n_n = meta("n_n")? as usize;
    if payload.len() != n_theta * n_n * 8 {
        return Err(Error::Config(format!(
            "payload holds {} bytes, expected {}",
            payload.len(),
            n_theta * n_n * 8
        )));
    }
    let values: Vec<f64> = payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    let dist = PhaseSpaceDistribution::from_saved(
        n_theta,
        n_n,
        values,
        meta("n_min")?,
        meta("n_step")?,
        meta("sigma_theta")?,
        meta("sigma_n")?,
        meta("norm_const")?,
    );
    let mut text = String::new();
    for line in &lines {
        if let Some(rest) = line.strip_prefix("#cfg ") {
            text.push_str(rest);
            text.push('\n');
        }
    }
    Ok((parse_config(&text)?, dist))
}

/// Executes a whole preset: every run, then any aggregate table.
pub fn run_preset(
    name: &str,
    out_dir: Option<&Path>,
    seed: Option<u64>,
    threads: Option<usize>,
) -> Result<RunOutputs> {
    let preset = crate::presets::find(name)
        .ok_or_else(|| Error::Config(format!("unknown preset \"{name}\"")))?;
    let mut files = Vec::new();
    let mut summary = String::new();
    let mut executed: Vec<(ExperimentConfig, Execution)> = Vec::new();
    for mut cfg in preset.runs {
        if let Some(dir) = out_dir {
            cfg.out_dir = Some(dir.to_string_lossy().into_owned());
        }
        if let Some(s) = seed {
            cfg.seed = s;
        }
        if let Some(t) = threads {
            cfg.threads = Some(t);
        }
        let execution = execute_config(&cfg)?;
        let dir = resolve_out_dir(&cfg);
        files.extend(write_outputs(&cfg, &execution, &dir)?);
        if !summary.is_empty() {
            summary.push('\n');
        }
        summary.push_str(&summarize(&cfg, &execution));
        executed.push((cfg, execution));
    }
    if let Some(extra) = write_post_table(&preset.post, name, &executed)? {
        files.push(extra);
    }
    Ok(RunOutputs { files, summary })
}

fn write_post_table(
    post: &crate::presets::PresetPost,
    preset_name: &str,
    executed: &[(ExperimentConfig, Execution)],
) -> Result<Option<PathBuf>> {
    use crate::presets::PresetPost;
    match post {
        PresetPost::None => Ok(None),
        PresetPost::DecayTable { window } => {
            let dir = executed
                .first()
                .map(|(cfg, _)| resolve_out_dir(cfg))
                .unwrap_or_else(|| PathBuf::from("."));
            let path = dir.join(format!("{preset_name}.decay.csv"));
            let mut out = String::from("# qsaw decay-table\n");
            out.push_str(&format!("# version = {VERSION}\n"));
            out.push_str("# columns = n_q,K,gamma,gamma_eff,rate,stderr\n");
            out.push_str(END_HEADER);
            out.push('\n');
            for (cfg, execution) in executed {
                let Execution::Quantum(record) = execution else { continue };
                let Some(series) = &record.fidelity else { continue };
                let fit = fit_decay_rate(series, *window)?;
                let gamma_eff = cfg.qubits as f64
                    * record.params.gates_per_iteration() as f64
                    * cfg.gamma;
                out.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    cfg.qubits,
                    format_f64(cfg.chaos),
                    format_f64(cfg.gamma),
                    format_f64(gamma_eff),
                    format_f64(fit.rate),
                    format_f64(fit.stderr)
                ));
            }
            fs::write(&path, out)?;
            Ok(Some(path))
        }
        PresetPost::IprRatioTable { window } => {
            let dir = executed
                .first()
                .map(|(cfg, _)| resolve_out_dir(cfg))
                .unwrap_or_else(|| PathBuf::from("."));
            let path = dir.join(format!("{preset_name}.ipr-ratio.csv"));
            let mut out = String::from("# qsaw ipr-ratio-table\n");
            out.push_str(&format!("# version = {VERSION}\n"));
            out.push_str("# columns = n_q,gamma,xi,xi_ideal,ratio\n");
            out.push_str(END_HEADER);
            out.push('\n');
            for (cfg, execution) in executed {
                let Execution::Quantum(record) = execution else { continue };
                if cfg.gamma == 0.0 {
                    continue;
                }
                let ideal = executed
                    .iter()
                    .find_map(|(c, e)| match e {
                        Execution::Quantum(r)
                            if c.gamma == 0.0 && c.qubits == cfg.qubits =>
                        {
                            Some(r)
                        }
                        _ => None,
                    })
                    .ok_or_else(|| {
                        Error::Config(format!("no ideal baseline for n_q={}", cfg.qubits))
                    })?;
                let ratio = crate::observables::ipr_ratio(record, ideal, *window)?;
                let avg = |xs: &[f64]| {
                    xs[window.0..=window.1].iter().sum::<f64>()
                        / (window.1 - window.0 + 1) as f64
                };
                out.push_str(&format!(
                    "{},{},{},{},{}\n",
                    cfg.qubits,
                    format_f64(cfg.gamma),
                    format_f64(avg(&record.ipr)),
                    format_f64(avg(&ideal.ipr)),
                    format_f64(ratio)
                ));
            }
            fs::write(&path, out)?;
            Ok(Some(path))
        }
    }
}
