//! `otoc` — config-driven OTOC runs, sweeps, ensembles and validation.
//!
//! Exit codes: 0 success, 1 numerical or I/O failure, 2 invalid input,
//! 3 validation tolerance exceeded.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use otoc_core::config::RunConfig;
use otoc_core::dynamics::{fmt17, otoc_series, spectral_decompose};
use otoc_core::ensemble::{ensemble_average, Stat};
use otoc_core::sweep::{detect_transition, resolve_threshold, sweep, SweepResult};
use otoc_core::validate::{validate, ChainMode, Corruption};
use otoc_core::{io as dense, plot, Error};

#[derive(Parser)]
#[command(name = "otoc", version, about = "OTOC dynamics of tight-binding lattice models")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Io {
    /// JSON configuration.
    config: PathBuf,
    /// Output file; metadata goes to `<output>.json`.
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args)]
struct Pool {
    /// Worker threads (overrides OTOC_WORKERS).
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Single O(t) series.
    Otoc {
        #[command(flatten)]
        io: Io,
        /// Also write Re s and Im s.
        #[arg(long)]
        amplitudes: bool,
    },
    /// Sweep over the configured axes.
    Sweep {
        #[command(flatten)]
        io: Io,
        #[command(flatten)]
        pool: Pool,
        /// Write an SVG plus a gnuplot script and data file next to the CSV.
        #[arg(long)]
        emit_plot: bool,
    },
    /// Two-axis sweep.
    PhaseDiagram {
        #[command(flatten)]
        io: Io,
        #[command(flatten)]
        pool: Pool,
        #[arg(long)]
        emit_plot: bool,
    },
    /// Disorder ensemble.
    Ensemble {
        #[command(flatten)]
        io: Io,
        #[command(flatten)]
        pool: Pool,
        /// Overrides `disorder.n_configs`.
        #[arg(long)]
        n_configs: Option<usize>,
        /// Overrides `disorder.seed`.
        #[arg(long)]
        seed0: Option<u64>,
    },
    /// Closed form versus numerics for the NN SSH chain.
    Validate {
        #[command(flatten)]
        io: Io,
        #[arg(long, default_value_t = 1e-6)]
        tolerance: f64,
        #[arg(long, value_enum, default_value_t = Mode::Extended)]
        mode: Mode,
        /// Perturb H[i][j] and H[j][i] by delta before comparing (`i:j:delta`).
        #[arg(long, hide = true, value_parser = parse_corrupt)]
        corrupt: Option<Corruption>,
    },
    /// Write the dense Hamiltonian.
    ModelDump {
        #[command(flatten)]
        io: Io,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Extended,
    Plain,
}

fn parse_corrupt(s: &str) -> Result<Corruption, String> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err("expected i:j:delta".into());
    }
    Ok(Corruption {
        i: parts[0].parse().map_err(|e| format!("{e}"))?,
        j: parts[1].parse().map_err(|e| format!("{e}"))?,
        delta: parts[2].parse().map_err(|e| format!("{e}"))?,
    })
}

enum Failure {
    Core(Error),
    Io(String),
    Tolerance(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn load(path: &Path) -> Result<RunConfig, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Core(Error::param("config", format!("{}: {e}", path.display()))))?;
    Ok(RunConfig::from_json_str(&text)?)
}

fn workers(flag: Option<usize>) -> Result<Option<usize>, Failure> {
    if flag.is_some() {
        return Ok(flag);
    }
    match std::env::var("OTOC_WORKERS") {
        Ok(s) if !s.trim().is_empty() => s
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| Failure::Core(Error::param("OTOC_WORKERS", format!("not a count: {s:?}")))),
        _ => Ok(None),
    }
}

fn sidecar(output: &Path) -> PathBuf {
    let mut s = output.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

fn with_ext(output: &Path, ext: &str) -> PathBuf {
    output.with_extension(ext)
}

fn write_json(path: &Path, v: &Value) -> Outcome {
    let mut f = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut f, v).map_err(|e| Failure::Io(e.to_string()))?;
    writeln!(f)?;
    Ok(())
}

fn meta(cfg: &RunConfig) -> Result<Value, Failure> {
    Ok(json!({
        "fingerprint": cfg.fingerprint()?,
        "config": cfg.normalized()?,
    }))
}

fn cmd_otoc(io: &Io, amplitudes: bool) -> Outcome {
    let cfg = load(&io.config)?;
    let p = cfg.pipeline()?;
    let h = p.build_hamiltonian(None)?;
    let prop = spectral_decompose(&h)?;
    let w = p.operator(&h)?;
    let psi = p.state(&h, &prop)?;
    let mut series = otoc_series(&prop, &w, &psi, &p.time_grid)?;
    series.fingerprint = Some(cfg.fingerprint()?);
    let point = otoc_core::config::reduce(series.clone(), &p.observable)?;

    series.write_csv(BufWriter::new(File::create(&io.output)?), amplitudes)?;
    let mut m = meta(&cfg)?;
    m["propagator"] = json!(prop.kind);
    m["condition_estimate"] = json!(prop.condition_estimate);
    m["observable"] = json!(p.observable.name());
    if let Some(v) = point.value {
        m["value"] = json!(v);
    }
    if let Some(s) = point.std {
        m["std"] = json!(s);
    }
    write_json(&sidecar(&io.output), &m)
}

fn emit_plot(res: &SweepResult, output: &Path) -> Outcome {
    std::fs::write(with_ext(output, "svg"), plot::svg(res))?;
    let dat = with_ext(output, "dat");
    std::fs::write(&dat, plot::gnuplot_data(res))?;
    let name = |p: &Path| p.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let png = with_ext(output, "png");
    std::fs::write(with_ext(output, "gp"), plot::gnuplot_script(res, &name(&dat), &name(&png)))?;
    Ok(())
}

fn cmd_sweep(io: &Io, pool: &Pool, plot_it: bool, two_axes: bool) -> Outcome {
    let cfg = load(&io.config)?;
    let spec = cfg
        .sweep
        .clone()
        .ok_or_else(|| Error::param("sweep", "configuration has no sweep section"))?;
    if two_axes && spec.axis2.is_none() {
        return Err(Error::param("sweep.axis2", "phase-diagram needs two axes").into());
    }
    let p = cfg.pipeline()?;
    let mut res = sweep(&p, &spec, workers(pool.workers)?)?;
    res.metadata.fingerprint = Some(cfg.fingerprint()?);

    res.write_csv(BufWriter::new(File::create(&io.output)?))?;
    let mut m = meta(&cfg)?;
    m["result"] = serde_json::to_value(&res).map_err(|e| Failure::Io(e.to_string()))?;
    if res.is_1d() {
        let th = spec.threshold.unwrap_or_default();
        m["threshold"] = json!(resolve_threshold(&res, th));
        m["transitions"] = json!(detect_transition(&res, th)?);
    }
    write_json(&sidecar(&io.output), &m)?;
    if plot_it {
        emit_plot(&res, &io.output)?;
    }
    Ok(())
}

fn cmd_ensemble(io: &Io, pool: &Pool, n_configs: Option<usize>, seed0: Option<u64>) -> Outcome {
    let cfg = load(&io.config)?;
    let p = cfg.pipeline()?;
    let dis = p
        .disorder
        .as_ref()
        .ok_or_else(|| Error::param("disorder", "an ensemble needs a disorder section"))?;
    let n = n_configs.unwrap_or(dis.n_configs);
    let s0 = seed0.unwrap_or(dis.seed);
    let mut res = ensemble_average(&p, n, s0, p.observable, workers(pool.workers)?)?;
    res.fingerprint = Some(cfg.fingerprint()?);

    let mut out = BufWriter::new(File::create(&io.output)?);
    match (&res.mean, &res.std, &res.times) {
        (Stat::Series(m), Stat::Series(s), Some(t)) => {
            writeln!(out, "t,mean,std")?;
            for k in 0..t.len() {
                writeln!(out, "{},{},{}", fmt17(t[k]), fmt17(m[k]), fmt17(s[k]))?;
            }
        }
        _ => {
            writeln!(out, "config,seed,{}", res.observable)?;
            for (i, v) in res.per_config.iter().enumerate() {
                let v = v.scalar().unwrap_or(f64::NAN);
                writeln!(out, "{i},{},{}", s0.wrapping_add(i as u64), fmt17(v))?;
            }
        }
    }
    out.flush()?;
    let mut m = meta(&cfg)?;
    m["result"] = serde_json::to_value(&res).map_err(|e| Failure::Io(e.to_string()))?;
    write_json(&sidecar(&io.output), &m)
}

fn cmd_validate(io: &Io, tol: f64, mode: Mode, corrupt: Option<Corruption>) -> Outcome {
    if !(tol > 0.0) {
        return Err(Error::param("tolerance", "must be positive").into());
    }
    let cfg = load(&io.config)?;
    let mode = match mode {
        Mode::Extended => ChainMode::Extended,
        Mode::Plain => ChainMode::Plain,
    };
    let rep = validate(&cfg, mode, corrupt)?;
    rep.write_csv(BufWriter::new(File::create(&io.output)?))?;
    let mut m = meta(&cfg)?;
    m["mode"] = json!(mode);
    m["tolerance"] = json!(tol);
    m["max_diff"] = json!(rep.max_diff);
    m["passed"] = json!(rep.max_diff <= tol);
    write_json(&sidecar(&io.output), &m)?;
    if rep.max_diff > tol {
        return Err(Failure::Tolerance(format!(
            "max |analytic - numeric| = {:e} exceeds tolerance {:e}",
            rep.max_diff, tol
        )));
    }
    eprintln!("max |analytic - numeric| = {:e}", rep.max_diff);
    Ok(())
}

fn cmd_model_dump(io: &Io) -> Outcome {
    let cfg = load(&io.config)?;
    let p = cfg.pipeline()?;
    let h = p.build_hamiltonian(None)?;
    std::fs::write(&io.output, dense::write_dense_matrix(&h.entries))?;
    let mut m = meta(&cfg)?;
    m["dim"] = json!(h.dim());
    m["hermitian"] = json!(h.hermitian);
    m["layout"] = serde_json::to_value(&h.layout).map_err(|e| Failure::Io(e.to_string()))?;
    write_json(&sidecar(&io.output), &m)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let r = match &cli.cmd {
        Cmd::Otoc { io, amplitudes } => cmd_otoc(io, *amplitudes),
        Cmd::Sweep { io, pool, emit_plot } => cmd_sweep(io, pool, *emit_plot, false),
        Cmd::PhaseDiagram { io, pool, emit_plot } => cmd_sweep(io, pool, *emit_plot, true),
        Cmd::Ensemble {
            io,
            pool,
            n_configs,
            seed0,
        } => cmd_ensemble(io, pool, *n_configs, *seed0),
        Cmd::Validate {
            io,
            tolerance,
            mode,
            corrupt,
        } => cmd_validate(io, *tolerance, *mode, *corrupt),
        Cmd::ModelDump { io } => cmd_model_dump(io),
    };
    match r {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Core(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_input_error() { 2 } else { 1 })
        }
        Err(Failure::Io(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(Failure::Tolerance(e)) => {
            eprintln!("validation failed: {e}");
            ExitCode::from(3)
        }
    }
}
