//! `elastoscatter` command-line driver.
//!
//! Exit codes: 0 success, 2 configuration or input error, 3 numerical failure.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use elastoscatter::farfield::{Channel, FarFieldMatrix};
use elastoscatter::imaging::{build_fsharp, indicator, locate_points, GridSpec, Peak};
use elastoscatter::io::{self, FieldRow};
use elastoscatter::scenario::Scenario;
use elastoscatter::Error;
use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Parser, Debug)]
#[command(
    name = "elastoscatter",
    version,
    about = "Elastic scattering forward solves and factorization-method imaging"
)]
struct Cli {
    /// Scenario file (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Overrides `data.seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Overrides `data.channel`.
    #[arg(long, global = true)]
    channel: Option<Channel>,
    /// Overrides `data.delta`.
    #[arg(long, global = true)]
    noise: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Total field at the points listed in a CSV file (`x1,x2` per line).
    Forward {
        #[arg(long)]
        points: PathBuf,
    },
    /// Far-field data matrix for the scenario.
    Farfield,
    /// Indicator image from a far-field CSV file.
    Image {
        #[arg(long)]
        farfield: PathBuf,
    },
    /// Scenario file utilities.
    Scenario {
        #[command(subcommand)]
        action: ScenarioAction,
    },
}

#[derive(Subcommand, Debug)]
enum ScenarioAction {
    /// Checks a scenario and prints a summary.
    Validate,
}

struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Numerical(_) | Error::SingularMatrix(_) | Error::Resonance { .. } | Error::Singularity(_) => 3,
            Error::Domain(_) | Error::Config(_) | Error::Parse { .. } | Error::Io(_) => 2,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e).into()
    }
}

fn config_error(message: impl Into<String>) -> Failure {
    Failure {
        code: 2,
        message: message.into(),
    }
}

type CliResult<T> = Result<T, Failure>;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: &Cli) -> CliResult<()> {
    if let Some(k) = cli.threads {
        if k == 0 {
            return Err(config_error("--threads must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build_global()
            .map_err(|e| config_error(format!("cannot configure thread pool: {e}")))?;
    }
    match &cli.command {
        Command::Forward { points } => forward(cli, points),
        Command::Farfield => farfield(cli),
        Command::Image { farfield } => image(cli, farfield),
        Command::Scenario {
            action: ScenarioAction::Validate,
        } => validate(cli),
    }
}

/// Loads the scenario and applies command-line overrides.
fn scenario(cli: &Cli) -> CliResult<Scenario> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| config_error("--config is required"))?;
    let mut s = Scenario::load(path).map_err(|e| config_error(format!("{}: {e}", path.display())))?;
    if let Some(seed) = cli.seed {
        s.data.seed = seed;
    }
    if let Some(ch) = cli.channel {
        s.data.channel = ch;
    }
    if let Some(delta) = cli.noise {
        s.data.delta = delta;
    }
    s.validate()?;
    Ok(s)
}

fn create(dir: &Path, name: &str) -> CliResult<(PathBuf, BufWriter<File>)> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    let file = File::create(&path)?;
    Ok((path, BufWriter::new(file)))
}

fn sha256_file(path: &Path) -> CliResult<String> {
    Ok(format!("{:x}", Sha256::digest(fs::read(path)?)))
}

fn forward(cli: &Cli, points: &Path) -> CliResult<()> {
    let s = scenario(cli)?;
    let pts = io::read_points(BufReader::new(File::open(points)?))?;
    let solver = s.build_solver()?;
    let incident = s.incident()?;
    let field = solver.total_field(&incident)?;
    let rows: Vec<FieldRow> = pts
        .iter()
        .map(|x| FieldRow {
            x: *x,
            value: field.eval(x).map_err(|e| e.to_string()),
        })
        .collect();
    let failed = rows.iter().filter(|r| r.value.is_err()).count();
    if failed > 0 {
        log::warn!("{failed} of {} evaluation points could not be evaluated", rows.len());
    }
    let (path, mut w) = create(&cli.out, "field.csv")?;
    io::write_field_csv(&rows, &mut w)?;
    w.flush()?;
    println!("{}", path.display());
    Ok(())
}

fn farfield(cli: &Cli) -> CliResult<()> {
    let s = scenario(cli)?;
    let solver = s.build_solver()?;
    log::info!("interaction matrix condition {:.3e}", solver.condition());
    let data = s.farfield(&solver)?;
    let (path, mut w) = create(&cli.out, "farfield.csv")?;
    io::write_farfield(&data, &mut w)?;
    w.flush()?;
    println!("{}", path.display());
    Ok(())
}

#[derive(Serialize)]
struct Manifest {
    command: &'static str,
    version: &'static str,
    farfield_sha256: String,
    config_sha256: Option<String>,
    channel: Channel,
    n_dir: usize,
    omega: f64,
    lambda: f64,
    mu: f64,
    delta: f64,
    seed: u64,
    grid: GridSpec,
    polarization: [f64; 2],
    relative_cutoff: f64,
    eigenvalues_above_floor: usize,
    eigenvalues_total: usize,
    peaks: Vec<Peak>,
    warning: Option<String>,
    outputs: Vec<(String, String)>,
}

fn image(cli: &Cli, farfield_path: &Path) -> CliResult<()> {
    let s = cli.config.as_ref().map(|_| scenario(cli)).transpose()?;
    let raw = io::read_farfield(BufReader::new(File::open(farfield_path)?))
        .map_err(|e| config_error(format!("{}: {e}", farfield_path.display())))?;
    let channel = cli
        .channel
        .or(s.as_ref().map(|s| s.data.channel))
        .unwrap_or(raw.channel);
    let data: FarFieldMatrix = raw.extract(channel)?;
    if let Some(s) = &s {
        let m = s.medium()?;
        if m != data.medium {
            return Err(config_error(format!(
                "far-field file medium {:?} does not match the scenario medium {:?}",
                data.medium, m
            )));
        }
    }
    let grid = s.as_ref().map(|s| s.grid).unwrap_or_default();
    let beta = s.as_ref().map(|s| s.imaging.beta).unwrap_or(0.0);
    let a = elastoscatter::greens::Point::<2>::new(beta.cos(), beta.sin());
    let cutoff = s.as_ref().and_then(|s| s.imaging.cutoff);
    let count = match &s {
        Some(s) => s.peak_count()?,
        None => 10,
    };

    let op = build_fsharp(&data)?;
    let w = indicator(&op, &grid, &a, cutoff)?;
    let located = locate_points(&w, count);

    let (csv_path, mut f) = create(&cli.out, "indicator.csv")?;
    io::write_indicator_csv(&w, &mut f)?;
    f.flush()?;
    let (pgm_path, mut f) = create(&cli.out, "indicator.pgm")?;
    let (lo, hi) = io::write_indicator_pgm(&w, &mut f)?;
    f.flush()?;
    let (side_path, mut f) = create(&cli.out, "indicator.pgm.txt")?;
    f.write_all(io::pgm_sidecar(lo, hi).as_bytes())?;
    f.flush()?;

    let mut outputs = vec![];
    for p in [&csv_path, &pgm_path, &side_path] {
        let name = p.file_name().unwrap().to_string_lossy().into_owned();
        outputs.push((name, sha256_file(p)?));
    }
    let manifest = Manifest {
        command: "image",
        version: env!("CARGO_PKG_VERSION"),
        farfield_sha256: sha256_file(farfield_path)?,
        config_sha256: cli.config.as_deref().map(sha256_file).transpose()?,
        channel,
        n_dir: data.grid.len(),
        omega: data.medium.omega,
        lambda: data.medium.lambda,
        mu: data.medium.mu,
        delta: data.delta,
        seed: data.seed,
        grid,
        polarization: [a[0], a[1]],
        relative_cutoff: w.relative_cutoff,
        eigenvalues_above_floor: w.kept,
        eigenvalues_total: op.eigenvalues.len(),
        peaks: located.peaks,
        warning: located.warning,
        outputs,
    };
    let (man_path, mut f) = create(&cli.out, "manifest.json")?;
    let text = serde_json::to_string_pretty(&manifest).map_err(|e| Failure {
        code: 3,
        message: e.to_string(),
    })?;
    writeln!(f, "{text}")?;
    f.flush()?;
    println!("{}", man_path.display());
    Ok(())
}

fn validate(cli: &Cli) -> CliResult<()> {
    let s = scenario(cli)?;
    let medium = s.medium()?;
    let cloud = s.cloud()?;
    let obstacle = match (&s.obstacle, s.curve()?) {
        (Some(o), Some(c)) => format!("{:?} (scale {}, n = {})", o.curve, o.scale, c.n()).to_lowercase(),
        _ => "none".to_string(),
    };
    println!("ok");
    println!("k_p = {}, k_s = {}", medium.k_p(), medium.k_s());
    println!("obstacle: {obstacle}");
    println!("points: {}", cloud.len());
    for (y, a) in cloud.points().iter().zip(cloud.alphas()) {
        println!("  ({}, {})  alpha = {a}", y[0], y[1]);
    }
    println!(
        "data: {} channel, {} directions, delta = {}, seed = {}",
        s.data.channel, s.data.n_dir, s.data.delta, s.data.seed
    );
    Ok(())
}
