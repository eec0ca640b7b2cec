use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};

use clap::{Parser, Subcommand};
use log::{error, info};
use quadcarve::export;
use quadcarve::pipeline::{format_table, run_pipeline, Emit, PipelineConfig, RunReport};
use quadcarve::simplify::Order;
use quadcarve::PipelineError;

/// Quad layouts from boundary-aligned cross fields.
#[derive(Parser)]
#[command(name = "quadcarve", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the pipeline on one mesh (`.obj`, `.off` or `fixture:<name>`).
    Run {
        mesh: PathBuf,
        /// Diffusion time. Defaults to 1 / smallest eigenvalue.
        #[arg(long)]
        tau: Option<f64>,
        #[arg(long, default_value_t = 1e-6)]
        delta_scale: f64,
        /// Heun step as a fraction of the local edge length.
        #[arg(long, default_value_t = 0.25)]
        heun_factor: f64,
        /// Rays per singular triangle for port location.
        #[arg(long, default_value_t = 32)]
        rays: usize,
        /// Crossing angle below which two separatrices count as tangential.
        #[arg(long, default_value_t = std::f64::consts::FRAC_PI_8)]
        tangential_threshold: f64,
        #[arg(long, value_enum, default_value_t = Order::Thinnest)]
        order: Order,
        #[arg(long)]
        max_collapses: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Comma separated subset of json,vtk,svg,csv.
        #[arg(long, default_value = "json,csv")]
        emit: String,
    },
    /// Run every mesh of a directory in separate processes.
    Batch {
        dir: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

const EXIT_USAGE: u8 = 2;
const EXIT_INPUT: u8 = 3;
const EXIT_INVALID: u8 = 4;

fn exit_code(e: &PipelineError) -> u8 {
    match e {
        PipelineError::Config(_) => EXIT_USAGE,
        PipelineError::Input(_) => EXIT_INPUT,
        PipelineError::Layout(_) => EXIT_INVALID,
        _ => 1,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("QUADCARVE_LOG", "warn")).init();
    let cli = Cli::parse();
    match cli.cmd {
        Cmd::Run { mesh, tau, delta_scale, heun_factor, rays, tangential_threshold, order, max_collapses, out, emit } => {
            let emit = match Emit::parse(&emit) {
                Ok(e) => e,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(EXIT_USAGE);
                }
            };
            let cfg = PipelineConfig {
                input: mesh,
                tau,
                delta_scale,
                heun_factor,
                rays,
                tangential_threshold,
                order,
                max_collapses,
                out,
                emit,
            };
            match run_pipeline(&cfg) {
                Ok(r) => {
                    print!("{}", format_table(&[r]));
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(exit_code(&e))
                }
            }
        }
        Cmd::Batch { dir, out } => batch(&dir, &out),
    }
}

fn batch(dir: &Path, out: &Path) -> ExitCode {
    let mut meshes: Vec<PathBuf> = match std::fs::read_dir(dir) {
        Ok(rd) => rd
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().and_then(|e| e.to_str()).is_some_and(|e| matches!(e.to_ascii_lowercase().as_str(), "obj" | "off")))
            .collect(),
        Err(e) => {
            eprintln!("error: {}: {e}", dir.display());
            return ExitCode::from(EXIT_INPUT);
        }
    };
    meshes.sort();
    let exe = match std::env::current_exe() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
    };
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get());
    let mut reports: Vec<RunReport> = Vec::new();
    let mut worst = 0u8;
    for chunk in meshes.chunks(workers) {
        let children: Vec<_> = chunk
            .iter()
            .map(|m| {
                let stem = m.file_stem().unwrap_or_default().to_string_lossy().into_owned();
                let sub = out.join(&stem);
                let child = Command::new(&exe)
                    .arg("run")
                    .arg(m)
                    .arg("--out")
                    .arg(&sub)
                    .arg("--emit")
                    .arg("json,vtk,csv")
                    .stdout(std::process::Stdio::null())
                    .spawn();
                (stem, sub, child)
            })
            .collect();
        for (stem, sub, child) in children {
            let code = match child.and_then(|mut c| c.wait()) {
                Ok(s) => s.code().unwrap_or(1) as u8,
                Err(e) => {
                    error!("{stem}: {e}");
                    1
                }
            };
            if code != 0 {
                error!("{stem}: exited with status {code}");
                worst = worst.max(code);
            }
            match export::read_reports_csv(&sub.join(format!("{stem}.report.csv"))) {
                Ok(rows) => reports.extend(rows),
                Err(e) => info!("{stem}: no report ({e})"),
            }
        }
    }
    if let Err(e) = std::fs::create_dir_all(out).map_err(|e| e.to_string()).and_then(|_| {
        export::write_text(&out.join("report.csv"), &export::reports_csv(&reports)).map_err(|e| e.to_string())
    }) {
        eprintln!("error: {e}");
        return ExitCode::FAILURE;
    }
    print!("{}", format_table(&reports));
    ExitCode::from(worst)
}
