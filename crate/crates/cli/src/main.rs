//! `sec`: spectral exterior calculus on point clouds from the command line.

mod config;
mod error;
mod stages;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{merge, read_settings, RunConfig, Settings, DEFAULT_OUT};
use error::CliError;

#[derive(Parser, Debug)]
#[command(name = "sec", version, about = "Hodge spectra and harmonic 1-forms of point clouds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Every stage in one pass.
    Run(Flags),
    /// Write the point cloud.
    Generate(Flags),
    /// Diffusion-maps eigenbasis of points.csv.
    Spectrum(Flags),
    /// 1-Laplacian spectrum, eigenforms and Betti estimate from the stored basis.
    Eigenforms(Flags),
    /// Arrow CSV and SVG for selected eigenforms.
    Export(Flags),
}

#[derive(Args, Debug, Default)]
struct Flags {
    /// Built-in dataset: circle, circle_random, flat_torus, torus_r3, sphere, mobius, genus2, lorenz63.
    #[arg(long)]
    dataset: Option<String>,
    /// Point cloud CSV, one point per row.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Sample count (points per dimension for flat_torus).
    #[arg(long)]
    n: Option<usize>,
    /// Kernel bandwidth: a number, `auto` or `nn` [default: nn].
    #[arg(long, allow_hyphen_values = true)]
    eps: Option<String>,
    /// Eigenfunctions used for frames [default: 20].
    #[arg(long)]
    m: Option<usize>,
    /// Eigenfunctions used for products [default: 100].
    #[arg(long)]
    ms: Option<usize>,
    /// Frame kind [default: antisym].
    #[arg(long, value_parser = ["antisym", "nonsym"])]
    frame: Option<String>,
    /// Eigensolver [default: intro].
    #[arg(long, value_parser = ["intro", "theta"])]
    method: Option<String>,
    /// Shift for the theta method [default: 1].
    #[arg(long)]
    theta: Option<f64>,
    /// Sobolev-basis retention threshold [default: 0.001].
    #[arg(long)]
    rtol: Option<f64>,
    /// Eigenvalues below this count as harmonic [default: 0.05].
    #[arg(long)]
    betti_threshold: Option<f64>,
    /// Estimate the Betti number from the largest spectral gap.
    #[arg(long)]
    betti_gap: bool,
    /// Output directory [default: sec_out].
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed for random datasets [default: 0].
    #[arg(long)]
    seed: Option<u64>,
    /// Eigenforms to export, comma separated [default: 0].
    #[arg(long, value_delimiter = ',')]
    eigenform: Option<Vec<usize>>,
    /// Draw every stride-th arrow in SVG output [default: 1].
    #[arg(long)]
    stride: Option<usize>,
    /// key=value file; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
}

impl Flags {
    fn settings(&self) -> Settings {
        let mut s = Settings::new();
        let mut put = |k: &str, v: Option<String>| {
            if let Some(v) = v {
                s.insert(k.to_string(), v);
            }
        };
        put("dataset", self.dataset.clone());
        put("input", self.input.as_ref().map(|p| p.display().to_string()));
        put("n", self.n.map(|x| x.to_string()));
        put("eps", self.eps.clone());
        put("m", self.m.map(|x| x.to_string()));
        put("ms", self.ms.map(|x| x.to_string()));
        put("frame", self.frame.clone());
        put("method", self.method.clone());
        put("theta", self.theta.map(|x| x.to_string()));
        put("rtol", self.rtol.map(|x| x.to_string()));
        put("betti-threshold", self.betti_threshold.map(|x| x.to_string()));
        put("betti-gap", self.betti_gap.then(|| "true".to_string()));
        put("out", self.out.as_ref().map(|p| p.display().to_string()));
        put("seed", self.seed.map(|x| x.to_string()));
        put(
            "eigenform",
            self.eigenform.as_ref().map(|v| v.iter().map(|k| k.to_string()).collect::<Vec<_>>().join(",")),
        );
        put("stride", self.stride.map(|x| x.to_string()));
        s
    }
}

/// Resolved config plus the bandwidth recorded by an earlier stage, if any.
fn resolve(flags: &Flags, resume: bool) -> Result<(RunConfig, Option<f64>), CliError> {
    let top = flags.settings();
    let file = match &flags.config {
        Some(p) => Some(read_settings(p)?),
        None => None,
    };
    let out = top
        .get("out")
        .or_else(|| file.as_ref().and_then(|f| f.settings.get("out")))
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));

    let mut settings = Settings::new();
    let mut eps = None;
    let manifest = out.join(stages::MANIFEST);
    if resume && manifest.is_file() {
        let prior = read_settings(&manifest)?;
        eps = prior.info.get("resolved_eps").and_then(|v| v.parse::<f64>().ok());
        merge(&mut settings, &prior.settings);
    }
    if let Some(f) = &file {
        merge(&mut settings, &f.settings);
    }
    merge(&mut settings, &top);
    settings.insert("out".into(), out.display().to_string());
    Ok((RunConfig::resolve(&settings)?, eps))
}

fn execute(command: &Command) -> Result<(), CliError> {
    match command {
        Command::Run(f) => {
            let (cfg, _) = resolve(f, false)?;
            stages::require_source(&cfg)?;
            stages::make_out_dir(&cfg)?;
            let cloud = stages::generate_cloud(&cfg)?;
            let basis = stages::spectrum(&cfg, &cloud)?;
            let h = stages::eigenforms(&cfg, &basis)?;
            stages::export(&cfg, &cloud, &basis, &h.tensors, &h.eigenforms.coeffs)?;
            stages::write_manifest(&cfg, "run", Some(basis.epsilon))
        }
        Command::Generate(f) => {
            let (cfg, _) = resolve(f, false)?;
            stages::require_source(&cfg)?;
            stages::make_out_dir(&cfg)?;
            stages::generate_cloud(&cfg)?;
            stages::write_manifest(&cfg, "generate", None)
        }
        Command::Spectrum(f) => {
            let (cfg, _) = resolve(f, true)?;
            let cloud = stages::load_cloud(&cfg)?;
            let basis = stages::spectrum(&cfg, &cloud)?;
            stages::write_manifest(&cfg, "spectrum", Some(basis.epsilon))
        }
        Command::Eigenforms(f) => {
            let (cfg, eps) = resolve(f, true)?;
            let eps = eps.ok_or_else(|| missing_eps(&cfg))?;
            let basis = stages::load_basis(&cfg, eps)?;
            stages::eigenforms(&cfg, &basis)?;
            stages::write_manifest(&cfg, "eigenforms", Some(eps))
        }
        Command::Export(f) => {
            let (cfg, eps) = resolve(f, true)?;
            let eps = eps.ok_or_else(|| missing_eps(&cfg))?;
            let cloud = stages::load_cloud(&cfg)?;
            let basis = stages::load_basis(&cfg, eps)?;
            let coeffs = stages::load_eigenforms(&cfg)?;
            let tensors = stages::tensors_for(&cfg, &basis)?;
            stages::export(&cfg, &cloud, &basis, &tensors, &coeffs)?;
            stages::write_manifest(&cfg, "export", Some(eps))
        }
    }
}

fn missing_eps(cfg: &RunConfig) -> CliError {
    CliError::MissingArtifact { file: stages::MANIFEST, dir: cfg.out.display().to_string(), stage: "spectrum" }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}: {e}", e.category());
            ExitCode::FAILURE
        }
    }
}
