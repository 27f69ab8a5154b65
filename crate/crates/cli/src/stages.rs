//! Pipeline stages and their on-disk artifacts.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use sec_core::datasets::{generate, load_point_cloud, PointCloud};
use sec_core::diffusion_maps::SpectralBasis;
use sec_core::frames::FrameCoefficients;
use sec_core::hodge1::betti_estimate;
use sec_core::numerics::Matrix;
use sec_core::pipeline::{hodge_stage, spectral_stage, HodgeResult};
use sec_core::pushforward::{pushforward, write_svg, SvgOptions};
use sec_core::spectral_tensors::{assemble, SecTensorSet};
use sec_core::SecError;

use crate::config::{RunConfig, Source};
use crate::error::CliError;

pub const POINTS: &str = "points.csv";
pub const LAMBDAS: &str = "eigenvalues_0lap.csv";
pub const BASIS: &str = "basis.csv";
pub const NUS: &str = "eigenvalues_1lap.csv";
pub const BETTI: &str = "betti.txt";
pub const EIGENFORMS: &str = "eigenforms.csv";
pub const MANIFEST: &str = "manifest.txt";

type Result<T> = std::result::Result<T, CliError>;

fn write(dir: &Path, name: &str, text: &str) -> Result<()> {
    let path = dir.join(name);
    std::fs::write(&path, text).map_err(|e| SecError::io(format!("writing {}", path.display()), e))?;
    Ok(())
}

fn require(dir: &Path, file: &'static str, stage: &'static str) -> Result<PathBuf> {
    let path = dir.join(file);
    if path.is_file() {
        Ok(path)
    } else {
        Err(CliError::MissingArtifact { file, dir: dir.display().to_string(), stage })
    }
}

fn read(path: &Path) -> Result<String> {
    Ok(std::fs::read_to_string(path).map_err(|e| SecError::io(format!("reading {}", path.display()), e))?)
}

/// Numeric rows of a CSV with a single header line.
fn read_table(path: &Path) -> Result<Vec<Vec<f64>>> {
    let text = read(path)?;
    let origin = path.display().to_string();
    let mut rows = Vec::new();
    for (no, line) in text.lines().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .map(|x| x.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| SecError::Parse { path: origin.clone(), line: no + 1, msg: e.to_string() })?;
        rows.push(row);
    }
    Ok(rows)
}

fn stale(what: &str) -> CliError {
    CliError::Config(format!("{what}; rerun the earlier stages with the current settings"))
}

pub fn write_manifest(cfg: &RunConfig, command: &str, eps: Option<f64>) -> Result<()> {
    write(&cfg.out, MANIFEST, &cfg.manifest(command, eps))
}

pub fn make_out_dir(cfg: &RunConfig) -> Result<()> {
    std::fs::create_dir_all(&cfg.out).map_err(|e| SecError::io(format!("creating {}", cfg.out.display()), e))?;
    Ok(())
}

// generate

pub fn require_source(cfg: &RunConfig) -> Result<()> {
    match cfg.source {
        Some(_) => Ok(()),
        None => Err(CliError::Config("one of --dataset or --input is required".into())),
    }
}

pub fn generate_cloud(cfg: &RunConfig) -> Result<PointCloud<f64>> {
    require_source(cfg)?;
    let cloud = match (&cfg.source, cfg.dataset_spec()?) {
        (Some(Source::Input(p)), _) => load_point_cloud(p)?,
        (_, Some(spec)) => generate(&spec)?,
        _ => unreachable!("source checked above"),
    };
    write(&cfg.out, POINTS, &cloud.to_csv())?;
    Ok(cloud)
}

pub fn load_cloud(cfg: &RunConfig) -> Result<PointCloud<f64>> {
    Ok(load_point_cloud(&require(&cfg.out, POINTS, "generate")?)?)
}

// spectrum

pub fn spectrum(cfg: &RunConfig, cloud: &PointCloud<f64>) -> Result<SpectralBasis<f64>> {
    let basis = spectral_stage(cloud, &cfg.params())?;
    let mut lam = String::from("j,lambda\n");
    for (j, l) in basis.lambdas.iter().enumerate() {
        writeln!(lam, "{j},{l:.16e}").unwrap();
    }
    write(&cfg.out, LAMBDAS, &lam)?;

    let mut text = String::from("weight");
    for j in 0..basis.ms() {
        write!(text, ",phi_{j}").unwrap();
    }
    text.push('\n');
    for i in 0..basis.n_points() {
        write!(text, "{:.16e}", basis.weights[i]).unwrap();
        for x in basis.phi.row(i) {
            write!(text, ",{x:.16e}").unwrap();
        }
        text.push('\n');
    }
    write(&cfg.out, BASIS, &text)?;
    Ok(basis)
}

pub fn load_basis(cfg: &RunConfig, eps: f64) -> Result<SpectralBasis<f64>> {
    let lam = read_table(&require(&cfg.out, LAMBDAS, "spectrum")?)?;
    let rows = read_table(&require(&cfg.out, BASIS, "spectrum")?)?;
    let lambdas: Vec<f64> = lam.iter().map(|r| r.get(1).copied().unwrap_or(f64::NAN)).collect();
    let ms = lambdas.len();
    if rows.iter().any(|r| r.len() != ms + 1) {
        return Err(stale(&format!("{BASIS} does not have {} columns", ms + 1)));
    }
    let weights = rows.iter().map(|r| r[0]).collect();
    let phi = Matrix::from_fn(rows.len(), ms, |i, j| rows[i][j + 1]);
    if cfg.m > ms {
        return Err(stale(&format!("M = {} exceeds the {ms} stored eigenfunctions", cfg.m)));
    }
    Ok(SpectralBasis::from_parts(lambdas, phi, weights, eps, cfg.m)?)
}

// eigenforms

pub fn eigenforms(cfg: &RunConfig, basis: &SpectralBasis<f64>) -> Result<HodgeResult<f64>> {
    let h = hodge_stage(basis, &cfg.params())?;
    let ef = &h.eigenforms;
    let mut nus = String::from("k,nu\n");
    for (k, nu) in ef.nus.iter().enumerate() {
        writeln!(nus, "{k},{nu:.16e}").unwrap();
    }
    write(&cfg.out, NUS, &nus)?;

    let b = betti_estimate(&ef.nus, cfg.betti_threshold, cfg.betti_gap)?;
    let rule = if cfg.betti_gap { "gap" } else { "threshold" };
    write(&cfg.out, BETTI, &format!("betti_1={b}\nrule={rule}\nthreshold={}\n", cfg.betti_threshold))?;

    let mut text = String::from("eigenform,p,q,value\n");
    for (k, a) in ef.coeffs.iter().enumerate() {
        for (&(p, q), v) in a.index.pairs().iter().zip(&a.values) {
            writeln!(text, "{k},{p},{q},{v:.16e}").unwrap();
        }
    }
    write(&cfg.out, EIGENFORMS, &text)?;
    Ok(h)
}

pub fn load_eigenforms(cfg: &RunConfig) -> Result<Vec<FrameCoefficients<f64>>> {
    let rows = read_table(&require(&cfg.out, EIGENFORMS, "eigenforms")?)?;
    let index = cfg.params().frame_index();
    let mut out: Vec<FrameCoefficients<f64>> = Vec::new();
    for r in rows {
        if r.len() != 4 {
            return Err(stale(&format!("{EIGENFORMS} rows must have 4 fields")));
        }
        let (k, p, q) = (r[0] as usize, r[1] as usize, r[2] as usize);
        if k == out.len() {
            out.push(FrameCoefficients::zeros(index.clone()));
        }
        let slot = index.position(p, q).filter(|_| k + 1 == out.len());
        let Some(pos) = slot else {
            return Err(stale(&format!("{EIGENFORMS} does not match the configured frame and M")));
        };
        out[k].values[pos] = r[3];
    }
    Ok(out)
}

// export

pub fn export(
    cfg: &RunConfig,
    cloud: &PointCloud<f64>,
    basis: &SpectralBasis<f64>,
    tensors: &SecTensorSet<f64>,
    coeffs: &[FrameCoefficients<f64>],
) -> Result<()> {
    let opts = SvgOptions { stride: cfg.stride, ..Default::default() };
    for &k in &cfg.eigenforms {
        let Some(a) = coeffs.get(k) else {
            return Err(CliError::Config(format!("eigenform {k} requested, only {} available", coeffs.len())));
        };
        let field = pushforward(a, tensors, basis, cloud)?;
        write(&cfg.out, &format!("eigenform_{k}_arrows.csv"), &field.to_csv())?;
        write_svg(&field, &cfg.out.join(format!("eigenform_{k}_arrows.svg")), &opts)?;
    }
    Ok(())
}

pub fn tensors_for(cfg: &RunConfig, basis: &SpectralBasis<f64>) -> Result<SecTensorSet<f64>> {
    Ok(assemble(&basis.clone().with_m(cfg.m)?)?)
}
