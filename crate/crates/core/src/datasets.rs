//! Example point clouds and CSV ingestion.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Result, SecError};
use crate::numerics::Matrix;
use crate::scalar::Real;

/// N samples in ℝⁿ, one per row.
#[derive(Clone, Debug, PartialEq)]
pub struct PointCloud<T> {
    pub points: Matrix<T>,
    pub label: String,
    pub params: BTreeMap<String, String>,
}

impl<T: Real> PointCloud<T> {
    /// Validates N ≥ 2, finite coordinates and pairwise-distinct rows.
    pub fn new(points: Matrix<T>, label: impl Into<String>) -> Result<Self> {
        if points.rows() < 2 {
            return Err(SecError::DatasetTooSmall { points: points.rows(), needed: 2 });
        }
        if points.cols() == 0 {
            return Err(SecError::Shape("point cloud has zero ambient dimension".into()));
        }
        if !points.all_finite() {
            return Err(SecError::NonFinite("point cloud"));
        }
        let mut order: Vec<usize> = (0..points.rows()).collect();
        order.sort_by(|&a, &b| points.row(a).partial_cmp(points.row(b)).unwrap_or(std::cmp::Ordering::Equal));
        for w in order.windows(2) {
            if points.row(w[0]) == points.row(w[1]) {
                let (a, b) = (w[0].min(w[1]), w[0].max(w[1]));
                return Err(SecError::DuplicatePoints(a, b));
            }
        }
        Ok(PointCloud { points, label: label.into(), params: BTreeMap::new() })
    }

    fn with_param(mut self, key: &str, value: impl ToString) -> Self {
        self.params.insert(key.to_string(), value.to_string());
        self
    }

    pub fn len(&self) -> usize {
        self.points.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.points.rows() == 0
    }

    pub fn dim(&self) -> usize {
        self.points.cols()
    }

    pub fn point(&self, i: usize) -> &[T] {
        self.points.row(i)
    }

    /// Squared Euclidean distance between samples `i` and `j`.
    pub fn dist2(&self, i: usize, j: usize) -> T {
        let mut s = T::zero();
        for (&a, &b) in self.point(i).iter().zip(self.point(j)) {
            let d = a - b;
            s += d * d;
        }
        s
    }

    /// CSV text: one point per line, 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for i in 0..self.len() {
            let row = self.point(i);
            for (k, x) in row.iter().enumerate() {
                if k > 0 {
                    out.push(',');
                }
                write!(out, "{:.16e}", x.as_f64()).unwrap();
            }
            out.push('\n');
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv()).map_err(|e| SecError::io(path.display().to_string(), e))
    }
}

/// Generator selection with its parameters.
#[derive(Clone, Debug, PartialEq)]
pub enum DatasetSpec {
    /// Unit circle in ℝ²; evenly spaced or uniformly random angles.
    Circle { n: usize, random: bool, seed: u64 },
    /// `n_per_dim²` grid on (cos θ, sin θ, cos φ, sin φ) ⊂ ℝ⁴.
    FlatTorus { n_per_dim: usize },
    /// Random samples on the standard torus of radii `major`, `minor` in ℝ³.
    TorusR3 { n: usize, major: f64, minor: f64, seed: u64 },
    /// Fibonacci lattice on the unit sphere.
    Sphere { n: usize },
    /// Grid on a Möbius band of width 1 around the unit circle.
    Mobius { n: usize },
    /// Closed surface of genus two.
    Genus2 { n: usize, seed: u64 },
    /// Lorenz 63 trajectory (σ=10, ρ=28, β=8/3) integrated with RK4.
    Lorenz63 { n: usize, dt: f64, spinup: usize, stride: usize },
}

impl DatasetSpec {
    /// Parse a dataset kind name with the CLI's conventions for the rest.
    pub fn from_kind(kind: &str, n: usize, seed: u64) -> Result<Self> {
        Ok(match kind {
            "circle" => DatasetSpec::Circle { n, random: false, seed },
            "circle_random" => DatasetSpec::Circle { n, random: true, seed },
            "flat_torus" => DatasetSpec::FlatTorus { n_per_dim: n },
            "torus_r3" => DatasetSpec::TorusR3 { n, major: 2.0, minor: 1.0, seed },
            "sphere" => DatasetSpec::Sphere { n },
            "mobius" => DatasetSpec::Mobius { n },
            "genus2" => DatasetSpec::Genus2 { n, seed },
            "lorenz63" => DatasetSpec::Lorenz63 { n, dt: 0.01, spinup: 5000, stride: 1 },
            other => return Err(SecError::UnknownDataset(other.to_string())),
        })
    }

    pub fn kind(&self) -> &'static str {
        match self {
            DatasetSpec::Circle { random: false, .. } => "circle",
            DatasetSpec::Circle { random: true, .. } => "circle_random",
            DatasetSpec::FlatTorus { .. } => "flat_torus",
            DatasetSpec::TorusR3 { .. } => "torus_r3",
            DatasetSpec::Sphere { .. } => "sphere",
            DatasetSpec::Mobius { .. } => "mobius",
            DatasetSpec::Genus2 { .. } => "genus2",
            DatasetSpec::Lorenz63 { .. } => "lorenz63",
        }
    }
}

pub const KINDS: [&str; 8] =
    ["circle", "circle_random", "flat_torus", "torus_r3", "sphere", "mobius", "genus2", "lorenz63"];

fn need(n: usize, min: usize) -> Result<()> {
    if n < min {
        return Err(SecError::InvalidArgument(format!("sample count must be at least {min}, got {n}")));
    }
    Ok(())
}

fn positive(name: &str, x: f64) -> Result<()> {
    if !(x > 0.0 && x.is_finite()) {
        return Err(SecError::InvalidArgument(format!("{name} must be positive, got {x}")));
    }
    Ok(())
}

fn cloud<T: Real>(rows: Vec<[f64; 4]>, dim: usize, label: &str) -> Result<PointCloud<T>> {
    let n = rows.len();
    let m = Matrix::from_fn(n, dim, |i, k| T::lit(rows[i][k]));
    PointCloud::new(m, label)
}

pub fn generate<T: Real>(spec: &DatasetSpec) -> Result<PointCloud<T>> {
    use std::f64::consts::PI;
    let tau = 2.0 * PI;
    match *spec {
        DatasetSpec::Circle { n, random, seed } => {
            need(n, 2)?;
            let angles: Vec<f64> = if random {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                (0..n).map(|_| rng.gen::<f64>() * tau).collect()
            } else {
                (0..n).map(|i| tau * i as f64 / n as f64).collect()
            };
            let rows = angles.iter().map(|&t| [t.cos(), t.sin(), 0.0, 0.0]).collect();
            Ok(cloud(rows, 2, spec.kind())?.with_param("n", n).with_param("random", random).with_param("seed", seed))
        }
        DatasetSpec::FlatTorus { n_per_dim } => {
            need(n_per_dim, 2)?;
            let k = n_per_dim;
            let mut rows = Vec::with_capacity(k * k);
            for a in 0..k {
                let t = tau * a as f64 / k as f64;
                for b in 0..k {
                    let p = tau * b as f64 / k as f64;
                    rows.push([t.cos(), t.sin(), p.cos(), p.sin()]);
                }
            }
            Ok(cloud(rows, 4, spec.kind())?.with_param("n_per_dim", k))
        }
        DatasetSpec::TorusR3 { n, major, minor, seed } => {
            need(n, 2)?;
            positive("major radius", major)?;
            positive("minor radius", minor)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let rows = (0..n)
                .map(|_| {
                    let a = rng.gen::<f64>() * tau;
                    let b = rng.gen::<f64>() * tau;
                    let r = major + minor * b.cos();
                    [r * a.cos(), r * a.sin(), minor * b.sin(), 0.0]
                })
                .collect();
            Ok(cloud(rows, 3, spec.kind())?
                .with_param("n", n)
                .with_param("major", major)
                .with_param("minor", minor)
                .with_param("seed", seed))
        }
        DatasetSpec::Sphere { n } => {
            need(n, 2)?;
            let golden = PI * (1.0 + 5f64.sqrt());
            let rows = (0..n)
                .map(|i| {
                    let s = i as f64 + 0.5;
                    let z = 1.0 - 2.0 * s / n as f64;
                    let r = (1.0 - z * z).max(0.0).sqrt();
                    let phi = golden * s;
                    [r * phi.cos(), r * phi.sin(), z, 0.0]
                })
                .collect();
            Ok(cloud(rows, 3, spec.kind())?.with_param("n", n))
        }
        DatasetSpec::Mobius { n } => {
            need(n, 4)?;
            // Spacing across the band roughly matches spacing along it.
            let ns = ((n as f64 / tau).sqrt().round() as usize).max(2);
            let nt = (n as f64 / ns as f64).round().max(2.0) as usize;
            let mut rows = Vec::with_capacity(nt * ns);
            for a in 0..nt {
                let t = tau * a as f64 / nt as f64;
                for b in 0..ns {
                    let s = -1.0 + 2.0 * b as f64 / (ns - 1) as f64;
                    let r = 1.0 + 0.5 * s * (0.5 * t).cos();
                    rows.push([r * t.cos(), r * t.sin(), 0.5 * s * (0.5 * t).sin(), 0.0]);
                }
            }
            Ok(cloud(rows, 3, spec.kind())?.with_param("n", n).with_param("n_along", nt).with_param("n_across", ns))
        }
        DatasetSpec::Genus2 { n, seed } => {
            need(n, 2)?;
            let rows = genus2_samples(n, seed);
            Ok(cloud(rows, 3, spec.kind())?.with_param("n", n).with_param("seed", seed))
        }
        DatasetSpec::Lorenz63 { n, dt, spinup, stride } => {
            need(n, 2)?;
            positive("dt", dt)?;
            if stride == 0 {
                return Err(SecError::InvalidArgument("stride must be at least 1".into()));
            }
            let rows = lorenz63(n, dt, spinup, stride);
            Ok(cloud(rows, 3, spec.kind())?
                .with_param("n", n)
                .with_param("dt", dt)
                .with_param("spinup", spinup)
                .with_param("stride", stride))
        }
    }
}

fn lorenz_rhs(x: [f64; 3]) -> [f64; 3] {
    let (sigma, rho, beta) = (10.0, 28.0, 8.0 / 3.0);
    [sigma * (x[1] - x[0]), x[0] * (rho - x[2]) - x[1], x[0] * x[1] - beta * x[2]]
}

fn rk4_step(x: [f64; 3], dt: f64) -> [f64; 3] {
    let add = |a: [f64; 3], b: [f64; 3], h: f64| [a[0] + h * b[0], a[1] + h * b[1], a[2] + h * b[2]];
    let k1 = lorenz_rhs(x);
    let k2 = lorenz_rhs(add(x, k1, 0.5 * dt));
    let k3 = lorenz_rhs(add(x, k2, 0.5 * dt));
    let k4 = lorenz_rhs(add(x, k3, dt));
    let mut out = x;
    for i in 0..3 {
        out[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}

fn lorenz63(n: usize, dt: f64, spinup: usize, stride: usize) -> Vec<[f64; 4]> {
    let mut x = [1.0, 1.0, 1.0];
    for _ in 0..spinup {
        x = rk4_step(x, dt);
    }
    let mut rows = Vec::with_capacity(n);
    for _ in 0..n {
        for _ in 0..stride {
            x = rk4_step(x, dt);
        }
        rows.push([x[0], x[1], x[2], 0.0]);
    }
    rows
}

// Two overlapping tori joined smoothly: T₁·T₂ = c with
// Tₛ(p) = (√((x ∓ d)² + y²) − R)² + z² − r².
const G2_MAJOR: f64 = 1.0;
const G2_MINOR: f64 = 0.5;
const G2_OFFSET: f64 = 1.1;
const G2_LEVEL: f64 = 0.02;

fn genus2_field(p: [f64; 3]) -> (f64, [f64; 3]) {
    let torus = |s: f64| {
        let dx = p[0] - s * G2_OFFSET;
        let q = (dx * dx + p[1] * p[1]).sqrt().max(1e-12);
        let val = (q - G2_MAJOR).powi(2) + p[2] * p[2] - G2_MINOR * G2_MINOR;
        let f = 2.0 * (q - G2_MAJOR) / q;
        (val, [f * dx, f * p[1], 2.0 * p[2]])
    };
    let (a, ga) = torus(1.0);
    let (b, gb) = torus(-1.0);
    let grad = [ga[0] * b + a * gb[0], ga[1] * b + a * gb[1], ga[2] * b + a * gb[2]];
    (a * b - G2_LEVEL, grad)
}

fn genus2_samples(n: usize, seed: u64) -> Vec<[f64; 4]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let hx = G2_OFFSET + G2_MAJOR + G2_MINOR + 0.2;
    let hy = G2_MAJOR + G2_MINOR + 0.2;
    let hz = G2_MINOR + 0.2;
    let target = 4 * n;
    let mut cand: Vec<[f64; 3]> = Vec::with_capacity(target);
    while cand.len() < target {
        let mut p = [
            (rng.gen::<f64>() * 2.0 - 1.0) * hx,
            (rng.gen::<f64>() * 2.0 - 1.0) * hy,
            (rng.gen::<f64>() * 2.0 - 1.0) * hz,
        ];
        let mut ok = false;
        for _ in 0..60 {
            let (f, g) = genus2_field(p);
            if f.abs() < 1e-12 {
                ok = true;
                break;
            }
            let g2 = g[0] * g[0] + g[1] * g[1] + g[2] * g[2];
            if g2 < 1e-14 {
                break;
            }
            for k in 0..3 {
                p[k] -= f * g[k] / g2;
            }
        }
        if ok {
            cand.push(p);
        }
    }
    // Farthest-point thinning evens out the projection's density bias.
    let d2 = |a: &[f64; 3], b: &[f64; 3]| (0..3).map(|k| (a[k] - b[k]).powi(2)).sum::<f64>();
    let mut chosen = Vec::with_capacity(n);
    let mut dmin: Vec<f64> = cand.iter().map(|c| d2(c, &cand[0])).collect();
    chosen.push(0);
    while chosen.len() < n {
        let (next, _) = dmin
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (i, &d)| if d > best.1 { (i, d) } else { best });
        chosen.push(next);
        for (i, c) in cand.iter().enumerate() {
            dmin[i] = dmin[i].min(d2(c, &cand[next]));
        }
    }
    chosen.into_iter().map(|i| [cand[i][0], cand[i][1], cand[i][2], 0.0]).collect()
}

/// Parse CSV text: comma separated, optional header, `#` comments.
pub fn parse_point_cloud<T: Real>(text: &str, origin: &str) -> Result<PointCloud<T>> {
    let parse_err = |line: usize, msg: String| SecError::Parse { path: origin.to_string(), line, msg };
    let mut rows: Vec<Vec<T>> = Vec::new();
    let mut width = None;
    let mut seen_content = false;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        let lineno = lineno + 1;
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let parsed: std::result::Result<Vec<f64>, _> = fields.iter().map(|f| f.parse::<f64>()).collect();
        let values = match parsed {
            Ok(v) => v,
            Err(_) if !seen_content => {
                // Header row.
                seen_content = true;
                continue;
            }
            Err(_) => {
                let bad = fields.iter().find(|f| f.parse::<f64>().is_err()).unwrap();
                return Err(parse_err(lineno, format!("non-numeric field `{bad}`")));
            }
        };
        seen_content = true;
        match width {
            None => width = Some(values.len()),
            Some(w) if w != values.len() => {
                return Err(parse_err(lineno, format!("ragged row: {} fields, expected {w}", values.len())));
            }
            _ => {}
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(parse_err(lineno, format!("non-finite value {bad}")));
        }
        rows.push(values.into_iter().map(T::lit).collect());
    }
    if rows.is_empty() {
        return Err(parse_err(0, "no data rows".into()));
    }
    let m = Matrix::from_rows(&rows)?;
    if m.rows() < 2 {
        return Err(SecError::DatasetTooSmall { points: m.rows(), needed: 2 });
    }
    let mut pc = PointCloud::new(m, "csv")?;
    pc.params.insert("source".into(), origin.to_string());
    Ok(pc)
}

pub fn load_point_cloud<T: Real>(path: &Path) -> Result<PointCloud<T>> {
    let text = std::fs::read_to_string(path).map_err(|e| SecError::io(path.display().to_string(), e))?;
    parse_point_cloud(&text, &path.display().to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circle_grid_on_unit_circle() {
        let pc: PointCloud<f64> = generate(&DatasetSpec::Circle { n: 101, random: false, seed: 0 }).unwrap();
        assert_eq!(pc.len(), 101);
        for i in 0..pc.len() {
            let r = pc.point(i)[0].hypot(pc.point(i)[1]);
            assert!((r - 1.0).abs() <= 2.0 * f64::EPSILON);
        }
        let d0 = pc.dist2(0, 1).sqrt();
        for i in 0..pc.len() {
            let d = pc.dist2(i, (i + 1) % pc.len()).sqrt();
            assert!((d - d0).abs() < 1e-12);
        }
    }

    #[test]
    fn flat_torus_norms() {
        let pc: PointCloud<f64> = generate(&DatasetSpec::FlatTorus { n_per_dim: 100 }).unwrap();
        assert_eq!(pc.len(), 10_000);
        for i in 0..pc.len() {
            let r: f64 = pc.point(i).iter().map(|x| x * x).sum::<f64>().sqrt();
            assert!((r - 2f64.sqrt()).abs() < 1e-12);
        }
    }

    #[test]
    fn lorenz_stays_in_ball() {
        let spec = DatasetSpec::Lorenz63 { n: 10_000, dt: 0.01, spinup: 5000, stride: 1 };
        let pc: PointCloud<f64> = generate(&spec).unwrap();
        // Oracle: one integration recorded a maximum distance of 30.92.
        let rmax = (0..pc.len())
            .map(|i| {
                let p = pc.point(i);
                (p[0] * p[0] + p[1] * p[1] + (p[2] - 25.0).powi(2)).sqrt()
            })
            .fold(0.0, f64::max);
        assert!(rmax <= 60.0, "{rmax}");
        assert!((rmax - 30.920179106952844).abs() < 1e-6);
    }

    #[test]
    fn generators_are_deterministic() {
        for kind in KINDS {
            let n = if kind == "flat_torus" { 8 } else { 64 };
            let spec = DatasetSpec::from_kind(kind, n, 7).unwrap();
            let a: PointCloud<f64> = generate(&spec).unwrap();
            let b: PointCloud<f64> = generate(&spec).unwrap();
            assert_eq!(a, b, "{kind}");
        }
    }

    #[test]
    fn genus2_points_on_level_set() {
        let pc: PointCloud<f64> = generate(&DatasetSpec::Genus2 { n: 200, seed: 1 }).unwrap();
        for i in 0..pc.len() {
            let p = pc.point(i);
            assert!(genus2_field([p[0], p[1], p[2]]).0.abs() < 1e-10);
        }
    }

    #[test]
    fn mobius_follows_parametrization() {
        let pc: PointCloud<f64> = generate(&DatasetSpec::Mobius { n: 500 }).unwrap();
        let ns: usize = pc.params["n_across"].parse().unwrap();
        // First row: t = 0, s = −1 → (1 − 1/2, 0, 0).
        assert!((pc.point(0)[0] - 0.5).abs() < 1e-15);
        assert!(pc.point(ns - 1)[0] > 1.49);
    }

    #[test]
    fn errors() {
        assert!(DatasetSpec::from_kind("klein", 10, 0).is_err());
        assert!(generate::<f64>(&DatasetSpec::Sphere { n: 0 }).is_err());
        let spec = DatasetSpec::Lorenz63 { n: 10, dt: 0.0, spinup: 0, stride: 1 };
        assert!(generate::<f64>(&spec).is_err());
    }

    #[test]
    fn csv_parsing() {
        let pc: PointCloud<f64> = parse_point_cloud("0,1\n1,0", "mem").unwrap();
        assert_eq!(pc.points.shape(), (2, 2));
        let pc: PointCloud<f64> = parse_point_cloud("# c\nx,y\n0,1\n\n1,0\n", "mem").unwrap();
        assert_eq!(pc.len(), 2);
        match parse_point_cloud::<f64>("0,1\n1,0,2\n", "mem") {
            Err(SecError::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        match parse_point_cloud::<f64>("0,1\n1,zz\n", "mem") {
            Err(SecError::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        assert!(parse_point_cloud::<f64>("", "mem").is_err());
        assert!(parse_point_cloud::<f64>("# only\n", "mem").is_err());
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let pc: PointCloud<f64> = generate(&DatasetSpec::TorusR3 { n: 50, major: 2.0, minor: 1.0, seed: 3 }).unwrap();
        let back: PointCloud<f64> = parse_point_cloud(&pc.to_csv(), "mem").unwrap();
        assert_eq!(back.points, pc.points);
        assert_eq!(back.to_csv(), pc.to_csv());
    }

    #[test]
    fn duplicate_rows_rejected() {
        let m = Matrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert!(matches!(PointCloud::<f64>::new(m, "x"), Err(SecError::DuplicatePoints(0, 2))));
    }
}
