//! Ambient arrow fields from frame coefficients, with CSV and SVG export.

use std::fmt::Write as _;
use std::path::Path;

use crate::datasets::PointCloud;
use crate::diffusion_maps::SpectralBasis;
use crate::error::{Result, SecError};
use crate::frames::{frame_to_operator, FrameCoefficients, OperatorRep};
use crate::numerics::Matrix;
use crate::scalar::Real;
use crate::spectral_tensors::SecTensorSet;

/// Vectors attached to sample points.
#[derive(Clone, Debug, PartialEq)]
pub struct ArrowField<T> {
    pub base: Matrix<T>,
    pub arrows: Matrix<T>,
}

impl<T: Real> ArrowField<T> {
    pub fn new(base: Matrix<T>, arrows: Matrix<T>) -> Result<Self> {
        if base.shape() != arrows.shape() {
            return Err(SecError::Shape(format!(
                "base {}x{} vs arrows {}x{}",
                base.rows(),
                base.cols(),
                arrows.rows(),
                arrows.cols()
            )));
        }
        if !base.all_finite() || !arrows.all_finite() {
            return Err(SecError::NonFinite("arrow field"));
        }
        Ok(ArrowField { base, arrows })
    }

    pub fn len(&self) -> usize {
        self.base.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.base.rows() == 0
    }

    pub fn dim(&self) -> usize {
        self.base.cols()
    }

    pub fn arrow_norm(&self, i: usize) -> T {
        self.arrows.row(i).iter().map(|&x| x * x).sum::<T>().sqrt()
    }

    /// Header `x1..xn,v1..vn`, then one row per sample.
    pub fn to_csv(&self) -> String {
        let n = self.dim();
        let mut out = String::new();
        let head: Vec<String> = (1..=n).map(|k| format!("x{k}")).chain((1..=n).map(|k| format!("v{k}"))).collect();
        out.push_str(&head.join(","));
        out.push('\n');
        for i in 0..self.len() {
            let vals = self.base.row(i).iter().chain(self.arrows.row(i));
            for (k, x) in vals.enumerate() {
                if k > 0 {
                    out.push(',');
                }
                write!(out, "{:.16e}", x.as_f64()).unwrap();
            }
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let parse_err = |line: usize, msg: String| SecError::Parse { path: "arrows".into(), line, msg };
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or_else(|| parse_err(1, "empty arrow file".into()))?;
        let width = header.split(',').count();
        if width == 0 || width % 2 != 0 {
            return Err(parse_err(1, format!("expected an even number of columns, got {width}")));
        }
        let n = width / 2;
        let (mut base, mut arrows) = (Vec::new(), Vec::new());
        for (ln, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let vals: std::result::Result<Vec<f64>, _> = line.split(',').map(|f| f.trim().parse::<f64>()).collect();
            let vals = vals.map_err(|e| parse_err(ln + 1, e.to_string()))?;
            if vals.len() != width {
                return Err(parse_err(ln + 1, format!("{} fields, expected {width}", vals.len())));
            }
            base.push(vals[..n].iter().map(|&x| T::lit(x)).collect());
            arrows.push(vals[n..].iter().map(|&x| T::lit(x)).collect());
        }
        let (b, a) = (Matrix::from_rows(&base)?, Matrix::from_rows(&arrows)?);
        if b.rows() == 0 {
            return Err(parse_err(1, "no data rows".into()));
        }
        ArrowField::new(b, a)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv()).map_err(|e| SecError::io(path.display().to_string(), e))
    }
}

/// Coordinate Fourier coefficients X̂ (n×M): column j is Σ_i w_i x_i φ_j(x_i).
pub fn coordinate_coeffs<T: Real>(cloud: &PointCloud<T>, basis: &SpectralBasis<T>) -> Result<Matrix<T>> {
    if cloud.len() != basis.n_points() {
        return Err(SecError::Shape(format!("cloud has {} points, basis {}", cloud.len(), basis.n_points())));
    }
    let m = basis.m;
    let mut xhat = Matrix::zeros(cloud.dim(), m);
    for i in 0..cloud.len() {
        let w = basis.weights[i];
        let x = cloud.point(i);
        let phi = &basis.phi.row(i)[..m];
        for (d, &xd) in x.iter().enumerate() {
            let wx = w * xd;
            for (j, &p) in phi.iter().enumerate() {
                xhat[(d, j)] += wx * p;
            }
        }
    }
    Ok(xhat)
}

/// Arrows Ṽ = X̂ Vᵀ Φᵀ for an operator matrix V.
pub fn pushforward_operator<T: Real>(
    v: &OperatorRep<T>,
    basis: &SpectralBasis<T>,
    cloud: &PointCloud<T>,
) -> Result<ArrowField<T>> {
    let m = basis.m;
    if v.matrix.shape() != (m, m) {
        return Err(SecError::Shape(format!("operator is {}x{}, basis M = {m}", v.matrix.rows(), v.matrix.cols())));
    }
    let xhat = coordinate_coeffs(cloud, basis)?;
    // (X̂ Vᵀ)_{d j} = Σ_k X̂_{d k} V_{j k}
    let xv = xhat.matmul(&v.matrix.transpose())?;
    let arrows = Matrix::from_fn(cloud.len(), cloud.dim(), |i, d| {
        let phi = &basis.phi.row(i)[..m];
        crate::numerics::dot(xv.row(d), phi)
    });
    ArrowField::new(cloud.points.clone(), arrows)
}

pub fn pushforward<T: Real>(
    a: &FrameCoefficients<T>,
    tensors: &SecTensorSet<T>,
    basis: &SpectralBasis<T>,
    cloud: &PointCloud<T>,
) -> Result<ArrowField<T>> {
    if tensors.m != basis.m {
        return Err(SecError::Shape(format!("tensors have M = {}, basis M = {}", tensors.m, basis.m)));
    }
    let v = frame_to_operator(a, tensors)?;
    pushforward_operator(&v, basis, cloud)
}

/// Drawing parameters for [`to_svg`].
#[derive(Clone, Debug, PartialEq)]
pub struct SvgOptions {
    pub stride: usize,
    /// Coordinates used for the horizontal and vertical axes.
    pub axes: (usize, usize),
    /// Arrow length multiplier in data units; `None` makes the longest drawn
    /// arrow one tenth of the data extent.
    pub scale: Option<f64>,
}

impl Default for SvgOptions {
    fn default() -> Self {
        SvgOptions { stride: 1, axes: (0, 1), scale: None }
    }
}

/// SVG 1.1 quiver plot on a unit-square viewBox.
pub fn to_svg<T: Real>(field: &ArrowField<T>, opts: &SvgOptions) -> Result<String> {
    if opts.stride == 0 {
        return Err(SecError::InvalidArgument("stride must be at least 1".into()));
    }
    let (ax, ay) = opts.axes;
    let dim = field.dim();
    if ax >= dim || ay >= dim || ax == ay {
        return Err(SecError::InvalidArgument(format!("axis pair ({ax},{ay}) invalid for dimension {dim}")));
    }
    let pt = |i: usize| (field.base[(i, ax)].as_f64(), field.base[(i, ay)].as_f64());
    let vec = |i: usize| (field.arrows[(i, ax)].as_f64(), field.arrows[(i, ay)].as_f64());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for i in 0..field.len() {
        let (x, y) = pt(i);
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    let extent = (x1 - x0).max(y1 - y0).max(f64::MIN_POSITIVE);
    let drawn: Vec<usize> = (0..field.len()).step_by(opts.stride).collect();
    let longest = drawn.iter().map(|&i| vec(i).0.hypot(vec(i).1)).fold(0.0, f64::max);
    let scale = match opts.scale {
        Some(s) => s,
        None if longest > 0.0 => 0.1 * extent / longest,
        None => 1.0,
    };
    // Data → unit square with a 5% margin, y pointing up.
    let fit = 0.9 / extent;
    let cx = 0.5 - fit * 0.5 * (x0 + x1);
    let cy = 0.5 + fit * 0.5 * (y0 + y1);
    let map = |x: f64, y: f64| (cx + fit * x, cy - fit * y);

    let mut s = String::new();
    s.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    s.push_str(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" viewBox=\"0 0 1 1\" width=\"600\" height=\"600\">\n",
    );
    writeln!(
        s,
        "<metadata>axes={ax},{ay} stride={} scale={scale:.16e} points={} arrows={}</metadata>",
        opts.stride,
        field.len(),
        drawn.len()
    )
    .unwrap();
    s.push_str("<rect x=\"0\" y=\"0\" width=\"1\" height=\"1\" fill=\"white\"/>\n");
    s.push_str("<g id=\"points\" fill=\"#888888\">\n");
    for i in 0..field.len() {
        let (u, v) = map(pt(i).0, pt(i).1);
        writeln!(s, "<circle cx=\"{u:.6}\" cy=\"{v:.6}\" r=\"0.003\"/>").unwrap();
    }
    s.push_str("</g>\n<g id=\"arrows\" stroke=\"#1f4e9e\" stroke-width=\"0.003\">\n");
    for &i in &drawn {
        let (px, py) = pt(i);
        let (vx, vy) = vec(i);
        if vx == 0.0 && vy == 0.0 {
            continue;
        }
        let (u0, v0) = map(px, py);
        let (u1, v1) = map(px + scale * vx, py + scale * vy);
        writeln!(s, "<line x1=\"{u0:.6}\" y1=\"{v0:.6}\" x2=\"{u1:.6}\" y2=\"{v1:.6}\"/>").unwrap();
    }
    s.push_str("</g>\n</svg>\n");
    Ok(s)
}

pub fn write_svg<T: Real>(field: &ArrowField<T>, path: &Path, opts: &SvgOptions) -> Result<()> {
    std::fs::write(path, to_svg(field, opts)?).map_err(|e| SecError::io(path.display().to_string(), e))
}
