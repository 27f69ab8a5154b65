//! Layered settings: defaults < prior manifest < config file < flags.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use sec_core::datasets::DatasetSpec;
use sec_core::frames::FrameKind;
use sec_core::hodge1::{Method, DEFAULT_BETTI_THRESHOLD, DEFAULT_SOBOLEV_RTOL};
use sec_core::pipeline::{AnalysisParams, Bandwidth};

use crate::error::CliError;

/// Raw key → value pairs, keys in flag spelling (`betti-threshold`).
pub type Settings = BTreeMap<String, String>;

pub const KEYS: [&str; 16] = [
    "dataset",
    "input",
    "n",
    "eps",
    "m",
    "ms",
    "frame",
    "method",
    "theta",
    "rtol",
    "betti-threshold",
    "betti-gap",
    "out",
    "seed",
    "eigenform",
    "stride",
];

/// Manifest-only keys, accepted and ignored when a manifest is used as config.
pub const INFO_KEYS: [&str; 2] = ["command", "resolved_eps"];

pub const DEFAULT_OUT: &str = "sec_out";
pub const DEFAULT_THETA: f64 = 1.0;

/// Sample count used when `--n` is not given.
pub fn default_n(kind: &str) -> usize {
    match kind {
        "circle" => 101,
        "circle_random" => 500,
        "flat_torus" => 60,
        "lorenz63" => 3000,
        _ => 2000,
    }
}

#[derive(Clone, Debug, Default)]
pub struct Parsed {
    pub settings: Settings,
    pub info: BTreeMap<String, String>,
}

/// Parse `key=value` lines; `#` starts a comment.
pub fn parse_settings(text: &str, origin: &str) -> Result<Parsed, CliError> {
    let mut out = Parsed::default();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(CliError::Config(format!("{origin}:{}: expected key=value, got `{line}`", no + 1)));
        };
        let (k, v) = (k.trim(), v.trim().to_string());
        if INFO_KEYS.contains(&k) {
            out.info.insert(k.to_string(), v);
            continue;
        }
        let key = k.replace('_', "-");
        if !KEYS.contains(&key.as_str()) {
            return Err(CliError::Config(format!("{origin}:{}: unknown key `{k}`", no + 1)));
        }
        out.settings.insert(key, v);
    }
    Ok(out)
}

pub fn read_settings(path: &Path) -> Result<Parsed, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Core(sec_core::SecError::io(format!("reading {}", path.display()), e)))?;
    parse_settings(&text, &path.display().to_string())
}

/// Overlay `top` on `base`. A data source in `top` replaces the other kind in `base`.
pub fn merge(base: &mut Settings, top: &Settings) {
    if top.contains_key("input") {
        base.remove("dataset");
        base.remove("n");
    }
    if top.contains_key("dataset") {
        base.remove("input");
    }
    base.extend(top.iter().map(|(k, v)| (k.clone(), v.clone())));
}

#[derive(Clone, Debug, PartialEq)]
pub enum Source {
    Dataset { kind: String, n: usize },
    Input(PathBuf),
}

/// Fully resolved configuration of one invocation.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub source: Option<Source>,
    pub seed: u64,
    pub eps: Bandwidth,
    pub m: usize,
    pub ms: usize,
    pub frame: FrameKind,
    pub method: Method,
    pub theta: f64,
    pub rtol: f64,
    pub betti_threshold: f64,
    pub betti_gap: bool,
    pub out: PathBuf,
    pub eigenforms: Vec<usize>,
    pub stride: usize,
}

fn parse<T: std::str::FromStr>(s: &Settings, key: &str) -> Result<Option<T>, CliError> {
    match s.get(key) {
        None => Ok(None),
        Some(v) => v.parse::<T>().map(Some).map_err(|_| CliError::Config(format!("invalid value `{v}` for {key}"))),
    }
}

fn parse_bool(s: &Settings, key: &str) -> Result<bool, CliError> {
    match s.get(key).map(|v| v.as_str()) {
        None | Some("false") | Some("0") => Ok(false),
        Some("true") | Some("1") => Ok(true),
        Some(v) => Err(CliError::Config(format!("invalid value `{v}` for {key}, expected true or false"))),
    }
}

impl RunConfig {
    pub fn resolve(s: &Settings) -> Result<Self, CliError> {
        let source = match (s.get("dataset"), s.get("input")) {
            (Some(_), Some(_)) => return Err(CliError::Config("--dataset and --input are mutually exclusive".into())),
            (Some(kind), None) => {
                let n = parse(s, "n")?.unwrap_or_else(|| default_n(kind));
                // Validates the kind name.
                DatasetSpec::from_kind(kind, n, 0)?;
                Some(Source::Dataset { kind: kind.clone(), n })
            }
            (None, Some(p)) => Some(Source::Input(PathBuf::from(p))),
            (None, None) => None,
        };
        let eps: Bandwidth = match s.get("eps") {
            Some(v) => v.parse()?,
            None => Bandwidth::NeighborScale,
        };
        let frame = match s.get("frame").map(|v| v.as_str()) {
            None | Some("antisym") => FrameKind::Antisymmetric,
            Some("nonsym") => FrameKind::Nonsymmetric,
            Some(v) => return Err(CliError::Config(format!("invalid frame `{v}`, expected antisym or nonsym"))),
        };
        let theta = parse(s, "theta")?.unwrap_or(DEFAULT_THETA);
        let method = match s.get("method").map(|v| v.as_str()) {
            None | Some("intro") => Method::Intro,
            Some("theta") => Method::Theta(theta),
            Some(v) => return Err(CliError::Config(format!("invalid method `{v}`, expected intro or theta"))),
        };
        let eigenforms = match s.get("eigenform") {
            None => vec![0],
            Some(v) => v
                .split(',')
                .map(|x| x.trim().parse::<usize>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|_| CliError::Config(format!("invalid value `{v}` for eigenform")))?,
        };
        let cfg = RunConfig {
            source,
            seed: parse(s, "seed")?.unwrap_or(0),
            eps,
            m: parse(s, "m")?.unwrap_or(20),
            ms: parse(s, "ms")?.unwrap_or(100),
            frame,
            method,
            theta,
            rtol: parse(s, "rtol")?.unwrap_or(DEFAULT_SOBOLEV_RTOL),
            betti_threshold: parse(s, "betti-threshold")?.unwrap_or(DEFAULT_BETTI_THRESHOLD),
            betti_gap: parse_bool(s, "betti-gap")?,
            out: s.get("out").map(PathBuf::from).unwrap_or_else(|| PathBuf::from(DEFAULT_OUT)),
            eigenforms,
            stride: parse(s, "stride")?.unwrap_or(1),
        };
        cfg.params().validate()?;
        if cfg.stride == 0 {
            return Err(CliError::Config("stride must be at least 1".into()));
        }
        if !(cfg.betti_threshold > 0.0 && cfg.betti_threshold.is_finite()) {
            return Err(CliError::Config(format!("betti threshold must be positive, got {}", cfg.betti_threshold)));
        }
        if !(cfg.theta > 0.0 && cfg.theta.is_finite()) {
            return Err(CliError::Config(format!("theta must be positive, got {}", cfg.theta)));
        }
        Ok(cfg)
    }

    pub fn params(&self) -> AnalysisParams {
        AnalysisParams {
            eps: self.eps,
            m: self.m,
            ms: self.ms,
            kind: self.frame,
            method: self.method,
            rtol: self.rtol,
            ..Default::default()
        }
    }

    pub fn dataset_spec(&self) -> Result<Option<DatasetSpec>, CliError> {
        match &self.source {
            Some(Source::Dataset { kind, n }) => Ok(Some(DatasetSpec::from_kind(kind, *n, self.seed)?)),
            _ => Ok(None),
        }
    }

    /// Every resolved setting as `key=value`, usable as a config file.
    pub fn manifest(&self, command: &str, resolved_eps: Option<f64>) -> String {
        let mut lines = vec![format!("command={command}")];
        match &self.source {
            Some(Source::Dataset { kind, n }) => {
                lines.push(format!("dataset={kind}"));
                lines.push(format!("n={n}"));
            }
            Some(Source::Input(p)) => lines.push(format!("input={}", p.display())),
            None => {}
        }
        lines.push(format!("seed={}", self.seed));
        lines.push(format!("eps={}", self.eps.name()));
        if let Some(e) = resolved_eps {
            lines.push(format!("resolved_eps={e:.16e}"));
        }
        lines.push(format!("m={}", self.m));
        lines.push(format!("ms={}", self.ms));
        let frame = match self.frame {
            FrameKind::Antisymmetric => "antisym",
            FrameKind::Nonsymmetric => "nonsym",
        };
        lines.push(format!("frame={frame}"));
        lines.push(format!("method={}", self.method.name()));
        lines.push(format!("theta={}", self.theta));
        lines.push(format!("rtol={}", self.rtol));
        lines.push(format!("betti-threshold={}", self.betti_threshold));
        lines.push(format!("betti-gap={}", self.betti_gap));
        lines.push(format!("out={}", self.out.display()));
        let ef: Vec<String> = self.eigenforms.iter().map(|k| k.to_string()).collect();
        lines.push(format!("eigenform={}", ef.join(",")));
        lines.push(format!("stride={}", self.stride));
        let mut text = lines.join("\n");
        text.push('\n');
        text
    }
}
