//! Experiment configuration as flat `key = value` text with `#` comments.
//!
//! ```text
//! # single-layer run
//! eps = 0.2
//! tau = 6.0
//! t_end = 2600
//! initial = perturbed-single-layer
//! ```

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::simulate::{
    Bump, Grid, InitialKind, RunOptions, DEFAULT_DT, DEFAULT_NODES, DEFAULT_XI0, MAX_DT,
};
use crate::stationary::Params;

pub const PRESETS: [&str; 4] = ["a1", "b1", "c1", "d1"];

#[derive(Clone, Debug, PartialEq)]
pub enum InitialSpec {
    PerturbedSingleLayer,
    NearTwoLayer,
    /// Node values read from a file, one number per line.
    Custom {
        samples: PathBuf,
    },
}

impl InitialSpec {
    fn label(&self) -> &'static str {
        match self {
            InitialSpec::PerturbedSingleLayer => "perturbed-single-layer",
            InitialSpec::NearTwoLayer => "near-two-layer",
            InitialSpec::Custom { .. } => "custom",
        }
    }

    fn default_n(&self) -> u32 {
        match self {
            InitialSpec::NearTwoLayer => 2,
            _ => 1,
        }
    }

    fn default_bump(&self) -> Bump {
        match self {
            InitialSpec::NearTwoLayer => Bump::TWO_LAYER_DEFAULT,
            _ => Bump::SINGLE_LAYER_DEFAULT,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub eps: f64,
    pub tau: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    /// Layer count of the stationary solution the run is compared against.
    pub n: u32,
    pub nodes: usize,
    pub dt: f64,
    pub t_end: f64,
    pub initial: InitialSpec,
    pub bump: Bump,
    pub xi0: f64,
    pub record_stride: usize,
    pub snapshot_stride: Option<usize>,
    pub output_dir: Option<PathBuf>,
}

const KEYS: [&str; 17] = [
    "eps",
    "tau",
    "alpha",
    "beta",
    "gamma",
    "n",
    "nodes",
    "dt",
    "t_end",
    "initial",
    "samples",
    "bump_height",
    "bump_center",
    "bump_width",
    "xi0",
    "record_stride",
    "snapshot_stride",
];

impl ExperimentConfig {
    /// One of the four table presets at `α = β = γ = 0.5`.
    pub fn preset(name: &str) -> Option<Self> {
        let (eps, tau, initial, t_end) = match name {
            "a1" => (0.2, 6.0, InitialSpec::PerturbedSingleLayer, 2600.0),
            "b1" => (0.2, 6.7, InitialSpec::PerturbedSingleLayer, 600.0),
            "c1" => (0.1, 6.0, InitialSpec::NearTwoLayer, 1000.0),
            "d1" => (0.1, 6.7, InitialSpec::NearTwoLayer, 600.0),
            _ => return None,
        };
        Some(Self::with_defaults(eps, tau, t_end, initial))
    }

    pub fn with_defaults(eps: f64, tau: f64, t_end: f64, initial: InitialSpec) -> Self {
        Self {
            eps,
            tau,
            alpha: 0.5,
            beta: 0.5,
            gamma: 0.5,
            n: initial.default_n(),
            nodes: DEFAULT_NODES,
            dt: DEFAULT_DT,
            t_end,
            bump: initial.default_bump(),
            initial,
            xi0: DEFAULT_XI0,
            record_stride: 10,
            snapshot_stride: None,
            output_dir: None,
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut values: BTreeMap<&str, (usize, &str)> = BTreeMap::new();
        let mut problems = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                problems.push(format!(
                    "line {}: expected `key = value`, got {line:?}",
                    idx + 1
                ));
                continue;
            };
            let (key, value) = (key.trim(), value.trim());
            if key == "output_dir" || KEYS.contains(&key) {
                if values.insert(key, (idx + 1, value)).is_some() {
                    problems.push(format!("line {}: duplicate key `{key}`", idx + 1));
                }
            } else {
                problems.push(format!("line {}: unknown key `{key}`", idx + 1));
            }
        }

        fn get<T: std::str::FromStr>(
            values: &BTreeMap<&str, (usize, &str)>,
            problems: &mut Vec<String>,
            key: &str,
        ) -> Option<T>
        where
            T::Err: std::fmt::Display,
        {
            let (line, v) = values.get(key)?;
            match v.parse::<T>() {
                Ok(x) => Some(x),
                Err(e) => {
                    problems.push(format!("line {line}: `{key}`: cannot parse {v:?}: {e}"));
                    None
                }
            }
        }

        let initial = match values.get("initial").map(|(l, v)| (*l, *v)) {
            None | Some((_, "perturbed-single-layer")) => InitialSpec::PerturbedSingleLayer,
            Some((_, "near-two-layer")) => InitialSpec::NearTwoLayer,
            Some((line, "custom")) => match values.get("samples") {
                Some((_, path)) => InitialSpec::Custom {
                    samples: PathBuf::from(path),
                },
                None => {
                    problems.push(format!(
                        "line {line}: initial = custom needs a `samples` path"
                    ));
                    InitialSpec::PerturbedSingleLayer
                }
            },
            Some((line, other)) => {
                problems.push(format!(
                    "line {line}: unknown initial kind {other:?} \
                     (perturbed-single-layer | near-two-layer | custom)"
                ));
                InitialSpec::PerturbedSingleLayer
            }
        };

        let require = |key: &str, problems: &mut Vec<String>| -> f64 {
            let v = get::<f64>(&values, problems, key);
            if v.is_none() && !values.contains_key(key) {
                problems.push(format!("missing required key `{key}`"));
            }
            v.unwrap_or(f64::NAN)
        };
        let eps = require("eps", &mut problems);
        let tau = require("tau", &mut problems);
        let t_end = require("t_end", &mut problems);

        let mut cfg = Self::with_defaults(eps, tau, t_end, initial);
        macro_rules! optional {
            ($field:expr, $key:literal, $ty:ty) => {
                if let Some(v) = get::<$ty>(&values, &mut problems, $key) {
                    $field = v;
                }
            };
        }
        optional!(cfg.alpha, "alpha", f64);
        optional!(cfg.beta, "beta", f64);
        optional!(cfg.gamma, "gamma", f64);
        optional!(cfg.n, "n", u32);
        optional!(cfg.nodes, "nodes", usize);
        optional!(cfg.dt, "dt", f64);
        optional!(cfg.bump.height, "bump_height", f64);
        optional!(cfg.bump.center, "bump_center", f64);
        optional!(cfg.bump.width, "bump_width", f64);
        optional!(cfg.xi0, "xi0", f64);
        optional!(cfg.record_stride, "record_stride", usize);
        if let Some(s) = get::<usize>(&values, &mut problems, "snapshot_stride") {
            cfg.snapshot_stride = Some(s);
        }
        if let Some((_, dir)) = values.get("output_dir") {
            cfg.output_dir = Some(PathBuf::from(dir));
        }

        if problems.is_empty() {
            problems = cfg.problems();
        } else {
            // Report semantic problems too, skipping fields that failed to parse.
            problems.extend(cfg.problems().into_iter().filter(|p| !p.contains("NaN")));
        }
        if problems.is_empty() {
            Ok(cfg)
        } else {
            Err(Error::Config(problems))
        }
    }

    /// Reads a config; a relative custom-samples path is taken relative to the file.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut cfg = Self::parse(&text)?;
        if let InitialSpec::Custom { samples } = &mut cfg.initial {
            if samples.is_relative() {
                if let Some(dir) = path.parent() {
                    *samples = dir.join(&*samples);
                }
            }
        }
        Ok(cfg)
    }

    /// Every precondition violated by this configuration.
    #[allow(clippy::neg_cmp_op_on_partial_ord)] // NaN must count as a violation
    pub fn problems(&self) -> Vec<String> {
        let mut out = Vec::new();
        if let Err(Error::InvalidParams(msg)) =
            Params::new(self.eps, self.tau, self.alpha, self.beta, self.gamma)
        {
            out.extend(msg.split("; ").map(str::to_owned));
        }
        if self.n == 0 {
            out.push("n must be at least 1".into());
        } else if self.eps > 0.0 && self.eps >= 1.0 / (self.n as f64 * PI) {
            out.push(format!(
                "eps = {} admits no {}-layer stationary solution (needs eps < {})",
                self.eps,
                self.n,
                1.0 / (self.n as f64 * PI)
            ));
        }
        match self.initial {
            InitialSpec::PerturbedSingleLayer if self.n != 1 => out.push(format!(
                "initial = perturbed-single-layer needs n = 1, got {}",
                self.n
            )),
            InitialSpec::NearTwoLayer if self.n != 2 => out.push(format!(
                "initial = near-two-layer needs n = 2, got {}",
                self.n
            )),
            _ => {}
        }
        if self.nodes < 3 {
            out.push(format!("nodes = {} must be at least 3", self.nodes));
        }
        if !(self.dt > 0.0 && self.dt <= MAX_DT) {
            out.push(format!("dt = {} must lie in (0, {MAX_DT}]", self.dt));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            out.push(format!(
                "t_end = {} must be positive: nothing to run",
                self.t_end
            ));
        }
        if !(self.bump.width > 0.0) {
            out.push(format!("bump_width = {} must be positive", self.bump.width));
        }
        if !self.bump.height.is_finite() || !self.bump.center.is_finite() || !self.xi0.is_finite() {
            out.push("bump_height, bump_center and xi0 must be finite".into());
        }
        if self.record_stride == 0 {
            out.push("record_stride must be positive".into());
        }
        if self.snapshot_stride == Some(0) {
            out.push("snapshot_stride must be positive".into());
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let problems = self.problems();
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(problems))
        }
    }

    /// The config as text that [`ExperimentConfig::parse`] reads back identically.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: &dyn std::fmt::Display| {
            let _ = writeln!(s, "{k} = {v}");
        };
        kv("eps", &self.eps);
        kv("tau", &self.tau);
        kv("alpha", &self.alpha);
        kv("beta", &self.beta);
        kv("gamma", &self.gamma);
        kv("n", &self.n);
        kv("nodes", &self.nodes);
        kv("dt", &self.dt);
        kv("t_end", &self.t_end);
        kv("initial", &self.initial.label());
        if let InitialSpec::Custom { samples } = &self.initial {
            kv("samples", &samples.display());
        }
        kv("bump_height", &self.bump.height);
        kv("bump_center", &self.bump.center);
        kv("bump_width", &self.bump.width);
        kv("xi0", &self.xi0);
        kv("record_stride", &self.record_stride);
        if let Some(st) = self.snapshot_stride {
            kv("snapshot_stride", &st);
        }
        if let Some(dir) = &self.output_dir {
            kv("output_dir", &dir.display());
        }
        s
    }

    pub fn params(&self) -> Result<Params> {
        Params::new(self.eps, self.tau, self.alpha, self.beta, self.gamma)
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.nodes)
    }

    pub fn initial_kind(&self) -> Result<InitialKind> {
        Ok(match &self.initial {
            InitialSpec::PerturbedSingleLayer => InitialKind::PerturbedSingleLayer(self.bump),
            InitialSpec::NearTwoLayer => InitialKind::NearTwoLayer(self.bump),
            InitialSpec::Custom { samples } => InitialKind::Custom(read_samples(samples)?),
        })
    }

    pub fn run_options(&self) -> RunOptions {
        RunOptions {
            dt: self.dt,
            t_end: self.t_end,
            record_stride: self.record_stride,
            snapshot_stride: self.snapshot_stride,
        }
    }
}

/// Node values, one per line or comma separated; `#` starts a comment.
pub fn read_samples(path: &Path) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path)?;
    let mut out = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("");
        for field in line.split(',').map(str::trim).filter(|f| !f.is_empty()) {
            out.push(field.parse::<f64>().map_err(|e| Error::Parse {
                line: idx + 1,
                msg: format!("{field:?}: {e}"),
            })?);
        }
    }
    Ok(out)
}
