//! Flat `key = value` experiment configuration.
//!
//! Blank lines and `#` comments are ignored. Recognized keys:
//!
//! | key | default | meaning |
//! |-----|---------|---------|
//! | `seed` | 0 | master seed |
//! | `threads` | 0 | worker threads, 0 = all cores |
//! | `out_dir` | `out` | artifact directory |
//! | `cache_dir` | unset | results cache directory |
//! | `restarts` | 20 | multistart restarts |
//! | `iterations` | 200 | RMSprop steps per restart |
//! | `learning_rate` | 0.01 | RMSprop step size |
//! | `rms_decay` | 0.99 | RMSprop averaging factor |
//! | `rms_epsilon` | 1e-8 | RMSprop denominator guard |
//! | `gradient_tolerance` | 0.01 | convergence threshold on the gradient norm |
//! | `nodes` | 20 | ensemble graph size |
//! | `parity_levels` | 11 | ensemble parity levels |
//! | `graphs_per_level` | 10 | ensemble graphs per level |
//! | `max_degree` | 6 | degree cap for generated graphs |
//! | `resolution` | 64 | landscape grid points per axis |
//! | `catalog_max_degree` | 6 | degree cap of the class catalog |
//! | `regular_only` | false | restrict the catalog to `i = j` |
//! | `donors` | 100 | donors in `ensemble-transfer` |
//! | `donor_min_nodes` | 6 | smallest donor |
//! | `donor_max_nodes` | 20 | largest donor |
//! | `ratio_basis` | `qaoa-optimum` | SPS ratio denominator, or `maxcut` |
//! | `radius` | 0.25 | center classification radius |
//! | `centers` | bundled | center calibration JSON |
//! | `heuristic_effort` | 100 | MaxCut heuristic restarts beyond the exact cap |

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::centers::{RatioBasis, DEFAULT_RADIUS};
use crate::error::{Error, Result};
use crate::experiments::ensemble::EnsembleSpec;
use crate::optimizer::OptimizerConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub threads: usize,
    pub out_dir: PathBuf,
    pub cache_dir: Option<PathBuf>,
    pub restarts: usize,
    pub iterations: usize,
    pub learning_rate: f64,
    pub rms_decay: f64,
    pub rms_epsilon: f64,
    pub gradient_tolerance: f64,
    pub nodes: usize,
    pub parity_levels: usize,
    pub graphs_per_level: usize,
    pub max_degree: usize,
    pub resolution: usize,
    pub catalog_max_degree: usize,
    pub regular_only: bool,
    pub donors: usize,
    pub donor_min_nodes: usize,
    pub donor_max_nodes: usize,
    pub ratio_basis: RatioBasis,
    pub radius: f64,
    pub centers: Option<PathBuf>,
    pub heuristic_effort: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let opt = OptimizerConfig::default();
        let ens = EnsembleSpec::default();
        Self {
            seed: 0,
            threads: 0,
            out_dir: PathBuf::from("out"),
            cache_dir: None,
            restarts: opt.restarts,
            iterations: opt.iterations,
            learning_rate: opt.learning_rate,
            rms_decay: opt.rms_decay,
            rms_epsilon: opt.rms_epsilon,
            gradient_tolerance: opt.gradient_tolerance,
            nodes: ens.nodes,
            parity_levels: ens.parity_levels,
            graphs_per_level: ens.graphs_per_level,
            max_degree: ens.max_degree,
            resolution: 64,
            catalog_max_degree: 6,
            regular_only: false,
            donors: 100,
            donor_min_nodes: 6,
            donor_max_nodes: 20,
            ratio_basis: RatioBasis::default(),
            radius: DEFAULT_RADIUS,
            centers: None,
            heuristic_effort: 100,
        }
    }
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value
        .parse()
        .map_err(|e| Error::Config(format!("{key} = {value}: {e}")))
}

impl ExperimentConfig {
    /// Applies one `key = value` assignment.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key.trim() {
            "seed" => self.seed = parse(key, v)?,
            "threads" => self.threads = parse(key, v)?,
            "out_dir" => self.out_dir = PathBuf::from(v),
            "cache_dir" => self.cache_dir = Some(PathBuf::from(v)),
            "restarts" => self.restarts = parse(key, v)?,
            "iterations" => self.iterations = parse(key, v)?,
            "learning_rate" => self.learning_rate = parse(key, v)?,
            "rms_decay" => self.rms_decay = parse(key, v)?,
            "rms_epsilon" => self.rms_epsilon = parse(key, v)?,
            "gradient_tolerance" => self.gradient_tolerance = parse(key, v)?,
            "nodes" => self.nodes = parse(key, v)?,
            "parity_levels" => self.parity_levels = parse(key, v)?,
            "graphs_per_level" => self.graphs_per_level = parse(key, v)?,
            "max_degree" => self.max_degree = parse(key, v)?,
            "resolution" => self.resolution = parse(key, v)?,
            "catalog_max_degree" => self.catalog_max_degree = parse(key, v)?,
            "regular_only" => self.regular_only = parse(key, v)?,
            "donors" => self.donors = parse(key, v)?,
            "donor_min_nodes" => self.donor_min_nodes = parse(key, v)?,
            "donor_max_nodes" => self.donor_max_nodes = parse(key, v)?,
            "ratio_basis" => self.ratio_basis = parse(key, v)?,
            "radius" => self.radius = parse(key, v)?,
            "centers" => self.centers = Some(PathBuf::from(v)),
            "heuristic_effort" => self.heuristic_effort = parse(key, v)?,
            other => return Err(Error::Config(format!("unknown key `{other}`"))),
        }
        Ok(())
    }

    /// Parses `key = value` lines on top of the defaults.
    pub fn from_kv(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        cfg.apply_kv(text)?;
        Ok(cfg)
    }

    pub fn apply_kv(&mut self, text: &str) -> Result<()> {
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or(Error::Parse {
                line: n + 1,
                msg: format!("expected `key = value`, got `{line}`"),
            })?;
            self.set(k, v)?;
        }
        Ok(())
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        Self::from_kv(&std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
    }

    pub fn to_kv(&self) -> String {
        let value = serde_json::to_value(self).expect("config serializes");
        let mut out = String::new();
        for (k, v) in value.as_object().expect("config is an object") {
            let text = match v {
                serde_json::Value::Null => continue,
                serde_json::Value::String(s) => s.clone(),
                other => other.to_string(),
            };
            out.push_str(&format!("{k} = {text}\n"));
        }
        out
    }

    pub fn optimizer(&self) -> OptimizerConfig {
        OptimizerConfig {
            restarts: self.restarts,
            iterations: self.iterations,
            learning_rate: self.learning_rate,
            rms_decay: self.rms_decay,
            rms_epsilon: self.rms_epsilon,
            gradient_tolerance: self.gradient_tolerance,
            seed: self.seed,
        }
    }

    pub fn ensemble(&self) -> EnsembleSpec {
        EnsembleSpec {
            nodes: self.nodes,
            parity_levels: self.parity_levels,
            graphs_per_level: self.graphs_per_level,
            max_degree: self.max_degree,
            seed: self.seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.optimizer().validate()?;
        if self.resolution == 0 {
            return Err(Error::Config("resolution must be positive".into()));
        }
        if self.donor_min_nodes < 2 || self.donor_min_nodes > self.donor_max_nodes {
            return Err(Error::Config("need 2 <= donor_min_nodes <= donor_max_nodes".into()));
        }
        if !(self.radius > 0.0) {
            return Err(Error::Config("radius must be positive".into()));
        }
        Ok(())
    }

    /// Hash over every setting that can change results. Paths and the
    /// thread count are excluded.
    pub fn result_hash(&self) -> String {
        let mut canonical = self.clone();
        canonical.threads = 0;
        canonical.out_dir = PathBuf::new();
        canonical.cache_dir = None;
        let json = serde_json::to_string(&canonical).expect("config serializes");
        hex::encode(Sha256::digest(json.as_bytes()))
    }
}
