//! Multistart RMSprop ascent over `(gamma, beta)`.

use std::f64::consts::{PI, TAU};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::energy::Objective;
use crate::error::{Error, Result};
use crate::rng::SplitMix64;
use crate::simulator::QaoaParams;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub restarts: usize,
    pub iterations: usize,
    pub learning_rate: f64,
    pub rms_decay: f64,
    pub rms_epsilon: f64,
    /// Gradient norm under which a trajectory counts as converged.
    pub gradient_tolerance: f64,
    pub seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            restarts: 20,
            iterations: 200,
            learning_rate: 0.01,
            rms_decay: 0.99,
            rms_epsilon: 1e-8,
            gradient_tolerance: 1e-2,
            seed: 0,
        }
    }
}

impl OptimizerConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 {
            return Err(Error::Config("restarts must be at least 1".into()));
        }
        if !(self.learning_rate > 0.0) {
            return Err(Error::Config("learning_rate must be positive".into()));
        }
        if !(self.rms_decay > 0.0 && self.rms_decay < 1.0) {
            return Err(Error::Config("rms_decay must lie in (0, 1)".into()));
        }
        if !(self.rms_epsilon > 0.0) || !(self.gradient_tolerance >= 0.0) {
            return Err(Error::Config("rms_epsilon and gradient_tolerance must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Optimum {
    pub gamma: f64,
    pub beta: f64,
    pub energy: f64,
    pub converged: bool,
}

impl Optimum {
    pub fn params(&self) -> QaoaParams {
        QaoaParams::new(self.gamma, self.beta)
    }
}

/// Result of one multistart run, ordered by restart index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimaSet {
    pub subject: String,
    pub config: OptimizerConfig,
    pub optima: Vec<Optimum>,
    pub best_index: usize,
}

impl OptimaSet {
    pub fn from_optima(subject: impl Into<String>, config: OptimizerConfig, optima: Vec<Optimum>) -> Result<Self> {
        let best_index = best_index(&optima)?;
        Ok(Self {
            subject: subject.into(),
            config,
            optima,
            best_index,
        })
    }

    pub fn best(&self) -> &Optimum {
        &self.optima[self.best_index]
    }

    pub fn params(&self) -> impl Iterator<Item = QaoaParams> + '_ {
        self.optima.iter().map(Optimum::params)
    }

    pub fn len(&self) -> usize {
        self.optima.len()
    }

    pub fn is_empty(&self) -> bool {
        self.optima.is_empty()
    }
}

/// Index of the highest energy; ties go to the lowest index.
fn best_index(optima: &[Optimum]) -> Result<usize> {
    if optima.is_empty() {
        return Err(Error::Degenerate("empty optima set".into()));
    }
    let mut best = 0;
    for (k, o) in optima.iter().enumerate().skip(1) {
        if o.energy > optima[best].energy {
            best = k;
        }
    }
    Ok(best)
}

pub fn best(optima: &OptimaSet) -> Result<(QaoaParams, f64)> {
    let k = best_index(&optima.optima)?;
    let o = &optima.optima[k];
    Ok((o.params(), o.energy))
}

/// Initial points drawn in restart order from a single seeded stream, so the
/// result does not depend on how restarts are scheduled.
pub fn initial_points(cfg: &OptimizerConfig) -> Vec<QaoaParams> {
    let mut rng = SplitMix64::new(cfg.seed);
    (0..cfg.restarts)
        .map(|_| QaoaParams::new(rng.gen_range(0.0..TAU), rng.gen_range(0.0..PI)))
        .collect()
}

pub fn optimize(subject_id: impl Into<String>, objective: &Objective, cfg: &OptimizerConfig) -> Result<OptimaSet> {
    cfg.validate()?;
    let optima = initial_points(cfg)
        .into_par_iter()
        .map(|start| ascend(objective, start, cfg))
        .collect();
    OptimaSet::from_optima(subject_id, cfg.clone(), optima)
}

/// One RMSprop trajectory; returns the best point it visited.
pub fn ascend(objective: &Objective, start: QaoaParams, cfg: &OptimizerConfig) -> Optimum {
    let mut x = [start.gamma, start.beta];
    let mut mean_square = [0.0; 2];
    let mut best = (objective.energy(start), start);
    for _ in 0..cfg.iterations {
        let (dg, db) = objective.gradient(QaoaParams::new(x[0], x[1]));
        if dg.hypot(db) <= cfg.gradient_tolerance {
            break;
        }
        for (k, g) in [dg, db].into_iter().enumerate() {
            mean_square[k] = cfg.rms_decay * mean_square[k] + (1.0 - cfg.rms_decay) * g * g;
            x[k] += cfg.learning_rate * g / (mean_square[k].sqrt() + cfg.rms_epsilon);
        }
        let p = QaoaParams::new(x[0], x[1]);
        let e = objective.energy(p);
        if e > best.0 {
            best = (e, p);
        }
    }
    let (energy, p) = best;
    let (dg, db) = objective.gradient(p);
    let p = p.canonical();
    Optimum {
        gamma: p.gamma,
        beta: p.beta,
        energy,
        converged: dg.hypot(db) <= cfg.gradient_tolerance,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::LightconeClass;

    fn entry(energy: f64) -> Optimum {
        Optimum {
            gamma: 0.0,
            beta: 0.0,
            energy,
            converged: true,
        }
    }

    #[test]
    fn best_selection() {
        let cfg = OptimizerConfig::default();
        let set = OptimaSet::from_optima("x", cfg.clone(), vec![entry(0.4), entry(0.9), entry(0.7)]).unwrap();
        assert_eq!(set.best_index, 1);
        assert_eq!(best(&set).unwrap().1, 0.9);
        let ties = OptimaSet::from_optima("x", cfg.clone(), vec![entry(0.5); 3]).unwrap();
        assert_eq!(ties.best_index, 0);
        let single = OptimaSet::from_optima("x", cfg.clone(), vec![entry(0.2)]).unwrap();
        assert_eq!(single.best_index, 0);
        assert!(OptimaSet::from_optima("x", cfg, vec![]).is_err());
    }

    #[test]
    fn zero_iterations_returns_start() {
        let cfg = OptimizerConfig {
            restarts: 1,
            iterations: 0,
            ..OptimizerConfig::default()
        };
        let objective = Objective::from_class(LightconeClass::new(2, 3, 0));
        let set = optimize("(2,3,0)", &objective, &cfg).unwrap();
        let start = initial_points(&cfg)[0];
        assert_eq!(set.optima[0].params(), start);
        assert_eq!(set.optima[0].energy, objective.energy(start));
    }

    #[test]
    fn single_edge_reaches_one() {
        let cfg = OptimizerConfig::default().with_seed(1);
        let set = optimize("(1,1,0)", &Objective::from_class(LightconeClass::new(1, 1, 0)), &cfg).unwrap();
        assert!((set.best().energy - 1.0).abs() < 1e-4, "{}", set.best().energy);
    }

    #[test]
    fn rejects_bad_config() {
        let objective = Objective::from_class(LightconeClass::new(1, 1, 0));
        for cfg in [
            OptimizerConfig { restarts: 0, ..Default::default() },
            OptimizerConfig { learning_rate: 0.0, ..Default::default() },
            OptimizerConfig { rms_decay: 1.0, ..Default::default() },
        ] {
            assert!(matches!(optimize("x", &objective, &cfg), Err(Error::Config(_))));
        }
    }

    #[test]
    fn optima_are_canonical_and_deterministic() {
        let cfg = OptimizerConfig::default().with_seed(42);
        let objective = Objective::from_class(LightconeClass::new(3, 4, 1));
        let a = optimize("c", &objective, &cfg).unwrap();
        let b = optimize("c", &objective, &cfg).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        for o in &a.optima {
            assert!((0.0..TAU).contains(&o.gamma) && (0.0..PI).contains(&o.beta));
        }
    }
}
