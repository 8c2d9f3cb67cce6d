//! Depth-1 energies through lightcone decomposition.
//!
//! The energy of a graph is the sum of its edge terms, and at depth one
//! each edge term only depends on the edge's [`LightconeClass`]. A graph is
//! therefore reduced to its census, and every evaluation is a weighted sum
//! over at most a few dozen class energies.
//!
//! Two routes produce a class energy. [`class_energy_statevector`] runs the
//! dense simulator on the canonical realization and reads the central edge
//! term. [`class_energy`] evaluates the known closed form
//!
//! ```text
//! 1/2 + 1/4 sin(4b) sin(g) (cos^d g + cos^e g)
//!     - 1/4 sin^2(2b) cos^(d+e-2f) g (1 - cos^f(2g))
//! ```
//!
//! with `d = i - 1`, `e = j - 1`. Both routes agree to rounding on the
//! whole `d_max = 6` catalog; tests pin that agreement at 1e-10.

use std::collections::HashMap;
use std::f64::consts::{PI, TAU};

use parking_lot::RwLock;
use serde::{Deserialize, Serialize};

use crate::graph::{census, realize_lightcone, Graph, LightconeCensus, LightconeClass};
use crate::simulator::{QaoaParams, Simulator};

pub fn class_energy(class: LightconeClass, params: QaoaParams) -> f64 {
    let d = (class.i - 1) as i32;
    let e = (class.j - 1) as i32;
    let f = class.f as i32;
    let (g, b) = (params.gamma, params.beta);
    let cg = g.cos();
    let s2b = (2.0 * b).sin();
    let linear = 0.25 * (4.0 * b).sin() * g.sin() * (cg.powi(d) + cg.powi(e));
    let triangle = if f == 0 {
        0.0
    } else {
        0.25 * s2b * s2b * cg.powi(d + e - 2 * f) * (1.0 - (2.0 * g).cos().powi(f))
    };
    0.5 + linear - triangle
}

/// Reference route: dense simulation of the canonical realization.
pub fn class_energy_statevector(class: LightconeClass, params: QaoaParams) -> f64 {
    let g = realize_lightcone(class);
    Simulator::with_qubit_cap(g.node_count())
        .edge_energy(&g, params, (0, 1))
        .expect("realization fits its own cap")
}

/// Which route produces class energies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Backend {
    #[default]
    ClosedForm,
    Statevector,
}

impl Backend {
    pub fn class_energy(self, class: LightconeClass, params: QaoaParams) -> f64 {
        match self {
            Backend::ClosedForm => class_energy(class, params),
            Backend::Statevector => class_energy_statevector(class, params),
        }
    }
}

/// Cache keys quantize angles to 1e-12 rad.
const QUANTUM: f64 = 1e-12;

fn quantize(x: f64) -> i64 {
    (x / QUANTUM).round() as i64
}

/// Memoized class energies keyed by class and quantized parameters.
/// Concurrent readers, synchronized inserts; values are deterministic so
/// racing inserts store the same number.
#[derive(Debug, Default)]
pub struct ClassEnergyCache {
    backend: Backend,
    entries: RwLock<HashMap<(LightconeClass, i64, i64), f64>>,
}

impl ClassEnergyCache {
    pub fn new(backend: Backend) -> Self {
        Self {
            backend,
            entries: RwLock::default(),
        }
    }

    pub fn backend(&self) -> Backend {
        self.backend
    }

    pub fn energy(&self, class: LightconeClass, params: QaoaParams) -> f64 {
        let key = (class, quantize(params.gamma), quantize(params.beta));
        if let Some(&v) = self.entries.read().get(&key) {
            return v;
        }
        let value = self.backend.class_energy(class, params);
        self.entries.write().insert(key, value);
        value
    }

    pub fn len(&self) -> usize {
        self.entries.read().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Weighted sum of class energies: the energy function of a graph (its
/// census) or of a single class.
#[derive(Debug, Clone, PartialEq)]
pub struct Objective {
    terms: Vec<(LightconeClass, f64)>,
}

impl Objective {
    pub fn from_census(census: &LightconeCensus) -> Self {
        Self {
            terms: census.iter().map(|(c, n)| (c, n as f64)).collect(),
        }
    }

    pub fn from_graph(g: &Graph) -> Self {
        Self::from_census(&census(g))
    }

    pub fn from_class(class: LightconeClass) -> Self {
        Self {
            terms: vec![(class, 1.0)],
        }
    }

    pub fn terms(&self) -> &[(LightconeClass, f64)] {
        &self.terms
    }

    /// Sum of weights; the number of edges for a graph objective.
    pub fn weight(&self) -> f64 {
        self.terms.iter().map(|(_, w)| w).sum()
    }

    pub fn energy(&self, params: QaoaParams) -> f64 {
        self.terms
            .iter()
            .map(|&(c, w)| w * class_energy(c, params))
            .sum()
    }

    pub fn energy_with(&self, backend: Backend, params: QaoaParams) -> f64 {
        self.terms
            .iter()
            .map(|&(c, w)| w * backend.class_energy(c, params))
            .sum()
    }

    pub fn energy_cached(&self, cache: &ClassEnergyCache, params: QaoaParams) -> f64 {
        self.terms
            .iter()
            .map(|&(c, w)| w * cache.energy(c, params))
            .sum()
    }

    /// `(dE/dgamma, dE/dbeta)` by the parameter-shift rule.
    pub fn gradient(&self, params: QaoaParams) -> (f64, f64) {
        self.gradient_with(Backend::ClosedForm, params)
    }

    pub fn gradient_with(&self, backend: Backend, params: QaoaParams) -> (f64, f64) {
        self.terms.iter().fold((0.0, 0.0), |(dg, db), &(c, w)| {
            let (cg, cb) = class_gradient_with(backend, c, params);
            (dg + w * cg, db + w * cb)
        })
    }
}

/// Shift offsets and weights of the equidistant-frequency parameter-shift
/// rule: for a trigonometric polynomial of degree `k`,
/// `f'(x) = sum_mu (-1)^(mu-1) f(x + x_mu) / (4k sin^2(x_mu / 2))`
/// with `x_mu = (2 mu - 1) pi / (2k)`, `mu = 1..2k`.
fn shift_rule(k: usize) -> impl Iterator<Item = (f64, f64)> {
    let kf = k as f64;
    (1..=2 * k).map(move |mu| {
        let x = (2 * mu - 1) as f64 * PI / (2.0 * kf);
        let sign = if mu % 2 == 1 { 1.0 } else { -1.0 };
        (x, sign / (4.0 * kf * (x / 2.0).sin().powi(2)))
    })
}

/// Degree in `gamma` of a class energy is bounded by the number of edges
/// in the lightcone, `i + j - 1`.
fn gamma_degree(class: LightconeClass) -> usize {
    class.i + class.j - 1
}

pub fn class_gradient(class: LightconeClass, params: QaoaParams) -> (f64, f64) {
    class_gradient_with(Backend::ClosedForm, class, params)
}

/// Exact derivatives of one class energy. In `beta` the energy is a
/// polynomial of degree 2 in `2 beta`, so the rule runs on `y = 2 beta`.
pub fn class_gradient_with(backend: Backend, class: LightconeClass, params: QaoaParams) -> (f64, f64) {
    let f = |p: QaoaParams| backend.class_energy(class, p);
    let d_gamma = shift_rule(gamma_degree(class))
        .map(|(x, w)| w * f(QaoaParams::new(params.gamma + x, params.beta)))
        .sum();
    let d_beta: f64 = shift_rule(2)
        .map(|(x, w)| w * f(QaoaParams::new(params.gamma, params.beta + x / 2.0)))
        .sum();
    (d_gamma, 2.0 * d_beta)
}

pub fn graph_energy(g: &Graph, params: QaoaParams) -> f64 {
    Objective::from_graph(g).energy(params)
}

pub fn gradient(g: &Graph, params: QaoaParams) -> (f64, f64) {
    Objective::from_graph(g).gradient(params)
}

/// What a landscape or optimization run was computed for.
#[derive(Debug, Clone, PartialEq)]
pub enum Subject {
    Graph(Graph),
    Class(LightconeClass),
}

impl Subject {
    /// Class label `(i,j,f)` or the graph's content hash.
    pub fn id(&self) -> String {
        match self {
            Subject::Graph(g) => g.content_hash(),
            Subject::Class(c) => c.to_string(),
        }
    }

    pub fn objective(&self) -> Objective {
        match self {
            Subject::Graph(g) => Objective::from_graph(g),
            Subject::Class(c) => Objective::from_class(*c),
        }
    }

    /// Upper bound of the energy: edge count, or 1 for a single class.
    pub fn max_energy(&self) -> f64 {
        match self {
            Subject::Graph(g) => g.edge_count() as f64,
            Subject::Class(_) => 1.0,
        }
    }
}

/// Energies on a uniform grid. Rows follow `beta_grid`, columns `gamma_grid`;
/// grids include the left endpoint and exclude the right one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyLandscape {
    pub subject: String,
    pub gamma_grid: Vec<f64>,
    pub beta_grid: Vec<f64>,
    pub values: Vec<Vec<f64>>,
}

impl EnergyLandscape {
    pub fn get(&self, beta_index: usize, gamma_index: usize) -> f64 {
        self.values[beta_index][gamma_index]
    }

    pub fn max(&self) -> f64 {
        self.values.iter().flatten().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().flatten().copied().fold(f64::INFINITY, f64::min)
    }

    /// `(beta_index, gamma_index)` of the first maximal cell in row-major order.
    pub fn argmax(&self) -> (usize, usize) {
        let mut best = (0, 0);
        for (r, row) in self.values.iter().enumerate() {
            for (c, &v) in row.iter().enumerate() {
                if v > self.values[best.0][best.1] {
                    best = (r, c);
                }
            }
        }
        best
    }

    /// Cells strictly greater than their 8 periodic neighbors.
    pub fn local_maxima(&self) -> Vec<QaoaParams> {
        let (rows, cols) = (self.beta_grid.len(), self.gamma_grid.len());
        let mut out = Vec::new();
        for r in 0..rows {
            for c in 0..cols {
                let v = self.values[r][c];
                let is_peak = (-1i64..=1).all(|dr| {
                    (-1i64..=1).all(|dc| {
                        if dr == 0 && dc == 0 {
                            return true;
                        }
                        let rr = (r as i64 + dr).rem_euclid(rows as i64) as usize;
                        let cc = (c as i64 + dc).rem_euclid(cols as i64) as usize;
                        self.values[rr][cc] < v
                    })
                });
                if is_peak {
                    out.push(QaoaParams::new(self.gamma_grid[c], self.beta_grid[r]));
                }
            }
        }
        out
    }

    /// CSV with header `beta,gamma,energy`, beta-major.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("beta,gamma,energy\n");
        for (beta, row) in self.beta_grid.iter().zip(&self.values) {
            for (gamma, value) in self.gamma_grid.iter().zip(row) {
                out.push_str(&format!("{beta},{gamma},{value}\n"));
            }
        }
        out
    }
}

pub fn grid(resolution: usize, period: f64) -> Vec<f64> {
    (0..resolution)
        .map(|k| period * k as f64 / resolution as f64)
        .collect()
}

pub fn landscape(subject: &Subject, gamma_points: usize, beta_points: usize) -> EnergyLandscape {
    landscape_cached(&ClassEnergyCache::default(), subject, gamma_points, beta_points)
}

pub fn landscape_cached(
    cache: &ClassEnergyCache,
    subject: &Subject,
    gamma_points: usize,
    beta_points: usize,
) -> EnergyLandscape {
    assert!(gamma_points >= 2 && beta_points >= 2, "landscape needs at least 2 points per axis");
    let objective = subject.objective();
    let gamma_grid = grid(gamma_points, TAU);
    let beta_grid = grid(beta_points, PI);
    let values = beta_grid
        .iter()
        .map(|&beta| {
            gamma_grid
                .iter()
                .map(|&gamma| objective.energy_cached(cache, QaoaParams::new(gamma, beta)))
                .collect()
        })
        .collect();
    EnergyLandscape {
        subject: subject.id(),
        gamma_grid,
        beta_grid,
        values,
    }
}

#[cfg(test)]
mod tests {
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_8};

    use super::*;
    use crate::graph::catalog;
    use crate::rng::SplitMix64;
    use rand::Rng;

    #[test]
    fn closed_form_matches_statevector_on_catalog() {
        let mut rng = SplitMix64::new(17);
        for class in catalog(6, false) {
            for _ in 0..4 {
                let p = QaoaParams::new(rng.gen_range(0.0..TAU), rng.gen_range(0.0..PI));
                let a = class_energy(class, p);
                let b = class_energy_statevector(class, p);
                assert!((a - b).abs() < 1e-10, "{class} {p}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn single_edge_peak() {
        let p = QaoaParams::new(FRAC_PI_2, FRAC_PI_8);
        assert!((class_energy(LightconeClass::new(1, 1, 0), p) - 1.0).abs() < 1e-15);
        assert!((class_energy_statevector(LightconeClass::new(1, 1, 0), p) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn zero_gamma_is_half() {
        for class in catalog(6, false) {
            for beta in [0.0, 0.4, 2.9] {
                assert_eq!(class_energy(class, QaoaParams::new(0.0, beta)), 0.5);
            }
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = SplitMix64::new(5);
        let h = 1e-5;
        for class in catalog(6, false) {
            let p = QaoaParams::new(rng.gen_range(0.0..TAU), rng.gen_range(0.0..PI));
            let (dg, db) = class_gradient(class, p);
            let fd_g = (class_energy(class, QaoaParams::new(p.gamma + h, p.beta))
                - class_energy(class, QaoaParams::new(p.gamma - h, p.beta)))
                / (2.0 * h);
            let fd_b = (class_energy(class, QaoaParams::new(p.gamma, p.beta + h))
                - class_energy(class, QaoaParams::new(p.gamma, p.beta - h)))
                / (2.0 * h);
            assert!((dg - fd_g).abs() < 1e-7, "{class}: {dg} vs {fd_g}");
            assert!((db - fd_b).abs() < 1e-7, "{class}: {db} vs {fd_b}");
        }
    }

    #[test]
    fn statevector_gradient_agrees() {
        let class = LightconeClass::new(2, 4, 1);
        let p = QaoaParams::new(0.7, 0.3);
        let a = class_gradient_with(Backend::ClosedForm, class, p);
        let b = class_gradient_with(Backend::Statevector, class, p);
        assert!((a.0 - b.0).abs() < 1e-10 && (a.1 - b.1).abs() < 1e-10);
    }

    #[test]
    fn cache_is_coherent() {
        let cache = ClassEnergyCache::new(Backend::ClosedForm);
        let class = LightconeClass::new(3, 5, 2);
        let p = QaoaParams::new(1.3, 0.2);
        let cold = cache.energy(class, p);
        let warm = cache.energy(class, p);
        assert_eq!(cold, warm);
        assert_eq!(cache.len(), 1);
        assert!((cold - class_energy(class, p)).abs() < 1e-12);
    }

    #[test]
    fn landscape_shape_and_range() {
        let l = landscape(&Subject::Class(LightconeClass::new(3, 3, 0)), 64, 64);
        assert_eq!(l.values.len(), 64);
        assert!(l.values.iter().all(|r| r.len() == 64));
        assert!(l.min() >= 0.0 && l.max() <= 1.0);
        assert_eq!(l.to_csv().lines().count(), 4097);
        assert_eq!(l.subject, "(3,3,0)");
    }

    #[test]
    fn grid_excludes_right_endpoint() {
        let g = grid(4, PI);
        assert_eq!(g, vec![0.0, PI / 4.0, PI / 2.0, 3.0 * PI / 4.0]);
    }
}
