//! The six recurring optima of depth-1 landscapes and the parity-based
//! similarity built on them.
//!
//! Distances live on the torus `[0, 2pi) x [0, pi/2)`: `gamma` has period
//! `2pi`, and `beta` is folded by the exact `pi/2` symmetry of the energy.

use std::f64::consts::TAU;
use std::fmt;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::energy::Objective;
use crate::error::{Error, Result};
use crate::optimizer::OptimaSet;
use crate::rng::SplitMix64;
use crate::simulator::{circular_delta, wrap, QaoaParams, BETA_SYMMETRY_PERIOD};

pub const DEFAULT_RADIUS: f64 = 0.25;
pub const MIN_SEPARATION: f64 = 0.2;
pub const CENTER_COUNT: usize = 6;

/// Frozen calibration shipped with the crate.
pub const BUNDLED_CENTERS: &str = include_str!("../data/centers.json");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CenterRole {
    Universal,
    OddFavored,
    EvenFavored,
}

impl CenterRole {
    fn for_index(k: usize) -> Self {
        match k {
            0 | 1 => Self::Universal,
            2 | 3 => Self::OddFavored,
            _ => Self::EvenFavored,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Center {
    pub label: String,
    pub role: CenterRole,
    pub gamma: f64,
    pub beta: f64,
}

impl Center {
    pub fn params(&self) -> QaoaParams {
        QaoaParams::new(self.gamma, self.beta)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CenterSet {
    pub centers: Vec<Center>,
}

impl CenterSet {
    /// Builds `c1..c6` from points ordered universal, odd-favored,
    /// even-favored.
    pub fn from_points(points: [QaoaParams; CENTER_COUNT]) -> Result<Self> {
        let centers = points
            .iter()
            .enumerate()
            .map(|(k, p)| {
                let p = fold(*p);
                Center {
                    label: format!("c{}", k + 1),
                    role: CenterRole::for_index(k),
                    gamma: p.gamma,
                    beta: p.beta,
                }
            })
            .collect();
        let set = Self { centers };
        set.validate()?;
        Ok(set)
    }

    pub fn validate(&self) -> Result<()> {
        if self.centers.len() != CENTER_COUNT {
            return Err(Error::Config(format!("expected {CENTER_COUNT} centers, found {}", self.centers.len())));
        }
        for (k, c) in self.centers.iter().enumerate() {
            if c.role != CenterRole::for_index(k) {
                return Err(Error::Config(format!("{} has role {:?}", c.label, c.role)));
            }
            if !(0.0..TAU).contains(&c.gamma) || !(0.0..BETA_SYMMETRY_PERIOD).contains(&c.beta) {
                return Err(Error::Config(format!("{} lies outside the folded domain", c.label)));
            }
        }
        for a in 0..CENTER_COUNT {
            for b in a + 1..CENTER_COUNT {
                let d = toroidal_distance(self.centers[a].params(), self.centers[b].params());
                if d < MIN_SEPARATION {
                    return Err(Error::Config(format!(
                        "{} and {} are {d:.3} rad apart",
                        self.centers[a].label, self.centers[b].label
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn params(&self) -> [QaoaParams; CENTER_COUNT] {
        std::array::from_fn(|k| self.centers[k].params())
    }

    pub fn bundled() -> Self {
        Self::from_json(BUNDLED_CENTERS).expect("bundled calibration is valid")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let set: Self = serde_json::from_str(text)?;
        set.validate()?;
        Ok(set)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("centers serialize") + "\n"
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        Self::from_json(&std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    /// Index of the nearest center within `radius`. Exact ties go to the
    /// lower index.
    pub fn classify(&self, p: QaoaParams, radius: f64) -> Option<usize> {
        let (k, d) = self
            .centers
            .iter()
            .map(|c| toroidal_distance(p, c.params()))
            .enumerate()
            .fold((0, f64::INFINITY), |best, (k, d)| if d < best.1 { (k, d) } else { best });
        (d <= radius).then_some(k)
    }
}

impl fmt::Display for CenterSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.centers {
            writeln!(f, "{} {:?} gamma={:.4} beta={:.4}", c.label, c.role, c.gamma, c.beta)?;
        }
        Ok(())
    }
}

/// Maps parameters into `[0, 2pi) x [0, pi/2)`.
pub fn fold(p: QaoaParams) -> QaoaParams {
    QaoaParams::new(wrap(p.gamma, TAU), wrap(p.beta, BETA_SYMMETRY_PERIOD))
}

/// Image under `(gamma, beta) -> (-gamma, -beta)`, which leaves every energy
/// unchanged.
pub fn mirror(p: QaoaParams) -> QaoaParams {
    fold(QaoaParams::new(-p.gamma, -p.beta))
}

pub fn toroidal_distance(a: QaoaParams, b: QaoaParams) -> f64 {
    circular_delta(a.gamma, b.gamma, TAU).hypot(circular_delta(a.beta, b.beta, BETA_SYMMETRY_PERIOD))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CenterCounts {
    pub counts: [usize; CENTER_COUNT],
    pub unassigned: usize,
}

impl CenterCounts {
    pub fn universal(&self) -> usize {
        self.counts[0] + self.counts[1]
    }

    pub fn odd_favored(&self) -> usize {
        self.counts[2] + self.counts[3]
    }

    pub fn even_favored(&self) -> usize {
        self.counts[4] + self.counts[5]
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum::<usize>() + self.unassigned
    }

    pub fn add(&mut self, other: &CenterCounts) {
        for k in 0..CENTER_COUNT {
            self.counts[k] += other.counts[k];
        }
        self.unassigned += other.unassigned;
    }
}

pub fn classify_optima(optima: &OptimaSet, centers: &CenterSet, radius: f64) -> CenterCounts {
    let mut out = CenterCounts::default();
    for p in optima.params() {
        match centers.classify(p, radius) {
            Some(k) => out.counts[k] += 1,
            None => out.unassigned += 1,
        }
    }
    out
}

/// Denominator of the per-center ratios fed to [`optima_distribution`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RatioBasis {
    /// The graph's best multistart QAOA energy. Pure-parity graphs then
    /// score close to 1 at their favored centers.
    #[default]
    QaoaOptimum,
    /// The exact maximum cut.
    MaxCut,
}

impl std::str::FromStr for RatioBasis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "qaoa-optimum" => Ok(Self::QaoaOptimum),
            "maxcut" => Ok(Self::MaxCut),
            other => Err(Error::Config(format!("unknown ratio basis `{other}`"))),
        }
    }
}

/// Energy at each center divided by `denominator`.
pub fn center_ratios(objective: &Objective, denominator: f64, centers: &CenterSet) -> Result<[f64; CENTER_COUNT]> {
    if !(denominator > 0.0) {
        return Err(Error::Degenerate(format!("ratio denominator {denominator} is not positive")));
    }
    Ok(centers.params().map(|p| objective.energy(p) / denominator))
}

/// Predicted number of optima (out of 20) per center pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimaDistribution {
    pub n12: f64,
    pub n34: f64,
    pub n56: f64,
}

impl OptimaDistribution {
    pub fn total(&self) -> f64 {
        self.n12 + self.n34 + self.n56
    }

    /// Each pair count split evenly between its two centers.
    pub fn per_center(&self) -> [f64; CENTER_COUNT] {
        let (a, b, c) = (self.n12 / 2.0, self.n34 / 2.0, self.n56 / 2.0);
        [a, a, b, b, c, c]
    }
}

const AR_THRESHOLD: f64 = 0.75;

pub fn optima_distribution(ars: &[f64; CENTER_COUNT]) -> OptimaDistribution {
    let mut d = OptimaDistribution {
        n12: 10.0,
        n34: 0.0,
        n56: 0.0,
    };
    if ars[2] > AR_THRESHOLD {
        d.n34 = 10.0 * ((ars[2] - AR_THRESHOLD) / 0.25);
        d.n12 += 10.0 - d.n34;
    } else if ars[4] > AR_THRESHOLD {
        d.n56 = 10.0 * ((ars[4] - AR_THRESHOLD) / 0.25);
        d.n12 += 10.0 - d.n56;
    } else {
        d.n12 += 10.0;
    }
    d
}

/// `SPS(D, A) = (1/20) sum_i n_i(D) AR(A, c_i)`.
pub fn sps(donor_ars: &[f64; CENTER_COUNT], acceptor_ars: &[f64; CENTER_COUNT]) -> f64 {
    sps_from_distribution(&optima_distribution(donor_ars), acceptor_ars)
}

pub fn sps_from_distribution(donor: &OptimaDistribution, acceptor_ars: &[f64; CENTER_COUNT]) -> f64 {
    donor.per_center().iter().zip(acceptor_ars).map(|(n, ar)| n * ar).sum::<f64>() / 20.0
}

/// A graph contributing to center calibration.
#[derive(Debug, Clone)]
pub struct CalibrationSubject {
    pub objective: Objective,
    pub parity: f64,
    pub best_energy: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationOptions {
    pub kmeans_restarts: usize,
    pub kmeans_iterations: usize,
    /// Subjects with parity at most this count as odd for role assignment.
    pub odd_parity_max: f64,
    /// Subjects with parity at least this count as even.
    pub even_parity_min: f64,
    pub seed: u64,
}

impl Default for CalibrationOptions {
    fn default() -> Self {
        Self {
            kmeans_restarts: 16,
            kmeans_iterations: 100,
            odd_parity_max: 0.2,
            even_parity_min: 0.8,
            seed: 0,
        }
    }
}

/// Clusters optima into six centers and assigns roles.
///
/// Points are augmented with their mirror images before clustering. Roles
/// come from the mean normalized energy at each centroid over odd and even
/// subjects: the two best under `min(odd, even)` are universal, the two of
/// the rest with the largest `odd - even` are odd-favored. Mirror pairs are
/// then made exact, and each pair is ordered by `gamma`.
pub fn calibrate_centers(optima: &[QaoaParams], subjects: &[CalibrationSubject], opts: &CalibrationOptions) -> Result<CenterSet> {
    if optima.len() < CENTER_COUNT {
        return Err(Error::Degenerate("too few optima to calibrate".into()));
    }
    let points: Vec<QaoaParams> = optima.iter().flat_map(|&p| [fold(p), mirror(p)]).collect();
    let centroids = toroidal_kmeans(&points, CENTER_COUNT, opts)?;

    let score = |pred: &dyn Fn(f64) -> bool, c: QaoaParams| -> Result<f64> {
        let ratios: Vec<f64> = subjects
            .iter()
            .filter(|s| pred(s.parity))
            .map(|s| s.objective.energy(c) / s.best_energy)
            .collect();
        if ratios.is_empty() {
            return Err(Error::Degenerate("calibration needs both odd and even subjects".into()));
        }
        Ok(ratios.iter().sum::<f64>() / ratios.len() as f64)
    };
    let mut scored = Vec::with_capacity(CENTER_COUNT);
    for &c in &centroids {
        let odd = score(&|p| p <= opts.odd_parity_max, c)?;
        let even = score(&|p| p >= opts.even_parity_min, c)?;
        scored.push((c, odd, even));
    }
    scored.sort_by(|a, b| b.1.min(b.2).total_cmp(&a.1.min(a.2)));
    let (universal, rest) = scored.split_at(2);
    let mut rest = rest.to_vec();
    rest.sort_by(|a, b| (b.1 - b.2).total_cmp(&(a.1 - a.2)));
    let pairs = [
        [universal[0].0, universal[1].0],
        [rest[0].0, rest[1].0],
        [rest[2].0, rest[3].0],
    ];
    let mut out = Vec::with_capacity(CENTER_COUNT);
    for [a, b] in pairs {
        let a = symmetrize(a, b);
        let mut pair = [a, mirror(a)];
        pair.sort_by(|x, y| x.gamma.total_cmp(&y.gamma));
        out.extend(pair);
    }
    CenterSet::from_points(out.try_into().expect("six centers"))
}

/// Average of `a` with the mirror of `b`.
fn symmetrize(a: QaoaParams, b: QaoaParams) -> QaoaParams {
    let m = mirror(b);
    fold(QaoaParams::new(
        a.gamma + circular_delta(m.gamma, a.gamma, TAU) / 2.0,
        a.beta + circular_delta(m.beta, a.beta, BETA_SYMMETRY_PERIOD) / 2.0,
    ))
}

fn circular_mean(values: impl Iterator<Item = f64>, period: f64) -> Option<f64> {
    let scale = TAU / period;
    let (mut s, mut c, mut n) = (0.0, 0.0, 0usize);
    for v in values {
        s += (v * scale).sin();
        c += (v * scale).cos();
        n += 1;
    }
    (n > 0).then(|| wrap(s.atan2(c) / scale, period))
}

/// Lloyd iterations on the torus with k-means++ seeding; keeps the restart
/// with the lowest within-cluster sum of squared distances.
pub fn toroidal_kmeans(points: &[QaoaParams], k: usize, opts: &CalibrationOptions) -> Result<Vec<QaoaParams>> {
    if points.len() < k || k == 0 {
        return Err(Error::Degenerate(format!("cannot form {k} clusters from {} points", points.len())));
    }
    let mut rng = SplitMix64::new(opts.seed);
    let mut best: Option<(f64, Vec<QaoaParams>)> = None;
    for _ in 0..opts.kmeans_restarts.max(1) {
        let mut centroids = vec![points[rng.gen_range(0..points.len())]];
        while centroids.len() < k {
            let weights: Vec<f64> = points.iter().map(|&p| nearest(p, &centroids).1.powi(2)).collect();
            let total: f64 = weights.iter().sum();
            let mut target = rng.gen::<f64>() * total;
            let mut pick = points.len() - 1;
            for (i, w) in weights.iter().enumerate() {
                if target < *w {
                    pick = i;
                    break;
                }
                target -= w;
            }
            centroids.push(points[pick]);
        }
        let mut labels = vec![usize::MAX; points.len()];
        for _ in 0..opts.kmeans_iterations {
            let next: Vec<usize> = points.iter().map(|&p| nearest(p, &centroids).0).collect();
            if next == labels {
                break;
            }
            labels = next;
            for (c, centroid) in centroids.iter_mut().enumerate() {
                let members = || points.iter().zip(&labels).filter(move |(_, &l)| l == c).map(|(p, _)| *p);
                if let (Some(g), Some(b)) = (
                    circular_mean(members().map(|p| p.gamma), TAU),
                    circular_mean(members().map(|p| p.beta), BETA_SYMMETRY_PERIOD),
                ) {
                    *centroid = QaoaParams::new(g, b);
                }
            }
        }
        let inertia: f64 = points.iter().map(|&p| nearest(p, &centroids).1.powi(2)).sum();
        if best.as_ref().is_none_or(|(b, _)| inertia < *b) {
            best = Some((inertia, centroids));
        }
    }
    Ok(best.expect("at least one restart").1)
}

fn nearest(p: QaoaParams, centroids: &[QaoaParams]) -> (usize, f64) {
    centroids
        .iter()
        .map(|&c| toroidal_distance(p, c))
        .enumerate()
        .fold((0, f64::INFINITY), |best, (k, d)| if d < best.1 { (k, d) } else { best })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optimizer::{OptimizerConfig, Optimum};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn synthetic() -> CenterSet {
        let (g, b) = (0.6, 0.4);
        CenterSet::from_points([
            QaoaParams::new(g, b),
            QaoaParams::new(TAU - g, FRAC_PI_2 - b),
            QaoaParams::new(PI - g, b),
            QaoaParams::new(PI + g, FRAC_PI_2 - b),
            QaoaParams::new(PI - g, FRAC_PI_2 - b),
            QaoaParams::new(PI + g, b),
        ])
        .unwrap()
    }

    #[test]
    fn algorithm_plug_in_cases() {
        let d = optima_distribution(&[0.9, 0.9, 1.0, 1.0, 0.5, 0.5]);
        assert_eq!((d.n12, d.n34, d.n56), (10.0, 10.0, 0.0));
        let d = optima_distribution(&[0.9, 0.9, 0.875, 0.875, 0.7, 0.7]);
        assert_eq!((d.n12, d.n34, d.n56), (15.0, 5.0, 0.0));
        let d = optima_distribution(&[0.9, 0.9, 0.75, 0.75, 0.6, 0.6]);
        assert_eq!((d.n12, d.n34, d.n56), (20.0, 0.0, 0.0));
        let d = optima_distribution(&[0.9, 0.9, 0.7, 0.7, 0.8, 0.8]);
        assert_eq!(d.total(), 20.0);
        assert!(d.n56 > 0.0);
    }

    #[test]
    fn sps_examples() {
        let universal = OptimaDistribution {
            n12: 20.0,
            n34: 0.0,
            n56: 0.0,
        };
        assert_abs_diff_eq!(sps_from_distribution(&universal, &[1.0, 1.0, 0.0, 0.0, 0.0, 0.0]), 1.0);
        let odd = OptimaDistribution {
            n12: 10.0,
            n34: 10.0,
            n56: 0.0,
        };
        assert_abs_diff_eq!(sps_from_distribution(&odd, &[1.0, 1.0, 0.5, 0.5, 0.9, 0.9]), 0.75);
        assert_abs_diff_eq!(sps(&[0.9, 0.9, 1.0, 1.0, 0.0, 0.0], &[1.0, 1.0, 0.5, 0.5, 0.9, 0.9]), 0.75);
    }

    #[test]
    fn classification() {
        let centers = synthetic();
        let c1 = centers.centers[0].params();
        assert_eq!(centers.classify(c1, DEFAULT_RADIUS), Some(0));
        // Shifting beta by the symmetry period lands on the same center.
        assert_eq!(centers.classify(QaoaParams::new(c1.gamma, c1.beta + FRAC_PI_2), DEFAULT_RADIUS), Some(0));
        // Midway between c1 and c3 (1.0 rad apart in gamma) is unassigned.
        let mid = QaoaParams::new((c1.gamma + PI - 0.6) / 2.0, c1.beta);
        assert_eq!(centers.classify(mid, DEFAULT_RADIUS), None);
        let set = OptimaSet::from_optima(
            "g",
            OptimizerConfig::default(),
            [c1, mid, centers.centers[5].params()]
                .iter()
                .map(|p| Optimum {
                    gamma: p.gamma,
                    beta: p.beta,
                    energy: 1.0,
                    converged: true,
                })
                .collect(),
        )
        .unwrap();
        let counts = classify_optima(&set, &centers, DEFAULT_RADIUS);
        assert_eq!(counts.counts, [1, 0, 0, 0, 0, 1]);
        assert_eq!((counts.unassigned, counts.total(), counts.universal()), (1, 3, 1));
    }

    #[test]
    fn validation() {
        let mut set = synthetic();
        set.validate().unwrap();
        assert_eq!(CenterSet::from_json(&set.to_json()).unwrap(), set);
        set.centers[1].gamma = set.centers[0].gamma + 0.05;
        set.centers[1].beta = set.centers[0].beta;
        assert!(set.validate().is_err());
        let mut set = synthetic();
        set.centers[2].role = CenterRole::Universal;
        assert!(set.validate().is_err());
    }

    #[test]
    fn distance_and_mirror() {
        let a = QaoaParams::new(0.1, 0.05);
        let b = QaoaParams::new(TAU - 0.1, FRAC_PI_2 - 0.05);
        assert_abs_diff_eq!(toroidal_distance(a, b), 0.2f64.hypot(0.1), epsilon = 1e-12);
        assert_abs_diff_eq!(toroidal_distance(mirror(a), b), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn bundled_calibration_loads() {
        let set = CenterSet::bundled();
        for pair in set.centers.chunks(2) {
            assert_abs_diff_eq!(toroidal_distance(mirror(pair[0].params()), pair[1].params()), 0.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn kmeans_recovers_separated_clusters() {
        let truth = synthetic().params();
        let mut rng = SplitMix64::new(3);
        let points: Vec<QaoaParams> = (0..600)
            .map(|k| {
                let c = truth[k % 6];
                fold(QaoaParams::new(c.gamma + rng.gen_range(-0.05..0.05), c.beta + rng.gen_range(-0.05..0.05)))
            })
            .collect();
        let found = toroidal_kmeans(&points, 6, &CalibrationOptions::default()).unwrap();
        for t in truth {
            let (_, d) = nearest(t, &found);
            assert!(d < 0.02, "{t} missed by {d}");
        }
    }
}
