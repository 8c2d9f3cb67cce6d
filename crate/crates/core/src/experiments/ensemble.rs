//! Parity-graded ensembles of random graphs and the all-pairs analysis run
//! on them.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::centers::{
    calibrate_centers, center_ratios, classify_optima, sps, CalibrationOptions, CalibrationSubject, CenterCounts, CenterSet,
    RatioBasis, CENTER_COUNT,
};
use crate::energy::Objective;
use crate::error::{Error, Result};
use crate::generate::generate_graph;
use crate::graph::{parity, Graph};
use crate::maxcut::solve_exact;
use crate::metrics::{parity_similarity, subgraph_similarity, transfer_matrix, SimilarityRecord, TransferMap, TransferMatrix};
use crate::optimizer::{optimize, OptimaSet, OptimizerConfig};
use crate::rng::derive_seed;

const GRAPH_STREAM: u64 = 1;
const OPTIMIZER_STREAM: u64 = 2;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub nodes: usize,
    /// Parity levels are spread evenly over `[0, 1]`, both ends included.
    pub parity_levels: usize,
    pub graphs_per_level: usize,
    pub max_degree: usize,
    pub seed: u64,
}

impl Default for EnsembleSpec {
    fn default() -> Self {
        Self {
            nodes: 20,
            parity_levels: 11,
            graphs_per_level: 10,
            max_degree: 6,
            seed: 0,
        }
    }
}

impl EnsembleSpec {
    /// Even-degree node count for each level: the level's share of `nodes`,
    /// rounded to the nearest count that leaves an even number of odd-degree
    /// nodes (ties round down).
    pub fn even_counts(&self) -> Result<Vec<usize>> {
        if self.parity_levels < 2 {
            return Err(Error::Config("need at least two parity levels".into()));
        }
        let den = (self.parity_levels - 1) as f64;
        Ok((0..self.parity_levels)
            .map(|level| {
                let target = level as f64 * self.nodes as f64 / den;
                (0..=self.nodes)
                    .filter(|k| (self.nodes - k).is_multiple_of(2))
                    .min_by(|a, b| (*a as f64 - target).abs().total_cmp(&(*b as f64 - target).abs()))
                    .expect("nodes itself qualifies")
            })
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleMember {
    pub id: String,
    pub level: usize,
    pub even_nodes: usize,
    pub seed: u64,
    pub graph: Graph,
}

impl EnsembleMember {
    pub fn parity(&self) -> f64 {
        parity(&self.graph)
    }
}

/// One outcome per slot, ordered by level then index. Infeasible slots are
/// reported instead of aborting the whole ensemble.
pub fn generate_slots(spec: &EnsembleSpec) -> Result<Vec<(String, Result<EnsembleMember>)>> {
    let evens = spec.even_counts()?;
    let slots: Vec<(usize, usize)> = (0..spec.parity_levels)
        .flat_map(|l| (0..spec.graphs_per_level).map(move |k| (l, k)))
        .collect();
    Ok(slots
        .into_par_iter()
        .map(|(level, k)| {
            let even_nodes = evens[level];
            let id = format!("n{}-e{:02}-{:02}", spec.nodes, even_nodes, k);
            let seed = derive_seed(spec.seed, GRAPH_STREAM, (level * spec.graphs_per_level + k) as u64);
            let member = generate_graph(spec.nodes, even_nodes, spec.max_degree, seed).map(|graph| EnsembleMember {
                id: id.clone(),
                level,
                even_nodes,
                seed,
                graph,
            });
            (id, member)
        })
        .collect())
}

pub fn generate_ensemble(spec: &EnsembleSpec) -> Result<Vec<EnsembleMember>> {
    generate_slots(spec)?.into_iter().map(|(_, m)| m).collect()
}

/// Optima, coefficients and exact cuts for every member.
#[derive(Debug, Clone)]
pub struct EnsembleAnalysis {
    pub members: Vec<EnsembleMember>,
    pub objectives: Vec<Objective>,
    pub optima: Vec<OptimaSet>,
    pub transfer: TransferMatrix,
}

pub fn optimize_members(members: &[EnsembleMember], cfg: &OptimizerConfig) -> Result<Vec<OptimaSet>> {
    members
        .par_iter()
        .enumerate()
        .map(|(k, m)| {
            let cfg = cfg.clone().with_seed(derive_seed(cfg.seed, OPTIMIZER_STREAM, k as u64));
            optimize(m.id.clone(), &Objective::from_graph(&m.graph), &cfg)
        })
        .collect()
}

pub fn analyze(members: Vec<EnsembleMember>, cfg: &OptimizerConfig) -> Result<EnsembleAnalysis> {
    let objectives: Vec<Objective> = members.iter().map(|m| Objective::from_graph(&m.graph)).collect();
    let optima = optimize_members(&members, cfg)?;
    let labels = members.iter().map(|m| m.id.clone()).collect();
    let transfer = transfer_matrix(labels, &objectives, &optima)?;
    Ok(EnsembleAnalysis {
        members,
        objectives,
        optima,
        transfer,
    })
}

impl EnsembleAnalysis {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn parities(&self) -> Vec<f64> {
        self.members.iter().map(EnsembleMember::parity).collect()
    }

    /// Indices of members whose parity lies in `[lo, hi]`.
    pub fn in_parity_range(&self, lo: f64, hi: f64) -> Vec<usize> {
        self.parities()
            .iter()
            .enumerate()
            .filter(|(_, &p)| (lo - 1e-12..=hi + 1e-12).contains(&p))
            .map(|(k, _)| k)
            .collect()
    }

    /// Mean coefficient for each (donor level, acceptor level) cell,
    /// self-pairs included.
    pub fn heatmap(&self, levels: usize) -> Vec<Vec<f64>> {
        let mut sum = vec![vec![0.0; levels]; levels];
        let mut count = vec![vec![0usize; levels]; levels];
        for (d, dm) in self.members.iter().enumerate() {
            for (a, am) in self.members.iter().enumerate() {
                sum[dm.level][am.level] += self.transfer.get(d, a);
                count[dm.level][am.level] += 1;
            }
        }
        sum.into_iter()
            .zip(count)
            .map(|(row, n)| row.into_iter().zip(n).map(|(s, c)| if c == 0 { f64::NAN } else { s / c as f64 }).collect())
            .collect()
    }

    /// Mean coefficient among near-pure pairs of equal parity minus the mean
    /// across opposite parities. Near-pure means parity within `band` of 0
    /// or 1.
    pub fn parity_block_gap(&self, band: f64) -> Result<ParityBlocks> {
        let odd = self.in_parity_range(0.0, band);
        let even = self.in_parity_range(1.0 - band, 1.0);
        let m = &self.transfer;
        let blocks = ParityBlocks {
            odd_odd: m.block_mean(&odd, &odd),
            even_even: m.block_mean(&even, &even),
            odd_even: m.block_mean(&odd, &even),
            even_odd: m.block_mean(&even, &odd),
        };
        if blocks.same().is_none() || blocks.cross().is_none() {
            return Err(Error::Degenerate("ensemble lacks near-pure odd or even graphs".into()));
        }
        Ok(blocks)
    }

    pub fn min_coefficient(&self) -> f64 {
        self.transfer.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn center_counts(&self, centers: &CenterSet, radius: f64) -> Vec<CenterCounts> {
        self.optima.iter().map(|o| classify_optima(o, centers, radius)).collect()
    }

    pub fn exact_cuts(&self) -> Result<Vec<usize>> {
        self.members.par_iter().map(|m| solve_exact(&m.graph).map(|c| c.value)).collect()
    }

    /// Per-center ratios of every member.
    pub fn center_ratios(&self, centers: &CenterSet, basis: RatioBasis) -> Result<Vec<[f64; CENTER_COUNT]>> {
        let denominators: Vec<f64> = match basis {
            RatioBasis::QaoaOptimum => self.optima.iter().map(|o| o.best().energy).collect(),
            RatioBasis::MaxCut => self.exact_cuts()?.into_iter().map(|c| c as f64).collect(),
        };
        self.objectives
            .iter()
            .zip(denominators)
            .map(|(o, d)| center_ratios(o, d, centers))
            .collect()
    }

    /// SS, PS, SPS and the true coefficient for every ordered pair.
    pub fn similarity_records(&self, map: &TransferMap, centers: &CenterSet, basis: RatioBasis) -> Result<Vec<SimilarityRecord>> {
        let ars = self.center_ratios(centers, basis)?;
        let n = self.len();
        (0..n * n)
            .into_par_iter()
            .map(|k| {
                let (d, a) = (k / n, k % n);
                let (dg, ag) = (&self.members[d].graph, &self.members[a].graph);
                Ok(SimilarityRecord {
                    donor_id: self.members[d].id.clone(),
                    acceptor_id: self.members[a].id.clone(),
                    ss: subgraph_similarity(dg, ag, map)?,
                    ps: parity_similarity(dg, ag),
                    sps: sps(&ars[d], &ars[a]),
                    true_t: self.transfer.get(d, a),
                })
            })
            .collect()
    }
}

/// Ensemble seed behind the bundled center calibration. Kept apart from the
/// default analysis seed so that calibration and evaluation use different
/// graphs.
pub const CALIBRATION_SEED: u64 = 1;

/// Six centers from the optima of an analyzed ensemble.
pub fn calibrate_from_analysis(analysis: &EnsembleAnalysis, opts: &CalibrationOptions) -> Result<CenterSet> {
    let points: Vec<_> = analysis.optima.iter().flat_map(|o| o.params().collect::<Vec<_>>()).collect();
    let subjects: Vec<CalibrationSubject> = analysis
        .members
        .iter()
        .zip(&analysis.objectives)
        .zip(&analysis.optima)
        .map(|((m, objective), o)| CalibrationSubject {
            objective: objective.clone(),
            parity: m.parity(),
            best_energy: o.best().energy,
        })
        .collect();
    calibrate_centers(&points, &subjects, opts)
}

/// The protocol that produced the bundled calibration.
pub fn reference_calibration() -> Result<CenterSet> {
    let spec = EnsembleSpec {
        seed: CALIBRATION_SEED,
        ..EnsembleSpec::default()
    };
    let cfg = OptimizerConfig::default().with_seed(CALIBRATION_SEED);
    let analysis = analyze(generate_ensemble(&spec)?, &cfg)?;
    calibrate_from_analysis(&analysis, &CalibrationOptions::default())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParityBlocks {
    pub odd_odd: Option<f64>,
    pub even_even: Option<f64>,
    pub odd_even: Option<f64>,
    pub even_odd: Option<f64>,
}

impl ParityBlocks {
    fn pooled(a: Option<f64>, b: Option<f64>) -> Option<f64> {
        match (a, b) {
            (Some(x), Some(y)) => Some((x + y) / 2.0),
            (x, None) | (None, x) => x,
        }
    }

    pub fn same(&self) -> Option<f64> {
        Self::pooled(self.odd_odd, self.even_even)
    }

    pub fn cross(&self) -> Option<f64> {
        Self::pooled(self.odd_even, self.even_odd)
    }

    pub fn gap(&self) -> f64 {
        self.same().unwrap_or(f64::NAN) - self.cross().unwrap_or(f64::NAN)
    }
}
