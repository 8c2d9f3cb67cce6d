//! Transferability coefficients and the similarity metrics that predict them.

use std::collections::HashMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::energy::Objective;
use crate::error::{Error, Result};
use crate::graph::{census, parity, Graph, LightconeClass};
use crate::optimizer::{optimize, OptimaSet, OptimizerConfig};
use crate::rng::derive_seed;

/// Lowest value reached by [`parity_similarity`].
pub const PARITY_SIMILARITY_FLOOR: f64 = 0.71;
const PARITY_SLOPE: f64 = 0.29;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferRecord {
    pub donor_id: String,
    pub acceptor_id: String,
    /// Mean of `ratios`. Not clamped at 1.
    pub coefficient: f64,
    /// Acceptor energy at each donor optimum over the acceptor's best energy.
    pub ratios: Vec<f64>,
}

/// `T(D, A)`: evaluates the acceptor at every donor optimum and normalizes by
/// the acceptor's own multistart best.
pub fn transfer_coefficient(donor: &OptimaSet, acceptor: &OptimaSet, acceptor_objective: &Objective) -> Result<TransferRecord> {
    let ratios = transfer_ratios(donor, acceptor.best().energy, acceptor_objective)?;
    Ok(TransferRecord {
        donor_id: donor.subject.clone(),
        acceptor_id: acceptor.subject.clone(),
        coefficient: mean(&ratios),
        ratios,
    })
}

pub fn transfer_ratios(donor: &OptimaSet, acceptor_best: f64, acceptor_objective: &Objective) -> Result<Vec<f64>> {
    if !(acceptor_best > 0.0) {
        return Err(Error::Degenerate(format!("acceptor best energy {acceptor_best} is not positive")));
    }
    if donor.is_empty() {
        return Err(Error::Degenerate("donor has no optima".into()));
    }
    Ok(donor.params().map(|p| acceptor_objective.energy(p) / acceptor_best).collect())
}

pub(crate) fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Square matrix of coefficients, row = donor, column = acceptor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferMatrix {
    pub labels: Vec<String>,
    pub values: Vec<f64>,
}

impl TransferMatrix {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn get(&self, donor: usize, acceptor: usize) -> f64 {
        self.values[donor * self.len() + acceptor]
    }

    pub fn row(&self, donor: usize) -> &[f64] {
        let n = self.len();
        &self.values[donor * n..(donor + 1) * n]
    }

    /// Mean over all `(donor, acceptor)` with donor in `rows` and acceptor in
    /// `cols`, skipping the diagonal.
    pub fn block_mean(&self, rows: &[usize], cols: &[usize]) -> Option<f64> {
        let vals: Vec<f64> = rows
            .iter()
            .flat_map(|&r| cols.iter().filter(move |&&c| c != r).map(move |&c| self.get(r, c)))
            .collect();
        (!vals.is_empty()).then(|| mean(&vals))
    }

    /// Largest `|T(d,a) - T(a,d)|` and the pair attaining it.
    pub fn max_asymmetry(&self) -> (f64, usize, usize) {
        let mut best = (0.0, 0, 0);
        for d in 0..self.len() {
            for a in d + 1..self.len() {
                let gap = (self.get(d, a) - self.get(a, d)).abs();
                if gap > best.0 {
                    best = (gap, d, a);
                }
            }
        }
        best
    }

    /// Header row and column hold the labels; cells use 10 decimals.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("donor\\acceptor");
        for l in &self.labels {
            write!(out, ",\"{l}\"").unwrap();
        }
        out.push('\n');
        for (d, l) in self.labels.iter().enumerate() {
            write!(out, "\"{l}\"").unwrap();
            for v in self.row(d) {
                write!(out, ",{v:.10}").unwrap();
            }
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            msg: "empty matrix".into(),
        })?;
        let labels: Vec<String> = split_quoted(header).into_iter().skip(1).collect();
        let mut values = Vec::with_capacity(labels.len() * labels.len());
        let mut rows = 0;
        for (k, line) in lines {
            let cells = split_quoted(line);
            let parse_err = |msg: String| Error::Parse { line: k + 1, msg };
            if cells.len() != labels.len() + 1 {
                return Err(parse_err(format!("expected {} cells, found {}", labels.len() + 1, cells.len())));
            }
            if rows >= labels.len() || cells[0] != labels[rows] {
                return Err(parse_err(format!("unexpected row label {}", cells[0])));
            }
            for c in &cells[1..] {
                values.push(c.parse::<f64>().map_err(|e| parse_err(format!("{c}: {e}")))?);
            }
            rows += 1;
        }
        if rows != labels.len() {
            return Err(Error::Parse {
                line: rows + 1,
                msg: format!("expected {} rows, found {rows}", labels.len()),
            });
        }
        Ok(Self { labels, values })
    }
}

/// Splits on commas outside double quotes and strips the quotes.
fn split_quoted(line: &str) -> Vec<String> {
    let mut cells = vec![String::new()];
    let mut quoted = false;
    for ch in line.trim_end().chars() {
        match ch {
            '"' => quoted = !quoted,
            ',' if !quoted => cells.push(String::new()),
            _ => cells.last_mut().unwrap().push(ch),
        }
    }
    cells
}

/// Coefficients between every ordered pair of optimized subjects.
pub fn transfer_matrix(labels: Vec<String>, objectives: &[Objective], optima: &[OptimaSet]) -> Result<TransferMatrix> {
    let n = labels.len();
    if objectives.len() != n || optima.len() != n {
        return Err(Error::Config("labels, objectives and optima differ in length".into()));
    }
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|d| {
            (0..n)
                .map(|a| transfer_ratios(&optima[d], optima[a].best().energy, &objectives[a]).map(|r| mean(&r)))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    Ok(TransferMatrix {
        labels,
        values: rows.concat(),
    })
}

/// Restart seed for a lightcone class, independent of which catalog it is in.
pub fn class_seed(seed: u64, class: LightconeClass) -> u64 {
    derive_seed(seed, 0xc1a55, (class.i as u64) << 16 | (class.j as u64) << 8 | class.f as u64)
}

/// Class-level map over a catalog.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferMap {
    pub classes: Vec<LightconeClass>,
    pub matrix: TransferMatrix,
    index: HashMap<LightconeClass, usize>,
}

impl TransferMap {
    pub fn new(classes: Vec<LightconeClass>, matrix: TransferMatrix) -> Result<Self> {
        if matrix.len() != classes.len() || matrix.values.len() != classes.len() * classes.len() {
            return Err(Error::Config("matrix shape does not match class list".into()));
        }
        let index = classes.iter().enumerate().map(|(k, c)| (*c, k)).collect();
        Ok(Self { classes, matrix, index })
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn index_of(&self, class: LightconeClass) -> Result<usize> {
        self.index.get(&class).copied().ok_or(Error::UnknownClass(class))
    }

    pub fn get(&self, donor: LightconeClass, acceptor: LightconeClass) -> Result<f64> {
        Ok(self.matrix.get(self.index_of(donor)?, self.index_of(acceptor)?))
    }

    pub fn to_csv(&self) -> String {
        self.matrix.to_csv()
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let matrix = TransferMatrix::from_csv(text)?;
        let classes = matrix
            .labels
            .iter()
            .map(|l| l.parse())
            .collect::<Result<Vec<LightconeClass>>>()?;
        Self::new(classes, matrix)
    }
}

/// Optimizes every class with its own [`class_seed`] and returns the map
/// together with the per-class optima.
pub fn transfer_map(classes: &[LightconeClass], cfg: &OptimizerConfig) -> Result<(TransferMap, Vec<OptimaSet>)> {
    let objectives: Vec<Objective> = classes.iter().map(|&c| Objective::from_class(c)).collect();
    let optima = classes
        .par_iter()
        .zip(&objectives)
        .map(|(&c, obj)| optimize(c.to_string(), obj, &cfg.clone().with_seed(class_seed(cfg.seed, c))))
        .collect::<Result<Vec<_>>>()?;
    let labels = classes.iter().map(ToString::to_string).collect();
    let matrix = transfer_matrix(labels, &objectives, &optima)?;
    Ok((TransferMap::new(classes.to_vec(), matrix)?, optima))
}

/// `MT(G)`: count-weighted mean of `T` over ordered pairs of distinct classes
/// in the census of `g`. A graph with a single class scores 1.
pub fn mutual_transferability(g: &Graph, map: &TransferMap) -> Result<f64> {
    let counts: Vec<(LightconeClass, f64)> = census(g).iter().map(|(c, n)| (c, n as f64)).collect();
    let (mut num, mut den) = (0.0, 0.0);
    for &(d, nd) in &counts {
        for &(a, na) in &counts {
            if d != a {
                num += nd * na * map.get(d, a)?;
                den += nd * na;
            }
        }
    }
    Ok(if den == 0.0 { 1.0 } else { num / den })
}

/// `SS(D, A)`: edge-weighted average of class-level coefficients.
pub fn subgraph_similarity(d: &Graph, a: &Graph, map: &TransferMap) -> Result<f64> {
    if d.edge_count() == 0 || a.edge_count() == 0 {
        return Err(Error::Degenerate("similarity of an edgeless graph".into()));
    }
    let (cd, ca) = (census(d), census(a));
    let mut sum = 0.0;
    for (dc, nd) in cd.iter() {
        for (ac, na) in ca.iter() {
            sum += (nd * na) as f64 * map.get(dc, ac)?;
        }
    }
    Ok(sum / (d.edge_count() * a.edge_count()) as f64)
}

/// `PS(D, A) = 1 - 0.29 |parity(D) - parity(A)|`.
pub fn parity_similarity(d: &Graph, a: &Graph) -> f64 {
    parity_similarity_from(parity(d), parity(a))
}

pub fn parity_similarity_from(donor_parity: f64, acceptor_parity: f64) -> f64 {
    1.0 - PARITY_SLOPE * (donor_parity - acceptor_parity).abs()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityRecord {
    pub donor_id: String,
    pub acceptor_id: String,
    pub ss: f64,
    pub ps: f64,
    pub sps: f64,
    pub true_t: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricStats {
    pub mse: f64,
    pub pearson: f64,
    /// Mean of `metric - truth`.
    pub mean_signed_error: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimilarityStats {
    pub ss: MetricStats,
    pub ps: MetricStats,
    pub sps: MetricStats,
}

/// MSE and population Pearson correlation of `metric` against `truth`.
pub fn compare(metric: &[f64], truth: &[f64]) -> Result<MetricStats> {
    if metric.len() != truth.len() {
        return Err(Error::Config("metric and truth differ in length".into()));
    }
    if metric.len() < 2 {
        return Err(Error::Degenerate("need at least two records".into()));
    }
    let n = metric.len() as f64;
    let (mx, my) = (mean(metric), mean(truth));
    let (mut sxy, mut sxx, mut syy, mut se, mut signed) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (&x, &y) in metric.iter().zip(truth) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx).powi(2);
        syy += (y - my).powi(2);
        se += (x - y).powi(2);
        signed += x - y;
    }
    if sxx <= f64::EPSILON * n || syy <= f64::EPSILON * n {
        return Err(Error::Degenerate("zero variance; correlation undefined".into()));
    }
    Ok(MetricStats {
        mse: se / n,
        pearson: sxy / (sxx * syy).sqrt(),
        mean_signed_error: signed / n,
    })
}

pub fn metric_stats(records: &[SimilarityRecord]) -> Result<SimilarityStats> {
    let truth: Vec<f64> = records.iter().map(|r| r.true_t).collect();
    let column = |f: fn(&SimilarityRecord) -> f64| records.iter().map(f).collect::<Vec<_>>();
    Ok(SimilarityStats {
        ss: compare(&column(|r| r.ss), &truth)?,
        ps: compare(&column(|r| r.ps), &truth)?,
        sps: compare(&column(|r| r.sps), &truth)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optimizer::Optimum;
    use approx::assert_abs_diff_eq;

    fn set(subject: &str, energies: &[(f64, f64, f64)]) -> OptimaSet {
        let optima = energies
            .iter()
            .map(|&(gamma, beta, energy)| Optimum {
                gamma,
                beta,
                energy,
                converged: true,
            })
            .collect();
        OptimaSet::from_optima(subject, OptimizerConfig::default(), optima).unwrap()
    }

    #[test]
    fn self_transfer_at_common_optimum_is_one() {
        let class = LightconeClass::new(1, 1, 0);
        let obj = Objective::from_class(class);
        let p = (std::f64::consts::FRAC_PI_2, std::f64::consts::FRAC_PI_8);
        let s = set("e", &vec![(p.0, p.1, 1.0); 20]);
        let rec = transfer_coefficient(&s, &s, &obj).unwrap();
        assert_abs_diff_eq!(rec.coefficient, 1.0, epsilon = 1e-12);
        assert_eq!(rec.ratios.len(), 20);
    }

    #[test]
    fn degenerate_acceptor() {
        let obj = Objective::from_class(LightconeClass::new(1, 1, 0));
        let s = set("e", &[(0.0, 0.0, 0.0)]);
        assert!(transfer_coefficient(&s, &s, &obj).is_err());
    }

    fn toy_map() -> TransferMap {
        let classes = vec![LightconeClass::new(2, 2, 0), LightconeClass::new(2, 2, 1)];
        let matrix = TransferMatrix {
            labels: classes.iter().map(ToString::to_string).collect(),
            values: vec![1.0, 0.8, 0.6, 1.0],
        };
        TransferMap::new(classes, matrix).unwrap()
    }

    #[test]
    fn mutual_transferability_cases() {
        let map = toy_map();
        // Triangle: every edge is (2,2,1).
        assert_eq!(mutual_transferability(&Graph::complete(3), &map).unwrap(), 1.0);
        // Triangle plus a disjoint 4-cycle: three (2,2,1) and four (2,2,0) edges.
        let g = Graph::complete(3).disjoint_union(&Graph::cycle(4));
        let expected = (3.0 * 4.0 * 0.6 + 4.0 * 3.0 * 0.8) / 24.0;
        assert_abs_diff_eq!(mutual_transferability(&g, &map).unwrap(), expected, epsilon = 1e-12);
        let unknown = Graph::star(3).disjoint_union(&Graph::complete(3));
        assert!(matches!(mutual_transferability(&unknown, &map), Err(Error::UnknownClass(_))));
    }

    #[test]
    fn subgraph_similarity_formula() {
        let map = toy_map();
        let tri = Graph::complete(3);
        let sq = Graph::cycle(4);
        assert_abs_diff_eq!(subgraph_similarity(&tri, &sq, &map).unwrap(), 0.6, epsilon = 1e-12);
        assert_abs_diff_eq!(subgraph_similarity(&sq, &sq, &map).unwrap(), 1.0, epsilon = 1e-12);
        let mixed = tri.disjoint_union(&sq);
        let expected = (3.0 * (3.0 * 1.0 + 4.0 * 0.6) + 4.0 * (3.0 * 0.8 + 4.0 * 1.0)) / 49.0;
        assert_abs_diff_eq!(subgraph_similarity(&mixed, &mixed, &map).unwrap(), expected, epsilon = 1e-12);
    }

    #[test]
    fn parity_similarity_values() {
        assert_eq!(parity_similarity_from(0.3, 0.3), 1.0);
        assert_abs_diff_eq!(parity_similarity_from(0.0, 1.0), 0.71, epsilon = 1e-15);
        assert_abs_diff_eq!(parity_similarity_from(0.75, 0.25), 0.855, epsilon = 1e-15);
        // Path on 3 nodes has parity 1/3, a triangle parity 1.
        assert_abs_diff_eq!(parity_similarity(&Graph::path(3), &Graph::complete(3)), 1.0 - 0.29 * 2.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn stats_examples() {
        let truth = [0.8, 0.9, 0.95, 0.7];
        let s = compare(&truth, &truth).unwrap();
        assert_eq!((s.mse, s.mean_signed_error), (0.0, 0.0));
        assert_abs_diff_eq!(s.pearson, 1.0, epsilon = 1e-12);
        let shifted: Vec<f64> = truth.iter().map(|t| t + 0.05).collect();
        let s = compare(&shifted, &truth).unwrap();
        assert_abs_diff_eq!(s.mse, 0.0025, epsilon = 1e-12);
        assert_abs_diff_eq!(s.pearson, 1.0, epsilon = 1e-12);
        assert!(compare(&[1.0, 1.0], &[0.5, 0.7]).is_err());
        assert!(compare(&[1.0], &[0.5]).is_err());
    }

    #[test]
    fn matrix_csv_round_trip() {
        let map = toy_map();
        let csv = map.to_csv();
        assert!(csv.starts_with("donor\\acceptor,\"(2,2,0)\",\"(2,2,1)\"\n"));
        let back = TransferMap::from_csv(&csv).unwrap();
        assert_eq!(back, map);
        assert!(TransferMatrix::from_csv("x,\"a\"\n\"b\",1\n").is_err());
    }

    #[test]
    fn block_mean_and_asymmetry() {
        let m = toy_map().matrix;
        assert_eq!(m.block_mean(&[0], &[1]), Some(0.8));
        assert_eq!(m.block_mean(&[0], &[0]), None);
        let (gap, d, a) = m.max_asymmetry();
        assert_abs_diff_eq!(gap, 0.2, epsilon = 1e-12);
        assert_eq!((d, a), (0, 1));
    }

    #[test]
    fn class_seed_is_stable() {
        let c = LightconeClass::new(3, 3, 0);
        assert_eq!(class_seed(7, c), class_seed(7, c));
        assert_ne!(class_seed(7, c), class_seed(7, LightconeClass::new(3, 3, 1)));
    }
}
