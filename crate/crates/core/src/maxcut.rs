//! Classical MaxCut references for approximation-ratio denominators.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::rng::SplitMix64;

pub const BRUTE_FORCE_CAP: usize = 26;
pub const BRANCH_AND_BOUND_CAP: usize = 40;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CutResult {
    pub value: usize,
    pub assignment: Vec<bool>,
    pub exact: bool,
}

impl CutResult {
    pub fn assignment_string(&self) -> String {
        self.assignment.iter().map(|&b| if b { '1' } else { '0' }).collect()
    }

    /// `{"value": .., "exact": .., "assignment": "0101.."}`
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "value": self.value,
            "exact": self.exact,
            "assignment": self.assignment_string(),
        })
    }
}

/// Exact optimum: enumeration up to [`BRUTE_FORCE_CAP`] nodes, branch and
/// bound up to [`BRANCH_AND_BOUND_CAP`].
pub fn solve_exact(g: &Graph) -> Result<CutResult> {
    match g.node_count() {
        n if n <= BRUTE_FORCE_CAP => Ok(brute_force(g)),
        n if n <= BRANCH_AND_BOUND_CAP => Ok(branch_and_bound(g)),
        n => Err(Error::CapExceeded {
            nodes: n,
            cap: BRANCH_AND_BOUND_CAP,
        }),
    }
}

/// Gray-code enumeration with node 0 pinned to side 0. Ties resolve to the
/// lexicographically smallest assignment string.
pub fn brute_force(g: &Graph) -> CutResult {
    let n = g.node_count();
    if n <= 1 {
        return CutResult {
            value: 0,
            assignment: vec![false; n],
            exact: true,
        };
    }
    assert!(n <= 63, "brute force limited to 63 nodes");
    let masks: Vec<u64> = (0..n)
        .map(|v| g.neighbors(v).iter().fold(0u64, |m, &w| m | (1 << w)))
        .collect();
    let lex_key = |mask: u64| mask.reverse_bits() >> (64 - n);
    let mut mask = 0u64;
    let mut cut = 0i64;
    let mut best = (0i64, lex_key(0), 0u64);
    for step in 1u64..(1u64 << (n - 1)) {
        // Gray code flips bit `trailing_zeros(step)` of the free nodes 1..n.
        let v = step.trailing_zeros() as usize + 1;
        let same_side = if mask >> v & 1 == 1 {
            masks[v] & mask
        } else {
            masks[v] & !mask
        };
        let opposite = masks[v].count_ones() as i64 - same_side.count_ones() as i64;
        cut += same_side.count_ones() as i64 - opposite;
        mask ^= 1 << v;
        if cut > best.0 || (cut == best.0 && lex_key(mask) < best.1) {
            best = (cut, lex_key(mask), mask);
        }
    }
    CutResult {
        value: best.0 as usize,
        assignment: (0..n).map(|v| best.2 >> v & 1 == 1).collect(),
        exact: true,
    }
}

/// Depth-first search over vertices in decreasing-degree order. The bound
/// adds, for each unassigned vertex, the better of its two sides against
/// assigned neighbors, plus every edge with both endpoints unassigned.
pub fn branch_and_bound(g: &Graph) -> CutResult {
    let n = g.node_count();
    if n <= 1 {
        return brute_force(g);
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&v| (std::cmp::Reverse(g.degree(v)), v));
    let incumbent = solve_heuristic(g, 0, 20);
    let mut search = Search {
        g,
        order: &order,
        side: vec![None; n],
        best_value: incumbent.value,
        best_assignment: incumbent.assignment,
    };
    search.side[order[0]] = Some(false);
    search.descend(1, 0);
    CutResult {
        value: search.best_value,
        assignment: search.best_assignment,
        exact: true,
    }
}

struct Search<'a> {
    g: &'a Graph,
    order: &'a [usize],
    side: Vec<Option<bool>>,
    best_value: usize,
    best_assignment: Vec<bool>,
}

impl Search<'_> {
    fn bound(&self, depth: usize, cut: usize) -> usize {
        let mut extra = 0;
        let mut free_edges = 0;
        for &v in &self.order[depth..] {
            let (mut zero, mut one) = (0, 0);
            for &w in self.g.neighbors(v) {
                match self.side[w] {
                    Some(false) => zero += 1,
                    Some(true) => one += 1,
                    None => free_edges += 1,
                }
            }
            extra += zero.max(one);
        }
        cut + extra + free_edges / 2
    }

    fn descend(&mut self, depth: usize, cut: usize) {
        if depth == self.order.len() {
            if cut > self.best_value {
                self.best_value = cut;
                self.best_assignment = self.side.iter().map(|s| s.unwrap_or(false)).collect();
            }
            return;
        }
        if self.bound(depth, cut) <= self.best_value {
            return;
        }
        let v = self.order[depth];
        for choice in [false, true] {
            let gained = self
                .g
                .neighbors(v)
                .iter()
                .filter(|&&w| self.side[w] == Some(!choice))
                .count();
            self.side[v] = Some(choice);
            self.descend(depth + 1, cut + gained);
            self.side[v] = None;
        }
    }
}

/// Multistart randomized greedy construction, steepest single-vertex flip
/// ascent, then a short tabu walk that allows non-improving flips. A lower
/// bound only.
pub fn solve_heuristic(g: &Graph, seed: u64, effort: usize) -> CutResult {
    let n = g.node_count();
    let mut rng = SplitMix64::new(seed);
    let mut best = CutResult {
        value: 0,
        assignment: vec![false; n],
        exact: false,
    };
    let mut order: Vec<usize> = (0..n).collect();
    for _ in 0..effort.max(1) {
        order.shuffle(&mut rng);
        let mut side: Vec<Option<bool>> = vec![None; n];
        for &v in &order {
            let (mut zero, mut one) = (0, 0);
            for &w in g.neighbors(v) {
                match side[w] {
                    Some(false) => zero += 1,
                    Some(true) => one += 1,
                    None => {}
                }
            }
            side[v] = Some(match zero.cmp(&one) {
                std::cmp::Ordering::Greater => true,
                std::cmp::Ordering::Less => false,
                std::cmp::Ordering::Equal => rng.gen_bool(0.5),
            });
        }
        let assignment: Vec<bool> = side.into_iter().map(|s| s.unwrap_or(false)).collect();
        let (value, assignment) = tabu_search(g, assignment, &mut rng);
        if value > best.value {
            best.value = value;
            best.assignment = assignment;
        }
    }
    best
}

fn flip_gain(g: &Graph, assignment: &[bool], v: usize) -> i64 {
    let same = g.neighbors(v).iter().filter(|&&w| assignment[w] == assignment[v]).count() as i64;
    2 * same - g.degree(v) as i64
}

fn tabu_search(g: &Graph, mut assignment: Vec<bool>, rng: &mut SplitMix64) -> (usize, Vec<bool>) {
    let n = g.node_count();
    if n == 0 {
        return (0, assignment);
    }
    let mut gain: Vec<i64> = (0..n).map(|v| flip_gain(g, &assignment, v)).collect();
    let mut value = g.cut_value(&assignment) as i64;
    let mut best = (value, assignment.clone());
    let tenure = (n / 10).max(2).min(n.saturating_sub(1).max(1));
    let steps = 20 * n;
    let mut tabu_until = vec![0usize; n];
    for step in 1..=steps {
        let mut pick: Option<usize> = None;
        let mut ties = 0u32;
        for v in 0..n {
            let aspiring = value + gain[v] > best.0;
            if tabu_until[v] >= step && !aspiring {
                continue;
            }
            match pick {
                Some(p) if gain[v] < gain[p] => {}
                Some(p) if gain[v] == gain[p] => {
                    ties += 1;
                    if rng.gen_range(0..=ties) == 0 {
                        pick = Some(v);
                    }
                }
                _ => {
                    pick = Some(v);
                    ties = 0;
                }
            }
        }
        let Some(v) = pick else { break };
        value += gain[v];
        assignment[v] = !assignment[v];
        gain[v] = -gain[v];
        for &w in g.neighbors(v) {
            gain[w] += if assignment[w] == assignment[v] { 2 } else { -2 };
        }
        tabu_until[v] = step + tenure;
        if value > best.0 {
            best = (value, assignment.clone());
        }
    }
    (best.0 as usize, best.1)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ApproximationRatio {
    pub ratio: f64,
    /// False when the denominator is only a heuristic lower bound, in which
    /// case `ratio` overestimates the true approximation ratio.
    pub exact_denominator: bool,
}

pub fn approximation_ratio(qaoa_energy: f64, cut: &CutResult) -> Result<ApproximationRatio> {
    if cut.value == 0 {
        return Err(Error::Degenerate("maximum cut is zero (graph has no edges)".into()));
    }
    Ok(ApproximationRatio {
        ratio: qaoa_energy / cut.value as f64,
        exact_denominator: cut.exact,
    })
}
