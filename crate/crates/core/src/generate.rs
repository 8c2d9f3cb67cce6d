//! Random graphs with a prescribed number of even-degree nodes.
//!
//! A degree sequence is drawn uniformly from the sequences with entries in
//! `[1, max_degree]` and exactly the requested count of even entries, then
//! realized with a configuration-model pairing. Self-loops and multi-edges
//! are removed with degree-preserving double-edge swaps, and disconnected
//! realizations are joined by swapping a cycle edge with an edge of another
//! component.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::rng::SplitMix64;

const SEQUENCE_ATTEMPTS: usize = 20_000;
const PAIRING_ATTEMPTS: usize = 200;

/// A graphical degree sequence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegreeSequence(Vec<usize>);

impl DegreeSequence {
    pub fn new(degrees: Vec<usize>) -> Result<Self> {
        if !is_graphical(&degrees) {
            return Err(Error::Infeasible(format!(
                "degree sequence {degrees:?} is not graphical"
            )));
        }
        Ok(Self(degrees))
    }

    pub fn degrees(&self) -> &[usize] {
        &self.0
    }

    pub fn even_count(&self) -> usize {
        self.0.iter().filter(|d| *d % 2 == 0).count()
    }

    pub fn sum(&self) -> usize {
        self.0.iter().sum()
    }
}

/// Erdős–Gallai test: even sum and, for every prefix of the descending
/// sequence, `sum_{i<=k} d_i <= k(k-1) + sum_{i>k} min(d_i, k)`.
pub fn is_graphical(degrees: &[usize]) -> bool {
    let total: usize = degrees.iter().sum();
    if !total.is_multiple_of(2) {
        return false;
    }
    let mut sorted = degrees.to_vec();
    sorted.sort_unstable_by(|a, b| b.cmp(a));
    let n = sorted.len();
    let mut prefix = 0;
    for k in 1..=n {
        prefix += sorted[k - 1];
        let tail: usize = sorted[k..].iter().map(|&d| d.min(k)).sum();
        if prefix > k * (k - 1) + tail {
            return false;
        }
    }
    true
}

/// Parameters of [`generate_graph_with`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphSpec {
    pub nodes: usize,
    /// Exact number of even-degree nodes.
    pub even_nodes: usize,
    pub max_degree: usize,
    pub connected: bool,
    pub seed: u64,
}

/// Connected random graph on `n` nodes with exactly `even_nodes` even-degree
/// nodes and every degree in `[1, max_degree]`.
pub fn generate_graph(n: usize, even_nodes: usize, max_degree: usize, seed: u64) -> Result<Graph> {
    generate_graph_with(&GraphSpec {
        nodes: n,
        even_nodes,
        max_degree,
        connected: true,
        seed,
    })
}

pub fn generate_graph_with(spec: &GraphSpec) -> Result<Graph> {
    let mut rng = SplitMix64::new(spec.seed);
    let sequence = sample_degree_sequence(spec, &mut rng)?;
    realize_degree_sequence(&sequence, spec.connected, &mut rng)
}

/// Connected random `degree`-regular graph.
pub fn random_regular(n: usize, degree: usize, seed: u64) -> Result<Graph> {
    let sequence = DegreeSequence::new(vec![degree; n])?;
    if degree == 0 || (degree == 1 && n > 2) {
        return Err(Error::Infeasible(format!(
            "no connected {degree}-regular graph on {n} nodes"
        )));
    }
    let mut rng = SplitMix64::new(seed);
    realize_degree_sequence(&sequence, true, &mut rng)
}

fn check_spec(spec: &GraphSpec) -> Result<usize> {
    let n = spec.nodes;
    if n < 2 {
        return Err(Error::Config(format!("need at least 2 nodes, got {n}")));
    }
    if spec.even_nodes > n {
        return Err(Error::Config(format!(
            "{} even nodes requested for {n} nodes",
            spec.even_nodes
        )));
    }
    let cap = spec.max_degree.min(n - 1);
    if cap == 0 {
        return Err(Error::Infeasible("maximum degree must be at least 1".into()));
    }
    if !(n - spec.even_nodes).is_multiple_of(2) {
        return Err(Error::Infeasible(format!(
            "{} odd-degree nodes would give an odd degree sum",
            n - spec.even_nodes
        )));
    }
    if spec.even_nodes > 0 && cap < 2 {
        return Err(Error::Infeasible(format!(
            "even degrees need max degree >= 2 (effective cap {cap})"
        )));
    }
    Ok(cap)
}

/// Uniform draw among sequences (entries in `[1, cap]`, given even count)
/// that are graphical and, when connectivity is requested, have at least
/// `2(n-1)` stubs. Rejection sampling keeps the draw uniform over that set.
pub fn sample_degree_sequence(spec: &GraphSpec, rng: &mut SplitMix64) -> Result<DegreeSequence> {
    let cap = check_spec(spec)?;
    let n = spec.nodes;
    let evens: Vec<usize> = (2..=cap).step_by(2).collect();
    let odds: Vec<usize> = (1..=cap).step_by(2).collect();
    let mut slots: Vec<usize> = (0..n).collect();
    for _ in 0..SEQUENCE_ATTEMPTS {
        slots.shuffle(rng);
        let mut degrees = vec![0; n];
        for (rank, &slot) in slots.iter().enumerate() {
            let choices = if rank < spec.even_nodes { &evens } else { &odds };
            degrees[slot] = choices[rng.gen_range(0..choices.len())];
        }
        let total: usize = degrees.iter().sum();
        if spec.connected && total < 2 * (n - 1) {
            continue;
        }
        if is_graphical(&degrees) {
            return Ok(DegreeSequence(degrees));
        }
    }
    Err(Error::Infeasible(format!(
        "no realizable degree sequence found for n={n}, even nodes={}, max degree={}",
        spec.even_nodes, spec.max_degree
    )))
}

/// Configuration-model realization with swap repair.
pub fn realize_degree_sequence(
    sequence: &DegreeSequence,
    connected: bool,
    rng: &mut SplitMix64,
) -> Result<Graph> {
    let degrees = sequence.degrees();
    let n = degrees.len();
    if connected && n > 1 && sequence.sum() < 2 * (n - 1) {
        return Err(Error::Infeasible(format!(
            "{} stubs cannot connect {n} nodes",
            sequence.sum()
        )));
    }
    if connected && degrees.contains(&0) && n > 1 {
        return Err(Error::Infeasible("isolated node in a connected graph".into()));
    }
    let stubs: Vec<usize> = degrees
        .iter()
        .enumerate()
        .flat_map(|(v, &d)| std::iter::repeat_n(v, d))
        .collect();
    for _ in 0..PAIRING_ATTEMPTS {
        let mut shuffled = stubs.clone();
        shuffled.shuffle(rng);
        let mut edges: Vec<(usize, usize)> = shuffled
            .chunks_exact(2)
            .map(|p| (p[0].min(p[1]), p[0].max(p[1])))
            .collect();
        if !repair_multiedges(&mut edges, rng) {
            continue;
        }
        if connected {
            connect_components(n, &mut edges, rng);
        }
        let graph = Graph::new(n, edges)?;
        debug_assert_eq!(graph.degrees(), degrees);
        if !connected || graph.is_connected() {
            return Ok(graph);
        }
    }
    Err(Error::Infeasible(format!(
        "could not realize degree sequence {degrees:?}"
    )))
}

/// Removes self-loops and repeated edges by double-edge swaps. Returns
/// `false` when the swap budget runs out.
fn repair_multiedges(edges: &mut [(usize, usize)], rng: &mut SplitMix64) -> bool {
    let m = edges.len();
    if m == 0 {
        return true;
    }
    let budget = 100 * m + 100;
    for _ in 0..budget {
        let mut present = HashSet::with_capacity(m);
        let mut bad = None;
        for k in 0..m {
            let (u, v) = edges[k];
            if u == v || !present.insert((u, v)) {
                bad = Some(k);
                break;
            }
        }
        let Some(k) = bad else {
            return true;
        };
        let other = rng.gen_range(0..m);
        if other == k {
            continue;
        }
        let (a, b) = edges[k];
        let (c, d) = edges[other];
        let (x, y) = if rng.gen_bool(0.5) {
            ((a, c), (b, d))
        } else {
            ((a, d), (b, c))
        };
        let x = (x.0.min(x.1), x.0.max(x.1));
        let y = (y.0.min(y.1), y.0.max(y.1));
        if x.0 == x.1 || y.0 == y.1 || x == y {
            continue;
        }
        let collides = edges
            .iter()
            .enumerate()
            .any(|(idx, e)| idx != k && idx != other && (*e == x || *e == y));
        if collides {
            continue;
        }
        edges[k] = x;
        edges[other] = y;
    }
    false
}

fn components(n: usize, edges: &[(usize, usize)]) -> Vec<usize> {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for &(u, v) in edges {
        let (ru, rv) = (find(&mut parent, u), find(&mut parent, v));
        if ru != rv {
            parent[ru.max(rv)] = ru.min(rv);
        }
    }
    (0..n).map(|v| find(&mut parent, v)).collect()
}

/// True when removing `edges[k]` keeps its endpoints connected.
fn on_cycle(n: usize, edges: &[(usize, usize)], k: usize) -> bool {
    let (u, v) = edges[k];
    let mut adjacency = vec![Vec::new(); n];
    for (idx, &(a, b)) in edges.iter().enumerate() {
        if idx != k {
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
    }
    let mut seen = vec![false; n];
    let mut stack = vec![u];
    seen[u] = true;
    while let Some(x) = stack.pop() {
        if x == v {
            return true;
        }
        for &y in &adjacency[x] {
            if !seen[y] {
                seen[y] = true;
                stack.push(y);
            }
        }
    }
    false
}

/// Each swap of a cycle edge `(a,b)` with an edge `(c,d)` of another
/// component into `(a,c),(b,d)` merges the two components and preserves
/// degrees. Requires at least `n - 1` edges.
fn connect_components(n: usize, edges: &mut [(usize, usize)], rng: &mut SplitMix64) {
    loop {
        let label = components(n, edges);
        let mut roots: Vec<usize> = label.clone();
        roots.sort_unstable();
        roots.dedup();
        if roots.len() <= 1 {
            return;
        }
        let cycle_edges: Vec<usize> = (0..edges.len()).filter(|&k| on_cycle(n, edges, k)).collect();
        let Some(&k) = cycle_edges.choose(rng) else {
            return;
        };
        let home = label[edges[k].0];
        let foreign: Vec<usize> = (0..edges.len())
            .filter(|&idx| label[edges[idx].0] != home)
            .collect();
        let Some(&other) = foreign.choose(rng) else {
            return;
        };
        let (a, b) = edges[k];
        let (c, d) = edges[other];
        edges[k] = (a.min(c), a.max(c));
        edges[other] = (b.min(d), b.max(d));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::parity;

    #[test]
    fn erdos_gallai_examples() {
        assert!(is_graphical(&[3, 3, 3, 3]));
        assert!(is_graphical(&[2, 2, 2]));
        assert!(is_graphical(&[1, 1]));
        assert!(!is_graphical(&[3, 3, 1, 1]));
        assert!(!is_graphical(&[1, 1, 1]));
        assert!(!is_graphical(&[4, 1, 1, 1]));
        assert!(is_graphical(&[]));
    }

    #[test]
    fn parity_targets_are_exact() {
        let all_even = generate_graph(20, 20, 6, 7).unwrap();
        assert_eq!(parity(&all_even), 1.0);
        let all_odd = generate_graph(20, 0, 6, 7).unwrap();
        assert_eq!(parity(&all_odd), 0.0);
        for g in [&all_even, &all_odd] {
            assert!(g.is_connected());
            assert!(g.max_degree() <= 6);
            assert!(g.degrees().iter().all(|&d| d >= 1));
        }
    }

    #[test]
    fn odd_even_count_is_infeasible() {
        assert!(matches!(generate_graph(20, 1, 6, 7), Err(Error::Infeasible(_))));
        assert!(matches!(generate_graph(1, 0, 6, 7), Err(Error::Config(_))));
        assert!(matches!(generate_graph(2, 2, 6, 7), Err(Error::Infeasible(_))));
    }

    #[test]
    fn reproducible() {
        let a = generate_graph(30, 14, 6, 99).unwrap();
        let b = generate_graph(30, 14, 6, 99).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, generate_graph(30, 14, 6, 100).unwrap());
    }

    #[test]
    fn regular_graphs() {
        for seed in 0..10 {
            let g = random_regular(16, 3, seed).unwrap();
            assert!(g.degrees().iter().all(|&d| d == 3));
            assert!(g.is_connected());
        }
        assert!(random_regular(5, 3, 0).is_err());
    }
}
