//! Undirected simple graphs, parity, and depth-1 lightcone classes.
//!
//! At depth one the expectation of an edge term `C_uv` only depends on the
//! edges incident to `u` or `v`. Up to isomorphism that neighborhood is
//! fixed by three numbers: the two endpoint degrees and the number of
//! shared neighbors (triangles through the edge). [`LightconeClass`]
//! carries exactly that triple and keys every per-edge energy cache.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Undirected simple graph on nodes `0..node_count`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    node_count: usize,
    edges: Vec<(usize, usize)>,
    adjacency: Vec<Vec<usize>>,
}

impl Graph {
    /// Builds a graph, rejecting self-loops, duplicate edges and out-of-range
    /// endpoints. Edge orientation and order do not matter.
    pub fn new(node_count: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut canonical = Vec::new();
        for (u, v) in edges {
            if u >= node_count || v >= node_count {
                return Err(Error::InvalidGraph(format!(
                    "edge ({u}, {v}) out of range for {node_count} nodes"
                )));
            }
            if u == v {
                return Err(Error::InvalidGraph(format!("self-loop at node {u}")));
            }
            canonical.push((u.min(v), u.max(v)));
        }
        canonical.sort_unstable();
        if let Some(w) = canonical.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidGraph(format!(
                "duplicate edge ({}, {})",
                w[0].0, w[0].1
            )));
        }
        let mut adjacency = vec![Vec::new(); node_count];
        for &(u, v) in &canonical {
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        Ok(Self {
            node_count,
            edges: canonical,
            adjacency,
        })
    }

    pub fn complete(n: usize) -> Self {
        let edges = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v)));
        Self::new(n, edges).expect("complete graph is simple")
    }

    pub fn cycle(n: usize) -> Self {
        assert!(n >= 3, "cycle needs at least 3 nodes");
        Self::new(n, (0..n).map(|u| (u, (u + 1) % n))).expect("cycle is simple")
    }

    pub fn path(n: usize) -> Self {
        Self::new(n, (1..n).map(|u| (u - 1, u))).expect("path is simple")
    }

    /// Star with node 0 as the center and `leaves` pendant nodes.
    pub fn star(leaves: usize) -> Self {
        Self::new(leaves + 1, (1..=leaves).map(|v| (0, v))).expect("star is simple")
    }

    /// Disjoint union; nodes of `other` are shifted by `self.node_count()`.
    pub fn disjoint_union(&self, other: &Graph) -> Self {
        let shift = self.node_count;
        let edges = self
            .edges
            .iter()
            .copied()
            .chain(other.edges.iter().map(|&(u, v)| (u + shift, v + shift)));
        Self::new(self.node_count + other.node_count, edges).expect("union of simple graphs")
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edges as `(u, v)` with `u < v`, sorted lexicographically.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.adjacency.iter().map(Vec::len).collect()
    }

    pub fn max_degree(&self) -> usize {
        self.adjacency.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.node_count && v < self.node_count && self.adjacency[u].binary_search(&v).is_ok()
    }

    pub fn common_neighbors(&self, u: usize, v: usize) -> usize {
        let (a, b) = (&self.adjacency[u], &self.adjacency[v]);
        let (mut i, mut j, mut count) = (0, 0, 0);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    count += 1;
                    i += 1;
                    j += 1;
                }
            }
        }
        count
    }

    pub fn component_count(&self) -> usize {
        let mut seen = vec![false; self.node_count];
        let mut stack = Vec::new();
        let mut components = 0;
        for start in 0..self.node_count {
            if seen[start] {
                continue;
            }
            components += 1;
            seen[start] = true;
            stack.push(start);
            while let Some(v) = stack.pop() {
                for &w in &self.adjacency[v] {
                    if !seen[w] {
                        seen[w] = true;
                        stack.push(w);
                    }
                }
            }
        }
        components
    }

    pub fn is_connected(&self) -> bool {
        self.component_count() <= 1
    }

    /// Number of edges crossing the bipartition given by `assignment`.
    pub fn cut_value(&self, assignment: &[bool]) -> usize {
        self.edges
            .iter()
            .filter(|&&(u, v)| assignment[u] != assignment[v])
            .count()
    }

    /// Serializes to the text format: `N M` header then one `u v` line per edge.
    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.node_count, self.edges.len());
        for (u, v) in &self.edges {
            out.push_str(&format!("{u} {v}\n"));
        }
        out
    }

    /// Parses the text format. Blank lines and `#` comments are ignored;
    /// edges may appear in any order or orientation.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, line)| (i + 1, line.split('#').next().unwrap_or("").trim()))
            .filter(|(_, line)| !line.is_empty());
        let (header_line, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            msg: "missing `N M` header".into(),
        })?;
        let (n, m) = parse_pair(header_line, header)?;
        let mut edges = Vec::with_capacity(m);
        for (line_no, line) in lines {
            edges.push(parse_pair(line_no, line)?);
        }
        if edges.len() != m {
            return Err(Error::Parse {
                line: header_line,
                msg: format!("header declares {m} edges but {} were listed", edges.len()),
            });
        }
        Self::new(n, edges)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_text(&text)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    /// Hex SHA-256 of the canonical text form; stable identifier for caches
    /// and output records.
    pub fn content_hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_text().as_bytes()))
    }
}

fn parse_pair(line: usize, text: &str) -> Result<(usize, usize)> {
    let mut parts = text.split_whitespace();
    let mut next = || -> Result<usize> {
        parts
            .next()
            .ok_or_else(|| Error::Parse {
                line,
                msg: "expected two integers".into(),
            })?
            .parse()
            .map_err(|e| Error::Parse {
                line,
                msg: format!("{e}"),
            })
    };
    let pair = (next()?, next()?);
    if parts.next().is_some() {
        return Err(Error::Parse {
            line,
            msg: "trailing tokens".into(),
        });
    }
    Ok(pair)
}

/// Fraction of nodes with even degree.
pub fn parity(g: &Graph) -> f64 {
    if g.node_count() == 0 {
        return 0.0;
    }
    let even = g.degrees().iter().filter(|d| *d % 2 == 0).count();
    even as f64 / g.node_count() as f64
}

/// Isomorphism class of a depth-1 edge neighborhood: endpoint degrees
/// `i <= j` and `f` shared neighbors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct LightconeClass {
    pub i: usize,
    pub j: usize,
    pub f: usize,
}

impl LightconeClass {
    /// Canonicalizes the degree order; panics if the triple cannot occur.
    pub fn new(i: usize, j: usize, f: usize) -> Self {
        Self::try_new(i, j, f).unwrap_or_else(|e| panic!("{e}"))
    }

    pub fn try_new(i: usize, j: usize, f: usize) -> Result<Self> {
        let (i, j) = (i.min(j), i.max(j));
        if i == 0 || f + 1 > i {
            return Err(Error::InvalidGraph(format!(
                "({i},{j},{f}) is not a lightcone class"
            )));
        }
        Ok(Self { i, j, f })
    }

    /// Nodes in the canonical realization.
    pub fn node_count(&self) -> usize {
        self.i + self.j - self.f
    }

    /// Both endpoint degrees odd.
    pub fn is_odd(&self) -> bool {
        self.i % 2 == 1 && self.j % 2 == 1
    }

    /// Both endpoint degrees even.
    pub fn is_even(&self) -> bool {
        self.i.is_multiple_of(2) && self.j.is_multiple_of(2)
    }
}

impl fmt::Display for LightconeClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.i, self.j, self.f)
    }
}

impl FromStr for LightconeClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let inner = s
            .trim()
            .strip_prefix('(')
            .and_then(|s| s.strip_suffix(')'))
            .unwrap_or(s.trim());
        let parts: Vec<_> = inner.split(',').map(str::trim).collect();
        let bad = || Error::Parse {
            line: 0,
            msg: format!("expected `(i,j,f)`, got `{s}`"),
        };
        if parts.len() != 3 {
            return Err(bad());
        }
        let nums = parts
            .iter()
            .map(|p| p.parse::<usize>().map_err(|_| bad()))
            .collect::<Result<Vec<_>>>()?;
        Self::try_new(nums[0], nums[1], nums[2])
    }
}

/// Number of edges per lightcone class.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LightconeCensus {
    counts: BTreeMap<LightconeClass, usize>,
}

impl LightconeCensus {
    pub fn counts(&self) -> &BTreeMap<LightconeClass, usize> {
        &self.counts
    }

    pub fn get(&self, class: &LightconeClass) -> usize {
        self.counts.get(class).copied().unwrap_or(0)
    }

    pub fn total(&self) -> usize {
        self.counts.values().sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (LightconeClass, usize)> + '_ {
        self.counts.iter().map(|(c, n)| (*c, *n))
    }

    pub fn distinct(&self) -> usize {
        self.counts.len()
    }
}

pub fn lightcone_class(g: &Graph, edge: (usize, usize)) -> Result<LightconeClass> {
    let (u, v) = edge;
    if !g.has_edge(u, v) {
        return Err(Error::MissingEdge(u, v));
    }
    Ok(LightconeClass::new(
        g.degree(u),
        g.degree(v),
        g.common_neighbors(u, v),
    ))
}

pub fn census(g: &Graph) -> LightconeCensus {
    let mut counts = BTreeMap::new();
    for &(u, v) in g.edges() {
        let class = LightconeClass::new(g.degree(u), g.degree(v), g.common_neighbors(u, v));
        *counts.entry(class).or_insert(0) += 1;
    }
    LightconeCensus { counts }
}

/// All classes with endpoint degrees up to `max_degree`, sorted by `(i, j, f)`.
/// With `regular_only` the list is restricted to `i = j >= 2`.
pub fn catalog(max_degree: usize, regular_only: bool) -> Vec<LightconeClass> {
    let mut out = Vec::new();
    for i in 1..=max_degree {
        for j in i..=max_degree {
            if regular_only && (i != j || i < 2) {
                continue;
            }
            for f in 0..i {
                out.push(LightconeClass { i, j, f });
            }
        }
    }
    out
}

/// Canonical graph of a class. Nodes 0 and 1 form the central edge, then the
/// `f` shared neighbors, then the private leaves of node 0, then those of node 1.
pub fn realize_lightcone(class: LightconeClass) -> Graph {
    let LightconeClass { i, j, f } = class;
    let mut edges = vec![(0, 1)];
    let mut next = 2;
    for _ in 0..f {
        edges.push((0, next));
        edges.push((1, next));
        next += 1;
    }
    for _ in 0..i - 1 - f {
        edges.push((0, next));
        next += 1;
    }
    for _ in 0..j - 1 - f {
        edges.push((1, next));
        next += 1;
    }
    Graph::new(next, edges).expect("lightcone realization is simple")
}
