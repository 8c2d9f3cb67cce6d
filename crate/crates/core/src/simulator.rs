//! Dense statevector reference for depth-1 QAOA on MaxCut.
//!
//! The state is `U_B(beta) U_C(gamma) |+...+>` with `U_C = exp(-i gamma C)`,
//! `C` the number of cut edges, and `U_B = exp(-i beta sum_j X_j)`.
//! Qubit `q` is bit `q` of the amplitude index.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::fmt;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::rng::SplitMix64;

pub const DEFAULT_QUBIT_CAP: usize = 20;

/// A depth-1 schedule point `(gamma, beta)` in radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QaoaParams {
    pub gamma: f64,
    pub beta: f64,
}

impl QaoaParams {
    pub fn new(gamma: f64, beta: f64) -> Self {
        Self { gamma, beta }
    }

    /// Reduces into `[0, 2pi) x [0, pi)`.
    pub fn canonical(self) -> Self {
        Self {
            gamma: wrap(self.gamma, TAU),
            beta: wrap(self.beta, PI),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.gamma.is_finite() && self.beta.is_finite()
    }
}

impl fmt::Display for QaoaParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(gamma={:.6}, beta={:.6})", self.gamma, self.beta)
    }
}

pub(crate) fn wrap(x: f64, period: f64) -> f64 {
    let r = x.rem_euclid(period);
    // rem_euclid can round up to exactly `period` for tiny negative inputs.
    if r >= period {
        0.0
    } else {
        r
    }
}

/// Signed distance on a circle of the given period, in `[-period/2, period/2]`.
pub(crate) fn circular_delta(a: f64, b: f64, period: f64) -> f64 {
    let d = wrap(a - b, period);
    if d > period / 2.0 {
        d - period
    } else {
        d
    }
}

/// The QAOA expectation is invariant under `beta -> beta + pi/2`
/// (the mixer then differs by a global bit flip, which commutes with `C`).
pub const BETA_SYMMETRY_PERIOD: f64 = FRAC_PI_2;

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// Uniform superposition `|+>^n`.
    pub fn uniform(qubits: usize) -> Self {
        let dim = 1usize << qubits;
        let amp = Complex64::new((dim as f64).sqrt().recip(), 0.0);
        Self {
            qubits,
            amplitudes: vec![amp; dim],
        }
    }

    pub fn basis(qubits: usize, index: usize) -> Self {
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << qubits];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Self { qubits, amplitudes }
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Multiplies each amplitude by `exp(-i gamma cost[z])`.
    fn apply_diagonal_phase(&mut self, cost: &[u32], gamma: f64) {
        for (amp, &c) in self.amplitudes.iter_mut().zip(cost) {
            *amp *= Complex64::from_polar(1.0, -gamma * c as f64);
        }
    }

    /// Applies `exp(-i beta X)` to every qubit.
    fn apply_mixer(&mut self, beta: f64) {
        let (c, s) = (beta.cos(), beta.sin());
        let diag = Complex64::new(c, 0.0);
        let off = Complex64::new(0.0, -s);
        for q in 0..self.qubits {
            let stride = 1usize << q;
            for block in self.amplitudes.chunks_exact_mut(2 * stride) {
                let (lo, hi) = block.split_at_mut(stride);
                for (a0, a1) in lo.iter_mut().zip(hi.iter_mut()) {
                    let (x, y) = (*a0, *a1);
                    *a0 = diag * x + off * y;
                    *a1 = off * x + diag * y;
                }
            }
        }
    }
}

/// Cut value of every basis state for the given edge list.
fn cut_table(qubits: usize, edges: &[(usize, usize)]) -> Vec<u32> {
    (0..1usize << qubits)
        .map(|z| {
            edges
                .iter()
                .filter(|&&(u, v)| ((z >> u) ^ (z >> v)) & 1 == 1)
                .count() as u32
        })
        .collect()
}

/// Measurement outcome; node `k` is character `k` of the display string.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Bitstring {
    pub bits: u64,
    pub len: usize,
}

impl fmt::Display for Bitstring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for k in 0..self.len {
            f.write_str(if (self.bits >> k) & 1 == 1 { "1" } else { "0" })?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Simulator {
    qubit_cap: usize,
}

impl Default for Simulator {
    fn default() -> Self {
        Self {
            qubit_cap: DEFAULT_QUBIT_CAP,
        }
    }
}

impl Simulator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_qubit_cap(qubit_cap: usize) -> Self {
        Self { qubit_cap }
    }

    pub fn qubit_cap(&self) -> usize {
        self.qubit_cap
    }

    fn check(&self, g: &Graph) -> Result<()> {
        if g.node_count() > self.qubit_cap {
            return Err(Error::CapExceeded {
                nodes: g.node_count(),
                cap: self.qubit_cap,
            });
        }
        Ok(())
    }

    pub fn prepare_state(&self, g: &Graph, params: QaoaParams) -> Result<StateVector> {
        self.check(g)?;
        let cost = cut_table(g.node_count(), g.edges());
        Ok(prepare(g.node_count(), &cost, params))
    }

    /// Expected number of cut edges.
    pub fn energy(&self, g: &Graph, params: QaoaParams) -> Result<f64> {
        self.check(g)?;
        let cost = cut_table(g.node_count(), g.edges());
        let state = prepare(g.node_count(), &cost, params);
        Ok(expectation(&state, &cost))
    }

    /// Expectation of a single edge term `(1 - Z_u Z_v) / 2`.
    pub fn edge_energy(&self, g: &Graph, params: QaoaParams, edge: (usize, usize)) -> Result<f64> {
        self.check(g)?;
        if !g.has_edge(edge.0, edge.1) {
            return Err(Error::MissingEdge(edge.0, edge.1));
        }
        let cost = cut_table(g.node_count(), g.edges());
        let state = prepare(g.node_count(), &cost, params);
        let term = cut_table(g.node_count(), &[edge]);
        Ok(expectation(&state, &term))
    }
}

fn prepare(qubits: usize, cost: &[u32], params: QaoaParams) -> StateVector {
    let mut state = StateVector::uniform(qubits);
    state.apply_diagonal_phase(cost, params.gamma);
    state.apply_mixer(params.beta);
    state
}

fn expectation(state: &StateVector, diagonal: &[u32]) -> f64 {
    state
        .amplitudes
        .iter()
        .zip(diagonal)
        .map(|(a, &c)| a.norm_sqr() * c as f64)
        .sum()
}

/// Draws `shots` i.i.d. outcomes from `|amplitude|^2`.
pub fn sample_cut(state: &StateVector, shots: usize, seed: u64) -> Vec<Bitstring> {
    let mut cumulative = Vec::with_capacity(state.amplitudes.len());
    let mut total = 0.0;
    for a in &state.amplitudes {
        total += a.norm_sqr();
        cumulative.push(total);
    }
    let mut rng = SplitMix64::new(seed);
    (0..shots)
        .map(|_| {
            let r = rng.gen::<f64>() * total;
            let idx = cumulative
                .partition_point(|&c| c <= r)
                .min(cumulative.len() - 1);
            Bitstring {
                bits: idx as u64,
                len: state.qubits,
            }
        })
        .collect()
}
