//! Communication graphs and Metropolis mixing matrices.

use std::collections::{BTreeSet, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{asymmetry, spec_norm, Mat};
use crate::scalar::Scalar;

/// Consecutive disconnected Erdős–Rényi draws tolerated before giving up.
pub const ER_MAX_ATTEMPTS: usize = 1000;

/// Undirected simple graph over agents `0..d`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "TopologyDoc", into = "TopologyDoc")]
pub struct Topology {
    d: usize,
    /// Normalized `(i, j)` with `i < j`.
    edges: BTreeSet<(usize, usize)>,
}

#[derive(Serialize, Deserialize)]
struct TopologyDoc {
    d: usize,
    edges: Vec<[usize; 2]>,
}

impl TryFrom<TopologyDoc> for Topology {
    type Error = Error;

    fn try_from(doc: TopologyDoc) -> Result<Self> {
        Topology::new(doc.d, doc.edges.into_iter().map(|[i, j]| (i, j)))
    }
}

impl From<Topology> for TopologyDoc {
    fn from(t: Topology) -> Self {
        TopologyDoc {
            d: t.d,
            edges: t.edges.iter().map(|&(i, j)| [i, j]).collect(),
        }
    }
}

impl Topology {
    /// Rejects self-loops, duplicates (in either orientation) and out-of-range agents.
    pub fn new(d: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        if d == 0 {
            return Err(Error::Topology("at least one agent is required".into()));
        }
        let mut set = BTreeSet::new();
        for (i, j) in edges {
            if i == j {
                return Err(Error::Topology(format!("self-loop at agent {i}")));
            }
            if i >= d || j >= d {
                return Err(Error::Topology(format!("edge ({i}, {j}) out of range for d = {d}")));
            }
            if !set.insert((i.min(j), i.max(j))) {
                return Err(Error::Topology(format!("duplicate edge ({i}, {j})")));
            }
        }
        Ok(Topology { d, edges: set })
    }

    pub fn agents(&self) -> usize {
        self.d
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.edges.contains(&(i.min(j), i.max(j)))
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.d];
        for &(i, j) in &self.edges {
            deg[i] += 1;
            deg[j] += 1;
        }
        deg
    }

    pub fn neighbors(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.d];
        for &(i, j) in &self.edges {
            adj[i].push(j);
            adj[j].push(i);
        }
        adj.iter_mut().for_each(|a| a.sort_unstable());
        adj
    }

    /// Breadth-first reachability from agent 0.
    pub fn is_connected(&self) -> bool {
        let adj = self.neighbors();
        let mut seen = vec![false; self.d];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        let mut reached = 1;
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    reached += 1;
                    queue.push_back(v);
                }
            }
        }
        reached == self.d
    }
}

pub fn ring(d: usize) -> Result<Topology> {
    if d < 3 {
        return Err(Error::Topology(format!("a ring needs at least 3 agents, got {d}")));
    }
    Topology::new(d, (0..d).map(|i| (i, (i + 1) % d)))
}

/// `rows × cols` four-neighbour lattice; agent `r·cols + c` sits at `(r, c)`.
pub fn grid(rows: usize, cols: usize) -> Result<Topology> {
    if rows * cols < 2 {
        return Err(Error::Topology(format!("a {rows}x{cols} grid has fewer than 2 agents")));
    }
    let mut edges = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            let k = r * cols + c;
            if c + 1 < cols {
                edges.push((k, k + 1));
            }
            if r + 1 < rows {
                edges.push((k, k + cols));
            }
        }
    }
    Topology::new(rows * cols, edges)
}

/// Seeded G(d, p) graph. Disconnected draws are retried with `seed + 1`,
/// `seed + 2`, ... so the result depends only on `(d, p_edge, seed)`.
pub fn erdos_renyi(d: usize, p_edge: f64, seed: u64) -> Result<Topology> {
    if d < 2 {
        return Err(Error::Topology(format!("Erdős–Rényi graph needs d >= 2, got {d}")));
    }
    if !(p_edge > 0.0 && p_edge <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "p_edge must lie in (0, 1], got {p_edge}"
        )));
    }
    for attempt in 0..ER_MAX_ATTEMPTS {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(attempt as u64));
        let mut edges = Vec::new();
        for i in 0..d {
            for j in i + 1..d {
                if rng.random::<f64>() < p_edge {
                    edges.push((i, j));
                }
            }
        }
        let t = Topology::new(d, edges)?;
        if t.is_connected() {
            return Ok(t);
        }
    }
    Err(Error::GenerationFailed {
        d,
        p_edge,
        attempts: ER_MAX_ATTEMPTS,
    })
}

/// Symmetric doubly stochastic weight matrix with its connectivity parameter
/// `λ = ‖W − 11ᵀ/d‖₂`.
#[derive(Debug, Clone)]
pub struct MixingMatrix<T> {
    weights: Mat<T>,
    lambda: T,
    /// Per agent: `(j, W(i,j))` for every nonzero entry, ascending in `j`.
    gather: Vec<Vec<(usize, T)>>,
}

const ROW_SUM_TOL: f64 = 1e-12;

impl<T: Scalar> MixingMatrix<T> {
    /// Validates an arbitrary weight matrix: square, symmetric, nonnegative,
    /// rows summing to one.
    pub fn from_weights(weights: Mat<T>) -> Result<Self> {
        if !weights.is_square() || weights.rows() == 0 {
            return Err(Error::Mixing(format!(
                "weights must be a nonempty square matrix, got {}x{}",
                weights.rows(),
                weights.cols()
            )));
        }
        if !weights.is_finite() {
            return Err(Error::NonFinite { what: "mixing weights" });
        }
        if asymmetry(&weights) != T::zero() {
            return Err(Error::Mixing("weights are not symmetric".into()));
        }
        let d = weights.rows();
        for i in 0..d {
            let row = weights.row(i);
            if row.iter().any(|&w| w < T::zero()) {
                return Err(Error::Mixing(format!("row {i} has a negative weight")));
            }
            let sum: T = row.iter().copied().sum();
            if (sum - T::one()).abs() > T::of(ROW_SUM_TOL) {
                return Err(Error::Mixing(format!("row {i} sums to {sum}")));
            }
        }
        let avg = T::one() / T::of(d as f64);
        let deviation = weights.map(|w| w - avg);
        let lambda = spec_norm(&deviation);
        let gather = (0..d)
            .map(|i| {
                (0..d)
                    .filter(|&j| weights[(i, j)] != T::zero())
                    .map(|j| (j, weights[(i, j)]))
                    .collect()
            })
            .collect();
        Ok(MixingMatrix {
            weights,
            lambda,
            gather,
        })
    }

    /// Trivial mixing for a single agent.
    pub fn single() -> Self {
        Self::from_weights(Mat::identity(1)).expect("[1] is doubly stochastic")
    }

    pub fn weights(&self) -> &Mat<T> {
        &self.weights
    }

    pub fn lambda(&self) -> T {
        self.lambda
    }

    pub fn agents(&self) -> usize {
        self.weights.rows()
    }

    /// Nonzero weights of row `i` in ascending column order.
    pub fn row_support(&self, i: usize) -> &[(usize, T)] {
        &self.gather[i]
    }

    /// `Σ_j W(i,j) blocks[j]` accumulated in ascending `j`.
    pub fn gather(&self, i: usize, blocks: &[Mat<T>]) -> Mat<T> {
        let support = &self.gather[i];
        let (j0, w0) = support[0];
        let mut acc = blocks[j0].scale(w0);
        for &(j, w) in &support[1..] {
            acc.axpy(w, &blocks[j]);
        }
        acc
    }
}

/// Metropolis weights: `W(i,j) = 1/(1 + max(deg i, deg j))` on edges and
/// the remaining mass on the diagonal.
pub fn metropolis_weights<T: Scalar>(t: &Topology) -> Result<MixingMatrix<T>> {
    if !t.is_connected() {
        return Err(Error::Disconnected);
    }
    let d = t.agents();
    let deg = t.degrees();
    let mut w = Mat::<T>::zeros(d, d);
    for (i, j) in t.edges() {
        let wij = T::one() / T::of((1 + deg[i].max(deg[j])) as f64);
        w[(i, j)] = wij;
        w[(j, i)] = wij;
    }
    for i in 0..d {
        let off: T = (0..d).filter(|&j| j != i).map(|j| w[(i, j)]).sum();
        w[(i, i)] = T::one() - off;
    }
    MixingMatrix::from_weights(w)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ring_shapes() {
        let t = ring(3).unwrap();
        assert_eq!(t.edge_count(), 3);
        let t = ring(16).unwrap();
        assert_eq!(t.edge_count(), 16);
        assert!(t.degrees().iter().all(|&k| k == 2));
        assert!(ring(4).unwrap().is_connected());
        assert!(ring(2).is_err());
    }

    #[test]
    fn grid_shapes() {
        assert_eq!(grid(1, 2).unwrap().edge_count(), 1);
        assert_eq!(grid(2, 3).unwrap().edge_count(), 7);
        let g = grid(4, 4).unwrap();
        assert_eq!(g.edge_count(), 24);
        let deg = g.degrees();
        assert_eq!(deg[0], 2);
        assert_eq!(deg[5], 4);
        assert!(grid(1, 1).is_err());
    }

    #[test]
    fn topology_rejects_bad_edges() {
        assert!(Topology::new(3, [(0, 0)]).is_err());
        assert!(Topology::new(3, [(0, 1), (1, 0)]).is_err());
        assert!(Topology::new(3, [(0, 3)]).is_err());
        assert!(Topology::new(0, []).is_err());
    }

    #[test]
    fn complete_er_graph() {
        let t = erdos_renyi(6, 1.0, 0).unwrap();
        assert_eq!(t.edge_count(), 15);
        assert!(erdos_renyi(6, 0.0, 0).is_err());
        assert!(erdos_renyi(1, 0.5, 0).is_err());
    }

    #[test]
    fn er_replays_deterministically() {
        let a = erdos_renyi(16, 0.5, 7).unwrap();
        let b = erdos_renyi(16, 0.5, 7).unwrap();
        assert_eq!(a, b);
        assert!(a.is_connected());
    }

    #[test]
    fn er_gives_up_on_hopeless_probability() {
        let err = erdos_renyi(60, 1e-9, 1).unwrap_err();
        assert!(matches!(
            err,
            Error::GenerationFailed {
                attempts: ER_MAX_ATTEMPTS,
                ..
            }
        ));
    }

    #[test]
    fn triangle_is_exact_average() {
        let w = metropolis_weights::<f64>(&ring(3).unwrap()).unwrap();
        let third = 1.0 / 3.0;
        for i in 0..3 {
            for j in 0..3 {
                assert!((w.weights()[(i, j)] - third).abs() < 1e-16);
            }
        }
        assert!(w.lambda() < 1e-15);
    }

    #[test]
    fn metropolis_rejects_disconnected() {
        let t = Topology::new(4, [(0, 1), (2, 3)]).unwrap();
        assert!(matches!(metropolis_weights::<f64>(&t), Err(Error::Disconnected)));
    }

    #[test]
    fn from_weights_validation() {
        let bad = Mat::<f64>::from_rows(&[[0.5, 0.5], [0.4, 0.6]]);
        assert!(MixingMatrix::from_weights(bad).is_err());
        let neg = Mat::<f64>::from_rows(&[[1.5, -0.5], [-0.5, 1.5]]);
        assert!(MixingMatrix::from_weights(neg).is_err());
        let id = MixingMatrix::from_weights(Mat::<f64>::identity(3)).unwrap();
        assert!((id.lambda() - 1.0).abs() < 1e-14);
        assert_eq!(MixingMatrix::<f64>::single().lambda(), 0.0);
    }

    #[test]
    fn topology_json_round_trip() {
        let t = grid(2, 3).unwrap();
        let json = serde_json::to_string(&t).unwrap();
        assert_eq!(json, r#"{"d":6,"edges":[[0,1],[0,3],[1,2],[1,4],[2,5],[3,4],[4,5]]}"#);
        let back: Topology = serde_json::from_str(&json).unwrap();
        assert_eq!(back, t);
        assert!(serde_json::from_str::<Topology>(r#"{"d":2,"edges":[[1,1]]}"#).is_err());
    }
}
