//! Undirected simple graphs with 1-based node ids.
//!
//! The consensus weight of edge `(i, j)` seen from node `i` is `1/d_i`, so
//! every row of the weighted adjacency operator sums to one.

mod generate;
mod io;

use std::collections::VecDeque;

use crate::{Error, Result};

pub use generate::{
    generate_expander, generate_regular, generate_regular_with, Expander, MAX_ATTEMPTS,
};
pub use io::{format_graph, parse_graph, read_graph, write_graph};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    // sorted 0-based neighbor lists
    adj: Vec<Vec<usize>>,
    edge_count: usize,
}

impl Graph {
    /// Builds a graph on `n` nodes from 1-based edge pairs.
    ///
    /// Rejects self-loops, duplicate edges (in either orientation) and ids
    /// outside `1..=n`.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        if n == 0 {
            return Err(Error::Parameter("graph needs at least one node".into()));
        }
        let mut adj = vec![Vec::new(); n];
        let mut edge_count = 0;
        for (i, j) in edges {
            if i == 0 || j == 0 || i > n || j > n {
                return Err(Error::Parameter(format!(
                    "edge ({i}, {j}) out of range 1..={n}"
                )));
            }
            if i == j {
                return Err(Error::Parameter(format!("self-loop at node {i}")));
            }
            if adj[i - 1].contains(&(j - 1)) {
                return Err(Error::Parameter(format!("duplicate edge ({i}, {j})")));
            }
            adj[i - 1].push(j - 1);
            adj[j - 1].push(i - 1);
            edge_count += 1;
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        Ok(Graph { adj, edge_count })
    }

    pub fn complete(n: usize) -> Self {
        let edges = (1..=n).flat_map(|i| (i + 1..=n).map(move |j| (i, j)));
        Graph::new(n, edges).expect("complete graph is simple")
    }

    pub fn cycle(n: usize) -> Self {
        assert!(n >= 3, "cycle needs at least 3 nodes");
        Graph::new(n, (1..=n).map(|i| (i, i % n + 1))).expect("cycle is simple")
    }

    pub fn path(n: usize) -> Self {
        Graph::new(n, (1..n).map(|i| (i, i + 1))).expect("path is simple")
    }

    /// Star with node 1 at the center.
    pub fn star(n: usize) -> Self {
        Graph::new(n, (2..=n).map(|i| (1, i))).expect("star is simple")
    }

    pub fn node_count(&self) -> usize {
        self.adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn nodes(&self) -> impl Iterator<Item = usize> {
        1..=self.adj.len()
    }

    /// Edges as `(i, j)` with `i < j`, sorted.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adj.iter().enumerate().flat_map(|(i, list)| {
            list.iter()
                .filter(move |&&j| j > i)
                .map(move |&j| (i + 1, j + 1))
        })
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v - 1].len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.adj.iter().map(Vec::len).collect()
    }

    pub fn d_max(&self) -> usize {
        self.adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn d_min(&self) -> usize {
        self.adj.iter().map(Vec::len).min().unwrap_or(0)
    }

    /// Common degree if the graph is regular.
    pub fn regular_degree(&self) -> Option<usize> {
        (self.d_max() == self.d_min()).then(|| self.d_max())
    }

    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.adj[v - 1].iter().map(|&j| j + 1)
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adj[i - 1].binary_search(&(j - 1)).is_ok()
    }

    /// Consensus weight `alpha_ij = 1/d_i` on edges, zero elsewhere.
    pub fn weight(&self, i: usize, j: usize) -> f64 {
        if self.has_edge(i, j) {
            1.0 / self.degree(i) as f64
        } else {
            0.0
        }
    }

    pub(crate) fn adjacency_lists(&self) -> &[Vec<usize>] {
        &self.adj
    }

    pub fn is_connected(&self) -> bool {
        let dist = bfs_distances(&self.adj, &[0]);
        dist.iter().all(Option::is_some)
    }

    pub fn check_node(&self, v: usize) -> Result<()> {
        if v == 0 || v > self.node_count() {
            Err(Error::Parameter(format!(
                "node {v} out of range 1..={}",
                self.node_count()
            )))
        } else {
            Ok(())
        }
    }
}

/// Multi-source BFS over 0-based adjacency lists.
pub(crate) fn bfs_distances(adj: &[Vec<usize>], sources: &[usize]) -> Vec<Option<usize>> {
    let mut dist = vec![None; adj.len()];
    let mut queue = VecDeque::new();
    for &s in sources {
        if dist[s].is_none() {
            dist[s] = Some(0);
            queue.push_back(s);
        }
    }
    while let Some(u) = queue.pop_front() {
        let du = dist[u].unwrap();
        for &w in &adj[u] {
            if dist[w].is_none() {
                dist[w] = Some(du + 1);
                queue.push_back(w);
            }
        }
    }
    dist
}

/// BFS layers around a root (or a set of roots).
///
/// `layers[i]` holds the nodes at distance `i + 1`; the roots themselves are
/// not listed. Nodes unreachable from the roots are collected separately.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LayerDecomposition {
    pub roots: Vec<usize>,
    pub layers: Vec<Vec<usize>>,
    pub unreachable: Vec<usize>,
}

impl LayerDecomposition {
    /// Index of the highest nonempty layer (the eccentricity of the roots).
    pub fn ell(&self) -> usize {
        self.layers.len()
    }

    /// Layer index of `v`, 0 for a root, `None` if unreachable.
    pub fn layer_of(&self, v: usize) -> Option<usize> {
        if self.roots.contains(&v) {
            return Some(0);
        }
        self.layers
            .iter()
            .position(|layer| layer.contains(&v))
            .map(|i| i + 1)
    }

    /// Per-node layer index, indexed by `node - 1`.
    pub fn node_layers(&self, n: usize) -> Vec<Option<usize>> {
        let mut out = vec![None; n];
        for &r in &self.roots {
            out[r - 1] = Some(0);
        }
        for (i, layer) in self.layers.iter().enumerate() {
            for &v in layer {
                out[v - 1] = Some(i + 1);
            }
        }
        out
    }
}

pub fn layer_decomposition(g: &Graph, root: usize) -> Result<LayerDecomposition> {
    layer_decomposition_from(g, &[root])
}

/// Layers by shortest distance to the nearest of `roots`.
pub fn layer_decomposition_from(g: &Graph, roots: &[usize]) -> Result<LayerDecomposition> {
    if roots.is_empty() {
        return Err(Error::Parameter(
            "layer decomposition needs at least one root".into(),
        ));
    }
    for &r in roots {
        g.check_node(r)?;
    }
    let sources: Vec<usize> = roots.iter().map(|r| r - 1).collect();
    let dist = bfs_distances(&g.adj, &sources);
    let ell = dist.iter().flatten().copied().max().unwrap_or(0);
    let mut layers = vec![Vec::new(); ell];
    let mut unreachable = Vec::new();
    for (v, d) in dist.iter().enumerate() {
        match d {
            Some(0) => {}
            Some(k) => layers[k - 1].push(v + 1),
            None => unreachable.push(v + 1),
        }
    }
    let mut roots = roots.to_vec();
    roots.sort_unstable();
    roots.dedup();
    Ok(LayerDecomposition {
        roots,
        layers,
        unreachable,
    })
}

/// Graph left after cutting every edge of an isolated node.
#[derive(Debug, Clone)]
pub struct Isolation {
    /// Remaining nodes relabeled `1..=n-1` in original order.
    pub graph: Graph,
    /// `labels[k]` is the original id of new node `k + 1`.
    pub labels: Vec<usize>,
    pub connected: bool,
}

pub fn isolate_node(g: &Graph, v: usize) -> Result<Isolation> {
    g.check_node(v)?;
    if g.node_count() < 2 {
        return Err(Error::Parameter("cannot isolate the only node".into()));
    }
    let relabel = |u: usize| if u < v { u } else { u - 1 };
    let edges = g
        .edges()
        .filter(|&(i, j)| i != v && j != v)
        .map(|(i, j)| (relabel(i), relabel(j)));
    let graph = Graph::new(g.node_count() - 1, edges)?;
    let labels = g.nodes().filter(|&u| u != v).collect();
    let connected = graph.is_connected();
    Ok(Isolation {
        graph,
        labels,
        connected,
    })
}
