//! Test-side oracles that share no code with the library's numerics.
#![allow(dead_code)]

use grounding::Graph;
use rand::Rng;

/// Dense `I - D^{-1/2} A D^{-1/2}` built straight from the edge list.
pub fn lsym_dense(g: &Graph) -> Vec<Vec<f64>> {
    let n = g.node_count();
    let mut m = vec![vec![0.0; n]; n];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    for (i, j) in g.edges() {
        let w = 1.0 / ((g.degree(i) * g.degree(j)) as f64).sqrt();
        m[i - 1][j - 1] = -w;
        m[j - 1][i - 1] = -w;
    }
    m
}

pub fn drop_nodes(m: &[Vec<f64>], removed: &[usize]) -> Vec<Vec<f64>> {
    let keep: Vec<usize> = (0..m.len())
        .filter(|i| !removed.contains(&(i + 1)))
        .collect();
    keep.iter()
        .map(|&i| keep.iter().map(|&j| m[i][j]).collect())
        .collect()
}

/// All eigenvalues of symmetric `m`, ascending, by cyclic Jacobi rotations.
///
/// An unpivoted LDL^T inertia count was tried first and lost ~1e-9 at the
/// eigenvalue 1, where `L_sym - I` has a zero diagonal.
pub fn all_eigenvalues(m: &[Vec<f64>]) -> Vec<f64> {
    let n = m.len();
    let mut a: Vec<Vec<f64>> = m.to_vec();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q] == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut eig: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    eig.sort_by(f64::total_cmp);
    eig
}

pub fn smallest_eigenvalue(m: &[Vec<f64>]) -> f64 {
    all_eigenvalues(m)[0]
}

/// Brute-force best extra node: arg max of the smallest eigenvalue of the
/// matrix with `grounded + j` removed, lowest id within `tol` of the max.
pub fn oracle_best(g: &Graph, grounded: &[usize], tol: f64) -> (usize, f64, Vec<(usize, f64)>) {
    let full = lsym_dense(g);
    let values: Vec<(usize, f64)> = g
        .nodes()
        .filter(|v| !grounded.contains(v))
        .map(|j| {
            let mut removed = grounded.to_vec();
            removed.push(j);
            (j, smallest_eigenvalue(&drop_nodes(&full, &removed)))
        })
        .collect();
    let top = values
        .iter()
        .map(|&(_, v)| v)
        .fold(f64::NEG_INFINITY, f64::max);
    let &(node, value) = values.iter().find(|&&(_, v)| v >= top - tol).unwrap();
    (node, value, values)
}

/// Every labeled connected graph on `n` nodes.
pub fn connected_graphs(n: usize) -> Vec<Graph> {
    let pairs: Vec<(usize, usize)> = (1..=n)
        .flat_map(|i| (i + 1..=n).map(move |j| (i, j)))
        .collect();
    (0u64..1 << pairs.len())
        .filter_map(|mask| {
            let edges = pairs
                .iter()
                .enumerate()
                .filter(|(b, _)| mask >> b & 1 == 1)
                .map(|(_, &e)| e);
            let g = Graph::new(n, edges).unwrap();
            g.is_connected().then_some(g)
        })
        .collect()
}

/// Connected graph with maximum degree `d_max`: a random spanning tree
/// plus random extra edges.
pub fn random_bounded_graph<R: Rng>(n: usize, d_max: usize, extra: usize, rng: &mut R) -> Graph {
    let mut deg = vec![0usize; n + 1];
    let mut edges = Vec::new();
    for v in 2..=n {
        loop {
            let u = rng.random_range(1..v);
            if deg[u] < d_max {
                edges.push((u, v));
                deg[u] += 1;
                deg[v] += 1;
                break;
            }
        }
    }
    for _ in 0..extra * 10 {
        if edges.len() >= n - 1 + extra {
            break;
        }
        let (a, b) = (rng.random_range(1..=n), rng.random_range(1..=n));
        let (a, b) = (a.min(b), a.max(b));
        if a != b && deg[a] < d_max && deg[b] < d_max && !edges.contains(&(a, b)) {
            edges.push((a, b));
            deg[a] += 1;
            deg[b] += 1;
        }
    }
    Graph::new(n, edges).unwrap()
}

/// Random connected graph from `G(n, p)` by rejection.
pub fn random_connected<R: Rng>(n: usize, p: f64, rng: &mut R) -> Graph {
    loop {
        let edges: Vec<(usize, usize)> = (1..=n)
            .flat_map(|i| (i + 1..=n).map(move |j| (i, j)))
            .filter(|_| rng.random_bool(p))
            .collect();
        let g = Graph::new(n, edges).unwrap();
        if g.is_connected() {
            return g;
        }
    }
}
