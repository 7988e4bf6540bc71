//! Normalized and grounded Laplacian spectra.
//!
//! Every spectrum is computed from the symmetric normalization
//! `L_sym = D^{1/2} L D^{-1/2}`. Because `D` is diagonal, deleting rows and
//! columns of `L_sym` is similar to deleting the same rows and columns of the
//! random-walk Laplacian `L`, so grounded spectra agree as well.

mod bounds;
mod eigen;

use std::io::Write;

use nalgebra::DMatrix;

use crate::graph::Graph;
use crate::{Error, Result};

pub use bounds::{grounded_connectivity_bound, threshold_sizes, ThresholdSizes};
pub use eigen::{symmetric_eigen, symmetric_eigenvalues, SymmetricEigen};

/// Absolute tolerance for eigenvalue comparisons. Laplacian entries lie in
/// `[-1, 1]`.
pub const EIGEN_TOL: f64 = 1e-9;

fn require_positive_degrees(g: &Graph) -> Result<()> {
    match g.nodes().find(|&v| g.degree(v) == 0) {
        Some(v) => Err(Error::Disconnected(format!("node {v} has no neighbors"))),
        None => Ok(()),
    }
}

/// `L = I - A` with `A_ij = 1/d_i` on edges.
pub fn random_walk_laplacian(g: &Graph) -> Result<DMatrix<f64>> {
    require_positive_degrees(g)?;
    let n = g.node_count();
    let mut l = DMatrix::identity(n, n);
    for (i, j) in g.edges() {
        l[(i - 1, j - 1)] = -1.0 / g.degree(i) as f64;
        l[(j - 1, i - 1)] = -1.0 / g.degree(j) as f64;
    }
    Ok(l)
}

/// `L_sym = I - D^{-1/2} A_unweighted D^{-1/2}`.
pub fn symmetric_laplacian(g: &Graph) -> Result<DMatrix<f64>> {
    require_positive_degrees(g)?;
    let n = g.node_count();
    let mut l = DMatrix::identity(n, n);
    for (i, j) in g.edges() {
        let w = -1.0 / ((g.degree(i) * g.degree(j)) as f64).sqrt();
        l[(i - 1, j - 1)] = w;
        l[(j - 1, i - 1)] = w;
    }
    Ok(l)
}

/// Principal submatrix keeping the 0-based indices in `keep`.
pub(crate) fn principal_submatrix(m: &DMatrix<f64>, keep: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(keep.len(), keep.len(), |a, b| m[(keep[a], keep[b])])
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralSummary {
    /// Ascending `lambda_1 <= ... <= lambda_N`.
    pub eigenvalues: Vec<f64>,
    /// Algebraic connectivity.
    pub lambda2: f64,
    /// Spectral radius `lambda_N`.
    pub lambda_n: f64,
    /// `lambda2 / lambda_N`.
    pub eigenratio: f64,
    pub connected: bool,
}

impl SpectralSummary {
    /// Whether the graph is minimum `c'`-algebraic connected.
    pub fn meets(&self, c_prime: f64) -> bool {
        self.lambda2 >= c_prime
    }
}

pub fn spectral_summary(g: &Graph) -> Result<SpectralSummary> {
    if g.node_count() < 2 {
        return Err(Error::Parameter(
            "spectral summary needs at least two nodes".into(),
        ));
    }
    let eigenvalues = symmetric_eigenvalues(&symmetric_laplacian(g)?)?;
    let lambda2 = eigenvalues[1];
    let lambda_n = *eigenvalues.last().unwrap();
    Ok(SpectralSummary {
        lambda2,
        lambda_n,
        eigenratio: lambda2 / lambda_n,
        connected: g.is_connected(),
        eigenvalues,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundedSpectrum {
    /// Sorted, 1-based.
    pub grounded: Vec<usize>,
    /// Remaining nodes in matrix order, 1-based.
    pub remaining: Vec<usize>,
    /// Ascending `lambda_bar_1 <= ... <= lambda_bar_{N-m}`.
    pub eigenvalues: Vec<f64>,
}

impl GroundedSpectrum {
    /// Grounded algebraic connectivity.
    pub fn connectivity(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn radius(&self) -> f64 {
        *self.eigenvalues.last().unwrap()
    }

    pub fn eigenratio(&self) -> f64 {
        self.connectivity() / self.radius()
    }
}

fn normalize_set(g: &Graph, nodes: &[usize]) -> Result<Vec<usize>> {
    for &v in nodes {
        g.check_node(v)?;
    }
    let mut set = nodes.to_vec();
    set.sort_unstable();
    set.dedup();
    Ok(set)
}

/// Grounded Laplacian spectrum: rows and columns of `grounded` removed.
pub fn grounded_laplacian(g: &Graph, grounded: &[usize]) -> Result<GroundedSpectrum> {
    let lsym = symmetric_laplacian(g)?;
    grounded_from_matrix(g, &lsym, grounded)
}

/// Same as [`grounded_laplacian`] with a precomputed `L_sym`, for callers
/// that ground many different sets of one graph.
pub fn grounded_from_matrix(
    g: &Graph,
    lsym: &DMatrix<f64>,
    grounded: &[usize],
) -> Result<GroundedSpectrum> {
    let grounded = normalize_set(g, grounded)?;
    if grounded.is_empty() {
        return Err(Error::Parameter("grounded set is empty".into()));
    }
    if grounded.len() >= g.node_count() {
        return Err(Error::Parameter("cannot ground every node".into()));
    }
    let remaining: Vec<usize> = g
        .nodes()
        .filter(|v| grounded.binary_search(v).is_err())
        .collect();
    let keep: Vec<usize> = remaining.iter().map(|v| v - 1).collect();
    let eigenvalues = symmetric_eigenvalues(&principal_submatrix(lsym, &keep))?;
    Ok(GroundedSpectrum {
        grounded,
        remaining,
        eigenvalues,
    })
}

/// Grounded Laplacian with one more node's row and column zeroed.
#[derive(Debug, Clone, PartialEq)]
pub struct DoubleGrounded {
    pub grounded: Vec<usize>,
    pub extra: usize,
    /// Ascending; the first entry is the structural zero of the zeroed row.
    pub eigenvalues: Vec<f64>,
}

impl DoubleGrounded {
    /// Smallest eigenvalue after the structural zero.
    pub fn connectivity(&self) -> f64 {
        self.eigenvalues[1]
    }

    pub fn radius(&self) -> f64 {
        *self.eigenvalues.last().unwrap()
    }

    pub fn eigenratio(&self) -> f64 {
        self.connectivity() / self.radius()
    }
}

/// Zeroing row and column `extra` of the grounded Laplacian splits off an
/// exact zero eigenvalue; the rest of the spectrum is that of the grounded
/// Laplacian with `extra` removed, which is what gets computed here.
pub fn double_grounded_laplacian(
    g: &Graph,
    grounded: &[usize],
    extra: usize,
) -> Result<DoubleGrounded> {
    let lsym = symmetric_laplacian(g)?;
    double_grounded_from_matrix(g, &lsym, grounded, extra)
}

pub fn double_grounded_from_matrix(
    g: &Graph,
    lsym: &DMatrix<f64>,
    grounded: &[usize],
    extra: usize,
) -> Result<DoubleGrounded> {
    let grounded = normalize_set(g, grounded)?;
    g.check_node(extra)?;
    if grounded.contains(&extra) {
        return Err(Error::Parameter(format!(
            "node {extra} is already grounded"
        )));
    }
    if grounded.len() + 2 > g.node_count() {
        return Err(Error::Parameter(
            "double grounding needs at least one remaining node".into(),
        ));
    }
    let mut both = grounded.clone();
    both.push(extra);
    let inner = grounded_from_matrix(g, lsym, &both)?;
    let mut eigenvalues = Vec::with_capacity(inner.eigenvalues.len() + 1);
    eigenvalues.push(0.0);
    eigenvalues.extend(inner.eigenvalues);
    Ok(DoubleGrounded {
        grounded,
        extra,
        eigenvalues,
    })
}

/// Writes `index,value` rows (1-based index) with a header.
pub fn write_spectrum_csv<W: Write>(out: W, eigenvalues: &[f64]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["index", "value"])?;
    for (k, v) in eigenvalues.iter().enumerate() {
        w.write_record([(k + 1).to_string(), v.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn assert_values(got: &[f64], want: &[f64]) {
        assert_eq!(got.len(), want.len());
        for (g, w) in got.iter().zip(want) {
            assert_abs_diff_eq!(g, w, epsilon = 1e-12);
        }
    }

    #[test]
    fn random_walk_laplacian_small_graphs() {
        let c3 = random_walk_laplacian(&Graph::cycle(3)).unwrap();
        assert_eq!(
            c3,
            DMatrix::from_row_slice(3, 3, &[1.0, -0.5, -0.5, -0.5, 1.0, -0.5, -0.5, -0.5, 1.0])
        );
        let k4 = random_walk_laplacian(&Graph::complete(4)).unwrap();
        for r in 0..4 {
            assert_abs_diff_eq!(k4.row(r).sum(), 0.0, epsilon = 1e-15);
        }
        let p2 = random_walk_laplacian(&Graph::path(2)).unwrap();
        assert_eq!(p2, DMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 1.0]));
    }

    #[test]
    fn symmetric_laplacian_regular_equals_random_walk() {
        let g = crate::graph::generate_regular(12, 4, 5).unwrap();
        let a = symmetric_laplacian(&g).unwrap();
        let b = random_walk_laplacian(&g).unwrap();
        assert!((a - b).amax() < 1e-15);
    }

    #[test]
    fn symmetric_laplacian_star() {
        let l = symmetric_laplacian(&Graph::star(4)).unwrap();
        for leaf in 1..4 {
            assert_abs_diff_eq!(l[(0, leaf)], -1.0 / 3f64.sqrt(), epsilon = 1e-15);
            assert_abs_diff_eq!(l[(leaf, 0)], -1.0 / 3f64.sqrt(), epsilon = 1e-15);
        }
        assert_eq!(l.transpose(), l);
    }

    #[test]
    fn isolated_node_rejected() {
        let g = Graph::new(3, [(1, 2)]).unwrap();
        assert!(matches!(
            symmetric_laplacian(&g),
            Err(Error::Disconnected(_))
        ));
    }

    #[test]
    fn cycle_four_spectrum() {
        let vals = symmetric_eigenvalues(&symmetric_laplacian(&Graph::cycle(4)).unwrap()).unwrap();
        assert_values(&vals, &[0.0, 1.0, 1.0, 2.0]);
        let s = spectral_summary(&Graph::cycle(4)).unwrap();
        assert_abs_diff_eq!(s.lambda2, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.lambda_n, 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.eigenratio, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn complete_graph_summary() {
        let s = spectral_summary(&Graph::complete(4)).unwrap();
        assert_values(&s.eigenvalues, &[0.0, 4.0 / 3.0, 4.0 / 3.0, 4.0 / 3.0]);
        assert_abs_diff_eq!(s.eigenratio, 1.0, epsilon = 1e-12);
        assert!(s.connected && s.meets(1.0) && !s.meets(1.5));
    }

    #[test]
    fn disconnected_summary_flags() {
        let g = Graph::new(4, [(1, 2), (3, 4)]).unwrap();
        let s = spectral_summary(&g).unwrap();
        assert!(!s.connected);
        assert_abs_diff_eq!(s.lambda2, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn grounded_closed_forms() {
        let c3 = grounded_laplacian(&Graph::cycle(3), &[1]).unwrap();
        assert_values(&c3.eigenvalues, &[0.5, 1.5]);
        assert_eq!(c3.remaining, vec![2, 3]);

        let k4 = grounded_laplacian(&Graph::complete(4), &[1]).unwrap();
        assert_values(&k4.eigenvalues, &[1.0 / 3.0, 4.0 / 3.0, 4.0 / 3.0]);

        let k4_2 = grounded_laplacian(&Graph::complete(4), &[2, 1]).unwrap();
        assert_values(&k4_2.eigenvalues, &[2.0 / 3.0, 4.0 / 3.0]);
        assert!(k4_2.connectivity() >= k4.connectivity());
        assert!(k4_2.radius() <= k4.radius() + EIGEN_TOL);
    }

    #[test]
    fn grounding_everything_rejected() {
        let g = Graph::complete(3);
        assert!(matches!(
            grounded_laplacian(&g, &[1, 2, 3]),
            Err(Error::Parameter(_))
        ));
        assert!(matches!(
            grounded_laplacian(&g, &[]),
            Err(Error::Parameter(_))
        ));
        assert!(matches!(
            grounded_laplacian(&g, &[4]),
            Err(Error::Parameter(_))
        ));
    }

    #[test]
    fn double_grounded_cycle_five() {
        let far = double_grounded_laplacian(&Graph::cycle(5), &[1], 3).unwrap();
        assert_abs_diff_eq!(far.connectivity(), 0.5, epsilon = 1e-12);
        assert_eq!(far.eigenvalues[0], 0.0);
        let near = double_grounded_laplacian(&Graph::cycle(5), &[1], 2).unwrap();
        assert_abs_diff_eq!(
            near.connectivity(),
            1.0 - 2f64.sqrt() / 2.0,
            epsilon = 1e-12
        );
        let k4 = double_grounded_laplacian(&Graph::complete(4), &[1], 2).unwrap();
        assert_abs_diff_eq!(k4.connectivity(), 2.0 / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn double_grounded_matches_literal_zeroing() {
        let g = crate::graph::generate_regular(14, 4, 3).unwrap();
        let lsym = symmetric_laplacian(&g).unwrap();
        for extra in [2, 7, 14] {
            let keep: Vec<usize> = (1..14).collect();
            let mut zeroed = principal_submatrix(&lsym, &keep);
            let j = extra - 2;
            zeroed.row_mut(j).fill(0.0);
            zeroed.column_mut(j).fill(0.0);
            let literal = symmetric_eigenvalues(&zeroed).unwrap();
            let ours = double_grounded_laplacian(&g, &[1], extra).unwrap();
            assert_values(&literal, &ours.eigenvalues);
        }
    }

    #[test]
    fn spectrum_csv_layout() {
        let mut buf = Vec::new();
        write_spectrum_csv(&mut buf, &[0.0, 1.5]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "index,value\n1,0\n2,1.5\n");
    }
}
