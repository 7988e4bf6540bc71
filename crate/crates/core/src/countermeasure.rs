//! Countermeasures against grounding: resilience checks, redesign,
//! isolation, and recovery by grounding further nodes.

use std::io::Write;
use std::time::Instant;

use nalgebra::DMatrix;
use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::control::{
    closed_loop_radius, consensusability_margin, design_gain, min_c_prime, sigma_tilde_of,
    AgentDynamics, Gain, GainDesign, MareOptions,
};
use crate::graph::{generate_expander, isolate_node, layer_decomposition_from, Graph};
use crate::spectral::{grounded_from_matrix, spectral_summary, symmetric_laplacian, EIGEN_TOL};
use crate::{Error, Result};

/// Margin the consensusability target must exceed.
pub const MARGIN_TOL: f64 = 1e-12;
const PERRON_TOL: f64 = 1e-13;
const PERRON_MAX_ITER: usize = 100_000;

/// Outcome of grounding each node on its own.
#[derive(Debug, Clone, Serialize)]
pub struct ResilienceReport {
    /// `schur[i]`: the closed loop stays Schur when node `i + 1` is grounded.
    pub schur: Vec<bool>,
    /// Closed-loop spectral radius per grounded node.
    pub radii: Vec<f64>,
    /// Node whose grounding leaves the smallest grounded eigenratio.
    pub worst_node: usize,
    pub worst_eigenratio: f64,
    /// Whether the consensusability condition still holds at the worst node.
    pub worst_consensusable: bool,
}

impl ResilienceReport {
    pub fn resilient(&self) -> bool {
        self.schur.iter().all(|&s| s)
    }
}

pub fn passive_resilience_check(
    g: &Graph,
    dyn_: &AgentDynamics,
    k: &Gain,
) -> Result<ResilienceReport> {
    if g.node_count() < 2 {
        return Err(Error::Parameter("need at least two nodes".into()));
    }
    let lsym = symmetric_laplacian(g)?;
    let sigma_tilde = sigma_tilde_of(dyn_);
    let mut schur = Vec::with_capacity(g.node_count());
    let mut radii = Vec::with_capacity(g.node_count());
    let (mut worst_node, mut worst_eigenratio) = (0, f64::INFINITY);
    for v in g.nodes() {
        let s = grounded_from_matrix(g, &lsym, &[v])?;
        let r = closed_loop_radius(dyn_, k, &s.eigenvalues, false);
        schur.push(r < 1.0);
        radii.push(r);
        if s.eigenratio() < worst_eigenratio {
            worst_eigenratio = s.eigenratio();
            worst_node = v;
        }
    }
    Ok(ResilienceReport {
        schur,
        radii,
        worst_node,
        worst_eigenratio,
        worst_consensusable: consensusability_margin(sigma_tilde, worst_eigenratio) > 0.0,
    })
}

/// Designs a new gain for the grounded network, using its grounded
/// algebraic connectivity in place of `c'`.
pub fn redesign_after_grounding(
    g: &Graph,
    grounded: &[usize],
    dyn_: &AgentDynamics,
    r: f64,
    opts: &MareOptions,
) -> Result<GainDesign> {
    let spectrum = grounded_from_matrix(g, &symmetric_laplacian(g)?, grounded)?;
    let c_g = spectrum.connectivity();
    let sigma_tilde = sigma_tilde_of(dyn_);
    let floor = min_c_prime(sigma_tilde);
    if !(c_g > floor) {
        return Err(Error::Design(format!(
            "grounded connectivity {c_g:.6} does not exceed 2(1 - s)/(1 + s) = {floor:.6}; grounded network is not consensusable"
        )));
    }
    let design = design_gain(dyn_, c_g, r, None, None, opts)?;
    let radius = closed_loop_radius(dyn_, &design.k, &spectrum.eigenvalues, false);
    if radius >= 1.0 {
        return Err(Error::Design(format!(
            "redesigned gain leaves grounded radius {radius}"
        )));
    }
    Ok(design)
}

#[derive(Debug, Clone)]
pub struct IsolationOutcome {
    /// Remaining network, relabeled `1..=N-1`.
    pub graph: Graph,
    /// Original id of each relabeled node.
    pub labels: Vec<usize>,
    pub connected: bool,
    /// Algebraic connectivity of the remainder when connected.
    pub lambda2: Option<f64>,
    /// The remainder is still `c'`-algebraically connected, so the original
    /// gain can stay.
    pub feasible: bool,
}

pub fn isolation_countermeasure(
    g: &Graph,
    grounded_node: usize,
    c_prime: f64,
) -> Result<IsolationOutcome> {
    let iso = isolate_node(g, grounded_node)?;
    let lambda2 = if iso.connected && iso.graph.node_count() >= 2 {
        Some(spectral_summary(&iso.graph)?.lambda2)
    } else {
        None
    };
    let feasible = lambda2.is_some_and(|l| l >= c_prime - EIGEN_TOL);
    Ok(IsolationOutcome {
        graph: iso.graph,
        labels: iso.labels,
        connected: iso.connected,
        lambda2,
        feasible,
    })
}

/// Grounded connectivity for every candidate extra node.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CandidateValues {
    /// Chosen node.
    pub node: usize,
    pub value: f64,
    /// `(candidate, lambda_bar'_1)` for every non-grounded node, ascending id.
    pub values: Vec<(usize, f64)>,
}

fn candidate_values(
    g: &Graph,
    lsym: &DMatrix<f64>,
    grounded: &[usize],
    candidates: &[usize],
) -> Result<Vec<(usize, f64)>> {
    candidates
        .iter()
        .map(|&j| {
            let mut set = grounded.to_vec();
            set.push(j);
            Ok((j, grounded_from_matrix(g, lsym, &set)?.connectivity()))
        })
        .collect()
}

fn remaining_nodes(g: &Graph, grounded: &[usize]) -> Result<Vec<usize>> {
    for &v in grounded {
        g.check_node(v)?;
    }
    Ok(g.nodes().filter(|v| !grounded.contains(v)).collect())
}

fn normalized(grounded: &[usize]) -> Vec<usize> {
    let mut set = grounded.to_vec();
    set.sort_unstable();
    set.dedup();
    set
}

/// Picks the extreme value, treating values within `EIGEN_TOL` of it as
/// ties and resolving them by lowest id.
fn pick(values: &[(usize, f64)], maximize: bool) -> (usize, f64) {
    let target = values.iter().map(|&(_, v)| v).fold(
        if maximize {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        },
        |a, v| {
            if maximize {
                a.max(v)
            } else {
                a.min(v)
            }
        },
    );
    values
        .iter()
        .copied()
        .find(|&(_, v)| (v - target).abs() <= EIGEN_TOL)
        .expect("non-empty candidate list")
}

fn exhaustive(
    g: &Graph,
    lsym: &DMatrix<f64>,
    grounded: &[usize],
    candidates: &[usize],
    maximize: bool,
) -> Result<CandidateValues> {
    if candidates.is_empty() {
        return Err(Error::Parameter("no candidate node to ground".into()));
    }
    if g.node_count() - grounded.len() < 2 {
        return Err(Error::Parameter(
            "need at least two non-grounded nodes".into(),
        ));
    }
    let values = candidate_values(g, lsym, grounded, candidates)?;
    let (node, value) = pick(&values, maximize);
    Ok(CandidateValues {
        node,
        value,
        values,
    })
}

/// The extra node whose grounding maximizes the grounded connectivity.
pub fn exhaustive_best_node(g: &Graph, grounded: &[usize]) -> Result<CandidateValues> {
    let grounded = normalized(grounded);
    let rest = remaining_nodes(g, &grounded)?;
    exhaustive(g, &symmetric_laplacian(g)?, &grounded, &rest, true)
}

/// The extra node whose grounding minimizes the grounded connectivity.
pub fn exhaustive_worst_node(g: &Graph, grounded: &[usize]) -> Result<CandidateValues> {
    let grounded = normalized(grounded);
    let rest = remaining_nodes(g, &grounded)?;
    exhaustive(g, &symmetric_laplacian(g)?, &grounded, &rest, false)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LayerCandidates {
    /// Nodes in layers `ell` and `ell - 1`, ascending.
    pub nodes: Vec<usize>,
    pub ell: usize,
    /// Set when `ell == 1`: every node neighbors the grounded set and the
    /// candidates are just layer 1.
    pub degenerate: bool,
}

/// Nodes in the two layers farthest from the grounded set.
pub fn layer_candidates(g: &Graph, grounded: &[usize]) -> Result<LayerCandidates> {
    let layers = layer_decomposition_from(g, grounded)?;
    if !layers.unreachable.is_empty() {
        return Err(Error::Disconnected(format!(
            "nodes {:?} are unreachable",
            layers.unreachable
        )));
    }
    let ell = layers.ell();
    if ell == 0 {
        return Err(Error::Parameter("every node is grounded".into()));
    }
    let mut nodes: Vec<usize> = layers.layers[ell.saturating_sub(2)..].concat();
    nodes.sort_unstable();
    Ok(LayerCandidates {
        nodes,
        ell,
        degenerate: ell == 1,
    })
}

/// Per-node scores over the remaining nodes (index-aligned with `remaining`).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelectionScores {
    pub remaining: Vec<usize>,
    /// Row sum plus column sum of the grounded adjacency.
    pub psi: Vec<f64>,
    /// Entries of `Ā^ell 1`.
    pub score: Vec<f64>,
    /// Distance to the grounded set.
    pub layer: Vec<usize>,
    pub ell: usize,
}

/// Sparse view of the grounded random-walk adjacency `Ā`.
struct GroundedAdjacency {
    remaining: Vec<usize>,
    /// `rows[p]`: `(column position, weight)` pairs.
    rows: Vec<Vec<(usize, f64)>>,
}

impl GroundedAdjacency {
    fn new(g: &Graph, grounded: &[usize]) -> Result<Self> {
        let remaining = remaining_nodes(g, grounded)?;
        let mut pos = vec![usize::MAX; g.node_count()];
        for (p, &v) in remaining.iter().enumerate() {
            pos[v - 1] = p;
        }
        let rows = remaining
            .iter()
            .map(|&i| {
                let w = 1.0 / g.degree(i) as f64;
                g.neighbors(i)
                    .filter(|&j| pos[j - 1] != usize::MAX)
                    .map(|j| (pos[j - 1], w))
                    .collect()
            })
            .collect();
        Ok(GroundedAdjacency { remaining, rows })
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.rows
            .iter()
            .map(|row| row.iter().map(|&(q, w)| w * x[q]).sum())
            .collect()
    }

    fn connected(&self) -> bool {
        let m = self.remaining.len();
        let adj: Vec<Vec<usize>> = self
            .rows
            .iter()
            .map(|r| r.iter().map(|&(q, _)| q).collect())
            .collect();
        crate::graph::bfs_distances(&adj, &[0])
            .iter()
            .take(m)
            .all(Option::is_some)
    }

    fn psi(&self) -> Vec<f64> {
        let mut psi: Vec<f64> = self
            .rows
            .iter()
            .map(|r| r.iter().map(|&(_, w)| w).sum())
            .collect();
        for row in &self.rows {
            for &(q, w) in row {
                psi[q] += w;
            }
        }
        psi
    }
}

/// `psi_j` for each remaining node, aligned with the ascending remaining ids.
pub fn psi_scores(g: &Graph, grounded: &[usize]) -> Result<Vec<(usize, f64)>> {
    let adj = GroundedAdjacency::new(g, grounded)?;
    Ok(adj.remaining.iter().copied().zip(adj.psi()).collect())
}

/// Score-based selection: the node with the largest entry of `Ā^ell 1`,
/// where `ell` is the eccentricity of the grounded set.
pub fn score_selection(g: &Graph, grounded: &[usize]) -> Result<(usize, SelectionScores)> {
    scored(g, grounded, true)
}

fn scored(
    g: &Graph,
    grounded: &[usize],
    require_connected: bool,
) -> Result<(usize, SelectionScores)> {
    let adj = GroundedAdjacency::new(g, grounded)?;
    if adj.remaining.is_empty() {
        return Err(Error::Parameter("every node is grounded".into()));
    }
    if require_connected && !adj.connected() {
        return Err(Error::Disconnected(
            "remaining network is disconnected".into(),
        ));
    }
    let layers = layer_decomposition_from(g, grounded)?;
    let ell = layers.ell();
    let node_layers = layers.node_layers(g.node_count());
    let mut score = vec![1.0; adj.remaining.len()];
    for _ in 0..ell {
        score = adj.apply(&score);
    }
    let values: Vec<(usize, f64)> = adj
        .remaining
        .iter()
        .copied()
        .zip(score.iter().copied())
        .collect();
    let top = score.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let node = values
        .iter()
        .find(|&&(_, s)| s >= top - 1e-12 * top.abs().max(1.0))
        .map(|&(v, _)| v)
        .unwrap();
    let layer = adj
        .remaining
        .iter()
        .map(|&v| node_layers[v - 1].unwrap_or(usize::MAX))
        .collect();
    Ok((
        node,
        SelectionScores {
            remaining: adj.remaining.clone(),
            psi: adj.psi(),
            score,
            layer,
            ell,
        },
    ))
}

/// Perron-weighted scores `(v^T Ā e_j) v_j` with `v` the Perron vector of
/// `Ā` normalized to unit sum. Reported for analysis; no strategy uses it.
pub fn perron_scores(g: &Graph, grounded: &[usize]) -> Result<Vec<(usize, f64)>> {
    let adj = GroundedAdjacency::new(g, grounded)?;
    let m = adj.remaining.len();
    if m == 0 || !adj.connected() {
        return Err(Error::Disconnected(
            "remaining network is disconnected".into(),
        ));
    }
    // power iteration on (I + Ā)/2 avoids oscillation on bipartite remainders
    let mut v = vec![1.0 / m as f64; m];
    let mut converged = false;
    for _ in 0..PERRON_MAX_ITER {
        let av = adj.apply(&v);
        let mut next: Vec<f64> = v.iter().zip(&av).map(|(a, b)| 0.5 * (a + b)).collect();
        let s: f64 = next.iter().sum();
        if s <= 0.0 {
            return Err(Error::Solver("Perron iteration collapsed to zero".into()));
        }
        next.iter_mut().for_each(|x| *x /= s);
        let delta = next
            .iter()
            .zip(&v)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        v = next;
        if delta < PERRON_TOL {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Solver("Perron iteration did not converge".into()));
    }
    // (v^T Ā)_j = sum over rows p of v_p * Ā[p][j]
    let mut vt_a = vec![0.0; m];
    for (p, row) in adj.rows.iter().enumerate() {
        for &(q, w) in row {
            vt_a[q] += v[p] * w;
        }
    }
    Ok(adj
        .remaining
        .iter()
        .enumerate()
        .map(|(q, &j)| (j, vt_a[q] * v[q]))
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Best,
    Algorithm2,
    Random,
    Worst,
    /// Exhaustive best restricted to the two layers farthest from the
    /// grounded set.
    Algorithm1,
}

impl Strategy {
    pub const ALL: [Strategy; 5] = [
        Strategy::Best,
        Strategy::Algorithm2,
        Strategy::Random,
        Strategy::Worst,
        Strategy::Algorithm1,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Best => "best",
            Strategy::Algorithm2 => "algorithm2",
            Strategy::Random => "random",
            Strategy::Worst => "worst",
            Strategy::Algorithm1 => "algorithm1",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Target {
    /// Grounded connectivity at least `value`.
    Connectivity { value: f64 },
    /// Grounded eigenratio satisfies the consensusability condition for the
    /// given `sigma_tilde` with margin above [`MARGIN_TOL`].
    Consensusable { sigma_tilde: f64 },
}

impl Target {
    pub fn met(&self, lambda1: f64, eigenratio: f64) -> bool {
        match *self {
            Target::Connectivity { value } => lambda1 >= value - MARGIN_TOL,
            Target::Consensusable { sigma_tilde } => {
                consensusability_margin(sigma_tilde, eigenratio) > MARGIN_TOL
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecoveryStep {
    pub step: usize,
    /// Node grounded at this step; `None` for the initial set.
    pub node: Option<usize>,
    pub lambda1_bar: f64,
    pub radius_bar: f64,
    pub eigenratio_bar: f64,
    /// `(lambda1^(m+1) - lambda1^(m)) / lambda1^(m)`; `None` at step 0.
    pub incremental_ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecoveryReport {
    pub strategy: Strategy,
    pub target: Target,
    pub initial_grounded: Vec<usize>,
    /// Extra nodes in grounding order.
    pub grounded_sequence: Vec<usize>,
    pub steps: Vec<RecoveryStep>,
    /// Extra nodes needed to meet the target; `None` if it was never met.
    pub nodes_needed: Option<usize>,
}

impl RecoveryReport {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "step",
            "node",
            "lambda1_bar",
            "radius_bar",
            "eigenratio_bar",
            "incremental_ratio",
        ])?;
        for s in &self.steps {
            w.write_record([
                s.step.to_string(),
                s.node.map(|v| v.to_string()).unwrap_or_default(),
                s.lambda1_bar.to_string(),
                s.radius_bar.to_string(),
                s.eigenratio_bar.to_string(),
                s.incremental_ratio
                    .map(|r| r.to_string())
                    .unwrap_or_default(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Grounds one node at a time, chosen by `strategy`, until `target` holds or
/// a single node is left.
pub fn recover_by_grounding(
    g: &Graph,
    initial_grounded: &[usize],
    target: Target,
    strategy: Strategy,
    seed: u64,
) -> Result<RecoveryReport> {
    let lsym = symmetric_laplacian(g)?;
    let mut grounded = grounded_from_matrix(g, &lsym, initial_grounded)?.grounded;
    let initial = grounded.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let record = |set: &[usize],
                  step: usize,
                  node: Option<usize>,
                  prev: Option<f64>|
     -> Result<RecoveryStep> {
        let s = grounded_from_matrix(g, &lsym, set)?;
        let l1 = s.connectivity();
        Ok(RecoveryStep {
            step,
            node,
            lambda1_bar: l1,
            radius_bar: s.radius(),
            eigenratio_bar: s.eigenratio(),
            incremental_ratio: prev.map(|p| (l1 - p) / p),
        })
    };

    let mut steps = vec![record(&grounded, 0, None, None)?];
    let mut sequence = Vec::new();
    let mut nodes_needed = None;
    loop {
        let last = steps.last().unwrap();
        if target.met(last.lambda1_bar, last.eigenratio_bar) {
            nodes_needed = Some(sequence.len());
            break;
        }
        if g.node_count() - grounded.len() < 2 {
            break;
        }
        let rest: Vec<usize> = g
            .nodes()
            .filter(|v| grounded.binary_search(v).is_err())
            .collect();
        let node = match strategy {
            Strategy::Best => exhaustive(g, &lsym, &grounded, &rest, true)?.node,
            Strategy::Worst => exhaustive(g, &lsym, &grounded, &rest, false)?.node,
            // later steps may split the remainder; the scores stay well defined
            Strategy::Algorithm2 => scored(g, &grounded, false)?.0,
            Strategy::Algorithm1 => {
                let cands = layer_candidates(g, &grounded)?;
                exhaustive(g, &lsym, &grounded, &cands.nodes, true)?.node
            }
            Strategy::Random => *rest.choose(&mut rng).unwrap(),
        };
        let pos = grounded.binary_search(&node).unwrap_err();
        grounded.insert(pos, node);
        sequence.push(node);
        let prev = last.lambda1_bar;
        steps.push(record(&grounded, sequence.len(), Some(node), Some(prev))?);
    }
    Ok(RecoveryReport {
        strategy,
        target,
        initial_grounded: initial,
        grounded_sequence: sequence,
        steps,
        nodes_needed,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ComparisonTarget {
    /// Regain the graph's own pre-grounding algebraic connectivity.
    RecoverLambda2,
    Connectivity {
        value: f64,
    },
    Consensusable {
        sigma_tilde: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonConfig {
    pub n: usize,
    pub d: usize,
    /// Expander threshold used when sampling graphs.
    pub c_prime: f64,
    pub seeds: Vec<u64>,
    pub strategies: Vec<Strategy>,
    pub target: ComparisonTarget,
    #[serde(default = "default_initial")]
    pub initial_grounded: Vec<usize>,
}

fn default_initial() -> Vec<usize> {
    vec![1]
}

#[derive(Debug, Clone, Serialize)]
pub struct ComparisonRow {
    pub seed: u64,
    pub strategy: Strategy,
    pub nodes_needed: Option<usize>,
    /// Grounded nodes (initial plus extra) as a percentage of `n`.
    pub percentage: Option<f64>,
    pub report: RecoveryReport,
    /// Wall-clock selection time; excluded from CSV output.
    pub elapsed_secs: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct StrategySummary {
    pub strategy: Strategy,
    pub mean_nodes_needed: f64,
    pub mean_percentage: f64,
    pub unreachable: usize,
    /// Mean incremental ratio at each extra grounding step, over the seeds
    /// that reached that step.
    pub mean_incremental: Vec<f64>,
    pub mean_elapsed_secs: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ComparisonTable {
    /// Sorted by seed, then strategy.
    pub rows: Vec<ComparisonRow>,
    pub summary: Vec<StrategySummary>,
}

impl ComparisonTable {
    pub fn summary_for(&self, s: Strategy) -> Option<&StrategySummary> {
        self.summary.iter().find(|x| x.strategy == s)
    }

    /// `seed,strategy,nodes_needed,percentage`; unreachable rows leave the
    /// last two fields empty.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["seed", "strategy", "nodes_needed", "percentage"])?;
        for r in &self.rows {
            w.write_record([
                r.seed.to_string(),
                r.strategy.name().to_string(),
                r.nodes_needed.map(|v| v.to_string()).unwrap_or_default(),
                r.percentage.map(|v| v.to_string()).unwrap_or_default(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// `strategy,step,mean_incremental_ratio`.
    pub fn write_incremental_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["strategy", "step", "mean_incremental_ratio"])?;
        for s in &self.summary {
            for (i, v) in s.mean_incremental.iter().enumerate() {
                w.write_record([
                    s.strategy.name().to_string(),
                    (i + 1).to_string(),
                    v.to_string(),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Runs every strategy on one expander per seed. Seeds are evaluated in
/// parallel; the result does not depend on scheduling.
pub fn strategy_comparison(cfg: &ComparisonConfig) -> Result<ComparisonTable> {
    if cfg.strategies.is_empty() || cfg.seeds.is_empty() {
        return Err(Error::Parameter(
            "need at least one strategy and one seed".into(),
        ));
    }
    let per_seed: Vec<Vec<ComparisonRow>> = cfg
        .seeds
        .par_iter()
        .map(|&seed| -> Result<Vec<ComparisonRow>> {
            let g = generate_expander(cfg.n, cfg.d, cfg.c_prime, seed)?.graph;
            let target = match cfg.target {
                ComparisonTarget::RecoverLambda2 => Target::Connectivity {
                    value: spectral_summary(&g)?.lambda2,
                },
                ComparisonTarget::Connectivity { value } => Target::Connectivity { value },
                ComparisonTarget::Consensusable { sigma_tilde } => {
                    Target::Consensusable { sigma_tilde }
                }
            };
            cfg.strategies
                .iter()
                .map(|&strategy| {
                    let start = Instant::now();
                    let report =
                        recover_by_grounding(&g, &cfg.initial_grounded, target, strategy, seed)?;
                    let elapsed_secs = start.elapsed().as_secs_f64();
                    let total = report.initial_grounded.len();
                    Ok(ComparisonRow {
                        seed,
                        strategy,
                        nodes_needed: report.nodes_needed,
                        percentage: report
                            .nodes_needed
                            .map(|k| 100.0 * (k + total) as f64 / cfg.n as f64),
                        report,
                        elapsed_secs,
                    })
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let mut rows: Vec<ComparisonRow> = per_seed.into_iter().flatten().collect();
    rows.sort_by_key(|r| (r.seed, r.strategy));

    let summary = cfg
        .strategies
        .iter()
        .map(|&strategy| {
            let mine: Vec<&ComparisonRow> =
                rows.iter().filter(|r| r.strategy == strategy).collect();
            let reached: Vec<&ComparisonRow> = mine
                .iter()
                .copied()
                .filter(|r| r.nodes_needed.is_some())
                .collect();
            let mean = |f: &dyn Fn(&ComparisonRow) -> f64| {
                if reached.is_empty() {
                    f64::NAN
                } else {
                    reached.iter().map(|r| f(r)).sum::<f64>() / reached.len() as f64
                }
            };
            let longest = mine.iter().map(|r| r.report.steps.len()).max().unwrap_or(1);
            let mean_incremental = (1..longest)
                .map(|step| {
                    let xs: Vec<f64> = mine
                        .iter()
                        .filter_map(|r| r.report.steps.get(step).and_then(|s| s.incremental_ratio))
                        .collect();
                    xs.iter().sum::<f64>() / xs.len() as f64
                })
                .collect();
            StrategySummary {
                strategy,
                mean_nodes_needed: mean(&|r| r.nodes_needed.unwrap() as f64),
                mean_percentage: mean(&|r| r.percentage.unwrap()),
                unreachable: mine.len() - reached.len(),
                mean_incremental,
                mean_elapsed_secs: mine.iter().map(|r| r.elapsed_secs).sum::<f64>()
                    / mine.len() as f64,
            }
        })
        .collect();
    Ok(ComparisonTable { rows, summary })
}

/// Where the exhaustive best extra node sits relative to the layers around
/// a grounded node.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BestNodeLayer {
    pub best: usize,
    pub best_layer: usize,
    pub ell: usize,
    pub in_top_two: bool,
}

pub fn best_node_layer(g: &Graph, grounded_node: usize) -> Result<BestNodeLayer> {
    let best = exhaustive_best_node(g, &[grounded_node])?.node;
    let layers = layer_decomposition_from(g, &[grounded_node])?;
    let ell = layers.ell();
    let best_layer = layers.layer_of(best).unwrap_or(0);
    Ok(BestNodeLayer {
        best,
        best_layer,
        ell,
        in_top_two: best_layer + 1 >= ell,
    })
}
