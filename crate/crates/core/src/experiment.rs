//! Config-driven experiments: one JSON config in, one output directory of
//! CSV files plus `manifest.json` out.
//!
//! Every CSV starts with a `#` line carrying the config hash and master
//! seed, followed by a mandatory header row.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::control::{
    design_gain, epsilon_window, min_c_prime, sigma_tilde_of, sigma_window, AgentDynamics, Gain,
    GainDesign, MareOptions,
};
use crate::countermeasure::{
    best_node_layer, exhaustive_best_node, perron_scores, recover_by_grounding, score_selection,
    strategy_comparison, ComparisonConfig, ComparisonTarget, Strategy, Target,
};
use crate::graph::{
    bfs_distances, generate_expander, layer_decomposition_from, read_graph, write_graph, Graph,
};
use crate::sim::{
    consensus_metrics, simulate, steady_state, ConsensusMetrics, Disturbance, Event,
    GroundingEvent, GroundingForm, Reference, SimOptions, Trajectory,
};
use crate::spectral::{
    grounded_connectivity_bound, grounded_laplacian, spectral_summary, threshold_sizes,
    write_spectrum_csv,
};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Generate,
    Spectral,
    Design,
    Simulate,
    Select,
    Recover,
    Compare,
    Scan,
}

impl std::str::FromStr for Kind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        serde_json::from_value(Value::String(s.to_string()))
            .map_err(|_| Error::Config(format!("unknown experiment kind `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GraphParams {
    pub n: usize,
    pub d: usize,
    pub c_prime: f64,
    /// Number of graphs; graph `i` uses seed `master + i`.
    pub count: usize,
    /// Use this graph file instead of sampling.
    pub file: Option<PathBuf>,
}

impl Default for GraphParams {
    fn default() -> Self {
        GraphParams {
            n: 20,
            d: 6,
            c_prime: 0.3,
            count: 1,
            file: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DynamicsParams {
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
}

impl Default for DynamicsParams {
    fn default() -> Self {
        DynamicsParams {
            a: vec![vec![1.0, 1.0], vec![0.0, 1.0]],
            b: vec![0.0, 1.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DesignParams {
    pub r: f64,
    pub sigma: Option<f64>,
    pub epsilon: Option<f64>,
    /// Explicit gain; skips the design step.
    pub k: Option<Vec<f64>>,
}

impl Default for DesignParams {
    fn default() -> Self {
        DesignParams {
            r: 1.0,
            sigma: None,
            epsilon: None,
            k: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GroundingParams {
    pub nodes: Vec<usize>,
    pub time: usize,
    /// Defaults to takeover with the consensus gain and `c1 = 1`.
    pub form: Option<GroundingForm>,
}

impl Default for GroundingParams {
    fn default() -> Self {
        GroundingParams {
            nodes: vec![1],
            time: 0,
            form: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateParams {
    pub steps: usize,
    /// Network sizes to run; empty means `graph.n`.
    pub sizes: Vec<usize>,
    pub tol: f64,
    pub stride: usize,
    /// Input offset pulse; its node defaults to the node farthest from the
    /// first grounded node.
    pub disturbance: Option<DisturbanceParams>,
}

impl Default for SimulateParams {
    fn default() -> Self {
        SimulateParams {
            steps: 300,
            sizes: Vec::new(),
            tol: 1e-3,
            stride: 1,
            disturbance: Some(DisturbanceParams::default()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DisturbanceParams {
    pub node: Option<usize>,
    pub start: usize,
    pub end: usize,
    pub offset: f64,
}

impl Default for DisturbanceParams {
    fn default() -> Self {
        DisturbanceParams {
            node: None,
            start: 10,
            end: 20,
            offset: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RecoverParams {
    pub strategies: Vec<Strategy>,
    pub target: ComparisonTarget,
}

impl Default for RecoverParams {
    fn default() -> Self {
        RecoverParams {
            strategies: vec![
                Strategy::Best,
                Strategy::Algorithm2,
                Strategy::Random,
                Strategy::Worst,
            ],
            target: ComparisonTarget::RecoverLambda2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScanParams {
    pub sizes: Vec<usize>,
}

impl Default for ScanParams {
    fn default() -> Self {
        ScanParams {
            sizes: vec![10, 20, 50, 100],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: Kind,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub graph: GraphParams,
    #[serde(default)]
    pub dynamics: DynamicsParams,
    #[serde(default)]
    pub design: DesignParams,
    #[serde(default)]
    pub grounding: GroundingParams,
    #[serde(default)]
    pub simulate: SimulateParams,
    #[serde(default)]
    pub recover: RecoverParams,
    #[serde(default)]
    pub scan: ScanParams,
    #[serde(default)]
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(kind: Kind) -> Self {
        ExperimentConfig {
            kind,
            seed: 0,
            graph: GraphParams::default(),
            dynamics: DynamicsParams::default(),
            design: DesignParams::default(),
            grounding: GroundingParams::default(),
            simulate: SimulateParams::default(),
            recover: RecoverParams::default(),
            scan: ScanParams::default(),
            out: None,
        }
    }

    /// Reads a JSON config and applies `key=value` overrides, where `key` is
    /// a dotted path and `value` is parsed as JSON or taken as a string.
    pub fn load(path: impl AsRef<Path>, overrides: &[String]) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let value: Value = serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_value(value, overrides)
    }

    pub fn from_value(mut value: Value, overrides: &[String]) -> Result<Self> {
        for o in overrides {
            apply_override(&mut value, o)?;
        }
        serde_json::from_value(value).map_err(|e| Error::Config(e.to_string()))
    }

    /// Hex SHA-256 of the canonical JSON form, ignoring the output directory.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.out = None;
        let text = serde_json::to_string(&c).expect("config serializes");
        hex::encode(Sha256::digest(text.as_bytes()))
    }

    pub fn agent_dynamics(&self) -> Result<AgentDynamics> {
        AgentDynamics::from_rows(&self.dynamics.a, &self.dynamics.b)
    }
}

fn apply_override(root: &mut Value, assignment: &str) -> Result<()> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override `{assignment}` is not key=value")))?;
    let parsed = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut cur = root;
    let parts: Vec<&str> = key.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        let obj = cur.as_object_mut().ok_or_else(|| {
            Error::Config(format!(
                "override `{key}`: `{part}` is not inside an object"
            ))
        })?;
        if i + 1 == parts.len() {
            obj.insert(part.to_string(), parsed);
            return Ok(());
        }
        cur = obj
            .entry(part.to_string())
            .or_insert_with(|| Value::Object(Default::default()));
    }
    Err(Error::Config("empty override key".into()))
}

/// Dry-run feasibility findings. `violations` block a run.
#[derive(Debug, Clone, Default, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<String>,
    pub notes: Vec<String>,
}

impl ValidationReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn validate(cfg: &ExperimentConfig) -> ValidationReport {
    let mut rep = ValidationReport::default();
    let g = &cfg.graph;
    let mut sizes = vec![g.n];
    if cfg.kind == Kind::Simulate {
        sizes.extend(&cfg.simulate.sizes);
    }
    if cfg.kind == Kind::Scan {
        sizes = cfg.scan.sizes.clone();
    }
    match &g.file {
        Some(f) if !f.exists() => rep
            .violations
            .push(format!("graph file {} does not exist", f.display())),
        Some(_) => {}
        None => {
            for &n in &sizes {
                if n < 3 || g.d == 0 || g.d >= n {
                    rep.violations.push(format!(
                        "need n >= 3 and 0 < d < n, got n = {n}, d = {}",
                        g.d
                    ));
                } else if n * g.d % 2 == 1 {
                    rep.violations.push(format!(
                        "n * d = {n} * {} is odd; no regular graph exists",
                        g.d
                    ));
                }
            }
        }
    }
    if g.count == 0 {
        rep.violations.push("graph.count must be at least 1".into());
    }
    if !(g.c_prime > 0.0 && g.c_prime < 2.0) {
        rep.violations
            .push(format!("c' = {} outside (0, 2)", g.c_prime));
    }

    match cfg.agent_dynamics() {
        Err(e) => rep.violations.push(format!("dynamics: {e}")),
        Ok(dyn_) => {
            let sigma_tilde = sigma_tilde_of(&dyn_);
            let floor = min_c_prime(sigma_tilde);
            rep.notes.push(format!(
                "sigma_tilde = {sigma_tilde:.6}, c' must exceed {floor:.6}"
            ));
            let c = g.c_prime;
            if c <= floor {
                rep.violations.push(format!(
                    "c' = {c} <= 2(1 - sigma_tilde)/(1 + sigma_tilde) = {floor:.6}"
                ));
            }
            if let Some(sigma) = cfg.design.sigma {
                let (lo, hi) = sigma_window(c, sigma_tilde);
                if !(sigma >= lo && sigma < hi) {
                    rep.violations
                        .push(format!("sigma = {sigma} outside [{lo:.6}, {hi:.6})"));
                }
                if let Some(eps) = cfg.design.epsilon {
                    let (lo, hi) = epsilon_window(c, sigma);
                    if !(eps >= lo && eps <= hi) {
                        rep.violations
                            .push(format!("epsilon = {eps} outside [{lo:.6}, {hi:.6}]"));
                    }
                }
            }
            if let Some(k) = &cfg.design.k {
                if k.len() != dyn_.state_dim() {
                    rep.violations.push(format!(
                        "gain has {} entries, state dimension is {}",
                        k.len(),
                        dyn_.state_dim()
                    ));
                }
            }
        }
    }
    if cfg.design.r < 0.0 {
        rep.violations
            .push(format!("R = {} is negative", cfg.design.r));
    }
    if matches!(
        cfg.kind,
        Kind::Spectral | Kind::Simulate | Kind::Select | Kind::Recover | Kind::Compare
    ) {
        if cfg.grounding.nodes.is_empty() {
            rep.violations.push("grounding.nodes is empty".into());
        }
        let smallest = sizes.iter().copied().min().unwrap_or(0);
        if g.file.is_none() && cfg.grounding.nodes.iter().any(|&v| v == 0 || v > smallest) {
            rep.violations.push(format!(
                "grounding nodes {:?} outside 1..={smallest}",
                cfg.grounding.nodes
            ));
        }
    }
    if cfg.kind == Kind::Compare && cfg.recover.strategies.len() < 2 {
        rep.violations
            .push("compare needs at least two strategies".into());
    }
    if matches!(cfg.kind, Kind::Recover | Kind::Compare) && cfg.recover.strategies.is_empty() {
        rep.violations.push("no strategies given".into());
    }
    if cfg.kind == Kind::Scan && cfg.scan.sizes.is_empty() {
        rep.violations.push("scan.sizes is empty".into());
    }
    rep
}

/// Manifest written next to the outputs.
#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub kind: Kind,
    pub seed: u64,
    pub config_hash: String,
    pub config: ExperimentConfig,
    pub version: String,
    pub out_dir: PathBuf,
    pub files: Vec<String>,
    pub elapsed_secs: f64,
    /// Kind-specific summary values.
    pub summary: Value,
}

struct Output {
    dir: PathBuf,
    header: String,
    files: Vec<String>,
}

impl Output {
    fn csv(&mut self, name: &str, body: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<()> {
        let mut buf = self.header.clone().into_bytes();
        body(&mut buf)?;
        fs::write(self.dir.join(name), buf)?;
        self.files.push(name.to_string());
        Ok(())
    }

    fn rows(&mut self, name: &str, header: &[&str], rows: Vec<Vec<String>>) -> Result<()> {
        self.csv(name, |buf| {
            let mut w = csv::Writer::from_writer(buf);
            w.write_record(header)?;
            for r in rows {
                w.write_record(&r)?;
            }
            w.flush()?;
            Ok(())
        })
    }

    fn text(&mut self, name: &str, text: &str) -> Result<()> {
        fs::write(self.dir.join(name), text)?;
        self.files.push(name.to_string());
        Ok(())
    }
}

/// Validates and runs an experiment, writing into `cfg.out` (or `out`).
pub fn run(cfg: &ExperimentConfig) -> Result<Manifest> {
    let report = validate(cfg);
    if !report.ok() {
        return Err(Error::Config(report.violations.join("; ")));
    }
    let dir = cfg.out.clone().unwrap_or_else(|| {
        PathBuf::from(format!(
            "out/{}",
            serde_json::to_value(cfg.kind).unwrap().as_str().unwrap()
        ))
    });
    fs::create_dir_all(&dir)?;
    let hash = cfg.hash();
    let mut out = Output {
        dir: dir.clone(),
        header: format!("# config_sha256={hash} seed={}\n", cfg.seed),
        files: Vec::new(),
    };
    let start = Instant::now();
    let summary = match cfg.kind {
        Kind::Generate => run_generate(cfg, &mut out)?,
        Kind::Spectral => run_spectral(cfg, &mut out)?,
        Kind::Design => run_design(cfg, &mut out)?,
        Kind::Simulate => run_simulate(cfg, &mut out)?,
        Kind::Select => run_select(cfg, &mut out)?,
        Kind::Recover => run_recover(cfg, &mut out)?,
        Kind::Compare => run_compare(cfg, &mut out)?,
        Kind::Scan => run_scan(cfg, &mut out)?,
    };
    let manifest = Manifest {
        kind: cfg.kind,
        seed: cfg.seed,
        config_hash: hash,
        config: cfg.clone(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        out_dir: dir.clone(),
        files: out.files.clone(),
        elapsed_secs: start.elapsed().as_secs_f64(),
        summary,
    };
    fs::write(
        dir.join("manifest.json"),
        serde_json::to_string_pretty(&manifest)?,
    )?;
    Ok(manifest)
}

/// `(seed, graph)` pairs: the configured file, or `count` expanders with
/// seeds `master, master + 1, ...`.
fn graphs(cfg: &ExperimentConfig, n: usize) -> Result<Vec<(u64, Graph)>> {
    if let Some(f) = &cfg.graph.file {
        return Ok(vec![(cfg.seed, read_graph(f)?)]);
    }
    (0..cfg.graph.count as u64)
        .into_par_iter()
        .map(|i| {
            let seed = cfg.seed + i;
            Ok((
                seed,
                generate_expander(n, cfg.graph.d, cfg.graph.c_prime, seed)?.graph,
            ))
        })
        .collect()
}

fn gain_for(cfg: &ExperimentConfig, dyn_: &AgentDynamics) -> Result<(Gain, Option<GainDesign>)> {
    if let Some(k) = &cfg.design.k {
        return Ok((Gain::from_row_slice(k), None));
    }
    let d = design_gain(
        dyn_,
        cfg.graph.c_prime,
        cfg.design.r,
        cfg.design.sigma,
        cfg.design.epsilon,
        &MareOptions::default(),
    )?;
    Ok((d.k.clone(), Some(d)))
}

fn fmt_opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn run_generate(cfg: &ExperimentConfig, out: &mut Output) -> Result<Value> {
    let (n, d, c) = (cfg.graph.n, cfg.graph.d, cfg.graph.c_prime);
    let found: Vec<(u64, crate::graph::Expander)> = (0..cfg.graph.count as u64)
        .into_par_iter()
        .map(|i| Ok((cfg.seed + i, generate_expander(n, d, c, cfg.seed + i)?)))
        .collect::<Result<_>>()?;
    let mut rows = Vec::new();
    for (seed, e) in &found {
        let name = format!("graph_seed{seed}.txt");
        write_graph(&e.graph, out.dir.join(&name))?;
        out.files.push(name);
        rows.push(vec![
            seed.to_string(),
            n.to_string(),
            d.to_string(),
            e.lambda2.to_string(),
            e.rejections.to_string(),
        ]);
    }
    out.rows(
        "graphs.csv",
        &["seed", "n", "d", "lambda2", "rejections"],
        rows,
    )?;
    Ok(serde_json::json!({ "graphs": found.len() }))
}

fn run_spectral(cfg: &ExperimentConfig, out: &mut Output) -> Result<Value> {
    let grounded = &cfg.grounding.nodes;
    let mut rows = Vec::new();
    for (seed, g) in graphs(cfg, cfg.graph.n)? {
        let s = spectral_summary(&g)?;
        out.csv(&format!("spectrum_seed{seed}.csv"), |buf| {
            write_spectrum_csv(buf, &s.eigenvalues)
        })?;
        let gs = grounded_laplacian(&g, grounded)?;
        let (n, m) = (g.node_count(), gs.grounded.len());
        let degree_sum: usize = gs.grounded.iter().map(|&v| g.degree(v)).sum();
        let bound = grounded_connectivity_bound(n, g.d_max(), g.d_min(), m, None)?;
        let strict = grounded_connectivity_bound(n, g.d_max(), g.d_min(), m, Some(degree_sum))?;
        let t = threshold_sizes(cfg.graph.c_prime, g.d_max(), g.d_min())?;
        rows.push(vec![
            seed.to_string(),
            n.to_string(),
            s.lambda2.to_string(),
            s.lambda_n.to_string(),
            s.eigenratio.to_string(),
            gs.connectivity().to_string(),
            gs.radius().to_string(),
            gs.eigenratio().to_string(),
            bound.to_string(),
            strict.to_string(),
            t.connectivity.to_string(),
            t.eigenratio.to_string(),
        ]);
    }
    out.rows(
        "spectral.csv",
        &[
            "seed",
            "n",
            "lambda2",
            "lambda_n",
            "eigenratio",
            "lambda1_bar",
            "radius_bar",
            "eigenratio_bar",
            "bound",
            "strict_bound",
            "threshold_connectivity",
            "threshold_eigenratio",
        ],
        rows,
    )?;
    Ok(Value::Null)
}

fn run_design(cfg: &ExperimentConfig, out: &mut Output) -> Result<Value> {
    let dyn_ = cfg.agent_dynamics()?;
    let (_, design) = gain_for(cfg, &dyn_)?;
    let design =
        design.ok_or_else(|| Error::Config("design kind needs no explicit gain".into()))?;
    out.csv("gain.csv", |buf| design.write_csv(buf))?;
    Ok(serde_json::to_value(&design)?)
}

/// Node farthest from `from` (lowest id on ties).
pub fn farthest_node(g: &Graph, from: usize) -> usize {
    let dist = bfs_distances(g.adjacency_lists(), &[from - 1]);
    let far = dist.iter().flatten().copied().max().unwrap_or(0);
    dist.iter().position(|&d| d == Some(far)).unwrap() + 1
}

/// One disturbance run: all agents start at the steady state of the
/// grounding (or at rest without one), an input pulse hits one node, and
/// the deviation is tracked until it settles.
pub fn disturbance_run(
    g: &Graph,
    dyn_: &AgentDynamics,
    k: &Gain,
    grounding: Option<&GroundingEvent>,
    disturbance: &Disturbance,
    steps: usize,
    stride: usize,
    tol: f64,
) -> Result<(Trajectory, ConsensusMetrics)> {
    let n = dyn_.state_dim();
    let mut events = Vec::new();
    let mut reference = None;
    let x0: Vec<Vec<f64>> = match grounding {
        None => vec![vec![0.0; n]; g.node_count()],
        Some(ev) => {
            let ss = match ev.form {
                GroundingForm::CutInput { .. } => vec![0.0; n * g.node_count()],
                _ => steady_state(g, dyn_, k, ev)?,
            };
            if let GroundingForm::Takeover { k1, c1 } = &ev.form {
                reference = Some(Reference {
                    k: k1.clone(),
                    c1: *c1,
                    x0: ss[..n].to_vec(),
                });
            }
            events.push(Event::Ground(ev.clone()));
            ss.chunks(n).map(<[f64]>::to_vec).collect()
        }
    };
    events.push(Event::Disturb(disturbance.clone()));
    events.sort_by_key(Event::time);
    let traj = simulate(
        g,
        dyn_,
        k,
        &x0,
        steps,
        &events,
        &SimOptions { stride, reference },
    )?;
    let metrics = consensus_metrics(&traj, tol);
    Ok((traj, metrics))
}

fn run_simulate(cfg: &ExperimentConfig, out: &mut Output) -> Result<Value> {
    let dyn_ = cfg.agent_dynamics()?;
    let (k, _) = gain_for(cfg, &dyn_)?;
    let sp = &cfg.simulate;
    let sizes = if sp.sizes.is_empty() {
        vec![cfg.graph.n]
    } else {
        sp.sizes.clone()
    };
    let form = cfg
        .grounding
        .form
        .clone()
        .unwrap_or(GroundingForm::Takeover {
            k1: k.iter().copied().collect(),
            c1: 1.0,
        });
    let mut rows = Vec::new();
    for n in sizes {
        let g = generate_expander(n, cfg.graph.d, cfg.graph.c_prime, cfg.seed)?.graph;
        let pulse = sp.disturbance.clone().unwrap_or(DisturbanceParams {
            offset: 0.0,
            ..Default::default()
        });
        let node = match pulse.node {
            Some(v) => v,
            None => farthest_node(&g, cfg.grounding.nodes[0]),
        };
        let disturbance = Disturbance {
            node,
            start: pulse.start,
            end: pulse.end,
            offset: pulse.offset,
        };
        let event = GroundingEvent {
            time: cfg.grounding.time,
            nodes: cfg.grounding.nodes.clone(),
            form: form.clone(),
        };
        for grounded in [false, true] {
            let (traj, m) = disturbance_run(
                &g,
                &dyn_,
                &k,
                grounded.then_some(&event),
                &disturbance,
                sp.steps,
                sp.stride,
                sp.tol,
            )?;
            let tag = if grounded { "grounded" } else { "free" };
            out.csv(&format!("trajectory_n{n}_{tag}.csv"), |buf| {
                traj.write_csv(buf)
            })?;
            out.text(
                &format!("trajectory_n{n}_{tag}.events.json"),
                &traj.events_json()?,
            )?;
            rows.push(vec![
                n.to_string(),
                tag.to_string(),
                node.to_string(),
                fmt_opt(m.settling_step),
                m.peak().to_string(),
                m.diverged.to_string(),
                fmt_opt(
                    m.reference_deviation
                        .as_ref()
                        .and_then(|r| r.last().copied()),
                ),
            ]);
        }
    }
    out.rows(
        "settling.csv",
        &[
            "n",
            "case",
            "disturbed_node",
            "settling_step",
            "peak_deviation",
            "diverged",
            "final_reference_deviation",
        ],
        rows,
    )?;
    Ok(serde_json::json!({ "gain": k.iter().copied().collect::<Vec<f64>>() }))
}

fn run_select(cfg: &ExperimentConfig, out: &mut Output) -> Result<Value> {
    let grounded = cfg.grounding.nodes.clone();
    let per_graph: Vec<(u64, Vec<Vec<String>>, Vec<String>)> = graphs(cfg, cfg.graph.n)?
        .into_par_iter()
        .map(|(seed, g)| {
            let best = exhaustive_best_node(&g, &grounded)?;
            let (chosen, scores) = score_selection(&g, &grounded)?;
            let perron = perron_scores(&g, &grounded)?;
            let layers = layer_decomposition_from(&g, &grounded)?;
            let rows = scores
                .remaining
                .iter()
                .enumerate()
                .map(|(p, &v)| {
                    vec![
                        seed.to_string(),
                        v.to_string(),
                        scores.layer[p].to_string(),
                        best.values[p].1.to_string(),
                        scores.psi[p].to_string(),
                        scores.score[p].to_string(),
                        perron[p].1.to_string(),
                    ]
                })
                .collect();
            let chosen_value = best.values.iter().find(|(v, _)| *v == chosen).unwrap().1;
            let summary = vec![
                seed.to_string(),
                layers.ell().to_string(),
                best.node.to_string(),
                best.value.to_string(),
                fmt_opt(layers.layer_of(best.node)),
                chosen.to_string(),
                chosen_value.to_string(),
            ];
            Ok((seed, rows, summary))
        })
        .collect::<Result<_>>()?;
    let mut node_rows = Vec::new();
    let mut summary_rows = Vec::new();
    for (_, rows, summary) in per_graph {
        node_rows.extend(rows);
        summary_rows.push(summary);
    }
    out.rows(
        "scores.csv",
        &[
            "seed",
            "node",
            "layer",
            "lambda1_prime",
            "psi",
            "score",
            "perron_score",
        ],
        node_rows,
    )?;
    out.rows(
        "selection.csv",
        &[
            "seed",
            "ell",
            "best_node",
            "best_lambda1_prime",
            "best_layer",
            "algorithm2_node",
            "algorithm2_lambda1_prime",
        ],
        summary_rows,
    )?;
    Ok(Value::Null)
}

fn resolve_target(t: ComparisonTarget, g: &Graph) -> Result<Target> {
    Ok(match t {
        ComparisonTarget::RecoverLambda2 => Target::Connectivity {
            value: spectral_summary(g)?.lambda2,
        },
        ComparisonTarget::Connectivity { value } => Target::Connectivity { value },
        ComparisonTarget::Consensusable { sigma_tilde } => Target::Consensusable { sigma_tilde },
    })
}

fn run_recover(cfg: &ExperimentConfig, out: &mut Output) -> Result<Value> {
    let mut summary = Vec::new();
    for (seed, g) in graphs(cfg, cfg.graph.n)? {
        let target = resolve_target(cfg.recover.target, &g)?;
        for &strategy in &cfg.recover.strategies {
            let rep = recover_by_grounding(&g, &cfg.grounding.nodes, target, strategy, seed)?;
            out.csv(
                &format!("recovery_seed{seed}_{}.csv", strategy.name()),
                |buf| rep.write_csv(buf),
            )?;
            summary.push(serde_json::json!({
                "seed": seed,
                "strategy": strategy,
                "target": target,
                "grounded_sequence": rep.grounded_sequence,
                "nodes_needed": rep.nodes_needed,
            }));
        }
    }
    let summary = Value::Array(summary);
    out.text(
        "recovery_summary.json",
        &serde_json::to_string_pretty(&summary)?,
    )?;
    Ok(summary)
}

fn run_compare(cfg: &ExperimentConfig, out: &mut Output) -> Result<Value> {
    let cc = ComparisonConfig {
        n: cfg.graph.n,
        d: cfg.graph.d,
        c_prime: cfg.graph.c_prime,
        seeds: (0..cfg.graph.count as u64).map(|i| cfg.seed + i).collect(),
        strategies: cfg.recover.strategies.clone(),
        target: cfg.recover.target,
        initial_grounded: cfg.grounding.nodes.clone(),
    };
    let table = strategy_comparison(&cc)?;
    out.csv("comparison.csv", |buf| table.write_csv(buf))?;
    out.csv("incremental.csv", |buf| table.write_incremental_csv(buf))?;
    let rows = table
        .summary
        .iter()
        .map(|s| {
            vec![
                s.strategy.name().to_string(),
                s.mean_nodes_needed.to_string(),
                s.mean_percentage.to_string(),
                s.unreachable.to_string(),
            ]
        })
        .collect();
    out.rows(
        "comparison_summary.csv",
        &[
            "strategy",
            "mean_nodes_needed",
            "mean_percentage",
            "unreachable",
        ],
        rows,
    )?;
    // timings vary run to run, so they live in the manifest only
    Ok(serde_json::to_value(
        table
            .summary
            .iter()
            .map(|s| (s.strategy.name(), s.mean_elapsed_secs))
            .collect::<std::collections::BTreeMap<_, _>>(),
    )?)
}

fn run_scan(cfg: &ExperimentConfig, out: &mut Output) -> Result<Value> {
    let node = cfg.grounding.nodes.first().copied().unwrap_or(1);
    let mut rows = Vec::new();
    let mut summary = Vec::new();
    for &n in &cfg.scan.sizes {
        let results: Vec<(u64, crate::countermeasure::BestNodeLayer)> = graphs(cfg, n)?
            .into_par_iter()
            .map(|(seed, g)| Ok((seed, best_node_layer(&g, node)?)))
            .collect::<Result<_>>()?;
        let total = results.len() as f64;
        let (mut top, mut second) = (0usize, 0usize);
        for (seed, r) in &results {
            if r.best_layer == r.ell {
                top += 1;
            } else if r.best_layer + 1 == r.ell {
                second += 1;
            }
            rows.push(vec![
                n.to_string(),
                seed.to_string(),
                r.ell.to_string(),
                r.best.to_string(),
                r.best_layer.to_string(),
                r.in_top_two.to_string(),
            ]);
        }
        let other = results.len() - top - second;
        summary.push(vec![
            n.to_string(),
            results.len().to_string(),
            (100.0 * top as f64 / total).to_string(),
            (100.0 * second as f64 / total).to_string(),
            (100.0 * other as f64 / total).to_string(),
        ]);
    }
    out.rows(
        "scan.csv",
        &["n", "seed", "ell", "best_node", "best_layer", "in_top_two"],
        rows,
    )?;
    out.rows(
        "scan_summary.csv",
        &[
            "n",
            "graphs",
            "pct_layer_ell",
            "pct_layer_ell_minus_1",
            "pct_other",
        ],
        summary,
    )?;
    Ok(Value::Null)
}
