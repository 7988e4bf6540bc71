//! Closed-loop network simulation with grounding events.
//!
//! Before any grounding, the stacked state follows
//! `x(k+1) = (I ⊗ A - L ⊗ BK) x(k)`. A grounded node stops listening to its
//! neighbors and evolves according to its grounding form; the remaining nodes
//! keep running the protocol against every neighbor, grounded or not, which
//! is `x̄(k+1) = (I ⊗ A - L̄ ⊗ BK) x̄(k) + (Λ ⊗ BK)(x_grounded(k))`.

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::control::{closed_loop_radius, is_schur, AgentDynamics, Gain};
use crate::graph::Graph;
use crate::spectral::grounded_laplacian;
use crate::{Error, Result};

pub const DEFAULT_TOL: f64 = 1e-6;
pub const DIVERGENCE_THRESHOLD: f64 = 1e6;

/// How a grounded node behaves from the grounding step on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum GroundingForm {
    /// State pinned to `c_bar`, or to its state at the grounding step when
    /// `c_bar` is absent.
    FixState {
        #[serde(default)]
        c_bar: Option<Vec<f64>>,
    },
    /// Input forced to zero; the node then runs `x(k+1) = Ā x(k)` with `Ā`
    /// defaulting to `A`.
    CutInput {
        #[serde(default)]
        a_bar: Option<Vec<Vec<f64>>>,
    },
    /// Local feedback `u = -K1 x + c1`; `A - B K1` must be Schur.
    Takeover { k1: Vec<f64>, c1: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundingEvent {
    pub time: usize,
    pub nodes: Vec<usize>,
    #[serde(flatten)]
    pub form: GroundingForm,
}

/// Additive input offset on one node for steps `start..=end`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Disturbance {
    pub node: usize,
    pub start: usize,
    pub end: usize,
    pub offset: f64,
}

/// Replaces the consensus gain from `time` on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GainChange {
    pub time: usize,
    pub k: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Event {
    Ground(GroundingEvent),
    Disturb(Disturbance),
    SetGain(GainChange),
}

impl Event {
    pub fn time(&self) -> usize {
        match self {
            Event::Ground(e) => e.time,
            Event::Disturb(d) => d.start,
            Event::SetGain(c) => c.time,
        }
    }
}

/// Independent reference `x*(k+1) = (A - B K) x*(k) + B c1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reference {
    pub k: Vec<f64>,
    pub c1: f64,
    pub x0: Vec<f64>,
}

#[derive(Debug, Clone, Default)]
pub struct SimOptions {
    /// Record every `stride`-th step (plus the last); 0 or 1 records all.
    pub stride: usize,
    pub reference: Option<Reference>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Trajectory {
    pub node_count: usize,
    pub state_dim: usize,
    /// Step index of each recorded sample.
    pub times: Vec<usize>,
    /// `states[s][i * n + c]`: component `c` of node `i` (0-based) at `times[s]`.
    pub states: Vec<Vec<f64>>,
    /// Inputs applied at each recorded step (absent for the final sample).
    pub inputs: Vec<Vec<f64>>,
    pub reference: Option<Vec<Vec<f64>>>,
    pub events: Vec<Event>,
}

impl Trajectory {
    pub fn node_state(&self, sample: usize, node: usize) -> &[f64] {
        let n = self.state_dim;
        &self.states[sample][(node - 1) * n..node * n]
    }

    pub fn final_state(&self) -> &[f64] {
        self.states.last().unwrap()
    }

    /// Rows `k,node,x1..xn,deviation`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let deviation: Vec<f64> = self
            .states
            .iter()
            .map(|s| max_pairwise_deviation(s, self.state_dim))
            .collect();
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["k".to_string(), "node".to_string()];
        header.extend((1..=self.state_dim).map(|c| format!("x{c}")));
        header.push("deviation".into());
        w.write_record(&header)?;
        for (s, &k) in self.times.iter().enumerate() {
            for node in 1..=self.node_count {
                let mut row = vec![k.to_string(), node.to_string()];
                row.extend(self.node_state(s, node).iter().map(f64::to_string));
                row.push(deviation[s].to_string());
                w.write_record(&row)?;
            }
        }
        w.flush()?;
        Ok(())
    }

    /// JSON record of the events applied, for provenance next to the CSV.
    pub fn events_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.events)?)
    }
}

#[derive(Debug, Clone)]
enum Mode {
    Follower,
    Fixed(DVector<f64>),
    Cut(DMatrix<f64>),
    Takeover(Gain, f64),
}

fn vector(v: &[f64], n: usize, what: &str) -> Result<DVector<f64>> {
    if v.len() != n {
        return Err(Error::Parameter(format!(
            "{what} has length {}, expected {n}",
            v.len()
        )));
    }
    Ok(DVector::from_column_slice(v))
}

fn gain(k: &[f64], n: usize, what: &str) -> Result<Gain> {
    if k.len() != n {
        return Err(Error::Parameter(format!(
            "{what} has length {}, expected {n}",
            k.len()
        )));
    }
    Ok(Gain::from_row_slice(k))
}

fn square(rows: &[Vec<f64>], n: usize, what: &str) -> Result<DMatrix<f64>> {
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        return Err(Error::Parameter(format!("{what} must be {n}x{n}")));
    }
    let flat: Vec<f64> = rows.iter().flatten().copied().collect();
    Ok(DMatrix::from_row_slice(n, n, &flat))
}

fn takeover_gain(dyn_: &AgentDynamics, k1: &[f64]) -> Result<Gain> {
    let k1 = gain(k1, dyn_.state_dim(), "K1")?;
    if !is_schur(&dyn_.closed_loop(1.0, &k1)) {
        return Err(Error::Parameter(
            "takeover gain K1 does not make A - B K1 Schur".into(),
        ));
    }
    Ok(k1)
}

fn validate_events(g: &Graph, dyn_: &AgentDynamics, events: &[Event]) -> Result<()> {
    let n = dyn_.state_dim();
    if events.windows(2).any(|w| w[0].time() > w[1].time()) {
        return Err(Error::Parameter("events must be sorted by time".into()));
    }
    for e in events {
        match e {
            Event::Ground(ev) => {
                if ev.nodes.is_empty() {
                    return Err(Error::Parameter("grounding event without nodes".into()));
                }
                for &v in &ev.nodes {
                    g.check_node(v)?;
                }
                match &ev.form {
                    GroundingForm::FixState { c_bar: Some(c) } => {
                        vector(c, n, "c_bar")?;
                    }
                    GroundingForm::FixState { c_bar: None } => {}
                    GroundingForm::CutInput { a_bar: Some(a) } => {
                        square(a, n, "A_bar")?;
                    }
                    GroundingForm::CutInput { a_bar: None } => {}
                    GroundingForm::Takeover { k1, .. } => {
                        takeover_gain(dyn_, k1)?;
                    }
                }
            }
            Event::Disturb(d) => {
                g.check_node(d.node)?;
                if d.end < d.start {
                    return Err(Error::Parameter("disturbance ends before it starts".into()));
                }
            }
            Event::SetGain(c) => {
                gain(&c.k, n, "gain")?;
            }
        }
    }
    Ok(())
}

/// Runs the network for `steps` steps from `x0` (one state per node).
pub fn simulate(
    g: &Graph,
    dyn_: &AgentDynamics,
    k: &Gain,
    x0: &[Vec<f64>],
    steps: usize,
    events: &[Event],
    opts: &SimOptions,
) -> Result<Trajectory> {
    let n = dyn_.state_dim();
    let nodes = g.node_count();
    if k.len() != n {
        return Err(Error::Parameter(format!(
            "gain has length {}, expected {n}",
            k.len()
        )));
    }
    if x0.len() != nodes {
        return Err(Error::Parameter(format!(
            "{} initial states for {nodes} nodes",
            x0.len()
        )));
    }
    validate_events(g, dyn_, events)?;

    let a = dyn_.a();
    let b = dyn_.b();
    let mut x: Vec<DVector<f64>> = x0
        .iter()
        .map(|xi| vector(xi, n, "initial state"))
        .collect::<Result<_>>()?;
    let mut modes = vec![Mode::Follower; nodes];
    let mut k = k.clone();
    let stride = opts.stride.max(1);

    let mut reference = match &opts.reference {
        Some(r) => Some((
            gain(&r.k, n, "reference gain")?,
            r.c1,
            vector(&r.x0, n, "reference state")?,
        )),
        None => None,
    };

    let flatten = |x: &[DVector<f64>]| {
        x.iter()
            .flat_map(|xi| xi.iter().copied())
            .collect::<Vec<f64>>()
    };
    let mut traj = Trajectory {
        node_count: nodes,
        state_dim: n,
        times: Vec::new(),
        states: Vec::new(),
        inputs: Vec::new(),
        reference: reference.as_ref().map(|_| Vec::new()),
        events: events.to_vec(),
    };

    let mut next_event = 0;
    let mut u = vec![0.0; nodes];
    for step in 0..=steps {
        // events scheduled for this step take effect before the update
        while next_event < events.len() && events[next_event].time() <= step {
            match &events[next_event] {
                Event::Ground(ev) => {
                    for &v in &ev.nodes {
                        modes[v - 1] = match &ev.form {
                            GroundingForm::FixState { c_bar } => Mode::Fixed(match c_bar {
                                Some(c) => DVector::from_column_slice(c),
                                None => x[v - 1].clone(),
                            }),
                            GroundingForm::CutInput { a_bar } => Mode::Cut(match a_bar {
                                Some(rows) => square(rows, n, "A_bar")?,
                                None => a.clone(),
                            }),
                            GroundingForm::Takeover { k1, c1 } => {
                                Mode::Takeover(takeover_gain(dyn_, k1)?, *c1)
                            }
                        };
                        if let Mode::Fixed(c) = &modes[v - 1] {
                            x[v - 1] = c.clone();
                        }
                    }
                }
                Event::SetGain(c) => k = Gain::from_row_slice(&c.k),
                Event::Disturb(_) => {}
            }
            next_event += 1;
        }

        for (i, ui) in u.iter_mut().enumerate() {
            let offset: f64 = events
                .iter()
                .filter_map(|e| match e {
                    Event::Disturb(d) if d.node == i + 1 && (d.start..=d.end).contains(&step) => {
                        Some(d.offset)
                    }
                    _ => None,
                })
                .sum();
            *ui = match &modes[i] {
                Mode::Follower => {
                    let deg = g.degree(i + 1) as f64;
                    let mut agg = DVector::zeros(n);
                    for j in g.neighbors(i + 1) {
                        agg += &x[j - 1] - &x[i];
                    }
                    (&k * agg)[0] / deg + offset
                }
                Mode::Takeover(k1, c1) => -(k1 * &x[i])[0] + c1 + offset,
                Mode::Fixed(_) | Mode::Cut(_) => 0.0,
            };
        }

        let record = step % stride == 0 || step == steps;
        if record {
            traj.times.push(step);
            traj.states.push(flatten(&x));
            if step < steps {
                traj.inputs.push(u.clone());
            }
            if let (Some(out), Some((_, _, xr))) = (traj.reference.as_mut(), reference.as_ref()) {
                out.push(xr.iter().copied().collect());
            }
        }
        if step == steps {
            break;
        }

        for i in 0..nodes {
            x[i] = match &modes[i] {
                Mode::Fixed(c) => c.clone(),
                Mode::Cut(abar) => abar * &x[i],
                Mode::Follower | Mode::Takeover(..) => a * &x[i] + b * u[i],
            };
        }
        if let Some((kr, c1, xr)) = reference.as_mut() {
            let ur = -(&*kr * &*xr)[0] + *c1;
            *xr = a * &*xr + b * ur;
        }
    }
    Ok(traj)
}

/// `max_{i,j} ||x_i - x_j||_inf`, the largest per-component spread.
pub fn max_pairwise_deviation(stacked: &[f64], n: usize) -> f64 {
    (0..n)
        .map(|c| {
            let (lo, hi) = stacked
                .iter()
                .skip(c)
                .step_by(n)
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                    (lo.min(v), hi.max(v))
                });
            hi - lo
        })
        .fold(0.0, |acc, d| {
            if d.is_nan() {
                f64::INFINITY
            } else {
                acc.max(d)
            }
        })
}

#[derive(Debug, Clone, Serialize)]
pub struct ConsensusMetrics {
    pub times: Vec<usize>,
    pub deviation: Vec<f64>,
    /// `max_i ||x_i - x*||_inf` when the trajectory carries a reference.
    pub reference_deviation: Option<Vec<f64>>,
    /// First step after which the deviation stays below `tol`.
    pub settling_step: Option<usize>,
    pub diverged: bool,
}

impl ConsensusMetrics {
    /// Geometric-mean per-step contraction of the deviation between two
    /// recorded steps.
    pub fn decay_rate(&self, from: usize, to: usize) -> Option<f64> {
        let a = self.times.iter().position(|&t| t == from)?;
        let b = self.times.iter().position(|&t| t == to)?;
        if to <= from || self.deviation[a] <= 0.0 {
            return None;
        }
        Some((self.deviation[b] / self.deviation[a]).powf(1.0 / (to - from) as f64))
    }

    pub fn peak(&self) -> f64 {
        self.deviation.iter().copied().fold(0.0, f64::max)
    }
}

pub fn consensus_metrics(t: &Trajectory, tol: f64) -> ConsensusMetrics {
    let n = t.state_dim;
    let deviation: Vec<f64> = t
        .states
        .iter()
        .map(|s| max_pairwise_deviation(s, n))
        .collect();
    let reference_deviation = t.reference.as_ref().map(|refs| {
        t.states
            .iter()
            .zip(refs)
            .map(|(s, r)| {
                s.iter()
                    .enumerate()
                    .map(|(idx, v)| (v - r[idx % n]).abs())
                    .fold(0.0, f64::max)
            })
            .collect()
    });
    let settling_step = match deviation.iter().rposition(|&d| !(d < tol)) {
        None => t.times.first().copied(),
        Some(last_bad) if last_bad + 1 < t.times.len() => Some(t.times[last_bad + 1]),
        Some(_) => None,
    };
    let diverged = deviation.iter().any(|&d| !(d <= DIVERGENCE_THRESHOLD));
    ConsensusMetrics {
        times: t.times.clone(),
        deviation,
        reference_deviation,
        settling_step,
        diverged,
    }
}

/// Dense `I ⊗ A - L̄ ⊗ BK` over `remaining` (1-based) using the random-walk
/// weights, plus the forcing from grounded states `x_g` (0-based by node).
fn grounded_system(
    g: &Graph,
    dyn_: &AgentDynamics,
    k: &Gain,
    remaining: &[usize],
    grounded_state: impl Fn(usize) -> DVector<f64>,
    is_grounded: impl Fn(usize) -> bool,
) -> (DMatrix<f64>, DVector<f64>) {
    let n = dyn_.state_dim();
    let bk = dyn_.b() * k;
    let m = remaining.len();
    let mut pos = vec![usize::MAX; g.node_count()];
    for (p, &v) in remaining.iter().enumerate() {
        pos[v - 1] = p;
    }
    let mut sys = DMatrix::zeros(m * n, m * n);
    let mut forcing = DVector::zeros(m * n);
    for (p, &i) in remaining.iter().enumerate() {
        let w = 1.0 / g.degree(i) as f64;
        sys.view_mut((p * n, p * n), (n, n))
            .copy_from(&(dyn_.a() - &bk));
        for j in g.neighbors(i) {
            if is_grounded(j) {
                let f = &bk * grounded_state(j) * w;
                let mut seg = forcing.rows_mut(p * n, n);
                seg += f;
            } else {
                let mut blk = sys.view_mut((p * n, pos[j - 1] * n), (n, n));
                blk += &bk * w;
            }
        }
    }
    (sys, forcing)
}

/// Limit of the stacked state under a grounding event, if the grounded
/// closed loop is Schur.
///
/// `FixState` needs an explicit `c_bar`. For `Takeover` every node tends to
/// `c0 = (I - (A - B K1))^{-1} B c1`. For `CutInput` the limit is zero when
/// `Ā` is Schur and does not exist otherwise.
pub fn steady_state(
    g: &Graph,
    dyn_: &AgentDynamics,
    k: &Gain,
    event: &GroundingEvent,
) -> Result<Vec<f64>> {
    let n = dyn_.state_dim();
    let spectrum = grounded_laplacian(g, &event.nodes)?;
    let radius = closed_loop_radius(dyn_, k, &spectrum.eigenvalues, false);
    if radius >= 1.0 {
        return Err(Error::NoSteadyState(format!(
            "grounded closed loop has spectral radius {radius}"
        )));
    }
    let grounded = spectrum.grounded.clone();
    let is_grounded = |v: usize| grounded.binary_search(&v).is_ok();
    let mut out = vec![0.0; g.node_count() * n];
    match &event.form {
        GroundingForm::FixState { c_bar } => {
            let c = vector(
                c_bar.as_ref().ok_or_else(|| {
                    Error::Parameter("steady state of FixState needs an explicit c_bar".into())
                })?,
                n,
                "c_bar",
            )?;
            let (sys, forcing) =
                grounded_system(g, dyn_, k, &spectrum.remaining, |_| c.clone(), is_grounded);
            let lhs = DMatrix::identity(sys.nrows(), sys.ncols()) - sys;
            let sol = lhs
                .lu()
                .solve(&forcing)
                .ok_or_else(|| Error::NoSteadyState("I - M is singular".into()))?;
            for (p, &v) in spectrum.remaining.iter().enumerate() {
                out[(v - 1) * n..v * n].copy_from_slice(sol.rows(p * n, n).as_slice());
            }
            for &v in &grounded {
                out[(v - 1) * n..v * n].copy_from_slice(c.as_slice());
            }
        }
        GroundingForm::Takeover { k1, c1 } => {
            let k1 = takeover_gain(dyn_, k1)?;
            let lhs = DMatrix::identity(n, n) - dyn_.closed_loop(1.0, &k1);
            let c0 = lhs
                .lu()
                .solve(&(dyn_.b() * *c1))
                .ok_or_else(|| Error::NoSteadyState("I - (A - B K1) is singular".into()))?;
            for v in g.nodes() {
                out[(v - 1) * n..v * n].copy_from_slice(c0.as_slice());
            }
        }
        GroundingForm::CutInput { a_bar } => {
            let abar = match a_bar {
                Some(rows) => square(rows, n, "A_bar")?,
                None => dyn_.a().clone(),
            };
            if !is_schur(&abar) {
                return Err(Error::NoSteadyState(
                    "grounded node runs non-Schur dynamics".into(),
                ));
            }
        }
    }
    Ok(out)
}
