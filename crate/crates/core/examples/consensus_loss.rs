//! Grounding one node of an unstable network breaks consensusability; one
//! extra grounded node and a redesigned gain restore it.

use grounding::control::{
    closed_loop_radius, design_gain, sigma_tilde_of, AgentDynamics, MareOptions,
};
use grounding::countermeasure::{
    exhaustive_best_node, passive_resilience_check, recover_by_grounding, redesign_after_grounding,
    Strategy, Target,
};
use grounding::graph::generate_expander;
use grounding::sim::{
    consensus_metrics, simulate, Event, GainChange, GroundingEvent, GroundingForm, SimOptions,
};
use grounding::spectral::grounded_laplacian;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> grounding::Result<()> {
    let dyn_ = AgentDynamics::from_rows(&[vec![1.07, 1.0], vec![0.0, 1.0]], &[0.0, 1.0])?;
    let opts = MareOptions::default();
    let k = design_gain(&dyn_, 0.3, 1.0, Some(0.8), Some(0.85), &opts)?.k;
    let g = generate_expander(40, 6, 0.3, 4)?.graph;

    let report = passive_resilience_check(&g, &dyn_, &k)?;
    let node = report.worst_node;
    println!(
        "worst node {node}: grounded eigenratio {:.4}, consensusable {}",
        report.worst_eigenratio, report.worst_consensusable
    );

    let target = Target::Consensusable {
        sigma_tilde: sigma_tilde_of(&dyn_),
    };
    let recovery = recover_by_grounding(&g, &[node], target, Strategy::Best, 0)?;
    let mut grounded = vec![node];
    grounded.extend(&recovery.grounded_sequence);
    let spectrum = grounded_laplacian(&g, &grounded)?;
    let k2 = redesign_after_grounding(&g, &grounded, &dyn_, 1.0, &opts)
        .map(|d| d.k)
        .unwrap_or_else(|e| panic!("redesign failed: {e}"));
    println!(
        "extra nodes {:?}, radius with old gain {:.4}, with new gain {:.4}",
        recovery.grounded_sequence,
        closed_loop_radius(&dyn_, &k, &spectrum.eigenvalues, false),
        closed_loop_radius(&dyn_, &k2, &spectrum.eigenvalues, false)
    );
    println!(
        "best single extra node by exhaustive search: {}",
        exhaustive_best_node(&g, &[node])?.node
    );

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let x0: Vec<Vec<f64>> = (0..40)
        .map(|_| vec![rng.random_range(-1.0..1.0), 0.0])
        .collect();
    let takeover = |nodes: Vec<usize>, time| {
        Event::Ground(GroundingEvent {
            time,
            nodes,
            form: GroundingForm::Takeover {
                k1: k.iter().copied().collect(),
                c1: 1.0,
            },
        })
    };
    let events = [
        takeover(vec![node], 40),
        takeover(recovery.grounded_sequence.clone(), 100),
        Event::SetGain(GainChange {
            time: 100,
            k: k2.iter().copied().collect(),
        }),
    ];
    let t = simulate(&g, &dyn_, &k, &x0, 6000, &events, &SimOptions::default())?;
    let m = consensus_metrics(&t, 1e-6);
    println!(
        "deviation at k = 40: {:.3e}, k = 100: {:.3e}, k = 6000: {:.3e}",
        m.deviation[40], m.deviation[100], m.deviation[6000]
    );
    Ok(())
}
