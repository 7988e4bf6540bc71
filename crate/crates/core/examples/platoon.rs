//! Disturbance rejection in a platoon with and without a grounded leader.

use grounding::control::{design_gain, AgentDynamics, MareOptions};
use grounding::experiment::{disturbance_run, farthest_node};
use grounding::graph::generate_expander;
use grounding::sim::{Disturbance, GroundingEvent, GroundingForm};

fn main() -> grounding::Result<()> {
    let dyn_ = AgentDynamics::double_integrator();
    let k = design_gain(
        &dyn_,
        0.3,
        1.0,
        Some(0.8),
        Some(0.85),
        &MareOptions::default(),
    )?
    .k;
    let leader = GroundingEvent {
        time: 0,
        nodes: vec![1],
        form: GroundingForm::Takeover {
            k1: k.iter().copied().collect(),
            c1: 1.0,
        },
    };
    for n in [20, 100] {
        let g = generate_expander(n, 6, 0.3, 0)?.graph;
        let pulse = Disturbance {
            node: farthest_node(&g, 1),
            start: 10,
            end: 20,
            offset: 0.1,
        };
        for (label, grounding) in [("no leader", None), ("leader", Some(&leader))] {
            let (_, m) = disturbance_run(&g, &dyn_, &k, grounding, &pulse, 3000, 1, 1e-3)?;
            println!(
                "N = {n:3}, {label:9}: peak deviation {:.4}, settled at {:?}",
                m.peak(),
                m.settling_step
            );
        }
    }
    Ok(())
}
