//! Graph-independent gain design for a stable and an unstable agent.

use grounding::control::{
    design_gain, interval_radius, min_c_prime, sigma_tilde_of, AgentDynamics, MareOptions,
};

fn main() -> grounding::Result<()> {
    let agents = [
        ("double integrator", AgentDynamics::double_integrator()),
        (
            "unstable",
            AgentDynamics::from_rows(&[vec![1.07, 1.0], vec![0.0, 1.0]], &[0.0, 1.0])?,
        ),
    ];
    for (name, dyn_) in &agents {
        let st = sigma_tilde_of(dyn_);
        let d = design_gain(
            dyn_,
            0.3,
            1.0,
            Some(0.8),
            Some(0.85),
            &MareOptions::default(),
        )?;
        println!(
            "{name}: sigma_tilde = {st:.4}, min c' = {:.4}, K = [{:.4}, {:.4}], MARI margin {:.3e}",
            min_c_prime(st),
            d.k[0],
            d.k[1],
            d.mari_margin
        );
        println!(
            "  worst radius on [0.3, 2] = {:.4}, on [0.1, 0.3] = {:.4}",
            interval_radius(dyn_, &d.k, 0.3, 2.0, 1000),
            interval_radius(dyn_, &d.k, 0.1, 0.3, 1000)
        );
    }
    Ok(())
}
