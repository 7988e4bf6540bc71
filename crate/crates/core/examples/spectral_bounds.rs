//! Grounding a single node of a large expander lowers its connectivity
//! below the bound, beyond the threshold sizes.

use grounding::graph::generate_expander;
use grounding::spectral::{
    grounded_connectivity_bound, grounded_laplacian, spectral_summary, threshold_sizes,
};

fn main() -> grounding::Result<()> {
    let (d, c_prime) = (6, 0.3);
    let t = threshold_sizes(c_prime, d, d)?;
    println!(
        "threshold sizes: connectivity {:.1}, eigenratio {:.1}",
        t.connectivity, t.eigenratio
    );
    for n in [10, 20, 40, 80] {
        let g = generate_expander(n, d, c_prime, 2)?.graph;
        let s = spectral_summary(&g)?;
        let grounded = grounded_laplacian(&g, &[1])?;
        let bound = grounded_connectivity_bound(n, d, d, 1, Some(g.degree(1)))?;
        println!(
            "N = {n:3}: lambda2 = {:.4}  lambda_bar_1 = {:.4} (bound {bound:.4})  rho = {:.4}  rho_bar = {:.4}",
            s.lambda2,
            grounded.connectivity(),
            s.eigenratio,
            grounded.eigenratio()
        );
    }
    Ok(())
}
