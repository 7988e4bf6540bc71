//! Sample random regular expanders and report their algebraic connectivity.

use grounding::graph::generate_expander;
use grounding::spectral::spectral_summary;

fn main() -> grounding::Result<()> {
    let (d, c_prime) = (6, 0.3);
    for n in [20, 50, 100] {
        let e = generate_expander(n, d, c_prime, 1)?;
        let s = spectral_summary(&e.graph)?;
        println!(
            "N = {n:3}, d = {d}: lambda2 = {:.4}, lambda_N = {:.4}, eigenratio = {:.4}, rejected {} samples",
            e.lambda2, s.lambda_n, s.eigenratio, e.rejections
        );
    }
    Ok(())
}
