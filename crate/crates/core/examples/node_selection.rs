//! Compare exhaustive node selection with the layer-restricted and
//! score-based heuristics on one grounded expander.

use grounding::countermeasure::{
    best_node_layer, exhaustive_best_node, layer_candidates, score_selection,
};
use grounding::graph::generate_expander;
use grounding::spectral::grounded_laplacian;

fn main() -> grounding::Result<()> {
    let g = generate_expander(50, 6, 0.3, 7)?.graph;
    let grounded = [1];
    let best = exhaustive_best_node(&g, &grounded)?;
    let layers = layer_candidates(&g, &grounded)?;
    let (scored, scores) = score_selection(&g, &grounded)?;
    let value = |v: usize| grounded_laplacian(&g, &[1, v]).map(|s| s.connectivity());

    println!(
        "lambda_bar_1 with node 1 grounded: {:.4}",
        grounded_laplacian(&g, &grounded)?.connectivity()
    );
    println!("exhaustive best: node {} -> {:.4}", best.node, best.value);
    println!(
        "score selection: node {scored} -> {:.4} (ell = {})",
        value(scored)?,
        scores.ell
    );
    println!(
        "{} candidates in the two farthest layers",
        layers.nodes.len()
    );
    let loc = best_node_layer(&g, 1)?;
    println!(
        "best node sits in layer {} of {}; in top two: {}",
        loc.best_layer, loc.ell, loc.in_top_two
    );
    Ok(())
}
