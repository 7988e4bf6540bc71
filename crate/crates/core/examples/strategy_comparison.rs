//! Extra grounded nodes each strategy needs to regain the ungrounded
//! algebraic connectivity, averaged over seeds.

use grounding::countermeasure::{
    strategy_comparison, ComparisonConfig, ComparisonTarget, Strategy,
};

fn main() -> grounding::Result<()> {
    let cfg = ComparisonConfig {
        n: 50,
        d: 6,
        c_prime: 0.3,
        seeds: (0..5).collect(),
        strategies: vec![
            Strategy::Best,
            Strategy::Algorithm2,
            Strategy::Random,
            Strategy::Worst,
        ],
        target: ComparisonTarget::RecoverLambda2,
        initial_grounded: vec![1],
    };
    let table = strategy_comparison(&cfg)?;
    for s in &table.summary {
        println!(
            "{:10} mean extra nodes {:6.2}  grounded {:5.1}%  unreachable {}",
            s.strategy.name(),
            s.mean_nodes_needed,
            s.mean_percentage,
            s.unreachable
        );
    }
    table.write_csv(std::io::stdout())?;
    Ok(())
}
