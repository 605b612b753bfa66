//! Topological entropy of transition graphs and the standard-map lower bound.

use ailimit::entropy::{optimize_sigma, standard_map_entropy_bound, tmc_entropy, word_count_entropy};
use ailimit::symbolic::TransitionGraph;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for (name, g) in [
        ("complete(3)", TransitionGraph::complete(3)),
        ("golden mean", TransitionGraph::golden_mean()),
        ("cycle(5)", TransitionGraph::cycle(5)),
    ] {
        let h = tmc_entropy(&g)?;
        let words = word_count_entropy(&g, 12)?;
        println!("{name:>12}: h = {:.6} nats, (1/12) log θ₁₂ = {:.6}", h.entropy, words[11]);
    }

    println!("\n{:>10} {:>8} {:>10} {:>6} {:>10}", "λ", "σ", "Λ*", "q", "h ≥");
    for lambda in [12.0, 20.0, 100.0, 1e4, 1e6] {
        let fixed = standard_map_entropy_bound(lambda, std::f64::consts::FRAC_PI_4)?;
        let best = optimize_sigma(lambda)?;
        for b in [fixed, best] {
            println!("{:>10} {:>8.4} {:>10.3} {:>6} {:>10.4}", b.lambda, b.sigma, b.lambda_star, b.q, b.bound_nats);
        }
    }
    match standard_map_entropy_bound(5.0, std::f64::consts::FRAC_PI_4) {
        Err(e) => println!("\nλ = 5: {e}"),
        Ok(b) => println!("\nλ = 5: {b:?}"),
    }
    Ok(())
}
