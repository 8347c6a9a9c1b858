//! With unlimited wealth the optimum only sees the divergence constraint;
//! its cost is the wealth threshold x₀^∞ above which the budget is slack.

use abw_portfolio::solver::{solve_divergence_only, Problem, ProblemSpec};

fn main() -> abw_portfolio::Result<()> {
    for p in [1.6, 2.0, 2.4] {
        for alpha in [0.1, 0.5, 0.9] {
            let problem = Problem::new(&ProblemSpec::illustration(p, alpha)?.with_grid(20_000))?;
            let r = solve_divergence_only(&problem)?;
            let a = r.achieved.unwrap();
            println!(
                "p = {p:<4} α = {alpha:<4} η₂ = {:>8.5}  divergence = {:.6}  x₀^∞ = {:.4}  E[U] = {:.4}",
                r.multipliers.as_pair(r.regime).1,
                a.abw,
                a.cost,
                a.expected_utility
            );
        }
    }
    Ok(())
}
