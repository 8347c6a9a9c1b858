//! Constraint values of the three candidate optima — divergence only,
//! budget only, and both binding — for two power generators.
//!
//! ```bash
//! cargo run --release --example table2 -- [grid size]
//! ```

use std::time::Instant;

use abw_portfolio::solver::{solve_both_binding, solve_budget_only, solve_divergence_only, Problem, ProblemSpec};

fn main() -> abw_portfolio::Result<()> {
    let n: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(100_000);
    for p in [2.0, 1.6] {
        let spec = ProblemSpec::illustration(p, 0.25)?.with_grid(n);
        let problem = Problem::new(&spec)?;
        let t = Instant::now();
        let div = solve_divergence_only(&problem)?;
        let bud = solve_budget_only(&problem)?;
        let both = solve_both_binding(&spec)?;
        let elapsed = t.elapsed();

        println!("p = {p}  (n = {n}, {:.2?})", elapsed);
        println!("{:>12} {:>12} {:>12} {:>12}", "", "divergence", "budget", "both");
        let rows = [&div, &bud, &both].map(|r| r.achieved.unwrap());
        println!("{:>12} {:>12.4} {:>12.4} {:>12.4}", "abw", rows[0].abw, rows[1].abw, rows[2].abw);
        println!("{:>12} {:>12.4} {:>12.4} {:>12.4}", "cost", rows[0].cost, rows[1].cost, rows[2].cost);
        println!(
            "{:>12} {:>12.4} {:>12.4} {:>12.4}",
            "E[U]", rows[0].expected_utility, rows[1].expected_utility, rows[2].expected_utility
        );
        println!("  multipliers: {:?}", both.multipliers);
        println!(
            "  benchmark E[U] = {:.4}\n",
            problem.expected_utility(problem.benchmark())
        );
    }
    Ok(())
}
