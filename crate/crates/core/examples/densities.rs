//! Densities of optimal terminal wealth for several asymmetry levels,
//! next to the benchmark density, plus where each solution crosses it.

use abw_portfolio::analysis::{crossing_point, density_curve};
use abw_portfolio::solver::{solve, ProblemSpec};
use abw_portfolio::MarketParams;

fn main() -> abw_portfolio::Result<()> {
    let m = MarketParams::illustration();
    let xs: Vec<f64> = (1..=8).map(|i| 2.5 * i as f64).collect();
    print!("{:>10}", "x");
    for x in &xs {
        print!("{x:>9.1}");
    }
    println!("{:>10}", "crossing");
    print!("{:>10}", "benchmark");
    for &x in &xs {
        print!("{:>9.4}", m.benchmark_density(x));
    }
    println!();
    for alpha in [0.1, 0.5, 0.9] {
        let spec = ProblemSpec::illustration(2.0, alpha)?.with_grid(50_000);
        let r = solve(&spec)?;
        let q = r.quantile.expect("feasible");
        let bench: Vec<f64> = abw_portfolio::UGrid::new(q.len())?
            .normal_scores()
            .iter()
            .map(|&z| m.benchmark_quantile_at_score(z))
            .collect();
        let d = density_curve(&q, &xs);
        print!("{:>10}", format!("α = {alpha}"));
        for (_, v) in &d.points {
            print!("{v:>9.4}");
        }
        let cross = crossing_point(q.values(), &bench).map(|c| c.1).unwrap_or(f64::NAN);
        println!("{cross:>10.3}");
    }
    Ok(())
}
