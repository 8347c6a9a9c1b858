//! Summary statistics of optimal terminal wealth for a sweep of generators
//! and asymmetry levels, via the experiment runner.
//!
//! ```bash
//! cargo run --release --example table3 -- [grid size]
//! ```

use abw_portfolio::experiment::{run, RunConfig, RunOptions};

fn main() -> abw_portfolio::Result<()> {
    let n: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(100_000);
    let cfg = RunConfig::from_toml(include_str!("configs/table3.toml"))?;
    let dir = std::env::temp_dir().join("abw-table3");
    let report = run(
        &cfg,
        &RunOptions {
            out_dir: Some(dir.clone()),
            grid: Some(n),
            verbose: false,
        },
    )?;
    println!(
        "{:>5} {:>5} {:>8} {:>8} {:>8} {:>8} {:>8} {:>8}",
        "p", "α", "GLR", "mean", "std", "VaR", "ES", "UTE"
    );
    for o in &report.outcomes {
        let s = o.stats.as_ref().expect("solved");
        let (p, a) = match o.case.solution.as_str() {
            "benchmark" => ("F̆_Y".to_string(), String::new()),
            _ => (o.case.bregman_exponent.to_string(), o.case.alpha.to_string()),
        };
        println!(
            "{p:>5} {a:>5} {:>8.3} {:>8.3} {:>8.3} {:>8.3} {:>8.3} {:>8.3}",
            s.glr, s.mean, s.std_dev, s.var, s.es, s.ute
        );
    }
    println!("artifacts in {}", dir.display());
    Ok(())
}
