//! Integrand of the α-BW divergence between the benchmark and a modified
//! benchmark 0.1 away from it, for several generators and asymmetry levels.
//! Writes `figure1.csv` and one SVG per panel.
//!
//! ```bash
//! cargo run --release --example figure1 -- [output dir]
//! ```

use std::path::PathBuf;

use abw_portfolio::experiment::{figure1_data, write_figure1};
use abw_portfolio::MarketParams;

fn main() -> abw_portfolio::Result<()> {
    let dir = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| "out/figure1".into());
    let data = figure1_data(&MarketParams::illustration(), 1000)?;
    let at = |u: f64| ((u * data.u.len() as f64) as usize).min(data.u.len() - 1);
    println!("{:>6} {:>6} {:>12} {:>12} {:>12}", "p", "alpha", "u=0.1", "u=0.5", "u=0.9");
    for c in &data.curves {
        println!(
            "{:>6} {:>6} {:>12.6} {:>12.6} {:>12.6}",
            c.p,
            c.alpha,
            c.values[at(0.1)],
            c.values[at(0.5)],
            c.values[at(0.9)]
        );
    }
    for path in write_figure1(&data, &dir)? {
        println!("wrote {}", path.display());
    }
    Ok(())
}
