//! The lognormal benchmark of a constant-mix strategy: quantiles, pricing
//! weight and the discretised aggregates, for a single-asset market and for
//! a two-period, two-asset market aggregated into one lognormal law.

use abw_portfolio::market::{MarketInterval, MarketModel, PiecewiseMarket};
use abw_portfolio::{MarketParams, UGrid};

fn describe(name: &str, m: &MarketParams) -> abw_portfolio::Result<()> {
    println!("{name}: Γ = {:.4}, Ψ = {:.4}, R = {:.4}", m.gamma, m.psi, m.total_rate);
    for u in [0.01, 0.05, 0.5, 0.95, 0.99] {
        println!("  u = {u:<5} F̆_Y = {:>9.4}  ξ = {:>8.4}", m.benchmark_quantile(u)?, m.xi(u)?);
    }
    let grid = UGrid::new(100_000)?;
    let mg = MarketModel::from(*m).discretize(&grid)?;
    println!(
        "  E[Y] = {:.5} (exact {:.5}), y0 = {:.6}, ∫ξ = {:.8} (exact {:.8})\n",
        mg.benchmark_mean,
        m.benchmark_mean(),
        mg.benchmark_cost,
        grid.integrate(&mg.xi),
        (-m.total_rate).exp()
    );
    Ok(())
}

fn main() -> abw_portfolio::Result<()> {
    describe("single asset", &MarketParams::illustration())?;

    let interval = |rate: f64, drift: [f64; 2], vol: [f64; 2]| MarketInterval {
        drift: drift.to_vec(),
        vol: vol.to_vec(),
        correlation: vec![vec![1.0, 0.3], vec![0.3, 1.0]],
        weights: vec![0.6, 0.4],
        rate,
    };
    let pw = PiecewiseMarket {
        breakpoints: vec![0.0, 0.5, 1.0],
        intervals: vec![interval(0.8, [2.5, 1.5], [0.9, 0.6]), interval(1.2, [3.0, 2.0], [0.7, 0.5])],
        initial_wealth: 1.0,
    };
    describe("piecewise two-asset", &pw.aggregate()?)
}
