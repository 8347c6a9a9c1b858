//! When the divergence constraint is slack the optimum only sees the budget:
//! `c F̆_Y + (U')⁻¹(λ ξ)`. The CRRA case has a closed form to compare with.

use abw_portfolio::solver::{solve_budget_only, Problem, ProblemSpec};

fn main() -> abw_portfolio::Result<()> {
    let spec = ProblemSpec::illustration(2.0, 0.25)?;
    let problem = Problem::new(&spec)?;
    let r = solve_budget_only(&problem)?;
    let a = r.achieved.unwrap();
    let lambda = r.multipliers.as_pair(r.regime).0;

    // γ = ½: E[ξ⁻¹] λ⁻² = x0 − c y0, E[U] = 2 E[ξ⁻¹] / λ.
    let m = abw_portfolio::MarketParams::illustration();
    let k = (m.gamma - m.total_rate) / m.psi;
    let e_inv_xi = (m.total_rate + k * k).exp();
    let lambda_exact = (e_inv_xi / (spec.budget - spec.proportion * m.initial_wealth)).sqrt();
    println!("λ = {lambda:.6} (closed form {lambda_exact:.6})");
    println!("E[U] = {:.6} (closed form {:.6})", a.expected_utility, 2.0 * e_inv_xi / lambda_exact);
    println!("cost = {:.6}, divergence from the benchmark = {:.4}", a.cost, a.abw);
    println!("this divergence is ε^∞: any tolerance above it leaves the constraint slack");
    Ok(())
}
