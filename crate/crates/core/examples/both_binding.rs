//! Both constraints binding: searches the multiplier pair (η₁, η₂) and
//! reports the search diagnostics.

use std::time::Instant;

use abw_portfolio::solver::{solve, ProblemSpec};

fn main() -> abw_portfolio::Result<()> {
    let p: f64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(2.0);
    let alpha: f64 = std::env::args().nth(2).and_then(|s| s.parse().ok()).unwrap_or(0.25);
    let spec = ProblemSpec::illustration(p, alpha)?;
    let t = Instant::now();
    let r = solve(&spec)?;
    println!("regime {} in {:.2?}", r.regime, t.elapsed());
    println!("multipliers {:?}", r.multipliers);
    if let Some(a) = r.achieved {
        println!("cost {:.8}  divergence {:.8}  E[U] {:.6}", a.cost, a.abw, a.expected_utility);
    }
    let d = &r.diagnostics;
    println!("ε^∞ = {:?}, x₀^∞ = {:?}", d.eps_infty, d.x0_infty);
    println!("η₁ range {:?}, η₂ range {:?}", d.eta1_range, d.eta2_range);
    println!("sign changes of k − ℓ: {:?}", d.sign_changes);
    println!("{} constraint evaluations", d.evaluations);
    for n in &d.notes {
        println!("note: {n}");
    }
    Ok(())
}
