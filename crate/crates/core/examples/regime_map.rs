//! Which constraints bind across a grid of tolerances and budgets. The
//! floor proportion is lowered to c = 0.5 so that budgets below the
//! benchmark cost remain affordable and the minimal tolerance matters.

use abw_portfolio::solver::{solve, ProblemSpec, Regime};

fn main() -> abw_portfolio::Result<()> {
    let base = ProblemSpec::illustration(2.0, 0.25)?.with_grid(20_000).with_proportion(0.5);
    let budgets = [0.8, 0.95, 1.0, 1.3, 2.0];
    let epsilons = [0.01, 0.1, 1.0, 10.0, 1e3, 1e6];
    print!("{:>8}", "ε \\ x₀");
    for b in budgets {
        print!("{b:>17}");
    }
    println!();
    for e in epsilons {
        print!("{e:>8}");
        for b in budgets {
            let spec = base.clone().with_budget(b).with_epsilon(e);
            let r = solve(&spec)?;
            let tag = match r.regime {
                Regime::Infeasible => match r.diagnostics.eps_min {
                    Some(m) => format!("infeasible<{m:.3}"),
                    None => "over budget".into(),
                },
                reg => reg.to_string(),
            };
            print!("{tag:>17}");
        }
        println!();
    }
    Ok(())
}
