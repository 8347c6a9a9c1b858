//! Behaviour of the individual solvers, the dispatcher and the structural
//! invariants of the optimal quantile.

use abw_portfolio::projection::is_non_decreasing;
use abw_portfolio::solver::{
    eps_min, solve, solve_both_binding, solve_budget_only, solve_divergence_only, Multipliers, Problem, ProblemSpec,
    Regime,
};

const N: usize = 20_000;

fn spec(p: f64, alpha: f64) -> ProblemSpec {
    ProblemSpec::illustration(p, alpha).unwrap().with_grid(N)
}

fn rel_l2(a: &[f64], b: &[f64]) -> f64 {
    let d: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum();
    let n: f64 = b.iter().map(|y| y * y).sum();
    (d / n).sqrt()
}

#[test]
fn minimal_tolerance_is_zero_when_benchmark_is_affordable() {
    let problem = Problem::new(&spec(2.0, 0.25)).unwrap();
    let m = eps_min(&problem).unwrap();
    // the midpoint benchmark cost exceeds X₀ by the quadrature error only
    assert!(m.eps_min < 1e-8, "{}", m.eps_min);
    let exact = Problem::new(&spec(2.0, 0.25).with_budget(problem.benchmark_cost())).unwrap();
    let m = eps_min(&exact).unwrap();
    assert_eq!(m.eps_min, 0.0);
    assert_eq!(m.g_min.values(), exact.benchmark());
}

#[test]
fn minimal_tolerance_below_benchmark_cost() {
    let s = spec(2.0, 0.25).with_budget(0.8).with_proportion(0.5);
    let problem = Problem::new(&s).unwrap();
    let m = eps_min(&problem).unwrap();
    assert!(m.eps_min > 0.0);
    assert!(m.g_min.values().iter().zip(problem.benchmark()).all(|(g, f)| g <= f));
    assert!((problem.cost(m.g_min.values()) - 0.8).abs() < 1e-6);
    let costs: Vec<f64> = [0.1, 0.3, 1.0, 3.0, 10.0]
        .iter()
        .map(|&l| problem.cost(&problem.minimal_tolerance_candidate(l)))
        .collect();
    assert!(costs.windows(2).all(|w| w[1] < w[0]), "{costs:?}");
}

#[test]
fn minimal_tolerance_respects_the_floor() {
    let s = spec(2.0, 0.25).with_budget(0.8).with_proportion(0.5);
    let problem = Problem::new(&s).unwrap();
    let m = eps_min(&problem).unwrap();
    assert!(m.g_min.values().iter().zip(&problem.floor).all(|(g, f)| g >= f));
    // just above the minimal tolerance the full problem is solvable
    let r = solve(&s.clone().with_epsilon(m.eps_min * 1.05)).unwrap();
    assert_eq!(r.regime, Regime::BothBinding);
    let r = solve(&s.with_epsilon(m.eps_min * 0.5)).unwrap();
    assert_eq!(r.regime, Regime::Infeasible);
}

#[test]
fn budget_only_at_floor_cost_returns_floor() {
    let y0 = Problem::new(&spec(2.0, 0.25)).unwrap().benchmark_cost();
    let s = spec(2.0, 0.25).with_budget(0.9 * y0);
    let problem = Problem::new(&s).unwrap();
    let r = solve_budget_only(&problem).unwrap();
    let g = r.values().unwrap();
    for (a, b) in g.iter().zip(&problem.floor) {
        assert!((a - b).abs() <= 1e-9 * b.max(1.0), "{a} vs {b}");
    }
}

#[test]
fn budget_only_rejects_unaffordable_floor() {
    let problem = Problem::new(&spec(2.0, 0.25).with_budget(0.5)).unwrap();
    assert!(solve_budget_only(&problem).is_err());
    let r = solve(&spec(2.0, 0.25).with_budget(0.5)).unwrap();
    assert_eq!(r.regime, Regime::Infeasible);
}

#[test]
fn divergence_only_dominates_benchmark() {
    let problem = Problem::new(&spec(2.0, 0.25)).unwrap();
    let r = solve_divergence_only(&problem).unwrap();
    let a = r.achieved.unwrap();
    assert!((a.abw - 0.5).abs() < 1e-6);
    assert!(r.values().unwrap().iter().zip(problem.benchmark()).all(|(g, f)| g >= f));
}

#[test]
fn divergence_candidate_approaches_benchmark_for_large_multiplier() {
    let problem = Problem::new(&spec(2.0, 0.25)).unwrap();
    let g = problem.divergence_candidate(1e8);
    let f = problem.benchmark();
    let sup = g.iter().zip(f).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let scale = f.iter().cloned().fold(0.0, f64::max);
    assert!(sup / scale < 1e-2, "{}", sup / scale);
}

#[test]
fn candidate_limits() {
    let problem = Problem::new(&spec(2.0, 0.25)).unwrap();
    let a = problem.divergence.alpha;
    let with_zero = problem.candidate(0.0, 0.7, a);
    let div = problem.divergence_candidate(0.7);
    assert!(with_zero.iter().zip(&div).all(|(x, y)| (x - y).abs() <= 1e-8 * y.max(1.0)));

    // far in the upper tail the budget candidate grows without bound and
    // any positive η₂ still matters there, so compare on u ≤ 0.99
    let small = problem.candidate(3.0, 1e-10, a);
    let budget = problem.budget_candidate(3.0);
    let body = (0.99 * N as f64) as usize;
    let worst = small[..body]
        .iter()
        .zip(&budget)
        .map(|(x, y)| (x - y).abs() / y.max(1.0))
        .fold(0.0, f64::max);
    assert!(worst < 1e-4, "{worst}");

    for beta in [0.1, 0.5, 0.9] {
        let g = problem.candidate(2.0, 0.5, beta);
        assert!(is_non_decreasing(&g));
        assert!(g.iter().zip(&problem.floor).all(|(x, f)| x >= f));
    }
}

#[test]
fn symmetric_alpha_uses_a_single_branch() {
    let problem = Problem::new(&spec(2.0, 0.5)).unwrap();
    let (g, used) = problem.assemble_with_branches(4.0, 0.3);
    assert!(used.iter().all(|&u| u));
    assert_eq!(g, problem.candidate(4.0, 0.3, 0.5));
}

#[test]
fn dual_maps_are_monotone() {
    let problem = Problem::new(&spec(2.0, 0.25)).unwrap();
    let costs: Vec<f64> = [2.0, 4.0, 6.0, 8.0, 10.0].iter().map(|&e1| problem.evaluate_eta(e1, 0.2).cost).collect();
    assert!(costs.windows(2).all(|w| w[1] < w[0]), "{costs:?}");
    let abws: Vec<f64> = [0.05, 0.1, 0.2, 0.4, 0.8].iter().map(|&e2| problem.evaluate_eta(6.0, e2).abw).collect();
    assert!(abws.windows(2).all(|w| w[1] < w[0]), "{abws:?}");
}

#[test]
fn both_binding_solution_uses_consistent_branches() {
    let s = spec(2.0, 0.25);
    let r = solve_both_binding(&s).unwrap();
    assert_eq!(r.regime, Regime::BothBinding);
    let Multipliers::Pair { eta1, eta2 } = r.multipliers else { panic!("{:?}", r.multipliers) };
    let problem = Problem::new(&s).unwrap();
    let (g, used_alpha) = problem.assemble_with_branches(eta1, eta2);
    for ((x, f), a) in g.iter().zip(problem.benchmark()).zip(&used_alpha) {
        if x > f {
            assert!(*a);
        } else if x < f {
            assert!(!*a);
        }
    }
    let a = r.achieved.unwrap();
    assert!((a.cost - 1.0).abs() < 1e-4 && (a.abw - 0.5).abs() < 0.5e-4);
}

#[test]
fn both_binding_utility_lies_between_benchmark_and_relaxations() {
    let s = spec(2.0, 0.25);
    let problem = Problem::new(&s).unwrap();
    let both = solve_both_binding(&s).unwrap().achieved.unwrap().expected_utility;
    let budget = solve_budget_only(&problem).unwrap().achieved.unwrap().expected_utility;
    let div = solve_divergence_only(&problem).unwrap().achieved.unwrap().expected_utility;
    let bench = problem.expected_utility(problem.benchmark());
    assert!(both <= budget.min(div), "{both} {budget} {div}");
    assert!(both >= bench, "{both} {bench}");
}

#[test]
fn full_proportion_stays_above_benchmark() {
    let s = spec(2.0, 0.3).with_proportion(1.0).with_budget(1.2).with_epsilon(0.2);
    let r = solve(&s).unwrap();
    assert_ne!(r.regime, Regime::Infeasible);
    let problem = Problem::new(&s).unwrap();
    let g = r.values().unwrap();
    assert!(g.iter().zip(problem.benchmark()).all(|(x, f)| x >= f));
    let half = abw_portfolio::divergence::DivergenceSpec::new(0.5, 0.2, problem.divergence.generator.clone()).unwrap();
    let d = problem.divergence.divergence_values(g, problem.benchmark());
    let d_half = half.divergence_values(g, problem.benchmark());
    assert!((d - 2.0 * 0.3 * d_half).abs() <= 1e-8 * d.max(1e-300), "{d} vs {d_half}");
}

#[test]
fn dispatch_to_boundary_regimes() {
    let r = solve(&spec(2.0, 0.25).with_epsilon(1e6)).unwrap();
    assert_eq!(r.regime, Regime::BudgetOnly);
    let r = solve(&spec(2.0, 0.25).with_budget(1e6)).unwrap();
    assert_eq!(r.regime, Regime::DivergenceOnly);
    let r = solve(&spec(2.0, 0.25)).unwrap();
    assert_eq!(r.regime, Regime::BothBinding);
}

#[test]
fn converges_to_budget_only_near_its_threshold() {
    let s = spec(2.0, 0.25);
    let problem = Problem::new(&s).unwrap();
    let budget = solve_budget_only(&problem).unwrap();
    let eps_inf = budget.diagnostics.eps_infty.unwrap();
    let r = solve_both_binding(&s.with_epsilon(0.99 * eps_inf)).unwrap();
    let d = rel_l2(r.values().unwrap(), budget.values().unwrap());
    assert!(d < 0.05, "{d}");
}

#[test]
fn budget_below_benchmark_cost_is_solved() {
    let s = spec(2.0, 0.25).with_budget(0.95).with_epsilon(0.05);
    let r = solve(&s).unwrap();
    assert_eq!(r.regime, Regime::BothBinding);
    let a = r.achieved.unwrap();
    assert!((a.cost - 0.95).abs() < 1e-4 && (a.abw - 0.05).abs() < 1e-5, "{a:?}");
}

#[test]
fn invalid_specs_list_every_problem() {
    let mut s = spec(2.0, 0.25);
    s.budget = 0.0;
    s.proportion = 2.0;
    s.grid_size = 1;
    match s.validate() {
        Err(abw_portfolio::AbwError::InvalidConfig(v)) => assert!(v.len() >= 3, "{v:?}"),
        other => panic!("{other:?}"),
    }
}
