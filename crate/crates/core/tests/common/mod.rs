//! Property checks shared by the property suite and the acceptance run.
#![allow(dead_code)]

use abw_portfolio::divergence::{alpha_bw, BregmanGenerator, DivergenceSpec};
use abw_portfolio::projection::{antitonic, is_non_decreasing, isotonic};
use abw_portfolio::solver::{solve, Problem, ProblemSpec, Regime};
use abw_portfolio::QuantileGrid;
use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};

pub const CASES: u32 = 500;

type Check = std::result::Result<(), TestCaseError>;

fn sse(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum()
}

/// Best fit over all splits into consecutive blocks with non-decreasing
/// block means.
fn brute_isotonic(x: &[f64]) -> f64 {
    let n = x.len();
    let mut best = f64::INFINITY;
    for mask in 0u32..(1 << (n - 1)) {
        let mut fit = Vec::with_capacity(n);
        let mut start = 0;
        for i in 0..n {
            if i == n - 1 || mask & (1 << i) != 0 {
                let block = &x[start..=i];
                let m = block.iter().sum::<f64>() / block.len() as f64;
                fit.extend(std::iter::repeat_n(m, block.len()));
                start = i + 1;
            }
        }
        if is_non_decreasing(&fit) {
            best = best.min(sse(x, &fit));
        }
    }
    best
}

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}

pub fn quantile_vec(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.01f64..50.0, n).prop_map(sorted)
}

fn spec(alpha: f64, p: f64) -> DivergenceSpec {
    DivergenceSpec::new(alpha, 1.0, BregmanGenerator::power(p).unwrap()).unwrap()
}

pub fn values() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-100.0f64..100.0, 1..60)
}

pub fn short_values() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-10.0f64..10.0, 1..=6)
}

pub fn isotonic_idempotent(x: &[f64]) -> Check {
    let once = isotonic(x);
    prop_assert!(is_non_decreasing(&once));
    prop_assert_eq!(isotonic(&once), once);
    Ok(())
}

pub fn isotonic_brute_force(x: &[f64]) -> Check {
    let fit = isotonic(x);
    let best = brute_isotonic(x);
    prop_assert!((sse(x, &fit) - best).abs() <= 1e-9 * (1.0 + best), "{} vs {best}", sse(x, &fit));
    Ok(())
}

pub fn antitonic_mirror(x: &[f64]) -> Check {
    let neg: Vec<f64> = x.iter().map(|v| -v).collect();
    let expected: Vec<f64> = isotonic(&neg).into_iter().map(|v| -v).collect();
    let got = antitonic(x);
    prop_assert_eq!(got.len(), expected.len());
    for (a, b) in got.iter().zip(&expected) {
        prop_assert_eq!(a.to_bits(), b.to_bits());
    }
    Ok(())
}

pub type ConvexInput = (Vec<f64>, Vec<f64>, Vec<f64>, f64, f64, f64);

pub fn convex_input() -> impl Strategy<Value = ConvexInput> {
    (quantile_vec(32), quantile_vec(32), quantile_vec(32), 0.0f64..=1.0, 0.01f64..0.99, 1.2f64..3.0)
}

pub fn convexity((g1, g2, f, t, alpha, p): &ConvexInput) -> Check {
    let s = spec(*alpha, *p);
    let mix: Vec<f64> = g1.iter().zip(g2).map(|(a, b)| t * a + (1.0 - t) * b).collect();
    let d = |g: &[f64]| s.divergence_values(g, f);
    let lhs = d(&mix);
    let rhs = t * d(g1) + (1.0 - t) * d(g2);
    prop_assert!(lhs <= rhs + 1e-10 * (1.0 + rhs.abs()), "{lhs} > {rhs}");
    Ok(())
}

pub type BoundInput = (Vec<f64>, Vec<f64>, f64, f64);

pub fn bound_input() -> impl Strategy<Value = BoundInput> {
    (quantile_vec(32), quantile_vec(32), 0.01f64..0.99, 1.2f64..3.0)
}

pub fn ordering_bound((g, f, alpha, p): &BoundInput) -> Check {
    let s = spec(*alpha, *p);
    let gen = BregmanGenerator::power(*p).unwrap();
    let bw: f64 = g.iter().zip(f).map(|(&a, &b)| gen.bregman(a, b).unwrap()).sum::<f64>() / g.len() as f64;
    let d = s.divergence_values(g, f);
    prop_assert!(d >= 0.0);
    prop_assert!(d <= alpha.max(1.0 - alpha) * bw * (1.0 + 1e-12));
    Ok(())
}

pub type StepInput = (Vec<f64>, Vec<f64>, usize, f64, f64);

pub fn step_input() -> impl Strategy<Value = StepInput> {
    (quantile_vec(5), quantile_vec(5), 1usize..40, 0.01f64..0.99, 1.2f64..3.0)
}

pub fn step_functions((a, b, m, alpha, p): &StepInput) -> Check {
    let s = spec(*alpha, *p);
    let gen = BregmanGenerator::power(*p).unwrap();
    let expand = |v: &[f64]| QuantileGrid::new(v.iter().flat_map(|&x| std::iter::repeat_n(x, *m)).collect()).unwrap();
    let got = alpha_bw(&s, &expand(a), &expand(b)).unwrap();
    let exact: f64 = a
        .iter()
        .zip(b)
        .map(|(&x, &y)| {
            let w = if x <= y { 1.0 - alpha } else { *alpha };
            w * gen.bregman(x, y).unwrap() / 5.0
        })
        .sum();
    prop_assert!((got - exact).abs() <= 1e-12 * exact.max(1.0), "{got} vs {exact}");
    Ok(())
}

pub type SolverInput = (f64, f64, f64, f64, f64);

pub fn solver_input() -> impl Strategy<Value = SolverInput> {
    (1.5f64..2.5, 0.05f64..0.95, 0.0f64..0.9, 0.9f64..2.5, -3.0f64..4.0)
}

pub fn solver_admissible(&(p, alpha, c, x0, log_eps): &SolverInput) -> Check {
    let spec = ProblemSpec::illustration(p, alpha)
        .unwrap()
        .with_grid(256)
        .with_proportion(c)
        .with_budget(x0)
        .with_epsilon(10f64.powf(log_eps));
    let r = solve(&spec).map_err(|e| TestCaseError::fail(e.to_string()))?;
    if r.regime == Regime::Infeasible {
        prop_assert!(r.quantile.is_none());
        prop_assert!(spec.divergence.epsilon < r.diagnostics.eps_min.unwrap());
        return Ok(());
    }
    let q = r.quantile.as_ref().unwrap();
    let a = r.achieved.unwrap();
    prop_assert!(is_non_decreasing(q.values()));
    let problem = Problem::new(&spec).unwrap();
    for (g, f) in q.values().iter().zip(&problem.floor) {
        prop_assert!(*g >= *f, "{g} below floor {f}");
    }
    let tol = 1e-4;
    let eps = spec.divergence.epsilon;
    prop_assert!(a.cost <= x0 * (1.0 + tol), "cost {} > {x0}", a.cost);
    prop_assert!(a.abw <= eps * (1.0 + tol), "abw {} > {eps}", a.abw);
    let cost_binds = (a.cost - x0).abs() <= tol * x0;
    let abw_binds = (a.abw - eps).abs() <= tol * eps;
    prop_assert!(cost_binds || abw_binds, "{:?}: cost {} abw {}", r.regime, a.cost, a.abw);
    Ok(())
}

/// Runs one property for [`CASES`] random inputs outside the test harness.
pub fn run_property<S: Strategy>(strategy: S, check: impl Fn(&S::Value) -> Check) -> Result<(), String>
where
    S::Value: std::fmt::Debug,
{
    let config = Config {
        cases: CASES,
        failure_persistence: None,
        ..Config::default()
    };
    let mut runner = TestRunner::new(config);
    runner.run(&strategy, |v| check(&v)).map_err(|e| e.to_string())
}
