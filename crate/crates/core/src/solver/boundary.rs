//! One-constraint solutions and the minimal tolerance.

use std::cell::Cell;

use super::roots::positive_root;
use super::{Diagnostics, Multipliers, Problem, Regime, SolveResult};
use crate::error::{AbwError, Result};
use crate::grid::QuantileGrid;
use crate::projection::isotonic;

#[derive(Debug, Clone)]
pub struct MinimalTolerance {
    pub eps_min: f64,
    /// Closest affordable quantile to the benchmark.
    pub g_min: QuantileGrid,
    /// Budget multiplier; zero when the benchmark itself is affordable.
    pub lambda_min: f64,
}

impl Problem {
    /// `max(c F̆_Y, (φ')⁻¹([φ'(F̆_Y) − λ/(1−α) · ξ]↑))`.
    ///
    /// Pointwise the divergence plus `λ ξ g` is convex in `g`, so clamping
    /// its unconstrained minimiser at the floor `c F̆_Y` minimises it over
    /// admissible values; the maximum of two non-decreasing functions stays
    /// non-decreasing.
    pub fn minimal_tolerance_candidate(&self, lambda: f64) -> Vec<f64> {
        let w = lambda / (1.0 - self.divergence.alpha);
        let inner: Vec<f64> = self
            .grad_benchmark
            .iter()
            .zip(&self.market.xi)
            .map(|(g, x)| g - w * x)
            .collect();
        let gen = self.generator();
        isotonic(&inner)
            .into_iter()
            .zip(&self.floor)
            .map(|(y, &f)| gen.grad_inverse(y).max(f))
            .collect()
    }

    /// Divergence-only candidate `Ğ^(α)_{(0, λ)}`.
    pub fn divergence_candidate(&self, lambda: f64) -> Vec<f64> {
        self.candidate(0.0, lambda, self.divergence.alpha)
    }
}

/// Smallest tolerance for which some affordable quantile exists.
///
/// Zero (with `Ğ_min = F̆_Y`) when the benchmark fits the budget; otherwise
/// the divergence of `Ğ_min` from the benchmark, with `λ_min` chosen so that
/// `Ğ_min` exhausts the budget. Quantiles must stay above `c F̆_Y`; when
/// the budget only just covers that floor, `Ğ_min = c F̆_Y`.
pub fn eps_min(problem: &Problem) -> Result<MinimalTolerance> {
    let x0 = problem.budget;
    let y0 = problem.benchmark_cost();
    let tol = problem.tolerances.constraint_tol;
    if y0 <= x0 * (1.0 + tol) {
        return Ok(MinimalTolerance {
            eps_min: 0.0,
            g_min: QuantileGrid::from_nearly_monotone(problem.benchmark().to_vec()),
            lambda_min: 0.0,
        });
    }
    if problem.proportion > 0.0 && problem.proportion * y0 >= x0 * (1.0 - tol) {
        if problem.proportion * y0 > x0 * (1.0 + tol) {
            return Err(AbwError::Infeasible(format!(
                "budget {x0} is below the floor cost {}",
                problem.proportion * y0
            )));
        }
        let g = problem.floor.clone();
        return Ok(MinimalTolerance {
            eps_min: problem.abw(&g),
            g_min: QuantileGrid::from_nearly_monotone(g),
            lambda_min: f64::INFINITY,
        });
    }
    let root = positive_root(
        |l| problem.cost(&problem.minimal_tolerance_candidate(l)) - x0,
        1.0,
        true,
        problem.tolerances.root_options(x0),
        "minimal-tolerance multiplier",
    )?;
    let g = problem.minimal_tolerance_candidate(root.x);
    Ok(MinimalTolerance {
        eps_min: problem.abw(&g),
        g_min: QuantileGrid::from_nearly_monotone(g),
        lambda_min: root.x,
    })
}

/// Optimum without the divergence constraint:
/// `Ğ^c = (U')⁻¹(λ^c ξ↓) + c F̆_Y`, with `λ^c` making the budget bind.
/// Reports `ε^∞ = BW^α(Ğ^c, F̆_Y)`.
pub fn solve_budget_only(problem: &Problem) -> Result<SolveResult> {
    let x0 = problem.budget;
    let y0 = problem.benchmark_cost();
    let c = problem.proportion;
    let tol = problem.tolerances.constraint_tol;
    if c * y0 > x0 * (1.0 + tol) {
        return Err(AbwError::Infeasible(format!(
            "c·y0 = {} exceeds the budget {x0}",
            c * y0
        )));
    }
    let evals = Cell::new(0usize);
    let mut diag = Diagnostics {
        benchmark_cost: y0,
        ..Default::default()
    };
    let (values, lambda) = if (x0 - c * y0).abs() <= tol * x0 {
        diag.notes.push("budget equals c·y0; the floor c·F is the only affordable choice".into());
        (problem.floor.clone(), f64::INFINITY)
    } else {
        let root = positive_root(
            |l| {
                evals.set(evals.get() + 1);
                problem.cost(&problem.budget_candidate(l)) - x0
            },
            1.0,
            true,
            problem.tolerances.root_options(x0),
            "budget multiplier",
        )?;
        diag.iterations = root.iterations;
        (problem.budget_candidate(root.x), root.x)
    };
    diag.evaluations = evals.get();
    diag.projection_used = !problem.market.xi_non_increasing;
    diag.eps_infty = Some(problem.abw(&values));
    diag.lambda_c = Some(lambda);
    Ok(SolveResult::feasible(
        problem,
        values,
        Regime::BudgetOnly,
        Multipliers::Scalar(lambda),
        diag,
    ))
}

/// Optimum without the budget constraint: node-wise root of
/// `−U'(x − c F̆_Y) + λ α φ'(x) = λ α φ'(F̆_Y)`, with `λ^BW` making the
/// divergence bind. Reports `x₀^∞ = cost(Ğ^BW)`.
pub fn solve_divergence_only(problem: &Problem) -> Result<SolveResult> {
    let eps = problem.divergence.epsilon;
    let evals = Cell::new(0usize);
    let mut diag = Diagnostics {
        benchmark_cost: problem.benchmark_cost(),
        ..Default::default()
    };
    let (values, lambda) = if eps == 0.0 {
        diag.notes.push("zero tolerance; the benchmark is the only admissible quantile".into());
        (problem.benchmark().to_vec(), f64::INFINITY)
    } else {
        let root = positive_root(
            |l| {
                evals.set(evals.get() + 1);
                problem.abw(&problem.divergence_candidate(l)) - eps
            },
            1.0,
            true,
            problem.tolerances.root_options(eps),
            "divergence multiplier",
        )?;
        diag.iterations = root.iterations;
        (problem.divergence_candidate(root.x), root.x)
    };
    diag.evaluations = evals.get();
    diag.x0_infty = Some(problem.cost(&values));
    diag.lambda_bw = Some(lambda);
    Ok(SolveResult::feasible(
        problem,
        values,
        Regime::DivergenceOnly,
        Multipliers::Scalar(lambda),
        diag,
    ))
}
