//! Optimal quantile functions under a budget and an α-BW divergence
//! constraint.
//!
//! Depending on which constraints bind, the optimum is one of
//!
//! * `Ğ_min` — the closest affordable quantile when the tolerance equals the
//!   minimal feasible tolerance `ε_min`;
//! * `Ğ^c` — budget only, when `ε ≥ ε^∞ = BW^α(Ğ^c, F̆_Y)`;
//! * `Ğ^BW` — divergence only, when `x₀ ≥ x₀^∞ = cost(Ğ^BW)`;
//! * `Ğ_η*` — both binding, found by a two-multiplier search.
//!
//! [`solve`] dispatches between them.

mod boundary;
mod both;
mod problem;
pub mod roots;

pub use boundary::{eps_min, solve_budget_only, solve_divergence_only, MinimalTolerance};
pub use both::solve_both_binding;
pub use problem::{Evaluation, Problem};

use crate::divergence::{BregmanGenerator, DivergenceSpec};
use crate::error::{AbwError, Result};
use crate::grid::QuantileGrid;
use crate::market::{MarketModel, MarketParams};
use crate::preferences::Utility;
use roots::RootOptions;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Relative tolerance on multipliers.
    pub root_tol: f64,
    /// Relative tolerance on constraint values.
    pub constraint_tol: f64,
    pub max_iter: usize,
    /// Points of the descending `η₂` lattice used to locate the largest
    /// budget-binding root.
    pub lattice_points: usize,
    /// Grid size for the two-multiplier search; the result is then polished
    /// on the full grid. Zero searches on the full grid directly.
    pub search_grid: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            root_tol: 1e-10,
            constraint_tol: 1e-6,
            max_iter: 200,
            lattice_points: 64,
            search_grid: 4096,
        }
    }
}

impl Tolerances {
    pub(crate) fn root_options(&self, f_scale: f64) -> RootOptions {
        RootOptions {
            x_tol: self.root_tol,
            f_tol: 0.1 * self.constraint_tol * f_scale.abs(),
            max_iter: self.max_iter,
        }
    }
}

/// Investor inputs.
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    pub market: MarketModel,
    pub utility: Utility,
    pub divergence: DivergenceSpec,
    /// Initial budget `x₀`.
    pub budget: f64,
    /// Proportion `c` of the benchmark subtracted inside the utility.
    pub proportion: f64,
    pub grid_size: usize,
    pub tolerances: Tolerances,
}

impl ProblemSpec {
    /// The setting of the numerical illustration: the market of
    /// [`MarketParams::illustration`], `x₀ = 1`, `c = 0.9`, `γ = ½`, `ε = ½`,
    /// a power generator with exponent `p`, and `n = 100 000`.
    pub fn illustration(p: f64, alpha: f64) -> Result<Self> {
        Ok(Self {
            market: MarketParams::illustration().into(),
            utility: Utility::crra(0.5)?,
            divergence: DivergenceSpec::new(alpha, 0.5, BregmanGenerator::power(p)?)?,
            budget: 1.0,
            proportion: 0.9,
            grid_size: 100_000,
            tolerances: Tolerances::default(),
        })
    }

    pub fn with_grid(mut self, n: usize) -> Self {
        self.grid_size = n;
        self
    }

    pub fn with_budget(mut self, x0: f64) -> Self {
        self.budget = x0;
        self
    }

    pub fn with_epsilon(mut self, eps: f64) -> Self {
        self.divergence.epsilon = eps;
        self
    }

    pub fn with_proportion(mut self, c: f64) -> Self {
        self.proportion = c;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let mut errs = Vec::new();
        if !(self.budget > 0.0 && self.budget.is_finite()) {
            errs.push(format!("budget must be positive, got {}", self.budget));
        }
        if !(0.0..=1.0).contains(&self.proportion) {
            errs.push(format!("proportion must lie in [0, 1], got {}", self.proportion));
        }
        if !(self.divergence.alpha > 0.0 && self.divergence.alpha < 1.0) {
            errs.push(format!("alpha must lie in (0, 1), got {}", self.divergence.alpha));
        }
        if !(self.divergence.epsilon >= 0.0) {
            errs.push(format!("epsilon must be non-negative, got {}", self.divergence.epsilon));
        }
        if self.grid_size < 2 {
            errs.push(format!("grid size must be at least 2, got {}", self.grid_size));
        }
        let t = &self.tolerances;
        if !(t.root_tol > 0.0 && t.constraint_tol > 0.0 && t.max_iter > 0 && t.lattice_points >= 2) {
            errs.push("tolerances must be positive and the lattice needs at least 2 points".into());
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(AbwError::InvalidConfig(errs))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    BudgetOnly,
    DivergenceOnly,
    BothBinding,
    Infeasible,
}

impl Regime {
    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::BudgetOnly => "budget_only",
            Regime::DivergenceOnly => "divergence_only",
            Regime::BothBinding => "both_binding",
            Regime::Infeasible => "infeasible",
        }
    }
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Multipliers {
    None,
    /// Single multiplier of a one-constraint problem.
    Scalar(f64),
    /// `(η₁, η₂)` on the budget and divergence constraints.
    Pair { eta1: f64, eta2: f64 },
}

impl Multipliers {
    /// `(η₁, η₂)` in the two-constraint parametrisation.
    pub fn as_pair(&self, regime: Regime) -> (f64, f64) {
        match (*self, regime) {
            (Multipliers::Pair { eta1, eta2 }, _) => (eta1, eta2),
            (Multipliers::Scalar(l), Regime::BudgetOnly) => (l, 0.0),
            (Multipliers::Scalar(l), Regime::DivergenceOnly) => (0.0, l),
            _ => (f64::NAN, f64::NAN),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Achieved {
    pub cost: f64,
    pub abw: f64,
    pub expected_utility: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Diagnostics {
    /// Total constraint evaluations across all searches.
    pub evaluations: usize,
    /// Iterations of the outermost search that produced the result.
    pub iterations: usize,
    /// `cost/x₀ − 1` and `abw/ε − 1` at the returned point.
    pub cost_residual: f64,
    pub abw_residual: f64,
    pub benchmark_cost: f64,
    pub eps_min: Option<f64>,
    pub eps_infty: Option<f64>,
    pub x0_infty: Option<f64>,
    pub lambda_min: Option<f64>,
    pub lambda_c: Option<f64>,
    pub lambda_bw: Option<f64>,
    /// `[η₁^min, λ^c]`.
    pub eta1_range: Option<(f64, f64)>,
    /// `[0, λ^BW]`.
    pub eta2_range: Option<(f64, f64)>,
    /// Every `η₁` interval on which `k − ℓ` changed sign during the search.
    pub sign_changes: Vec<(f64, f64)>,
    /// Whether an isotonic projection of the inner function was needed.
    pub projection_used: bool,
    /// Largest decrease removed when enforcing monotonicity of the output.
    pub monotone_repair: f64,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    /// `None` only for [`Regime::Infeasible`].
    pub quantile: Option<QuantileGrid>,
    pub regime: Regime,
    pub multipliers: Multipliers,
    pub achieved: Option<Achieved>,
    pub diagnostics: Diagnostics,
}

impl SolveResult {
    pub(crate) fn infeasible(diagnostics: Diagnostics) -> Self {
        Self {
            quantile: None,
            regime: Regime::Infeasible,
            multipliers: Multipliers::None,
            achieved: None,
            diagnostics,
        }
    }

    pub(crate) fn feasible(
        problem: &Problem,
        values: Vec<f64>,
        regime: Regime,
        multipliers: Multipliers,
        mut diagnostics: Diagnostics,
    ) -> Self {
        let repair = values
            .windows(2)
            .map(|w| w[0] - w[1])
            .fold(0.0f64, f64::max);
        diagnostics.monotone_repair = repair;
        let q = QuantileGrid::from_nearly_monotone(values);
        let cost = problem.cost(q.values());
        let abw = problem.abw(q.values());
        diagnostics.cost_residual = cost / problem.budget - 1.0;
        diagnostics.abw_residual = if problem.divergence.epsilon > 0.0 {
            abw / problem.divergence.epsilon - 1.0
        } else {
            abw
        };
        Self {
            achieved: Some(Achieved {
                cost,
                abw,
                expected_utility: problem.expected_utility(q.values()),
            }),
            quantile: Some(q),
            regime,
            multipliers,
            diagnostics,
        }
    }

    pub fn values(&self) -> Option<&[f64]> {
        self.quantile.as_ref().map(|q| q.values())
    }
}

/// Solves the problem in whichever regime the inputs select.
///
/// Order of checks: infeasible budget (`c·y₀ > x₀`) or tolerance below
/// `ε_min`; the degenerate tolerance `ε = ε_min`; budget only when
/// `ε ≥ ε^∞`; divergence only when `x₀ ≥ x₀^∞`; both binding otherwise.
pub fn solve(spec: &ProblemSpec) -> Result<SolveResult> {
    let problem = Problem::new(spec)?;
    solve_problem(&problem, spec)
}

pub(crate) fn solve_problem(problem: &Problem, spec: &ProblemSpec) -> Result<SolveResult> {
    let tol = problem.tolerances.constraint_tol;
    let x0 = problem.budget;
    let eps = problem.divergence.epsilon;
    let y0 = problem.benchmark_cost();
    let mut diag = Diagnostics {
        benchmark_cost: y0,
        ..Default::default()
    };

    if problem.proportion * y0 > x0 * (1.0 + tol) {
        diag.notes.push(format!(
            "c·y0 = {} exceeds the budget {x0}; no quantile above the utility floor is affordable",
            problem.proportion * y0
        ));
        return Ok(SolveResult::infeasible(diag));
    }

    let min = eps_min(problem)?;
    diag.eps_min = Some(min.eps_min);
    diag.lambda_min = Some(min.lambda_min);
    if eps < min.eps_min * (1.0 - tol) {
        diag.notes.push(format!("epsilon {eps} is below the minimal tolerance {}", min.eps_min));
        return Ok(SolveResult::infeasible(diag));
    }
    if min.eps_min > 0.0 && eps <= min.eps_min * (1.0 + tol) {
        diag.notes.push("epsilon equals the minimal tolerance; returning the closest affordable quantile".into());
        return Ok(SolveResult::feasible(
            problem,
            min.g_min.into_values(),
            Regime::BothBinding,
            Multipliers::Scalar(min.lambda_min),
            diag,
        ));
    }

    let budget = solve_budget_only(problem)?;
    diag.eps_infty = budget.diagnostics.eps_infty;
    diag.lambda_c = budget.diagnostics.lambda_c;
    diag.evaluations += budget.diagnostics.evaluations;
    if eps >= budget.diagnostics.eps_infty.unwrap_or(f64::INFINITY) {
        let mut r = budget;
        r.diagnostics = Diagnostics {
            iterations: r.diagnostics.iterations,
            ..merge(diag, &r.diagnostics)
        };
        return Ok(r);
    }

    let div = solve_divergence_only(problem)?;
    diag.x0_infty = div.diagnostics.x0_infty;
    diag.lambda_bw = div.diagnostics.lambda_bw;
    diag.evaluations += div.diagnostics.evaluations;
    if x0 >= div.diagnostics.x0_infty.unwrap_or(f64::INFINITY) {
        let mut r = div;
        r.diagnostics = Diagnostics {
            iterations: r.diagnostics.iterations,
            ..merge(diag, &r.diagnostics)
        };
        return Ok(r);
    }

    both::solve_both_binding_with(problem, spec, diag)
}

fn merge(mut base: Diagnostics, from: &Diagnostics) -> Diagnostics {
    base.cost_residual = from.cost_residual;
    base.abw_residual = from.abw_residual;
    base.monotone_repair = from.monotone_repair;
    base.projection_used |= from.projection_used;
    base.notes.extend(from.notes.iter().cloned());
    base
}
