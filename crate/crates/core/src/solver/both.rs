//! Both constraints binding: the two-multiplier search.
//!
//! For `η₁ ∈ [η₁^min, λ^c]` let `k(η₁)` be the largest `η₂ ∈ [0, λ^BW]`
//! at which the budget binds and `ℓ(η₁)` the `η₂` at which the divergence
//! binds. `k − ℓ` is non-negative at `η₁^min` and negative at `λ^c`, so a
//! root in `η₁` gives multipliers at which both constraints bind.
//!
//! The search runs on a coarse grid and the result is polished on the full
//! grid by a damped Newton iteration in `(ln η₁, ln η₂)`. When the crossing
//! does not exist or polishing fails, a one-dimensional search derived from
//! the convex dual takes over; as a last resort everything is repeated on
//! the full grid.

use std::cell::{Cell, RefCell};

use super::boundary::{solve_budget_only, solve_divergence_only};
use super::roots::{illinois, positive_root, RootOptions};
use super::{solve_problem, Diagnostics, Multipliers, Problem, ProblemSpec, Regime, SolveResult};
use crate::error::{AbwError, Result};
use crate::grid::UGrid;

/// Solves with both constraints binding.
///
/// Computes the anchors `λ^c` and `λ^BW` first; when the inputs turn out to
/// lie outside the both-binding regime (`ε ≥ ε^∞` or `x₀ ≥ x₀^∞`, or an
/// infeasible tolerance) the problem is handed to the general dispatcher.
pub fn solve_both_binding(spec: &ProblemSpec) -> Result<SolveResult> {
    let problem = Problem::new(spec)?;
    let y0 = problem.benchmark_cost();
    if problem.proportion * y0 > problem.budget * (1.0 + problem.tolerances.constraint_tol) {
        return solve_problem(&problem, spec);
    }
    let budget = solve_budget_only(&problem)?;
    let div = solve_divergence_only(&problem)?;
    let eps_inf = budget.diagnostics.eps_infty.unwrap_or(f64::INFINITY);
    let x_inf = div.diagnostics.x0_infty.unwrap_or(f64::INFINITY);
    if problem.divergence.epsilon >= eps_inf || problem.budget >= x_inf {
        return solve_problem(&problem, spec);
    }
    let min = super::eps_min(&problem)?;
    if problem.divergence.epsilon <= min.eps_min {
        return solve_problem(&problem, spec);
    }
    let diag = Diagnostics {
        benchmark_cost: y0,
        eps_min: Some(min.eps_min),
        lambda_min: Some(min.lambda_min),
        eps_infty: Some(eps_inf),
        x0_infty: Some(x_inf),
        lambda_c: budget.diagnostics.lambda_c,
        lambda_bw: div.diagnostics.lambda_bw,
        evaluations: budget.diagnostics.evaluations + div.diagnostics.evaluations,
        ..Default::default()
    };
    solve_both_binding_with(&problem, spec, diag)
}

pub(crate) fn solve_both_binding_with(
    problem: &Problem,
    spec: &ProblemSpec,
    mut diag: Diagnostics,
) -> Result<SolveResult> {
    let n_search = problem.tolerances.search_grid;
    if n_search >= 2 && n_search < problem.len() {
        let coarse = Problem::on_grid(spec, &UGrid::new(n_search)?)?;
        match anchors(&coarse).and_then(|(lc, lbw)| locate(&coarse, problem, lc, lbw, &mut diag)) {
            Ok((e1, e2, values)) => return Ok(finish(problem, values, e1, e2, diag)),
            Err(e) => diag.notes.push(format!("coarse search failed ({e}); searching on the full grid")),
        }
    }
    let lc = diag.lambda_c.ok_or(AbwError::Domain("missing budget anchor".into()))?;
    let lbw = diag.lambda_bw.ok_or(AbwError::Domain("missing divergence anchor".into()))?;
    let (e1, e2, values) = locate(problem, problem, lc, lbw, &mut diag)?;
    Ok(finish(problem, values, e1, e2, diag))
}

/// Locates the multipliers on `search_on` and polishes them on `problem`:
/// the `k`/`ℓ` crossing first, the dual descent if that fails.
fn locate(
    search_on: &Problem,
    problem: &Problem,
    lc: f64,
    lbw: f64,
    diag: &mut Diagnostics,
) -> Result<(f64, f64, Vec<f64>)> {
    let first = search(search_on, lc, lbw, diag).and_then(|(e1, e2)| polish(problem, e1, e2, diag));
    match first {
        Ok(r) => Ok(r),
        Err(e) => {
            diag.notes.push(format!("k - l crossing search failed ({e}); using the dual search"));
            let (e1, e2) = dual_search(search_on, lc, lbw, diag)?;
            polish(problem, e1, e2, diag)
        }
    }
}

fn finish(problem: &Problem, values: Vec<f64>, eta1: f64, eta2: f64, mut diag: Diagnostics) -> SolveResult {
    let (inner_a, pa) = problem.candidate_inner(eta1, eta2, problem.divergence.alpha);
    let (_, pb) = problem.candidate_inner(eta1, eta2, 1.0 - problem.divergence.alpha);
    drop(inner_a);
    diag.projection_used |= pa || pb;
    if let Some((lo, hi)) = diag.eta1_range {
        if eta1 < lo || eta1 > hi {
            diag.notes.push(format!(
                "eta1 = {eta1} lies outside [{lo}, {hi}]; k is discontinuous for these inputs and the \
                 multipliers were located by the two-dimensional polish"
            ));
        }
    }
    SolveResult::feasible(problem, values, Regime::BothBinding, Multipliers::Pair { eta1, eta2 }, diag)
}

fn anchors(problem: &Problem) -> Result<(f64, f64)> {
    let b = solve_budget_only(problem)?;
    let d = solve_divergence_only(problem)?;
    let lc = b.diagnostics.lambda_c.unwrap_or(f64::NAN);
    let lbw = d.diagnostics.lambda_bw.unwrap_or(f64::NAN);
    if !(lc.is_finite() && lbw.is_finite()) {
        return Err(AbwError::Domain("boundary multipliers are not finite".into()));
    }
    Ok((lc, lbw))
}

/// The `k`/`ℓ` search. Returns `(η₁, ℓ(η₁))` at the located crossing.
fn search(problem: &Problem, lc: f64, lbw: f64, diag: &mut Diagnostics) -> Result<(f64, f64)> {
    let x0 = problem.budget;
    let eps = problem.divergence.epsilon;
    let tol = problem.tolerances;
    let evals = Cell::new(0usize);
    let cost = |e1: f64, e2: f64| {
        evals.set(evals.get() + 1);
        problem.cost(&problem.assemble(e1, e2)) - x0
    };
    let abw = |e1: f64, e2: f64| {
        evals.set(evals.get() + 1);
        problem.abw(&problem.assemble(e1, e2)) - eps
    };
    let inner_opts = |scale: f64| RootOptions {
        x_tol: tol.root_tol,
        f_tol: 0.01 * tol.constraint_tol * scale,
        max_iter: tol.max_iter,
    };

    let eta1_min = positive_root(|e1| cost(e1, lbw), lc, true, inner_opts(x0), "eta1 lower bound")?.x;
    diag.eta1_range = Some((eta1_min, lc));
    diag.eta2_range = Some((0.0, lbw));

    // descending geometric lattice from λ^BW, closed by 0
    let m = tol.lattice_points.max(2);
    let ratio = (1e-8f64).powf(1.0 / (m - 2).max(1) as f64);
    let lattice: Vec<f64> = (0..m - 1).map(|j| lbw * ratio.powi(j as i32)).chain([0.0]).collect();

    let k = |e1: f64| -> Result<f64> {
        // the budget can bind at several η₂; k is the largest, so a top
        // residual within tolerance already counts as binding
        let mut prev = (lattice[0], cost(e1, lattice[0]));
        if prev.1 >= -inner_opts(x0).f_tol {
            return Ok(lbw);
        }
        for &e2 in &lattice[1..] {
            let f = cost(e1, e2);
            if f > 0.0 {
                let r = if e2 > 0.0 {
                    let r = illinois(|s| cost(e1, s.exp()), (e2.ln(), f), (prev.0.ln(), prev.1), inner_opts(x0), "k(eta1)")?;
                    r.x.exp()
                } else {
                    illinois(|s| cost(e1, s), (0.0, f), prev, inner_opts(x0), "k(eta1)")?.x
                };
                return Ok(r);
            }
            prev = (e2, f);
        }
        Ok(0.0)
    };
    let ell = |e1: f64| -> Result<f64> {
        let floor = lbw * 1e-12;
        if abw(e1, floor) <= 0.0 {
            return Ok(0.0);
        }
        Ok(positive_root(|e2| abw(e1, e2), lbw, true, inner_opts(eps), "l(eta1)")?.x)
    };

    let seen: RefCell<Vec<(f64, f64, f64)>> = RefCell::new(Vec::new());
    let failure: RefCell<Option<AbwError>> = RefCell::new(None);
    let d = |e1: f64| -> f64 {
        let r = k(e1).and_then(|kv| ell(e1).map(|lv| (kv, lv)));
        match r {
            Ok((kv, lv)) => {
                seen.borrow_mut().push((e1, kv - lv, lv));
                kv - lv
            }
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                f64::NAN
            }
        }
    };

    let lo = eta1_min.min(lc);
    let da = d(lo);
    let db = d(lc);
    if let Some(e) = failure.borrow_mut().take() {
        return Err(e);
    }
    let outer = RootOptions {
        x_tol: tol.root_tol,
        f_tol: 0.1 * tol.constraint_tol * lbw,
        max_iter: tol.max_iter,
    };
    let root = illinois(|s| d(s.exp()), (lo.ln(), da), (lc.ln(), db), outer, "k - l crossing");
    if let Some(e) = failure.borrow_mut().take() {
        return Err(e);
    }
    let mut pts = seen.into_inner();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    diag.sign_changes = pts
        .windows(2)
        .filter(|w| (w[0].1 >= 0.0) != (w[1].1 >= 0.0))
        .map(|w| (w[0].0, w[1].0))
        .collect();
    diag.evaluations += evals.get();
    let root = root?;
    diag.iterations += root.iterations;
    let e1 = root.x.exp();
    let e2 = pts
        .iter()
        .find(|p| p.0 == e1)
        .map(|p| p.2)
        .unwrap_or_else(|| ell(e1).unwrap_or(f64::NAN));
    if !(e2 > 0.0 && e2.is_finite()) {
        return Err(AbwError::Convergence {
            what: "k - l crossing",
            iterations: root.iterations,
            residual: root.fx,
        });
    }
    Ok((e1, e2))
}

/// Root of `h(η₁) = cost(η₁, ℓ₊(η₁)) − x₀`, where `ℓ₊(η₁) ≥ 0` makes the
/// divergence bind (or is 0 when it is slack).
///
/// `(x₀ − cost, ε − abw)` is the gradient of the concave problem's dual
/// function, which is convex in `(η₁, η₂)`. Minimising it over `η₂ ≥ 0`
/// leaves a convex function of `η₁` with derivative `−h`, so `h` is
/// non-increasing and its root is bracketed by expansion alone. This does
/// not rely on the crossing structure of `k` and `ℓ`, which can break down
/// when the budget is below the benchmark cost.
fn dual_search(problem: &Problem, lc: f64, lbw: f64, diag: &mut Diagnostics) -> Result<(f64, f64)> {
    let x0 = problem.budget;
    let eps = problem.divergence.epsilon;
    let tol = problem.tolerances;
    let evals = Cell::new(0usize);
    let eval = |e1: f64, e2: f64| {
        evals.set(evals.get() + 1);
        problem.evaluate_eta(e1, e2)
    };
    let inner = RootOptions {
        x_tol: tol.root_tol,
        f_tol: 0.01 * tol.constraint_tol * eps,
        max_iter: tol.max_iter,
    };
    let ell = |e1: f64| -> Result<f64> {
        if eval(e1, lbw * 1e-12).abw <= eps {
            return Ok(0.0);
        }
        Ok(positive_root(|e2| eval(e1, e2).abw - eps, lbw, true, inner, "l(eta1)")?.x)
    };
    let failure: RefCell<Option<AbwError>> = RefCell::new(None);
    let h = |e1: f64| match ell(e1) {
        Ok(e2) => eval(e1, e2).cost - x0,
        Err(e) => {
            failure.borrow_mut().get_or_insert(e);
            f64::NAN
        }
    };
    let outer = RootOptions {
        x_tol: tol.root_tol,
        f_tol: 0.1 * tol.constraint_tol * x0,
        max_iter: tol.max_iter,
    };
    let root = positive_root(h, lc, true, outer, "dual crossing");
    diag.evaluations += evals.get();
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    let root = root?;
    diag.iterations += root.iterations;
    let e2 = ell(root.x)?;
    if !(e2 > 0.0) {
        return Err(AbwError::Convergence {
            what: "dual crossing",
            iterations: root.iterations,
            residual: root.fx,
        });
    }
    Ok((root.x, e2))
}

/// Damped Newton on `(cost/x₀ − 1, abw/ε − 1)` in log multipliers.
fn polish(problem: &Problem, e1: f64, e2: f64, diag: &mut Diagnostics) -> Result<(f64, f64, Vec<f64>)> {
    let x0 = problem.budget;
    let eps = problem.divergence.epsilon;
    let target = 0.1 * problem.tolerances.constraint_tol;
    let eval = |v: [f64; 2]| {
        let values = problem.assemble(v[0].exp(), v[1].exp());
        let r = [problem.cost(&values) / x0 - 1.0, problem.abw(&values) / eps - 1.0];
        (r, values)
    };
    let norm = |r: [f64; 2]| r[0].abs().max(r[1].abs());
    let mut v = [e1.ln(), e2.ln()];
    let (mut r, mut values) = eval(v);
    let mut evals = 1;
    let h = 1e-6;
    for it in 0..60 {
        if norm(r) <= target {
            diag.iterations += it;
            diag.evaluations += evals;
            return Ok((v[0].exp(), v[1].exp(), values));
        }
        let (r1, _) = eval([v[0] + h, v[1]]);
        let (r2, _) = eval([v[0], v[1] + h]);
        evals += 2;
        let j = [
            [(r1[0] - r[0]) / h, (r2[0] - r[0]) / h],
            [(r1[1] - r[1]) / h, (r2[1] - r[1]) / h],
        ];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if !(det.is_finite() && det != 0.0) {
            break;
        }
        let step = [
            -(j[1][1] * r[0] - j[0][1] * r[1]) / det,
            -(-j[1][0] * r[0] + j[0][0] * r[1]) / det,
        ];
        let mut t = 1.0;
        let mut accepted = false;
        while t > 1e-4 {
            let cand = [v[0] + t * step[0], v[1] + t * step[1]];
            let (rc, vc) = eval(cand);
            evals += 1;
            if norm(rc) < norm(r) {
                v = cand;
                r = rc;
                values = vc;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    diag.evaluations += evals;
    if norm(r) <= problem.tolerances.constraint_tol {
        return Ok((v[0].exp(), v[1].exp(), values));
    }
    Err(AbwError::Convergence {
        what: "both-binding polish",
        iterations: 60,
        residual: norm(r),
    })
}
