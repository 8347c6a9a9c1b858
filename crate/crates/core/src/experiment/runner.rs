//! Executes a configured case matrix and writes its artifacts.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::config::{Case, Format, RunConfig, SolutionKind};
use super::format::{num, opt, CsvFile};
use super::svg::{Plot, Series};
use crate::analysis::{crossing_point, density_curve, stats, StatsReport};
use crate::error::Result;
use crate::grid::QuantileGrid;
use crate::solver::{solve_budget_only, solve_divergence_only, solve_problem, Diagnostics, Problem, Regime};

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Overrides `output.directory`.
    pub out_dir: Option<PathBuf>,
    /// Overrides `numerics.grid_size`.
    pub grid: Option<usize>,
    pub verbose: bool,
}

/// Everything computed for one case.
#[derive(Debug, Clone)]
pub struct CaseOutcome {
    pub case: Case,
    /// `None` for the benchmark row.
    pub regime: Option<Regime>,
    pub eta: (f64, f64),
    pub quantile: Option<QuantileGrid>,
    pub stats: Option<StatsReport>,
    /// Wealth level where the solution crosses the benchmark from below.
    pub crossing: Option<f64>,
    pub diagnostics: Diagnostics,
    /// `"ok"` or a description of the invariant that failed.
    pub check: String,
}

impl CaseOutcome {
    pub fn infeasible(&self) -> bool {
        self.regime == Some(Regime::Infeasible)
    }
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub outcomes: Vec<CaseOutcome>,
    pub out_dir: PathBuf,
}

impl RunReport {
    pub fn any_infeasible(&self) -> bool {
        self.outcomes.iter().any(|o| o.infeasible())
    }

    pub fn failed_checks(&self) -> Vec<String> {
        self.outcomes
            .iter()
            .filter(|o| o.check != "ok")
            .map(|o| format!("{}: {}", o.case.label(), o.check))
            .collect()
    }

    /// 0 on success, 2 when some case is infeasible.
    pub fn exit_code(&self) -> i32 {
        if self.any_infeasible() {
            2
        } else {
            0
        }
    }
}

/// Human-readable case matrix, as printed by `--dry-run`.
pub fn describe_cases(config: &RunConfig) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "grid size: {}", config.numerics.grid_size);
    let _ = writeln!(s, "{:>5} {:>16} {:>6} {:>6} {:>6} {:>8} {:>8}", "case", "solution", "p", "alpha", "c", "x0", "epsilon");
    for c in config.cases() {
        let _ = writeln!(
            s,
            "{:>5} {:>16} {:>6} {:>6} {:>6} {:>8} {:>8}",
            c.index,
            c.solution.as_str(),
            c.bregman_exponent,
            c.alpha,
            c.proportion,
            c.budget,
            c.epsilon
        );
    }
    s
}

/// Solves one case without writing anything.
pub fn evaluate_case(config: &RunConfig, case: &Case) -> Result<CaseOutcome> {
    let spec = config.problem_spec(case)?;
    let problem = Problem::new(&spec)?;
    let levels = config.levels();
    let (regime, eta, quantile, diagnostics) = match case.solution {
        SolutionKind::Benchmark => (None, (f64::NAN, f64::NAN), Some(problem.benchmark_grid()), Diagnostics::default()),
        kind => {
            let r = match kind {
                SolutionKind::Optimal => solve_problem(&problem, &spec)?,
                SolutionKind::BudgetOnly => solve_budget_only(&problem)?,
                _ => solve_divergence_only(&problem)?,
            };
            (Some(r.regime), r.multipliers.as_pair(r.regime), r.quantile, r.diagnostics)
        }
    };
    let stats = quantile.as_ref().map(|q| stats(q, &problem, levels));
    let crossing = quantile
        .as_ref()
        .and_then(|q| crossing_point(q.values(), problem.benchmark()))
        .map(|c| c.1);
    let check = check_outcome(&problem, case.solution, regime, quantile.as_ref());
    Ok(CaseOutcome {
        case: case.clone(),
        regime,
        eta,
        quantile,
        stats,
        crossing,
        diagnostics,
        check,
    })
}

/// Re-verifies the solver invariants on an emitted solution.
fn check_outcome(problem: &Problem, kind: SolutionKind, regime: Option<Regime>, q: Option<&QuantileGrid>) -> String {
    let Some(q) = q else {
        return if regime == Some(Regime::Infeasible) {
            "ok".into()
        } else {
            "missing quantile".into()
        };
    };
    let v = q.values();
    if !v.windows(2).all(|w| w[0] <= w[1]) {
        return "quantile not non-decreasing".into();
    }
    if kind == SolutionKind::Benchmark {
        return "ok".into();
    }
    if v.iter().zip(&problem.floor).any(|(g, f)| *g < *f) {
        return "quantile below c times the benchmark".into();
    }
    let tol = 100.0 * problem.tolerances.constraint_tol;
    let x0 = problem.budget;
    let eps = problem.divergence.epsilon;
    let cost = problem.cost(v);
    let abw = problem.abw(v);
    let cost_binds = (cost - x0).abs() <= tol * x0;
    let abw_binds = (abw - eps).abs() <= tol * eps.max(1e-300);
    let ok = match (kind, regime) {
        (SolutionKind::BudgetOnly, _) => cost_binds,
        (SolutionKind::DivergenceOnly, _) => abw_binds || eps == 0.0,
        (_, Some(Regime::BothBinding)) => cost_binds && abw_binds,
        _ => cost <= x0 * (1.0 + tol) && abw <= eps * (1.0 + tol) + tol && (cost_binds || abw_binds),
    };
    if ok {
        "ok".into()
    } else {
        format!("constraint check failed: cost {cost}, divergence {abw}")
    }
}

/// Runs every case, writes per-case CSVs, `summary.csv` and the figures.
pub fn run(config: &RunConfig, opts: &RunOptions) -> Result<RunReport> {
    let mut config = config.clone();
    if let Some(n) = opts.grid {
        config.numerics.grid_size = n;
    }
    config.validate()?;
    let out_dir = opts.out_dir.clone().unwrap_or_else(|| config.output.directory.clone());
    fs::create_dir_all(&out_dir)?;

    let cases = config.cases();
    let outcomes: Vec<Result<CaseOutcome>> = cases
        .par_iter()
        .map(|case| {
            let o = evaluate_case(&config, case)?;
            write_case(&config, &out_dir, &o)?;
            if opts.verbose {
                eprintln!(
                    "{}: {} ({} evaluations)",
                    case.label(),
                    o.regime.map(|r| r.as_str()).unwrap_or("benchmark"),
                    o.diagnostics.evaluations
                );
            }
            Ok(o)
        })
        .collect();
    let outcomes = outcomes.into_iter().collect::<Result<Vec<_>>>()?;

    if config.wants(Format::Csv) {
        write_summary(&out_dir.join("summary.csv"), &outcomes)?;
    }
    if config.wants(Format::Svg) {
        write_figures(&config, &out_dir, &outcomes)?;
    }
    Ok(RunReport { outcomes, out_dir })
}

pub const SUMMARY_HEADER: [&str; 22] = [
    "case", "solution", "p", "alpha", "c", "x0", "epsilon", "regime", "eta1", "eta2", "cost", "abw",
    "expected_utility", "glr", "mean", "std", "var", "es", "ute", "crossing", "eps_min", "check",
];

fn write_summary(path: &Path, outcomes: &[CaseOutcome]) -> Result<()> {
    let mut w = CsvFile::create(path, &SUMMARY_HEADER)?;
    for o in outcomes {
        let c = &o.case;
        let s = o.stats.as_ref();
        let f = |g: fn(&StatsReport) -> f64| opt(s.map(g));
        w.row([
            c.index.to_string(),
            c.solution.as_str().to_string(),
            num(c.bregman_exponent),
            num(c.alpha),
            num(c.proportion),
            num(c.budget),
            num(c.epsilon),
            o.regime.map(|r| r.as_str()).unwrap_or("benchmark").to_string(),
            if o.eta.0.is_nan() { String::new() } else { num(o.eta.0) },
            if o.eta.1.is_nan() { String::new() } else { num(o.eta.1) },
            f(|s| s.cost),
            f(|s| s.abw),
            f(|s| s.expected_utility),
            f(|s| s.glr),
            f(|s| s.mean),
            f(|s| s.std_dev),
            f(|s| s.var),
            f(|s| s.es),
            f(|s| s.ute),
            opt(o.crossing),
            opt(o.diagnostics.eps_min),
            o.check.clone(),
        ])?;
    }
    w.finish()
}

fn density_support(config: &RunConfig, problem_max: f64) -> Vec<f64> {
    let hi = config.output.density_max.unwrap_or(problem_max);
    let n = config.output.density_points;
    (0..n).map(|i| hi * i as f64 / (n - 1) as f64).collect()
}

fn benchmark_upper(config: &RunConfig) -> Result<f64> {
    Ok(config.market_params()?.benchmark_quantile(0.995)?)
}

fn write_case(config: &RunConfig, out_dir: &Path, o: &CaseOutcome) -> Result<()> {
    let dir = out_dir.join(o.case.label());
    fs::create_dir_all(&dir)?;
    let spec = config.problem_spec(&o.case)?;
    let problem = Problem::new(&spec)?;
    let bench = problem.benchmark();
    let u = problem.grid().nodes();
    let xi = &problem.market.xi;

    let mut d = String::new();
    let _ = writeln!(d, "case: {}", o.case.label());
    let _ = writeln!(d, "regime: {}", o.regime.map(|r| r.as_str()).unwrap_or("benchmark"));
    let _ = writeln!(d, "check: {}", o.check);
    let _ = writeln!(d, "{:#?}", o.diagnostics);
    fs::write(dir.join("diagnostics.txt"), d)?;

    if !config.wants(Format::Csv) {
        return Ok(());
    }
    let mut w = CsvFile::create(&dir.join("quantile.csv"), &["u", "benchmark_quantile", "solution_quantile", "xi"])?;
    let sol = o.quantile.as_ref().map(|q| q.values());
    for i in (0..u.len()).step_by(config.output.quantile_stride) {
        w.row([num(u[i]), num(bench[i]), opt(sol.map(|s| s[i])), num(xi[i])])?;
    }
    w.finish()?;

    let support = density_support(config, benchmark_upper(config)?);
    let m = config.market_params()?;
    let sol_pdf = o.quantile.as_ref().map(|q| density_curve(q, &support));
    let mut w = CsvFile::create(&dir.join("density.csv"), &["x", "benchmark_pdf", "solution_pdf"])?;
    for (i, &x) in support.iter().enumerate() {
        w.row([
            num(x),
            num(m.benchmark_density(x)),
            opt(sol_pdf.as_ref().map(|c| c.points[i].1)),
        ])?;
    }
    w.finish()
}

fn series_name(o: &CaseOutcome) -> String {
    let c = &o.case;
    format!("{} p={} a={}", c.solution.as_str(), c.bregman_exponent, c.alpha)
}

fn write_figures(config: &RunConfig, out_dir: &Path, outcomes: &[CaseOutcome]) -> Result<()> {
    let m = config.market_params()?;
    let upper = benchmark_upper(config)?;
    let support = density_support(config, upper);
    let mut dens = Plot {
        title: "Terminal wealth densities".into(),
        x_label: "wealth".into(),
        y_label: "density".into(),
        ..Default::default()
    };
    dens.series.push(Series::new(
        "benchmark",
        support.iter().map(|&x| (x, m.benchmark_density(x))).collect(),
    ));
    let mut quant = Plot {
        title: "Quantile functions".into(),
        x_label: "u".into(),
        y_label: "wealth".into(),
        y_range: Some((0.0, 1.5 * upper)),
        ..Default::default()
    };
    let n = 1000;
    let us: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
    quant.series.push(Series::new(
        "benchmark",
        us.iter().map(|&u| (u, m.benchmark_quantile(u).unwrap_or(f64::NAN))).collect(),
    ));
    for o in outcomes {
        let Some(q) = &o.quantile else { continue };
        if o.case.solution == SolutionKind::Benchmark {
            continue;
        }
        let name = series_name(o);
        let c = density_curve(q, &support);
        dens.series.push(Series::new(name.clone(), c.points));
        quant.series.push(Series::new(name, us.iter().map(|&u| (u, q.eval(u))).collect()));
        if let (Some(x), Some(Regime::BothBinding)) = (o.crossing, o.regime) {
            dens.vlines.push((x, format!("{x:.3}")));
        }
    }
    fs::write(out_dir.join("figure_densities.svg"), dens.render())?;
    fs::write(out_dir.join("figure_quantiles.svg"), quant.render())?;
    Ok(())
}
