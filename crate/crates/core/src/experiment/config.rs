//! Run configuration: a TOML file with `market`, `problem`, `sweep`,
//! `numerics`, `statistics` and `output` sections. Unknown keys are
//! rejected, and validation reports every violated constraint at once.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::analysis::StatLevels;
use crate::divergence::{BregmanGenerator, DivergenceSpec};
use crate::error::{AbwError, Result};
use crate::market::{MarketParams, PiecewiseMarket};
use crate::preferences::Utility;
use crate::solver::{ProblemSpec, Tolerances};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub market: MarketConfig,
    #[serde(default)]
    pub problem: ProblemConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default)]
    pub numerics: NumericsConfig,
    #[serde(default)]
    pub statistics: StatisticsConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

/// Either the aggregates `(gamma, psi, total_rate)` or a piecewise market.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarketConfig {
    pub gamma: Option<f64>,
    pub psi: Option<f64>,
    pub total_rate: Option<f64>,
    pub initial_wealth: Option<f64>,
    pub piecewise: Option<PiecewiseMarket>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolutionKind {
    /// Whatever regime the inputs select.
    Optimal,
    BudgetOnly,
    DivergenceOnly,
    Benchmark,
}

impl SolutionKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            SolutionKind::Optimal => "optimal",
            SolutionKind::BudgetOnly => "budget_only",
            SolutionKind::DivergenceOnly => "divergence_only",
            SolutionKind::Benchmark => "benchmark",
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProblemConfig {
    pub budget: f64,
    pub proportion: f64,
    pub risk_aversion: f64,
    pub alpha: f64,
    pub epsilon: f64,
    pub bregman_exponent: f64,
    pub solutions: Vec<SolutionKind>,
}

impl Default for ProblemConfig {
    fn default() -> Self {
        Self {
            budget: 1.0,
            proportion: 0.9,
            risk_aversion: 0.5,
            alpha: 0.25,
            epsilon: 0.5,
            bregman_exponent: 2.0,
            solutions: vec![SolutionKind::Optimal],
        }
    }
}

/// Lists crossed into a case matrix; an empty list means "use the value from
/// `[problem]`".
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub bregman_exponent: Vec<f64>,
    pub alpha: Vec<f64>,
    pub proportion: Vec<f64>,
    pub budget: Vec<f64>,
    pub epsilon: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NumericsConfig {
    pub grid_size: usize,
    pub root_tol: f64,
    pub constraint_tol: f64,
    pub max_iter: usize,
    pub lattice_points: usize,
    pub search_grid: usize,
}

impl Default for NumericsConfig {
    fn default() -> Self {
        let t = Tolerances::default();
        Self {
            grid_size: 100_000,
            root_tol: t.root_tol,
            constraint_tol: t.constraint_tol,
            max_iter: t.max_iter,
            lattice_points: t.lattice_points,
            search_grid: t.search_grid,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StatisticsConfig {
    pub var_level: f64,
    pub es_level: f64,
    pub ute_level: f64,
}

impl Default for StatisticsConfig {
    fn default() -> Self {
        let l = StatLevels::default();
        Self {
            var_level: l.var,
            es_level: l.es,
            ute_level: l.ute,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Svg,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub directory: PathBuf,
    pub formats: Vec<Format>,
    /// Write every k-th grid node to `quantile.csv`.
    pub quantile_stride: usize,
    pub density_points: usize,
    /// Upper end of the density support; defaults to the benchmark's
    /// 99.5% quantile.
    pub density_max: Option<f64>,
    /// Resolution of the figure-1 integrand curves.
    pub figure1_points: usize,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            directory: PathBuf::from("out"),
            formats: vec![Format::Csv, Format::Svg],
            quantile_stride: 1,
            density_points: 400,
            density_max: None,
            figure1_points: 1000,
        }
    }
}

/// One point of the case matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Case {
    pub index: usize,
    pub bregman_exponent: f64,
    pub alpha: f64,
    pub proportion: f64,
    pub budget: f64,
    pub epsilon: f64,
    pub solution: SolutionKind,
}

impl Case {
    pub fn label(&self) -> String {
        format!(
            "case_{:03}_{}_p{}_a{}_c{}_x{}_e{}",
            self.index,
            self.solution.as_str(),
            self.bregman_exponent,
            self.alpha,
            self.proportion,
            self.budget,
            self.epsilon
        )
    }
}

impl RunConfig {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml(&text)
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| AbwError::InvalidConfig(vec![e.to_string()]))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn market_params(&self) -> Result<MarketParams> {
        let m = &self.market;
        match (&m.piecewise, m.gamma, m.psi, m.total_rate) {
            (Some(pw), None, None, None) => pw.aggregate(),
            (None, Some(gamma), Some(psi), Some(total_rate)) => Ok(MarketParams {
                gamma,
                psi,
                total_rate,
                initial_wealth: m.initial_wealth.unwrap_or(1.0),
            }),
            _ => Err(AbwError::InvalidConfig(vec![
                "market: give either gamma, psi and total_rate, or a piecewise block, but not both".into(),
            ])),
        }
    }

    fn values(list: &[f64], default: f64) -> Vec<f64> {
        if list.is_empty() {
            vec![default]
        } else {
            list.to_vec()
        }
    }

    /// Every violated constraint, in a stable order.
    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        match self.market_params() {
            Ok(m) => {
                if let Err(e) = m.validate() {
                    v.push(format!("market: {e}"));
                }
            }
            Err(AbwError::InvalidConfig(errs)) => v.extend(errs),
            Err(e) => v.push(format!("market: {e}")),
        }
        if let (Some(_), Some(w)) = (&self.market.piecewise, self.market.initial_wealth) {
            v.push(format!(
                "market: initial_wealth = {w} conflicts with the piecewise block; set it inside market.piecewise"
            ));
        }
        let p = &self.problem;
        let s = &self.sweep;
        for b in Self::values(&s.budget, p.budget) {
            if !(b > 0.0 && b.is_finite()) {
                v.push(format!("budget must be positive, got {b}"));
            }
        }
        for c in Self::values(&s.proportion, p.proportion) {
            if !(0.0..=1.0).contains(&c) {
                v.push(format!("proportion must lie in [0, 1], got {c}"));
            }
        }
        if !(p.risk_aversion > 0.0 && p.risk_aversion < 1.0) {
            v.push(format!("risk_aversion must lie in (0, 1), got {}", p.risk_aversion));
        }
        for a in Self::values(&s.alpha, p.alpha) {
            if !(a > 0.0 && a < 1.0) {
                v.push(format!("alpha must lie in (0, 1), got {a}"));
            }
        }
        for e in Self::values(&s.epsilon, p.epsilon) {
            if !(e >= 0.0 && e.is_finite()) {
                v.push(format!("epsilon must be non-negative, got {e}"));
            }
        }
        for q in Self::values(&s.bregman_exponent, p.bregman_exponent) {
            if !(q > 1.0 && q.is_finite()) {
                v.push(format!("bregman_exponent must exceed 1, got {q}"));
            }
        }
        if p.solutions.is_empty() {
            v.push("problem.solutions must name at least one solution".into());
        }
        let n = &self.numerics;
        if n.grid_size < 2 {
            v.push(format!("numerics.grid_size must be at least 2, got {}", n.grid_size));
        }
        if !(n.root_tol > 0.0 && n.constraint_tol > 0.0) {
            v.push("numerics tolerances must be positive".into());
        }
        if n.max_iter == 0 {
            v.push("numerics.max_iter must be positive".into());
        }
        if n.lattice_points < 2 {
            v.push("numerics.lattice_points must be at least 2".into());
        }
        let st = &self.statistics;
        for (name, l) in [("var_level", st.var_level), ("es_level", st.es_level), ("ute_level", st.ute_level)] {
            if !(l > 0.0 && l < 1.0) {
                v.push(format!("statistics.{name} must lie in (0, 1), got {l}"));
            }
        }
        let o = &self.output;
        if o.quantile_stride == 0 {
            v.push("output.quantile_stride must be positive".into());
        }
        if o.density_points < 2 {
            v.push("output.density_points must be at least 2".into());
        }
        if o.figure1_points < 2 {
            v.push("output.figure1_points must be at least 2".into());
        }
        if let Some(m) = o.density_max {
            if !(m > 0.0 && m.is_finite()) {
                v.push(format!("output.density_max must be positive, got {m}"));
            }
        }
        v
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(AbwError::InvalidConfig(v))
        }
    }

    /// The crossed case matrix, outermost loop first: exponent, alpha,
    /// proportion, budget, epsilon, solution. The benchmark does not depend
    /// on any swept value and appears once, at its first position.
    pub fn cases(&self) -> Vec<Case> {
        let p = &self.problem;
        let s = &self.sweep;
        let mut out = Vec::new();
        for &q in &Self::values(&s.bregman_exponent, p.bregman_exponent) {
            for &a in &Self::values(&s.alpha, p.alpha) {
                for &c in &Self::values(&s.proportion, p.proportion) {
                    for &b in &Self::values(&s.budget, p.budget) {
                        for &e in &Self::values(&s.epsilon, p.epsilon) {
                            for &sol in &p.solutions {
                                if sol == SolutionKind::Benchmark
                                    && out.iter().any(|c: &Case| c.solution == SolutionKind::Benchmark)
                                {
                                    continue;
                                }
                                out.push(Case {
                                    index: out.len(),
                                    bregman_exponent: q,
                                    alpha: a,
                                    proportion: c,
                                    budget: b,
                                    epsilon: e,
                                    solution: sol,
                                });
                            }
                        }
                    }
                }
            }
        }
        out
    }

    pub fn tolerances(&self) -> Tolerances {
        let n = &self.numerics;
        Tolerances {
            root_tol: n.root_tol,
            constraint_tol: n.constraint_tol,
            max_iter: n.max_iter,
            lattice_points: n.lattice_points,
            search_grid: n.search_grid,
        }
    }

    pub fn levels(&self) -> StatLevels {
        StatLevels {
            var: self.statistics.var_level,
            es: self.statistics.es_level,
            ute: self.statistics.ute_level,
        }
    }

    pub fn problem_spec(&self, case: &Case) -> Result<ProblemSpec> {
        Ok(ProblemSpec {
            market: self.market_params()?.into(),
            utility: Utility::crra(self.problem.risk_aversion)?,
            divergence: DivergenceSpec::new(
                case.alpha,
                case.epsilon,
                BregmanGenerator::power(case.bregman_exponent)?,
            )?,
            budget: case.budget,
            proportion: case.proportion,
            grid_size: self.numerics.grid_size,
            tolerances: self.tolerances(),
        })
    }

    pub fn wants(&self, f: Format) -> bool {
        self.output.formats.contains(&f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
[market]
gamma = 2.0
psi = 0.8
total_rate = 1.0
"#;

    #[test]
    fn defaults_fill_in() {
        let c = RunConfig::from_toml(BASE).unwrap();
        assert_eq!(c.cases().len(), 1);
        assert_eq!(c.numerics.grid_size, 100_000);
    }

    #[test]
    fn unknown_keys_rejected() {
        let text = format!("{BASE}colour = 3\n");
        assert!(matches!(RunConfig::from_toml(&text), Err(AbwError::InvalidConfig(_))));
        let text = format!("{BASE}\n[problem]\nbudgte = 1.0\n");
        assert!(RunConfig::from_toml(&text).is_err());
    }

    #[test]
    fn all_violations_listed() {
        let text = r#"
[market]
gamma = 1.0
psi = 0.8
total_rate = 1.0
[problem]
alpha = 1.5
risk_aversion = 2.0
[sweep]
budget = [1.0, -2.0]
[numerics]
grid_size = 1
"#;
        match RunConfig::from_toml(text) {
            Err(AbwError::InvalidConfig(v)) => assert_eq!(v.len(), 5, "{v:?}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn sweep_is_crossed() {
        let text = format!(
            "{BASE}\n[problem]\nsolutions = [\"optimal\", \"benchmark\"]\n[sweep]\nbregman_exponent = [1.6, 2.0, 2.4]\nalpha = [0.1, 0.5, 0.9]\n"
        );
        let c = RunConfig::from_toml(&text).unwrap();
        let cases = c.cases();
        assert_eq!(cases.len(), 10);
        assert_eq!(cases[1].solution, SolutionKind::Benchmark);
        assert_eq!(cases[2].alpha, 0.5);
        assert_eq!(cases.iter().filter(|c| c.solution == SolutionKind::Benchmark).count(), 1);
        assert!(cases.iter().enumerate().all(|(i, c)| c.index == i));
    }
}
