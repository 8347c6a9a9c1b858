//! Benchmark law and pricing weight in a market with deterministic
//! coefficients.
//!
//! Under geometric Brownian motion with deterministic drifts, volatilities
//! and short rate, the benchmark's terminal wealth is lognormal and the
//! state-price density, once expressed in benchmark-quantile coordinates,
//! has a closed form. Everything downstream only needs the three aggregates
//! `Γ` (cumulative expected growth), `Ψ` (cumulative volatility) and `R`
//! (integrated short rate).

use crate::error::{AbwError, Result};
use crate::grid::{LognormalTail, UGrid};
use crate::normal;
use serde::{Deserialize, Serialize};

/// Aggregated market description.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarketParams {
    /// Cumulative expected growth `Γ`.
    pub gamma: f64,
    /// Cumulative volatility `Ψ > 0`.
    pub psi: f64,
    /// Integrated short rate `R = ∫₀ᵀ r_s ds`.
    pub total_rate: f64,
    /// Initial value of the benchmark portfolio.
    pub initial_wealth: f64,
}

impl MarketParams {
    /// Validated constructor. Rejects `Γ ≤ R`, for which the pricing weight is
    /// not decreasing in `u` and the solver's existence theory does not apply.
    pub fn new(gamma: f64, psi: f64, total_rate: f64, initial_wealth: f64) -> Result<Self> {
        let m = Self {
            gamma,
            psi,
            total_rate,
            initial_wealth,
        };
        m.validate()?;
        Ok(m)
    }

    /// `Γ = 2, Ψ = 0.8, R = 1, X₀ = 1`: the market used in the examples and
    /// reproduction tests.
    pub fn illustration() -> Self {
        Self {
            gamma: 2.0,
            psi: 0.8,
            total_rate: 1.0,
            initial_wealth: 1.0,
        }
    }

    /// Checks finiteness and positivity only; `Γ ≤ R` is allowed.
    pub fn validate_shape(&self) -> Result<()> {
        if !(self.gamma.is_finite() && self.total_rate.is_finite()) {
            return Err(AbwError::InvalidMarket("gamma and total_rate must be finite".into()));
        }
        if !(self.psi.is_finite() && self.psi > 0.0) {
            return Err(AbwError::InvalidMarket(format!("psi must be positive, got {}", self.psi)));
        }
        if !(self.initial_wealth.is_finite() && self.initial_wealth > 0.0) {
            return Err(AbwError::InvalidMarket(format!(
                "initial_wealth must be positive, got {}",
                self.initial_wealth
            )));
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.validate_shape()?;
        if self.gamma <= self.total_rate {
            return Err(AbwError::NonDecreasingPricingWeight {
                gamma: self.gamma,
                total_rate: self.total_rate,
            });
        }
        Ok(())
    }

    /// Mean of `ln Y`: `ln X₀ + Γ − Ψ²/2`.
    pub fn log_mean(&self) -> f64 {
        self.initial_wealth.ln() + self.gamma - 0.5 * self.psi * self.psi
    }

    /// Market price of risk aggregate `a = (Γ − R)/Ψ`.
    pub fn kernel_shift(&self) -> f64 {
        (self.gamma - self.total_rate) / self.psi
    }

    pub fn lognormal(&self) -> LognormalTail {
        LognormalTail {
            log_mean: self.log_mean(),
            log_sd: self.psi,
        }
    }

    /// Benchmark quantile at normal score `z = Φ⁻¹(u)`.
    pub fn benchmark_quantile_at_score(&self, z: f64) -> f64 {
        (self.log_mean() + self.psi * z).exp()
    }

    pub fn benchmark_quantile(&self, u: f64) -> Result<f64> {
        check_level(u)?;
        Ok(self.benchmark_quantile_at_score(normal::quantile(u)))
    }

    pub fn benchmark_cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        normal::cdf((x.ln() - self.log_mean()) / self.psi)
    }

    pub fn benchmark_density(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        let z = (x.ln() - self.log_mean()) / self.psi;
        normal::pdf(z) / (x * self.psi)
    }

    /// Pricing weight at normal score `z`, computed as the exponent difference
    /// `ln φ(z + a) − ln φ(z) = −a z − a²/2` so it never forms `0/0`.
    pub fn xi_at_score(&self, z: f64) -> f64 {
        let a = self.kernel_shift();
        (-self.total_rate + normal::ln_pdf(z + a) - normal::ln_pdf(z)).exp()
    }

    pub fn xi(&self, u: f64) -> Result<f64> {
        check_level(u)?;
        Ok(self.xi_at_score(normal::quantile(u)))
    }

    /// Exact averages of `ξ` over the grid cells,
    /// `n e^{−R} [Φ(z_{i+1} + a) − Φ(z_i + a)]` with `z_i` the cell-edge
    /// scores. Summing them reproduces `∫ ξ = e^{−R}` to rounding, which the
    /// midpoint values cannot do because `ξ` is unbounded near `u = 0`.
    pub fn xi_cell_averages(&self, grid: &UGrid) -> Vec<f64> {
        let n = grid.len();
        let a = self.kernel_shift();
        let scale = n as f64 * (-self.total_rate).exp();
        let edge = |i: usize| normal::quantile(i as f64 / n as f64) + a;
        let mut lo = edge(0);
        (0..n)
            .map(|i| {
                let hi = edge(i + 1);
                // difference of upper tails when both ends are positive
                let mass = if lo > 0.0 {
                    normal::cdf(-lo) - normal::cdf(-hi)
                } else {
                    normal::cdf(hi) - normal::cdf(lo)
                };
                lo = hi;
                scale * mass
            })
            .collect()
    }

    /// `E[Y] = X₀ e^Γ`.
    pub fn benchmark_mean(&self) -> f64 {
        self.initial_wealth * self.gamma.exp()
    }

    /// Exact benchmark cost `∫ F̆_Y ξ du = X₀ exp(Γ − R − Ψ a)`, which equals
    /// `X₀` for every parameter choice.
    pub fn benchmark_cost(&self) -> f64 {
        self.initial_wealth * (self.gamma - self.total_rate - self.psi * self.kernel_shift()).exp()
    }
}

fn check_level(u: f64) -> Result<()> {
    if u > 0.0 && u < 1.0 {
        Ok(())
    } else {
        Err(AbwError::Domain(format!("probability level must lie in (0, 1), got {u}")))
    }
}

/// One interval of constant market coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarketInterval {
    pub drift: Vec<f64>,
    pub vol: Vec<f64>,
    /// Row-major correlation matrix.
    pub correlation: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    pub rate: f64,
}

/// Piecewise-constant coefficients on `breakpoints[0] < … < breakpoints[k]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PiecewiseMarket {
    pub breakpoints: Vec<f64>,
    pub intervals: Vec<MarketInterval>,
    pub initial_wealth: f64,
}

impl PiecewiseMarket {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(AbwError::InvalidMarket(msg));
        if self.intervals.is_empty() || self.breakpoints.len() != self.intervals.len() + 1 {
            return bad(format!(
                "need k+1 breakpoints for k intervals, got {} breakpoints and {} intervals",
                self.breakpoints.len(),
                self.intervals.len()
            ));
        }
        if self.breakpoints[0] < 0.0 || !self.breakpoints.iter().all(|t| t.is_finite()) {
            return bad("breakpoints must be finite and start at or after 0".into());
        }
        if self.breakpoints.windows(2).any(|w| w[1] <= w[0]) {
            return bad("breakpoints must be strictly increasing".into());
        }
        if !(self.initial_wealth > 0.0 && self.initial_wealth.is_finite()) {
            return bad("initial_wealth must be positive".into());
        }
        for (j, iv) in self.intervals.iter().enumerate() {
            let d = iv.vol.len();
            if d == 0 || iv.drift.len() != d || iv.weights.len() != d || iv.correlation.len() != d {
                return bad(format!("interval {j}: drift, vol, weights and correlation must share dimension"));
            }
            if iv.vol.iter().any(|s| !(*s > 0.0 && s.is_finite())) {
                return bad(format!("interval {j}: volatilities must be positive"));
            }
            if iv.correlation.iter().any(|row| row.len() != d) {
                return bad(format!("interval {j}: correlation matrix must be square"));
            }
            for a in 0..d {
                if (iv.correlation[a][a] - 1.0).abs() > 1e-12 {
                    return bad(format!("interval {j}: correlation diagonal must be 1"));
                }
                for b in 0..a {
                    if (iv.correlation[a][b] - iv.correlation[b][a]).abs() > 1e-12 {
                        return bad(format!("interval {j}: correlation matrix must be symmetric"));
                    }
                }
            }
            if !is_positive_semidefinite(&iv.correlation) {
                return bad(format!("interval {j}: correlation matrix is not positive semi-definite"));
            }
        }
        Ok(())
    }

    /// Collapses the path of coefficients into `(Γ, Ψ, R)`.
    ///
    /// The result is shape-checked but not required to satisfy `Γ > R`; the
    /// solver enforces that separately.
    pub fn aggregate(&self) -> Result<MarketParams> {
        self.validate()?;
        let mut gamma = 0.0;
        let mut psi2 = 0.0;
        let mut rate = 0.0;
        for (iv, w) in self.intervals.iter().zip(self.breakpoints.windows(2)) {
            let dt = w[1] - w[0];
            let excess: f64 = iv
                .drift
                .iter()
                .zip(&iv.weights)
                .map(|(mu, pi)| (mu - iv.rate) * pi)
                .sum();
            gamma += (excess + iv.rate) * dt;
            let d = iv.vol.len();
            let mut var = 0.0;
            for a in 0..d {
                for b in 0..d {
                    var += iv.weights[a] * iv.vol[a] * iv.correlation[a][b] * iv.vol[b] * iv.weights[b];
                }
            }
            psi2 += var * dt;
            rate += iv.rate * dt;
        }
        let m = MarketParams {
            gamma,
            psi: psi2.max(0.0).sqrt(),
            total_rate: rate,
            initial_wealth: self.initial_wealth,
        };
        m.validate_shape()?;
        Ok(m)
    }
}

pub fn aggregate(m: &PiecewiseMarket) -> Result<MarketParams> {
    m.aggregate()
}

/// Cholesky with a small diagonal allowance; a pivot below `-tol` means the
/// matrix has a negative eigenvalue.
fn is_positive_semidefinite(a: &[Vec<f64>]) -> bool {
    let n = a.len();
    let tol = 1e-10;
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let s: f64 = (0..j).map(|k| l[i][k] * l[j][k]).sum();
            if i == j {
                let d = a[i][i] - s;
                if d < -tol {
                    return false;
                }
                l[i][i] = d.max(0.0).sqrt();
            } else if l[j][j] > tol.sqrt() {
                l[i][j] = (a[i][j] - s) / l[j][j];
            } else if (a[i][j] - s).abs() > tol.sqrt() {
                // zero pivot but non-zero off-diagonal remainder
                return false;
            }
        }
    }
    true
}

/// Benchmark quantile and pricing weight given directly on a grid, for
/// markets without a closed form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TabulatedMarket {
    pub benchmark: Vec<f64>,
    pub xi: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum MarketModel {
    Gbm(MarketParams),
    Tabulated(TabulatedMarket),
}

impl From<MarketParams> for MarketModel {
    fn from(m: MarketParams) -> Self {
        MarketModel::Gbm(m)
    }
}

/// A market sampled on a grid: what the solver actually consumes.
#[derive(Debug, Clone)]
pub struct MarketGrid {
    pub grid: UGrid,
    pub benchmark: Vec<f64>,
    /// Pricing weight per cell: cell averages for the closed-form model,
    /// the supplied values for a tabulated one.
    pub xi: Vec<f64>,
    /// `E[Y]`, exact for the closed-form model.
    pub benchmark_mean: f64,
    /// Benchmark cost `y₀ = ∫ F̆_Y ξ du`.
    pub benchmark_cost: f64,
    /// Whether `ξ` is non-increasing on the grid.
    pub xi_non_increasing: bool,
    pub tail: Option<LognormalTail>,
}

impl MarketModel {
    pub fn discretize(&self, grid: &UGrid) -> Result<MarketGrid> {
        match self {
            MarketModel::Gbm(m) => {
                m.validate()?;
                let z = grid.normal_scores();
                let benchmark: Vec<f64> = z.iter().map(|&z| m.benchmark_quantile_at_score(z)).collect();
                let xi = m.xi_cell_averages(grid);
                let xi_non_increasing = xi.windows(2).all(|w| w[1] <= w[0]);
                Ok(MarketGrid {
                    grid: grid.clone(),
                    benchmark,
                    xi,
                    benchmark_mean: m.benchmark_mean(),
                    benchmark_cost: m.benchmark_cost(),
                    xi_non_increasing,
                    tail: Some(m.lognormal()),
                })
            }
            MarketModel::Tabulated(t) => {
                grid.check_len(t.benchmark.len())?;
                grid.check_len(t.xi.len())?;
                if t.benchmark.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
                    return Err(AbwError::InvalidMarket("tabulated benchmark must be positive and finite".into()));
                }
                if t.benchmark.windows(2).any(|w| w[1] < w[0]) {
                    return Err(AbwError::InvalidMarket("tabulated benchmark quantile must be non-decreasing".into()));
                }
                if t.xi.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
                    return Err(AbwError::InvalidMarket("tabulated pricing weight must be non-negative and finite".into()));
                }
                let xi_non_increasing = t.xi.windows(2).all(|w| w[1] <= w[0]);
                Ok(MarketGrid {
                    grid: grid.clone(),
                    benchmark: t.benchmark.clone(),
                    xi: t.xi.clone(),
                    benchmark_mean: grid.integrate(&t.benchmark),
                    benchmark_cost: grid.integrate_product(&t.benchmark, &t.xi),
                    xi_non_increasing,
                    tail: None,
                })
            }
        }
    }
}

impl MarketGrid {
    pub fn len(&self) -> usize {
        self.benchmark.len()
    }

    pub fn is_empty(&self) -> bool {
        self.benchmark.is_empty()
    }

    /// `∫ g ξ du` on this grid.
    pub fn cost(&self, g: &[f64]) -> f64 {
        self.grid.integrate_product(g, &self.xi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single(mu: f64, sigma: f64, r: f64) -> PiecewiseMarket {
        PiecewiseMarket {
            breakpoints: vec![0.0, 1.0],
            intervals: vec![MarketInterval {
                drift: vec![mu],
                vol: vec![sigma],
                correlation: vec![vec![1.0]],
                weights: vec![1.0],
                rate: r,
            }],
            initial_wealth: 1.0,
        }
    }

    #[test]
    fn aggregate_zero_excess_return() {
        let m = single(0.03, 0.2, 0.03).aggregate().unwrap();
        assert!((m.gamma - m.total_rate).abs() < 1e-15);
        assert!(m.validate().is_err());
    }

    #[test]
    fn aggregate_illustration_parameters() {
        let m = single(2.0, 0.8, 1.0).aggregate().unwrap();
        assert!((m.gamma - 2.0).abs() < 1e-15);
        assert!((m.psi - 0.8).abs() < 1e-15);
        assert!((m.total_rate - 1.0).abs() < 1e-15);
    }

    #[test]
    fn aggregate_two_intervals() {
        let mut pm = single(2.0, 0.8, 1.0);
        pm.breakpoints = vec![0.0, 0.5, 1.0];
        pm.intervals.push(pm.intervals[0].clone());
        let m = pm.aggregate().unwrap();
        assert!((m.psi * m.psi - 0.64).abs() < 1e-14);
    }

    #[test]
    fn aggregate_rejects_indefinite_correlation() {
        let pm = PiecewiseMarket {
            breakpoints: vec![0.0, 1.0],
            intervals: vec![MarketInterval {
                drift: vec![0.1; 3],
                vol: vec![0.2; 3],
                correlation: vec![vec![1.0, 0.9, -0.9], vec![0.9, 1.0, 0.9], vec![-0.9, 0.9, 1.0]],
                weights: vec![1.0 / 3.0; 3],
                rate: 0.0,
            }],
            initial_wealth: 1.0,
        };
        assert!(matches!(pm.aggregate(), Err(AbwError::InvalidMarket(_))));
        let mut ok = pm.clone();
        ok.intervals[0].correlation = vec![vec![1.0, 1.0, 0.0], vec![1.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]];
        assert!(ok.aggregate().is_ok(), "singular but PSD must pass");
    }

    #[test]
    fn quantile_values() {
        let m = MarketParams::illustration();
        assert!((m.benchmark_quantile(0.5).unwrap() - 1.68f64.exp()).abs() < 1e-12);
        assert!((m.benchmark_quantile(0.05).unwrap() - 1.439).abs() < 1e-3);
        assert!(m.benchmark_quantile(0.0).is_err());
        assert!(m.benchmark_quantile(1.0).is_err());
    }

    #[test]
    fn cdf_and_density() {
        let m = MarketParams::illustration();
        assert!((m.benchmark_cdf(m.benchmark_quantile(0.3).unwrap()) - 0.3).abs() < 1e-10);
        assert!((m.benchmark_cdf(1.68f64.exp()) - 0.5).abs() < 1e-14);
        assert_eq!(m.benchmark_cdf(-1.0), 0.0);
        assert_eq!(m.benchmark_density(0.0), 0.0);
        // trapezoid over a log-spaced mesh
        let n = 200_000;
        let (lo, hi) = (1e-4f64.ln(), 1e4f64.ln());
        let mut total = 0.0;
        let mut prev = (lo.exp(), m.benchmark_density(lo.exp()));
        for i in 1..=n {
            let x = (lo + (hi - lo) * i as f64 / n as f64).exp();
            let d = m.benchmark_density(x);
            assert!(d >= 0.0);
            total += 0.5 * (d + prev.1) * (x - prev.0);
            prev = (x, d);
        }
        assert!((total - 1.0).abs() < 1e-6);
    }

    #[test]
    fn pricing_weight() {
        let m = MarketParams::illustration();
        let g = UGrid::new(100_000).unwrap();
        let mg = MarketModel::Gbm(m).discretize(&g).unwrap();
        assert!((g.integrate(&mg.xi) - (-1f64).exp()).abs() < 1e-6);
        assert!((mg.cost(&mg.benchmark) - 1.0).abs() < 1e-5);
        assert!(mg.xi_non_increasing);
        assert!((m.benchmark_cost() - 1.0).abs() < 1e-14);

        let flat = MarketParams {
            gamma: 1.0,
            ..m
        };
        for u in [0.01, 0.5, 0.99] {
            assert!((flat.xi(u).unwrap() - (-1f64).exp()).abs() < 1e-15);
        }
        assert!(matches!(
            MarketParams::new(1.0, 0.8, 1.0, 1.0),
            Err(AbwError::NonDecreasingPricingWeight { .. })
        ));
    }

    #[test]
    fn tabulated_market_checks() {
        let g = UGrid::new(3).unwrap();
        let ok = TabulatedMarket {
            benchmark: vec![1.0, 2.0, 3.0],
            xi: vec![1.5, 1.0, 0.5],
        };
        let mg = MarketModel::Tabulated(ok.clone()).discretize(&g).unwrap();
        assert!((mg.benchmark_mean - 2.0).abs() < 1e-15);
        let mut bad = ok.clone();
        bad.xi[1] = -0.1;
        assert!(MarketModel::Tabulated(bad).discretize(&g).is_err());
        assert!(MarketModel::Tabulated(ok).discretize(&UGrid::new(4).unwrap()).is_err());
    }
}
