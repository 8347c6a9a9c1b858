//! Utility functions satisfying the Inada conditions.
//!
//! Values outside the domain follow the extended-real convention:
//! `U(x) = −∞` for `x < 0` and `U'(x) = +∞` for `x ≤ 0`, carried as IEEE
//! infinities.

use crate::error::{AbwError, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Utility {
    /// `U(x) = x^{1−γ}/(1−γ)` with `γ ∈ (0, 1)`.
    Crra { gamma: f64 },
    Custom(TabulatedMarginal),
}

impl Utility {
    pub fn crra(gamma: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma < 1.0) {
            return Err(AbwError::Domain(format!("CRRA risk aversion must lie in (0, 1), got {gamma}")));
        }
        Ok(Utility::Crra { gamma })
    }

    pub fn u(&self, x: f64) -> f64 {
        if x < 0.0 {
            return f64::NEG_INFINITY;
        }
        if x == 0.0 {
            return 0.0;
        }
        match self {
            Utility::Crra { gamma } => x.powf(1.0 - gamma) / (1.0 - gamma),
            Utility::Custom(t) => t.utility(x),
        }
    }

    /// `U'(x)`, `+∞` for `x ≤ 0`.
    pub fn marginal(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return f64::INFINITY;
        }
        match self {
            Utility::Crra { gamma } => x.powf(-gamma),
            Utility::Custom(t) => t.marginal(x),
        }
    }

    /// `(U')⁻¹(y)` for `y > 0`.
    pub fn marginal_inverse(&self, y: f64) -> Result<f64> {
        if !(y > 0.0) {
            return Err(AbwError::Domain(format!("marginal utility inverse needs y > 0, got {y}")));
        }
        Ok(self.marginal_inverse_unchecked(y))
    }

    pub(crate) fn marginal_inverse_unchecked(&self, y: f64) -> f64 {
        match self {
            Utility::Crra { gamma } => y.powf(-1.0 / gamma),
            Utility::Custom(t) => t.marginal_inverse(y),
        }
    }

    /// `U''(x)` for `x > 0`.
    pub fn curvature(&self, x: f64) -> f64 {
        match self {
            Utility::Crra { gamma } => -gamma * x.powf(-gamma - 1.0),
            Utility::Custom(t) => t.curvature(x),
        }
    }

    /// Elasticity `−x U''(x)/U'(x)` — constant `γ` for CRRA. Used by the
    /// solver to take Newton steps in `ln x`.
    pub(crate) fn elasticity(&self, x: f64) -> f64 {
        match self {
            Utility::Crra { gamma } => *gamma,
            Utility::Custom(t) => t.elasticity(x),
        }
    }
}

/// Marginal utility tabulated at positive abscissae and interpolated linearly
/// in log-log coordinates, i.e. as a power law on each segment. The end
/// segments extend as power laws, so the Inada limits hold as long as both
/// end slopes are negative; the first slope must exceed −1 so that
/// `U(x) = ∫₀ˣ U'` is finite.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedMarginal {
    ln_x: Vec<f64>,
    ln_m: Vec<f64>,
    /// Log-log slope of each segment; `slopes[0]` also covers `(0, x₀)` and
    /// the last entry covers `(x_last, ∞)`.
    slopes: Vec<f64>,
    /// `U(x_i)`.
    cumulative: Vec<f64>,
}

impl TabulatedMarginal {
    pub fn new(x: &[f64], marginal: &[f64]) -> Result<Self> {
        if x.len() < 2 || x.len() != marginal.len() {
            return Err(AbwError::Domain("tabulated marginal utility needs at least two matching points".into()));
        }
        if x.iter().chain(marginal).any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(AbwError::Domain("tabulated marginal utility must be positive and finite".into()));
        }
        if x.windows(2).any(|w| w[1] <= w[0]) {
            return Err(AbwError::Domain("abscissae must be strictly increasing".into()));
        }
        if marginal.windows(2).any(|w| w[1] >= w[0]) {
            return Err(AbwError::Domain("marginal utility must be strictly decreasing".into()));
        }
        let ln_x: Vec<f64> = x.iter().map(|v| v.ln()).collect();
        let ln_m: Vec<f64> = marginal.iter().map(|v| v.ln()).collect();
        let slopes: Vec<f64> = (0..x.len() - 1)
            .map(|i| (ln_m[i + 1] - ln_m[i]) / (ln_x[i + 1] - ln_x[i]))
            .collect();
        if slopes[0] <= -1.0 {
            return Err(AbwError::Domain(
                "first log-log slope must exceed -1 so that utility is finite at 0".into(),
            ));
        }
        let mut cumulative = Vec::with_capacity(x.len());
        cumulative.push(power_integral(marginal[0], x[0], slopes[0], 0.0, x[0]));
        for i in 1..x.len() {
            let seg = power_integral(marginal[i - 1], x[i - 1], slopes[i - 1], x[i - 1], x[i]);
            cumulative.push(cumulative[i - 1] + seg);
        }
        Ok(Self {
            ln_x,
            ln_m,
            slopes,
            cumulative,
        })
    }

    fn segment(&self, lx: f64) -> usize {
        // index of the segment whose power law applies at ln x
        let k = self.ln_x.partition_point(|&v| v <= lx);
        k.saturating_sub(1).min(self.slopes.len() - 1)
    }

    fn marginal(&self, x: f64) -> f64 {
        let lx = x.ln();
        let i = self.segment(lx);
        (self.ln_m[i] + self.slopes[i] * (lx - self.ln_x[i])).exp()
    }

    fn elasticity(&self, x: f64) -> f64 {
        -self.slopes[self.segment(x.ln())]
    }

    fn curvature(&self, x: f64) -> f64 {
        -self.elasticity(x) * self.marginal(x) / x
    }

    fn utility(&self, x: f64) -> f64 {
        let lx = x.ln();
        if lx <= self.ln_x[0] {
            let m0 = self.ln_m[0].exp();
            return power_integral(m0, self.ln_x[0].exp(), self.slopes[0], 0.0, x);
        }
        let i = self.segment(lx);
        let xi = self.ln_x[i].exp();
        self.cumulative[i] + power_integral(self.ln_m[i].exp(), xi, self.slopes[i], xi, x)
    }

    fn marginal_inverse(&self, y: f64) -> f64 {
        let ly = y.ln();
        // ln_m is decreasing: find the segment that contains ly
        let k = self.ln_m.partition_point(|&v| v >= ly);
        let i = k.saturating_sub(1).min(self.slopes.len() - 1);
        (self.ln_x[i] + (ly - self.ln_m[i]) / self.slopes[i]).exp()
    }
}

/// `∫_a^b m₀ (t/x₀)^k dt`.
fn power_integral(m0: f64, x0: f64, k: f64, a: f64, b: f64) -> f64 {
    if (k + 1.0).abs() < 1e-12 {
        m0 * x0 * (b / a).ln()
    } else {
        m0 * x0 / (k + 1.0) * ((b / x0).powf(k + 1.0) - (a / x0).powf(k + 1.0))
    }
}
