//! Bregman generators and the α-Bregman-Wasserstein divergence between
//! quantile functions.
//!
//! For one-dimensional laws the optimal coupling is comonotone, so the
//! divergence from `G` to `F` reduces to
//! `∫₀¹ |1{G(u) ≤ F(u)} − α| · B_φ(G(u), F(u)) du`: outperformance
//! (`G > F`) is weighted by `α`, underperformance by `1 − α`.

use crate::error::{AbwError, Result};
use crate::grid::{neumaier_sum, QuantileGrid, UGrid};
use crate::market::MarketParams;

#[derive(Debug, Clone, PartialEq)]
pub enum BregmanGenerator {
    /// `φ_p(x) = 2 xᵖ / (p (p − 1))` on `x ≥ 0`; `p = 2` gives `x²`.
    Power { p: f64 },
    Custom(TabulatedGradient),
}

impl BregmanGenerator {
    pub fn power(p: f64) -> Result<Self> {
        if !(p > 1.0 && p.is_finite()) {
            return Err(AbwError::Domain(format!("power generator exponent must exceed 1, got {p}")));
        }
        Ok(BregmanGenerator::Power { p })
    }

    /// Left end of the domain; arguments below it are rejected.
    pub fn domain_min(&self) -> f64 {
        match self {
            BregmanGenerator::Power { .. } => 0.0,
            BregmanGenerator::Custom(t) => t.x[0],
        }
    }

    pub fn phi(&self, x: f64) -> f64 {
        match self {
            BregmanGenerator::Power { p } => 2.0 * x.powf(*p) / (p * (p - 1.0)),
            BregmanGenerator::Custom(t) => t.phi(x),
        }
    }

    /// `φ'(x)`.
    pub fn grad(&self, x: f64) -> f64 {
        match self {
            BregmanGenerator::Power { p } => {
                if *p == 2.0 {
                    2.0 * x
                } else {
                    2.0 * x.powf(p - 1.0) / (p - 1.0)
                }
            }
            BregmanGenerator::Custom(t) => t.grad(x),
        }
    }

    /// `φ''(x)`; may be `+∞` at the boundary `x = 0` for `p < 2`.
    pub fn hessian(&self, x: f64) -> f64 {
        match self {
            BregmanGenerator::Power { p } => {
                if *p == 2.0 {
                    2.0
                } else {
                    2.0 * x.powf(p - 2.0)
                }
            }
            BregmanGenerator::Custom(t) => t.hessian(x),
        }
    }

    /// Generalised inverse of `φ'`, clamped to the domain boundary for values
    /// of `y` below `φ'` at that boundary.
    pub fn grad_inverse(&self, y: f64) -> f64 {
        match self {
            BregmanGenerator::Power { p } => {
                if y <= 0.0 {
                    0.0
                } else if *p == 2.0 {
                    0.5 * y
                } else {
                    (0.5 * (p - 1.0) * y).powf(1.0 / (p - 1.0))
                }
            }
            BregmanGenerator::Custom(t) => t.grad_inverse(y),
        }
    }

    fn check(&self, z: f64) -> Result<()> {
        if z.is_finite() && z >= self.domain_min() {
            Ok(())
        } else {
            Err(AbwError::Domain(format!("{z} lies outside the generator domain")))
        }
    }

    /// `B_φ(z₁, z₂) = φ(z₁) − φ(z₂) − φ'(z₂)(z₁ − z₂)`.
    pub fn bregman(&self, z1: f64, z2: f64) -> Result<f64> {
        self.check(z1)?;
        self.check(z2)?;
        Ok(self.bregman_unchecked(z1, z2))
    }

    pub(crate) fn bregman_unchecked(&self, z1: f64, z2: f64) -> f64 {
        if z1 == z2 {
            return 0.0;
        }
        let b = match self {
            BregmanGenerator::Power { p } if *p == 2.0 => (z1 - z2) * (z1 - z2),
            _ => self.phi(z1) - self.phi(z2) - self.grad(z2) * (z1 - z2),
        };
        // rounding can push a tiny divergence below zero
        b.max(0.0)
    }
}

pub fn bregman(g: &BregmanGenerator, z1: f64, z2: f64) -> Result<f64> {
    g.bregman(z1, z2)
}

pub fn grad_inverse(g: &BregmanGenerator, y: f64) -> f64 {
    g.grad_inverse(y)
}

/// Tabulated `φ'` on an increasing positive mesh, interpolated linearly and
/// extended linearly to the right with the last slope. `φ` is the running
/// integral of `φ'` from the first node, which trapezoids compute exactly for
/// a piecewise-linear integrand.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedGradient {
    x: Vec<f64>,
    grad: Vec<f64>,
    phi: Vec<f64>,
}

impl TabulatedGradient {
    pub fn new(x: &[f64], grad: &[f64]) -> Result<Self> {
        if x.len() < 2 || x.len() != grad.len() {
            return Err(AbwError::Domain("tabulated gradient needs at least two matching points".into()));
        }
        if x.iter().chain(grad).any(|v| !v.is_finite()) || x[0] < 0.0 {
            return Err(AbwError::Domain("tabulated gradient must be finite on a non-negative mesh".into()));
        }
        if x.windows(2).any(|w| w[1] <= w[0]) || grad.windows(2).any(|w| w[1] <= w[0]) {
            return Err(AbwError::Domain(
                "tabulated gradient must be strictly increasing on a strictly increasing mesh".into(),
            ));
        }
        let mut phi = vec![0.0; x.len()];
        for i in 1..x.len() {
            phi[i] = phi[i - 1] + 0.5 * (grad[i] + grad[i - 1]) * (x[i] - x[i - 1]);
        }
        Ok(Self {
            x: x.to_vec(),
            grad: grad.to_vec(),
            phi,
        })
    }

    fn seg(&self, x: f64) -> usize {
        self.x.partition_point(|&v| v <= x).saturating_sub(1).min(self.x.len() - 2)
    }

    fn slope(&self, i: usize) -> f64 {
        (self.grad[i + 1] - self.grad[i]) / (self.x[i + 1] - self.x[i])
    }

    fn grad(&self, x: f64) -> f64 {
        let i = self.seg(x);
        self.grad[i] + self.slope(i) * (x - self.x[i])
    }

    fn hessian(&self, x: f64) -> f64 {
        self.slope(self.seg(x))
    }

    fn phi(&self, x: f64) -> f64 {
        let i = self.seg(x);
        let dx = x - self.x[i];
        self.phi[i] + self.grad[i] * dx + 0.5 * self.slope(i) * dx * dx
    }

    fn grad_inverse(&self, y: f64) -> f64 {
        if y <= self.grad[0] {
            return self.x[0];
        }
        let i = self
            .grad
            .partition_point(|&v| v <= y)
            .saturating_sub(1)
            .min(self.x.len() - 2);
        self.x[i] + (y - self.grad[i]) / self.slope(i)
    }
}

/// Tolerance `ε`, asymmetry `α` and generator of the divergence constraint.
#[derive(Debug, Clone, PartialEq)]
pub struct DivergenceSpec {
    pub alpha: f64,
    pub epsilon: f64,
    pub generator: BregmanGenerator,
}

impl DivergenceSpec {
    pub fn new(alpha: f64, epsilon: f64, generator: BregmanGenerator) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(AbwError::Domain(format!("alpha must lie in (0, 1), got {alpha}")));
        }
        if !(epsilon >= 0.0) {
            return Err(AbwError::Domain(format!("epsilon must be non-negative, got {epsilon}")));
        }
        Ok(Self {
            alpha,
            epsilon,
            generator,
        })
    }

    /// Weight applied at a node: `1 − α` where `g ≤ f`, `α` where `g > f`.
    #[inline]
    pub fn weight(&self, g: f64, f: f64) -> f64 {
        if g <= f {
            1.0 - self.alpha
        } else {
            self.alpha
        }
    }

    /// Pointwise integrand `|1{g ≤ f} − α| · B_φ(g, f)`.
    pub fn integrand(&self, g: &[f64], f: &[f64]) -> Vec<f64> {
        g.iter()
            .zip(f)
            .map(|(&a, &b)| self.weight(a, b) * self.generator.bregman_unchecked(a, b))
            .collect()
    }

    /// Midpoint value of the divergence for node arrays on a common grid.
    pub fn divergence_values(&self, g: &[f64], f: &[f64]) -> f64 {
        debug_assert_eq!(g.len(), f.len());
        let s = neumaier_sum(
            g.iter()
                .zip(f)
                .map(|(&a, &b)| self.weight(a, b) * self.generator.bregman_unchecked(a, b)),
        );
        s / g.len() as f64
    }
}

/// α-BW divergence from `g1` to `g2`.
pub fn alpha_bw(spec: &DivergenceSpec, g1: &QuantileGrid, g2: &QuantileGrid) -> Result<f64> {
    if g1.len() != g2.len() {
        return Err(AbwError::GridMismatch {
            expected: g2.len(),
            got: g1.len(),
        });
    }
    let lo = spec.generator.domain_min();
    if g1.values().iter().chain(g2.values()).any(|&v| v < lo) {
        return Err(AbwError::Domain("quantile values fall outside the generator domain".into()));
    }
    Ok(spec.divergence_values(g1.values(), g2.values()))
}

/// `min{F(u) + gap, F(½)} + max{F(u) − F(½) − gap, 0}`: beats the benchmark
/// by `gap` in the lower part, trails it by `gap` in the upper part, and is
/// flat in between.
pub fn modified_benchmark_with_gap(m: &MarketParams, grid: &UGrid, gap: f64) -> QuantileGrid {
    let median = m.benchmark_quantile_at_score(0.0);
    let vals = grid
        .normal_scores()
        .iter()
        .map(|&z| {
            let f = m.benchmark_quantile_at_score(z);
            (f + gap).min(median) + (f - median - gap).max(0.0)
        })
        .collect();
    QuantileGrid::from_nearly_monotone(vals)
}

pub fn modified_benchmark(m: &MarketParams, grid: &UGrid) -> QuantileGrid {
    modified_benchmark_with_gap(m, grid, 0.1)
}
