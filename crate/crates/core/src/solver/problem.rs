//! The discretised problem: benchmark, pricing weight and derived arrays on
//! a grid, plus the candidate family `Ğ^(β)_η` and its piecewise assembly.

use rayon::prelude::*;

use super::{ProblemSpec, Tolerances};
use crate::divergence::{BregmanGenerator, DivergenceSpec};
use crate::error::{AbwError, Result};
use crate::grid::{neumaier_sum, QuantileGrid, UGrid};
use crate::market::MarketGrid;
use crate::preferences::Utility;
use crate::projection::{antitonic, is_non_decreasing, isotonic};

/// Nodes per work unit. Each chunk warm-starts its root solves from its own
/// first node, so results do not depend on how chunks map to threads.
const CHUNK: usize = 2048;

/// A [`ProblemSpec`] sampled on its grid.
#[derive(Debug, Clone)]
pub struct Problem {
    pub utility: Utility,
    pub divergence: DivergenceSpec,
    pub budget: f64,
    pub proportion: f64,
    pub tolerances: Tolerances,
    pub market: MarketGrid,
    /// `c · F̆_Y`, the pointwise lower bound for finite utility.
    pub floor: Vec<f64>,
    /// `φ'(F̆_Y)`.
    pub grad_benchmark: Vec<f64>,
    /// `ξ↓`, the antitonic projection of the pricing weight (equal to `ξ`
    /// whenever `ξ` is already non-increasing).
    pub xi_decreasing: Vec<f64>,
}

/// A quantile array together with its two constraint values.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub values: Vec<f64>,
    pub cost: f64,
    pub abw: f64,
}

impl Problem {
    pub fn new(spec: &ProblemSpec) -> Result<Self> {
        spec.validate()?;
        let grid = UGrid::new(spec.grid_size)?;
        Self::on_grid(spec, &grid)
    }

    /// Same problem on a different grid (used for the coarse search).
    pub fn on_grid(spec: &ProblemSpec, grid: &UGrid) -> Result<Self> {
        let market = spec.market.discretize(grid)?;
        let lo = spec.divergence.generator.domain_min();
        if market.benchmark.iter().any(|&f| f < lo) {
            return Err(AbwError::Domain("benchmark quantile leaves the generator domain".into()));
        }
        let floor = market.benchmark.iter().map(|f| spec.proportion * f).collect();
        let grad_benchmark = market
            .benchmark
            .iter()
            .map(|&f| spec.divergence.generator.grad(f))
            .collect();
        let xi_decreasing = if market.xi_non_increasing {
            market.xi.clone()
        } else {
            antitonic(&market.xi)
        };
        Ok(Self {
            utility: spec.utility.clone(),
            divergence: spec.divergence.clone(),
            budget: spec.budget,
            proportion: spec.proportion,
            tolerances: spec.tolerances,
            market,
            floor,
            grad_benchmark,
            xi_decreasing,
        })
    }

    pub fn len(&self) -> usize {
        self.market.len()
    }

    pub fn is_empty(&self) -> bool {
        self.market.is_empty()
    }

    pub fn grid(&self) -> &UGrid {
        &self.market.grid
    }

    pub fn benchmark(&self) -> &[f64] {
        &self.market.benchmark
    }

    /// The benchmark as a quantile grid, carrying its closed-form tail when
    /// the market has one.
    pub fn benchmark_grid(&self) -> QuantileGrid {
        let q = QuantileGrid::from_nearly_monotone(self.market.benchmark.clone());
        match self.market.tail {
            Some(t) => q.with_tail(t),
            None => q,
        }
    }

    pub fn generator(&self) -> &BregmanGenerator {
        &self.divergence.generator
    }

    pub fn cost(&self, g: &[f64]) -> f64 {
        self.market.cost(g)
    }

    pub fn abw(&self, g: &[f64]) -> f64 {
        self.divergence.divergence_values(g, &self.market.benchmark)
    }

    /// Benchmark cost `y₀` evaluated on the grid.
    pub fn benchmark_cost(&self) -> f64 {
        self.cost(&self.market.benchmark)
    }

    /// `∫ U(g − c F̆_Y) du`; `−∞` as soon as one node is below the floor.
    pub fn expected_utility(&self, g: &[f64]) -> f64 {
        let mut bad = false;
        let s = neumaier_sum(g.iter().zip(&self.floor).map(|(&x, &f)| {
            let v = self.utility.u(x - f);
            if v == f64::NEG_INFINITY {
                bad = true;
                0.0
            } else {
                v
            }
        }));
        if bad {
            f64::NEG_INFINITY
        } else {
            s * self.grid().cell_width()
        }
    }

    pub fn evaluate(&self, values: Vec<f64>) -> Evaluation {
        Evaluation {
            cost: self.cost(&values),
            abw: self.abw(&values),
            values,
        }
    }

    /// `c F̆_Y + (U')⁻¹(λ ξ↓)`.
    pub fn budget_candidate(&self, lambda: f64) -> Vec<f64> {
        self.floor
            .iter()
            .zip(&self.xi_decreasing)
            .map(|(&f, &x)| f + self.utility.marginal_inverse_unchecked(lambda * x))
            .collect()
    }

    /// The inner function `[η₂ β φ'(F̆_Y) − η₁ ξ]↑`, projected only when it is
    /// not already non-decreasing. Returns the array and whether a projection
    /// was needed.
    pub fn candidate_inner(&self, eta1: f64, eta2: f64, beta: f64) -> (Vec<f64>, bool) {
        let k = eta2 * beta;
        let inner: Vec<f64> = self
            .grad_benchmark
            .iter()
            .zip(&self.market.xi)
            .map(|(&g, &x)| k * g - eta1 * x)
            .collect();
        if self.market.xi_non_increasing && is_non_decreasing(&inner) {
            (inner, false)
        } else {
            (isotonic(&inner), true)
        }
    }

    /// `Ğ^(β)_η = H̃_β⁻¹([η₂ β φ'(F̆_Y) − η₁ ξ]↑)` with
    /// `H̃_β(x) = −U'(x − c F̆_Y) + η₂ β φ'(x)` inverted node by node on
    /// `(c F̆_Y, ∞)`.
    pub fn candidate(&self, eta1: f64, eta2: f64, beta: f64) -> Vec<f64> {
        let (inner, _) = self.candidate_inner(eta1, eta2, beta);
        let k = eta2 * beta;
        let mut out = vec![0.0; inner.len()];
        out.par_chunks_mut(CHUNK).enumerate().for_each(|(c, chunk)| {
            let start = c * CHUNK;
            let mut guess = f64::NAN;
            for (j, o) in chunk.iter_mut().enumerate() {
                let i = start + j;
                let y = invert_node(&self.utility, self.generator(), k, inner[i], self.floor[i], guess);
                guess = y;
                *o = self.floor[i] + y;
            }
        });
        out
    }

    /// `α† = α` if `α > ½`, else `1 − α`.
    pub fn alpha_dagger(&self) -> f64 {
        let a = self.divergence.alpha;
        if a > 0.5 {
            a
        } else {
            1.0 - a
        }
    }

    /// Piecewise optimum: `Ğ^(α)` where `F̆_Y ≤ Ğ^(α†)`, `Ğ^(1−α)` elsewhere.
    /// The second array flags the nodes that used the `α` branch.
    pub fn assemble_with_branches(&self, eta1: f64, eta2: f64) -> (Vec<f64>, Vec<bool>) {
        let a = self.divergence.alpha;
        let ga = self.candidate(eta1, eta2, a);
        if a == 0.5 {
            let n = ga.len();
            return (ga, vec![true; n]);
        }
        let gb = self.candidate(eta1, eta2, 1.0 - a);
        let dagger = if a > 0.5 { &ga } else { &gb };
        let mut used_a = Vec::with_capacity(ga.len());
        let out = (0..ga.len())
            .map(|i| {
                let up = self.market.benchmark[i] <= dagger[i];
                used_a.push(up);
                if up {
                    ga[i]
                } else {
                    gb[i]
                }
            })
            .collect();
        (out, used_a)
    }

    pub fn assemble(&self, eta1: f64, eta2: f64) -> Vec<f64> {
        self.assemble_with_branches(eta1, eta2).0
    }

    pub fn evaluate_eta(&self, eta1: f64, eta2: f64) -> Evaluation {
        self.evaluate(self.assemble(eta1, eta2))
    }
}

/// Solves `−U'(y) + k φ'(f + y) = t` for `y > 0`, where `f` is the floor.
///
/// The left side is increasing in `y`. Dropping either term gives a bracket:
/// `U'(y) = k φ'(f + y) − t ≥ k φ'(f) − t` bounds `y` from above, and
/// `k φ'(f + y) > t` bounds it from below. Inside that bracket we take
/// safeguarded Newton steps in `ln y`, starting from the previous node's
/// root when one is available.
pub(crate) fn invert_node(util: &Utility, gen: &BregmanGenerator, k: f64, t: f64, f: f64, guess: f64) -> f64 {
    if k <= 0.0 {
        return if t < 0.0 {
            util.marginal_inverse_unchecked(-t)
        } else {
            f64::INFINITY
        };
    }
    let upper_rhs = k * gen.grad(f) - t;
    let mut hi = if upper_rhs > 0.0 {
        util.marginal_inverse_unchecked(upper_rhs).ln()
    } else {
        f64::INFINITY
    };
    let y_low = gen.grad_inverse(t / k) - f;
    let mut lo = if y_low > 0.0 { y_low.ln() } else { f64::NEG_INFINITY };
    if hi <= lo {
        // both bounds agree to rounding
        return hi.min(lo).exp();
    }
    let mut s = if guess > 0.0 && guess.is_finite() && guess.ln() > lo && guess.ln() < hi {
        guess.ln()
    } else {
        match (lo.is_finite(), hi.is_finite()) {
            (true, true) => 0.5 * (lo + hi),
            (true, false) => lo + 1.0,
            (false, true) => hi - 1.0,
            (false, false) => 0.0,
        }
    };
    for _ in 0..200 {
        let y = s.exp();
        let x = f + y;
        let m = util.marginal(y);
        let g = gen.grad(x);
        let h = -m + k * g - t;
        if h == 0.0 {
            return y;
        }
        if h > 0.0 {
            hi = s;
        } else {
            lo = s;
        }
        let scale = m + k * g.abs() + t.abs();
        if h.abs() <= 1e-15 * scale || hi - lo <= 1e-15 * s.abs().max(1.0) {
            return y;
        }
        let d = util.elasticity(y) * m + k * y * gen.hessian(x);
        let mut next = s - h / d;
        if !(next > lo && next < hi) {
            next = match (lo.is_finite(), hi.is_finite()) {
                (true, true) => 0.5 * (lo + hi),
                (true, false) => s.max(lo) + 2.0,
                (false, true) => s.min(hi) - 2.0,
                (false, false) => s + if h < 0.0 { 2.0 } else { -2.0 },
            };
        }
        if (next - s).abs() <= 1e-15 * s.abs().max(1.0) {
            return next.exp();
        }
        s = next;
    }
    s.exp()
}

impl Evaluation {
    pub fn into_quantile(self) -> QuantileGrid {
        QuantileGrid::from_nearly_monotone(self.values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn node_inversion_solves_equation() {
        let util = Utility::crra(0.5).unwrap();
        for p in [1.2, 1.6, 2.0, 2.4, 3.5] {
            let gen = BregmanGenerator::power(p).unwrap();
            for &(k, t, f) in &[(0.1, -3.0, 0.9), (2.0, 5.0, 4.0), (1e-6, -1e-3, 20.0), (0.3, 0.5, 0.0), (50.0, 1e4, 100.0)] {
                let y = invert_node(&util, &gen, k, t, f, f64::NAN);
                assert!(y > 0.0 && y.is_finite(), "p={p} k={k} t={t} f={f}: {y}");
                let h = -util.marginal(y) + k * gen.grad(f + y) - t;
                let scale = util.marginal(y) + k * gen.grad(f + y) + t.abs();
                assert!(h.abs() <= 1e-12 * scale, "p={p} k={k} t={t} f={f}: residual {h}");
                let warm = invert_node(&util, &gen, k, t, f, y * 1.7);
                assert!((warm - y).abs() <= 1e-12 * y);
            }
        }
    }

    #[test]
    fn zero_weight_reduces_to_marginal_inverse() {
        let util = Utility::crra(0.5).unwrap();
        let gen = BregmanGenerator::power(2.0).unwrap();
        assert_eq!(invert_node(&util, &gen, 0.0, -2.0, 1.0, f64::NAN), 0.25);
        assert_eq!(invert_node(&util, &gen, 0.0, 1.0, 1.0, f64::NAN), f64::INFINITY);
    }
}
