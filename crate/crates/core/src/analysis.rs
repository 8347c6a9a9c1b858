//! Evaluation of quantile functions: objective, cost, densities and
//! performance statistics of terminal wealth.

use crate::error::{AbwError, Result};
use crate::grid::{neumaier_sum, LognormalTail, QuantileGrid};
use crate::preferences::Utility;
use crate::solver::Problem;

/// `∫ U(g − c F̆_Y) du` by the midpoint rule; `−∞` if `g` dips below the
/// floor anywhere.
pub fn expected_utility(util: &Utility, g: &[f64], c: f64, benchmark: &[f64]) -> f64 {
    debug_assert_eq!(g.len(), benchmark.len());
    let mut total = Vec::with_capacity(g.len());
    for (&x, &f) in g.iter().zip(benchmark) {
        let v = util.u(x - c * f);
        if v == f64::NEG_INFINITY {
            return f64::NEG_INFINITY;
        }
        total.push(v);
    }
    neumaier_sum(total) / g.len() as f64
}

/// `∫ g ξ du`.
pub fn cost(g: &[f64], xi: &[f64]) -> Result<f64> {
    if g.len() != xi.len() {
        return Err(AbwError::GridMismatch {
            expected: xi.len(),
            got: g.len(),
        });
    }
    Ok(neumaier_sum(g.iter().zip(xi).map(|(a, b)| a * b)) / g.len() as f64)
}

/// Density cap used where the quantile function is flat.
pub const DENSITY_CAP: f64 = 1e6;

#[derive(Debug, Clone, PartialEq)]
pub struct DensityCurve {
    /// `(x, pdf(x))` at the requested support points.
    pub points: Vec<(f64, f64)>,
    pub cap: f64,
    /// Number of grid nodes whose density hit the cap.
    pub capped_nodes: usize,
}

/// Density of the law with quantile function `g`: `Δu / Δg` by centred
/// differences at the nodes, interpolated linearly in `x` and zero outside
/// `[g(u₁), g(u_n)]`.
pub fn density_curve(g: &QuantileGrid, support: &[f64]) -> DensityCurve {
    let v = g.values();
    let n = v.len();
    let h = 1.0 / n as f64;
    let mut capped = 0;
    let node_pdf: Vec<f64> = (0..n)
        .map(|i| {
            if n < 2 {
                return DENSITY_CAP;
            }
            let (a, b) = if i == 0 {
                (0, 1)
            } else if i == n - 1 {
                (n - 2, n - 1)
            } else {
                (i - 1, i + 1)
            };
            let du = (b - a) as f64 * h;
            let dg = v[b] - v[a];
            let d = du / dg;
            if dg <= 0.0 || d > DENSITY_CAP {
                capped += 1;
                DENSITY_CAP
            } else {
                d
            }
        })
        .collect();
    let points = support
        .iter()
        .map(|&x| {
            if n == 0 || x < v[0] || x > v[n - 1] {
                return (x, 0.0);
            }
            let j = v.partition_point(|&t| t <= x);
            // several nodes at exactly x: an atom
            if j >= 2 && v[j - 2] == x {
                return (x, DENSITY_CAP);
            }
            if j == 0 {
                return (x, node_pdf[0]);
            }
            if j >= n {
                return (x, node_pdf[n - 1]);
            }
            let (x0, x1) = (v[j - 1], v[j]);
            let w = if x1 > x0 { (x - x0) / (x1 - x0) } else { 0.5 };
            (x, node_pdf[j - 1] * (1.0 - w) + node_pdf[j] * w)
        })
        .collect();
    DensityCurve {
        points,
        cap: DENSITY_CAP,
        capped_nodes: capped,
    }
}

/// First point where `g` passes from below `f` to at or above it, as
/// `(u, f(u))` with linear interpolation between nodes.
pub fn crossing_point(g: &[f64], f: &[f64]) -> Option<(f64, f64)> {
    let n = g.len().min(f.len());
    let h = 1.0 / n as f64;
    let d = |i: usize| g[i] - f[i];
    let mut below = false;
    for i in 0..n {
        let di = d(i);
        if di < 0.0 {
            below = true;
        } else if below {
            let dp = d(i - 1);
            let w = dp / (dp - di);
            let u = (i as f64 - 0.5 + w) * h;
            return Some((u, f[i - 1] + w * (f[i] - f[i - 1])));
        }
    }
    None
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StatLevels {
    pub var: f64,
    pub es: f64,
    pub ute: f64,
}

impl Default for StatLevels {
    fn default() -> Self {
        Self {
            var: 0.05,
            es: 0.05,
            ute: 0.9,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StatsReport {
    pub expected_utility: f64,
    pub cost: f64,
    pub abw: f64,
    /// Gain-loss ratio against the benchmark's normalised mean; `+∞` when
    /// there are no losses (then `glr_degenerate` is set).
    pub glr: f64,
    pub glr_degenerate: bool,
    pub mean: f64,
    pub std_dev: f64,
    pub var_level: f64,
    /// `VaR_β = −g(β)`, in wealth units (negative for positive wealth).
    pub var: f64,
    pub es_level: f64,
    /// `ES_β = −(1/β) ∫₀^β g`.
    pub es: f64,
    pub ute_level: f64,
    /// `UTE_β = (1/(1−β)) ∫_β^1 g`.
    pub ute: f64,
    /// Whether the closed-form lognormal tail was used for the end cells.
    pub tail_corrected: bool,
    /// For grids without a closed-form tail: estimated mean mass missed by
    /// the last midpoint cell (lognormal extrapolation of the last two
    /// nodes). Not added to `mean`.
    pub tail_residual: f64,
}

/// Integral of `g^k` over `[a, b] ⊂ [0, 1]`, treating each cell as constant
/// at its midpoint value except end cells covered by a closed-form tail.
fn partial_integral(v: &[f64], a: f64, b: f64, k: i32, tail: Option<&LognormalTail>) -> f64 {
    let n = v.len();
    let h = 1.0 / n as f64;
    let first = ((a * n as f64).floor() as usize).min(n);
    let last = ((b * n as f64).ceil() as usize).min(n);
    let terms = (first..last).map(|i| {
        let lo = (i as f64 * h).max(a);
        let hi = ((i + 1) as f64 * h).min(b);
        if hi <= lo {
            return 0.0;
        }
        let full = hi - lo >= h * (1.0 - 1e-9);
        match tail {
            Some(t) if full && (i == 0 || i == n - 1) => t.partial_moment(i as f64 * h, (i + 1) as f64 * h, k as f64),
            _ => v[i].powi(k) * (hi - lo),
        }
    });
    neumaier_sum(terms)
}

/// Risk and performance statistics of the terminal wealth with quantile `g`.
pub fn stats(g: &QuantileGrid, problem: &Problem, levels: StatLevels) -> StatsReport {
    let v = g.values();
    let n = v.len();
    let h = 1.0 / n as f64;
    let tail = g.tail();
    let mean = partial_integral(v, 0.0, 1.0, 1, tail);
    let second = partial_integral(v, 0.0, 1.0, 2, tail);
    let std_dev = (second - mean * mean).max(0.0).sqrt();

    let var = -g.eval(levels.var);
    let es = -partial_integral(v, 0.0, levels.es, 1, tail) / levels.es;
    let ute = partial_integral(v, levels.ute, 1.0, 1, tail) / (1.0 - levels.ute);

    let x0 = problem.cost(v);
    let reference = problem.market.benchmark_mean / problem.market.benchmark_cost;
    let mut gains = neumaier_sum(v.iter().map(|&x| (x / x0 - reference).max(0.0))) * h;
    let mut losses = neumaier_sum(v.iter().map(|&x| (reference - x / x0).max(0.0))) * h;
    if let Some(t) = tail {
        if v[n - 1] / x0 > reference {
            gains += (t.partial_moment(1.0 - h, 1.0, 1.0) - v[n - 1] * h) / x0;
        }
        if v[0] / x0 < reference {
            losses -= (t.partial_moment(0.0, h, 1.0) - v[0] * h) / x0;
        }
    }
    let (glr, glr_degenerate) = if losses > 0.0 {
        (gains / losses, false)
    } else {
        (f64::INFINITY, true)
    };

    let tail_residual = if tail.is_none() && n >= 2 && v[n - 2] > 0.0 && v[n - 1] > v[n - 2] {
        let z = problem.grid().normal_scores();
        let s = (v[n - 1].ln() - v[n - 2].ln()) / (z[n - 1] - z[n - 2]);
        let fit = LognormalTail {
            log_mean: v[n - 1].ln() - s * z[n - 1],
            log_sd: s,
        };
        fit.partial_moment(1.0 - h, 1.0, 1.0) - v[n - 1] * h
    } else {
        0.0
    };

    StatsReport {
        expected_utility: problem.expected_utility(v),
        cost: x0,
        abw: problem.abw(v),
        glr,
        glr_degenerate,
        mean,
        std_dev,
        var_level: levels.var,
        var,
        es_level: levels.es,
        es,
        ute_level: levels.ute,
        ute,
        tail_corrected: tail.is_some(),
        tail_residual,
    }
}

#[cfg(test)]
mod tests {
    #[test]
    fn crossing_interpolates() {
        let f = [1.0, 2.0, 3.0, 4.0];
        let g = [1.5, 1.5, 3.5, 5.0];
        let (u, x) = super::crossing_point(&g, &f).unwrap();
        assert!((u - 0.5).abs() < 1e-12);
        assert!((x - 2.5).abs() < 1e-12);
        assert!(super::crossing_point(&f, &f).is_none());
    }

    use super::*;
    use crate::solver::ProblemSpec;

    fn problem(n: usize) -> Problem {
        Problem::new(&ProblemSpec::illustration(2.0, 0.25).unwrap().with_grid(n)).unwrap()
    }

    #[test]
    fn benchmark_expected_utility() {
        let p = problem(100_000);
        let eu = expected_utility(&p.utility, p.benchmark(), 0.9, p.benchmark());
        assert!((eu - 1.587).abs() < 0.01 * 1.587, "{eu}");
        let floor: Vec<f64> = p.benchmark().iter().map(|f| 0.9 * f).collect();
        assert_eq!(expected_utility(&p.utility, &floor, 0.9, p.benchmark()), 0.0);
        let mut below = floor.clone();
        below[7] -= 1e-9;
        assert_eq!(expected_utility(&p.utility, &below, 0.9, p.benchmark()), f64::NEG_INFINITY);
    }

    #[test]
    fn cost_identities() {
        let p = problem(100_000);
        let xi = &p.market.xi;
        assert!((cost(p.benchmark(), xi).unwrap() - 1.0).abs() < 1e-4);
        let ones = vec![1.0; xi.len()];
        assert!((cost(&ones, xi).unwrap() - (-1f64).exp()).abs() < 1e-6);
        assert!(cost(&ones[1..], xi).is_err());
    }

    #[test]
    fn densities_of_simple_quantiles() {
        let n = 1000;
        let u: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
        let uni = QuantileGrid::new(u.clone()).unwrap();
        let affine = QuantileGrid::new(u.iter().map(|x| 2.0 + 4.0 * x).collect()).unwrap();
        let d = density_curve(&uni, &[0.1, 0.5, 0.9]);
        assert!(d.points.iter().all(|p| (p.1 - 1.0).abs() < 1e-9));
        let d = density_curve(&affine, &[2.5, 4.0, 5.5]);
        assert!(d.points.iter().all(|p| (p.1 - 0.25).abs() < 1e-9));
        assert_eq!(density_curve(&affine, &[1.0, 7.0]).points, vec![(1.0, 0.0), (7.0, 0.0)]);
        let flat = QuantileGrid::new(vec![1.0, 1.0, 1.0, 2.0]).unwrap();
        let d = density_curve(&flat, &[1.0]);
        assert!(d.capped_nodes > 0 && d.points[0].1 <= DENSITY_CAP);
    }

    #[test]
    fn constant_grid_stats() {
        let p = problem(100);
        let g = QuantileGrid::new(vec![3.0; 100]).unwrap();
        let s = stats(&g, &p, StatLevels::default());
        assert!(s.std_dev < 1e-6);
        assert!((s.var + 3.0).abs() < 1e-12);
        assert!((s.es + 3.0).abs() < 1e-12);
        assert!((s.ute - 3.0).abs() < 1e-12);
    }
}
