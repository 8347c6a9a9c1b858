//! The shared probability-level grid and quantile functions sampled on it.

use crate::error::{AbwError, Result};
use crate::normal;

/// Midpoint grid on `(0, 1)`: `u_i = (i + 1/2) / n` for `i = 0..n`.
///
/// Every quantile function in the crate lives on one of these; integrals
/// over `(0, 1)` are midpoint sums, which never touch the singular endpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct UGrid {
    u: Vec<f64>,
    z: Vec<f64>,
}

impl UGrid {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(AbwError::Domain("grid size must be positive".into()));
        }
        let h = 1.0 / n as f64;
        let u: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) * h).collect();
        let z = u.iter().map(|&p| normal::quantile(p)).collect();
        Ok(Self { u, z })
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    pub fn cell_width(&self) -> f64 {
        1.0 / self.u.len() as f64
    }

    /// Probability levels of the nodes.
    pub fn nodes(&self) -> &[f64] {
        &self.u
    }

    /// Standard normal scores `Φ⁻¹(u_i)` of the nodes.
    pub fn normal_scores(&self) -> &[f64] {
        &self.z
    }

    /// Midpoint rule for `∫₀¹ f(u) du` given node values.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        debug_assert_eq!(values.len(), self.len());
        neumaier_sum(values.iter().copied()) * self.cell_width()
    }

    /// Midpoint rule for `∫₀¹ f(u) g(u) du`.
    pub fn integrate_product(&self, f: &[f64], g: &[f64]) -> f64 {
        debug_assert_eq!(f.len(), g.len());
        neumaier_sum(f.iter().zip(g).map(|(a, b)| a * b)) * self.cell_width()
    }

    pub fn check_len(&self, len: usize) -> Result<()> {
        if len != self.len() {
            return Err(AbwError::GridMismatch {
                expected: self.len(),
                got: len,
            });
        }
        Ok(())
    }
}

/// Compensated summation in index order.
pub fn neumaier_sum<I: IntoIterator<Item = f64>>(it: I) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for x in it {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Closed-form lognormal law attached to a grid that was sampled from
/// `exp(log_mean + log_sd · Φ⁻¹(u))`. Used to integrate the two end cells
/// exactly, where the midpoint value misses the unbounded tail.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LognormalTail {
    pub log_mean: f64,
    pub log_sd: f64,
}

impl LognormalTail {
    /// `∫_a^b Q(u)^k du` for `Q(u) = exp(m + s Φ⁻¹(u))`.
    pub fn partial_moment(&self, a: f64, b: f64, k: f64) -> f64 {
        let (m, s) = (self.log_mean, self.log_sd);
        let za = normal::quantile(a);
        let zb = normal::quantile(b);
        (k * m + 0.5 * k * k * s * s).exp() * (normal::cdf(zb - k * s) - normal::cdf(za - k * s))
    }

    pub fn quantile(&self, u: f64) -> f64 {
        (self.log_mean + self.log_sd * normal::quantile(u)).exp()
    }
}

/// A quantile function sampled on a [`UGrid`]: finite and non-decreasing.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantileGrid {
    values: Vec<f64>,
    tail: Option<LognormalTail>,
}

impl QuantileGrid {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(AbwError::Domain(format!("non-finite quantile value at node {i}")));
        }
        if let Some(i) = values.windows(2).position(|w| w[1] < w[0]) {
            return Err(AbwError::Domain(format!(
                "quantile values decrease at node {}: {} > {}",
                i + 1,
                values[i],
                values[i + 1]
            )));
        }
        Ok(Self { values, tail: None })
    }

    /// Builds a grid from values that are monotone up to rounding, removing
    /// any residual decrease with a running maximum.
    pub(crate) fn from_nearly_monotone(mut values: Vec<f64>) -> Self {
        for i in 1..values.len() {
            if values[i] < values[i - 1] {
                values[i] = values[i - 1];
            }
        }
        Self { values, tail: None }
    }

    pub(crate) fn with_tail(mut self, tail: LognormalTail) -> Self {
        self.tail = Some(tail);
        self
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Lognormal law the grid was sampled from, if any.
    pub fn tail(&self) -> Option<&LognormalTail> {
        self.tail.as_ref()
    }

    /// Value at probability level `u` by linear interpolation between nodes,
    /// held constant beyond the outermost nodes.
    pub fn eval(&self, u: f64) -> f64 {
        let n = self.values.len();
        let pos = u * n as f64 - 0.5;
        if pos <= 0.0 {
            return self.values[0];
        }
        let i = pos.floor() as usize;
        if i + 1 >= n {
            return self.values[n - 1];
        }
        let w = pos - i as f64;
        self.values[i] * (1.0 - w) + self.values[i + 1] * w
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nodes_are_cell_midpoints() {
        let g = UGrid::new(4).unwrap();
        assert_eq!(g.nodes(), &[0.125, 0.375, 0.625, 0.875]);
        assert_eq!(g.normal_scores()[1], -g.normal_scores()[2]);
    }

    #[test]
    fn midpoint_rule_is_exact_for_affine() {
        let g = UGrid::new(10).unwrap();
        let vals: Vec<f64> = g.nodes().iter().map(|u| 3.0 * u + 1.0).collect();
        assert!((g.integrate(&vals) - 2.5).abs() < 1e-15);
    }

    #[test]
    fn rejects_decreasing_and_nonfinite() {
        assert!(QuantileGrid::new(vec![1.0, 0.5]).is_err());
        assert!(QuantileGrid::new(vec![1.0, f64::NAN]).is_err());
        assert!(QuantileGrid::new(vec![1.0, 1.0, 2.0]).is_ok());
        assert!(UGrid::new(0).is_err());
    }

    #[test]
    fn lognormal_partial_moments_sum_to_full() {
        let t = LognormalTail {
            log_mean: 1.68,
            log_sd: 0.8,
        };
        let full = t.partial_moment(0.0, 1.0, 1.0);
        assert!((full - 2f64.exp()).abs() < 1e-12);
        let split = t.partial_moment(0.0, 0.3, 1.0) + t.partial_moment(0.3, 1.0, 1.0);
        assert!((split - full).abs() < 1e-12);
    }

    #[test]
    fn eval_interpolates() {
        let q = QuantileGrid::new(vec![1.0, 2.0, 4.0, 8.0]).unwrap();
        assert_eq!(q.eval(0.125), 1.0);
        assert_eq!(q.eval(0.5), 3.0);
        assert_eq!(q.eval(0.99), 8.0);
        assert_eq!(q.eval(0.01), 1.0);
    }
}
