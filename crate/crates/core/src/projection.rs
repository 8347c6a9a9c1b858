//! L² projections onto monotone cones by pool-adjacent-violators.

use crate::grid::QuantileGrid;

/// Non-decreasing least-squares fit with uniform weights.
///
/// Stack-based PAVA: each block keeps its sum and length, and a new block is
/// merged into its predecessor while the predecessor's mean is strictly
/// larger. Runs in linear time.
pub fn isotonic(values: &[f64]) -> Vec<f64> {
    let mut sums: Vec<f64> = Vec::with_capacity(values.len());
    let mut lens: Vec<usize> = Vec::with_capacity(values.len());
    for &v in values {
        let mut sum = v;
        let mut len = 1usize;
        while let (Some(&ps), Some(&pl)) = (sums.last(), lens.last()) {
            if ps / pl as f64 > sum / len as f64 {
                sum += ps;
                len += pl;
                sums.pop();
                lens.pop();
            } else {
                break;
            }
        }
        sums.push(sum);
        lens.push(len);
    }
    let mut out = Vec::with_capacity(values.len());
    for (s, l) in sums.iter().zip(&lens) {
        let mean = s / *l as f64;
        out.extend(std::iter::repeat_n(mean, *l));
    }
    out
}

/// Non-increasing least-squares fit, defined as `−isotonic(−ℓ)`.
pub fn antitonic(values: &[f64]) -> Vec<f64> {
    let neg: Vec<f64> = values.iter().map(|v| -v).collect();
    isotonic(&neg).into_iter().map(|v| -v).collect()
}

pub fn is_non_decreasing(values: &[f64]) -> bool {
    values.windows(2).all(|w| w[0] <= w[1])
}

/// Applies a non-decreasing scalar map to the isotonic projection of
/// `values`, producing a quantile function.
pub fn project_through<F: Fn(f64) -> f64>(g_inv: F, values: &[f64]) -> QuantileGrid {
    let out: Vec<f64> = isotonic(values).into_iter().map(g_inv).collect();
    QuantileGrid::from_nearly_monotone(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::divergence::BregmanGenerator;

    #[test]
    fn spec_cases() {
        assert_eq!(isotonic(&[1.0, 2.0, 3.0]), vec![1.0, 2.0, 3.0]);
        assert_eq!(isotonic(&[2.0, 1.0]), vec![1.5, 1.5]);
        assert_eq!(isotonic(&[3.0, 1.0, 2.0]), vec![2.0, 2.0, 2.0]);
        assert_eq!(antitonic(&[3.0, 2.0, 1.0]), vec![3.0, 2.0, 1.0]);
        assert_eq!(antitonic(&[1.0, 2.0]), vec![1.5, 1.5]);
        assert!(isotonic(&[]).is_empty());
    }

    #[test]
    fn project_through_identity_and_gradient() {
        let v = [3.0, 1.0, 2.0, 5.0];
        assert_eq!(project_through(|x| x, &v).values(), isotonic(&v).as_slice());
        let f = [1.0, 1.5, 4.0, 9.0];
        let twice: Vec<f64> = f.iter().map(|x| 2.0 * x).collect();
        let g = BregmanGenerator::power(2.0).unwrap();
        assert_eq!(project_through(|y| g.grad_inverse(y), &twice).values(), &f);
    }
}
