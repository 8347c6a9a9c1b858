//! Isotonic and antitonic projections by pool-adjacent-violators.

use abw_portfolio::projection::{antitonic, is_non_decreasing, isotonic};

fn main() {
    let x = [1.0, 3.0, 2.0, 4.0, 3.5, 3.0, 6.0];
    let up = isotonic(&x);
    println!("input      {x:?}");
    println!("isotonic   {up:?}  (non-decreasing: {})", is_non_decreasing(&up));
    println!("antitonic  {:?}", antitonic(&x));
    let sse: f64 = x.iter().zip(&up).map(|(a, b)| (a - b).powi(2)).sum();
    let mean_in: f64 = x.iter().sum::<f64>() / x.len() as f64;
    let mean_out: f64 = up.iter().sum::<f64>() / up.len() as f64;
    println!("squared distance {sse:.4}; mean preserved: {mean_in:.4} = {mean_out:.4}");
}
