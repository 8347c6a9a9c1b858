//! Active portfolio choice with a budget and an α-Bregman-Wasserstein
//! divergence constraint, solved in quantile space.
//!
//! An investor maximises `E[U(X − c·Y)]` over terminal wealth `X`, where `Y`
//! is a benchmark's terminal wealth, subject to an initial budget and to `X`
//! staying within an α-BW divergence `ε` of `Y` in distribution. In a market
//! with deterministic coefficients the problem reduces to choosing a
//! non-decreasing quantile function on `(0, 1)`.
//!
//! ```no_run
//! use abw_portfolio::solver::{solve, ProblemSpec};
//!
//! let spec = ProblemSpec::illustration(2.0, 0.25)?;
//! let result = solve(&spec)?;
//! let achieved = result.achieved.unwrap();
//! println!("{}: cost {:.4}, divergence {:.4}", result.regime, achieved.cost, achieved.abw);
//! # Ok::<(), abw_portfolio::AbwError>(())
//! ```

pub mod analysis;
pub mod divergence;
pub mod error;
pub mod experiment;
pub mod grid;
pub mod market;
pub mod normal;
pub mod preferences;
pub mod projection;
pub mod solver;

pub use error::{AbwError, Result};
pub use grid::{QuantileGrid, UGrid};
pub use market::MarketParams;
