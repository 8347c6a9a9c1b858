//! Configured experiments: TOML case matrices, CSV and SVG artifacts.

pub mod config;
mod figure1;
pub mod format;
mod runner;
pub mod svg;

pub use config::{Case, Format, RunConfig, SolutionKind};
pub use figure1::{figure1_data, write_figure1, Figure1Data, IntegrandCurve, ALPHAS, ALPHA_PANELS, PANEL_A_EXPONENTS};
pub use runner::{describe_cases, evaluate_case, run, CaseOutcome, RunOptions, RunReport, SUMMARY_HEADER};
