//! Integrand of the α-BW divergence between the benchmark and its
//! modified version that stays 0.1 away from it except around the median.

use std::fs;
use std::path::{Path, PathBuf};

use super::format::{num, CsvFile};
use super::svg::{Plot, Series};
use crate::divergence::{modified_benchmark, BregmanGenerator, DivergenceSpec};
use crate::error::Result;
use crate::grid::UGrid;
use crate::market::MarketParams;

/// Exponents of the panel comparing generators at `α = ½`.
pub const PANEL_A_EXPONENTS: [f64; 5] = [1.6, 1.8, 2.0, 2.2, 2.4];
/// `(panel, p)` of the panels comparing asymmetry levels.
pub const ALPHA_PANELS: [(&str, f64); 3] = [("b", 1.6), ("c", 2.0), ("d", 2.4)];
pub const ALPHAS: [f64; 3] = [0.01, 0.25, 0.5];

#[derive(Debug, Clone)]
pub struct IntegrandCurve {
    pub panel: &'static str,
    pub p: f64,
    pub alpha: f64,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct Figure1Data {
    pub u: Vec<f64>,
    pub benchmark: Vec<f64>,
    pub modified: Vec<f64>,
    pub curves: Vec<IntegrandCurve>,
}

impl Figure1Data {
    pub fn curve(&self, panel: &str, p: f64, alpha: f64) -> Option<&IntegrandCurve> {
        self.curves
            .iter()
            .find(|c| c.panel == panel && c.p == p && c.alpha == alpha)
    }
}

/// Integrand values on an `n`-point midpoint grid for every panel.
pub fn figure1_data(market: &MarketParams, n: usize) -> Result<Figure1Data> {
    market.validate()?;
    let grid = UGrid::new(n)?;
    let benchmark: Vec<f64> = grid
        .normal_scores()
        .iter()
        .map(|&z| market.benchmark_quantile_at_score(z))
        .collect();
    let modified = modified_benchmark(market, &grid).into_values();
    let mut curves = Vec::new();
    let mut push = |panel: &'static str, p: f64, alpha: f64| -> Result<()> {
        let spec = DivergenceSpec::new(alpha, 0.0, BregmanGenerator::power(p)?)?;
        curves.push(IntegrandCurve {
            panel,
            p,
            alpha,
            values: spec.integrand(&modified, &benchmark),
        });
        Ok(())
    };
    for p in PANEL_A_EXPONENTS {
        push("a", p, 0.5)?;
    }
    for (panel, p) in ALPHA_PANELS {
        for a in ALPHAS {
            push(panel, p, a)?;
        }
    }
    Ok(Figure1Data {
        u: grid.nodes().to_vec(),
        benchmark,
        modified,
        curves,
    })
}

/// Writes `figure1.csv` (long format) and one SVG per panel; returns the
/// written paths.
pub fn write_figure1(data: &Figure1Data, out_dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out_dir)?;
    let csv_path = out_dir.join("figure1.csv");
    let mut w = CsvFile::create(&csv_path, &["panel", "p", "alpha", "u", "benchmark", "modified", "integrand"])?;
    for c in &data.curves {
        for (i, v) in c.values.iter().enumerate() {
            w.row([
                c.panel.to_string(),
                num(c.p),
                num(c.alpha),
                num(data.u[i]),
                num(data.benchmark[i]),
                num(data.modified[i]),
                num(*v),
            ])?;
        }
    }
    w.finish()?;
    let mut written = vec![csv_path];
    for panel in ["a", "b", "c", "d"] {
        let mut plot = Plot {
            title: format!("Divergence integrand, panel {panel}"),
            x_label: "u".into(),
            y_label: "integrand".into(),
            ..Default::default()
        };
        for c in data.curves.iter().filter(|c| c.panel == panel) {
            plot.series.push(Series::new(
                format!("p={} alpha={}", c.p, c.alpha),
                data.u.iter().copied().zip(c.values.iter().copied()).collect(),
            ));
        }
        let path = out_dir.join(format!("figure1_{panel}.svg"));
        fs::write(&path, plot.render())?;
        written.push(path);
    }
    Ok(written)
}
