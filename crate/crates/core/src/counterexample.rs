//! Initial data with `‖H‖_{Lᵖ} = 1` whose level-set areas grow without bound.
//!
//! A unit-area region of hyperbolic space splits into a small piece of area
//! `1/(2j)` with mean curvature `j^{1/p}` and a large piece with mean
//! curvature `(2 - 1/j)^{-1/p}`. Both pieces evolve as model geometries, so
//! for `p < n` the area at any fixed `t > 0` grows like `j^{n/p - 1}` while
//! the `Lᵖ` norm stays at one.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::congruence::{FlrwCell, GeneralizedFlrw, ScaleProfile};
use crate::error::{Error, Result};
use crate::initial_data::{Cell, Field, InitialDataSet};
use crate::integral_bounds::area_bound_jensen_lp;
use crate::model_geometry::growth_factor;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleInstance {
    pub j: u64,
    pub p: f64,
    pub n: u32,
    pub beta1: f64,
    pub beta2: f64,
    pub area1: f64,
    pub area2: f64,
}

impl CounterexampleInstance {
    /// Instance `j` of the family for exponent `1 ≤ p < n`.
    pub fn build(j: u64, p: f64, n: u32) -> Result<Self> {
        if !(p >= 1.0 && p < f64::from(n)) {
            return Err(Error::domain(format!(
                "exponent p = {p} must satisfy 1 <= p < n = {n}"
            )));
        }
        Self::unchecked(j, p, n)
    }

    /// The same construction at `p = n`, where the convexity bound does hold.
    pub fn critical(j: u64, n: u32) -> Result<Self> {
        Self::unchecked(j, f64::from(n), n)
    }

    fn unchecked(j: u64, p: f64, n: u32) -> Result<Self> {
        if j == 0 {
            return Err(Error::domain("index j must be >= 1"));
        }
        if n < 2 {
            return Err(Error::domain(format!(
                "dimension n = {n} must be at least 2"
            )));
        }
        let jf = j as f64;
        Ok(Self {
            j,
            p,
            n,
            beta1: jf.powf(1.0 / p),
            beta2: (1.0 / (2.0 - 1.0 / jf)).powf(1.0 / p),
            area1: 1.0 / (2.0 * jf),
            area2: 1.0 - 1.0 / (2.0 * jf),
        })
    }

    /// The two-cell initial data set.
    pub fn initial_data(&self) -> Result<InitialDataSet> {
        InitialDataSet::new(
            self.n,
            vec![
                Cell::new("A1", self.area1, self.beta1),
                Cell::new("A2", self.area2, self.beta2),
            ],
            format!("counterexample j={} p={}", self.j, self.p),
        )
    }

    /// Two model cells with scale factors `t + n/β`, weighted so that the
    /// slice `t = 0` reproduces [`Self::initial_data`].
    pub fn spacetime(&self) -> Result<GeneralizedFlrw> {
        let nf = f64::from(self.n);
        let cell = |id: &str, area: f64, beta: f64| {
            FlrwCell::new(
                id,
                area * (beta / nf).powi(self.n as i32),
                ScaleProfile::model(self.n, beta),
            )
        };
        GeneralizedFlrw::new(
            self.n,
            vec![
                cell("A1", self.area1, self.beta1),
                cell("A2", self.area2, self.beta2),
            ],
        )
    }

    /// `‖H‖_{Lᵖ}` over the two cells.
    pub fn lp_norm(&self) -> Result<f64> {
        self.initial_data()?.lp_norm(Field::MeanCurvature, self.p)
    }

    /// `|S_t| = |A₁|(β₁t/n + 1)ⁿ + |A₂|(β₂t/n + 1)ⁿ`.
    pub fn area(&self, t: f64) -> Result<f64> {
        if !(t.is_finite() && t >= 0.0) {
            return Err(Error::domain(format!(
                "time t = {t} must be finite and >= 0"
            )));
        }
        Ok(self.area1 * growth_factor(self.beta1, self.n, t)
            + self.area2 * growth_factor(self.beta2, self.n, t))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DivergenceRow {
    pub j: u64,
    pub area: f64,
    pub bound: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DivergenceReport {
    pub p: f64,
    pub n: u32,
    pub t: f64,
    pub rows: Vec<DivergenceRow>,
    /// First `j` whose area exceeds the bound.
    pub first_violation: Option<u64>,
    /// Ratios increase strictly from the first violation on.
    pub increasing: bool,
    /// Least-squares slope of `log area` against `log j`, when at least two
    /// distinct `j` are present.
    pub growth_slope: Option<f64>,
}

impl DivergenceReport {
    /// `j,area,bound,ratio` rows.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut writer = csv::Writer::from_writer(out);
        writer.write_record(["j", "area", "bound", "ratio"])?;
        for r in &self.rows {
            writer.write_record([
                r.j.to_string(),
                r.area.to_string(),
                r.bound.to_string(),
                r.ratio.to_string(),
            ])?;
        }
        writer.flush()?;
        Ok(())
    }
}

/// Compares the area of each instance with the would-be `Lᵖ` convexity bound
/// `2ⁿ⁻¹((t/n)ⁿ ‖H‖ⁿ_{Lᵖ} + |A|)`.
pub fn divergence_report(p: f64, n: u32, t: f64, js: &[u64]) -> Result<DivergenceReport> {
    if js.is_empty() {
        return Err(Error::domain("j list must not be empty"));
    }
    let rows = js
        .iter()
        .map(|&j| {
            let inst = CounterexampleInstance::build(j, p, n)?;
            let area = inst.area(t)?;
            let bound = area_bound_jensen_lp(&inst.initial_data()?, t, p)?;
            Ok(DivergenceRow {
                j,
                area,
                bound,
                ratio: area / bound,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let first = rows.iter().position(|r| r.ratio > 1.0);
    let increasing = match first {
        Some(i) => rows[i..].windows(2).all(|w| w[1].ratio > w[0].ratio),
        None => false,
    };
    let points: Vec<(f64, f64)> = rows.iter().map(|r| (r.j as f64, r.area)).collect();
    Ok(DivergenceReport {
        p,
        n,
        t,
        first_violation: first.map(|i| rows[i].j),
        increasing,
        growth_slope: growth_slope(&points),
        rows,
    })
}

/// Least-squares slope of `log y` against `log x`.
pub fn growth_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.iter().any(|&(x, y)| !(x > 0.0 && y > 0.0)) {
        return None;
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let len = logs.len() as f64;
    let mx = logs.iter().map(|l| l.0).sum::<f64>() / len;
    let my = logs.iter().map(|l| l.1).sum::<f64>() / len;
    let sxx: f64 = logs.iter().map(|l| (l.0 - mx).powi(2)).sum();
    let sxy: f64 = logs.iter().map(|l| (l.0 - mx) * (l.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}
