//! Spacetimes `-dt² + f(t, x)² h_c` with `f` constant in space on each
//! cell. The t-lines are normal geodesics of every slice, they never cross,
//! and the cosmological time of `(t, x)` is `t`, so level-set areas are
//! exact cell sums `Σ w f(t)ⁿ`.

use std::collections::HashSet;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::initial_data::{Cell, InitialDataSet};
use crate::model_geometry::ScaleJet;
use crate::numerics::{pairwise_sum, CubicSpline};

/// Threshold on `Ric(∂_t, ∂_t)` below which the energy condition is flagged.
pub const SEC_TOL: f64 = 1e-12;

/// Time profile of the warping function on one cell.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ScaleProfile {
    /// `f = intercept + slope·t`
    Linear { intercept: f64, slope: f64 },
    /// `f = scale·(1 + rate·t)^exponent`
    Power {
        scale: f64,
        rate: f64,
        exponent: f64,
    },
    /// Natural cubic spline through samples of `f`.
    Table {
        times: Vec<f64>,
        values: Vec<f64>,
        #[serde(skip)]
        spline: OnceLock<CubicSpline>,
    },
}

impl PartialEq for ScaleProfile {
    fn eq(&self, other: &Self) -> bool {
        use ScaleProfile::*;
        match (self, other) {
            (
                Linear {
                    intercept: a,
                    slope: b,
                },
                Linear {
                    intercept: c,
                    slope: d,
                },
            ) => a == c && b == d,
            (
                Power {
                    scale: a,
                    rate: b,
                    exponent: c,
                },
                Power {
                    scale: d,
                    rate: e,
                    exponent: f,
                },
            ) => a == d && b == e && c == f,
            (
                Table {
                    times: a,
                    values: b,
                    ..
                },
                Table {
                    times: c,
                    values: d,
                    ..
                },
            ) => a == c && b == d,
            _ => false,
        }
    }
}

impl ScaleProfile {
    pub fn linear(intercept: f64, slope: f64) -> Self {
        ScaleProfile::Linear { intercept, slope }
    }

    /// Profile of the model geometry with initial mean curvature `beta > 0`.
    pub fn model(n: u32, beta: f64) -> Self {
        ScaleProfile::Linear {
            intercept: f64::from(n) / beta,
            slope: 1.0,
        }
    }

    pub fn power(scale: f64, rate: f64, exponent: f64) -> Self {
        ScaleProfile::Power {
            scale,
            rate,
            exponent,
        }
    }

    pub fn table(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let profile = ScaleProfile::Table {
            times,
            values,
            spline: OnceLock::new(),
        };
        profile.validate()?;
        Ok(profile)
    }

    fn validate(&self) -> Result<()> {
        match self {
            ScaleProfile::Linear { intercept, slope } => {
                if !(intercept.is_finite() && slope.is_finite()) {
                    return Err(Error::domain("linear profile parameters must be finite"));
                }
            }
            ScaleProfile::Power {
                scale,
                rate,
                exponent,
            } => {
                if !(scale.is_finite() && rate.is_finite() && exponent.is_finite()) {
                    return Err(Error::domain("power profile parameters must be finite"));
                }
            }
            ScaleProfile::Table { times, values, .. } => {
                if CubicSpline::natural(times, values).is_none() {
                    return Err(Error::domain(
                        "table profile needs >= 2 finite samples with strictly increasing times",
                    ));
                }
            }
        }
        Ok(())
    }

    /// `f`, `∂_t f`, `∂²_t f` at time `t`.
    pub fn jet(&self, t: f64) -> Result<ScaleJet> {
        match self {
            ScaleProfile::Linear { intercept, slope } => {
                Ok(ScaleJet::new(intercept + slope * t, *slope, 0.0))
            }
            ScaleProfile::Power {
                scale,
                rate,
                exponent,
            } => {
                let base = 1.0 + rate * t;
                if !(base > 0.0) {
                    return Err(Error::DegenerateMetric(format!(
                        "power profile base 1 + rate·t = {base} at t = {t}"
                    )));
                }
                let f = scale * base.powf(*exponent);
                let d1 = scale * exponent * rate * base.powf(exponent - 1.0);
                let d2 =
                    scale * exponent * (exponent - 1.0) * rate * rate * base.powf(exponent - 2.0);
                Ok(ScaleJet::new(f, d1, d2))
            }
            ScaleProfile::Table {
                times,
                values,
                spline,
            } => {
                let spline = match spline.get() {
                    Some(s) => s,
                    None => {
                        let built = CubicSpline::natural(times, values)
                            .ok_or_else(|| Error::domain("invalid table profile"))?;
                        spline.get_or_init(|| built)
                    }
                };
                let (v, d1, d2) = spline.eval(t).ok_or_else(|| {
                    Error::domain(format!("table profile not defined at t = {t}"))
                })?;
                Ok(ScaleJet::new(v, d1, d2))
            }
        }
    }

    fn value(&self, t: f64) -> Result<f64> {
        Ok(self.jet(t)?.value)
    }

    /// Rejects `f ≤ 0` anywhere in `[0, t]` that the profile shape can reach.
    fn check_positive_until(&self, t: f64) -> Result<()> {
        let mut probes = vec![0.0, t];
        if let ScaleProfile::Table { times, .. } = self {
            probes.extend(times.iter().copied().filter(|&s| s > 0.0 && s < t));
        }
        for s in probes {
            let f = self.value(s)?;
            if !(f > 0.0) {
                return Err(Error::DegenerateMetric(format!(
                    "warping function f = {f} at t = {s}"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlrwCell {
    pub id: String,
    /// Measure of the cell in the reference fiber metric `h_c`.
    pub weight: f64,
    pub profile: ScaleProfile,
}

impl FlrwCell {
    pub fn new(id: impl Into<String>, weight: f64, profile: ScaleProfile) -> Self {
        Self {
            id: id.into(),
            weight,
            profile,
        }
    }
}

/// Cellwise warped product `-dt² + f(t, cell)² h_c`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneralizedFlrw {
    pub n: u32,
    pub cells: Vec<FlrwCell>,
}

/// Energy-condition verdict for one cell over a time grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SecVerdict {
    pub id: String,
    pub holds: bool,
    /// Smallest `Ric(∂_t, ∂_t) = -n f_tt / f` seen on the grid.
    pub min_ric: f64,
    /// First grid time where the condition failed.
    pub first_violation: Option<f64>,
}

impl GeneralizedFlrw {
    pub fn new(n: u32, cells: Vec<FlrwCell>) -> Result<Self> {
        let st = Self { n, cells };
        st.validate()?;
        Ok(st)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::domain(format!(
                "dimension n = {} must be at least 2",
                self.n
            )));
        }
        if self.cells.is_empty() {
            return Err(Error::domain("spacetime has no cells"));
        }
        let mut seen = HashSet::new();
        for cell in &self.cells {
            if !(cell.weight.is_finite() && cell.weight > 0.0) {
                return Err(Error::domain(format!(
                    "cell '{}': weight must be positive",
                    cell.id
                )));
            }
            if !seen.insert(cell.id.as_str()) {
                return Err(Error::domain(format!("duplicate cell id '{}'", cell.id)));
            }
            cell.profile.validate()?;
            cell.profile.check_positive_until(0.0)?;
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let st: Self = serde_json::from_str(text)?;
        st.validate()?;
        Ok(st)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    fn cell_area(&self, cell: &FlrwCell, t: f64) -> Result<f64> {
        cell.profile.check_positive_until(t)?;
        Ok(cell.weight * cell.profile.value(t)?.powi(self.n as i32))
    }

    /// Exact area of the level set `t` over the cells accepted by `select`.
    pub fn evolve_areas(&self, select: impl Fn(&FlrwCell) -> bool, t: f64) -> Result<f64> {
        if !(t.is_finite() && t >= 0.0) {
            return Err(Error::domain(format!(
                "time t = {t} must be finite and >= 0"
            )));
        }
        let terms = self
            .cells
            .iter()
            .filter(|c| select(c))
            .map(|c| self.cell_area(c, t))
            .collect::<Result<Vec<_>>>()?;
        Ok(pairwise_sum(&terms))
    }

    /// Exact area of the whole level set `t`.
    pub fn total_area(&self, t: f64) -> Result<f64> {
        self.evolve_areas(|_| true, t)
    }

    /// Initial data induced on the slice `t = 0`: cell area `w f(0)ⁿ` and
    /// mean curvature `n f_t(0) / f(0)`.
    pub fn induced_data(&self) -> Result<InitialDataSet> {
        let nf = f64::from(self.n);
        let cells = self
            .cells
            .iter()
            .map(|c| {
                let jet = c.profile.jet(0.0)?;
                Ok(Cell::new(
                    c.id.clone(),
                    c.weight * jet.value.powi(self.n as i32),
                    nf * jet.d1 / jet.value,
                ))
            })
            .collect::<Result<Vec<_>>>()?;
        InitialDataSet::new(self.n, cells, "induced")
    }

    /// Subset of cells, keeping the dimension.
    pub fn restrict(&self, select: impl Fn(&FlrwCell) -> bool) -> Self {
        Self {
            n: self.n,
            cells: self.cells.iter().filter(|c| select(c)).cloned().collect(),
        }
    }

    /// Flags every `(cell, t)` on the grid with `-n f_tt / f < -SEC_TOL`.
    pub fn sec_check(&self, t_grid: &[f64]) -> Result<Vec<SecVerdict>> {
        let nf = f64::from(self.n);
        self.cells
            .iter()
            .map(|cell| {
                let mut verdict = SecVerdict {
                    id: cell.id.clone(),
                    holds: true,
                    min_ric: f64::INFINITY,
                    first_violation: None,
                };
                for &t in t_grid {
                    let jet = cell.profile.jet(t)?;
                    if !(jet.value > 0.0) {
                        return Err(Error::DegenerateMetric(format!(
                            "cell '{}': f = {} at t = {t}",
                            cell.id, jet.value
                        )));
                    }
                    let ric = -nf * jet.d2 / jet.value;
                    verdict.min_ric = verdict.min_ric.min(ric);
                    if ric < -SEC_TOL && verdict.holds {
                        verdict.holds = false;
                        verdict.first_violation = Some(t);
                    }
                }
                Ok(verdict)
            })
            .collect()
    }

    pub fn satisfies_sec(&self, t_grid: &[f64]) -> Result<bool> {
        Ok(self.sec_check(t_grid)?.iter().all(|v| v.holds))
    }

    /// Largest initial positive mean curvature over all cells.
    pub fn max_initial_h_plus(&self) -> Result<f64> {
        Ok(self.induced_data()?.max_h_plus())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integral_bounds::area_bound_exact;
    use crate::model_geometry::ModelGeometry;

    fn grid(t_max: f64, count: usize) -> Vec<f64> {
        (0..=count)
            .map(|i| t_max * i as f64 / count as f64)
            .collect()
    }

    #[test]
    fn linear_profile_matches_model() {
        let st = GeneralizedFlrw::new(
            3,
            vec![
                FlrwCell::new("a", 0.5, ScaleProfile::linear(1.0, 1.0)),
                FlrwCell::new("b", 0.5, ScaleProfile::linear(1.0, 1.0)),
            ],
        )
        .unwrap();
        let oracle = ModelGeometry::new(3, 3.0).unwrap().area(1.0, 1.0).unwrap();
        assert_eq!(st.total_area(1.0).unwrap(), 8.0);
        assert_eq!(oracle, 8.0);
        assert_eq!(st.total_area(0.0).unwrap(), 1.0);
    }

    #[test]
    fn degenerate_profiles_are_rejected() {
        let st = GeneralizedFlrw::new(
            3,
            vec![FlrwCell::new("a", 1.0, ScaleProfile::linear(1.0, -1.0))],
        )
        .unwrap();
        assert!(st.total_area(0.5).is_ok());
        assert!(matches!(
            st.total_area(1.0),
            Err(Error::DegenerateMetric(_))
        ));
        assert!(GeneralizedFlrw::new(
            3,
            vec![FlrwCell::new("a", 1.0, ScaleProfile::linear(0.0, 1.0))]
        )
        .is_err());
        assert!(GeneralizedFlrw::new(
            3,
            vec![FlrwCell::new("a", -1.0, ScaleProfile::linear(1.0, 1.0))]
        )
        .is_err());
        assert!(GeneralizedFlrw::new(3, vec![]).is_err());
    }

    #[test]
    fn sec_examples() {
        let cells = vec![
            FlrwCell::new("lin", 1.0, ScaleProfile::linear(2.0, 1.0)),
            FlrwCell::new("dust", 1.0, ScaleProfile::power(1.0, 1.0, 2.0 / 3.0)),
            FlrwCell::new("accel", 1.0, ScaleProfile::power(1.0, 1.0, 2.0)),
        ];
        let st = GeneralizedFlrw::new(3, cells).unwrap();
        let verdicts = st.sec_check(&grid(5.0, 50)).unwrap();
        assert!(verdicts[0].holds);
        assert_eq!(verdicts[0].min_ric, 0.0);
        assert!(verdicts[1].holds);
        // f_tt = -2/9 at t = 0 ⇒ Ric = 2/3
        assert!(verdicts[1].min_ric > 0.0);
        assert!(!verdicts[2].holds);
        assert_eq!(verdicts[2].first_violation, Some(0.0));
        assert!(!st.satisfies_sec(&[0.0]).unwrap());
    }

    #[test]
    fn induced_data_of_dust_profile() {
        let st = GeneralizedFlrw::new(
            3,
            vec![FlrwCell::new(
                "a",
                2.0,
                ScaleProfile::power(1.5, 1.0, 2.0 / 3.0),
            )],
        )
        .unwrap();
        let data = st.induced_data().unwrap();
        assert!((data.cells[0].weight - 2.0 * 1.5f64.powi(3)).abs() < 1e-14);
        assert!((data.cells[0].mean_curvature - 2.0).abs() < 1e-14);
        // concave profile stays below the exact integral bound
        for t in [0.1, 1.0, 5.0] {
            assert!(st.total_area(t).unwrap() <= area_bound_exact(&data, t).unwrap());
        }
    }

    #[test]
    fn table_profile_follows_samples() {
        let times = grid(4.0, 200);
        let values: Vec<f64> = times.iter().map(|t| 2.0 + 0.5 * t).collect();
        let profile = ScaleProfile::table(times, values).unwrap();
        let jet = profile.jet(1.3).unwrap();
        assert!((jet.value - 2.65).abs() < 1e-12);
        assert!((jet.d1 - 0.5).abs() < 1e-10);
        assert!(jet.d2.abs() < 1e-9);
        assert!(profile.jet(4.5).is_err());
        assert!(ScaleProfile::table(vec![0.0, 1.0], vec![1.0]).is_err());
    }

    #[test]
    fn json_round_trip() {
        let text = r#"{"n": 3, "cells": [
            {"id": "a", "weight": 0.5, "profile": {"kind": "linear", "intercept": 1.0, "slope": 1.0}},
            {"id": "b", "weight": 0.5, "profile": {"kind": "power", "scale": 1.0, "rate": 1.0, "exponent": 0.6666666666666666}},
            {"id": "c", "weight": 0.1, "profile": {"kind": "table", "times": [0, 1, 2], "values": [1, 1.5, 1.8]}}
        ]}"#;
        let st = GeneralizedFlrw::from_json(text).unwrap();
        assert_eq!(st.cells.len(), 3);
        let back = GeneralizedFlrw::from_json(&st.to_json().unwrap()).unwrap();
        assert_eq!(st, back);
        assert!(st.total_area(1.5).unwrap() > 0.0);
    }
}
