use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `Ric(γ̇, γ̇)` along one normal geodesic, as a function of proper time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum RicciProfile {
    Zero,
    Constant {
        value: f64,
    },
    /// Linear interpolation between samples; undefined outside them.
    Table {
        times: Vec<f64>,
        values: Vec<f64>,
    },
}

impl RicciProfile {
    pub fn constant(value: f64) -> Result<Self> {
        if !value.is_finite() {
            return Err(Error::domain("Ricci constant must be finite"));
        }
        Ok(RicciProfile::Constant { value })
    }

    pub fn table(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let profile = RicciProfile::Table { times, values };
        profile.validate()?;
        Ok(profile)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            RicciProfile::Zero => Ok(()),
            RicciProfile::Constant { value } if value.is_finite() => Ok(()),
            RicciProfile::Constant { .. } => Err(Error::domain("Ricci constant must be finite")),
            RicciProfile::Table { times, values } => {
                if times.len() < 2 || times.len() != values.len() {
                    return Err(Error::domain(
                        "Ricci table needs >= 2 (time, value) pairs of equal length",
                    ));
                }
                if times.iter().chain(values).any(|v| !v.is_finite()) {
                    return Err(Error::domain("Ricci table has non-finite entries"));
                }
                if times.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(Error::domain(
                        "Ricci table times must be strictly increasing",
                    ));
                }
                Ok(())
            }
        }
    }

    pub fn eval(&self, tau: f64) -> Result<f64> {
        match self {
            RicciProfile::Zero => Ok(0.0),
            RicciProfile::Constant { value } => Ok(*value),
            RicciProfile::Table { times, values } => {
                let (lo, hi) = (times[0], times[times.len() - 1]);
                // tolerate the last RK stage landing a rounding error past the end
                let slack = 1e-12 * (hi - lo).abs().max(1.0);
                if !(tau >= lo - slack && tau <= hi + slack) {
                    return Err(Error::domain(format!(
                        "Ricci profile not evaluable at tau = {tau} (table covers [{lo}, {hi}])"
                    )));
                }
                let tau = tau.clamp(lo, hi);
                let i = times
                    .partition_point(|&t| t <= tau)
                    .clamp(1, times.len() - 1)
                    - 1;
                let s = (tau - times[i]) / (times[i + 1] - times[i]);
                Ok(values[i] + s * (values[i + 1] - values[i]))
            }
        }
    }

    /// Whether the profile is evaluable on `[0, t_end]`.
    pub fn covers(&self, t_end: f64) -> bool {
        match self {
            RicciProfile::Table { times, .. } => times[0] <= 0.0 && times[times.len() - 1] >= t_end,
            _ => true,
        }
    }

    /// The energy condition `Ric(γ̇, γ̇) ≥ 0` at every sample.
    pub fn satisfies_sec(&self) -> bool {
        match self {
            RicciProfile::Zero => true,
            RicciProfile::Constant { value } => *value >= 0.0,
            RicciProfile::Table { values, .. } => values.iter().all(|&v| v >= 0.0),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_interpolates_linearly() {
        let p = RicciProfile::table(vec![0.0, 1.0, 3.0], vec![0.0, 2.0, 0.0]).unwrap();
        assert_eq!(p.eval(0.5).unwrap(), 1.0);
        assert_eq!(p.eval(2.0).unwrap(), 1.0);
        assert_eq!(p.eval(3.0).unwrap(), 0.0);
        assert!(p.eval(3.5).is_err());
        assert!(p.eval(-0.1).is_err());
        assert!(p.satisfies_sec());
        assert!(p.covers(3.0) && !p.covers(3.1));
    }

    #[test]
    fn invalid_tables() {
        assert!(RicciProfile::table(vec![0.0], vec![1.0]).is_err());
        assert!(RicciProfile::table(vec![0.0, 0.0], vec![1.0, 1.0]).is_err());
        assert!(RicciProfile::table(vec![0.0, 1.0], vec![1.0, f64::NAN]).is_err());
        assert!(RicciProfile::constant(f64::INFINITY).is_err());
    }

    #[test]
    fn sec_flag() {
        assert!(RicciProfile::Zero.satisfies_sec());
        assert!(!RicciProfile::Constant { value: -0.1 }.satisfies_sec());
        let p = RicciProfile::table(vec![0.0, 1.0], vec![0.5, -1e-3]).unwrap();
        assert!(!p.satisfies_sec());
    }

    #[test]
    fn json_shape() {
        let p: RicciProfile = serde_json::from_str(r#"{"kind":"constant","value":0.5}"#).unwrap();
        assert_eq!(p, RicciProfile::Constant { value: 0.5 });
        let z: RicciProfile = serde_json::from_str(r#"{"kind":"zero"}"#).unwrap();
        assert_eq!(z, RicciProfile::Zero);
    }
}
