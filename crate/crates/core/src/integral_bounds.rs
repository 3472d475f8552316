//! Upper bounds on the area of the level sets `S_t` and the volume of the
//! regions `Ω_t` from integral control of the initial mean curvature.
//!
//! The sharp form is the cell sum of `(H₊ t/n + 1)ⁿ`; the weaker forms
//! trade it for Lⁿ norms of `H` or `|K|` via the convexity inequality
//! `(x + 1)ⁿ ≤ 2ⁿ⁻¹ (xⁿ + 1)`. The pointwise-curvature bound is included
//! for comparison. Every estimate applies unchanged to restrictions of the
//! data set, which realizes the subset versions.
//!
//! None of these functions can check the energy condition: it is a property
//! of the development, not of the data. Reports carry that caveat as a flag.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::initial_data::{Field, InitialDataSet};
use crate::model_geometry::{growth_factor, integrated_growth_factor};
use crate::numerics::{binomial, pairwise_sum, pairwise_sum_by};

/// Relative slack for the ordering chain between bound variants.
pub const ORDERING_TOL: f64 = 1e-9;
/// Relative slack for the binomial-expansion identity.
pub const BINOMIAL_TOL: f64 = 1e-12;

fn check_time(t: f64) -> Result<()> {
    if t.is_finite() && t >= 0.0 {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "time t = {t} must be finite and >= 0"
        )))
    }
}

fn jensen_constant(n: u32) -> f64 {
    2f64.powi(n as i32 - 1)
}

/// `Σ w (H₊ t/n + 1)ⁿ`.
pub fn area_bound_exact(data: &InitialDataSet, t: f64) -> Result<f64> {
    check_time(t)?;
    Ok(pairwise_sum_by(&data.cells, |c| {
        c.weight * growth_factor(c.h_plus(), data.n, t)
    }))
}

/// `Σ w ∫₀ᵗ (H₊ s/n + 1)ⁿ ds`.
pub fn volume_bound_exact(data: &InitialDataSet, t: f64) -> Result<f64> {
    check_time(t)?;
    Ok(pairwise_sum_by(&data.cells, |c| {
        c.weight * integrated_growth_factor(c.h_plus(), data.n, t)
    }))
}

/// Convexity form `2ⁿ⁻¹((t/n)ⁿ ‖H‖ⁿ_{Lⁿ} + |Σ|)`, or with `use_k`
/// `2ⁿ⁻¹(tⁿ ‖K‖ⁿ_{Lⁿ} + |Σ|)`.
pub fn area_bound_jensen(data: &InitialDataSet, t: f64, use_k: bool) -> Result<f64> {
    check_time(t)?;
    let n = data.n;
    let nf = f64::from(n);
    let area = data.total_area();
    let curvature_term = if use_k {
        t.powi(n as i32) * data.power_integral(Field::KNorm, nf)?
    } else {
        (t / nf).powi(n as i32) * data.power_integral(Field::MeanCurvature, nf)?
    };
    Ok(jensen_constant(n) * (curvature_term + area))
}

/// Time integral of [`area_bound_jensen`].
pub fn volume_bound_jensen(data: &InitialDataSet, t: f64, use_k: bool) -> Result<f64> {
    check_time(t)?;
    let n = data.n;
    let nf = f64::from(n);
    let area = data.total_area();
    let tn1 = t.powi(n as i32 + 1) / (nf + 1.0);
    let curvature_term = if use_k {
        tn1 * data.power_integral(Field::KNorm, nf)?
    } else {
        tn1 / nf.powi(n as i32) * data.power_integral(Field::MeanCurvature, nf)?
    };
    Ok(jensen_constant(n) * (curvature_term + t * area))
}

/// The convexity-form area bound with `‖H‖_{Lᵖ}` in place of `‖H‖_{Lⁿ}`:
/// `2ⁿ⁻¹((t/n)ⁿ ‖H‖ⁿ_{Lᵖ} + |Σ|)`.
///
/// For `p ≥ n` on data of unit area this still dominates the exact bound.
/// For `p < n` it is not a valid bound; see the `counterexample` module.
pub fn area_bound_jensen_lp(data: &InitialDataSet, t: f64, p: f64) -> Result<f64> {
    check_time(t)?;
    let n = data.n;
    let norm = data.lp_norm(Field::MeanCurvature, p)?;
    Ok(jensen_constant(n)
        * ((t / f64::from(n)).powi(n as i32) * norm.powi(n as i32) + data.total_area()))
}

/// Binomial expansion of the exact area bound: entry `k` is
/// `C(n,k) (t/n)ᵏ ‖H₊‖ᵏ_{Lᵏ}`, with entry 0 equal to `|Σ|`.
pub fn area_bound_binomial(data: &InitialDataSet, t: f64) -> Result<Vec<f64>> {
    check_time(t)?;
    let n = data.n;
    let nf = f64::from(n);
    (0..=n)
        .map(|k| {
            let moment = data.power_integral(Field::PositiveMeanCurvature, f64::from(k))?;
            Ok(binomial(n, k) * (t / nf).powi(k as i32) * moment)
        })
        .collect()
}

/// Time-integrated binomial terms: entry `k` is
/// `C(n,k) tᵏ⁺¹ / (nᵏ (k+1)) ‖H₊‖ᵏ_{Lᵏ}`; they sum to [`volume_bound_exact`].
pub fn volume_bound_binomial(data: &InitialDataSet, t: f64) -> Result<Vec<f64>> {
    check_time(t)?;
    let n = data.n;
    let nf = f64::from(n);
    (0..=n)
        .map(|k| {
            let kf = f64::from(k);
            let moment = data.power_integral(Field::PositiveMeanCurvature, kf)?;
            Ok(binomial(n, k) * t.powi(k as i32 + 1) / (nf.powi(k as i32) * (kf + 1.0)) * moment)
        })
        .collect()
}

fn check_tg_window(beta: f64, n: u32, t: f64) -> Result<()> {
    check_time(t)?;
    if beta < 0.0 {
        let limit = f64::from(n) / beta.abs();
        if t > limit {
            return Err(Error::ValidityWindow { t, limit });
        }
    }
    Ok(())
}

/// Area bound `|Σ| (βt/n + 1)ⁿ` under a pointwise bound `H ≤ β`.
/// For `β < 0` it holds only up to the focal time `n/|β|`.
pub fn tg_pointwise_area(beta: f64, base_area: f64, n: u32, t: f64) -> Result<f64> {
    check_tg_window(beta, n, t)?;
    Ok(base_area * growth_factor(beta, n, t))
}

/// Volume companion of [`tg_pointwise_area`].
pub fn tg_pointwise_volume(beta: f64, base_area: f64, n: u32, t: f64) -> Result<f64> {
    check_tg_window(beta, n, t)?;
    Ok(base_area * integrated_growth_factor(beta, n, t))
}

/// Which of the expected inequalities between variants held.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrderingCertificate {
    pub exact_le_jensen: bool,
    pub jensen_le_from_k: Option<bool>,
    pub exact_le_tg: bool,
    pub binomial_sum_matches: bool,
    /// `jensen_h - exact`; how much the convexity step gives away.
    pub jensen_gap: f64,
}

impl OrderingCertificate {
    fn build(
        exact: f64,
        jensen_h: f64,
        from_k: Option<f64>,
        tg: f64,
        binomial_terms: &[f64],
    ) -> Self {
        let le = |a: f64, b: f64| a <= b + ORDERING_TOL * b.abs().max(a.abs());
        let sum = pairwise_sum(binomial_terms);
        Self {
            exact_le_jensen: le(exact, jensen_h),
            jensen_le_from_k: from_k.map(|k| le(jensen_h, k)),
            exact_le_tg: le(exact, tg),
            binomial_sum_matches: (sum - exact).abs()
                <= BINOMIAL_TOL * exact.abs().max(f64::MIN_POSITIVE),
            jensen_gap: jensen_h - exact,
        }
    }

    pub fn holds(&self) -> bool {
        self.exact_le_jensen
            && self.jensen_le_from_k.unwrap_or(true)
            && self.exact_le_tg
            && self.binomial_sum_matches
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AreaBoundReport {
    pub t: f64,
    pub exact: f64,
    pub jensen_h: f64,
    pub from_k: Option<f64>,
    pub binomial_terms: Vec<f64>,
    pub tg_beta: f64,
    pub tg_pointwise: Option<f64>,
    pub certificate: OrderingCertificate,
    /// Always true: the energy condition is assumed, not checked.
    pub hypotheses_assumed: bool,
}

impl AreaBoundReport {
    pub fn compute(data: &InitialDataSet, t: f64) -> Result<Self> {
        let exact = area_bound_exact(data, t)?;
        let jensen_h = area_bound_jensen(data, t, false)?;
        let from_k = if data.has_k() && !data.is_empty() {
            Some(area_bound_jensen(data, t, true)?)
        } else {
            None
        };
        let binomial_terms = area_bound_binomial(data, t)?;
        let tg_beta = data.max_h_plus();
        let tg = tg_pointwise_area(tg_beta, data.total_area(), data.n, t)?;
        Ok(Self {
            t,
            exact,
            jensen_h,
            from_k,
            certificate: OrderingCertificate::build(exact, jensen_h, from_k, tg, &binomial_terms),
            binomial_terms,
            tg_beta,
            tg_pointwise: Some(tg),
            hypotheses_assumed: true,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VolumeBoundReport {
    pub t: f64,
    pub exact: f64,
    pub jensen_h: f64,
    pub from_k: Option<f64>,
    pub binomial_terms: Vec<f64>,
    pub tg_beta: f64,
    pub tg_pointwise: Option<f64>,
    pub certificate: OrderingCertificate,
    pub hypotheses_assumed: bool,
}

impl VolumeBoundReport {
    pub fn compute(data: &InitialDataSet, t: f64) -> Result<Self> {
        let exact = volume_bound_exact(data, t)?;
        let jensen_h = volume_bound_jensen(data, t, false)?;
        let from_k = if data.has_k() && !data.is_empty() {
            Some(volume_bound_jensen(data, t, true)?)
        } else {
            None
        };
        let binomial_terms = volume_bound_binomial(data, t)?;
        let tg_beta = data.max_h_plus();
        let tg = tg_pointwise_volume(tg_beta, data.total_area(), data.n, t)?;
        Ok(Self {
            t,
            exact,
            jensen_h,
            from_k,
            certificate: OrderingCertificate::build(exact, jensen_h, from_k, tg, &binomial_terms),
            binomial_terms,
            tg_beta,
            tg_pointwise: Some(tg),
            hypotheses_assumed: true,
        })
    }
}

/// Area and volume reports at one time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub area: AreaBoundReport,
    pub volume: VolumeBoundReport,
}

impl BoundReport {
    pub fn compute(data: &InitialDataSet, t: f64) -> Result<Self> {
        Ok(Self {
            area: AreaBoundReport::compute(data, t)?,
            volume: VolumeBoundReport::compute(data, t)?,
        })
    }
}

/// `(t, exact, jensen_h, from_k, tg, binomial terms)`.
pub type SweepRow<'a> = (f64, f64, f64, Option<f64>, Option<f64>, &'a [f64]);

/// One row per report: `t,exact,jensen_h,from_k,tg,binomial_k0..binomial_kn`.
/// Missing optional values are written as empty fields.
pub fn write_sweep_csv<W: Write>(rows: &[SweepRow<'_>], out: W) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    let n_terms = rows.first().map_or(0, |r| r.5.len());
    let mut header = vec![
        "t".to_string(),
        "exact".into(),
        "jensen_h".into(),
        "from_k".into(),
        "tg".into(),
    ];
    header.extend((0..n_terms).map(|k| format!("binomial_k{k}")));
    writer.write_record(&header)?;
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for &(t, exact, jensen, from_k, tg, terms) in rows {
        let mut record = vec![
            t.to_string(),
            exact.to_string(),
            jensen.to_string(),
            opt(from_k),
            opt(tg),
        ];
        record.extend(terms.iter().map(f64::to_string));
        writer.write_record(&record)?;
    }
    writer.flush()?;
    Ok(())
}

/// CSV sweep of area reports.
pub fn write_area_sweep_csv<W: Write>(reports: &[AreaBoundReport], out: W) -> Result<()> {
    let rows: Vec<_> = reports
        .iter()
        .map(|r| {
            (
                r.t,
                r.exact,
                r.jensen_h,
                r.from_k,
                r.tg_pointwise,
                r.binomial_terms.as_slice(),
            )
        })
        .collect();
    write_sweep_csv(&rows, out)
}

/// CSV sweep of volume reports.
pub fn write_volume_sweep_csv<W: Write>(reports: &[VolumeBoundReport], out: W) -> Result<()> {
    let rows: Vec<_> = reports
        .iter()
        .map(|r| {
            (
                r.t,
                r.exact,
                r.jensen_h,
                r.from_k,
                r.tg_pointwise,
                r.binomial_terms.as_slice(),
            )
        })
        .collect();
    write_sweep_csv(&rows, out)
}
