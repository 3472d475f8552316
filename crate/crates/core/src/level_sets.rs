//! Level sets of the cosmological time and the volumes between them.
//!
//! An [`AreaHistory`] is `t ↦ |S_t|` on `[0, t_max]`. Volumes follow from the
//! coarea identity `|Ω_t| = ∫₀ᵗ |S_s| ds`; the generalized area of `Σ_T` is
//! the limit superior of `(|Ω_T| - |Ω_{T-h}|)/h`, approximated here by the
//! largest quotient in the tail of a geometric schedule of window widths.

use std::fmt;
use std::io::Write;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::congruence::{CongruenceTrajectory, GeneralizedFlrw};
use crate::error::{Error, Result};
use crate::model_geometry::ModelGeometry;
use crate::numerics::adaptive_simpson;

/// Relative tolerance of the quadrature behind [`AreaHistory::omega_volume`].
pub const QUADRATURE_TOL: f64 = 1e-12;

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Repr {
    /// Area and its antiderivative in closed form.
    Exact { area: ScalarFn, volume: ScalarFn },
    /// Area in closed form, volumes by quadrature.
    Integrand { area: ScalarFn },
    /// Piecewise-cubic Hermite interpolation of samples.
    Samples {
        times: Vec<f64>,
        areas: Vec<f64>,
        slopes: Vec<f64>,
    },
}

/// `t ↦ |S_t|` on `[0, t_max]`.
#[derive(Clone)]
pub struct AreaHistory {
    repr: Repr,
    t_max: f64,
}

impl fmt::Debug for AreaHistory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match &self.repr {
            Repr::Exact { .. } => "exact".to_string(),
            Repr::Integrand { .. } => "integrand".to_string(),
            Repr::Samples { times, .. } => format!("samples[{}]", times.len()),
        };
        f.debug_struct("AreaHistory")
            .field("kind", &kind)
            .field("t_max", &self.t_max)
            .finish()
    }
}

fn check_t_max(t_max: f64) -> Result<()> {
    if t_max.is_finite() && t_max > 0.0 {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "history domain end {t_max} must be positive"
        )))
    }
}

impl AreaHistory {
    /// History with closed-form area and volume.
    pub fn exact(
        t_max: f64,
        area: impl Fn(f64) -> f64 + Send + Sync + 'static,
        volume: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        check_t_max(t_max)?;
        Ok(Self {
            repr: Repr::Exact {
                area: Arc::new(area),
                volume: Arc::new(volume),
            },
            t_max,
        })
    }

    /// History with a closed-form area; volumes are integrated numerically.
    pub fn integrand(
        t_max: f64,
        area: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        check_t_max(t_max)?;
        Ok(Self {
            repr: Repr::Integrand {
                area: Arc::new(area),
            },
            t_max,
        })
    }

    /// Sampled history starting at `t = 0`. Missing slopes are estimated with
    /// three-point differences.
    pub fn samples(times: Vec<f64>, areas: Vec<f64>, slopes: Option<Vec<f64>>) -> Result<Self> {
        if times.len() < 2 || times.len() != areas.len() {
            return Err(Error::domain("sampled history needs >= 2 (t, area) pairs"));
        }
        if times[0] != 0.0 {
            return Err(Error::domain("sampled history must start at t = 0"));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::domain("sample times must be strictly increasing"));
        }
        if areas.iter().any(|a| !(a.is_finite() && *a >= 0.0)) {
            return Err(Error::domain("sampled areas must be finite and >= 0"));
        }
        let slopes = match slopes {
            Some(s) if s.len() == times.len() => s,
            Some(_) => return Err(Error::domain("slope count does not match sample count")),
            None => finite_difference_slopes(&times, &areas),
        };
        let t_max = times[times.len() - 1];
        Ok(Self {
            repr: Repr::Samples {
                times,
                areas,
                slopes,
            },
            t_max,
        })
    }

    /// Constant area `|Σ|`.
    pub fn constant(area: f64, t_max: f64) -> Result<Self> {
        Self::exact(t_max, move |_| area, move |t| area * t)
    }

    /// A model-geometry region of initial area `base_area`.
    pub fn model(model: ModelGeometry, base_area: f64, t_max: f64) -> Result<Self> {
        model.area(base_area, 0.0)?;
        Self::exact(
            t_max,
            move |t| model.area(base_area, t).unwrap_or(f64::NAN),
            move |t| model.volume(base_area, t).unwrap_or(f64::NAN),
        )
    }

    /// Level-set areas of a cellwise warped product.
    pub fn from_flrw(st: &GeneralizedFlrw, t_max: f64) -> Result<Self> {
        st.total_area(t_max)?;
        let st = st.clone();
        Self::integrand(t_max, move |t| st.total_area(t).unwrap_or(f64::NAN))
    }

    /// Area history of a fiber bundle of initial area `base_area` following
    /// one congruence trajectory, interpolated with the exact slopes `θA`.
    pub fn from_trajectory(traj: &CongruenceTrajectory, base_area: f64) -> Result<Self> {
        let times = traj.times();
        let areas: Vec<f64> = traj.samples.iter().map(|s| base_area * s.area).collect();
        let slopes = traj
            .samples
            .iter()
            .map(|s| base_area * s.theta * s.area)
            .collect();
        Self::samples(times, areas, Some(slopes))
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    fn check_time(&self, t: f64) -> Result<()> {
        if t >= 0.0 && t <= self.t_max {
            Ok(())
        } else {
            Err(Error::domain(format!(
                "t = {t} outside history domain [0, {}]",
                self.t_max
            )))
        }
    }

    /// `|S_t|`.
    pub fn area_at(&self, t: f64) -> Result<f64> {
        self.check_time(t)?;
        Ok(match &self.repr {
            Repr::Exact { area, .. } | Repr::Integrand { area } => area(t),
            Repr::Samples {
                times,
                areas,
                slopes,
            } => {
                let i = segment(times, t);
                hermite(times, areas, slopes, i, t)
            }
        })
    }

    /// `|Ω_t| = ∫₀ᵗ |S_s| ds`.
    pub fn omega_volume(&self, t: f64) -> Result<f64> {
        self.window_volume(0.0, t)
    }

    /// `∫ₐᵇ |S_s| ds`, the volume of the region between two level sets.
    pub fn window_volume(&self, a: f64, b: f64) -> Result<f64> {
        self.check_time(a)?;
        self.check_time(b)?;
        if b < a {
            return Err(Error::domain(format!("window [{a}, {b}] is reversed")));
        }
        Ok(match &self.repr {
            Repr::Exact { volume, .. } => volume(b) - volume(a),
            Repr::Integrand { area } => adaptive_simpson(&|s| area(s), a, b, QUADRATURE_TOL),
            Repr::Samples {
                times,
                areas,
                slopes,
            } => {
                let (first, last) = (segment(times, a), segment(times, b));
                let mut total = 0.0;
                for i in first..=last {
                    let lo = a.max(times[i]);
                    let hi = b.min(times[i + 1]);
                    if hi > lo {
                        // Simpson is exact on each cubic piece
                        let mid = 0.5 * (lo + hi);
                        let f = |t| hermite(times, areas, slopes, i, t);
                        total += (hi - lo) / 6.0 * (f(lo) + 4.0 * f(mid) + f(hi));
                    }
                }
                total
            }
        })
    }
}

fn segment(times: &[f64], t: f64) -> usize {
    times.partition_point(|&s| s <= t).clamp(1, times.len() - 1) - 1
}

fn hermite(times: &[f64], values: &[f64], slopes: &[f64], i: usize, t: f64) -> f64 {
    let h = times[i + 1] - times[i];
    let s = (t - times[i]) / h;
    let s2 = s * s;
    let s3 = s2 * s;
    (2.0 * s3 - 3.0 * s2 + 1.0) * values[i]
        + (s3 - 2.0 * s2 + s) * h * slopes[i]
        + (-2.0 * s3 + 3.0 * s2) * values[i + 1]
        + (s3 - s2) * h * slopes[i + 1]
}

fn finite_difference_slopes(times: &[f64], values: &[f64]) -> Vec<f64> {
    let len = times.len();
    (0..len)
        .map(|i| {
            if len == 2 || i == 0 {
                (values[1] - values[0]) / (times[1] - times[0])
            } else if i == len - 1 {
                (values[i] - values[i - 1]) / (times[i] - times[i - 1])
            } else {
                // non-uniform central difference
                let (h0, h1) = (times[i] - times[i - 1], times[i + 1] - times[i]);
                (h0 * h0 * (values[i + 1] - values[i]) + h1 * h1 * (values[i] - values[i - 1]))
                    / (h0 * h1 * (h0 + h1))
            }
        })
        .collect()
}

/// Geometric schedule of window widths `h_k = h0·ratioᵏ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub h0: f64,
    pub ratio: f64,
    pub count: usize,
    pub tail_fraction: f64,
}

impl Schedule {
    /// `h0 = T/10`, halving, 20 widths, maximum over the last half.
    pub fn default_for(t: f64) -> Self {
        Self {
            h0: t / 10.0,
            ratio: 0.5,
            count: 20,
            tail_fraction: 0.5,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.h0 > 0.0 && self.h0.is_finite()) {
            return Err(Error::domain(format!("h0 = {} must be positive", self.h0)));
        }
        if !(self.ratio > 0.0 && self.ratio < 1.0) {
            return Err(Error::domain(format!(
                "ratio = {} must lie in (0, 1)",
                self.ratio
            )));
        }
        if self.count == 0 {
            return Err(Error::domain("schedule count must be >= 1"));
        }
        if !(self.tail_fraction > 0.0 && self.tail_fraction <= 1.0) {
            return Err(Error::domain(format!(
                "tail fraction {} must lie in (0, 1]",
                self.tail_fraction
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneralizedAreaEstimate {
    #[serde(rename = "T")]
    pub t: f64,
    pub h_schedule: Vec<f64>,
    pub quotients: Vec<f64>,
    pub estimate: f64,
    pub tail_fraction: f64,
    /// The schedule was cut short where `h` stopped being resolvable at `T`.
    pub truncated: bool,
    /// `T = 0`: windows `[0, h]` replace `[T - h, T]`.
    pub forward_clipped: bool,
}

impl GeneralizedAreaEstimate {
    fn tail_start(&self) -> usize {
        let len = self.quotients.len();
        let tail = ((self.tail_fraction * len as f64).ceil() as usize).clamp(1, len);
        len - tail
    }

    /// Widths over which `estimate` is the maximum.
    pub fn tail_widths(&self) -> &[f64] {
        &self.h_schedule[self.tail_start()..]
    }

    /// `h,quotient` rows.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut writer = csv::Writer::from_writer(out);
        writer.write_record(["h", "quotient"])?;
        for (h, q) in self.h_schedule.iter().zip(&self.quotients) {
            writer.write_record([h.to_string(), q.to_string()])?;
        }
        writer.flush()?;
        Ok(())
    }
}

/// Smallest window width treated as resolvable at time `t`.
fn min_resolvable_width(t: f64) -> f64 {
    64.0 * f64::EPSILON * t.abs().max(1.0)
}

/// Finite surrogate for the generalized area `a(Σ_T)`.
pub fn generalized_area(
    history: &AreaHistory,
    t: f64,
    schedule: Schedule,
) -> Result<GeneralizedAreaEstimate> {
    schedule.validate()?;
    history.check_time(t)?;
    let forward_clipped = t == 0.0;
    if forward_clipped {
        if schedule.h0 > history.t_max() {
            return Err(Error::domain("h0 exceeds the history domain"));
        }
    } else if schedule.h0 > t {
        return Err(Error::domain(format!(
            "h0 = {} exceeds T = {t}",
            schedule.h0
        )));
    }

    let floor = min_resolvable_width(t);
    let mut h_schedule = Vec::with_capacity(schedule.count);
    let mut quotients = Vec::with_capacity(schedule.count);
    let mut truncated = false;
    for k in 0..schedule.count {
        let h = schedule.h0 * schedule.ratio.powi(k as i32);
        if h < floor {
            truncated = true;
            break;
        }
        let volume = if forward_clipped {
            history.window_volume(0.0, h)?
        } else {
            history.window_volume(t - h, t)?
        };
        h_schedule.push(h);
        quotients.push(volume / h);
    }
    if quotients.is_empty() {
        return Err(Error::domain("no resolvable window width in schedule"));
    }
    let mut est = GeneralizedAreaEstimate {
        t,
        h_schedule,
        quotients,
        estimate: f64::NAN,
        tail_fraction: schedule.tail_fraction,
        truncated,
        forward_clipped,
    };
    est.estimate = est.quotients[est.tail_start()..]
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(est)
}

/// Offset of the left-limit probes, as a fraction of each tail width.
const LEFT_PROBE: f64 = 1.0 / 1024.0;

/// Surrogate for `limsup_{t→T⁻} |S_t|`: the largest area at `T - h/1024`
/// over the tail widths `h` of `est` (the area at `T` itself when `T = 0`).
pub fn left_limsup(history: &AreaHistory, est: &GeneralizedAreaEstimate) -> Result<f64> {
    if est.forward_clipped {
        return history.area_at(0.0);
    }
    est.tail_widths()
        .iter()
        .map(|h| history.area_at(est.t - h * LEFT_PROBE))
        .try_fold(f64::NEG_INFINITY, |acc, a| Ok(acc.max(a?)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SandwichVerdict {
    pub holds: bool,
    /// `estimate - |S_T|`
    pub lower_margin: f64,
    /// `left_limsup - estimate`
    pub upper_margin: f64,
}

/// Checks `|S_T| ≤ a(Σ_T) ≤ limsup_{t→T⁻} |S_t|` up to `tol`.
pub fn sandwich_check(
    s_t: f64,
    est: &GeneralizedAreaEstimate,
    left_limsup: f64,
    tol: f64,
) -> Result<SandwichVerdict> {
    if !(s_t.is_finite() && est.estimate.is_finite() && left_limsup.is_finite() && tol >= 0.0) {
        return Err(Error::domain("sandwich inputs must be finite"));
    }
    let lower_margin = est.estimate - s_t;
    let upper_margin = left_limsup - est.estimate;
    Ok(SandwichVerdict {
        holds: lower_margin >= -tol && upper_margin >= -tol,
        lower_margin,
        upper_margin,
    })
}
