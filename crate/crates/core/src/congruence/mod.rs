//! Evolution along the normal geodesic congruence of the initial slice.
//!
//! Along each fiber the expansion `θ` (mean curvature of the level set the
//! fiber crosses) obeys the traced Riccati equation
//! `dθ/dτ = -θ²/n - |σ|² - Ric(γ̇, γ̇)`; dropping the shear term gives the
//! comparison ODE `dθ/dτ = -θ²/n - Ric` that is integrated here, together
//! with the area element `dA/dτ = θ A`. With `Ric ≥ 0` and `θ(0) ≤ β` the
//! expansion stays below `n/(τ + n/β)`, which is what makes
//! `A(τ) / (βτ/n + 1)ⁿ` non-increasing.

mod flrw;
mod ricci;

use std::io::Write;

use serde::{Deserialize, Serialize};

pub use flrw::{FlrwCell, GeneralizedFlrw, ScaleProfile, SecVerdict, SEC_TOL};
pub use ricci::RicciProfile;

use crate::error::{Error, Result};
use crate::numerics::rk4_step;

/// Area element below which a fiber is treated as focused.
pub const FOCAL_AREA: f64 = 1e-12;
/// Expansion magnitude treated as blow-up.
pub const THETA_BLOWUP: f64 = 1e12;
/// Width of the bracket when locating a focal time.
pub const FOCAL_BRACKET: f64 = 1e-10;
/// Relative slack in [`monotone_quotient_check`].
/// Above this value of `|θ|·h` samples are taken from the Jacobi form.
pub const STIFF_STEP: f64 = 0.25;

pub const QUOTIENT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub tau: f64,
    pub theta: f64,
    pub area: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CongruenceTrajectory {
    pub n: u32,
    pub theta0: f64,
    pub step: f64,
    pub samples: Vec<Sample>,
    /// First proper time where the area element vanishes.
    pub focal_time: Option<f64>,
    /// Integration stopped before `t_end` (focusing or blow-up).
    pub truncated: bool,
    /// The Ricci profile was nonnegative everywhere it was sampled.
    pub sec: bool,
}

impl CongruenceTrajectory {
    pub fn last(&self) -> &Sample {
        self.samples
            .last()
            .expect("trajectory always holds the initial sample")
    }

    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.tau).collect()
    }

    pub fn areas(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.area).collect()
    }

    /// `tau,theta,A` rows.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut writer = csv::Writer::from_writer(out);
        writer.write_record(["tau", "theta", "A"])?;
        for s in &self.samples {
            writer.write_record([s.tau.to_string(), s.theta.to_string(), s.area.to_string()])?;
        }
        writer.flush()?;
        Ok(())
    }
}

/// Integrates the comparison Raychaudhuri system for one fiber with a fixed
/// step classical Runge-Kutta scheme.
///
/// The step is shrunk to divide `t_end` evenly. Focusing is located on the
/// linear Jacobi form `x'' = -(Ric/n) x` with `x = A^{1/n}`, which stays
/// regular where `θ` blows up; the zero of `x` is bracketed and bisected.
pub fn integrate_raychaudhuri(
    theta0: f64,
    ricci: &RicciProfile,
    n: u32,
    t_end: f64,
    step: f64,
) -> Result<CongruenceTrajectory> {
    if n < 2 {
        return Err(Error::domain(format!(
            "dimension n = {n} must be at least 2"
        )));
    }
    if !theta0.is_finite() {
        return Err(Error::domain("initial expansion must be finite"));
    }
    if !(t_end.is_finite() && t_end > 0.0) {
        return Err(Error::domain(format!("t_end = {t_end} must be positive")));
    }
    if !(step > 0.0 && step <= t_end / 10.0) {
        return Err(Error::domain(format!(
            "step {step} must lie in (0, t_end/10]"
        )));
    }
    ricci.validate()?;
    if !ricci.covers(t_end) {
        return Err(Error::domain(format!(
            "Ricci profile does not cover [0, {t_end}]"
        )));
    }

    let nf = f64::from(n);
    let steps = (t_end / step - 1e-9).ceil() as usize;
    let h = t_end / steps as f64;

    // Errors from the profile are captured and surfaced after the step.
    let failure = std::cell::RefCell::new(None::<Error>);
    let ric = |tau: f64| -> f64 {
        ricci.eval(tau).unwrap_or_else(|e| {
            failure.borrow_mut().get_or_insert(e);
            f64::NAN
        })
    };
    let raychaudhuri = |tau: f64, y: &[f64; 2]| [-y[0] * y[0] / nf - ric(tau), y[0] * y[1]];
    let jacobi = |tau: f64, z: &[f64; 2]| [z[1], -ric(tau) / nf * z[0]];

    let mut samples = Vec::with_capacity(steps + 1);
    samples.push(Sample {
        tau: 0.0,
        theta: theta0,
        area: 1.0,
    });
    let mut y = [theta0, 1.0];
    let mut z = [1.0, theta0 / nf];
    let mut focal_time = None;
    let mut truncated = false;

    for i in 0..steps {
        let tau = i as f64 * h;
        let z_next = rk4_step(&jacobi, tau, &z, h);
        let mut y_next = rk4_step(&raychaudhuri, tau, &y, h);
        if let Some(e) = failure.borrow_mut().take() {
            return Err(e);
        }
        let crossed = z_next[0] <= 0.0;
        if !crossed && !(y_next[0].abs() * h <= STIFF_STEP) {
            // the Riccati step is unreliable near a focal point; the linear
            // Jacobi form stays regular there
            y_next = [nf * z_next[1] / z_next[0], z_next[0].powi(n as i32)];
        }
        let blown =
            !y_next[0].is_finite() || y_next[0].abs() > THETA_BLOWUP || !(y_next[1] >= FOCAL_AREA);
        if crossed || blown {
            truncated = true;
            // the Jacobi zero may sit just past this step when θ blows up first
            let reach = if crossed {
                h
            } else {
                (2.0 * h).min(t_end - tau)
            };
            focal_time = locate_zero(&jacobi, tau, &z, reach).map(|s| tau + s);
            if focal_time.is_none() && blown {
                focal_time = Some(tau + h);
            }
            break;
        }
        y = y_next;
        z = z_next;
        samples.push(Sample {
            tau: if i + 1 == steps {
                t_end
            } else {
                (i + 1) as f64 * h
            },
            theta: y[0],
            area: y[1],
        });
    }

    Ok(CongruenceTrajectory {
        n,
        theta0,
        step: h,
        samples,
        focal_time,
        truncated,
        sec: ricci.satisfies_sec(),
    })
}

/// Smallest `s ∈ (0, reach]` with `x(tau + s) = 0` for the Jacobi state
/// `z` at `tau`, using single RK steps of length `s` from `z`.
fn locate_zero(
    jacobi: &dyn Fn(f64, &[f64; 2]) -> [f64; 2],
    tau: f64,
    z: &[f64; 2],
    reach: f64,
) -> Option<f64> {
    let x_at = |s: f64| rk4_step(jacobi, tau, z, s)[0];
    let mut hi = reach;
    if x_at(hi) > 0.0 {
        return None;
    }
    let mut lo = 0.0;
    while hi - lo > FOCAL_BRACKET {
        let mid = 0.5 * (lo + hi);
        if x_at(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Step-halving error estimate: the maximum over the coarse grid of
/// `|y_h - y_{h/2}| / 15` for `θ` and for `A`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RichardsonEstimate {
    pub theta: f64,
    pub area: f64,
}

pub fn richardson_error(
    theta0: f64,
    ricci: &RicciProfile,
    n: u32,
    t_end: f64,
    step: f64,
) -> Result<RichardsonEstimate> {
    let coarse = integrate_raychaudhuri(theta0, ricci, n, t_end, step)?;
    let fine = integrate_raychaudhuri(theta0, ricci, n, t_end, coarse.step / 2.0)?;
    let mut est = RichardsonEstimate {
        theta: 0.0,
        area: 0.0,
    };
    for (c, f) in coarse.samples.iter().zip(fine.samples.iter().step_by(2)) {
        est.theta = est.theta.max((c.theta - f.theta).abs() / 15.0);
        est.area = est.area.max((c.area - f.area).abs() / 15.0);
    }
    Ok(est)
}

/// `n / (τ + n/β)`, the expansion of the model geometry with initial mean
/// curvature `β`.
pub fn comparison_envelope(beta: f64, n: u32, tau: f64) -> Result<f64> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::domain(format!(
            "envelope needs beta > 0, got {beta}"
        )));
    }
    if !(tau >= 0.0) {
        return Err(Error::domain(format!("tau = {tau} must be >= 0")));
    }
    let nf = f64::from(n);
    Ok(nf / (tau + nf / beta))
}

/// Largest `θ(τ) - n/(τ + n/β)` over the samples with `τ > 0`
/// (the initial sample contributes `θ(0) - β ≤ 0` by assumption).
pub fn envelope_violation(traj: &CongruenceTrajectory, beta: f64, n: u32) -> Result<f64> {
    if !traj.sec {
        return Err(Error::Hypothesis(
            "Ricci profile is negative somewhere; the envelope comparison does not apply".into(),
        ));
    }
    if traj.theta0 > beta {
        return Err(Error::Hypothesis(format!(
            "initial expansion {} exceeds beta = {beta}",
            traj.theta0
        )));
    }
    let mut excess = traj.theta0 - beta;
    let mut first = true;
    for s in traj.samples.iter().filter(|s| s.tau > 0.0) {
        let gap = s.theta - comparison_envelope(beta, n, s.tau)?;
        excess = if first { gap } else { excess.max(gap) };
        first = false;
    }
    Ok(excess)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuotientVerdict {
    pub non_increasing: bool,
    /// Largest relative increase `(q_{i+1} - q_i)/q_i` between neighbours.
    pub max_increase: f64,
    pub first: f64,
    pub last: f64,
}

/// Checks that `areas(t) / (βt/n + 1)ⁿ` does not increase along `times`.
///
/// `beta = 0` is accepted and checks that the areas themselves do not grow.
pub fn monotone_quotient_check(
    times: &[f64],
    areas: &[f64],
    beta: f64,
    n: u32,
) -> Result<QuotientVerdict> {
    if times.len() != areas.len() || times.is_empty() {
        return Err(Error::domain(
            "times and areas must be non-empty and of equal length",
        ));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::domain("time grid must be strictly increasing"));
    }
    if !(beta >= 0.0 && beta.is_finite()) {
        return Err(Error::domain(format!("beta = {beta} must be >= 0")));
    }
    let quotients: Vec<f64> = times
        .iter()
        .zip(areas)
        .map(|(&t, &a)| a / crate::model_geometry::growth_factor(beta, n, t))
        .collect();
    let max_increase = quotients
        .windows(2)
        .map(|w| (w[1] - w[0]) / w[0].abs().max(f64::MIN_POSITIVE))
        .fold(f64::NEG_INFINITY, f64::max);
    let max_increase = if quotients.len() < 2 {
        0.0
    } else {
        max_increase
    };
    Ok(QuotientVerdict {
        non_increasing: max_increase <= QUOTIENT_TOL,
        max_increase,
        first: quotients[0],
        last: quotients[quotients.len() - 1],
    })
}
