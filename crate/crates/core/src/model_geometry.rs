//! Closed-form model spacetimes `[0, ∞) × ℍⁿ` with metric
//! `-dt² + (t + n/β)² h₋₁`, and the curvature invariants of a general
//! warped product `-dt² + a(t)² h_c`.
//!
//! The models saturate every comparison inequality in this crate, so the
//! functions here double as oracles for the bound and congruence modules.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A model spacetime fixed by the fiber dimension and the constant initial
/// mean curvature of the slice `t = 0`.
///
/// `beta = 0` is the static limit: the scale factor is normalized to the
/// constant 1 and areas do not evolve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelGeometry {
    n: u32,
    beta: f64,
}

impl ModelGeometry {
    pub fn new(n: u32, beta: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::domain(format!(
                "dimension n = {n} must be at least 2"
            )));
        }
        if !(beta.is_finite() && beta >= 0.0) {
            return Err(Error::domain(format!(
                "beta = {beta} must be finite and >= 0"
            )));
        }
        Ok(Self { n, beta })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// `a(t) = t + n/β`, or 1 in the static limit.
    pub fn scale_factor(&self, t: f64) -> Result<f64> {
        check_time(t)?;
        if self.beta == 0.0 {
            Ok(1.0)
        } else {
            Ok(t + f64::from(self.n) / self.beta)
        }
    }

    /// Area growth factor `(1 + βt/n)ⁿ`.
    pub fn area_factor(&self, t: f64) -> Result<f64> {
        check_time(t)?;
        Ok(growth_factor(self.beta, self.n, t))
    }

    /// Area of the time-`t` evolution of a region of initial area `base_area`.
    pub fn area(&self, base_area: f64, t: f64) -> Result<f64> {
        check_area(base_area)?;
        Ok(base_area * self.area_factor(t)?)
    }

    /// Spacetime volume swept between `0` and `t` by a region of initial
    /// area `base_area`.
    pub fn volume(&self, base_area: f64, t: f64) -> Result<f64> {
        check_area(base_area)?;
        check_time(t)?;
        Ok(base_area * integrated_growth_factor(self.beta, self.n, t))
    }

    /// Mean curvature of the slice at time `t`; `n/a(t)` for `β > 0`.
    pub fn mean_curvature(&self, t: f64) -> Result<f64> {
        let a = self.scale_factor(t)?;
        if self.beta == 0.0 {
            Ok(0.0)
        } else {
            Ok(f64::from(self.n) / a)
        }
    }

    /// Warped-product invariants of the model at time `t`.
    pub fn invariants(&self, t: f64) -> Result<WarpedInvariants> {
        let a = self.scale_factor(t)?;
        let da = if self.beta == 0.0 { 0.0 } else { 1.0 };
        warped_invariants(ScaleJet::new(a, da, 0.0), self.n, Curvature::Hyperbolic)
    }
}

/// `(1 + βt/n)ⁿ`, the area growth along a congruence with initial mean
/// curvature `β` and vanishing Ricci term. No domain checks.
pub fn growth_factor(beta: f64, n: u32, t: f64) -> f64 {
    (1.0 + beta * t / f64::from(n)).powi(n as i32)
}

/// `∫₀ᵗ (1 + βs/n)ⁿ ds` in closed form, with a series branch when `βt/n`
/// is too small for the closed form to keep its precision.
pub fn integrated_growth_factor(beta: f64, n: u32, t: f64) -> f64 {
    let nf = f64::from(n);
    let x = beta * t / nf;
    if x.abs() < SMALL_GROWTH {
        // t · ((1+x)^{n+1} - 1) / ((n+1) x), first four terms
        let c1 = nf / 2.0;
        let c2 = nf * (nf - 1.0) / 6.0;
        let c3 = nf * (nf - 1.0) * (nf - 2.0) / 24.0;
        t * (1.0 + x * (c1 + x * (c2 + x * c3)))
    } else {
        nf / (beta * (nf + 1.0)) * ((1.0 + x).powi(n as i32 + 1) - 1.0)
    }
}

/// Threshold on `βt/n` below which [`integrated_growth_factor`] switches to
/// its series expansion.
pub const SMALL_GROWTH: f64 = 1e-8;

/// Sign of the fiber curvature in `-dt² + a(t)² h_c`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Curvature {
    Hyperbolic,
    Flat,
    Spherical,
}

impl Curvature {
    pub fn sign(self) -> f64 {
        match self {
            Curvature::Hyperbolic => -1.0,
            Curvature::Flat => 0.0,
            Curvature::Spherical => 1.0,
        }
    }

    pub fn from_sign(c: i32) -> Result<Self> {
        match c {
            -1 => Ok(Curvature::Hyperbolic),
            0 => Ok(Curvature::Flat),
            1 => Ok(Curvature::Spherical),
            _ => Err(Error::domain(format!(
                "fiber curvature {c} not in {{-1, 0, 1}}"
            ))),
        }
    }
}

/// Value and first two time derivatives of a scale factor at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaleJet {
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
}

impl ScaleJet {
    pub fn new(value: f64, d1: f64, d2: f64) -> Self {
        Self { value, d1, d2 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WarpedInvariants {
    /// `Ric(∂_t, ∂_t) = -n a''/a`
    pub ric_tt: f64,
    /// `H = n a'/a`
    pub mean_curvature: f64,
    /// Spatial Ricci coefficient `(n-1)(a'/a)² + (n-1)c/a² + a''/a`.
    pub ric_spatial_coeff: f64,
}

/// Curvature invariants of `-dt² + a(t)² h_c` from caller-supplied
/// derivatives of `a`.
pub fn warped_invariants(jet: ScaleJet, n: u32, c: Curvature) -> Result<WarpedInvariants> {
    let ScaleJet { value: a, d1, d2 } = jet;
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::DegenerateMetric(format!(
            "scale factor a = {a} is not positive"
        )));
    }
    let nf = f64::from(n);
    let hubble = d1 / a;
    Ok(WarpedInvariants {
        ric_tt: -nf * d2 / a,
        mean_curvature: nf * hubble,
        ric_spatial_coeff: (nf - 1.0) * hubble * hubble + (nf - 1.0) * c.sign() / (a * a) + d2 / a,
    })
}

fn check_time(t: f64) -> Result<()> {
    if t.is_finite() && t >= 0.0 {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "time t = {t} must be finite and >= 0"
        )))
    }
}

fn check_area(area: f64) -> Result<()> {
    if area.is_finite() && area >= 0.0 {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "area {area} must be finite and >= 0"
        )))
    }
}
