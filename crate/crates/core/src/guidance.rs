//! Acceleration commands from the equivalent gains.

use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};
use crate::gains::GainPair;

/// Lateral state in the impact-angle frame.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinearGuidanceState {
    /// Distance perpendicular to the desired impact course [m].
    pub y: f64,
    /// Velocity perpendicular to the desired impact course [m/s].
    pub v: f64,
    pub tgo: f64,
}

/// Angle-based description of the same engagement.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AngleGuidanceState {
    /// Line-of-sight angle [rad].
    pub sigma: f64,
    /// Flight-path angle [rad].
    pub gamma_m: f64,
    /// Desired impact angle [rad].
    pub gamma_f: f64,
    /// Missile speed [m/s].
    pub v_m: f64,
    pub tgo: f64,
}

/// Wrap an angle into `(−π, π]`.
pub fn wrap_angle(a: f64) -> f64 {
    if a > -PI && a <= PI {
        return a;
    }
    let w = (a + PI).rem_euclid(TAU) - PI;
    if w <= -PI {
        w + TAU
    } else {
        w
    }
}

impl AngleGuidanceState {
    /// `y = V_M·tgo·(γ_f − σ)`, `v = V_M·(γ_M − γ_f)`.
    pub fn to_linear(&self) -> LinearGuidanceState {
        LinearGuidanceState {
            y: self.v_m * self.tgo * wrap_angle(self.gamma_f - self.sigma),
            v: self.v_m * wrap_angle(self.gamma_m - self.gamma_f),
            tgo: self.tgo,
        }
    }
}

fn check_floor(tgo: f64, tgo_min: f64) -> Result<()> {
    if tgo >= tgo_min && tgo > 0.0 {
        Ok(())
    } else {
        Err(Error::BelowTgoFloor { tgo, tgo_min })
    }
}

/// `a = −k1·y/tgo² − k2·v/tgo`.
pub fn command_linear(k: &GainPair, s: &LinearGuidanceState, tgo_min: f64) -> Result<f64> {
    check_floor(s.tgo, tgo_min)?;
    Ok(-k.k1 * s.y / (s.tgo * s.tgo) - k.k2 * s.v / s.tgo)
}

pub fn command_angles(k: &GainPair, s: &AngleGuidanceState, tgo_min: f64) -> Result<f64> {
    command_linear(k, &s.to_linear(), tgo_min)
}

/// Command written against terminal references `(y_f, v_f)`:
/// `(k1/tgo²)(y_f − y − v·tgo) − ((k1 − k2)/tgo)(v_f − v)`.
/// Identical to [`command_linear`] when `y_f = v_f = 0`.
pub fn command_predictive_form(
    k: &GainPair,
    s: &LinearGuidanceState,
    y_f: f64,
    v_f: f64,
    tgo_min: f64,
) -> Result<f64> {
    check_floor(s.tgo, tgo_min)?;
    let tgo = s.tgo;
    Ok(k.k1 / (tgo * tgo) * (y_f - s.y - s.v * tgo) - (k.k1 - k.k2) / tgo * (v_f - s.v))
}

/// Linearised proportional navigation on the zero-effort miss.
pub fn pn_baseline(s: &LinearGuidanceState, nav_gain: f64, tgo_min: f64) -> Result<f64> {
    check_floor(s.tgo, tgo_min)?;
    Ok(-nav_gain * (s.y + s.v * s.tgo) / (s.tgo * s.tgo))
}

/// Symmetric saturation; `None` leaves the command untouched.
pub fn saturate(a: f64, a_max: Option<f64>) -> f64 {
    match a_max {
        Some(m) => a.clamp(-m, m),
        None => a,
    }
}
