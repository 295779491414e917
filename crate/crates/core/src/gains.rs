//! Moment integrals of the inverse weight and the equivalent guidance gains.
//!
//! With `s = tf − τ` the moments are
//! `g1 = ∫ s² W⁻¹`, `g12 = ∫ s W⁻¹`, `g2 = ∫ W⁻¹` over `[t, tf]`, and the
//! feedback law `a = −k1·y/tgo² − k2·v/tgo` uses
//!
//! ```text
//! k1 = (g2·tgo³ − g12·tgo²) / (g1·g2 − g12²) · W⁻¹(t)
//! k2 = (g1·tgo + g2·tgo³ − 2·g12·tgo²) / (g1·g2 − g12²) · W⁻¹(t)
//! ```

use crate::error::{Error, Result};
use crate::quadrature;
use crate::weighting::WeightSpec;

/// Default time-to-go floor below which gains are not evaluated.
pub const DEFAULT_TGO_MIN: f64 = 1e-3;

/// Default relative tolerance when moments fall back to quadrature.
pub const DEFAULT_QUAD_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MomentTriple {
    pub g1: f64,
    pub g12: f64,
    pub g2: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GainPair {
    pub k1: f64,
    pub k2: f64,
    pub tgo: f64,
}

fn check_time(w: &WeightSpec, t: f64) -> Result<()> {
    if t >= w.t0() && t < w.tf() {
        Ok(())
    } else {
        Err(Error::TimeOutOfRange { t, t0: w.t0(), tf: w.tf() })
    }
}

/// Moments via integration by parts over the supplied antiderivatives.
///
/// The combination below is unchanged by any choice of integration constants
/// (`W1 + c1`, `W2 + c1·τ + c2`, `W3 + c1·τ²/2 + c2·τ + c3`).
pub fn moments_analytic(w: &WeightSpec, t: f64) -> Result<MomentTriple> {
    if !w.has_antiderivatives() {
        return Err(Error::AnalyticPathUnavailable);
    }
    check_time(w, t)?;
    let tf = w.tf();
    let tgo = tf - t;
    let anti = |k, tau| w.anti(k, tau).expect("checked above");
    let (w1, w2, w3) = (anti(1, t), anti(2, t), anti(3, t));
    let (w1f, w2f, w3f) = (anti(1, tf), anti(2, tf), anti(3, tf));

    let g2 = w1f - w1;
    let g12 = -tgo * w1 + (w2f - w2);
    let g1 = -tgo * tgo * w1 - 2.0 * tgo * w2 + 2.0 * (w3f - w3);
    Ok(MomentTriple { g1, g12, g2 })
}

/// Moments by adaptive quadrature of their defining integrals.
pub fn moments_quadrature(w: &WeightSpec, t: f64, tol: f64) -> Result<MomentTriple> {
    check_time(w, t)?;
    let tf = w.tf();
    let g1 = quadrature::integrate(|tau| (tf - tau).powi(2) * w.inv_w(tau), t, tf, tol)?;
    let g12 = quadrature::integrate(|tau| (tf - tau) * w.inv_w(tau), t, tf, tol)?;
    let g2 = quadrature::integrate(|tau| w.inv_w(tau), t, tf, tol)?;
    Ok(MomentTriple { g1: g1.value, g12: g12.value, g2: g2.value })
}

/// Analytic moments when antiderivatives exist, quadrature otherwise.
pub fn moments(w: &WeightSpec, t: f64) -> Result<MomentTriple> {
    if w.has_antiderivatives() {
        moments_analytic(w, t)
    } else {
        moments_quadrature(w, t, DEFAULT_QUAD_TOL)
    }
}

/// `g1·g2 − g12²`, evaluated with a compensated product.
pub fn gram_determinant(m: &MomentTriple) -> f64 {
    let sq = m.g12 * m.g12;
    let sq_err = (-m.g12).mul_add(m.g12, sq);
    m.g1.mul_add(m.g2, -sq) + sq_err
}

pub fn gain_pair(m: &MomentTriple, w_inv_at_t: f64, tgo: f64) -> Result<GainPair> {
    let det = gram_determinant(m);
    if !(det > 0.0) || !det.is_finite() {
        return Err(Error::DegenerateMoments { det });
    }
    let tgo2 = tgo * tgo;
    let tgo3 = tgo2 * tgo;
    let k1 = (m.g2 * tgo3 - m.g12 * tgo2) / det * w_inv_at_t;
    let k2 = (m.g1 * tgo + m.g2 * tgo3 - 2.0 * m.g12 * tgo2) / det * w_inv_at_t;
    Ok(GainPair { k1, k2, tgo })
}

/// Gains of `w` at time `t`.
pub fn gains_at(w: &WeightSpec, t: f64) -> Result<GainPair> {
    let m = moments(w, t)?;
    gain_pair(&m, w.inv_w(t), w.tf() - t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weighting::{exponential_weight, power_tgo_weight, uniform_weight};

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
    }

    #[test]
    fn uniform_moments() {
        let m = moments_analytic(&uniform_weight(0.0, 2.0).unwrap(), 0.0).unwrap();
        assert!(rel(m.g1, 8.0 / 3.0) < 1e-15);
        assert!(rel(m.g12, 2.0) < 1e-15);
        assert!(rel(m.g2, 2.0) < 1e-15);
        assert!(rel(gram_determinant(&m), 4.0 / 3.0) < 1e-14);
    }

    #[test]
    fn power_one_moments() {
        let m = moments_analytic(&power_tgo_weight(0.0, 1.0, 1.0).unwrap(), 0.0).unwrap();
        assert!(rel(m.g1, 0.25) < 1e-15);
        assert!(rel(m.g12, 1.0 / 3.0) < 1e-15);
        assert!(rel(m.g2, 0.5) < 1e-15);
        assert!(rel(gram_determinant(&m), 1.0 / 72.0) < 1e-13);
    }

    #[test]
    fn moments_vanish_at_tf() {
        let w = power_tgo_weight(0.0, 3.0, 2.0).unwrap();
        let m = moments_analytic(&w, 3.0 - 1e-9).unwrap();
        assert!(m.g1.abs() < 1e-30 && m.g12.abs() < 1e-25 && m.g2.abs() < 1e-20);
    }

    #[test]
    fn missing_antiderivatives() {
        let w = WeightSpec::new(0.0, 1.0, |_| 1.0).unwrap();
        assert!(matches!(moments_analytic(&w, 0.0), Err(Error::AnalyticPathUnavailable)));
        // the general entry point silently takes the quadrature route
        let m = moments(&w, 0.0).unwrap();
        assert!(rel(m.g1, 1.0 / 3.0) < 1e-12);
    }

    #[test]
    fn time_outside_interval() {
        let w = uniform_weight(0.0, 1.0).unwrap();
        assert!(matches!(moments_analytic(&w, 1.0), Err(Error::TimeOutOfRange { .. })));
        assert!(matches!(moments_quadrature(&w, -0.1, 1e-8), Err(Error::TimeOutOfRange { .. })));
    }

    #[test]
    fn quadrature_examples() {
        let w = uniform_weight(0.0, 2.0).unwrap();
        let m = moments_quadrature(&w, 0.0, 1e-10).unwrap();
        assert!(rel(m.g1, 8.0 / 3.0) < 1e-9);
        assert!(rel(m.g12, 2.0) < 1e-9);
        assert!(rel(m.g2, 2.0) < 1e-9);

        let e = exponential_weight(0.0, 2.0, 0.0).unwrap();
        assert_eq!(moments_quadrature(&e, 0.0, 1e-10).unwrap(), m);

        let p = power_tgo_weight(0.0, 10.0, 3.0).unwrap();
        let a = moments_analytic(&p, 4.0).unwrap();
        let q = moments_quadrature(&p, 4.0, 1e-10).unwrap();
        assert!(rel(q.g1, a.g1) < 1e-10);
        assert!(rel(q.g12, a.g12) < 1e-10);
        assert!(rel(q.g2, a.g2) < 1e-10);
    }

    #[test]
    fn integration_constants_are_irrelevant() {
        let (c1, c2, c3) = (3.7, -120.0, 55.5);
        let shifted = WeightSpec::new(1.0, 6.0, |t: f64| 1.0 + t * t).unwrap().with_antiderivatives(
            move |t| t + t.powi(3) / 3.0 + c1,
            move |t| t * t / 2.0 + t.powi(4) / 12.0 + c1 * t + c2,
            move |t| t.powi(3) / 6.0 + t.powi(5) / 60.0 + c1 * t * t / 2.0 + c2 * t + c3,
        );
        for &t in &[1.0, 2.5, 5.9] {
            let a = moments_analytic(&shifted, t).unwrap();
            let q = moments_quadrature(&shifted, t, 1e-13).unwrap();
            assert!(rel(a.g1, q.g1) < 1e-11, "g1 {} vs {}", a.g1, q.g1);
            assert!(rel(a.g12, q.g12) < 1e-11);
            assert!(rel(a.g2, q.g2) < 1e-11);
        }
    }

    #[test]
    fn power_family_gains() {
        for &tgo in &[0.1, 1.0, 10.0] {
            let u = gains_at(&uniform_weight(0.0, tgo).unwrap(), 0.0).unwrap();
            assert!(rel(u.k1, 6.0) < 1e-13 && rel(u.k2, 4.0) < 1e-13);
            let p = gains_at(&power_tgo_weight(0.0, tgo, 1.0).unwrap(), 0.0).unwrap();
            assert!(rel(p.k1, 12.0) < 1e-13 && rel(p.k2, 6.0) < 1e-13);
            let p0 = gains_at(&power_tgo_weight(0.0, tgo, 0.0).unwrap(), 0.0).unwrap();
            assert_eq!(p0, u);
        }
    }

    #[test]
    fn degenerate_moments_rejected() {
        let m = MomentTriple { g1: 1.0, g12: 1.0, g2: 1.0 };
        assert!(matches!(gain_pair(&m, 1.0, 1.0), Err(Error::DegenerateMoments { .. })));
        let m = MomentTriple { g1: 1.0, g12: 2.0, g2: 1.0 };
        assert!(gram_determinant(&m) < 0.0);
    }
}
