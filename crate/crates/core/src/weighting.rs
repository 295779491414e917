//! Weighting functions for the energy cost, represented by their inverse
//! `W⁻¹(τ)` and up to three nested antiderivatives.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Shareable scalar function of time.
pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A weighting function on `[t0, tf]`, stored as its inverse.
///
/// When antiderivatives are supplied, `anti[0]' = inv_w`, `anti[1]' = anti[0]`
/// and `anti[2]' = anti[1]`. Integration constants are arbitrary.
#[derive(Clone)]
pub struct WeightSpec {
    inv_w: ScalarFn,
    anti: Option<[ScalarFn; 3]>,
    t0: f64,
    tf: f64,
}

impl fmt::Debug for WeightSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WeightSpec")
            .field("t0", &self.t0)
            .field("tf", &self.tf)
            .field("analytic", &self.anti.is_some())
            .finish()
    }
}

fn check_interval(t0: f64, tf: f64) -> Result<()> {
    if t0.is_finite() && tf.is_finite() && tf > t0 {
        Ok(())
    } else {
        Err(Error::InvalidInterval { t0, tf })
    }
}

impl WeightSpec {
    /// Weight known only through `W⁻¹`; moments fall back to quadrature.
    pub fn new<F>(t0: f64, tf: f64, inv_w: F) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        check_interval(t0, tf)?;
        Ok(Self { inv_w: Arc::new(inv_w), anti: None, t0, tf })
    }

    pub fn with_antiderivatives<A, B, C>(mut self, anti1: A, anti2: B, anti3: C) -> Self
    where
        A: Fn(f64) -> f64 + Send + Sync + 'static,
        B: Fn(f64) -> f64 + Send + Sync + 'static,
        C: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        self.anti = Some([Arc::new(anti1), Arc::new(anti2), Arc::new(anti3)]);
        self
    }

    /// The same weight with the analytic antiderivatives dropped.
    pub fn without_antiderivatives(&self) -> Self {
        Self { anti: None, ..self.clone() }
    }

    /// `c·W⁻¹` with correspondingly scaled antiderivatives.
    pub fn scaled(&self, c: f64) -> Self {
        let inv = self.inv_w.clone();
        let anti = self.anti.as_ref().map(|[a1, a2, a3]| {
            let (a1, a2, a3) = (a1.clone(), a2.clone(), a3.clone());
            [
                Arc::new(move |t: f64| c * a1(t)) as ScalarFn,
                Arc::new(move |t: f64| c * a2(t)) as ScalarFn,
                Arc::new(move |t: f64| c * a3(t)) as ScalarFn,
            ]
        });
        Self { inv_w: Arc::new(move |t| c * inv(t)), anti, t0: self.t0, tf: self.tf }
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn tf(&self) -> f64 {
        self.tf
    }

    pub fn inv_w(&self, tau: f64) -> f64 {
        (self.inv_w)(tau)
    }

    /// `k`-th antiderivative (1, 2 or 3) at `tau`, if supplied.
    pub fn anti(&self, k: usize, tau: f64) -> Option<f64> {
        assert!((1..=3).contains(&k), "antiderivative order must be 1..=3");
        self.anti.as_ref().map(|a| a[k - 1](tau))
    }

    pub fn has_antiderivatives(&self) -> bool {
        self.anti.is_some()
    }
}

/// `W⁻¹ ≡ 1`: control effort weighted equally over the engagement.
pub fn uniform_weight(t0: f64, tf: f64) -> Result<WeightSpec> {
    check_interval(t0, tf)?;
    power_law(t0, tf, 0.0)
}

/// `W⁻¹(τ) = (tf − τ)^n`, penalising acceleration more heavily near intercept.
pub fn power_tgo_weight(t0: f64, tf: f64, n: f64) -> Result<WeightSpec> {
    check_interval(t0, tf)?;
    if !(n >= 0.0 && n.is_finite()) {
        return Err(Error::UnsupportedParameter {
            name: "n",
            value: n,
            reason: "negative powers make W⁻¹ unbounded at tf",
        });
    }
    power_law(t0, tf, n)
}

fn power_law(t0: f64, tf: f64, n: f64) -> Result<WeightSpec> {
    // Antiderivatives are anchored so that they vanish at tf.
    let s = move |tau: f64| (tf - tau).max(0.0);
    let (c1, c2, c3) = (n + 1.0, (n + 1.0) * (n + 2.0), (n + 1.0) * (n + 2.0) * (n + 3.0));
    Ok(WeightSpec::new(t0, tf, move |tau| s(tau).powf(n))?.with_antiderivatives(
        move |tau| -s(tau).powf(n + 1.0) / c1,
        move |tau| s(tau).powf(n + 2.0) / c2,
        move |tau| -s(tau).powf(n + 3.0) / c3,
    ))
}

/// `W⁻¹(τ) = exp(−a (tf − τ))`.
pub fn exponential_weight(t0: f64, tf: f64, a: f64) -> Result<WeightSpec> {
    check_interval(t0, tf)?;
    if !a.is_finite() {
        return Err(Error::UnsupportedParameter { name: "a", value: a, reason: "must be finite" });
    }
    let s = move |tau: f64| (tf - tau).max(0.0);
    Ok(WeightSpec::new(t0, tf, move |tau| (-a * s(tau)).exp())?.with_antiderivatives(
        move |tau| {
            let s = s(tau);
            s * exp_remainder(1, a * s)
        },
        move |tau| {
            let s = s(tau);
            s * s * exp_remainder(2, a * s)
        },
        move |tau| {
            let s = s(tau);
            s * s * s * exp_remainder(3, a * s)
        },
    ))
}

/// `(e^{-x} − Σ_{j<k} (−x)^j/j!) / x^k`, finite at `x = 0`.
fn exp_remainder(k: u32, x: f64) -> f64 {
    if x.abs() < 1.0 {
        // Σ_{j≥k} (−1)^j x^{j−k} / j!
        let mut term = 1.0;
        for j in 1..=k {
            term /= j as f64;
        }
        if k % 2 == 1 {
            term = -term;
        }
        let mut sum = term;
        for j in (k + 1)..(k + 30) {
            term *= -x / j as f64;
            sum += term;
            if term.abs() < 1e-18 * sum.abs() {
                break;
            }
        }
        sum
    } else {
        let mut num = (-x).exp_m1();
        let mut pow = 1.0;
        let mut fact = 1.0;
        for j in 1..k {
            pow *= -x;
            fact *= j as f64;
            num -= pow / fact;
        }
        num / x.powi(k as i32)
    }
}

/// `W⁻¹(τ) = Σ cᵢ (tf − τ)^i`. Feasibility depends on the coefficients.
pub fn polynomial_tgo_weight(t0: f64, tf: f64, coeffs: &[f64]) -> Result<WeightSpec> {
    check_interval(t0, tf)?;
    if coeffs.is_empty() || coeffs.iter().any(|c| !c.is_finite()) {
        return Err(Error::UnsupportedParameter {
            name: "coeffs",
            value: f64::NAN,
            reason: "need at least one finite coefficient",
        });
    }
    let c: Arc<[f64]> = coeffs.into();
    let s = move |tau: f64| (tf - tau).max(0.0);
    // (sign, extra power) for W⁻¹, W1, W2, W3
    let eval = move |c: &[f64], tau: f64, order: i32| {
        let s = s(tau);
        let mut acc = 0.0;
        for (i, ci) in c.iter().enumerate().rev() {
            let p = i as i32;
            let mut denom = 1.0;
            for j in 1..=order {
                denom *= (p + j) as f64;
            }
            acc += ci * s.powi(p + order) / denom;
        }
        if order % 2 == 1 {
            -acc
        } else {
            acc
        }
    };
    let (c0, c1, c2, c3) = (c.clone(), c.clone(), c.clone(), c);
    Ok(WeightSpec::new(t0, tf, move |tau| eval(&c0, tau, 0))?.with_antiderivatives(
        move |tau| eval(&c1, tau, 1),
        move |tau| eval(&c2, tau, 2),
        move |tau| eval(&c3, tau, 3),
    ))
}

/// Named catalog entry, as written in scenario files:
/// `{"family": "power_tgo", "params": {"n": 2}}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", content = "params", rename_all = "snake_case", deny_unknown_fields)]
pub enum WeightFamily {
    Uniform {},
    PowerTgo { n: f64 },
    Exponential { a: f64 },
    /// Polynomial in time-to-go; not guaranteed feasible.
    Polynomial { coeffs: Vec<f64> },
}

impl WeightFamily {
    pub fn name(&self) -> &'static str {
        match self {
            WeightFamily::Uniform {} => "uniform",
            WeightFamily::PowerTgo { .. } => "power_tgo",
            WeightFamily::Exponential { .. } => "exponential",
            WeightFamily::Polynomial { .. } => "polynomial",
        }
    }

    pub fn spec(&self, t0: f64, tf: f64) -> Result<WeightSpec> {
        match self {
            WeightFamily::Uniform {} => uniform_weight(t0, tf),
            WeightFamily::PowerTgo { n } => power_tgo_weight(t0, tf, *n),
            WeightFamily::Exponential { a } => exponential_weight(t0, tf, *a),
            WeightFamily::Polynomial { coeffs } => polynomial_tgo_weight(t0, tf, coeffs),
        }
    }

    /// Name of the scalar parameter a sweep varies, if any.
    pub fn scalar_param(&self) -> Option<&'static str> {
        match self {
            WeightFamily::PowerTgo { .. } => Some("n"),
            WeightFamily::Exponential { .. } => Some("a"),
            _ => None,
        }
    }

    /// Copy of this family with its scalar parameter replaced.
    pub fn with_param(&self, name: &str, value: f64) -> Result<Self> {
        match (self, name) {
            (WeightFamily::PowerTgo { .. }, "n") => Ok(WeightFamily::PowerTgo { n: value }),
            (WeightFamily::Exponential { .. }, "a") => Ok(WeightFamily::Exponential { a: value }),
            _ => Err(Error::InvalidScenario(format!(
                "family {} has no sweepable parameter {name:?}",
                self.name()
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FeasibilityReport {
    /// `W⁻¹ > 0` and finite at every sample of the open interval.
    pub positive_finite: bool,
    pub min_inv_w: f64,
    /// No sustained growth of `W⁻¹` as `τ → tf⁻`.
    pub bounded_near_tf: bool,
    /// `W⁻¹(t0)` finite and positive.
    pub finite_at_t0: bool,
    /// All three antiderivatives are supplied.
    pub analytic_path: bool,
    /// Max normalised central-difference residual for each antiderivative level.
    pub anti_residuals: Option<[f64; 3]>,
    pub violations: Vec<String>,
}

/// Residual threshold for antiderivative consistency.
pub const ANTI_RESIDUAL_TOL: f64 = 1e-6;

impl FeasibilityReport {
    pub fn antiderivatives_consistent(&self) -> bool {
        self.anti_residuals.is_none_or(|r| r.iter().all(|&x| x <= ANTI_RESIDUAL_TOL))
    }

    pub fn is_feasible(&self) -> bool {
        self.positive_finite
            && self.bounded_near_tf
            && self.finite_at_t0
            && self.antiderivatives_consistent()
    }
}

/// Sample `w` on the open interval and report any feasibility violations.
pub fn check_feasible(w: &WeightSpec, samples: usize) -> FeasibilityReport {
    let samples = samples.max(2);
    let (t0, tf) = (w.t0(), w.tf());
    let span = tf - t0;
    let eps = span * 1e-9;
    let mut violations = Vec::new();

    let mut positive_finite = true;
    let mut min_inv_w = f64::INFINITY;
    for i in 0..samples {
        let tau = (t0 + eps) + (span - 2.0 * eps) * i as f64 / (samples - 1) as f64;
        let v = w.inv_w(tau);
        if !(v.is_finite() && v > 0.0) {
            if positive_finite {
                violations.push(format!("W⁻¹({tau}) = {v} is not positive and finite"));
            }
            positive_finite = false;
        }
        if !v.is_nan() {
            min_inv_w = min_inv_w.min(v);
        }
    }

    // Decade approach to tf: unbounded weights grow steadily decade after decade.
    let near: Vec<f64> = (1..=9).map(|k| w.inv_w(tf - span * 10f64.powi(-k))).collect();
    let growing = near.windows(2).skip(2).all(|p| p[1].abs() > 1.5 * p[0].abs());
    let bounded_near_tf = near.iter().all(|v| v.is_finite()) && !growing;
    if !bounded_near_tf {
        violations.push(format!(
            "W⁻¹ unbounded near tf (W⁻¹(tf − 1e-9·span) = {:e})",
            near[near.len() - 1]
        ));
    }

    let at_t0 = w.inv_w(t0);
    let finite_at_t0 = at_t0.is_finite() && at_t0 > 0.0;
    if !finite_at_t0 {
        violations.push(format!("W⁻¹(t0) = {at_t0} is not positive and finite"));
    }

    let anti_residuals = w.has_antiderivatives().then(|| {
        let h = 1e-5 * span;
        let mut worst = [0.0f64; 3];
        for i in 0..samples {
            let tau = t0 + span * (i as f64 + 0.5) / samples as f64;
            for (k, slot) in worst.iter_mut().enumerate() {
                let order = k + 1;
                let target = if order == 1 { w.inv_w(tau) } else { w.anti(order - 1, tau).unwrap() };
                let central = |h: f64| {
                    (w.anti(order, tau + h).unwrap() - w.anti(order, tau - h).unwrap()) / (2.0 * h)
                };
                // Richardson step removes the h² term, which dominates for steep power weights
                let deriv = (4.0 * central(0.5 * h) - central(h)) / 3.0;
                let r = (deriv - target).abs() / (1.0 + target.abs());
                *slot = if r.is_nan() { f64::INFINITY } else { slot.max(r) };
            }
        }
        worst
    });
    if let Some(r) = anti_residuals {
        for (k, &x) in r.iter().enumerate() {
            if x > ANTI_RESIDUAL_TOL {
                violations.push(format!("antiderivative W{} inconsistent (residual {x:e})", k + 1));
            }
        }
    }

    FeasibilityReport {
        positive_finite,
        min_inv_w,
        bounded_near_tf,
        finite_at_t0,
        analytic_path: w.has_antiderivatives(),
        anti_residuals,
        violations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn uniform_examples() {
        let w = uniform_weight(0.0, 10.0).unwrap();
        assert_eq!(w.inv_w(5.0), 1.0);
        assert!(close(w.anti(1, 4.0).unwrap() - w.anti(1, 1.0).unwrap(), 3.0, 1e-15));
        let w = uniform_weight(0.0, 2.0).unwrap();
        assert!(close(w.anti(3, 2.0).unwrap() - w.anti(3, 0.0).unwrap(), 8.0 / 6.0, 1e-15));
    }

    #[test]
    fn invalid_interval_rejected() {
        assert!(matches!(uniform_weight(1.0, 1.0), Err(Error::InvalidInterval { .. })));
        assert!(matches!(uniform_weight(2.0, 1.0), Err(Error::InvalidInterval { .. })));
        assert!(matches!(exponential_weight(0.0, f64::NAN, 1.0), Err(Error::InvalidInterval { .. })));
    }

    #[test]
    fn power_examples() {
        let w = power_tgo_weight(0.0, 10.0, 1.0).unwrap();
        assert_eq!(w.inv_w(4.0), 6.0);
        let w = power_tgo_weight(0.0, 10.0, 2.0).unwrap();
        let integral = w.anti(1, 10.0).unwrap() - w.anti(1, 4.0).unwrap();
        assert!(close(integral, 72.0, 1e-14));
    }

    #[test]
    fn negative_power_rejected() {
        let err = power_tgo_weight(0.0, 10.0, -0.5).unwrap_err();
        assert!(matches!(err, Error::UnsupportedParameter { name: "n", .. }));
    }

    #[test]
    fn power_zero_matches_uniform() {
        let u = uniform_weight(0.0, 10.0).unwrap();
        let p = power_tgo_weight(0.0, 10.0, 0.0).unwrap();
        for i in 0..=20 {
            let t = 0.5 * i as f64;
            assert_eq!(u.inv_w(t), p.inv_w(t));
            for k in 1..=3 {
                assert_eq!(u.anti(k, t), p.anti(k, t));
            }
        }
    }

    #[test]
    fn exponential_examples() {
        let e0 = exponential_weight(0.0, 10.0, 0.0).unwrap();
        let u = uniform_weight(0.0, 10.0).unwrap();
        for i in 0..=20 {
            let t = 0.5 * i as f64;
            assert_eq!(e0.inv_w(t), u.inv_w(t));
            for k in 1..=3 {
                assert!(close(e0.anti(k, t).unwrap(), u.anti(k, t).unwrap(), 1e-15));
            }
        }
        let e = exponential_weight(0.0, 10.0, 0.5).unwrap();
        assert_eq!(e.inv_w(10.0), 1.0);
        let integral = e.anti(1, 10.0).unwrap() - e.anti(1, 0.0).unwrap();
        let exact = (1.0 - (-5f64).exp()) / 0.5;
        assert!(close(integral, exact, 1e-14));
        let quad = crate::quadrature::integrate(|t| e.inv_w(t), 0.0, 10.0, 1e-13).unwrap();
        assert!(close(integral, quad.value, 1e-12));
    }

    #[test]
    fn exp_remainder_continuous_across_branch() {
        for k in 1..=3 {
            for &x in &[1.0f64, -1.0] {
                let below = exp_remainder(k, x * (1.0 - 1e-12));
                let above = exp_remainder(k, x);
                assert!(close(below, above, 1e-10), "k={k} x={x}: {below} vs {above}");
            }
        }
        assert_eq!(exp_remainder(1, 0.0), -1.0);
        assert_eq!(exp_remainder(2, 0.0), 0.5);
        assert!(close(exp_remainder(3, 0.0), -1.0 / 6.0, 1e-16));
    }

    #[test]
    fn polynomial_reduces_to_power() {
        let p = polynomial_tgo_weight(0.0, 5.0, &[0.0, 0.0, 1.0]).unwrap();
        let q = power_tgo_weight(0.0, 5.0, 2.0).unwrap();
        for i in 0..10 {
            let t = 0.5 * i as f64;
            assert!(close(p.inv_w(t), q.inv_w(t), 1e-14));
            for k in 1..=3 {
                assert!(close(p.anti(k, t).unwrap(), q.anti(k, t).unwrap(), 1e-14));
            }
        }
    }

    #[test]
    fn feasibility_examples() {
        let r = check_feasible(&uniform_weight(0.0, 10.0).unwrap(), 100);
        assert!(r.is_feasible() && r.analytic_path, "{r:?}");
        let r = check_feasible(&power_tgo_weight(0.0, 10.0, 2.0).unwrap(), 100);
        assert!(r.is_feasible() && r.analytic_path, "{r:?}");

        let tf = 10.0;
        let singular = WeightSpec::new(0.0, tf, move |t| 1.0 / (tf - t)).unwrap();
        let r = check_feasible(&singular, 100);
        assert!(!r.is_feasible());
        assert!(!r.bounded_near_tf);
        assert!(r.positive_finite);
        assert!(!r.analytic_path);
    }

    #[test]
    fn sign_change_is_infeasible() {
        let w = polynomial_tgo_weight(0.0, 10.0, &[1.0, -0.2]).unwrap();
        let r = check_feasible(&w, 50);
        assert!(!r.positive_finite);
        assert!(!r.is_feasible());
        assert!(!r.violations.is_empty());
    }

    #[test]
    fn wrong_antiderivative_flagged() {
        let w = WeightSpec::new(0.0, 1.0, |_| 1.0).unwrap().with_antiderivatives(
            |t| t,
            |t| t * t, // should be t²/2
            |t| t * t * t / 6.0,
        );
        let r = check_feasible(&w, 20);
        assert!(!r.antiderivatives_consistent());
        assert!(!r.is_feasible());
    }

    #[test]
    fn family_json_shape() {
        let f: WeightFamily = serde_json::from_str(r#"{"family":"power_tgo","params":{"n":2}}"#).unwrap();
        assert_eq!(f, WeightFamily::PowerTgo { n: 2.0 });
        let f: WeightFamily = serde_json::from_str(r#"{"family":"uniform","params":{}}"#).unwrap();
        assert_eq!(f, WeightFamily::Uniform {});
        assert!(serde_json::from_str::<WeightFamily>(r#"{"family":"cubic","params":{}}"#).is_err());
    }
}
