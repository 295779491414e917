//! Closed-loop planar engagement against a stationary target.
//!
//! Two kinematic models are available. `Nonlinear` flies the missile at
//! constant speed in the inertial plane and reconstructs the guidance inputs
//! from the line of sight each step, with `tgo = R/V_M`. `Linear` integrates
//! the lateral double integrator `ẏ = v`, `v̇ = a` up to a fixed final time.
//!
//! The command is evaluated at the start of each step and held over it.

use std::io::{self, Write};

use crate::error::{Error, Result};
use crate::format::sig;
use crate::gains::{gains_at, DEFAULT_TGO_MIN};
use crate::guidance::{command_linear, pn_baseline, saturate, wrap_angle, LinearGuidanceState};
use crate::integrator::{self, Method};
use crate::weighting::{WeightFamily, WeightSpec};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

/// Missile position, flight-path angle and (constant) speed.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MissileState {
    pub x: f64,
    pub y: f64,
    /// Flight-path angle from the inertial x axis [rad].
    pub gamma: f64,
    pub speed: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Kinematics {
    #[default]
    Nonlinear,
    Linear,
}

/// Which command the loop flies.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub enum GuidanceLaw {
    /// Weighted optimal law with gains from the scenario weight.
    #[default]
    Optimal,
    /// Optimal gains multiplied by fixed factors.
    ScaledOptimal { k1_scale: f64, k2_scale: f64 },
    /// Linearised PN, no impact-angle constraint.
    ProportionalNavigation { nav_gain: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub missile: MissileState,
    pub target: Point,
    /// Desired impact angle [rad].
    pub gamma_f: f64,
    pub weight: WeightFamily,
    pub law: GuidanceLaw,
    pub kinematics: Kinematics,
    pub dt: f64,
    pub method: Method,
    pub tgo_min: f64,
    pub a_max: Option<f64>,
    /// Linear-mode final time; defaults to `R0/V_M`.
    pub tf: Option<f64>,
    /// Linear-mode initial `(y, v)`; defaults to the mapping of the geometry.
    pub linear_init: Option<(f64, f64)>,
}

impl Scenario {
    /// Linear-mode run from an explicit lateral state.
    pub fn linear(y0: f64, v0: f64, tf: f64, speed: f64, weight: WeightFamily, dt: f64) -> Self {
        Self {
            missile: MissileState { x: 0.0, y: 0.0, gamma: 0.0, speed },
            target: Point { x: speed * tf, y: 0.0 },
            gamma_f: 0.0,
            weight,
            law: GuidanceLaw::Optimal,
            kinematics: Kinematics::Linear,
            dt,
            method: Method::Rk4,
            tgo_min: DEFAULT_TGO_MIN,
            a_max: None,
            tf: Some(tf),
            linear_init: Some((y0, v0)),
        }
    }

    pub fn nonlinear(
        missile: MissileState,
        target: Point,
        gamma_f: f64,
        weight: WeightFamily,
        dt: f64,
    ) -> Self {
        Self {
            missile,
            target,
            gamma_f,
            weight,
            law: GuidanceLaw::Optimal,
            kinematics: Kinematics::Nonlinear,
            dt,
            method: Method::Rk4,
            tgo_min: DEFAULT_TGO_MIN,
            a_max: None,
            tf: None,
            linear_init: None,
        }
    }

    pub fn initial_range(&self) -> f64 {
        (self.target.x - self.missile.x).hypot(self.target.y - self.missile.y)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidScenario(msg));
        let m = &self.missile;
        if !(m.speed > 0.0 && m.speed.is_finite()) {
            return bad(format!("missile speed must be positive, got {}", m.speed));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.tgo_min >= 0.0) {
            return bad(format!("tgo_min must be non-negative, got {}", self.tgo_min));
        }
        if let Some(a) = self.a_max {
            if !(a > 0.0) {
                return bad(format!("a_max must be positive, got {a}"));
            }
        }
        if let Some(tf) = self.tf {
            if !(tf > 0.0 && tf.is_finite()) {
                return bad(format!("tf must be positive, got {tf}"));
            }
        }
        let fields = [m.x, m.y, m.gamma, self.target.x, self.target.y, self.gamma_f];
        if fields.iter().any(|v| !v.is_finite()) {
            return bad("non-finite geometry".into());
        }
        let needs_range = self.kinematics == Kinematics::Nonlinear || self.linear_init.is_none();
        if needs_range && !(self.initial_range() > 0.0) {
            return bad("initial range must be positive".into());
        }
        Ok(())
    }
}

/// One row of the trajectory log.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrajectoryRecord {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub gamma_m: f64,
    pub sigma: f64,
    pub tgo: f64,
    pub a_m: f64,
    /// Accumulated `½∫W·a²` up to `t`.
    pub running_cost: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TerminalMetrics {
    pub miss_distance: f64,
    /// Final flight-path angle minus the desired one [rad].
    pub impact_angle_error: f64,
    pub total_cost: f64,
    pub flight_time: f64,
    pub peak_accel: f64,
}

#[derive(Clone, Debug)]
pub struct SimOutput {
    pub records: Vec<TrajectoryRecord>,
    pub metrics: TerminalMetrics,
    /// Weight on `[0, flight_time]` used for the cost.
    pub weight: WeightSpec,
}

/// Line-of-sight angle from missile to target [rad].
pub fn los_angle(missile: &MissileState, target: &Point) -> f64 {
    (target.y - missile.y).atan2(target.x - missile.x)
}

/// Lateral state in the impact-angle frame from the inertial geometry,
/// with `tgo = R/V_M`.
pub fn linear_state_from_nonlinear(
    missile: &MissileState,
    target: &Point,
    gamma_f: f64,
    v_m: f64,
) -> Result<LinearGuidanceState> {
    let range = (target.x - missile.x).hypot(target.y - missile.y);
    if !(range > 0.0) {
        return Err(Error::SingularGeometry);
    }
    let sigma = los_angle(missile, target);
    Ok(LinearGuidanceState {
        y: range * wrap_angle(gamma_f - sigma),
        v: v_m * wrap_angle(missile.gamma - gamma_f),
        tgo: range / v_m,
    })
}

/// Command for the configured law, or `None` inside the terminal hold window.
fn law_command(
    law: &GuidanceLaw,
    weight: impl FnOnce() -> Result<(WeightSpec, f64)>,
    s: &LinearGuidanceState,
    tgo_min: f64,
) -> Result<Option<f64>> {
    if !(s.tgo >= tgo_min && s.tgo > 0.0) {
        return Ok(None);
    }
    let a = match *law {
        GuidanceLaw::ProportionalNavigation { nav_gain } => pn_baseline(s, nav_gain, tgo_min)?,
        GuidanceLaw::Optimal | GuidanceLaw::ScaledOptimal { .. } => {
            let (w, t) = weight()?;
            let mut k = gains_at(&w, t)?;
            if let GuidanceLaw::ScaledOptimal { k1_scale, k2_scale } = *law {
                k.k1 *= k1_scale;
                k.k2 *= k2_scale;
            }
            command_linear(&k, s, tgo_min)?
        }
    };
    Ok(Some(a))
}

pub fn simulate(sc: &Scenario) -> Result<SimOutput> {
    sc.validate()?;
    match sc.kinematics {
        Kinematics::Linear => simulate_linear(sc),
        Kinematics::Nonlinear => simulate_nonlinear(sc),
    }
}

fn finish(mut records: Vec<TrajectoryRecord>, miss: f64, angle_err: f64, family: &WeightFamily) -> Result<SimOutput> {
    let t_end = records.last().map(|r| r.t).ok_or(Error::InvalidTrajectory)?;
    let weight = family.spec(0.0, t_end)?;
    let running = cumulative_cost(&records, &weight)?;
    for (r, c) in records.iter_mut().zip(&running) {
        r.running_cost = *c;
    }
    let metrics = TerminalMetrics {
        miss_distance: miss,
        impact_angle_error: angle_err,
        total_cost: *running.last().unwrap(),
        flight_time: t_end,
        peak_accel: records.iter().map(|r| r.a_m.abs()).fold(0.0, f64::max),
    };
    Ok(SimOutput { records, metrics, weight })
}

fn simulate_linear(sc: &Scenario) -> Result<SimOutput> {
    let v_m = sc.missile.speed;
    let tf = sc.tf.unwrap_or_else(|| sc.initial_range() / v_m);
    let (y0, v0) = match sc.linear_init {
        Some(init) => init,
        None => {
            let s = linear_state_from_nonlinear(&sc.missile, &sc.target, sc.gamma_f, v_m)?;
            (s.y, s.v)
        }
    };
    let w = sc.weight.spec(0.0, tf)?;
    let mut x = [y0, v0];
    let mut t = 0.0;
    let mut k: u64 = 0;
    let mut held = 0.0;
    let mut records = Vec::new();

    loop {
        let tgo = (tf - t).max(0.0);
        let s = LinearGuidanceState { y: x[0], v: x[1], tgo };
        if let Some(a) = law_command(&sc.law, || Ok((w.clone(), t)), &s, sc.tgo_min)? {
            held = saturate(a, sc.a_max);
        }
        let gamma_m = sc.gamma_f + x[1] / v_m;
        records.push(TrajectoryRecord {
            t,
            x: -v_m * tgo,
            y: x[0],
            gamma_m,
            sigma: if tgo > 0.0 { sc.gamma_f - x[0] / (v_m * tgo) } else { gamma_m },
            tgo,
            a_m: held,
            running_cost: 0.0,
        });
        if tgo == 0.0 {
            break;
        }

        k += 1;
        let mut t_next = (k as f64 * sc.dt).min(tf);
        if tf - t_next < 1e-9 * sc.dt {
            t_next = tf;
        }
        let a = held;
        x = integrator::step(sc.method, |x: &[f64; 2]| [x[1], a], &x, t_next - t);
        t = t_next;
        if !x.iter().all(|v| v.is_finite()) {
            return Err(Error::Numerical { t, partial: records });
        }
    }

    let miss = x[0].abs();
    let angle_err = x[1] / v_m;
    finish(records, miss, angle_err, &sc.weight)
}

fn simulate_nonlinear(sc: &Scenario) -> Result<SimOutput> {
    let v_m = sc.missile.speed;
    let target = sc.target;
    let r0 = sc.initial_range();
    let nominal = r0 / v_m;
    let t_max = 10.0 * nominal + 100.0 * sc.dt;
    let closing_deadline = (0.25 * nominal).max(100.0 * sc.dt);

    let dynamics = |a: f64| {
        move |s: &[f64; 3]| [v_m * s[2].cos(), v_m * s[2].sin(), a / v_m]
    };
    // d(R²)/dt
    let range_sq_rate = |s: &[f64; 3]| {
        2.0 * ((s[0] - target.x) * v_m * s[2].cos() + (s[1] - target.y) * v_m * s[2].sin())
    };
    let range_sq = |s: &[f64; 3]| (s[0] - target.x).powi(2) + (s[1] - target.y).powi(2);
    let as_missile = |s: &[f64; 3]| MissileState { x: s[0], y: s[1], gamma: s[2], speed: v_m };

    let mut state = [sc.missile.x, sc.missile.y, sc.missile.gamma];
    let mut t = 0.0;
    let mut k: u64 = 0;
    let mut held = 0.0;
    let mut armed = false;
    let mut records: Vec<TrajectoryRecord> = Vec::new();

    loop {
        let m = as_missile(&state);
        let p0 = range_sq(&state);
        if p0 == 0.0 {
            let angle_err = wrap_angle(state[2] - sc.gamma_f);
            records.push(TrajectoryRecord {
                t,
                x: state[0],
                y: state[1],
                gamma_m: state[2],
                sigma: state[2],
                tgo: 0.0,
                a_m: held,
                running_cost: 0.0,
            });
            return finish(records, 0.0, angle_err, &sc.weight);
        }
        let s = linear_state_from_nonlinear(&m, &target, sc.gamma_f, v_m)?;
        let weight = || Ok((sc.weight.spec(0.0, s.tgo)?, 0.0));
        if let Some(a) = law_command(&sc.law, weight, &s, sc.tgo_min)? {
            held = saturate(a, sc.a_max);
        }
        records.push(TrajectoryRecord {
            t,
            x: state[0],
            y: state[1],
            gamma_m: state[2],
            sigma: los_angle(&m, &target),
            tgo: s.tgo,
            a_m: held,
            running_cost: 0.0,
        });

        k += 1;
        let t_next = k as f64 * sc.dt;
        let h = t_next - t;
        let next = integrator::step(sc.method, dynamics(held), &state, h);
        if !next.iter().all(|v| v.is_finite()) {
            return Err(Error::Numerical { t: t_next, partial: records });
        }

        let d0 = range_sq_rate(&state);
        if d0 < 0.0 {
            armed = true;
        }
        if armed && range_sq_rate(&next) >= 0.0 {
            // Closest approach inside this step: refine on a quadratic in R².
            let p1 = range_sq(&next);
            let c = (p1 - p0 - d0 * h) / (h * h);
            let tau = if c > 0.0 { (-d0 / (2.0 * c)).clamp(0.0, h) } else { h };
            let mut final_state = state;
            if tau > 1e-12 * h {
                final_state = integrator::step(sc.method, dynamics(held), &state, tau);
                let fm = as_missile(&final_state);
                let r = range_sq(&final_state).sqrt();
                records.push(TrajectoryRecord {
                    t: t + tau,
                    x: final_state[0],
                    y: final_state[1],
                    gamma_m: final_state[2],
                    sigma: if r > 0.0 { los_angle(&fm, &target) } else { final_state[2] },
                    tgo: r / v_m,
                    a_m: held,
                    running_cost: 0.0,
                });
            }
            // range of the integrated state, not the fitted minimum, which can dip below zero
            let miss = range_sq(&final_state).sqrt();
            let angle_err = wrap_angle(final_state[2] - sc.gamma_f);
            return finish(records, miss, angle_err, &sc.weight);
        }

        state = next;
        t = t_next;
        if !armed && t > closing_deadline {
            return Err(Error::Divergence {
                t,
                reason: "range has not started closing".into(),
                partial: records,
            });
        }
        if t > t_max {
            return Err(Error::Divergence {
                t,
                reason: "no closest approach within ten nominal flight times".into(),
                partial: records,
            });
        }
    }
}

fn check_records(records: &[TrajectoryRecord]) -> Result<()> {
    if records.is_empty() || records.windows(2).any(|p| !(p[1].t > p[0].t)) {
        return Err(Error::InvalidTrajectory);
    }
    Ok(())
}

/// Cumulative trapezoidal `½∫W·a²` at each record.
///
/// A zero inverse weight at the final time contributes nothing: it is the
/// limit of the optimal integrand, whose command vanishes like `W⁻¹`.
pub fn cumulative_cost(records: &[TrajectoryRecord], w: &WeightSpec) -> Result<Vec<f64>> {
    check_records(records)?;
    let integrand = |r: &TrajectoryRecord| -> Result<f64> {
        let iw = w.inv_w(r.t);
        if iw == 0.0 && r.t >= w.tf() {
            return Ok(0.0);
        }
        if !(iw > 0.0 && iw.is_finite()) {
            return Err(Error::InfeasibleWeight { t: r.t, value: iw });
        }
        Ok(0.5 * r.a_m * r.a_m / iw)
    };
    let mut out = Vec::with_capacity(records.len());
    let mut acc = 0.0;
    let mut prev = integrand(&records[0])?;
    out.push(0.0);
    for p in records.windows(2) {
        let cur = integrand(&p[1])?;
        acc += 0.5 * (prev + cur) * (p[1].t - p[0].t);
        out.push(acc);
        prev = cur;
    }
    Ok(out)
}

/// Trapezoidal `½∫W(τ)·a(τ)² dτ` over the logged commands.
pub fn realized_cost(records: &[TrajectoryRecord], w: &WeightSpec) -> Result<f64> {
    Ok(*cumulative_cost(records, w)?.last().unwrap())
}

pub const TRAJECTORY_CSV_HEADER: &str = "t,x,y,gamma_M,sigma,tgo,a_M,running_cost";

pub fn write_trajectory_csv<W: Write>(mut out: W, records: &[TrajectoryRecord]) -> io::Result<()> {
    writeln!(out, "{TRAJECTORY_CSV_HEADER}")?;
    for r in records {
        let row = [r.t, r.x, r.y, r.gamma_m, r.sigma, r.tgo, r.a_m, r.running_cost];
        let cells: Vec<String> = row.iter().map(|v| sig(*v, 12)).collect();
        writeln!(out, "{}", cells.join(","))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weighting::uniform_weight;

    fn rec(t: f64, a: f64) -> TrajectoryRecord {
        TrajectoryRecord { t, x: 0.0, y: 0.0, gamma_m: 0.0, sigma: 0.0, tgo: 0.0, a_m: a, running_cost: 0.0 }
    }

    #[test]
    fn cost_of_trivial_commands() {
        let w = uniform_weight(0.0, 2.0).unwrap();
        let zero: Vec<_> = (0..=20).map(|i| rec(0.1 * i as f64, 0.0)).collect();
        assert_eq!(realized_cost(&zero, &w).unwrap(), 0.0);
        let one: Vec<_> = (0..=20).map(|i| rec(0.1 * i as f64, 1.0)).collect();
        assert!((realized_cost(&one, &w).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cost_rejects_bad_input() {
        let w = uniform_weight(0.0, 2.0).unwrap();
        assert!(matches!(realized_cost(&[], &w), Err(Error::InvalidTrajectory)));
        let back = [rec(1.0, 0.0), rec(0.5, 0.0)];
        assert!(matches!(realized_cost(&back, &w), Err(Error::InvalidTrajectory)));
        let neg = WeightSpec::new(0.0, 2.0, |t| 1.0 - t).unwrap();
        let recs: Vec<_> = (0..=4).map(|i| rec(0.5 * i as f64, 1.0)).collect();
        assert!(matches!(realized_cost(&recs, &neg), Err(Error::InfeasibleWeight { .. })));
    }

    #[test]
    fn mapping_examples() {
        let target = Point { x: 1000.0, y: 0.0 };
        let gf = 0.0;
        let on_course = MissileState { x: 0.0, y: 0.0, gamma: gf, speed: 300.0 };
        let s = linear_state_from_nonlinear(&on_course, &target, gf, 300.0).unwrap();
        assert_eq!((s.y, s.v), (0.0, 0.0));

        let m = MissileState { x: 0.0, y: 0.0, gamma: 0.1, speed: 300.0 };
        let t = Point { x: 3000.0, y: 0.0 };
        let s = linear_state_from_nonlinear(&m, &t, 0.1, 300.0).unwrap();
        assert_eq!(s.v, 0.0);
        assert!((s.y - 300.0 * 10.0 * 0.1).abs() < 1e-9);

        let m = MissileState { gamma: 0.0, ..m };
        let s = linear_state_from_nonlinear(&m, &t, 0.1, 300.0).unwrap();
        assert!((s.tgo - 10.0).abs() < 1e-12);
        assert!((s.y - 300.0).abs() < 1e-9 && (s.v + 30.0).abs() < 1e-12);

        let here = Point { x: 0.0, y: 0.0 };
        assert!(matches!(linear_state_from_nonlinear(&m, &here, 0.1, 300.0), Err(Error::SingularGeometry)));
    }

    #[test]
    fn invalid_scenarios() {
        let mut sc = Scenario::linear(100.0, 0.0, 10.0, 300.0, WeightFamily::Uniform {}, 1e-3);
        sc.dt = 0.0;
        assert!(matches!(simulate(&sc), Err(Error::InvalidScenario(_))));
        let mut sc = Scenario::linear(100.0, 0.0, 10.0, 300.0, WeightFamily::Uniform {}, 1e-3);
        sc.missile.speed = -1.0;
        assert!(simulate(&sc).is_err());
        let m = MissileState { x: 5.0, y: 5.0, gamma: 0.0, speed: 200.0 };
        let sc = Scenario::nonlinear(m, Point { x: 5.0, y: 5.0 }, 0.0, WeightFamily::Uniform {}, 1e-3);
        assert!(matches!(simulate(&sc), Err(Error::InvalidScenario(_))));
    }

    #[test]
    fn flying_away_diverges() {
        let m = MissileState { x: 0.0, y: 0.0, gamma: std::f64::consts::PI, speed: 250.0 };
        let mut sc = Scenario::nonlinear(m, Point { x: 5000.0, y: 0.0 }, 0.0, WeightFamily::Uniform {}, 1e-2);
        sc.a_max = Some(1.0);
        match simulate(&sc) {
            Err(e @ Error::Divergence { .. }) => assert!(!e.partial_trajectory().unwrap().is_empty()),
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn csv_shape() {
        let mut buf = Vec::new();
        write_trajectory_csv(&mut buf, &[rec(0.0, -14.0), rec(1.0 / 3.0, 2.5)]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], TRAJECTORY_CSV_HEADER);
        assert_eq!(lines[1], "0,0,0,0,0,0,-14,0");
        assert!(lines[2].starts_with("0.333333333333,"));
    }
}
