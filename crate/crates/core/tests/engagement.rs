use proptest::prelude::*;

use wogl_core::engagement::{simulate, GuidanceLaw, MissileState, Point, Scenario, TrajectoryRecord};
use wogl_core::gains::moments_analytic;
use wogl_core::oracle::{schwarz_cost, BoundaryData};
use wogl_core::weighting::{uniform_weight, WeightFamily};
use wogl_core::LinearGuidanceState;

fn linear_uniform(dt: f64) -> Scenario {
    Scenario::linear(100.0, 0.0, 10.0, 300.0, WeightFamily::Uniform {}, dt)
}

fn check_records(records: &[TrajectoryRecord]) {
    assert!(records.windows(2).all(|p| p[1].t > p[0].t), "times not strictly increasing");
    assert!(records.windows(2).all(|p| p[1].running_cost >= p[0].running_cost), "running cost decreased");
}

fn a_at_tgo(records: &[TrajectoryRecord], tgo: f64) -> f64 {
    records
        .iter()
        .min_by(|a, b| (a.tgo - tgo).abs().total_cmp(&(b.tgo - tgo).abs()))
        .unwrap()
        .a_m
}

#[test]
fn linear_mode_fine_step_accuracy() {
    let out = simulate(&linear_uniform(1e-4 * 10.0)).unwrap();
    assert!(out.metrics.miss_distance < 1e-4 * 100.0);
    check_records(&out.records);
}

#[test]
fn linear_cost_matches_minimum() {
    let out = simulate(&linear_uniform(1e-3)).unwrap();
    let s = LinearGuidanceState { y: 100.0, v: 0.0, tgo: 10.0 };
    let m = moments_analytic(&uniform_weight(0.0, 10.0).unwrap(), 0.0).unwrap();
    let j_min = schwarz_cost(&BoundaryData::new(&s, 10.0), &m).j_min;
    assert!((out.metrics.total_cost - j_min).abs() < 0.01 * j_min);
}

#[test]
fn optimal_law_has_least_cost_among_constrained_alternatives() {
    let optimal = simulate(&linear_uniform(1e-3)).unwrap().metrics;
    let mut compared = 0;
    for (s1, s2) in [(0.8, 1.0), (1.2, 1.0), (1.0, 0.8), (1.0, 1.2), (1.2, 1.2), (0.8, 0.8)] {
        let mut sc = linear_uniform(1e-3);
        sc.law = GuidanceLaw::ScaledOptimal { k1_scale: s1, k2_scale: s2 };
        let m = simulate(&sc).unwrap().metrics;
        if m.miss_distance < 1e-2 {
            compared += 1;
            assert!(optimal.total_cost <= m.total_cost, "scale ({s1}, {s2}): {} < {}", m.total_cost, optimal.total_cost);
        }
    }
    assert!(compared > 0);

    let mut sc = linear_uniform(1e-3);
    sc.law = GuidanceLaw::ProportionalNavigation { nav_gain: 3.0 };
    let pn = simulate(&sc).unwrap().metrics;
    assert!(pn.impact_angle_error.abs() > 1e-2);
    assert!(optimal.impact_angle_error.abs() < 1e-6);
}

#[test]
fn power_weight_softens_terminal_command() {
    let uniform = simulate(&linear_uniform(1e-3)).unwrap();
    let mut sc = linear_uniform(1e-3);
    sc.weight = WeightFamily::PowerTgo { n: 1.0 };
    let power = simulate(&sc).unwrap();
    let (a0, a1) = (a_at_tgo(&uniform.records, 1.0), a_at_tgo(&power.records, 1.0));
    assert!(a1.abs() < a0.abs(), "n=1 {a1} vs n=0 {a0}");
}

#[test]
fn shallow_nonlinear_engagement() {
    let missile = MissileState { x: 0.0, y: 0.0, gamma: 10f64.to_radians(), speed: 250.0 };
    let sc = Scenario::nonlinear(missile, Point { x: 5000.0, y: 0.0 }, (-30f64).to_radians(), WeightFamily::Uniform {}, 1e-3);
    let out = simulate(&sc).unwrap();
    assert!(out.metrics.miss_distance < 0.5);
    assert!(out.metrics.impact_angle_error.to_degrees().abs() < 0.5);
    check_records(&out.records);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn nonlinear_speed_is_constant(
        gamma0 in -20.0..30.0f64,
        gamma_f in -60.0..0.0f64,
        range in 2000.0..6000.0f64,
        speed in 150.0..400.0f64,
        n in 0.0..2.0f64,
    ) {
        let missile = MissileState { x: 0.0, y: 0.0, gamma: gamma0.to_radians(), speed };
        let sc = Scenario::nonlinear(missile, Point { x: range, y: 0.0 }, gamma_f.to_radians(), WeightFamily::PowerTgo { n }, 2e-3);
        let out = simulate(&sc).unwrap();
        let r = &out.records;
        for p in r.windows(2) {
            let dt = p[1].t - p[0].t;
            let chord = ((p[1].x - p[0].x).powi(2) + (p[1].y - p[0].y).powi(2)).sqrt();
            let turn = (p[1].gamma_m - p[0].gamma_m).abs();
            // chord of an arc of length V·dt with turn angle θ is V·dt·sinc(θ/2)
            let expected = speed * dt * if turn > 0.0 { (turn / 2.0).sin() / (turn / 2.0) } else { 1.0 };
            prop_assert!((chord - expected).abs() <= 1e-6 * speed * dt, "chord {chord} vs {expected}");
        }
        prop_assert!(r.windows(2).all(|p| p[1].t > p[0].t));
        prop_assert!(r.windows(2).all(|p| p[1].running_cost >= p[0].running_cost));
    }
}
