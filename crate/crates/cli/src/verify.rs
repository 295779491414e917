use wogl_core::engagement::{linear_state_from_nonlinear, Kinematics, Scenario};
use wogl_core::gains::{gain_pair, gram_determinant, moments_analytic, moments_quadrature};
use wogl_core::guidance::{command_angles, command_linear, command_predictive_form};
use wogl_core::oracle::{discrete_optimal, schwarz_command, schwarz_cost, BoundaryData};
use wogl_core::{check_feasible, AngleGuidanceState, LinearGuidanceState, Result, WeightSpec};

pub struct Check {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    fn from_result(name: &'static str, r: Result<(bool, String)>) -> Self {
        match r {
            Ok((pass, detail)) => Check { name, pass, detail },
            Err(e) => Check { name, pass: false, detail: format!("error: {e}") },
        }
    }
}

const SAMPLES: usize = 50;

/// Interior evaluation times `t ∈ [0, 0.95·horizon]`.
fn times(horizon: f64) -> impl Iterator<Item = f64> {
    (0..SAMPLES).map(move |i| 0.95 * horizon * i as f64 / (SAMPLES - 1) as f64)
}

fn rel(a: f64, b: f64) -> f64 {
    let d = (a - b).abs();
    if d == 0.0 {
        0.0
    } else {
        d / a.abs().max(b.abs())
    }
}

/// Initial linear state of the scenario, with `tgo` the guidance horizon.
pub fn initial_state(sc: &Scenario) -> Result<LinearGuidanceState> {
    let v_m = sc.missile.speed;
    if sc.kinematics == Kinematics::Linear {
        let tgo = sc.tf.unwrap_or_else(|| sc.initial_range() / v_m);
        let (y, v) = match sc.linear_init {
            Some(init) => init,
            None => {
                let s = linear_state_from_nonlinear(&sc.missile, &sc.target, sc.gamma_f, v_m)?;
                (s.y, s.v)
            }
        };
        return Ok(LinearGuidanceState { y, v, tgo });
    }
    linear_state_from_nonlinear(&sc.missile, &sc.target, sc.gamma_f, v_m)
}

fn feasibility(w: &WeightSpec) -> (bool, String) {
    let r = check_feasible(w, 1000);
    let mut detail = format!("min W^-1 {:.3e}", r.min_inv_w);
    if let Some([a, b, c]) = r.anti_residuals {
        detail += &format!(", antiderivative residuals {a:.1e}/{b:.1e}/{c:.1e}");
    }
    if !r.violations.is_empty() {
        detail += &format!("; {}", r.violations.join("; "));
    }
    (r.is_feasible(), detail)
}

fn gram_positivity(w: &WeightSpec, horizon: f64) -> Result<(bool, String)> {
    let mut min_det = f64::INFINITY;
    let mut min_ratio = f64::INFINITY;
    for t in times(horizon) {
        let m = moments_analytic(w, t).or_else(|_| moments_quadrature(w, t, 1e-12))?;
        let det = gram_determinant(&m);
        min_det = min_det.min(det);
        min_ratio = min_ratio.min(det / (m.g1 * m.g2));
    }
    Ok((min_det > 0.0, format!("min gram determinant {min_det:.3e} (normalised {min_ratio:.3e})")))
}

fn analytic_vs_quadrature(w: &WeightSpec, horizon: f64) -> Result<(bool, String)> {
    let mut worst = 0.0f64;
    for t in times(horizon) {
        let a = moments_analytic(w, t)?;
        let q = moments_quadrature(w, t, 1e-10)?;
        worst = worst.max(rel(a.g1, q.g1)).max(rel(a.g12, q.g12)).max(rel(a.g2, q.g2));
    }
    Ok((worst < 1e-8, format!("max relative residual {worst:.2e} (tol 1e-8)")))
}

fn oracle_agreement(w: &WeightSpec, s: &LinearGuidanceState, steps: usize) -> Result<(bool, String)> {
    let m = moments_analytic(w, 0.0)?;
    let k = gain_pair(&m, w.inv_w(0.0), s.tgo)?;
    let bd = BoundaryData::new(s, s.tgo);
    let u_star = schwarz_command(&bd, &m, w)?.eval(0.0);
    let j_min = schwarz_cost(&bd, &m).j_min;
    let scale = (k.k1 * s.y / (s.tgo * s.tgo)).abs() + (k.k2 * s.v / s.tgo).abs();
    if scale == 0.0 {
        return Ok((true, "zero initial state, command and cost are 0".into()));
    }
    let coarse = discrete_optimal(s, w, steps)?;
    let fine = discrete_optimal(s, w, 2 * steps)?;
    let e1 = (coarse.commands[0] - u_star).abs() / scale;
    let e2 = (fine.commands[0] - u_star).abs() / scale;
    let ec = rel(coarse.cost, j_min);
    let pass = e1 <= 0.01 && ec <= 0.01 && (e2 < e1 || e2 < 1e-12);
    Ok((
        pass,
        format!("u0 residual {e1:.2e} ({steps} steps) -> {e2:.2e} ({} steps), cost residual {ec:.2e}, j_min {j_min:.6e}", 2 * steps),
    ))
}

/// Sum of the magnitudes of the two feedback terms, the yardstick for command residuals.
fn command_scale(k1: f64, k2: f64, s: &LinearGuidanceState) -> f64 {
    ((k1 * s.y / (s.tgo * s.tgo)).abs() + (k2 * s.v / s.tgo).abs()).max(f64::MIN_POSITIVE)
}

fn form_equivalence(w: &WeightSpec, s: &LinearGuidanceState, v_m: f64) -> Result<(bool, String)> {
    let (mut closed, mut frames) = (0.0f64, 0.0f64);
    let tf = s.tgo;
    for (i, t) in times(tf).enumerate() {
        let tgo = tf - t;
        // states on a fixed lattice around the scenario's own state
        let c = 1.0 - 2.0 * i as f64 / SAMPLES as f64;
        let st = LinearGuidanceState { y: s.y * c + 10.0 * tgo, v: s.v - 5.0 * c, tgo };
        let m = moments_analytic(w, t)?;
        let k = gain_pair(&m, w.inv_w(t), tgo)?;
        let scale = command_scale(k.k1, k.k2, &st);
        let a = command_linear(&k, &st, 0.0)?;
        let u = schwarz_command(&BoundaryData::new(&st, tf), &m, w)?.eval(t);
        closed = closed.max((u - a).abs() / scale);
        let pred = command_predictive_form(&k, &st, 0.0, 0.0, 0.0)?;
        let gamma_f = 0.1 * c;
        let ang = AngleGuidanceState {
            sigma: gamma_f - st.y / (v_m * tgo),
            gamma_m: gamma_f + st.v / v_m,
            gamma_f,
            v_m,
            tgo,
        };
        let mapped = ang.to_linear();
        let lin = command_linear(&k, &mapped, 0.0)?;
        let lin_scale = command_scale(k.k1, k.k2, &mapped);
        frames = frames
            .max((pred - a).abs() / scale)
            .max((command_angles(&k, &ang, 0.0)? - lin).abs() / lin_scale);
    }
    Ok((
        closed <= 1e-9 && frames <= 1e-12,
        format!("open-loop vs feedback {closed:.1e} (tol 1e-9), angle/predictive forms {frames:.1e} (tol 1e-12)"),
    ))
}

pub fn run_checks(sc: &Scenario, steps: usize) -> Result<Vec<Check>> {
    let s = initial_state(sc)?;
    let w = sc.weight.spec(0.0, s.tgo)?;
    let (ok, detail) = feasibility(&w);
    let mut checks = vec![Check { name: "feasibility", pass: ok, detail }];
    checks.push(Check::from_result("gram_positivity", gram_positivity(&w, s.tgo)));
    checks.push(Check::from_result("analytic_vs_quadrature", analytic_vs_quadrature(&w, s.tgo)));
    checks.push(Check::from_result("oracle_agreement", oracle_agreement(&w, &s, steps)));
    checks.push(Check::from_result("form_equivalence", form_equivalence(&w, &s, sc.missile.speed)));
    Ok(checks)
}
