//! Independent checks on the closed-form gains.
//!
//! Two routes are provided. The Schwarz-bound route rebuilds the open-loop
//! optimal command and its minimum cost from the boundary data and the
//! moments. The discrete route solves the zero-order-hold minimum-energy
//! problem directly as a two-constraint weighted least-norm problem and
//! never touches the moment formulas or the gains.

use crate::error::{Error, Result};
use crate::gains::{gram_determinant, MomentTriple};
use crate::guidance::LinearGuidanceState;
use crate::quadrature;
use crate::weighting::WeightSpec;

/// `exp(A·tgo)` for the double integrator.
pub fn state_transition(tgo: f64) -> [[f64; 2]; 2] {
    [[1.0, tgo], [0.0, 1.0]]
}

/// Free-response terminal terms and the control influence functions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundaryData {
    /// Zero-effort miss `y + tgo·v` [m].
    pub f1: f64,
    /// `v` [m/s].
    pub f2: f64,
    pub tf: f64,
}

impl BoundaryData {
    pub fn new(s: &LinearGuidanceState, tf: f64) -> Self {
        Self { f1: s.y + s.tgo * s.v, f2: s.v, tf }
    }

    pub fn h1(&self, tau: f64) -> f64 {
        -(self.tf - tau)
    }

    pub fn h2(&self, _tau: f64) -> f64 {
        -1.0
    }
}

/// Open-loop optimal command `u*(τ)` for fixed boundary data.
#[derive(Clone, Debug)]
pub struct SchwarzCommand {
    bd: BoundaryData,
    m: MomentTriple,
    det: f64,
    w: WeightSpec,
}

impl SchwarzCommand {
    pub fn eval(&self, tau: f64) -> f64 {
        let (f1, f2) = (self.bd.f1, self.bd.f2);
        let (h1, h2) = (self.bd.h1(tau), self.bd.h2(tau));
        let MomentTriple { g1, g12, g2 } = self.m;
        let num = f1 * h1 * g2 - g12 * (f1 * h2 + f2 * h1) + f2 * h2 * g1;
        num * self.w.inv_w(tau) / self.det
    }
}

pub fn schwarz_command(bd: &BoundaryData, m: &MomentTriple, w: &WeightSpec) -> Result<SchwarzCommand> {
    let det = gram_determinant(m);
    if !(det > 0.0) {
        return Err(Error::DegenerateMoments { det });
    }
    Ok(SchwarzCommand { bd: *bd, m: *m, det, w: w.clone() })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SchwarzSolution {
    /// Optimal multiplier; `None` when `f1·g2 − f2·g12` vanishes.
    pub lambda_star: Option<f64>,
    /// Command scale `f1 / (g1 − λ*·g12)`.
    pub k: Option<f64>,
    pub j_min: f64,
}

/// The Schwarz lower bound on the cost as a function of the multiplier.
pub fn cost_bound(bd: &BoundaryData, m: &MomentTriple, lambda: f64) -> f64 {
    let r = bd.f1 - lambda * bd.f2;
    r * r / (2.0 * (m.g1 - 2.0 * lambda * m.g12 + lambda * lambda * m.g2))
}

/// `½·fᵀ G⁻¹ f` with `G = [[g1, g12], [g12, g2]]`: the supremum of
/// [`cost_bound`] over the multiplier, finite in every case.
pub fn min_cost_quadratic(bd: &BoundaryData, m: &MomentTriple) -> f64 {
    let det = gram_determinant(m);
    let (f1, f2) = (bd.f1, bd.f2);
    (f1 * f1 * m.g2 - 2.0 * f1 * f2 * m.g12 + f2 * f2 * m.g1) / (2.0 * det)
}

pub fn schwarz_cost(bd: &BoundaryData, m: &MomentTriple) -> SchwarzSolution {
    let den = bd.f1 * m.g2 - bd.f2 * m.g12;
    let scale = (bd.f1 * m.g2).abs() + (bd.f2 * m.g12).abs();
    if den == 0.0 || den.abs() <= 1e-12 * scale {
        // λ* runs off to infinity; the bound's supremum is its λ → ±∞ limit.
        return SchwarzSolution { lambda_star: None, k: None, j_min: min_cost_quadratic(bd, m) };
    }
    let lambda = (bd.f1 * m.g12 - bd.f2 * m.g1) / den;
    let k = den / gram_determinant(m);
    SchwarzSolution { lambda_star: Some(lambda), k: Some(k), j_min: cost_bound(bd, m, lambda) }
}

/// Zero-order-hold discretisation of the minimum-energy transfer to the origin.
#[derive(Clone, Debug)]
pub struct DiscreteProblem {
    pub t: f64,
    pub tf: f64,
    pub dt: f64,
    /// Time-to-go at each cell midpoint.
    pub s_mid: Vec<f64>,
    /// `W⁻¹` at each cell midpoint.
    pub inv_w_mid: Vec<f64>,
    /// Required `Σ Γ_k u_k`, i.e. `−Φ(tgo)·x(t)`.
    pub rhs: [f64; 2],
    x0: [f64; 2],
}

#[derive(Clone, Debug)]
pub struct DiscreteSolution {
    pub commands: Vec<f64>,
    pub cost: f64,
    pub dt: f64,
}

impl DiscreteProblem {
    pub fn new(state: &LinearGuidanceState, w: &WeightSpec, steps: usize) -> Result<Self> {
        if steps < 2 {
            return Err(Error::InvalidScenario("discrete oracle needs at least 2 steps".into()));
        }
        if !(state.tgo > 0.0) {
            return Err(Error::BelowTgoFloor { tgo: state.tgo, tgo_min: 0.0 });
        }
        let tf = w.tf();
        let t = tf - state.tgo;
        let dt = state.tgo / steps as f64;
        let mut s_mid = Vec::with_capacity(steps);
        let mut inv_w_mid = Vec::with_capacity(steps);
        for k in 0..steps {
            let tau = t + (k as f64 + 0.5) * dt;
            let iw = w.inv_w(tau);
            if !(iw > 0.0 && iw.is_finite()) {
                return Err(Error::InfeasibleWeight { t: tau, value: iw });
            }
            s_mid.push(tf - tau);
            inv_w_mid.push(iw);
        }
        let phi = state_transition(state.tgo);
        let x0 = [state.y, state.v];
        let free = [phi[0][0] * x0[0] + phi[0][1] * x0[1], phi[1][0] * x0[0] + phi[1][1] * x0[1]];
        Ok(Self { t, tf, dt, s_mid, inv_w_mid, rhs: [-free[0], -free[1]], x0 })
    }

    pub fn len(&self) -> usize {
        self.s_mid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s_mid.is_empty()
    }

    /// Exact terminal-state influence of a unit command held over cell `k`.
    pub fn influence(&self, k: usize) -> [f64; 2] {
        [self.dt * self.s_mid[k], self.dt]
    }

    /// Terminal state reached under the piecewise-constant command sequence.
    pub fn terminal_state(&self, u: &[f64]) -> [f64; 2] {
        let phi = state_transition(self.tf - self.t);
        let mut x = [phi[0][0] * self.x0[0] + phi[0][1] * self.x0[1], self.x0[1]];
        for (k, &uk) in u.iter().enumerate() {
            let g = self.influence(k);
            x[0] += g[0] * uk;
            x[1] += g[1] * uk;
        }
        x
    }

    /// `½ Σ W(τ_k)·u_k²·Δt` with the weight sampled at cell midpoints.
    pub fn discrete_cost(&self, u: &[f64]) -> f64 {
        0.5 * self.dt * u.iter().zip(&self.inv_w_mid).map(|(u, iw)| u * u / iw).sum::<f64>()
    }

    /// `½ ∫ W(τ)·u(τ)² dτ` for the piecewise-constant command, with each
    /// cell's weight integrated by adaptive quadrature. A cell with nonzero
    /// command where `∫W` does not converge is reported as a quadrature failure.
    pub fn exact_cost(&self, u: &[f64], w: &WeightSpec) -> Result<f64> {
        let mut total = 0.0;
        for (k, &uk) in u.iter().enumerate() {
            if uk == 0.0 {
                continue;
            }
            let a = self.t + k as f64 * self.dt;
            let b = if k + 1 == u.len() { self.tf } else { a + self.dt };
            let r = quadrature::integrate(|tau| 1.0 / w.inv_w(tau), a, b, 1e-12)?;
            total += 0.5 * uk * uk * r.value;
        }
        Ok(total)
    }

    /// Euclidean projection of `delta` onto the null space of the constraints,
    /// so that `u + project(delta)` still reaches the origin.
    pub fn project_to_null_space(&self, delta: &[f64]) -> Result<Vec<f64>> {
        let mut gram = [[0.0; 2]; 2];
        let mut gd = [0.0; 2];
        for (k, &d) in delta.iter().enumerate() {
            let g = self.influence(k);
            for i in 0..2 {
                gd[i] += g[i] * d;
                for j in 0..2 {
                    gram[i][j] += g[i] * g[j];
                }
            }
        }
        let c = solve2(&gram, &gd)?;
        Ok(delta
            .iter()
            .enumerate()
            .map(|(k, &d)| {
                let g = self.influence(k);
                d - g[0] * c[0] - g[1] * c[1]
            })
            .collect())
    }

    /// Weighted least-norm solution via Lagrange multipliers.
    pub fn solve(&self) -> Result<DiscreteSolution> {
        // u_k = W⁻¹_k·Γ_kᵀμ/Δt,  M = Σ Γ_k Γ_kᵀ W⁻¹_k/Δt,  M·μ = rhs
        let mut m = [[0.0; 2]; 2];
        for k in 0..self.len() {
            let g = self.influence(k);
            let c = self.inv_w_mid[k] / self.dt;
            for i in 0..2 {
                for j in 0..2 {
                    m[i][j] += c * g[i] * g[j];
                }
            }
        }
        let mu = solve2(&m, &self.rhs)?;
        let commands: Vec<f64> = (0..self.len())
            .map(|k| {
                let g = self.influence(k);
                self.inv_w_mid[k] / self.dt * (g[0] * mu[0] + g[1] * mu[1])
            })
            .collect();
        let cost = self.discrete_cost(&commands);
        Ok(DiscreteSolution { commands, cost, dt: self.dt })
    }
}

fn solve2(m: &[[f64; 2]; 2], b: &[f64; 2]) -> Result<[f64; 2]> {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let scale = (m[0][0] * m[1][1]).abs() + (m[0][1] * m[1][0]).abs();
    if !(det.abs() > 1e-14 * scale) || !det.is_finite() {
        return Err(Error::DegenerateConstraints { det });
    }
    Ok([
        (m[1][1] * b[0] - m[0][1] * b[1]) / det,
        (m[0][0] * b[1] - m[1][0] * b[0]) / det,
    ])
}

/// Brute-force discrete minimum-energy command sequence and its cost.
pub fn discrete_optimal(
    state: &LinearGuidanceState,
    w: &WeightSpec,
    steps: usize,
) -> Result<DiscreteSolution> {
    DiscreteProblem::new(state, w, steps)?.solve()
}
