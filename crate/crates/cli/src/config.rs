//! Scenario file schema and conversion to a core `Scenario`.

use std::fs;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use serde::Deserialize;
use wogl_core::engagement::{GuidanceLaw, Kinematics, MissileState, Point, Scenario};
use wogl_core::gains::DEFAULT_TGO_MIN;
use wogl_core::integrator::Method;
use wogl_core::weighting::WeightFamily;

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub missile: MissileSection,
    pub target: TargetSection,
    pub guidance: GuidanceSection,
    pub sim: SimSection,
    #[serde(default)]
    pub sweep: Option<SweepSection>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MissileSection {
    #[serde(default)]
    pub x: f64,
    #[serde(default)]
    pub y: f64,
    pub gamma_deg: f64,
    pub speed: f64,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetSection {
    pub x: f64,
    pub y: f64,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GuidanceSection {
    pub weight: WeightFamily,
    pub gamma_f_deg: f64,
    #[serde(default = "default_tgo_min")]
    pub tgo_min: f64,
    #[serde(default)]
    pub a_max: Option<f64>,
    #[serde(default)]
    pub law: LawSection,
}

fn default_tgo_min() -> f64 {
    DEFAULT_TGO_MIN
}

#[derive(Clone, Copy, Debug, Default, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum LawSection {
    #[default]
    Optimal,
    ScaledOptimal { k1_scale: f64, k2_scale: f64 },
    Pn { nav_gain: f64 },
}

#[derive(Clone, Copy, Debug, Default, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    #[default]
    Nonlinear,
    Linear,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSection {
    #[serde(default)]
    pub mode: Mode,
    pub dt: f64,
    #[serde(default)]
    pub tf: Option<f64>,
    #[serde(default)]
    pub method: Method,
    /// Linear mode only: initial lateral offset [m].
    #[serde(default)]
    pub y0: Option<f64>,
    /// Linear mode only: initial lateral velocity [m/s].
    #[serde(default)]
    pub v0: Option<f64>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub param: String,
    pub values: Vec<f64>,
}

impl ScenarioFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .with_context(|| format!("cannot read scenario file {}", path.display()))?;
        serde_json::from_str(&text).map_err(|e| anyhow!("{}: {e}", path.display()))
    }

    pub fn to_scenario(&self) -> Result<Scenario> {
        let m = &self.missile;
        let sim = &self.sim;
        if sim.mode == Mode::Nonlinear && (sim.y0.is_some() || sim.v0.is_some() || sim.tf.is_some()) {
            bail!("sim.y0, sim.v0 and sim.tf apply to linear mode only");
        }
        let linear_init = match (sim.y0, sim.v0) {
            (None, None) => None,
            (y0, v0) => Some((y0.unwrap_or(0.0), v0.unwrap_or(0.0))),
        };
        let law = match self.guidance.law {
            LawSection::Optimal => GuidanceLaw::Optimal,
            LawSection::ScaledOptimal { k1_scale, k2_scale } => GuidanceLaw::ScaledOptimal { k1_scale, k2_scale },
            LawSection::Pn { nav_gain } => GuidanceLaw::ProportionalNavigation { nav_gain },
        };
        let sc = Scenario {
            missile: MissileState { x: m.x, y: m.y, gamma: m.gamma_deg.to_radians(), speed: m.speed },
            target: Point { x: self.target.x, y: self.target.y },
            gamma_f: self.guidance.gamma_f_deg.to_radians(),
            weight: self.guidance.weight.clone(),
            law,
            kinematics: match sim.mode {
                Mode::Nonlinear => Kinematics::Nonlinear,
                Mode::Linear => Kinematics::Linear,
            },
            dt: sim.dt,
            method: sim.method,
            tgo_min: self.guidance.tgo_min,
            a_max: self.guidance.a_max,
            tf: sim.tf,
            linear_init,
        };
        sc.validate()?;
        Ok(sc)
    }
}
