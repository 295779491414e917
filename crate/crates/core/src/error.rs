use thiserror::Error;

use crate::engagement::TrajectoryRecord;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid interval: tf ({tf}) must exceed t0 ({t0})")]
    InvalidInterval { t0: f64, tf: f64 },

    #[error("unsupported parameter {name} = {value}: {reason}")]
    UnsupportedParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("analytic moments unavailable: weight has no antiderivatives")]
    AnalyticPathUnavailable,

    #[error("evaluation time {t} outside [{t0}, {tf})")]
    TimeOutOfRange { t: f64, t0: f64, tf: f64 },

    #[error("quadrature did not converge (worst residual {residual:e} after {subdivisions} subdivisions)")]
    QuadratureFailure { residual: f64, subdivisions: usize },

    #[error("degenerate moments: g1*g2 - g12^2 = {det:e}")]
    DegenerateMoments { det: f64 },

    #[error("time-to-go {tgo} below floor {tgo_min}; hold last command")]
    BelowTgoFloor { tgo: f64, tgo_min: f64 },

    #[error("infeasible weight: inverse weight {value} at t = {t}")]
    InfeasibleWeight { t: f64, value: f64 },

    #[error("singular geometry: zero range between missile and target")]
    SingularGeometry,

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("engagement diverged at t = {t}: {reason}")]
    Divergence {
        t: f64,
        reason: String,
        partial: Vec<TrajectoryRecord>,
    },

    #[error("non-finite state at t = {t}")]
    Numerical { t: f64, partial: Vec<TrajectoryRecord> },

    #[error("degenerate constraint Gram matrix (det = {det:e})")]
    DegenerateConstraints { det: f64 },

    #[error("empty or non-monotone trajectory")]
    InvalidTrajectory,
}

impl Error {
    /// Trajectory recorded before the failure, if the error carries one.
    pub fn partial_trajectory(&self) -> Option<&[TrajectoryRecord]> {
        match self {
            Error::Divergence { partial, .. } | Error::Numerical { partial, .. } => Some(partial),
            _ => None,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
