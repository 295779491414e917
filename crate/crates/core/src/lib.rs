//! Weighted optimal impact-angle guidance.
//!
//! A weighting function `W(τ)` on the control-energy cost is described by its
//! inverse and (optionally) three nested antiderivatives. From it the crate
//! computes the moment integrals and equivalent gains `(k1, k2)` of the
//! state-feedback law `a = −k1·y/tgo² − k2·v/tgo`, flies that law in a planar
//! engagement, and checks optimality against independent oracles.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod engagement;
pub mod error;
pub mod format;
pub mod gains;
pub mod guidance;
pub mod integrator;
pub mod oracle;
pub mod quadrature;
pub mod weighting;

pub use error::{Error, Result};
pub use gains::{gain_pair, gains_at, gram_determinant, GainPair, MomentTriple};
pub use guidance::{AngleGuidanceState, LinearGuidanceState};
pub use weighting::{check_feasible, FeasibilityReport, WeightFamily, WeightSpec};
