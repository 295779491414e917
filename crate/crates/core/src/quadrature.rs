//! Globally adaptive 7/15-point Gauss–Kronrod quadrature.
//!
//! The interval with the largest error estimate is bisected until the summed
//! error estimate falls below the requested relative tolerance. Nodes never
//! touch the interval endpoints, so integrands that are singular exactly at
//! an endpoint can still be integrated.

#![allow(clippy::excessive_precision)]

use crate::error::{Error, Result};

// Kronrod abscissae, descending; odd indices are the 7-point Gauss nodes.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_838_258_730,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Maximum bisection depth of any single subinterval.
pub const MAX_DEPTH: u32 = 60;

/// Default subdivision budget for [`integrate`].
pub const DEFAULT_MAX_SUBDIVISIONS: usize = 2000;

#[derive(Clone, Copy, Debug)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub subdivisions: usize,
}

#[derive(Clone, Copy, Debug)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    depth: u32,
}

/// One 15-point Kronrod evaluation with the embedded 7-point Gauss estimate.
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let dx = half * XGK[j];
        let sum = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * sum;
        if j % 2 == 1 {
            gauss += WG[j / 2] * sum;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

/// Integrate `f` over `[a, b]` to relative tolerance `rel_tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64) -> Result<QuadResult> {
    integrate_with_budget(f, a, b, rel_tol, DEFAULT_MAX_SUBDIVISIONS)
}

pub fn integrate_with_budget<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    rel_tol: f64,
    max_subdivisions: usize,
) -> Result<QuadResult> {
    if a == b {
        return Ok(QuadResult { value: 0.0, error: 0.0, subdivisions: 0 });
    }
    let (value, error) = gk15(&f, a, b);
    let mut segments = vec![Segment { a, b, value, error, depth: 0 }];
    let mut subdivisions = 0;

    loop {
        let total: f64 = segments.iter().map(|s| s.value).sum();
        let total_err: f64 = segments.iter().map(|s| s.error).sum();
        if !total.is_finite() || !total_err.is_finite() {
            return Err(Error::QuadratureFailure { residual: f64::INFINITY, subdivisions });
        }
        // Roundoff floor keeps absurdly tight tolerances from spinning forever.
        let floor = 50.0 * f64::EPSILON * segments.iter().map(|s| s.value.abs()).sum::<f64>();
        if total_err <= (rel_tol * total.abs()).max(floor) {
            return Ok(QuadResult { value: total, error: total_err, subdivisions });
        }

        let worst = segments
            .iter()
            .enumerate()
            .filter(|(_, s)| s.depth < MAX_DEPTH)
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .map(|(i, _)| i);
        let Some(worst) = worst else {
            return Err(Error::QuadratureFailure { residual: total_err, subdivisions });
        };
        if subdivisions >= max_subdivisions {
            return Err(Error::QuadratureFailure { residual: total_err, subdivisions });
        }

        let seg = segments.swap_remove(worst);
        let mid = 0.5 * (seg.a + seg.b);
        let (v1, e1) = gk15(&f, seg.a, mid);
        let (v2, e2) = gk15(&f, mid, seg.b);
        let depth = seg.depth + 1;
        segments.push(Segment { a: seg.a, b: mid, value: v1, error: e1, depth });
        segments.push(Segment { a: mid, b: seg.b, value: v2, error: e2, depth });
        subdivisions += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let r = integrate(|x| x.powi(5) - 3.0 * x * x + 1.0, -1.0, 2.0, 1e-12).unwrap();
        let exact = (64.0 - 1.0) / 6.0 - (8.0 + 1.0) + 3.0;
        assert!((r.value - exact).abs() < 1e-13);
        assert_eq!(r.subdivisions, 0);
    }

    #[test]
    fn smooth_transcendental() {
        let r = integrate(f64::exp, 0.0, 3.0, 1e-12).unwrap();
        let exact = 3f64.exp() - 1.0;
        assert!(((r.value - exact) / exact).abs() < 1e-12);
    }

    #[test]
    fn endpoint_singularity_is_integrable() {
        // ∫0^1 x^-1/2 dx = 2
        let r = integrate(|x| 1.0 / x.sqrt(), 0.0, 1.0, 1e-8).unwrap();
        assert!((r.value - 2.0).abs() < 1e-6);
    }

    #[test]
    fn non_integrable_reports_failure() {
        let err = integrate_with_budget(|x| 1.0 / x, 0.0, 1.0, 1e-10, 200).unwrap_err();
        match err {
            Error::QuadratureFailure { residual, subdivisions } => {
                assert!(residual > 0.0);
                assert!(subdivisions <= 200);
            }
            e => panic!("unexpected error {e}"),
        }
    }

    #[test]
    fn empty_interval() {
        assert_eq!(integrate(|x| x, 1.0, 1.0, 1e-10).unwrap().value, 0.0);
    }
}
