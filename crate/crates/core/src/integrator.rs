//! Fixed-step integrators for autonomous systems with a held input.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    #[default]
    Rk4,
    Euler,
}

fn axpy<const N: usize>(x: &[f64; N], h: f64, k: &[f64; N]) -> [f64; N] {
    std::array::from_fn(|i| x[i] + h * k[i])
}

/// Advance `x` by `h` under `dx/dt = f(x)`.
pub fn step<const N: usize, F>(method: Method, f: F, x: &[f64; N], h: f64) -> [f64; N]
where
    F: Fn(&[f64; N]) -> [f64; N],
{
    match method {
        Method::Euler => axpy(x, h, &f(x)),
        Method::Rk4 => {
            let k1 = f(x);
            let k2 = f(&axpy(x, 0.5 * h, &k1));
            let k3 = f(&axpy(x, 0.5 * h, &k2));
            let k4 = f(&axpy(x, h, &k3));
            std::array::from_fn(|i| x[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        }
    }
}
