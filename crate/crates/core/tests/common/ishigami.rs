//! The Ishigami function on `[-pi, pi]^3` with its analytic moments and indices.

use std::f64::consts::PI;

use eroi_core::gsa::{fit_pce, latin_hypercube, GsaError, ParamKind, PceSurrogate, UncertainParameter};

pub const A: f64 = 7.0;
pub const B: f64 = 0.1;

pub fn ishigami(x: &[f64]) -> f64 {
    x[0].sin() + A * x[1].sin().powi(2) + B * x[2].powi(4) * x[0].sin()
}

pub fn mean() -> f64 {
    A / 2.0
}

/// Partial variances `(V1, V2, V13)`.
fn partial_variances() -> (f64, f64, f64) {
    let v1 = 0.5 * (1.0 + B * PI.powi(4) / 5.0).powi(2);
    let v2 = A * A / 8.0;
    let v13 = B * B * PI.powi(8) * (1.0 / 18.0 - 1.0 / 50.0);
    (v1, v2, v13)
}

pub fn variance() -> f64 {
    let (v1, v2, v13) = partial_variances();
    v1 + v2 + v13
}

pub fn total_indices() -> [f64; 3] {
    let (v1, v2, v13) = partial_variances();
    let v = variance();
    [(v1 + v13) / v, v2 / v, v13 / v]
}

pub fn parameters() -> Vec<UncertainParameter> {
    (1..=3)
        .map(|i| UncertainParameter::new(&format!("resource.X{i}.e_op"), ParamKind::Absolute, -PI, PI).unwrap())
        .collect()
}

/// Surrogate of total degree `order` fitted on `n` Latin-hypercube samples.
pub fn fit(order: usize, n: usize, seed: u64) -> Result<PceSurrogate, GsaError> {
    let x = latin_hypercube(&parameters(), n, seed, 0);
    let y: Vec<f64> = x.iter().map(|p| ishigami(p)).collect();
    fit_pce(&x, &y, &[-PI; 3], &[PI; 3], order)
}
