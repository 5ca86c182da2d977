//! Gauss-Legendre quadrature for checking orthonormality of the chaos basis.

use eroi_core::gsa::legendre_orthonormal;

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    (0..n)
        .map(|i| {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let step = p1 / dp;
                x -= step;
                if step.abs() < 1e-16 {
                    break;
                }
            }
            (x, 2.0 / ((1.0 - x * x) * dp * dp))
        })
        .collect()
}

/// `E[psi_a psi_b]` under the uniform measure on `[-1, 1]^dim`.
pub fn inner_product(a: &[(usize, u32)], b: &[(usize, u32)], dim: usize, order: usize, nodes: &[(f64, f64)]) -> f64 {
    let degree = |alpha: &[(usize, u32)], i: usize| alpha.iter().find(|e| e.0 == i).map_or(0, |e| e.1 as usize);
    let mut psi = Vec::new();
    (0..dim)
        .map(|i| {
            nodes
                .iter()
                .map(|&(x, w)| {
                    legendre_orthonormal(x, order, &mut psi);
                    0.5 * w * psi[degree(a, i)] * psi[degree(b, i)]
                })
                .sum::<f64>()
        })
        .product()
}
