//! Regression polynomial chaos on uniform inputs.
//!
//! Inputs are mapped affinely from `[lo, hi]` to `[-1, 1]`, where the
//! normalized Legendre polynomials `√(2k+1)·P_k` are orthonormal under the
//! uniform density. Multivariate terms are products over a total-degree set
//! of multi-indices, constant term first.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::GsaError;

/// Relative singular-value cutoff below which the design is rank deficient.
const RANK_TOL: f64 = 1e-10;

/// Values `ψ_0(x) … ψ_order(x)` of the orthonormal Legendre family.
pub fn legendre_orthonormal(x: f64, order: usize, out: &mut Vec<f64>) {
    out.clear();
    let (mut prev, mut cur) = (1.0, x);
    out.push(1.0);
    if order >= 1 {
        out.push(3f64.sqrt() * x);
    }
    for k in 1..order {
        let next = ((2 * k + 1) as f64 * x * cur - k as f64 * prev) / (k + 1) as f64;
        prev = cur;
        cur = next;
        out.push(((2 * k + 3) as f64).sqrt() * cur);
    }
}

/// Sparse multi-index: `(input, degree)` pairs with nonzero degree.
pub type MultiIndex = Vec<(usize, u32)>;

/// All multi-indices over `dim` inputs with total degree ≤ `order`,
/// graded by total degree.
pub fn total_degree_basis(dim: usize, order: usize) -> Vec<MultiIndex> {
    fn fill(dim: usize, start: usize, left: u32, cur: &mut MultiIndex, out: &mut Vec<MultiIndex>) {
        if left == 0 {
            out.push(cur.clone());
            return;
        }
        for i in start..dim {
            for deg in (1..=left).rev() {
                cur.push((i, deg));
                fill(dim, i + 1, left - deg, cur, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    for t in 0..=order as u32 {
        fill(dim, 0, t, &mut Vec::new(), &mut out);
    }
    out
}

/// Number of total-degree terms, `C(dim + order, order)`.
pub fn basis_size(dim: usize, order: usize) -> usize {
    (1..=order).fold(1usize, |acc, k| acc * (dim + k) / k)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PceSurrogate {
    pub order: usize,
    pub basis: Vec<MultiIndex>,
    pub coefficients: Vec<f64>,
    /// Physical range of each input.
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    /// Leave-one-out error relative to the response variance.
    pub loo_error: f64,
}

impl PceSurrogate {
    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    /// Maps a physical input to `[-1, 1]^d`.
    pub fn standardize(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .map(|(&v, (&l, &h))| 2.0 * (v - l) / (h - l) - 1.0)
            .collect()
    }

    /// Surrogate value at a standardized point.
    pub fn eval_standard(&self, xi: &[f64]) -> f64 {
        let mut psi = Vec::new();
        let table: Vec<Vec<f64>> = xi
            .iter()
            .map(|&z| {
                legendre_orthonormal(z, self.order, &mut psi);
                psi.clone()
            })
            .collect();
        self.basis
            .iter()
            .zip(&self.coefficients)
            .map(|(alpha, c)| c * alpha.iter().map(|&(i, d)| table[i][d as usize]).product::<f64>())
            .sum()
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.eval_standard(&self.standardize(x))
    }

    pub fn mean(&self) -> f64 {
        self.coefficients.first().copied().unwrap_or(0.0)
    }

    pub fn variance(&self) -> f64 {
        self.coefficients.iter().skip(1).map(|c| c * c).sum()
    }
}

/// Mean and variance read from the coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub mean: f64,
    pub variance: f64,
}

impl Moments {
    pub fn std(&self) -> f64 {
        self.variance.sqrt()
    }
}

pub fn moments(s: &PceSurrogate) -> Moments {
    Moments {
        mean: s.mean(),
        variance: s.variance(),
    }
}

/// Total-order indices: share of variance carried by terms involving each input.
pub fn sobol_total(s: &PceSurrogate) -> Result<Vec<f64>, GsaError> {
    let var = s.variance();
    let c0 = s.mean();
    if !(var > 1e-20 * (c0 * c0).max(f64::MIN_POSITIVE)) {
        return Err(GsaError::ZeroVariance);
    }
    let mut total = vec![0.0; s.dim()];
    for (alpha, c) in s.basis.iter().zip(&s.coefficients).skip(1) {
        for &(i, _) in alpha {
            total[i] += c * c;
        }
    }
    Ok(total.into_iter().map(|t| t / var).collect())
}

/// Least-squares fit on physical samples `x` (rows) with responses `y`.
pub fn fit_pce(x: &[Vec<f64>], y: &[f64], lo: &[f64], hi: &[f64], order: usize) -> Result<PceSurrogate, GsaError> {
    let dim = lo.len();
    if let Some(i) = (0..dim).find(|&i| !(hi[i] > lo[i])) {
        return Err(GsaError::DegenerateInput(i));
    }
    let basis = total_degree_basis(dim, order);
    let p = basis.len();
    let n = y.len();
    if x.len() != n {
        return Err(GsaError::ShapeMismatch(format!("{} samples, {} responses", x.len(), n)));
    }
    if n < 2 * p {
        return Err(GsaError::TooFewSamples { needed: 2 * p, got: n });
    }
    let mut surrogate = PceSurrogate {
        order,
        basis,
        coefficients: vec![0.0; p],
        lo: lo.to_vec(),
        hi: hi.to_vec(),
        loo_error: 0.0,
    };

    let mut psi = Vec::new();
    let mut design = DMatrix::zeros(n, p);
    for (r, row) in x.iter().enumerate() {
        if row.len() != dim {
            return Err(GsaError::ShapeMismatch(format!(
                "sample {r} has {} inputs, expected {dim}",
                row.len()
            )));
        }
        let xi = surrogate.standardize(row);
        let table: Vec<Vec<f64>> = xi
            .iter()
            .map(|&z| {
                legendre_orthonormal(z, order, &mut psi);
                psi.clone()
            })
            .collect();
        for (k, alpha) in surrogate.basis.iter().enumerate() {
            design[(r, k)] = alpha.iter().map(|&(i, d)| table[i][d as usize]).product::<f64>();
        }
    }

    let svd = design.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if !(smax > 0.0) || smin / smax < RANK_TOL {
        return Err(GsaError::RankDeficient { ratio: smin / smax });
    }
    let rhs = DVector::from_column_slice(y);
    let coef = svd
        .solve(&rhs, 0.0)
        .map_err(|e| GsaError::ShapeMismatch(e.to_string()))?;
    surrogate.coefficients = coef.iter().copied().collect();

    // Hat-matrix diagonal h_ii = ‖U_i‖² from the thin SVD.
    let u = svd.u.as_ref().expect("U requested");
    let fitted = &design * &coef;
    let mean_y = y.iter().sum::<f64>() / n as f64;
    let var_y = y.iter().map(|v| (v - mean_y).powi(2)).sum::<f64>() / n as f64;
    let mut press = 0.0;
    for i in 0..n {
        let h: f64 = u.row(i).iter().map(|v| v * v).sum();
        let r = (y[i] - fitted[i]) / (1.0 - h).max(f64::EPSILON);
        press += r * r;
    }
    surrogate.loo_error = if var_y > 0.0 { press / n as f64 / var_y } else { 0.0 };
    Ok(surrogate)
}
