//! Sparse LP solver: two-phase bounded primal simplex with a product-form
//! basis inverse.
//!
//! Rows and columns are equilibrated with power-of-two factors before solving,
//! so unscaling the result is exact. Results are deterministic for a given
//! problem.

mod factor;
mod simplex;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lp::{LpError, LpProblem, Relation};
use simplex::{Outcome, Simplex};

#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    pub feasibility_tol: f64,
    pub optimality_tol: f64,
    /// Smallest acceptable ratio-test pivot.
    pub pivot_tol: f64,
    /// Smallest acceptable pivot while refactorizing.
    pub singular_tol: f64,
    pub max_iterations: usize,
    /// Basis updates between refactorizations.
    pub refactor_interval: usize,
    /// Consecutive degenerate pivots before switching to Bland's rule.
    pub degenerate_limit: usize,
    pub scale: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            feasibility_tol: 1e-9,
            optimality_tol: 1e-9,
            pivot_tol: 1e-9,
            singular_tol: 1e-11,
            max_iterations: 1_000_000,
            refactor_interval: 64,
            degenerate_limit: 50,
            scale: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

impl std::fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::Unbounded => "unbounded",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error("invalid problem: {0}")]
    Invalid(#[from] LpError),
    #[error("iteration limit of {0} reached")]
    IterationLimit(usize),
    #[error("numerical breakdown: {0}")]
    NumericalBreakdown(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub status: SolveStatus,
    /// `c·x` at the optimum; `+inf` when infeasible, `-inf` when unbounded.
    pub objective: f64,
    /// Column values; for infeasible problems, the phase-one end point.
    pub values: Vec<f64>,
    /// Row duals `y` with `c - Aᵀy = d` (optimal only).
    pub duals: Vec<f64>,
    pub reduced_costs: Vec<f64>,
    /// Direction of unbounded descent (unbounded only).
    pub ray: Option<Vec<f64>>,
    /// Row multipliers proving infeasibility (infeasible only).
    pub infeasibility_certificate: Option<Vec<f64>>,
    pub iterations: usize,
    /// Final basis (optimal only), reusable as a warm start.
    pub basis: Option<Basis>,
}

/// Column status in a basis snapshot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisStatus {
    Basic,
    Lower,
    Upper,
    /// Nonbasic free column at zero.
    Free,
}

/// Basis over the structural columns followed by one logical per row.
#[derive(Debug, Clone, PartialEq)]
pub struct Basis {
    pub status: Vec<BasisStatus>,
}

impl Solution {
    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }
}

/// The problem after scaling, in column-major form with row ranges.
pub(crate) struct Scaled {
    m: usize,
    n: usize,
    cols: Vec<Vec<(usize, f64)>>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    cost: Vec<f64>,
    b: Vec<f64>,
    /// Bounds on each row's logical column.
    row_lo: Vec<f64>,
    row_hi: Vec<f64>,
    row_scale: Vec<f64>,
    col_scale: Vec<f64>,
    cost_scale: f64,
}

fn pow2_inverse(max_abs: f64) -> f64 {
    if max_abs > 0.0 && max_abs.is_finite() {
        (-max_abs.log2().round()).exp2()
    } else {
        1.0
    }
}

impl Scaled {
    fn new(lp: &LpProblem, scale: bool) -> Scaled {
        let m = lp.num_rows();
        let n = lp.num_vars();
        let mut row_scale = vec![1.0; m];
        let mut col_scale = vec![1.0; n];
        if scale {
            for (i, row) in lp.rows.iter().enumerate() {
                let mx = row.coeffs.iter().fold(0.0f64, |a, &(_, v)| a.max(v.abs()));
                row_scale[i] = pow2_inverse(mx);
            }
            let mut col_max = vec![0.0f64; n];
            for (i, row) in lp.rows.iter().enumerate() {
                for &(j, v) in &row.coeffs {
                    col_max[j] = col_max[j].max((v * row_scale[i]).abs());
                }
            }
            for j in 0..n {
                col_scale[j] = pow2_inverse(col_max[j]);
            }
        }
        let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for (i, row) in lp.rows.iter().enumerate() {
            for &(j, v) in &row.coeffs {
                cols[j].push((i, v * row_scale[i] * col_scale[j]));
            }
        }
        let raw_cost: Vec<f64> = (0..n).map(|j| lp.objective[j] * col_scale[j]).collect();
        let cost_scale = if scale {
            pow2_inverse(raw_cost.iter().fold(0.0f64, |a, v| a.max(v.abs())))
        } else {
            1.0
        };
        let cost = raw_cost.iter().map(|c| c * cost_scale).collect();
        let lo = (0..n).map(|j| lp.bounds[j].0 / col_scale[j]).collect();
        let hi = (0..n).map(|j| lp.bounds[j].1 / col_scale[j]).collect();
        let b = (0..m).map(|i| lp.rows[i].rhs * row_scale[i]).collect();
        let (row_lo, row_hi) = lp
            .rows
            .iter()
            .map(|r| match r.relation {
                Relation::Le => (0.0, f64::INFINITY),
                Relation::Ge => (f64::NEG_INFINITY, 0.0),
                Relation::Eq => (0.0, 0.0),
            })
            .unzip();
        Scaled {
            m,
            n,
            cols,
            lo,
            hi,
            cost,
            b,
            row_lo,
            row_hi,
            row_scale,
            col_scale,
            cost_scale,
        }
    }

    fn unscale_values(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n).map(|j| x[j] * self.col_scale[j]).collect()
    }

    fn unscale_duals(&self, y: &[f64], cost_scale: f64) -> Vec<f64> {
        (0..self.m).map(|i| y[i] * self.row_scale[i] / cost_scale).collect()
    }
}

/// Solves `lp` with default options.
pub fn solve(lp: &LpProblem) -> Result<Solution, SolverError> {
    solve_with(lp, &SolverOptions::default())
}

pub fn solve_with(lp: &LpProblem, opts: &SolverOptions) -> Result<Solution, SolverError> {
    lp.check()?;
    let scaled = Scaled::new(lp, opts.scale);
    let mut spx = Simplex::new(&scaled, opts);

    if spx.has_artificials() {
        if let Outcome::Infeasible = spx.phase_one()? {
            let costs = spx.phase_one_costs();
            let y = spx.duals(&costs);
            return Ok(Solution {
                status: SolveStatus::Infeasible,
                objective: f64::INFINITY,
                values: scaled.unscale_values(&spx.x),
                duals: Vec::new(),
                reduced_costs: Vec::new(),
                ray: None,
                infeasibility_certificate: Some(scaled.unscale_duals(&y, 1.0)),
                iterations: spx.iterations,
                basis: None,
            });
        }
    }

    optimize(lp, opts, &scaled, spx)
}

/// Solves `lp` starting from `basis`, typically the optimum of a problem of
/// the same shape with different data.
///
/// A dual-feasible start is repaired by dual simplex; anything else, and any
/// infeasible outcome, falls back to a cold solve.
pub fn solve_warm(lp: &LpProblem, opts: &SolverOptions, basis: &Basis) -> Result<Solution, SolverError> {
    lp.check()?;
    if basis.status.len() != lp.num_vars() + lp.num_rows() {
        return solve_with(lp, opts);
    }
    let scaled = Scaled::new(lp, opts.scale);
    let mut spx = Simplex::warm(&scaled, opts, basis);
    if !spx.primal_feasible() {
        match spx.dual_phase() {
            Ok(Some(Outcome::Optimal)) => {}
            _ => return solve_with(lp, opts),
        }
    }
    optimize(lp, opts, &scaled, spx).or_else(|_| solve_with(lp, opts))
}

/// Phase two from a primal feasible basis, then the final checks.
fn optimize(
    lp: &LpProblem,
    opts: &SolverOptions,
    scaled: &Scaled,
    mut spx: Simplex<'_>,
) -> Result<Solution, SolverError> {
    match spx.phase_two()? {
        Outcome::Optimal => {}
        Outcome::Unbounded { entering, direction } => {
            let ray = spx.ray(entering, direction);
            let ray = scaled.unscale_values(&ray);
            let values = scaled.unscale_values(&spx.x);
            return Ok(Solution {
                status: SolveStatus::Unbounded,
                objective: f64::NEG_INFINITY,
                values,
                duals: Vec::new(),
                reduced_costs: Vec::new(),
                ray: Some(ray),
                infeasibility_certificate: None,
                iterations: spx.iterations,
                basis: None,
            });
        }
        Outcome::Infeasible => unreachable!("phase two starts feasible"),
    }

    // Recompute from a fresh factorization and confirm the point.
    spx.refresh();
    let viol = spx.max_bound_violation();
    if viol > 1e3 * opts.feasibility_tol {
        return Err(SolverError::NumericalBreakdown(format!(
            "bound violation {viol:.3e} after refactorization"
        )));
    }
    let costs = spx.phase_two_costs().to_vec();
    let y = spx.duals(&costs);
    let values = scaled.unscale_values(&spx.x);
    let reduced_costs = (0..scaled.n)
        .map(|j| spx.reduced_cost(&y, &costs, j) / (scaled.col_scale[j] * scaled.cost_scale))
        .collect();
    let duals = scaled.unscale_duals(&y, scaled.cost_scale);
    Ok(Solution {
        status: SolveStatus::Optimal,
        objective: lp.objective_value(&values),
        values,
        duals,
        reduced_costs,
        ray: None,
        infeasibility_certificate: None,
        iterations: spx.iterations,
        basis: Some(spx.basis()),
    })
}

/// Residuals of a solution against the original (unscaled) problem.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SolutionCheck {
    /// Largest row violation.
    pub max_row_violation: f64,
    /// Largest column bound violation.
    pub max_bound_violation: f64,
    /// `|c·x - bᵀy - bound terms|`, the primal–dual objective gap.
    pub duality_gap: f64,
}

impl SolutionCheck {
    pub fn within(&self, tol: f64) -> bool {
        self.max_row_violation <= tol && self.max_bound_violation <= tol
    }
}

/// Measures primal feasibility and, when duals are present, the duality gap.
pub fn check_solution(lp: &LpProblem, sol: &Solution) -> SolutionCheck {
    let x = &sol.values;
    let max_row_violation = lp.rows.iter().map(|r| r.violation(x)).fold(0.0, f64::max);
    let max_bound_violation = lp
        .bounds
        .iter()
        .zip(x)
        .map(|(&(lo, hi), &v)| (lo - v).max(v - hi).max(0.0))
        .fold(0.0, f64::max);
    let duality_gap = if sol.duals.len() == lp.num_rows() && sol.reduced_costs.len() == lp.num_vars() {
        let by: f64 = lp.rows.iter().zip(&sol.duals).map(|(r, y)| r.rhs * y).sum();
        // Reduced costs price the active column bounds.
        let bounds: f64 = lp
            .bounds
            .iter()
            .zip(x)
            .zip(&sol.reduced_costs)
            .map(|((&(lo, hi), &v), &d)| {
                if d > 0.0 && lo.is_finite() {
                    d * lo
                } else if d < 0.0 && hi.is_finite() {
                    d * hi
                } else {
                    d * v
                }
            })
            .sum();
        (lp.objective_value(x) - by - bounds).abs()
    } else {
        0.0
    };
    SolutionCheck {
        max_row_violation,
        max_bound_violation,
        duality_gap,
    }
}
