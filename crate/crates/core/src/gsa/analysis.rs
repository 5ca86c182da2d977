//! Model evaluation over designs, two-stage screening, and surrogate Monte Carlo.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::pce::{basis_size, fit_pce, moments, sobol_total, PceSurrogate};
use super::sampling::{default_sample_count, latin_hypercube};
use super::{GsaError, UncertainParameter};
use crate::accounting::AccountingReport;
use crate::lp::{assemble, ObjectiveSpec};
use crate::model::EnergySystemModel;
use crate::solver::{solve, SolveStatus};

/// Largest fraction of failed rows tolerated in a design.
pub const MAX_FAILED_FRACTION: f64 = 0.05;

/// Why a design row produced no response.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum EvalFailure {
    Infeasible,
    Unbounded,
    InvalidModel(String),
    Solver(String),
    /// Energy invested was zero.
    Degenerate,
}

/// Settings shared by every evaluation of a study.
#[derive(Debug, Clone, PartialEq)]
pub struct Study<'a> {
    pub model: &'a EnergySystemModel,
    pub params: &'a [UncertainParameter],
    pub spec: &'a ObjectiveSpec,
    /// Emissions cap in tCO2-eq/y.
    pub gwp_limit: Option<f64>,
}

impl Study<'_> {
    /// System EROI with `x` applied to a fresh copy of the model.
    pub fn evaluate(&self, x: &[f64]) -> Result<f64, EvalFailure> {
        let mut data = self.model.data().clone();
        for (p, &v) in self.params.iter().zip(x) {
            p.apply(&mut data, v)
                .map_err(|e| EvalFailure::InvalidModel(e.to_string()))?;
        }
        let model = EnergySystemModel::validate(data).map_err(|e| EvalFailure::InvalidModel(e.to_string()))?;
        let lp = assemble(&model, self.spec, self.gwp_limit).map_err(|e| EvalFailure::InvalidModel(e.to_string()))?;
        let sol = solve(&lp).map_err(|e| EvalFailure::Solver(e.to_string()))?;
        match sol.status {
            SolveStatus::Optimal => {}
            SolveStatus::Infeasible => return Err(EvalFailure::Infeasible),
            SolveStatus::Unbounded => return Err(EvalFailure::Unbounded),
        }
        let report =
            AccountingReport::from_solution(&model, &lp, &sol).map_err(|e| EvalFailure::Solver(e.to_string()))?;
        report.eroi.ok_or(EvalFailure::Degenerate)
    }
}

/// Evaluates every row concurrently; output order follows `inputs`.
pub fn evaluate_batch(study: &Study<'_>, inputs: &[Vec<f64>]) -> Vec<Result<f64, EvalFailure>> {
    inputs.par_iter().map(|x| study.evaluate(x)).collect()
}

/// Samples with their responses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignMatrix {
    pub samples: Vec<Vec<f64>>,
    pub responses: Vec<Option<f64>>,
    pub seed: u64,
}

impl DesignMatrix {
    pub fn evaluate(study: &Study<'_>, samples: Vec<Vec<f64>>, seed: u64) -> Self {
        let responses = evaluate_batch(study, &samples)
            .into_iter()
            .enumerate()
            .map(|(i, r)| r.map_err(|e| log::warn!("design row {i} failed: {e:?}")).ok())
            .collect();
        DesignMatrix {
            samples,
            responses,
            seed,
        }
    }

    pub fn failed(&self) -> usize {
        self.responses.iter().filter(|r| r.is_none()).count()
    }

    /// Rows with a response; errors when more than 5% are missing.
    pub fn complete(&self) -> Result<(Vec<Vec<f64>>, Vec<f64>), GsaError> {
        let failed = self.failed();
        let n = self.responses.len();
        if n > 0 && failed as f64 > MAX_FAILED_FRACTION * n as f64 {
            return Err(GsaError::TooManyFailures { failed, total: n });
        }
        if failed > 0 {
            log::warn!("dropping {failed} of {n} design rows without a response");
        }
        Ok(self
            .samples
            .iter()
            .zip(&self.responses)
            .filter_map(|(x, y)| y.map(|y| (x.clone(), y)))
            .unzip())
    }
}

/// Fits over the parameters with a nonzero range; pinned ones get index 0.
fn fit_active(
    params: &[UncertainParameter],
    x: &[Vec<f64>],
    y: &[f64],
    order: usize,
) -> Result<(PceSurrogate, Vec<usize>), GsaError> {
    let active: Vec<usize> = (0..params.len()).filter(|&i| params[i].width() > 0.0).collect();
    let xs: Vec<Vec<f64>> = x.iter().map(|r| active.iter().map(|&i| r[i]).collect()).collect();
    let lo: Vec<f64> = active.iter().map(|&i| params[i].lo).collect();
    let hi: Vec<f64> = active.iter().map(|&i| params[i].hi).collect();
    Ok((fit_pce(&xs, y, &lo, &hi, order)?, active))
}

/// Total indices over all parameters; zero output variance gives all zeros.
fn total_indices(s: &PceSurrogate, active: &[usize], d: usize) -> Result<Vec<f64>, GsaError> {
    let mut out = vec![0.0; d];
    match sobol_total(s) {
        Ok(st) => {
            for (k, &i) in active.iter().enumerate() {
                out[i] = st[k];
            }
            Ok(out)
        }
        Err(GsaError::ZeroVariance) => {
            log::warn!("response variance is zero; every index set to 0");
            Ok(out)
        }
        Err(e) => Err(e),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScreeningReport {
    pub parameters: Vec<String>,
    /// `1/d`.
    pub threshold: f64,
    /// Total indices per run, each of length `d`.
    pub runs: Vec<Vec<f64>>,
    pub max_index: Vec<f64>,
    pub loo_errors: Vec<f64>,
    /// Indices of kept parameters, in input order.
    pub shortlist: Vec<usize>,
    pub samples_per_run: usize,
}

/// First-order screening over `runs` independent designs.
///
/// `samples` overrides the per-run sample count.
pub fn screen_first_order(
    study: &Study<'_>,
    runs: usize,
    seed: u64,
    samples: Option<usize>,
) -> Result<ScreeningReport, GsaError> {
    let d = study.params.len();
    if d == 0 {
        return Err(GsaError::NoParameters);
    }
    let threshold = 1.0 / d as f64;
    let n = samples.unwrap_or_else(|| default_sample_count(basis_size(d, 1)));
    let mut all = Vec::with_capacity(runs);
    let mut loo = Vec::with_capacity(runs);
    for run in 0..runs {
        let x = latin_hypercube(study.params, n, seed, run as u32);
        let design = DesignMatrix::evaluate(study, x, seed);
        let (x, y) = design.complete()?;
        let (s, active) = fit_active(study.params, &x, &y, 1)?;
        loo.push(s.loo_error);
        all.push(total_indices(&s, &active, d)?);
    }
    let max_index: Vec<f64> = (0..d).map(|i| all.iter().map(|r| r[i]).fold(0.0, f64::max)).collect();
    let shortlist = (0..d).filter(|&i| max_index[i] > threshold).collect();
    Ok(ScreeningReport {
        parameters: study.params.iter().map(|p| p.path.to_string()).collect(),
        threshold,
        runs: all,
        max_index,
        loo_errors: loo,
        shortlist,
        samples_per_run: n,
    })
}

pub fn coefficient_of_variation(std: f64, mean: f64) -> f64 {
    std / mean
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SobolReport {
    pub parameters: Vec<String>,
    pub total_order: Vec<f64>,
    pub mean: f64,
    pub variance: f64,
    pub std: f64,
    /// `std / mean`.
    pub cov: f64,
    pub threshold: f64,
    pub critical: Vec<String>,
    pub loo_error: f64,
    pub samples: usize,
    pub dropped: usize,
    pub order: usize,
}

impl SobolReport {
    pub fn from_surrogate(
        params: &[UncertainParameter],
        s: &PceSurrogate,
        active: &[usize],
        samples: usize,
        dropped: usize,
    ) -> Result<Self, GsaError> {
        let d = params.len();
        let total_order = total_indices(s, active, d)?;
        let m = moments(s);
        let threshold = 1.0 / d as f64;
        let critical = (0..d)
            .filter(|&i| total_order[i] > threshold)
            .map(|i| params[i].path.to_string())
            .collect();
        Ok(SobolReport {
            parameters: params.iter().map(|p| p.path.to_string()).collect(),
            total_order,
            mean: m.mean,
            variance: m.variance,
            std: m.std(),
            cov: coefficient_of_variation(m.std(), m.mean),
            threshold,
            critical,
            loo_error: s.loo_error,
            samples,
            dropped,
            order: s.order,
        })
    }
}

/// Order-`order` fit on the shortlisted parameters (order 2 in the standard workflow).
pub fn analyze_second_order(
    study: &Study<'_>,
    seed: u64,
    samples: Option<usize>,
    order: usize,
) -> Result<(SobolReport, PceSurrogate), GsaError> {
    let d = study.params.len();
    if d == 0 {
        return Err(GsaError::NoParameters);
    }
    let n = samples.unwrap_or_else(|| default_sample_count(basis_size(d, order)));
    let x = latin_hypercube(study.params, n, seed, u32::MAX);
    let design = DesignMatrix::evaluate(study, x, seed);
    let (x, y) = design.complete()?;
    let (s, active) = fit_active(study.params, &x, &y, order)?;
    let report = SobolReport::from_surrogate(study.params, &s, &active, n, design.failed())?;
    Ok((report, s))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PdfEstimate {
    pub samples: usize,
    pub mean: f64,
    pub std: f64,
    /// `bins + 1` edges.
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
    /// Probability density per bin.
    pub density: Vec<f64>,
}

/// Samples per independent random stream in [`pdf_estimate`].
const CHUNK: usize = 1 << 14;

/// Histogram of `n` surrogate evaluations at uniform random inputs.
pub fn pdf_estimate(s: &PceSurrogate, n: usize, bins: usize, seed: u64) -> PdfEstimate {
    let dim = s.dim();
    let chunks = n.div_ceil(CHUNK);
    let values: Vec<f64> = (0..chunks)
        .into_par_iter()
        .flat_map_iter(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let len = CHUNK.min(n - c * CHUNK);
            let mut xi = vec![0.0; dim];
            (0..len)
                .map(|_| {
                    for z in xi.iter_mut() {
                        *z = rng.random_range(-1.0..1.0);
                    }
                    s.eval_standard(&xi)
                })
                .collect::<Vec<_>>()
        })
        .collect();
    let mean = values.iter().sum::<f64>() / n as f64;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0).max(1.0);
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let bins = if hi > lo { bins.max(1) } else { 1 };
    let width = if hi > lo { (hi - lo) / bins as f64 } else { 1.0 };
    let mut counts = vec![0u64; bins];
    for v in &values {
        let k = (((v - lo) / width) as usize).min(bins - 1);
        counts[k] += 1;
    }
    let edges = (0..=bins)
        .map(|k| {
            if k == bins && hi > lo {
                hi
            } else {
                lo + k as f64 * width
            }
        })
        .collect();
    let density = counts.iter().map(|&c| c as f64 / (n as f64 * width)).collect();
    PdfEstimate {
        samples: n,
        mean,
        std: var.sqrt(),
        edges,
        counts,
        density,
    }
}
