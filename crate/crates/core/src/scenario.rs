//! Reference run and emissions-cap sweep.
//!
//! Every run is an independent snapshot of the re-assembled model. Sweep runs
//! are solved in target order, each warm-started from the last optimal basis.

use std::collections::BTreeMap;
use std::io::Write;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::accounting::{AccountingError, AccountingReport};
use crate::lp::{assemble, LpError, ObjectiveSpec};
use crate::model::{EnergySystemModel, ResourceCategory};
use crate::solver::{solve, solve_warm, Basis, BasisStatus, SolveStatus, SolverError, SolverOptions};

/// Tonnes to megatonnes.
pub fn to_mt(tonnes: f64) -> f64 {
    tonnes / 1e6
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Accounting(#[from] AccountingError),
    #[error("reference scenario is {0}")]
    ReferenceNotOptimal(SolveStatus),
    #[error("reference operating emissions are zero; nothing to reduce")]
    NoEmissions,
    #[error("step fraction must lie in (0, 1], got {0}")]
    BadStep(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioResult {
    /// Emissions cap in tCO2-eq/y; `None` for the reference run.
    pub gwp_limit: Option<f64>,
    pub status: SolveStatus,
    pub objective: f64,
    /// Present when the run is optimal.
    pub report: Option<AccountingReport>,
    #[serde(with = "secs")]
    pub wall_time: Duration,
}

mod secs {
    use std::time::Duration;

    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(d.as_secs_f64())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        Ok(Duration::from_secs_f64(f64::deserialize(d)?))
    }
}

impl ScenarioResult {
    pub fn eroi(&self) -> Option<f64> {
        self.report.as_ref().and_then(|r| r.eroi)
    }
}

/// Solves one snapshot under an optional emissions cap.
pub fn run_scenario(
    model: &EnergySystemModel,
    spec: &ObjectiveSpec,
    gwp_limit: Option<f64>,
) -> Result<ScenarioResult, ScenarioError> {
    Ok(snapshot(model, spec, gwp_limit, None)?.0)
}

/// Solves one snapshot, optionally from a warm basis, and returns its final basis.
fn snapshot(
    model: &EnergySystemModel,
    spec: &ObjectiveSpec,
    gwp_limit: Option<f64>,
    warm: Option<&Basis>,
) -> Result<(ScenarioResult, Option<Basis>), ScenarioError> {
    let start = Instant::now();
    let lp = assemble(model, spec, gwp_limit)?;
    let sol = match warm {
        Some(b) => solve_warm(&lp, &SolverOptions::default(), b)?,
        None => solve(&lp)?,
    };
    let report = if sol.is_optimal() {
        Some(AccountingReport::from_solution(model, &lp, &sol)?)
    } else {
        None
    };
    log::info!(
        "scenario cap={:?} status={} objective={} iterations={} in {:.2?}",
        gwp_limit,
        sol.status,
        sol.objective,
        sol.iterations,
        start.elapsed()
    );
    let result = ScenarioResult {
        gwp_limit,
        status: sol.status,
        objective: sol.objective,
        report,
        wall_time: start.elapsed(),
    };
    Ok((result, sol.basis))
}

/// Unconstrained optimum; fails unless the solve is optimal.
pub fn run_reference(model: &EnergySystemModel, spec: &ObjectiveSpec) -> Result<ScenarioResult, ScenarioError> {
    let r = run_scenario(model, spec, None)?;
    if r.status != SolveStatus::Optimal {
        return Err(ScenarioError::ReferenceNotOptimal(r.status));
    }
    Ok(r)
}

/// Caps `(1 - k*step) * baseline` for `k = 1..=floor(1/step)`, never negative.
pub fn sweep_targets(baseline: f64, step: f64) -> Result<Vec<f64>, ScenarioError> {
    if !(step > 0.0 && step <= 1.0) {
        return Err(ScenarioError::BadStep(step));
    }
    let count = (1.0 / step + 1e-9).floor() as usize;
    Ok((1..=count)
        .map(|k| ((1.0 - k as f64 * step) * baseline).max(0.0))
        .collect())
}

/// Reference run plus one run per cap; results follow the target order.
pub struct Sweep {
    pub reference: ScenarioResult,
    pub runs: Vec<ScenarioResult>,
}

/// Steps are taken from the reference operating emissions.
pub fn run_sweep(model: &EnergySystemModel, spec: &ObjectiveSpec, step: f64) -> Result<Sweep, ScenarioError> {
    let (reference, basis) = snapshot(model, spec, None, None)?;
    if reference.status != SolveStatus::Optimal {
        return Err(ScenarioError::ReferenceNotOptimal(reference.status));
    }
    let baseline = reference.report.as_ref().map_or(0.0, AccountingReport::gwp_op);
    if !(baseline > 0.0) {
        return Err(ScenarioError::NoEmissions);
    }
    let targets = sweep_targets(baseline, step)?;
    // The cap row is appended last; its logical starts basic.
    let mut basis = basis.map(|mut b| {
        b.status.push(BasisStatus::Basic);
        b
    });
    let mut runs = Vec::with_capacity(targets.len());
    for t in targets {
        let (r, b) = snapshot(model, spec, Some(t), basis.as_ref())?;
        if b.is_some() {
            basis = b;
        }
        runs.push(r);
    }
    Ok(Sweep { reference, runs })
}

/// One row of the EROI-vs-emissions frontier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontierRow {
    /// MtCO2-eq/y; `None` for the reference.
    pub gwp_limit_mt: Option<f64>,
    pub status: SolveStatus,
    pub eroi: Option<f64>,
    pub e_in_tot: Option<f64>,
    pub fec_total: Option<f64>,
    pub gwp_tot_mt: Option<f64>,
    pub shares: BTreeMap<ResourceCategory, f64>,
}

impl FrontierRow {
    pub fn from_result(r: &ScenarioResult) -> Self {
        let rep = r.report.as_ref();
        FrontierRow {
            gwp_limit_mt: r.gwp_limit.map(to_mt),
            status: r.status,
            eroi: r.eroi(),
            e_in_tot: rep.map(|r| r.e_in_tot),
            fec_total: rep.map(|r| r.fec_total),
            gwp_tot_mt: rep.map(|r| to_mt(r.gwp_tot)),
            shares: rep.map(AccountingReport::category_shares).unwrap_or_default(),
        }
    }
}

impl Sweep {
    pub fn frontier(&self) -> Vec<FrontierRow> {
        std::iter::once(&self.reference)
            .chain(&self.runs)
            .map(FrontierRow::from_result)
            .collect()
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Frontier CSV: limits and emissions in Mt, one share column per resource category.
pub fn write_frontier_csv<W: Write>(rows: &[FrontierRow], w: W) -> csv::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let mut header = vec![
        "gwp_limit_mt".to_string(),
        "status".into(),
        "eroi".into(),
        "e_in_tot_gwh".into(),
        "fec_total_gwh".into(),
        "gwp_tot_mt".into(),
    ];
    header.extend(ResourceCategory::ALL.iter().map(|c| format!("share_{}", c.as_str())));
    out.write_record(&header)?;
    for r in rows {
        let mut rec = vec![
            opt(r.gwp_limit_mt),
            r.status.to_string(),
            opt(r.eroi),
            opt(r.e_in_tot),
            opt(r.fec_total),
            opt(r.gwp_tot_mt),
        ];
        let have_shares = r.status == SolveStatus::Optimal;
        rec.extend(ResourceCategory::ALL.iter().map(|c| {
            if have_shares {
                r.shares.get(c).copied().unwrap_or(0.0).to_string()
            } else {
                String::new()
            }
        }));
        out.write_record(&rec)?;
    }
    out.flush()?;
    Ok(())
}
