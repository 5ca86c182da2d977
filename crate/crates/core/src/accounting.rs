//! Post-processing of an optimal dispatch into energy-invested, emission,
//! final-energy and EROI figures.
//!
//! All annual quantities are in GWh/y (or service units for mobility
//! demands); emissions are in tCO2-eq/y.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lp::{LpProblem, VarKey, VarKind};
use crate::model::{EnergySystemModel, ResourceCategory};
use crate::solver::{Solution, SolveStatus};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AccountingError {
    #[error("solution status is {0}, accounting needs an optimal solution")]
    NotOptimal(SolveStatus),
    #[error("solution has {found} values but the LP has {expected} columns")]
    ShapeMismatch { expected: usize, found: usize },
    #[error("column `{0}` missing from the LP")]
    MissingColumn(String),
    #[error("energy invested is zero, EROI undefined")]
    DegenerateSystem,
}

/// Annualized decision values extracted from a solution.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Dispatch {
    /// Installed capacity per technology and per storage unit.
    pub capacity: BTreeMap<String, f64>,
    /// Annual main-output activity per technology.
    pub activity: BTreeMap<String, f64>,
    /// Annual use per resource.
    pub resource_use: BTreeMap<String, f64>,
}

impl Dispatch {
    pub fn from_solution(model: &EnergySystemModel, lp: &LpProblem, sol: &Solution) -> Result<Self, AccountingError> {
        if sol.status != SolveStatus::Optimal {
            return Err(AccountingError::NotOptimal(sol.status));
        }
        if sol.values.len() != lp.num_vars() {
            return Err(AccountingError::ShapeMismatch {
                expected: lp.num_vars(),
                found: sol.values.len(),
            });
        }
        let value = |kind, name: &str, period| {
            let key = VarKey::new(kind, name, period);
            lp.column(&key)
                .map(|j| sol.values[j])
                .ok_or_else(|| AccountingError::MissingColumn(key.to_string()))
        };
        let time = &model.time;
        let annual = |kind, name: &str| -> Result<f64, AccountingError> {
            (0..time.num_periods()).try_fold(0.0, |acc, p| {
                Ok(acc + time.period_weight(p) * value(kind, name, Some(p))?)
            })
        };

        let mut d = Dispatch::default();
        for t in &model.technologies {
            d.capacity
                .insert(t.name.clone(), value(VarKind::Capacity, &t.name, None)?);
            d.activity.insert(t.name.clone(), annual(VarKind::Activity, &t.name)?);
        }
        for s in &model.storages {
            d.capacity
                .insert(s.name.clone(), value(VarKind::StorageCapacity, &s.name, None)?);
        }
        for r in &model.resources {
            d.resource_use
                .insert(r.name.clone(), annual(VarKind::ResourceUse, &r.name)?);
        }
        Ok(d)
    }

    fn capacity(&self, name: &str) -> f64 {
        self.capacity.get(name).copied().unwrap_or(0.0)
    }

    fn activity(&self, name: &str) -> f64 {
        self.activity.get(name).copied().unwrap_or(0.0)
    }

    fn resource_use(&self, name: &str) -> f64 {
        self.resource_use.get(name).copied().unwrap_or(0.0)
    }
}

/// Construction (annualized) and operation terms of a life-cycle indicator.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Breakdown {
    pub constr_by_tech: BTreeMap<String, f64>,
    pub op_by_res: BTreeMap<String, f64>,
    pub total: f64,
}

impl Breakdown {
    pub fn constr_total(&self) -> f64 {
        self.constr_by_tech.values().sum()
    }

    pub fn op_total(&self) -> f64 {
        self.op_by_res.values().sum()
    }
}

fn breakdown(
    model: &EnergySystemModel,
    dispatch: &Dispatch,
    constr: impl Fn(f64, f64) -> f64,
    tech_coef: impl Fn(&crate::model::Technology) -> f64,
    store_coef: impl Fn(&crate::model::StorageUnit) -> f64,
    res_coef: impl Fn(&crate::model::Resource) -> f64,
) -> Breakdown {
    let mut b = Breakdown::default();
    for t in &model.technologies {
        b.constr_by_tech.insert(
            t.name.clone(),
            constr(tech_coef(t) * dispatch.capacity(&t.name), t.lifetime),
        );
    }
    for s in &model.storages {
        b.constr_by_tech.insert(
            s.name.clone(),
            constr(store_coef(s) * dispatch.capacity(&s.name), s.lifetime),
        );
    }
    for r in &model.resources {
        b.op_by_res
            .insert(r.name.clone(), res_coef(r) * dispatch.resource_use(&r.name));
    }
    b.total = b.constr_total() + b.op_total();
    b
}

/// Energy invested: `e_constr·F/lifetime` per asset plus `e_op·use` per resource.
pub fn compute_einv(model: &EnergySystemModel, dispatch: &Dispatch) -> Breakdown {
    breakdown(
        model,
        dispatch,
        |c, life| c / life,
        |t| t.e_constr,
        |s| s.e_constr,
        |r| r.e_op,
    )
}

/// Life-cycle emissions, same structure as [`compute_einv`].
pub fn compute_gwp(model: &EnergySystemModel, dispatch: &Dispatch) -> Breakdown {
    breakdown(
        model,
        dispatch,
        |c, life| c / life,
        |t| t.gwp_constr,
        |s| s.gwp_constr,
        |r| r.gwp_op,
    )
}

/// Reduces each producer's output pro-rata so that the total drops by `consumption`.
pub fn correct_production(production: &[f64], consumption: f64) -> Vec<f64> {
    let total: f64 = production.iter().sum();
    if total == 0.0 {
        return production.to_vec();
    }
    production.iter().map(|&p| p - consumption * p / total).collect()
}

/// Inputs charged to `charged` units of a technology output.
///
/// The technology makes `output` of the charged carrier plus `other_outputs`;
/// `charged` is `output` itself, or less after the consumer correction.
/// Returns 0 when the technology produces nothing.
pub fn allocated_inputs(charged: f64, output: f64, other_outputs: f64, inputs: f64) -> f64 {
    let denom = output + other_outputs;
    if denom <= 0.0 {
        return 0.0;
    }
    (charged / denom).clamp(0.0, 1.0) * inputs
}

/// Final energy consumption attributed to each end-use demand, keyed by demand name.
pub fn compute_fec(model: &EnergySystemModel, dispatch: &Dispatch) -> BTreeMap<String, f64> {
    let mut out = BTreeMap::new();
    for eud in &model.demands {
        let carrier = &eud.carrier;
        enum Producer<'a> {
            Tech(&'a crate::model::Technology),
            Resource,
        }
        let mut producers = Vec::new();
        let mut production = Vec::new();
        let mut consumption = 0.0;
        for t in &model.technologies {
            let Some(&k) = t.conversion.get(carrier) else { continue };
            let a = dispatch.activity(&t.name);
            if k > 0.0 {
                producers.push(Producer::Tech(t));
                production.push(k * a);
            } else if k < 0.0 {
                consumption += -k * a;
            }
        }
        for r in model.resources.iter().filter(|r| &r.carrier == carrier) {
            producers.push(Producer::Resource);
            production.push(dispatch.resource_use(&r.name));
        }
        let corrected = correct_production(&production, consumption);
        let mut fec = 0.0;
        for ((prod, &p), &raw) in producers.iter().zip(&corrected).zip(&production) {
            fec += match prod {
                Producer::Resource => p.max(0.0),
                Producer::Tech(t) => {
                    let a = dispatch.activity(&t.name);
                    let (mut others, mut inputs) = (0.0, 0.0);
                    for (c, &k) in &t.conversion {
                        if c == carrier {
                            continue;
                        }
                        if k > 0.0 {
                            others += k * a;
                        } else {
                            inputs += -k * a;
                        }
                    }
                    allocated_inputs(p.max(0.0), raw, others, inputs)
                }
            };
        }
        out.insert(eud.name.clone(), fec);
    }
    out
}

pub fn compute_eroi(fec_total: f64, e_in_tot: f64) -> Result<f64, AccountingError> {
    if e_in_tot == 0.0 {
        return Err(AccountingError::DegenerateSystem);
    }
    Ok(fec_total / e_in_tot)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixEntry {
    pub resource: String,
    pub category: ResourceCategory,
    pub renewable: bool,
    /// Annual use.
    pub gwh: f64,
    /// Fraction of total primary supply.
    pub share: f64,
}

/// Resources with non-negligible use, with their share of the total.
pub fn primary_mix(model: &EnergySystemModel, dispatch: &Dispatch) -> Vec<MixEntry> {
    let total: f64 = dispatch.resource_use.values().map(|v| v.max(0.0)).sum();
    let floor = 1e-9 * total.max(1.0);
    let mut mix: Vec<MixEntry> = model
        .resources
        .iter()
        .filter_map(|r| {
            let gwh = dispatch.resource_use(&r.name);
            (gwh > floor).then(|| MixEntry {
                resource: r.name.clone(),
                category: r.category,
                renewable: r.category.is_renewable(),
                gwh,
                share: 0.0,
            })
        })
        .collect();
    let kept: f64 = mix.iter().map(|e| e.gwh).sum();
    for e in &mut mix {
        e.share = e.gwh / kept;
    }
    mix.sort_by(|a, b| a.resource.cmp(&b.resource));
    mix
}

/// Mix shares summed per category; every category is present.
pub fn category_shares(mix: &[MixEntry]) -> BTreeMap<ResourceCategory, f64> {
    let mut out: BTreeMap<ResourceCategory, f64> = ResourceCategory::ALL.iter().map(|&c| (c, 0.0)).collect();
    for e in mix {
        *out.entry(e.category).or_default() += e.share;
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccountingReport {
    pub e_constr_by_tech: BTreeMap<String, f64>,
    pub e_op_by_res: BTreeMap<String, f64>,
    pub e_in_tot: f64,
    pub gwp_constr_by_tech: BTreeMap<String, f64>,
    pub gwp_op_by_res: BTreeMap<String, f64>,
    pub gwp_tot: f64,
    pub fec_by_eud: BTreeMap<String, f64>,
    pub fec_total: f64,
    /// `None` when energy invested is zero.
    pub eroi: Option<f64>,
    pub primary_mix: Vec<MixEntry>,
    pub dispatch: Dispatch,
}

impl AccountingReport {
    pub fn build(model: &EnergySystemModel, dispatch: Dispatch) -> Self {
        let einv = compute_einv(model, &dispatch);
        let gwp = compute_gwp(model, &dispatch);
        let fec_by_eud = compute_fec(model, &dispatch);
        let fec_total = fec_by_eud.values().sum();
        let eroi = compute_eroi(fec_total, einv.total).ok();
        let primary_mix = primary_mix(model, &dispatch);
        AccountingReport {
            e_constr_by_tech: einv.constr_by_tech,
            e_op_by_res: einv.op_by_res,
            e_in_tot: einv.total,
            gwp_constr_by_tech: gwp.constr_by_tech,
            gwp_op_by_res: gwp.op_by_res,
            gwp_tot: gwp.total,
            fec_by_eud,
            fec_total,
            eroi,
            primary_mix,
            dispatch,
        }
    }

    /// Extracts the dispatch from `sol` and builds the full report.
    pub fn from_solution(model: &EnergySystemModel, lp: &LpProblem, sol: &Solution) -> Result<Self, AccountingError> {
        Ok(Self::build(model, Dispatch::from_solution(model, lp, sol)?))
    }

    pub fn gwp_op(&self) -> f64 {
        self.gwp_op_by_res.values().sum()
    }

    pub fn gwp_constr(&self) -> f64 {
        self.gwp_constr_by_tech.values().sum()
    }

    pub fn e_op(&self) -> f64 {
        self.e_op_by_res.values().sum()
    }

    pub fn e_constr(&self) -> f64 {
        self.e_constr_by_tech.values().sum()
    }

    pub fn category_shares(&self) -> BTreeMap<ResourceCategory, f64> {
        category_shares(&self.primary_mix)
    }
}
