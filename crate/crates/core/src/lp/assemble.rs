use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{LpError, LpProblem, Relation, Row, VarKey, VarKind};
use crate::model::{EnergySystemModel, ShareRelation, HOURS_PER_DAY};

/// What the LP minimizes.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub enum ObjectiveSpec {
    /// Annualized energy invested: construction amortized over lifetime plus operation.
    #[default]
    EnergyInvested,
    /// User-supplied coefficients keyed by variable name (see [`VarKey`]'s `Display`).
    CustomLinear(BTreeMap<String, f64>),
}

/// Adds every column of the model with its bounds and zero cost, in the
/// canonical order: resources, technologies, storage; names sorted; periods ascending.
fn add_columns(model: &EnergySystemModel, lp: &mut LpProblem) -> Result<(), LpError> {
    let periods = model.time.num_periods();
    let inf = f64::INFINITY;

    let mut resources: Vec<_> = model.resources.iter().collect();
    resources.sort_by(|a, b| a.name.cmp(&b.name));
    for r in resources {
        for p in 0..periods {
            lp.add_var(VarKey::new(VarKind::ResourceUse, &r.name, Some(p)), 0.0, inf, 0.0)?;
        }
    }

    let mut techs: Vec<_> = model.technologies.iter().collect();
    techs.sort_by(|a, b| a.name.cmp(&b.name));
    for t in techs {
        lp.add_var(VarKey::new(VarKind::Capacity, &t.name, None), t.f_min, t.f_max, 0.0)?;
        for p in 0..periods {
            lp.add_var(VarKey::new(VarKind::Activity, &t.name, Some(p)), 0.0, inf, 0.0)?;
        }
    }

    let mut stores: Vec<_> = model.storages.iter().collect();
    stores.sort_by(|a, b| a.name.cmp(&b.name));
    for s in stores {
        lp.add_var(VarKey::new(VarKind::StorageCapacity, &s.name, None), 0.0, s.f_max, 0.0)?;
        for kind in [
            VarKind::StorageCharge,
            VarKind::StorageDischarge,
            VarKind::StateOfCharge,
        ] {
            for p in 0..periods {
                lp.add_var(VarKey::new(kind, &s.name, Some(p)), 0.0, inf, 0.0)?;
            }
        }
    }
    Ok(())
}

fn col(lp: &LpProblem, kind: VarKind, entity: &str, period: Option<usize>) -> usize {
    lp.column(&VarKey::new(kind, entity, period))
        .expect("column created by add_columns")
}

/// Objective coefficients for `spec`, one per column of `lp`.
pub fn build_objective(model: &EnergySystemModel, lp: &LpProblem, spec: &ObjectiveSpec) -> Result<Vec<f64>, LpError> {
    let mut c = vec![0.0; lp.num_vars()];
    match spec {
        ObjectiveSpec::EnergyInvested => {
            for t in &model.technologies {
                c[col(lp, VarKind::Capacity, &t.name, None)] = t.e_constr / t.lifetime;
            }
            for s in &model.storages {
                c[col(lp, VarKind::StorageCapacity, &s.name, None)] = s.e_constr / s.lifetime;
            }
            for r in &model.resources {
                for p in 0..model.time.num_periods() {
                    c[col(lp, VarKind::ResourceUse, &r.name, Some(p))] = r.e_op * model.time.period_weight(p);
                }
            }
        }
        ObjectiveSpec::CustomLinear(map) => {
            for (name, &value) in map {
                let key: VarKey = name
                    .parse()
                    .map_err(|_| LpError::UnknownObjectiveVariable(name.clone()))?;
                let j = lp
                    .column(&key)
                    .ok_or_else(|| LpError::UnknownObjectiveVariable(name.clone()))?;
                if !value.is_finite() {
                    return Err(LpError::NonFinite(format!("objective coefficient of `{name}`")));
                }
                c[j] = value;
            }
        }
    }
    Ok(c)
}

/// Annual emissions cap row; empty when `gwp_limit` is `None`.
///
/// `gwp_limit` is in tCO2-eq/y.
pub fn build_gwp_rows(model: &EnergySystemModel, lp: &LpProblem, gwp_limit: Option<f64>) -> Result<Vec<Row>, LpError> {
    let Some(limit) = gwp_limit else {
        return Ok(Vec::new());
    };
    if limit.is_nan() || limit < 0.0 {
        return Err(LpError::NegativeGwpLimit(limit));
    }
    let mut coeffs = Vec::new();
    for t in &model.technologies {
        coeffs.push((col(lp, VarKind::Capacity, &t.name, None), t.gwp_constr / t.lifetime));
    }
    for s in &model.storages {
        coeffs.push((
            col(lp, VarKind::StorageCapacity, &s.name, None),
            s.gwp_constr / s.lifetime,
        ));
    }
    for r in &model.resources {
        for p in 0..model.time.num_periods() {
            coeffs.push((
                col(lp, VarKind::ResourceUse, &r.name, Some(p)),
                r.gwp_op * model.time.period_weight(p),
            ));
        }
    }
    Ok(vec![Row::new("gwp_limit", coeffs, Relation::Le, limit)])
}

/// Hourly carrier balance: production + imports + discharge - charge - consumption = demand.
pub fn build_balance_rows(model: &EnergySystemModel, lp: &LpProblem) -> Vec<Row> {
    let mut rows = Vec::new();
    for carrier in model.carriers() {
        for p in 0..model.time.num_periods() {
            let mut coeffs = Vec::new();
            for t in &model.technologies {
                if let Some(&k) = t.conversion.get(carrier) {
                    coeffs.push((col(lp, VarKind::Activity, &t.name, Some(p)), k));
                }
            }
            for r in model.resources.iter().filter(|r| &r.carrier == carrier) {
                coeffs.push((col(lp, VarKind::ResourceUse, &r.name, Some(p)), 1.0));
            }
            for s in model.storages.iter().filter(|s| &s.carrier == carrier) {
                coeffs.push((col(lp, VarKind::StorageDischarge, &s.name, Some(p)), 1.0));
                coeffs.push((col(lp, VarKind::StorageCharge, &s.name, Some(p)), -1.0));
            }
            rows.push(Row::new(
                format!("balance:{carrier}:{p}"),
                coeffs,
                Relation::Eq,
                model.demand_rate(carrier, p),
            ));
        }
    }
    rows
}

/// Capacity-factor limits, resource availability, storage dynamics and share rows.
///
/// Capacity bounds `f_min ≤ F ≤ f_max` live on the columns themselves.
pub fn build_capacity_rows(model: &EnergySystemModel, lp: &LpProblem) -> Vec<Row> {
    let time = &model.time;
    let periods = time.num_periods();
    let mut rows = Vec::new();

    for t in &model.technologies {
        let cap = col(lp, VarKind::Capacity, &t.name, None);
        for p in 0..periods {
            rows.push(Row::new(
                format!("cpt:{}:{p}", t.name),
                vec![
                    (col(lp, VarKind::Activity, &t.name, Some(p)), 1.0),
                    (cap, -t.capacity_factor(p)),
                ],
                Relation::Le,
                0.0,
            ));
        }
    }

    for r in &model.resources {
        if let Some(avail) = r.avail.filter(|a| a.is_finite()) {
            let coeffs = (0..periods)
                .map(|p| (col(lp, VarKind::ResourceUse, &r.name, Some(p)), time.period_weight(p)))
                .collect();
            rows.push(Row::new(format!("avail:{}", r.name), coeffs, Relation::Le, avail));
        }
    }

    for s in &model.storages {
        let cap = col(lp, VarKind::StorageCapacity, &s.name, None);
        for td in 0..time.typical_days.len() {
            for h in 0..HOURS_PER_DAY {
                let p = time.period(td, h);
                let next = time.period(td, (h + 1) % HOURS_PER_DAY);
                // soc[next] = soc[p] + (eff_in * charge - discharge / eff_out) * t_op
                rows.push(Row::new(
                    format!("soc:{}:{p}", s.name),
                    vec![
                        (col(lp, VarKind::StateOfCharge, &s.name, Some(next)), 1.0),
                        (col(lp, VarKind::StateOfCharge, &s.name, Some(p)), -1.0),
                        (col(lp, VarKind::StorageCharge, &s.name, Some(p)), -s.eff_in * time.t_op),
                        (
                            col(lp, VarKind::StorageDischarge, &s.name, Some(p)),
                            time.t_op / s.eff_out,
                        ),
                    ],
                    Relation::Eq,
                    0.0,
                ));
                rows.push(Row::new(
                    format!("soc_cap:{}:{p}", s.name),
                    vec![(col(lp, VarKind::StateOfCharge, &s.name, Some(p)), 1.0), (cap, -1.0)],
                    Relation::Le,
                    0.0,
                ));
            }
        }
    }

    for share in &model.shares {
        // sum_{chosen} prod - fraction * sum_{all producers} prod  (<= or >=)  0
        let mut coeffs = Vec::new();
        for t in &model.technologies {
            let Some(&k) = t.conversion.get(&share.carrier).filter(|k| **k > 0.0) else {
                continue;
            };
            let chosen = share.technologies.iter().any(|n| n == &t.name);
            let w = if chosen { 1.0 - share.fraction } else { -share.fraction };
            for p in 0..periods {
                coeffs.push((
                    col(lp, VarKind::Activity, &t.name, Some(p)),
                    w * k * time.period_weight(p),
                ));
            }
        }
        let relation = match share.relation {
            ShareRelation::AtMost => Relation::Le,
            ShareRelation::AtLeast => Relation::Ge,
        };
        rows.push(Row::new(format!("share:{}", share.name), coeffs, relation, 0.0));
    }

    rows
}

/// Builds the full LP for `model` under `spec`, with an optional emissions cap in tCO2-eq/y.
pub fn assemble(model: &EnergySystemModel, spec: &ObjectiveSpec, gwp_limit: Option<f64>) -> Result<LpProblem, LpError> {
    let mut lp = LpProblem::new();
    add_columns(model, &mut lp)?;
    lp.objective = build_objective(model, &lp, spec)?;
    let mut rows = build_balance_rows(model, &lp);
    rows.extend(build_capacity_rows(model, &lp));
    rows.extend(build_gwp_rows(model, &lp, gwp_limit)?);
    lp.rows = rows;
    lp.check()?;
    Ok(lp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::model::{ModelData, StorageUnit, Technology};

    fn one_day() -> crate::model::TimeMapping {
        fixtures::single_day_calendar()
    }

    #[test]
    fn construction_coefficient_is_amortized() {
        let data = ModelData {
            resources: vec![fixtures::resource("U", "uranium", 0.0434, 3.9)],
            technologies: vec![Technology {
                name: "NUC".into(),
                e_constr: 2600.0,
                gwp_constr: 0.0,
                lifetime: 25.0,
                f_min: 0.0,
                f_max: 5.6,
                conversion: BTreeMap::from([("elec".into(), 1.0), ("uranium".into(), -2.7)]),
                cpt: None,
            }],
            time: one_day(),
            ..Default::default()
        };
        let model = EnergySystemModel::validate(data).unwrap();
        let lp = assemble(&model, &ObjectiveSpec::EnergyInvested, None).unwrap();
        let j = lp.column(&VarKey::new(VarKind::Capacity, "NUC", None)).unwrap();
        assert_eq!(lp.objective[j], 104.0);
    }

    #[test]
    fn operation_coefficient_uses_day_weight() {
        let mut time = fixtures::twelve_day_calendar();
        time.typical_days[0].weight = 30.0;
        time.typical_days[1].weight = 40.0;
        let data = ModelData {
            resources: vec![
                fixtures::resource("NG", "gas", 0.0608, 267.0),
                fixtures::resource("WIND", "wind", 0.0, 0.0),
            ],
            time,
            ..Default::default()
        };
        let model = EnergySystemModel::validate(data).unwrap();
        let lp = assemble(&model, &ObjectiveSpec::EnergyInvested, None).unwrap();
        let j = lp.column(&VarKey::new(VarKind::ResourceUse, "NG", Some(5))).unwrap();
        assert!((lp.objective[j] - 1.824).abs() < 1e-12);
        for p in 0..model.time.num_periods() {
            let j = lp.column(&VarKey::new(VarKind::ResourceUse, "WIND", Some(p))).unwrap();
            assert_eq!(lp.objective[j], 0.0);
        }
    }

    #[test]
    fn gwp_rows() {
        let data = ModelData {
            resources: vec![fixtures::resource("NG", "gas", 0.0608, 267.0)],
            time: one_day(),
            ..Default::default()
        };
        let model = EnergySystemModel::validate(data).unwrap();
        let lp = assemble(&model, &ObjectiveSpec::EnergyInvested, None).unwrap();
        assert!(build_gwp_rows(&model, &lp, None).unwrap().is_empty());
        assert!(matches!(
            build_gwp_rows(&model, &lp, Some(-1.0)),
            Err(LpError::NegativeGwpLimit(_))
        ));

        let rows = build_gwp_rows(&model, &lp, Some(267.0)).unwrap();
        assert_eq!(rows.len(), 1);
        // Using 1 GWh/y (spread over the year) exactly meets a 267 t cap.
        let mut x = vec![0.0; lp.num_vars()];
        for p in 0..24 {
            x[lp.column(&VarKey::new(VarKind::ResourceUse, "NG", Some(p))).unwrap()] = 1.0 / 8760.0;
        }
        assert!((rows[0].activity(&x) - 267.0).abs() < 1e-9);
    }

    #[test]
    fn zero_gwp_model_with_zero_cap_is_feasible_row() {
        let data = ModelData {
            resources: vec![fixtures::resource("WIND", "wind", 0.0, 0.0)],
            time: one_day(),
            ..Default::default()
        };
        let model = EnergySystemModel::validate(data).unwrap();
        let lp = assemble(&model, &ObjectiveSpec::EnergyInvested, Some(0.0)).unwrap();
        let row = lp.rows.iter().find(|r| r.name == "gwp_limit").unwrap();
        assert!(row.coeffs.is_empty());
        assert_eq!(row.violation(&vec![0.0; lp.num_vars()]), 0.0);
    }

    #[test]
    fn chp_balance_coefficients() {
        let model = fixtures::chp_system();
        let lp = assemble(&model, &ObjectiveSpec::EnergyInvested, None).unwrap();
        let act = lp.column(&VarKey::new(VarKind::Activity, "CHP", Some(0))).unwrap();
        let coef = |carrier: &str| {
            let row = lp
                .rows
                .iter()
                .find(|r| r.name == format!("balance:{carrier}:0"))
                .unwrap();
            row.coeffs.iter().find(|(c, _)| *c == act).map(|(_, v)| *v)
        };
        assert_eq!(coef("heat"), Some(1.0));
        assert_eq!(coef("elec"), Some(0.9565));
        assert_eq!(coef("gas"), Some(-2.1739));
    }

    #[test]
    fn single_demand_balance_forces_import() {
        let model = fixtures::two_fuel_toy();
        let lp = assemble(&model, &ObjectiveSpec::EnergyInvested, None).unwrap();
        let row = lp.rows.iter().find(|r| r.name == "balance:heat:0").unwrap();
        assert_eq!(row.relation, Relation::Eq);
        assert!((row.rhs - 1000.0 / 8760.0).abs() < 1e-15);
        assert_eq!(row.coeffs.len(), 2);
    }

    #[test]
    fn capacity_factor_row() {
        let mut data = fixtures::chp_system().into_data();
        let mut cpt = vec![1.0; 24];
        cpt[2] = 0.0;
        data.technologies[0].cpt = Some(cpt);
        let model = EnergySystemModel::validate(data).unwrap();
        let lp = assemble(&model, &ObjectiveSpec::EnergyInvested, None).unwrap();
        let row = lp.rows.iter().find(|r| r.name == "cpt:CHP:2").unwrap();
        // Zero capacity factor leaves only `act <= 0`.
        assert_eq!(row.coeffs.len(), 1);
        assert_eq!(row.rhs, 0.0);
    }

    #[test]
    fn availability_row_rhs() {
        let mut wood = fixtures::resource("WOOD", "wood", 0.0491, 11.8);
        wood.avail = Some(23.4e3);
        let data = ModelData {
            resources: vec![wood],
            time: one_day(),
            ..Default::default()
        };
        let model = EnergySystemModel::validate(data).unwrap();
        let lp = assemble(&model, &ObjectiveSpec::EnergyInvested, None).unwrap();
        let row = lp.rows.iter().find(|r| r.name == "avail:WOOD").unwrap();
        assert_eq!(row.rhs, 23.4e3);
        assert_eq!(row.coeffs.len(), 24);
    }

    #[test]
    fn storage_rows_are_cyclic() {
        let mut data = fixtures::two_fuel_toy().into_data();
        data.storages.push(StorageUnit {
            name: "TANK".into(),
            carrier: "heat".into(),
            eff_in: 1.0,
            eff_out: 1.0,
            e_constr: 1.0,
            gwp_constr: 0.0,
            lifetime: 10.0,
            f_max: f64::INFINITY,
        });
        let model = EnergySystemModel::validate(data).unwrap();
        let lp = assemble(&model, &ObjectiveSpec::EnergyInvested, None).unwrap();
        // Summing all SOC rows of a day cancels the SOC terms, leaving
        // sum(charge) - sum(discharge) = 0 for lossless storage.
        let mut acc = vec![0.0; lp.num_vars()];
        for row in lp.rows.iter().filter(|r| r.name.starts_with("soc:TANK:")) {
            for &(c, v) in &row.coeffs {
                acc[c] += v;
            }
        }
        for (j, key) in lp.vars.iter().enumerate() {
            let expect = match key.kind {
                VarKind::StorageCharge => -1.0,
                VarKind::StorageDischarge => 1.0,
                _ => 0.0,
            };
            assert!((acc[j] - expect).abs() < 1e-15, "{key}");
        }
    }

    #[test]
    fn empty_model_gives_empty_lp() {
        let model = EnergySystemModel::validate(ModelData::default()).unwrap();
        let lp = assemble(&model, &ObjectiveSpec::EnergyInvested, None).unwrap();
        assert_eq!(lp.num_vars(), 0);
        assert_eq!(lp.num_rows(), 0);
    }

    #[test]
    fn column_order_is_canonical() {
        let mut data = fixtures::two_fuel_toy().into_data();
        data.resources.reverse();
        let model = EnergySystemModel::validate(data).unwrap();
        let lp = assemble(&model, &ObjectiveSpec::EnergyInvested, None).unwrap();
        assert_eq!(lp.vars[0], VarKey::new(VarKind::ResourceUse, "CLEAN", Some(0)));
        assert_eq!(lp.vars[24], VarKey::new(VarKind::ResourceUse, "DIRTY", Some(0)));
    }

    #[test]
    fn custom_objective_passes_through_and_rejects_unknown() {
        let model = fixtures::two_fuel_toy();
        let spec = ObjectiveSpec::CustomLinear(BTreeMap::from([("use:CLEAN:3".to_string(), 2.5)]));
        let lp = assemble(&model, &spec, None).unwrap();
        let j = lp.column(&VarKey::new(VarKind::ResourceUse, "CLEAN", Some(3))).unwrap();
        assert_eq!(lp.objective[j], 2.5);
        assert_eq!(lp.objective.iter().filter(|c| **c != 0.0).count(), 1);

        let bad = ObjectiveSpec::CustomLinear(BTreeMap::from([("use:NOPE:3".to_string(), 1.0)]));
        assert!(matches!(
            assemble(&model, &bad, None),
            Err(LpError::UnknownObjectiveVariable(_))
        ));
    }

    #[test]
    fn every_column_is_referenced_or_bounded() {
        let model = fixtures::chp_system();
        let lp = assemble(&model, &ObjectiveSpec::EnergyInvested, Some(1e6)).unwrap();
        let mut used = vec![false; lp.num_vars()];
        for r in &lp.rows {
            for &(c, _) in &r.coeffs {
                used[c] = true;
            }
        }
        for (j, &(lo, hi)) in lp.bounds.iter().enumerate() {
            assert!(used[j] || (lo.is_finite() && hi.is_finite()), "{}", lp.vars[j]);
        }
    }
}
