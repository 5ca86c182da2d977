//! Random small but complete energy systems for property tests.
#![allow(dead_code)]

pub mod ishigami;
pub mod lp;
pub mod quadrature;

use std::collections::BTreeMap;

use eroi_core::model::{
    EndUseDemand, EnergySystemModel, ModelData, Resource, ResourceCategory, ShareConstraint, ShareRelation,
    StorageUnit, Technology, TimeMapping, TypicalDay, HOURS_PER_DAY,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn resource(
    name: &str,
    carrier: &str,
    e_op: f64,
    gwp_op: f64,
    avail: Option<f64>,
    category: ResourceCategory,
) -> Resource {
    Resource {
        name: name.into(),
        carrier: carrier.into(),
        e_op,
        gwp_op,
        avail,
        category,
    }
}

fn technology(rng: &mut ChaCha8Rng, name: &str, conversion: &[(&str, f64)]) -> Technology {
    Technology {
        name: name.into(),
        e_constr: rng.random_range(50.0..3000.0),
        gwp_constr: rng.random_range(1e3..5e5),
        lifetime: rng.random_range(15.0..40.0),
        f_min: 0.0,
        f_max: f64::INFINITY,
        conversion: conversion
            .iter()
            .map(|&(c, v)| (c.to_string(), v))
            .collect::<BTreeMap<_, _>>(),
        cpt: None,
    }
}

/// Profile shares that integrate to one over the calendar.
fn profile(rng: &mut ChaCha8Rng, time: &TimeMapping) -> Vec<f64> {
    let raw: Vec<f64> = (0..time.num_periods()).map(|_| rng.random_range(0.2..1.0)).collect();
    let total: f64 = raw.iter().enumerate().map(|(p, r)| time.period_weight(p) * r).sum();
    raw.iter().map(|r| r / total).collect()
}

/// Heat and electricity system with gas, wood, imports, PV, CHP, a heat pump
/// and a battery; always feasible without an emissions cap.
pub fn random_model(seed: u64) -> EnergySystemModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let days = rng.random_range(1..=3usize);
    let mut weights = Vec::with_capacity(days);
    let mut left = 365u32;
    for k in 0..days {
        let w = if k + 1 == days {
            left
        } else {
            rng.random_range(1..left - (days - k - 1) as u32)
        };
        weights.push(w);
        left -= w;
    }
    let time = TimeMapping::new(
        weights
            .iter()
            .enumerate()
            .map(|(k, &w)| TypicalDay {
                id: format!("D{k}"),
                weight: f64::from(w),
            })
            .collect(),
    );

    let resources = vec![
        resource(
            "NG",
            "gas",
            rng.random_range(0.03..0.2),
            rng.random_range(150.0..300.0),
            None,
            ResourceCategory::Fossil,
        ),
        resource(
            "WOOD",
            "wood",
            rng.random_range(0.02..0.1),
            rng.random_range(5.0..20.0),
            Some(rng.random_range(50.0..1500.0)),
            ResourceCategory::Biomass,
        ),
        resource(
            "IMPORT",
            "elec",
            rng.random_range(0.05..0.3),
            rng.random_range(50.0..300.0),
            None,
            ResourceCategory::Other,
        ),
    ];
    let chp_elec = rng.random_range(0.4..1.0);
    let chp_gas = -rng.random_range(1.8..2.6);
    let boiler_gas = -rng.random_range(1.05..1.25);
    let wood_in = -rng.random_range(1.1..1.4);
    let hp_elec = -rng.random_range(0.25..0.45);
    let mut technologies = vec![
        technology(&mut rng, "CHP", &[("heat", 1.0), ("elec", chp_elec), ("gas", chp_gas)]),
        technology(&mut rng, "BOILER", &[("heat", 1.0), ("gas", boiler_gas)]),
        technology(&mut rng, "WOOD_BOILER", &[("heat", 1.0), ("wood", wood_in)]),
        technology(&mut rng, "HP", &[("heat", 1.0), ("elec", hp_elec)]),
        technology(&mut rng, "PV", &[("elec", 1.0)]),
    ];
    let pv = technologies.last_mut().expect("pv");
    pv.f_max = rng.random_range(0.01..0.5);
    pv.cpt = Some(
        (0..time.num_periods())
            .map(|p| {
                let h = p % HOURS_PER_DAY;
                if (7..19).contains(&h) {
                    rng.random_range(0.05..0.9)
                } else {
                    0.0
                }
            })
            .collect(),
    );
    let eff = rng.random_range(0.8..1.0);
    let storages = vec![StorageUnit {
        name: "BATTERY".into(),
        carrier: "elec".into(),
        eff_in: eff,
        eff_out: eff,
        e_constr: rng.random_range(10.0..200.0),
        gwp_constr: rng.random_range(1e3..1e5),
        lifetime: rng.random_range(10.0..20.0),
        f_max: f64::INFINITY,
    }];
    let demands = vec![
        EndUseDemand {
            name: "HEAT".into(),
            carrier: "heat".into(),
            annual: rng.random_range(300.0..3000.0),
            profile: profile(&mut rng, &time),
        },
        EndUseDemand {
            name: "ELEC".into(),
            carrier: "elec".into(),
            annual: rng.random_range(100.0..1500.0),
            profile: profile(&mut rng, &time),
        },
    ];
    let shares = vec![ShareConstraint {
        name: "HP_MIN".into(),
        carrier: "heat".into(),
        technologies: vec!["HP".into()],
        relation: ShareRelation::AtLeast,
        fraction: rng.random_range(0.0..0.3),
    }];
    let data = ModelData {
        resources,
        technologies,
        storages,
        demands,
        shares,
        time,
    };
    EnergySystemModel::validate(data).expect("random model is valid")
}

/// `model` with every energy-invested coefficient multiplied by `k`.
pub fn scale_energy(model: &EnergySystemModel, k: f64) -> EnergySystemModel {
    let mut data = model.data().clone();
    data.resources.iter_mut().for_each(|r| r.e_op *= k);
    data.technologies.iter_mut().for_each(|t| t.e_constr *= k);
    data.storages.iter_mut().for_each(|s| s.e_constr *= k);
    EnergySystemModel::validate(data).expect("scaled model is valid")
}
