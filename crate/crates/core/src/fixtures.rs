//! Small hand-checkable models shared by tests and examples.

use std::collections::BTreeMap;

use crate::model::{
    EndUseDemand, EnergySystemModel, ModelData, Resource, ResourceCategory, Technology, TimeMapping, TypicalDay,
};

/// One typical day standing for the whole year.
pub fn single_day_calendar() -> TimeMapping {
    TimeMapping::new(vec![TypicalDay {
        id: "TD1".into(),
        weight: 365.0,
    }])
}

/// Twelve typical days; the first two weigh 35 days each, the others 29.5.
pub fn twelve_day_calendar() -> TimeMapping {
    TimeMapping::new(
        (0..12)
            .map(|k| TypicalDay {
                id: format!("TD{}", k + 1),
                weight: if k < 2 { 35.0 } else { 29.5 },
            })
            .collect(),
    )
}

pub fn resource(name: &str, carrier: &str, e_op: f64, gwp_op: f64) -> Resource {
    Resource {
        name: name.into(),
        carrier: carrier.into(),
        e_op,
        gwp_op,
        avail: None,
        category: ResourceCategory::Other,
    }
}

pub fn technology(name: &str, e_constr: f64, lifetime: f64, conversion: &[(&str, f64)]) -> Technology {
    Technology {
        name: name.into(),
        e_constr,
        gwp_constr: 0.0,
        lifetime,
        f_min: 0.0,
        f_max: f64::INFINITY,
        conversion: conversion
            .iter()
            .map(|&(c, v)| (c.to_string(), v))
            .collect::<BTreeMap<_, _>>(),
        cpt: None,
    }
}

/// Demand spread evenly over all hours of a valid calendar.
pub fn flat_demand(name: &str, carrier: &str, annual: f64, time: &TimeMapping) -> EndUseDemand {
    let share = 1.0 / time.represented_hours() * time.t_op;
    EndUseDemand {
        name: name.into(),
        carrier: carrier.into(),
        annual,
        profile: vec![share; time.num_periods()],
    }
}

/// Gas-fired CHP plus a backup boiler covering heat and electricity demands.
pub fn chp_system() -> EnergySystemModel {
    let time = single_day_calendar();
    let data = ModelData {
        resources: vec![resource("NG", "gas", 0.0608, 267.0)],
        technologies: vec![
            technology(
                "CHP",
                1000.0,
                25.0,
                &[("heat", 1.0), ("elec", 0.9565), ("gas", -2.1739)],
            ),
            technology("BOILER", 100.0, 17.0, &[("heat", 1.0), ("gas", -1.1)]),
        ],
        demands: vec![
            flat_demand("HEAT", "heat", 1000.0, &time),
            flat_demand("ELEC", "elec", 400.0, &time),
        ],
        time,
        ..Default::default()
    };
    EnergySystemModel::validate(data).expect("fixture is valid")
}

/// Two direct heat resources: cheap-to-extract but emitting, or clean but costly.
pub fn two_fuel_toy() -> EnergySystemModel {
    let time = single_day_calendar();
    let data = ModelData {
        resources: vec![
            resource("CLEAN", "heat", 0.3, 0.0),
            resource("DIRTY", "heat", 0.1, 267.0),
        ],
        demands: vec![flat_demand("HEAT", "heat", 1000.0, &time)],
        time,
        ..Default::default()
    };
    EnergySystemModel::validate(data).expect("fixture is valid")
}

/// The two-fuel toy plus nine spare heat resources that the optimum never uses.
pub fn screening_toy() -> EnergySystemModel {
    let mut data = two_fuel_toy().into_data();
    for k in 0..9 {
        data.resources.push(resource(&format!("SPARE{k}"), "heat", 1.0, 0.0));
    }
    EnergySystemModel::validate(data).expect("fixture is valid")
}
