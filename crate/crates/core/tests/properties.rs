//! Invariants of every module, checked on randomly generated inputs.

mod common;

use std::collections::BTreeMap;

use common::quadrature::{gauss_legendre, inner_product};
use common::{random_model, scale_energy};
use eroi_core::accounting::{compute_einv, compute_fec, compute_gwp, correct_production, AccountingReport, Dispatch};
use eroi_core::gsa::{
    fit_pce, latin_hypercube, moments, sobol_total, total_degree_basis, ParamKind, PceSurrogate, UncertainParameter,
};
use eroi_core::io::{load, save, Dataset, Meta};
use eroi_core::lp::{assemble, ObjectiveSpec};
use eroi_core::model::{EnergySystemModel, TimeMapping, TypicalDay};
use eroi_core::scenario::{run_reference, run_scenario, sweep_targets, ScenarioError};
use eroi_core::solver::{check_solution, solve, Solution, SolveStatus};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        ..ProptestConfig::default()
    }
}

fn solve_model(model: &EnergySystemModel, cap: Option<f64>) -> (eroi_core::lp::LpProblem, Solution) {
    let lp = assemble(model, &ObjectiveSpec::EnergyInvested, cap).unwrap();
    let sol = solve(&lp).unwrap();
    (lp, sol)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-12)
}

// ---------------------------------------------------------------- model-core

fn calendar(weights: &[u32]) -> TimeMapping {
    TimeMapping::new(
        weights
            .iter()
            .enumerate()
            .map(|(k, &w)| TypicalDay {
                id: format!("D{k}"),
                weight: f64::from(w),
            })
            .collect(),
    )
}

/// Integer day weights summing to 365.
fn year_split() -> impl Strategy<Value = Vec<u32>> {
    prop::collection::vec(1u32..60, 0..12).prop_map(|mut cuts| {
        cuts.retain(|_| true);
        let mut out = Vec::new();
        let mut left = 365;
        for c in cuts {
            if c < left {
                out.push(c);
                left -= c;
            }
        }
        out.push(left);
        out
    })
}

proptest! {
    #![proptest_config(config(64))]

    #[test]
    fn annualize_is_linear(weights in year_split(), a in -5.0f64..5.0, b in -5.0f64..5.0, seed in any::<u64>()) {
        let t = calendar(&weights);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let q1: Vec<f64> = (0..t.num_periods()).map(|_| rng.random_range(-10.0..10.0)).collect();
        let q2: Vec<f64> = (0..t.num_periods()).map(|_| rng.random_range(-10.0..10.0)).collect();
        let mix: Vec<f64> = q1.iter().zip(&q2).map(|(x, y)| a * x + b * y).collect();
        let lhs = t.annualize(&mix).unwrap();
        let rhs = a * t.annualize(&q1).unwrap() + b * t.annualize(&q2).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + lhs.abs()));
    }

    #[test]
    fn annualize_of_one_covers_the_year(weights in year_split()) {
        let t = calendar(&weights);
        let ones = vec![1.0; t.num_periods()];
        prop_assert!((t.annualize(&ones).unwrap() - 8760.0 * t.t_op).abs() < 1e-9);
    }

    #[test]
    fn validate_is_idempotent(seed in any::<u64>()) {
        let m = random_model(seed);
        let again = EnergySystemModel::validate(m.data().clone()).unwrap();
        prop_assert_eq!(again, m);
    }
}

// ---------------------------------------------------------------- lp-assembler and lp-solver

proptest! {
    #![proptest_config(config(24))]

    #[test]
    fn energy_scaling_scales_objective_and_keeps_vertex(seed in any::<u64>(), e in -3i32..=3) {
        let m = random_model(seed);
        // Powers of two keep the scaled data exact.
        let k = 2f64.powi(e);
        let (_, base) = solve_model(&m, None);
        let (_, scaled) = solve_model(&scale_energy(&m, k), None);
        prop_assert_eq!(base.status, SolveStatus::Optimal);
        prop_assert_eq!(scaled.objective, k * base.objective);
        prop_assert_eq!(&scaled.values, &base.values);
    }

    #[test]
    fn energy_scaling_by_any_factor_scales_objective(seed in any::<u64>(), k in 0.1f64..10.0) {
        let m = random_model(seed);
        let (_, base) = solve_model(&m, None);
        let (_, scaled) = solve_model(&scale_energy(&m, k), None);
        prop_assert!(rel(scaled.objective, k * base.objective) < 1e-9);
    }

    #[test]
    fn tightening_the_cap_never_lowers_energy_invested(seed in any::<u64>(), f1 in 0.3f64..1.2, f2 in 0.3f64..1.2) {
        let m = random_model(seed);
        let reference = run_reference(&m, &ObjectiveSpec::EnergyInvested).unwrap();
        let gwp = reference.report.as_ref().unwrap().gwp_tot;
        let (loose, tight) = (f1.max(f2) * gwp, f1.min(f2) * gwp);
        let a = run_scenario(&m, &ObjectiveSpec::EnergyInvested, Some(loose)).unwrap();
        let b = run_scenario(&m, &ObjectiveSpec::EnergyInvested, Some(tight)).unwrap();
        if b.status == SolveStatus::Optimal {
            prop_assert_eq!(a.status, SolveStatus::Optimal);
            prop_assert!(a.objective <= b.objective * (1.0 + 1e-9));
        }
        if a.status == SolveStatus::Infeasible {
            prop_assert_eq!(b.status, SolveStatus::Infeasible);
        }
    }

    #[test]
    fn every_variable_is_constrained(seed in any::<u64>(), cap in prop::option::of(0.0f64..1e6)) {
        let lp = assemble(&random_model(seed), &ObjectiveSpec::EnergyInvested, cap).unwrap();
        let mut used = vec![false; lp.num_vars()];
        for row in &lp.rows {
            for &(j, _) in &row.coeffs {
                used[j] = true;
            }
        }
        for (j, &(lo, hi)) in lp.bounds.iter().enumerate() {
            prop_assert!(used[j] || (lo.is_finite() && hi.is_finite()), "column {}", j);
        }
    }

    #[test]
    fn repeated_solves_are_bit_identical(seed in any::<u64>()) {
        let m = random_model(seed);
        let (_, a) = solve_model(&m, None);
        let (_, b) = solve_model(&m, None);
        prop_assert_eq!(a.objective.to_bits(), b.objective.to_bits());
        prop_assert!(a.values.iter().zip(&b.values).all(|(x, y)| x.to_bits() == y.to_bits()));
    }

    #[test]
    fn optimal_solutions_close_the_duality_gap(seed in any::<u64>(), f in prop::option::of(0.5f64..1.0)) {
        let m = random_model(seed);
        let cap = f.map(|f| f * run_reference(&m, &ObjectiveSpec::EnergyInvested).unwrap().report.unwrap().gwp_tot);
        let (lp, sol) = solve_model(&m, cap);
        prop_assume!(sol.status == SolveStatus::Optimal);
        let chk = check_solution(&lp, &sol);
        prop_assert!(chk.within(1e-6 * (1.0 + sol.objective.abs())), "{:?}", chk);
        prop_assert!(chk.duality_gap <= 1e-7 * (1.0 + sol.objective.abs()), "{:?}", chk);
    }

    #[test]
    fn cost_scaling_scales_objective_and_keeps_vertex(seed in any::<u64>(), k in 0.01f64..100.0) {
        let m = random_model(seed);
        let (mut lp, base) = solve_model(&m, None);
        lp.objective.iter_mut().for_each(|c| *c *= k);
        let sol = solve(&lp).unwrap();
        prop_assert!(rel(sol.objective, k * base.objective) < 1e-9);
        // Ties may pick another vertex; it must still be optimal for the original costs.
        let lp0 = assemble(&m, &ObjectiveSpec::EnergyInvested, None).unwrap();
        prop_assert!(rel(lp0.objective_value(&sol.values), base.objective) < 1e-9);
    }
}

// ---------------------------------------------------------------- accounting

proptest! {
    #![proptest_config(config(24))]

    #[test]
    fn accounting_matches_the_solver(seed in any::<u64>(), f in prop::option::of(0.4f64..1.0)) {
        let m = random_model(seed);
        let cap = f.map(|f| {
            let r = run_reference(&m, &ObjectiveSpec::EnergyInvested).unwrap();
            f * r.report.unwrap().gwp_tot
        });
        let (lp, sol) = solve_model(&m, cap);
        prop_assume!(sol.status == SolveStatus::Optimal);
        let d = Dispatch::from_solution(&m, &lp, &sol).unwrap();
        let einv = compute_einv(&m, &d);
        prop_assert!(rel(einv.total, sol.objective) < 1e-6);
        if let Some(cap) = cap {
            prop_assert!(compute_gwp(&m, &d).total <= cap * (1.0 + 1e-6) + 1e-6);
        }
    }

    #[test]
    fn allocation_fractions_lie_in_the_unit_interval(seed in any::<u64>()) {
        let m = random_model(seed);
        let (lp, sol) = solve_model(&m, None);
        let d = Dispatch::from_solution(&m, &lp, &sol).unwrap();
        for eud in &m.demands {
            let mut raw = Vec::new();
            let mut others = Vec::new();
            let mut consumption = 0.0;
            for t in &m.technologies {
                let Some(&k) = t.conversion.get(&eud.carrier) else { continue };
                let a = d.activity[&t.name];
                if k > 0.0 {
                    raw.push(k * a);
                    others.push(t.conversion.iter().filter(|(c, &v)| *c != &eud.carrier && v > 0.0).map(|(_, v)| v * a).sum::<f64>());
                } else {
                    consumption += -k * a;
                }
            }
            let resources: Vec<f64> = m.resources.iter().filter(|r| r.carrier == eud.carrier).map(|r| d.resource_use[&r.name]).collect();
            let mut production = raw.clone();
            production.extend(&resources);
            let corrected = correct_production(&production, consumption);
            for ((&p, &r), &o) in corrected.iter().zip(&raw).zip(&others) {
                if r + o > 1e-9 {
                    let fraction = p / (r + o);
                    prop_assert!((-1e-9..=1.0 + 1e-9).contains(&fraction), "{} {}", eud.name, fraction);
                }
            }
        }
        let fec = compute_fec(&m, &d);
        prop_assert!(fec.values().all(|v| v.is_finite() && *v >= 0.0));
    }

    #[test]
    fn correction_conserves_net_production(production in prop::collection::vec(0.0f64..1e4, 1..8), share in 0.0f64..1.0) {
        let total: f64 = production.iter().sum();
        let consumption = share * total;
        let corrected = correct_production(&production, consumption);
        let sum: f64 = corrected.iter().sum();
        prop_assert!((sum - (total - consumption)).abs() <= 1e-9 * (1.0 + total));
        prop_assert!(corrected.iter().zip(&production).all(|(c, p)| *c >= -1e-9 && *c <= p + 1e-9));
    }
}

// ---------------------------------------------------------------- scenario-engine

proptest! {
    #![proptest_config(config(12))]

    #[test]
    fn energy_invested_never_falls_along_a_sweep(seed in any::<u64>()) {
        let m = random_model(seed);
        let sweep = eroi_core::scenario::run_sweep(&m, &ObjectiveSpec::EnergyInvested, 0.1);
        prop_assume!(!matches!(sweep, Err(ScenarioError::NoEmissions)));
        let sweep = sweep.unwrap();
        let mut last = sweep.reference.objective;
        let mut infeasible = false;
        for r in &sweep.runs {
            match r.status {
                SolveStatus::Optimal => {
                    prop_assert!(!infeasible, "feasible after a tighter cap was infeasible");
                    prop_assert!(r.objective >= last * (1.0 - 1e-9));
                    last = r.objective;
                }
                _ => infeasible = true,
            }
        }
    }

    #[test]
    fn sweep_baseline_is_reference_operating_emissions(seed in any::<u64>()) {
        let m = random_model(seed);
        let reference = run_reference(&m, &ObjectiveSpec::EnergyInvested).unwrap();
        let rep = reference.report.as_ref().unwrap();
        let sweep = eroi_core::scenario::run_sweep(&m, &ObjectiveSpec::EnergyInvested, 0.25);
        prop_assume!(!matches!(sweep, Err(ScenarioError::NoEmissions)));
        let sweep = sweep.unwrap();
        let expected = sweep_targets(rep.gwp_op(), 0.25).unwrap();
        let caps: Vec<f64> = sweep.runs.iter().map(|r| r.gwp_limit.unwrap()).collect();
        prop_assert_eq!(caps, expected);
        // The k = 0 target of the sweep is the reference's own operating emissions.
        prop_assert!(rel(rep.gwp_tot, rep.gwp_op() + rep.gwp_constr()) < 1e-12);
    }

    #[test]
    fn slack_cap_reproduces_the_reference(seed in any::<u64>(), slack in 1.5f64..100.0) {
        let m = random_model(seed);
        let reference = run_reference(&m, &ObjectiveSpec::EnergyInvested).unwrap();
        let rep = reference.report.as_ref().unwrap();
        let capped = run_scenario(&m, &ObjectiveSpec::EnergyInvested, Some(slack * rep.gwp_tot)).unwrap();
        prop_assert_eq!(capped.status, SolveStatus::Optimal);
        prop_assert!(rel(capped.objective, reference.objective) < 1e-9);
        let other = capped.report.as_ref().unwrap();
        prop_assert!(rel(other.e_in_tot, rep.e_in_tot) < 1e-9);
    }
}

#[test]
fn zero_construction_emissions_make_reference_total_equal_baseline() {
    let m = eroi_core::fixtures::two_fuel_toy();
    let r = run_reference(&m, &ObjectiveSpec::EnergyInvested).unwrap();
    let rep = r.report.unwrap();
    assert!(rel(rep.gwp_tot, rep.gwp_op()) < 1e-6);
}

// ---------------------------------------------------------------- uq-gsa

fn random_surrogate(seed: u64, dim: usize, order: usize) -> PceSurrogate {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let basis = total_degree_basis(dim, order);
    let coefficients = (0..basis.len()).map(|_| rng.random_range(-2.0..2.0)).collect();
    PceSurrogate {
        order,
        basis,
        coefficients,
        lo: vec![-1.0; dim],
        hi: vec![1.0; dim],
        loo_error: 0.0,
    }
}

proptest! {
    #![proptest_config(config(48))]

    #[test]
    fn basis_is_orthonormal(dim in 1usize..4, order in 1usize..5, i in any::<prop::sample::Index>(), j in any::<prop::sample::Index>()) {
        let basis = total_degree_basis(dim, order);
        let nodes = gauss_legendre(order + 2);
        let (a, b) = (&basis[i.index(basis.len())], &basis[j.index(basis.len())]);
        let ip = inner_product(a, b, dim, order, &nodes);
        let want = if a == b { 1.0 } else { 0.0 };
        prop_assert!((ip - want).abs() <= 1e-10, "{:?} {:?} {}", a, b, ip);
    }

    #[test]
    fn total_indices_lie_in_the_unit_interval(seed in any::<u64>(), dim in 1usize..5, order in 1usize..4) {
        let s = random_surrogate(seed, dim, order);
        let st = sobol_total(&s).unwrap();
        prop_assert!(st.iter().all(|v| (0.0..=1.0 + 1e-6).contains(v)), "{:?}", st);
    }

    #[test]
    fn additive_fits_have_total_indices_summing_to_one(seed in any::<u64>(), dim in 2usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w: Vec<f64> = (0..dim).map(|_| rng.random_range(-3.0..3.0)).collect();
        let params: Vec<UncertainParameter> = (0..dim)
            .map(|i| UncertainParameter::new(&format!("resource.R{i}.e_op"), ParamKind::Absolute, 0.0, 1.0).unwrap())
            .collect();
        let x = latin_hypercube(&params, 120, seed, 0);
        let y: Vec<f64> = x.iter().map(|p| p.iter().zip(&w).map(|(a, b)| b * (a * a + a)).sum()).collect();
        let s = fit_pce(&x, &y, &vec![0.0; dim], &vec![1.0; dim], 2).unwrap();
        let total: f64 = sobol_total(&s).unwrap().iter().sum();
        prop_assert!((total - 1.0).abs() <= 0.02, "{}", total);
    }

    #[test]
    fn moments_match_surrogate_sampling(seed in any::<u64>(), dim in 1usize..4) {
        let s = random_surrogate(seed, dim, 2);
        let mm = moments(&s);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 1);
        let n = 20_000;
        let ys: Vec<f64> = (0..n).map(|_| {
            let xi: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
            s.eval_standard(&xi)
        }).collect();
        let mean = ys.iter().sum::<f64>() / n as f64;
        let var = ys.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        // Five standard errors of each estimator.
        let se_mean = (mm.variance / n as f64).sqrt();
        prop_assert!((mean - mm.mean).abs() <= 5.0 * se_mean + 1e-12);
        let fourth = ys.iter().map(|y| (y - mean).powi(4)).sum::<f64>() / n as f64;
        let se_var = ((fourth - var * var) / n as f64).sqrt();
        prop_assert!((var - mm.variance).abs() <= 5.0 * se_var + 1e-12);
    }
}

#[test]
fn same_seed_same_sobol_report() {
    use eroi_core::gsa::{analyze_second_order, Study};
    let m = eroi_core::fixtures::two_fuel_toy();
    let params = vec![
        UncertainParameter::relative("resource.CLEAN.e_op", 0.25).unwrap(),
        UncertainParameter::relative("resource.DIRTY.e_op", 0.25).unwrap(),
    ];
    let spec = ObjectiveSpec::EnergyInvested;
    let study = Study {
        model: &m,
        params: &params,
        spec: &spec,
        gwp_limit: Some(150_000.0),
    };
    let (a, _) = analyze_second_order(&study, 11, None, 2).unwrap();
    let (b, _) = analyze_second_order(&study, 11, None, 2).unwrap();
    assert_eq!(a, b);
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
}

// ---------------------------------------------------------------- cli-io

proptest! {
    #![proptest_config(config(16))]

    #[test]
    fn bundles_round_trip(seed in any::<u64>()) {
        let model = random_model(seed);
        let uncertain = vec![
            UncertainParameter::relative("resource.NG.e_op", 0.25).unwrap(),
            UncertainParameter::new("tech.PV.f_max", ParamKind::Absolute, 0.0, 0.75).unwrap(),
        ];
        let mut categories = BTreeMap::new();
        for r in &model.resources {
            categories.insert(r.name.clone(), r.category);
        }
        let ds = Dataset {
            model,
            uncertain,
            meta: Meta { name: format!("random-{seed}"), categories, ..Meta::default() },
        };
        let dir = tempfile::tempdir().unwrap();
        save(&ds, dir.path()).unwrap();
        let back = load(dir.path()).unwrap();
        prop_assert_eq!(&back.model, &ds.model);
        prop_assert_eq!(&back.uncertain, &ds.uncertain);
        prop_assert_eq!(&back.meta.name, &ds.meta.name);
        // A second pass writes byte-identical files.
        let dir2 = tempfile::tempdir().unwrap();
        save(&back, dir2.path()).unwrap();
        for f in eroi_core::io::REQUIRED_FILES {
            prop_assert_eq!(std::fs::read(dir.path().join(f)).unwrap(), std::fs::read(dir2.path().join(f)).unwrap());
        }
    }

    #[test]
    fn run_reports_reload_exactly(seed in any::<u64>()) {
        let m = random_model(seed);
        let r = run_reference(&m, &ObjectiveSpec::EnergyInvested).unwrap();
        let rep = eroi_core::io::RunReport::new("random", &r);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.json");
        std::fs::write(&path, serde_json::to_string_pretty(&rep).unwrap()).unwrap();
        let back = eroi_core::io::read_run_report(&path).unwrap();
        prop_assert_eq!(back, rep);
        let report = AccountingReport::from_solution(&m, &assemble(&m, &ObjectiveSpec::EnergyInvested, None).unwrap(), &solve(&assemble(&m, &ObjectiveSpec::EnergyInvested, None).unwrap()).unwrap()).unwrap();
        prop_assert!(report.eroi.is_some());
    }
}
