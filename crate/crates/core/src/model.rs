//! Energy system description: resources, conversion technologies, storage,
//! end-use demands and the typical-day calendar.
//!
//! Internal units are GWh, GW, tCO2-eq and years. Quantities attached to a
//! period `(td, h)` are rates over that period, so multiplying by the day
//! weight and `t_op` yields annual GWh.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::Deref;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Hours in a typical day.
pub const HOURS_PER_DAY: usize = 24;
/// Hours in a non-leap year.
pub const HOURS_PER_YEAR: f64 = 8760.0;

const PROFILE_TOL: f64 = 1e-9;
const CALENDAR_TOL: f64 = 1e-6;

/// Resource grouping used when breaking down the primary mix.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ResourceCategory {
    #[serde(rename = "fossil")]
    Fossil,
    #[serde(rename = "non-RE")]
    NonRenewable,
    #[serde(rename = "RE-fuels")]
    RenewableFuels,
    #[serde(rename = "biomass")]
    Biomass,
    #[serde(rename = "wind")]
    Wind,
    #[serde(rename = "solar")]
    Solar,
    #[default]
    #[serde(rename = "other")]
    Other,
}

impl ResourceCategory {
    pub const ALL: [ResourceCategory; 7] = [
        ResourceCategory::Fossil,
        ResourceCategory::NonRenewable,
        ResourceCategory::RenewableFuels,
        ResourceCategory::Biomass,
        ResourceCategory::Wind,
        ResourceCategory::Solar,
        ResourceCategory::Other,
    ];

    pub fn is_renewable(self) -> bool {
        matches!(
            self,
            ResourceCategory::RenewableFuels
                | ResourceCategory::Biomass
                | ResourceCategory::Wind
                | ResourceCategory::Solar
        )
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ResourceCategory::Fossil => "fossil",
            ResourceCategory::NonRenewable => "non-RE",
            ResourceCategory::RenewableFuels => "RE-fuels",
            ResourceCategory::Biomass => "biomass",
            ResourceCategory::Wind => "wind",
            ResourceCategory::Solar => "solar",
            ResourceCategory::Other => "other",
        }
    }
}

impl fmt::Display for ResourceCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for ResourceCategory {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ResourceCategory::ALL
            .into_iter()
            .find(|c| c.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| format!("unknown resource category `{s}`"))
    }
}

/// A primary resource or import supplying one carrier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Resource {
    pub name: String,
    /// Carrier delivered into the balance.
    pub carrier: String,
    /// Energy invested in operation, GWh per GWh of fuel.
    pub e_op: f64,
    /// Operation emissions, tCO2-eq per GWh of fuel.
    pub gwp_op: f64,
    /// Annual availability in GWh/y; `None` means unbounded.
    pub avail: Option<f64>,
    #[serde(default)]
    pub category: ResourceCategory,
}

/// A conversion technology with a single normalized main output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Technology {
    pub name: String,
    /// Energy invested in construction, GWh per GW installed.
    pub e_constr: f64,
    /// Construction emissions, tCO2-eq per GW installed.
    pub gwp_constr: f64,
    /// Lifetime in years.
    pub lifetime: f64,
    pub f_min: f64,
    /// Upper capacity bound in GW; `f64::INFINITY` when unbounded.
    pub f_max: f64,
    /// Carrier coefficients per unit of activity: main output `+1`, inputs negative.
    pub conversion: BTreeMap<String, f64>,
    /// Hourly capacity factor per period; `None` means 1 everywhere.
    pub cpt: Option<Vec<f64>>,
}

impl Technology {
    /// The carrier whose coefficient is exactly `+1`.
    pub fn main_output(&self) -> Option<&str> {
        let mut it = self
            .conversion
            .iter()
            .filter(|(_, &c)| c == 1.0)
            .map(|(k, _)| k.as_str());
        let first = it.next();
        if it.next().is_some() {
            None
        } else {
            first
        }
    }

    pub fn capacity_factor(&self, period: usize) -> f64 {
        self.cpt.as_ref().map_or(1.0, |c| c[period])
    }
}

/// Intra-day storage of a single carrier (cyclic over each typical day).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StorageUnit {
    pub name: String,
    pub carrier: String,
    pub eff_in: f64,
    pub eff_out: f64,
    /// GWh per GWh of capacity.
    pub e_constr: f64,
    /// tCO2-eq per GWh of capacity.
    pub gwp_constr: f64,
    pub lifetime: f64,
    /// Maximum energy capacity in GWh; `f64::INFINITY` when unbounded.
    pub f_max: f64,
}

/// Exogenous end-use demand for one carrier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EndUseDemand {
    pub name: String,
    pub carrier: String,
    /// Annual demand, GWh/y or service units per year.
    pub annual: f64,
    /// Share of the annual demand falling in each period, indexed like [`TimeMapping::period`].
    pub profile: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ShareRelation {
    #[serde(rename = "<=")]
    AtMost,
    #[serde(rename = ">=")]
    AtLeast,
}

/// Bound on the share of a carrier's annual production coming from a group of technologies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShareConstraint {
    pub name: String,
    pub carrier: String,
    pub technologies: Vec<String>,
    pub relation: ShareRelation,
    pub fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TypicalDay {
    pub id: String,
    /// Number of calendar days represented.
    pub weight: f64,
}

/// Typical-day calendar: every typical day has [`HOURS_PER_DAY`] periods of `t_op` hours.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeMapping {
    pub typical_days: Vec<TypicalDay>,
    pub t_op: f64,
}

impl Default for TimeMapping {
    fn default() -> Self {
        TimeMapping {
            typical_days: Vec::new(),
            t_op: 1.0,
        }
    }
}

impl TimeMapping {
    pub fn new(typical_days: Vec<TypicalDay>) -> Self {
        TimeMapping {
            typical_days,
            t_op: 1.0,
        }
    }

    pub fn num_periods(&self) -> usize {
        self.typical_days.len() * HOURS_PER_DAY
    }

    /// Flat period index of hour `h` in typical day number `td`.
    pub fn period(&self, td: usize, h: usize) -> usize {
        td * HOURS_PER_DAY + h
    }

    /// Annual multiplier of a period: day weight times period duration.
    pub fn period_weight(&self, period: usize) -> f64 {
        self.typical_days[period / HOURS_PER_DAY].weight * self.t_op
    }

    /// Total represented hours, 8760 for a valid calendar.
    pub fn represented_hours(&self) -> f64 {
        self.typical_days.iter().map(|d| d.weight).sum::<f64>() * HOURS_PER_DAY as f64 * self.t_op
    }

    /// Sums per-period quantities to annual totals.
    pub fn annualize(&self, per_period: &[f64]) -> Result<f64, AnnualizeError> {
        let n = self.num_periods();
        if per_period.len() != n {
            return Err(AnnualizeError {
                expected: n,
                found: per_period.len(),
            });
        }
        Ok(per_period
            .iter()
            .enumerate()
            .map(|(p, q)| self.period_weight(p) * q)
            .sum())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("expected {expected} period values, found {found}")]
pub struct AnnualizeError {
    pub expected: usize,
    pub found: usize,
}

/// Unvalidated model contents, as read from a dataset.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ModelData {
    pub resources: Vec<Resource>,
    pub technologies: Vec<Technology>,
    pub storages: Vec<StorageUnit>,
    pub demands: Vec<EndUseDemand>,
    #[serde(default)]
    pub shares: Vec<ShareConstraint>,
    pub time: TimeMapping,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum ViolationKind {
    DanglingReference,
    BadBounds,
    BadTimeMapping,
    NegativeValue,
    NonFinite,
    BadConversion,
    BadProfile,
    BadEfficiency,
    BadLifetime,
    DuplicateName,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub path: String,
    pub kind: ViolationKind,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {:?}: {}", self.path, self.kind, self.message)
    }
}

/// Every invariant violation found in a dataset.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("model validation failed with {} violation(s): {}", .violations.len(), summarize(.violations))]
pub struct ValidationError {
    pub violations: Vec<Violation>,
}

impl ValidationError {
    pub fn has(&self, kind: ViolationKind) -> bool {
        self.violations.iter().any(|v| v.kind == kind)
    }
}

fn summarize(v: &[Violation]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

/// A validated, immutable energy system.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergySystemModel {
    data: ModelData,
    carriers: BTreeSet<String>,
}

impl Deref for EnergySystemModel {
    type Target = ModelData;

    fn deref(&self) -> &ModelData {
        &self.data
    }
}

impl EnergySystemModel {
    pub fn validate(data: ModelData) -> Result<Self, ValidationError> {
        let violations = Checker::new(&data).run();
        if !violations.is_empty() {
            return Err(ValidationError { violations });
        }
        let carriers = collect_carriers(&data);
        Ok(EnergySystemModel { data, carriers })
    }

    pub fn data(&self) -> &ModelData {
        &self.data
    }

    pub fn into_data(self) -> ModelData {
        self.data
    }

    /// All carriers mentioned by resources, technologies, storage and demands.
    pub fn carriers(&self) -> &BTreeSet<String> {
        &self.carriers
    }

    pub fn resource(&self, name: &str) -> Option<&Resource> {
        self.resources.iter().find(|r| r.name == name)
    }

    pub fn technology(&self, name: &str) -> Option<&Technology> {
        self.technologies.iter().find(|t| t.name == name)
    }

    pub fn storage(&self, name: &str) -> Option<&StorageUnit> {
        self.storages.iter().find(|s| s.name == name)
    }

    pub fn demand(&self, name: &str) -> Option<&EndUseDemand> {
        self.demands.iter().find(|d| d.name == name)
    }

    /// Demand rate of `carrier` in `period`, summed over demands.
    pub fn demand_rate(&self, carrier: &str, period: usize) -> f64 {
        self.demands
            .iter()
            .filter(|d| d.carrier == carrier)
            .map(|d| d.annual * d.profile[period] / self.time.t_op)
            .sum()
    }
}

fn collect_carriers(data: &ModelData) -> BTreeSet<String> {
    let mut set = BTreeSet::new();
    set.extend(data.resources.iter().map(|r| r.carrier.clone()));
    for t in &data.technologies {
        set.extend(t.conversion.keys().cloned());
    }
    set.extend(data.storages.iter().map(|s| s.carrier.clone()));
    set.extend(data.demands.iter().map(|d| d.carrier.clone()));
    set
}

struct Checker<'a> {
    data: &'a ModelData,
    out: Vec<Violation>,
}

impl<'a> Checker<'a> {
    fn new(data: &'a ModelData) -> Self {
        Checker { data, out: Vec::new() }
    }

    fn push(&mut self, path: impl Into<String>, kind: ViolationKind, message: impl Into<String>) {
        self.out.push(Violation {
            path: path.into(),
            kind,
            message: message.into(),
        });
    }

    fn nonneg(&mut self, path: String, value: f64) {
        if !value.is_finite() {
            self.push(path, ViolationKind::NonFinite, format!("{value} is not finite"));
        } else if value < 0.0 {
            self.push(path, ViolationKind::NegativeValue, format!("{value} < 0"));
        }
    }

    fn lifetime(&mut self, path: String, value: f64) {
        if !(value.is_finite() && value > 0.0) {
            self.push(
                path,
                ViolationKind::BadLifetime,
                format!("lifetime {value} must be > 0"),
            );
        }
    }

    fn run(mut self) -> Vec<Violation> {
        self.time();
        self.names();
        let periods = self.data.time.num_periods();
        let calendar_ok = !self.out.iter().any(|v| v.kind == ViolationKind::BadTimeMapping);

        for (i, r) in self.data.resources.iter().enumerate() {
            let p = format!("resources[{i}:{}]", r.name);
            self.nonneg(format!("{p}.e_op"), r.e_op);
            self.nonneg(format!("{p}.gwp_op"), r.gwp_op);
            if let Some(a) = r.avail {
                if !a.is_nan() && a != f64::INFINITY {
                    self.nonneg(format!("{p}.avail"), a);
                }
            }
        }

        for (i, t) in self.data.technologies.iter().enumerate() {
            let p = format!("technologies[{i}:{}]", t.name);
            self.nonneg(format!("{p}.e_constr"), t.e_constr);
            self.nonneg(format!("{p}.gwp_constr"), t.gwp_constr);
            self.lifetime(format!("{p}.lifetime"), t.lifetime);
            self.nonneg(format!("{p}.f_min"), t.f_min);
            if t.f_max.is_nan() {
                self.push(format!("{p}.f_max"), ViolationKind::NonFinite, "f_max is NaN");
            } else if t.f_max < 0.0 {
                self.push(
                    format!("{p}.f_max"),
                    ViolationKind::NegativeValue,
                    format!("{} < 0", t.f_max),
                );
            }
            if t.f_min > t.f_max {
                self.push(
                    format!("{p}.f_min"),
                    ViolationKind::BadBounds,
                    format!("f_min {} > f_max {}", t.f_min, t.f_max),
                );
            }
            if t.conversion.values().any(|c| !c.is_finite()) {
                self.push(
                    format!("{p}.conversion"),
                    ViolationKind::NonFinite,
                    "non-finite coefficient",
                );
            }
            let mains = t.conversion.values().filter(|&&c| c == 1.0).count();
            if mains != 1 {
                self.push(
                    format!("{p}.conversion"),
                    ViolationKind::BadConversion,
                    format!("expected exactly one +1 main output, found {mains}"),
                );
            }
            if let Some(cpt) = &t.cpt {
                if cpt.len() != periods {
                    self.push(
                        format!("{p}.cpt"),
                        ViolationKind::BadProfile,
                        format!("expected {periods} values, found {}", cpt.len()),
                    );
                } else if let Some((k, v)) = cpt
                    .iter()
                    .enumerate()
                    .find(|(_, v)| !(v.is_finite() && (0.0..=1.0).contains(*v)))
                {
                    self.push(
                        format!("{p}.cpt[{k}]"),
                        ViolationKind::BadProfile,
                        format!("capacity factor {v} outside [0,1]"),
                    );
                }
            }
        }

        for (i, s) in self.data.storages.iter().enumerate() {
            let p = format!("storages[{i}:{}]", s.name);
            for (field, eff) in [("eff_in", s.eff_in), ("eff_out", s.eff_out)] {
                if !(eff > 0.0 && eff <= 1.0) {
                    self.push(
                        format!("{p}.{field}"),
                        ViolationKind::BadEfficiency,
                        format!("{eff} outside (0,1]"),
                    );
                }
            }
            self.nonneg(format!("{p}.e_constr"), s.e_constr);
            self.nonneg(format!("{p}.gwp_constr"), s.gwp_constr);
            self.lifetime(format!("{p}.lifetime"), s.lifetime);
            if s.f_max.is_nan() || s.f_max < 0.0 {
                self.push(
                    format!("{p}.f_max"),
                    ViolationKind::NegativeValue,
                    format!("f_max {}", s.f_max),
                );
            }
        }

        for (i, d) in self.data.demands.iter().enumerate() {
            let p = format!("demands[{i}:{}]", d.name);
            self.nonneg(format!("{p}.annual"), d.annual);
            if d.profile.len() != periods {
                self.push(
                    format!("{p}.profile"),
                    ViolationKind::BadProfile,
                    format!("expected {periods} values, found {}", d.profile.len()),
                );
                continue;
            }
            if let Some((k, v)) = d
                .profile
                .iter()
                .enumerate()
                .find(|(_, v)| !(v.is_finite() && **v >= 0.0))
            {
                self.push(
                    format!("{p}.profile[{k}]"),
                    ViolationKind::BadProfile,
                    format!("share {v} is negative"),
                );
                continue;
            }
            if calendar_ok {
                let total: f64 = d
                    .profile
                    .iter()
                    .enumerate()
                    .map(|(k, v)| self.data.time.typical_days[k / HOURS_PER_DAY].weight * v)
                    .sum();
                if (total - 1.0).abs() > PROFILE_TOL {
                    self.push(
                        format!("{p}.profile"),
                        ViolationKind::BadProfile,
                        format!("weighted shares sum to {total}, expected 1"),
                    );
                }
            }
        }

        for (i, s) in self.data.shares.iter().enumerate() {
            let p = format!("shares[{i}:{}]", s.name);
            if !(s.fraction.is_finite() && (0.0..=1.0).contains(&s.fraction)) {
                self.push(
                    format!("{p}.fraction"),
                    ViolationKind::BadBounds,
                    format!("{} outside [0,1]", s.fraction),
                );
            }
        }

        self.references();
        self.out
    }

    fn time(&mut self) {
        let t = &self.data.time;
        if !(t.t_op.is_finite() && t.t_op > 0.0) {
            self.push(
                "time.t_op",
                ViolationKind::BadTimeMapping,
                format!("t_op {} must be > 0", t.t_op),
            );
            return;
        }
        for (i, d) in t.typical_days.iter().enumerate() {
            if !(d.weight.is_finite() && d.weight >= 0.0) {
                self.push(
                    format!("time.typical_days[{i}:{}].weight", d.id),
                    ViolationKind::BadTimeMapping,
                    format!("weight {} must be >= 0", d.weight),
                );
                return;
            }
        }
        if t.typical_days.is_empty() {
            // Degenerate empty calendar is only acceptable for an empty model.
            if !(self.data.demands.is_empty()
                && self.data.technologies.is_empty()
                && self.data.resources.is_empty()
                && self.data.storages.is_empty())
            {
                self.push("time.typical_days", ViolationKind::BadTimeMapping, "no typical days");
            }
            return;
        }
        let hours = t.represented_hours();
        if (hours - HOURS_PER_YEAR).abs() > CALENDAR_TOL {
            self.push(
                "time.typical_days",
                ViolationKind::BadTimeMapping,
                format!("weights cover {hours} h, expected {HOURS_PER_YEAR}"),
            );
        }
    }

    fn names(&mut self) {
        let mut seen = BTreeSet::new();
        let entities = self
            .data
            .resources
            .iter()
            .map(|r| ("resources", &r.name))
            .chain(self.data.technologies.iter().map(|t| ("technologies", &t.name)))
            .chain(self.data.storages.iter().map(|s| ("storages", &s.name)))
            .chain(self.data.demands.iter().map(|d| ("demands", &d.name)))
            .chain(self.data.shares.iter().map(|s| ("shares", &s.name)));
        let mut dups = Vec::new();
        for (group, name) in entities {
            if name.is_empty() || !seen.insert(name.clone()) {
                dups.push(format!("{group}.{name}"));
            }
        }
        let mut ids = BTreeSet::new();
        for d in &self.data.time.typical_days {
            if !ids.insert(d.id.clone()) {
                dups.push(format!("time.typical_days.{}", d.id));
            }
        }
        let mut demand_carriers = BTreeSet::new();
        for d in &self.data.demands {
            if !demand_carriers.insert(d.carrier.clone()) {
                dups.push(format!("demands.{}.carrier({})", d.name, d.carrier));
            }
        }
        for p in dups {
            self.push(p, ViolationKind::DuplicateName, "duplicate or empty identifier");
        }
    }

    fn references(&mut self) {
        let mut supplied: BTreeSet<&str> = self.data.resources.iter().map(|r| r.carrier.as_str()).collect();
        for t in &self.data.technologies {
            supplied.extend(t.conversion.iter().filter(|(_, &c)| c > 0.0).map(|(k, _)| k.as_str()));
        }
        let mut issues = Vec::new();
        for t in &self.data.technologies {
            for (carrier, _) in t.conversion.iter().filter(|(_, &c)| c < 0.0) {
                if !supplied.contains(carrier.as_str()) {
                    issues.push((format!("technologies.{}.conversion.{carrier}", t.name), carrier.clone()));
                }
            }
        }
        for s in &self.data.storages {
            if !supplied.contains(s.carrier.as_str()) {
                issues.push((format!("storages.{}.carrier", s.name), s.carrier.clone()));
            }
        }
        for d in &self.data.demands {
            if !supplied.contains(d.carrier.as_str()) {
                issues.push((format!("demands.{}.carrier", d.name), d.carrier.clone()));
            }
        }
        let techs: BTreeMap<&str, &Technology> = self.data.technologies.iter().map(|t| (t.name.as_str(), t)).collect();
        for s in &self.data.shares {
            for name in &s.technologies {
                match techs.get(name.as_str()) {
                    None => issues.push((format!("shares.{}.technologies.{name}", s.name), name.clone())),
                    Some(t) if t.conversion.get(&s.carrier).copied().unwrap_or(0.0) <= 0.0 => issues.push((
                        format!("shares.{}.technologies.{name}", s.name),
                        format!("{name} does not produce {}", s.carrier),
                    )),
                    Some(_) => {}
                }
            }
            if !supplied.contains(s.carrier.as_str()) {
                issues.push((format!("shares.{}.carrier", s.name), s.carrier.clone()));
            }
        }
        for (path, what) in issues {
            self.push(
                path,
                ViolationKind::DanglingReference,
                format!("`{what}` does not resolve to a supplied carrier or entity"),
            );
        }
    }
}
