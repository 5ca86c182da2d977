use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::io;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::{csv_io, write_atomic, Issue, LoadError};
use crate::gsa::{ParamKind, UncertainParameter};
use crate::model::{
    EndUseDemand, EnergySystemModel, ModelData, Resource, ResourceCategory, ShareConstraint, ShareRelation,
    StorageUnit, Technology, TimeMapping, TypicalDay, HOURS_PER_DAY,
};

pub const REQUIRED_FILES: [&str; 8] = [
    "resources.csv",
    "technologies.csv",
    "conversion.csv",
    "storage.csv",
    "demands.csv",
    "profiles.csv",
    "cpt.csv",
    "typical_days.csv",
];

pub const OPTIONAL_FILES: [&str; 3] = ["shares.csv", "uncertain.csv", "meta.toml"];

/// Contents of `meta.toml`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Meta {
    #[serde(default)]
    pub name: String,
    #[serde(default = "one")]
    pub t_op: f64,
    #[serde(default)]
    pub units: BTreeMap<String, String>,
    /// Resource name to category tag.
    #[serde(default)]
    pub categories: BTreeMap<String, ResourceCategory>,
}

fn one() -> f64 {
    1.0
}

impl Default for Meta {
    fn default() -> Self {
        Meta {
            name: String::new(),
            t_op: 1.0,
            units: BTreeMap::new(),
            categories: BTreeMap::new(),
        }
    }
}

/// A loaded bundle.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub model: EnergySystemModel,
    pub uncertain: Vec<UncertainParameter>,
    pub meta: Meta,
}

#[derive(Debug, Serialize, Deserialize)]
struct ResourceRow {
    name: String,
    carrier: String,
    e_op: f64,
    gwp_op: f64,
    avail: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
struct TechRow {
    name: String,
    e_constr: f64,
    gwp_constr: f64,
    lifetime: f64,
    f_min: f64,
    f_max: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct ConversionRow {
    technology: String,
    carrier: String,
    coefficient: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct StorageRow {
    name: String,
    carrier: String,
    eff_in: f64,
    eff_out: f64,
    e_constr: f64,
    gwp_constr: f64,
    lifetime: f64,
    f_max: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct DemandRow {
    name: String,
    carrier: String,
    annual: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct ProfileRow {
    demand: String,
    td: String,
    hour: usize,
    share: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct CptRow {
    technology: String,
    td: String,
    hour: usize,
    cpt: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct DayRow {
    id: String,
    weight: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct ShareRow {
    name: String,
    carrier: String,
    relation: String,
    fraction: f64,
    technologies: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct UncertainRow {
    path: String,
    kind: String,
    lo: f64,
    hi: f64,
}

struct Reader<'a> {
    dir: &'a Path,
    issues: Vec<Issue>,
}

impl Reader<'_> {
    fn issue(&mut self, file: &str, line: Option<u64>, column: Option<usize>, message: impl Into<String>) {
        self.issues.push(Issue {
            file: file.to_string(),
            line,
            column,
            message: message.into(),
        });
    }

    /// Rows with their 1-based line numbers; malformed rows become issues.
    fn rows<T: DeserializeOwned>(&mut self, file: &str, columns: &[&str]) -> Vec<(u64, T)> {
        let path = self.dir.join(file);
        let mut rdr = match csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(&path) {
            Ok(r) => r,
            Err(e) => {
                self.issue(file, None, None, e.to_string());
                return Vec::new();
            }
        };
        let headers = match rdr.headers() {
            Ok(h) => h.clone(),
            Err(e) => {
                let line = e.position().map(|p| p.line());
                self.issue(file, line, None, e.to_string());
                return Vec::new();
            }
        };
        if headers.is_empty() {
            self.issue(file, Some(1), None, "missing header row");
            return Vec::new();
        }
        let mut ok = true;
        for c in columns {
            if !headers.iter().any(|h| h == *c) {
                self.issue(file, Some(1), None, format!("missing column `{c}`"));
                ok = false;
            }
        }
        if !ok {
            return Vec::new();
        }
        let mut out = Vec::new();
        for rec in rdr.records() {
            match rec {
                Ok(rec) => {
                    let line = rec.position().map_or(0, |p| p.line());
                    match rec.deserialize::<T>(Some(&headers)) {
                        Ok(row) => out.push((line, row)),
                        Err(e) => {
                            let col = match e.kind() {
                                csv::ErrorKind::Deserialize { err, .. } => err.field().map(|f| f as usize + 1),
                                _ => None,
                            };
                            let msg = match e.kind() {
                                csv::ErrorKind::Deserialize { err, .. } => err.kind().to_string(),
                                _ => e.to_string(),
                            };
                            self.issue(file, Some(line), col, msg);
                        }
                    }
                }
                Err(e) => {
                    let line = e.position().map(|p| p.line());
                    let msg = match e.kind() {
                        csv::ErrorKind::UnequalLengths { expected_len, len, .. } => {
                            format!("expected {expected_len} fields, found {len}")
                        }
                        _ => e.to_string(),
                    };
                    self.issue(file, line, None, msg);
                }
            }
        }
        out
    }

    fn meta(&mut self) -> Meta {
        let path = self.dir.join("meta.toml");
        let text = match fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) if e.kind() == io::ErrorKind::NotFound => return Meta::default(),
            Err(e) => {
                self.issue("meta.toml", None, None, e.to_string());
                return Meta::default();
            }
        };
        match toml::from_str::<Meta>(&text) {
            Ok(m) => m,
            Err(e) => {
                let (line, col) = e.span().map_or((None, None), |s| {
                    let before = &text[..s.start.min(text.len())];
                    let line = before.matches('\n').count() as u64 + 1;
                    let col = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
                    (Some(line), Some(col))
                });
                self.issue("meta.toml", line, col, e.message().to_string());
                Meta::default()
            }
        }
    }
}

/// Per-period table keyed by entity name, filled from `(entity, td, hour, value)` rows.
fn hourly_table(
    reader: &mut Reader<'_>,
    file: &str,
    rows: Vec<(u64, (String, String, usize, f64))>,
    days: &HashMap<String, usize>,
    num_days: usize,
) -> BTreeMap<String, Vec<f64>> {
    let mut table: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for (line, (entity, td, hour, value)) in rows {
        let Some(&d) = days.get(&td) else {
            reader.issue(file, Some(line), Some(2), format!("unknown typical day `{td}`"));
            continue;
        };
        if !(1..=HOURS_PER_DAY).contains(&hour) {
            reader.issue(
                file,
                Some(line),
                Some(3),
                format!("hour {hour} outside 1..={HOURS_PER_DAY}"),
            );
            continue;
        }
        let v = table
            .entry(entity)
            .or_insert_with(|| vec![f64::NAN; num_days * HOURS_PER_DAY]);
        let p = d * HOURS_PER_DAY + hour - 1;
        if !v[p].is_nan() {
            reader.issue(
                file,
                Some(line),
                None,
                format!("duplicate entry for day `{td}` hour {hour}"),
            );
        }
        v[p] = value;
    }
    for (entity, v) in &table {
        let missing = v.iter().filter(|x| x.is_nan()).count();
        if missing > 0 {
            reader.issue(
                file,
                None,
                None,
                format!("`{entity}` is missing {missing} hourly value(s)"),
            );
        }
    }
    table
}

/// Reads, cross-checks and validates a bundle; reports every problem found.
pub fn load(dir: &Path) -> Result<Dataset, LoadError> {
    let missing: Vec<String> = REQUIRED_FILES
        .iter()
        .filter(|f| !dir.join(f).is_file())
        .map(|f| f.to_string())
        .collect();
    if !missing.is_empty() {
        return Err(LoadError::MissingFile {
            dir: dir.to_path_buf(),
            files: missing,
        });
    }
    let mut r = Reader {
        dir,
        issues: Vec::new(),
    };
    let meta = r.meta();

    let day_rows: Vec<(u64, DayRow)> = r.rows("typical_days.csv", &["id", "weight"]);
    let mut days = HashMap::new();
    for (line, d) in &day_rows {
        if days.insert(d.id.clone(), days.len()).is_some() {
            r.issue(
                "typical_days.csv",
                Some(*line),
                Some(1),
                format!("duplicate typical day `{}`", d.id),
            );
        }
    }
    let time = TimeMapping {
        typical_days: day_rows
            .into_iter()
            .map(|(_, d)| TypicalDay {
                id: d.id,
                weight: d.weight,
            })
            .collect(),
        t_op: meta.t_op,
    };
    let num_days = time.typical_days.len();

    let resources: Vec<Resource> = r
        .rows::<ResourceRow>("resources.csv", &["name", "carrier", "e_op", "gwp_op", "avail"])
        .into_iter()
        .map(|(_, row)| Resource {
            category: meta.categories.get(&row.name).copied().unwrap_or_default(),
            name: row.name,
            carrier: row.carrier,
            e_op: row.e_op,
            gwp_op: row.gwp_op,
            avail: row.avail.filter(|a| !a.is_infinite()),
        })
        .collect();
    for name in meta.categories.keys() {
        if !resources.iter().any(|res| &res.name == name) {
            r.issue(
                "meta.toml",
                None,
                None,
                format!("category given for unknown resource `{name}`"),
            );
        }
    }

    let mut technologies: Vec<Technology> = r
        .rows::<TechRow>(
            "technologies.csv",
            &["name", "e_constr", "gwp_constr", "lifetime", "f_min", "f_max"],
        )
        .into_iter()
        .map(|(_, t)| Technology {
            name: t.name,
            e_constr: t.e_constr,
            gwp_constr: t.gwp_constr,
            lifetime: t.lifetime,
            f_min: t.f_min,
            f_max: t.f_max,
            conversion: BTreeMap::new(),
            cpt: None,
        })
        .collect();
    let tech_index: HashMap<String, usize> = technologies
        .iter()
        .enumerate()
        .map(|(i, t)| (t.name.clone(), i))
        .collect();
    for (line, c) in r.rows::<ConversionRow>("conversion.csv", &["technology", "carrier", "coefficient"]) {
        let Some(&i) = tech_index.get(&c.technology) else {
            r.issue(
                "conversion.csv",
                Some(line),
                Some(1),
                format!("unknown technology `{}`", c.technology),
            );
            continue;
        };
        if technologies[i]
            .conversion
            .insert(c.carrier.clone(), c.coefficient)
            .is_some()
        {
            r.issue(
                "conversion.csv",
                Some(line),
                Some(2),
                format!("duplicate carrier `{}` for `{}`", c.carrier, c.technology),
            );
        }
    }
    let cpt_rows = r
        .rows::<CptRow>("cpt.csv", &["technology", "td", "hour", "cpt"])
        .into_iter()
        .map(|(l, c)| (l, (c.technology, c.td, c.hour, c.cpt)))
        .collect();
    for (name, v) in hourly_table(&mut r, "cpt.csv", cpt_rows, &days, num_days) {
        match tech_index.get(&name) {
            Some(&i) => technologies[i].cpt = Some(v),
            None => r.issue("cpt.csv", None, None, format!("unknown technology `{name}`")),
        }
    }

    let storages: Vec<StorageUnit> = r
        .rows::<StorageRow>(
            "storage.csv",
            &[
                "name",
                "carrier",
                "eff_in",
                "eff_out",
                "e_constr",
                "gwp_constr",
                "lifetime",
                "f_max",
            ],
        )
        .into_iter()
        .map(|(_, s)| StorageUnit {
            name: s.name,
            carrier: s.carrier,
            eff_in: s.eff_in,
            eff_out: s.eff_out,
            e_constr: s.e_constr,
            gwp_constr: s.gwp_constr,
            lifetime: s.lifetime,
            f_max: s.f_max,
        })
        .collect();

    let demand_rows: Vec<(u64, DemandRow)> = r.rows("demands.csv", &["name", "carrier", "annual"]);
    let profile_rows = r
        .rows::<ProfileRow>("profiles.csv", &["demand", "td", "hour", "share"])
        .into_iter()
        .map(|(l, p)| (l, (p.demand, p.td, p.hour, p.share)))
        .collect();
    let mut profiles = hourly_table(&mut r, "profiles.csv", profile_rows, &days, num_days);
    let demands: Vec<EndUseDemand> = demand_rows
        .into_iter()
        .map(|(line, d)| {
            let profile = profiles.remove(&d.name).unwrap_or_else(|| {
                r.issue(
                    "demands.csv",
                    Some(line),
                    Some(1),
                    format!("no profile for demand `{}`", d.name),
                );
                Vec::new()
            });
            EndUseDemand {
                name: d.name,
                carrier: d.carrier,
                annual: d.annual,
                profile,
            }
        })
        .collect();
    for name in profiles.keys() {
        r.issue(
            "profiles.csv",
            None,
            None,
            format!("profile for unknown demand `{name}`"),
        );
    }

    let mut shares = Vec::new();
    if dir.join("shares.csv").is_file() {
        for (line, s) in r.rows::<ShareRow>(
            "shares.csv",
            &["name", "carrier", "relation", "fraction", "technologies"],
        ) {
            let relation = match s.relation.as_str() {
                "<=" => ShareRelation::AtMost,
                ">=" => ShareRelation::AtLeast,
                other => {
                    r.issue(
                        "shares.csv",
                        Some(line),
                        Some(3),
                        format!("relation `{other}` is not <= or >="),
                    );
                    continue;
                }
            };
            shares.push(ShareConstraint {
                name: s.name,
                carrier: s.carrier,
                technologies: s
                    .technologies
                    .split(';')
                    .map(str::trim)
                    .filter(|t| !t.is_empty())
                    .map(str::to_string)
                    .collect(),
                relation,
                fraction: s.fraction,
            });
        }
    }

    let mut uncertain = Vec::new();
    let mut uncertain_lines = Vec::new();
    if dir.join("uncertain.csv").is_file() {
        for (line, u) in r.rows::<UncertainRow>("uncertain.csv", &["path", "kind", "lo", "hi"]) {
            let kind = match u.kind.parse::<ParamKind>() {
                Ok(k) => k,
                Err(e) => {
                    r.issue("uncertain.csv", Some(line), Some(2), e.to_string());
                    continue;
                }
            };
            match UncertainParameter::new(&u.path, kind, u.lo, u.hi) {
                Ok(p) => {
                    uncertain.push(p);
                    uncertain_lines.push(line);
                }
                Err(e) => r.issue("uncertain.csv", Some(line), Some(1), e.to_string()),
            }
        }
    }

    if !r.issues.is_empty() {
        return Err(LoadError::Parse(r.issues));
    }
    let data = ModelData {
        resources,
        technologies,
        storages,
        demands,
        shares,
        time,
    };

    for (p, &line) in uncertain.iter().zip(&uncertain_lines) {
        for x in [p.lo, p.hi] {
            let mut perturbed = data.clone();
            let outcome = p.apply(&mut perturbed, x).map_err(|e| e.to_string()).and_then(|_| {
                EnergySystemModel::validate(perturbed)
                    .map(drop)
                    .map_err(|e| e.to_string())
            });
            if let Err(msg) = outcome {
                r.issue("uncertain.csv", Some(line), None, format!("at {x}: {msg}"));
                break;
            }
        }
    }
    let model = EnergySystemModel::validate(data)?;
    if !r.issues.is_empty() {
        return Err(LoadError::Parse(r.issues));
    }
    Ok(Dataset { model, uncertain, meta })
}

fn write_rows<T: Serialize>(
    dir: &Path,
    file: &str,
    header: &[&str],
    rows: impl IntoIterator<Item = T>,
) -> io::Result<()> {
    write_atomic(&dir.join(file), |w| {
        let mut out = csv::WriterBuilder::new().has_headers(false).from_writer(w);
        out.write_record(header).map_err(csv_io)?;
        for r in rows {
            out.serialize(r).map_err(csv_io)?;
        }
        out.flush()
    })
}

fn td_hours(time: &TimeMapping) -> impl Iterator<Item = (usize, String, usize)> + '_ {
    time.typical_days
        .iter()
        .enumerate()
        .flat_map(|(d, td)| (1..=HOURS_PER_DAY).map(move |h| (d * HOURS_PER_DAY + h - 1, td.id.clone(), h)))
}

/// Writes `ds` as a bundle that [`load`] reads back field for field.
pub fn save(ds: &Dataset, dir: &Path) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    let m = &ds.model;
    write_rows(
        dir,
        "resources.csv",
        &["name", "carrier", "e_op", "gwp_op", "avail"],
        m.resources.iter().map(|r| ResourceRow {
            name: r.name.clone(),
            carrier: r.carrier.clone(),
            e_op: r.e_op,
            gwp_op: r.gwp_op,
            avail: r.avail,
        }),
    )?;
    write_rows(
        dir,
        "technologies.csv",
        &["name", "e_constr", "gwp_constr", "lifetime", "f_min", "f_max"],
        m.technologies.iter().map(|t| TechRow {
            name: t.name.clone(),
            e_constr: t.e_constr,
            gwp_constr: t.gwp_constr,
            lifetime: t.lifetime,
            f_min: t.f_min,
            f_max: t.f_max,
        }),
    )?;
    write_rows(
        dir,
        "conversion.csv",
        &["technology", "carrier", "coefficient"],
        m.technologies.iter().flat_map(|t| {
            t.conversion.iter().map(|(c, &v)| ConversionRow {
                technology: t.name.clone(),
                carrier: c.clone(),
                coefficient: v,
            })
        }),
    )?;
    write_rows(
        dir,
        "cpt.csv",
        &["technology", "td", "hour", "cpt"],
        m.technologies.iter().flat_map(|t| {
            t.cpt.iter().flat_map(|c| {
                td_hours(&m.time).map(|(p, td, hour)| CptRow {
                    technology: t.name.clone(),
                    td,
                    hour,
                    cpt: c[p],
                })
            })
        }),
    )?;
    write_rows(
        dir,
        "storage.csv",
        &[
            "name",
            "carrier",
            "eff_in",
            "eff_out",
            "e_constr",
            "gwp_constr",
            "lifetime",
            "f_max",
        ],
        m.storages.iter().map(|s| StorageRow {
            name: s.name.clone(),
            carrier: s.carrier.clone(),
            eff_in: s.eff_in,
            eff_out: s.eff_out,
            e_constr: s.e_constr,
            gwp_constr: s.gwp_constr,
            lifetime: s.lifetime,
            f_max: s.f_max,
        }),
    )?;
    write_rows(
        dir,
        "demands.csv",
        &["name", "carrier", "annual"],
        m.demands.iter().map(|d| DemandRow {
            name: d.name.clone(),
            carrier: d.carrier.clone(),
            annual: d.annual,
        }),
    )?;
    write_rows(
        dir,
        "profiles.csv",
        &["demand", "td", "hour", "share"],
        m.demands.iter().flat_map(|d| {
            td_hours(&m.time).map(|(p, td, hour)| ProfileRow {
                demand: d.name.clone(),
                td,
                hour,
                share: d.profile[p],
            })
        }),
    )?;
    write_rows(
        dir,
        "typical_days.csv",
        &["id", "weight"],
        m.time.typical_days.iter().map(|d| DayRow {
            id: d.id.clone(),
            weight: d.weight,
        }),
    )?;
    if !m.shares.is_empty() {
        write_rows(
            dir,
            "shares.csv",
            &["name", "carrier", "relation", "fraction", "technologies"],
            m.shares.iter().map(|s| ShareRow {
                name: s.name.clone(),
                carrier: s.carrier.clone(),
                relation: match s.relation {
                    ShareRelation::AtMost => "<=".into(),
                    ShareRelation::AtLeast => ">=".into(),
                },
                fraction: s.fraction,
                technologies: s.technologies.join(";"),
            }),
        )?;
    }
    if !ds.uncertain.is_empty() {
        write_rows(
            dir,
            "uncertain.csv",
            &["path", "kind", "lo", "hi"],
            ds.uncertain.iter().map(|u| UncertainRow {
                path: u.path.to_string(),
                kind: u.kind.to_string(),
                lo: u.lo,
                hi: u.hi,
            }),
        )?;
    }
    let mut meta = ds.meta.clone();
    meta.t_op = m.time.t_op;
    meta.categories = m
        .resources
        .iter()
        .filter(|r| r.category != ResourceCategory::Other)
        .map(|r| (r.name.clone(), r.category))
        .collect();
    let text = toml::to_string(&meta).map_err(io::Error::other)?;
    write_atomic(&dir.join("meta.toml"), |w| w.write_all(text.as_bytes()))
}
