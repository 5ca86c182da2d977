//! Uncertain parameters: addressable model fields with uniform ranges.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::GsaError;
use crate::model::ModelData;

/// Which kind of entity a parameter addresses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Entity {
    Resource,
    Technology,
    Storage,
    Demand,
    Share,
}

impl Entity {
    fn prefix(self) -> &'static str {
        match self {
            Entity::Resource => "resource",
            Entity::Technology => "tech",
            Entity::Storage => "storage",
            Entity::Demand => "demand",
            Entity::Share => "share",
        }
    }
}

/// Field name per entity kind.
const FIELDS: &[(Entity, &[&str])] = &[
    (Entity::Resource, &["e_op", "gwp_op", "avail"]),
    (Entity::Technology, &["e_constr", "gwp_constr", "f_min", "f_max", "cpt"]),
    (Entity::Storage, &["e_constr", "gwp_constr", "f_max"]),
    (Entity::Demand, &["annual"]),
    (Entity::Share, &["fraction"]),
];

/// `entity.name.field`, e.g. `resource.NG.e_op`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct ParamPath {
    pub entity: Entity,
    pub name: String,
    pub field: String,
}

impl fmt::Display for ParamPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}.{}", self.entity.prefix(), self.name, self.field)
    }
}

impl FromStr for ParamPath {
    type Err = GsaError;

    fn from_str(s: &str) -> Result<Self, GsaError> {
        let bad = || GsaError::BadPath(s.to_string());
        let (prefix, rest) = s.split_once('.').ok_or_else(bad)?;
        let (name, field) = rest.rsplit_once('.').ok_or_else(bad)?;
        let entity = FIELDS
            .iter()
            .map(|(e, _)| *e)
            .find(|e| e.prefix() == prefix)
            .ok_or_else(bad)?;
        let known = FIELDS
            .iter()
            .find(|(e, _)| *e == entity)
            .map(|(_, f)| *f)
            .unwrap_or(&[]);
        if name.is_empty() || !known.contains(&field) {
            return Err(bad());
        }
        Ok(ParamPath {
            entity,
            name: name.to_string(),
            field: field.to_string(),
        })
    }
}

impl TryFrom<String> for ParamPath {
    type Error = GsaError;

    fn try_from(s: String) -> Result<Self, GsaError> {
        s.parse()
    }
}

impl From<ParamPath> for String {
    fn from(p: ParamPath) -> String {
        p.to_string()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ParamKind {
    /// Sampled `x` multiplies the nominal value by `1 + x`.
    Relative,
    /// Sampled `x` replaces the nominal value.
    Absolute,
}

impl FromStr for ParamKind {
    type Err = GsaError;

    fn from_str(s: &str) -> Result<Self, GsaError> {
        match s.trim() {
            "relative" => Ok(ParamKind::Relative),
            "absolute" => Ok(ParamKind::Absolute),
            other => Err(GsaError::BadKind(other.to_string())),
        }
    }
}

impl fmt::Display for ParamKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ParamKind::Relative => "relative",
            ParamKind::Absolute => "absolute",
        })
    }
}

/// A uniformly distributed input `x ~ U[lo, hi]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UncertainParameter {
    pub path: ParamPath,
    pub kind: ParamKind,
    pub lo: f64,
    pub hi: f64,
}

impl UncertainParameter {
    pub fn new(path: &str, kind: ParamKind, lo: f64, hi: f64) -> Result<Self, GsaError> {
        let p = UncertainParameter {
            path: path.parse()?,
            kind,
            lo,
            hi,
        };
        p.check_range()?;
        Ok(p)
    }

    /// `±fraction` around the nominal value.
    pub fn relative(path: &str, fraction: f64) -> Result<Self, GsaError> {
        Self::new(path, ParamKind::Relative, -fraction, fraction)
    }

    /// Requires finite `lo <= hi`; equal bounds pin the parameter.
    pub fn check_range(&self) -> Result<(), GsaError> {
        if !(self.lo.is_finite() && self.hi.is_finite() && self.lo <= self.hi) {
            return Err(GsaError::BadRange {
                path: self.path.to_string(),
                lo: self.lo,
                hi: self.hi,
            });
        }
        if self.kind == ParamKind::Relative && self.lo <= -1.0 {
            return Err(GsaError::BadRange {
                path: self.path.to_string(),
                lo: self.lo,
                hi: self.hi,
            });
        }
        Ok(())
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    /// Writes `x` into `data` according to the parameter's kind.
    pub fn apply(&self, data: &mut ModelData, x: f64) -> Result<(), GsaError> {
        let missing = || GsaError::UnknownTarget(self.path.to_string());
        let set = |slot: &mut f64| -> Result<(), GsaError> {
            *slot = match self.kind {
                ParamKind::Absolute => x,
                ParamKind::Relative if slot.is_finite() => *slot * (1.0 + x),
                ParamKind::Relative => return Err(GsaError::NoNominal(self.path.to_string())),
            };
            Ok(())
        };
        let name = &self.path.name;
        match (self.path.entity, self.path.field.as_str()) {
            (Entity::Resource, field) => {
                let r = data
                    .resources
                    .iter_mut()
                    .find(|r| &r.name == name)
                    .ok_or_else(missing)?;
                match field {
                    "e_op" => set(&mut r.e_op),
                    "gwp_op" => set(&mut r.gwp_op),
                    _ => {
                        let mut v = r.avail.unwrap_or(f64::INFINITY);
                        set(&mut v)?;
                        r.avail = Some(v);
                        Ok(())
                    }
                }
            }
            (Entity::Technology, field) => {
                let t = data
                    .technologies
                    .iter_mut()
                    .find(|t| &t.name == name)
                    .ok_or_else(missing)?;
                match field {
                    "e_constr" => set(&mut t.e_constr),
                    "gwp_constr" => set(&mut t.gwp_constr),
                    "f_min" => set(&mut t.f_min),
                    "f_max" => set(&mut t.f_max),
                    _ => {
                        let cpt = t
                            .cpt
                            .as_mut()
                            .ok_or_else(|| GsaError::NoNominal(self.path.to_string()))?;
                        if self.kind == ParamKind::Absolute {
                            return Err(GsaError::BadKind("absolute cpt".into()));
                        }
                        for v in cpt.iter_mut() {
                            *v = (*v * (1.0 + x)).clamp(0.0, 1.0);
                        }
                        Ok(())
                    }
                }
            }
            (Entity::Storage, field) => {
                let s = data.storages.iter_mut().find(|s| &s.name == name).ok_or_else(missing)?;
                match field {
                    "e_constr" => set(&mut s.e_constr),
                    "gwp_constr" => set(&mut s.gwp_constr),
                    _ => set(&mut s.f_max),
                }
            }
            (Entity::Demand, _) => {
                let d = data.demands.iter_mut().find(|d| &d.name == name).ok_or_else(missing)?;
                set(&mut d.annual)
            }
            (Entity::Share, _) => {
                let s = data.shares.iter_mut().find(|s| &s.name == name).ok_or_else(missing)?;
                set(&mut s.fraction)
            }
        }
    }
}
