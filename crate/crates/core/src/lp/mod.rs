//! Linear programs in row form, and their assembly from an [`EnergySystemModel`].
//!
//! [`EnergySystemModel`]: crate::model::EnergySystemModel

mod assemble;
mod text;

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use assemble::{assemble, build_balance_rows, build_capacity_rows, build_gwp_rows, build_objective, ObjectiveSpec};
pub use text::write_lp;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum VarKind {
    /// Resource use `F_t(i, td, h)`.
    ResourceUse,
    /// Installed technology capacity `F(j)`.
    Capacity,
    /// Technology activity (main-output rate) per period.
    Activity,
    /// Installed storage energy capacity.
    StorageCapacity,
    StorageCharge,
    StorageDischarge,
    /// State of charge at the start of a period.
    StateOfCharge,
}

impl VarKind {
    pub fn tag(self) -> &'static str {
        match self {
            VarKind::ResourceUse => "use",
            VarKind::Capacity => "cap",
            VarKind::Activity => "act",
            VarKind::StorageCapacity => "scap",
            VarKind::StorageCharge => "sin",
            VarKind::StorageDischarge => "sout",
            VarKind::StateOfCharge => "soc",
        }
    }

    fn from_tag(tag: &str) -> Option<Self> {
        Some(match tag {
            "use" => VarKind::ResourceUse,
            "cap" => VarKind::Capacity,
            "act" => VarKind::Activity,
            "scap" => VarKind::StorageCapacity,
            "sin" => VarKind::StorageCharge,
            "sout" => VarKind::StorageDischarge,
            "soc" => VarKind::StateOfCharge,
            _ => return None,
        })
    }
}

/// Identity of an LP column: kind, entity name and optional period.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VarKey {
    pub kind: VarKind,
    pub entity: String,
    pub period: Option<usize>,
}

impl VarKey {
    pub fn new(kind: VarKind, entity: impl Into<String>, period: Option<usize>) -> Self {
        VarKey {
            kind,
            entity: entity.into(),
            period,
        }
    }
}

/// Renders as `kind:entity` or `kind:entity:period`.
impl fmt::Display for VarKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.period {
            Some(p) => write!(f, "{}:{}:{}", self.kind.tag(), self.entity, p),
            None => write!(f, "{}:{}", self.kind.tag(), self.entity),
        }
    }
}

impl std::str::FromStr for VarKey {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (tag, rest) = s.split_once(':').ok_or_else(|| format!("malformed variable `{s}`"))?;
        let kind = VarKind::from_tag(tag).ok_or_else(|| format!("unknown variable kind `{tag}`"))?;
        let (entity, period) = match rest.rsplit_once(':') {
            Some((e, p)) if p.chars().all(|c| c.is_ascii_digit()) && !p.is_empty() => (
                e.to_string(),
                Some(p.parse().map_err(|_| format!("bad period in `{s}`"))?),
            ),
            _ => (rest.to_string(), None),
        };
        Ok(VarKey { kind, entity, period })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

impl Relation {
    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Le => "<=",
            Relation::Eq => "=",
            Relation::Ge => ">=",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub name: String,
    /// Sparse coefficients `(column, value)`, sorted by column with no duplicates.
    pub coeffs: Vec<(usize, f64)>,
    pub relation: Relation,
    pub rhs: f64,
}

impl Row {
    /// Builds a row, merging duplicate columns and dropping zeros.
    pub fn new(name: impl Into<String>, mut coeffs: Vec<(usize, f64)>, relation: Relation, rhs: f64) -> Self {
        coeffs.sort_by_key(|&(c, _)| c);
        let mut merged: Vec<(usize, f64)> = Vec::with_capacity(coeffs.len());
        for (c, v) in coeffs {
            match merged.last_mut() {
                Some((last, acc)) if *last == c => *acc += v,
                _ => merged.push((c, v)),
            }
        }
        merged.retain(|&(_, v)| v != 0.0);
        Row {
            name: name.into(),
            coeffs: merged,
            relation,
            rhs,
        }
    }

    pub fn activity(&self, x: &[f64]) -> f64 {
        self.coeffs.iter().map(|&(c, v)| v * x[c]).sum()
    }

    /// Amount by which `x` violates the row (0 when satisfied).
    pub fn violation(&self, x: &[f64]) -> f64 {
        let a = self.activity(x);
        match self.relation {
            Relation::Le => (a - self.rhs).max(0.0),
            Relation::Ge => (self.rhs - a).max(0.0),
            Relation::Eq => (a - self.rhs).abs(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LpError {
    #[error("row `{row}` references column {column} but the problem has {num_vars} columns")]
    UnknownColumn {
        row: String,
        column: usize,
        num_vars: usize,
    },
    #[error("non-finite value in {0}")]
    NonFinite(String),
    #[error("lower bound above upper bound for `{0}`")]
    InvertedBounds(String),
    #[error("objective references unknown variable `{0}`")]
    UnknownObjectiveVariable(String),
    #[error("gwp_limit must be >= 0, got {0}")]
    NegativeGwpLimit(f64),
    #[error("duplicate variable `{0}`")]
    DuplicateVariable(String),
}

/// A minimization LP: `min c·x` subject to rows and column bounds.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LpProblem {
    pub objective: Vec<f64>,
    pub rows: Vec<Row>,
    /// Per-column `(lower, upper)`; infinities allowed.
    pub bounds: Vec<(f64, f64)>,
    pub vars: Vec<VarKey>,
    index: HashMap<VarKey, usize>,
}

impl LpProblem {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn add_var(&mut self, key: VarKey, lower: f64, upper: f64, cost: f64) -> Result<usize, LpError> {
        if self.index.contains_key(&key) {
            return Err(LpError::DuplicateVariable(key.to_string()));
        }
        let col = self.vars.len();
        self.index.insert(key.clone(), col);
        self.vars.push(key);
        self.bounds.push((lower, upper));
        self.objective.push(cost);
        Ok(col)
    }

    /// Adds an anonymous column named `x{n}`; handy for hand-written problems.
    pub fn add_column(&mut self, lower: f64, upper: f64, cost: f64) -> usize {
        let n = self.vars.len();
        self.add_var(
            VarKey::new(VarKind::Activity, format!("x{n}"), None),
            lower,
            upper,
            cost,
        )
        .expect("anonymous columns are unique")
    }

    pub fn add_row(&mut self, row: Row) {
        self.rows.push(row);
    }

    pub fn column(&self, key: &VarKey) -> Option<usize> {
        self.index.get(key).copied()
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    /// Checks structural well-formedness.
    pub fn check(&self) -> Result<(), LpError> {
        let n = self.num_vars();
        if self.objective.len() != n || self.bounds.len() != n {
            return Err(LpError::NonFinite("column vectors of unequal length".into()));
        }
        if let Some(j) = self.objective.iter().position(|c| !c.is_finite()) {
            return Err(LpError::NonFinite(format!("objective[{}]", self.vars[j])));
        }
        for (j, &(lo, hi)) in self.bounds.iter().enumerate() {
            if lo.is_nan() || hi.is_nan() || lo == f64::INFINITY || hi == f64::NEG_INFINITY {
                return Err(LpError::NonFinite(format!("bounds[{}]", self.vars[j])));
            }
            if lo > hi {
                return Err(LpError::InvertedBounds(self.vars[j].to_string()));
            }
        }
        for row in &self.rows {
            if !row.rhs.is_finite() {
                return Err(LpError::NonFinite(format!("rhs of `{}`", row.name)));
            }
            for &(c, v) in &row.coeffs {
                if c >= n {
                    return Err(LpError::UnknownColumn {
                        row: row.name.clone(),
                        column: c,
                        num_vars: n,
                    });
                }
                if !v.is_finite() {
                    return Err(LpError::NonFinite(format!("row `{}`", row.name)));
                }
            }
        }
        Ok(())
    }
}
