//! Predictor variables of the takeover-time study and their admissible codes.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::Write;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::DatasetError;

/// Name of the column produced by merging the two time-budget variables.
pub const TIME_BUDGET: &str = "TBTC&TBTB";
/// Time budget to collision.
pub const TBTC: &str = "TBTC";
/// Time budget to a non-collision system boundary.
pub const TBTB: &str = "TBTB";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VariableKind {
    Binary,
    Ordinal,
    Continuous,
}

/// One encoded predictor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariableSpec {
    pub name: String,
    pub kind: VariableKind,
    /// Admissible integer codes in ascending order; empty for continuous variables.
    pub levels: Vec<i64>,
    pub unit: String,
}

impl VariableSpec {
    pub fn binary(name: &str, unit: &str) -> Self {
        Self { name: name.into(), kind: VariableKind::Binary, levels: alloc::vec![0, 1], unit: unit.into() }
    }

    pub fn ordinal(name: &str, first: i64, last: i64, unit: &str) -> Self {
        Self { name: name.into(), kind: VariableKind::Ordinal, levels: (first..=last).collect(), unit: unit.into() }
    }

    pub fn continuous(name: &str, unit: &str) -> Self {
        Self { name: name.into(), kind: VariableKind::Continuous, levels: Vec::new(), unit: unit.into() }
    }

    pub fn is_coded(&self) -> bool {
        self.kind != VariableKind::Continuous
    }

    /// Whether `value` is a legal present value for this variable.
    pub fn admits(&self, value: f64) -> bool {
        if !value.is_finite() {
            return false;
        }
        if !self.is_coded() {
            return true;
        }
        self.levels.iter().any(|&l| l as f64 == value)
    }

    fn check(&self) -> Result<(), DatasetError> {
        let bad = |reason: &str| DatasetError::InvalidLevels { variable: self.name.clone(), reason: reason.into() };
        match self.kind {
            VariableKind::Binary if self.levels != [0, 1] => Err(bad("binary variables must have levels {0, 1}")),
            VariableKind::Ordinal => {
                let first = *self.levels.first().ok_or_else(|| bad("ordinal variable without levels"))?;
                if first != 0 && first != 1 {
                    return Err(bad("ordinal levels must start at 0 or 1"));
                }
                if self.levels.len() < 2 || self.levels.windows(2).any(|w| w[1] != w[0] + 1) {
                    return Err(bad("ordinal levels must be contiguous"));
                }
                Ok(())
            }
            VariableKind::Continuous if !self.levels.is_empty() => Err(bad("continuous variables take no levels")),
            _ => Ok(()),
        }
    }
}

/// Checks level rules for every variable and that names are unique.
pub fn validate_schema(schema: &[VariableSpec]) -> Result<(), DatasetError> {
    for (i, v) in schema.iter().enumerate() {
        v.check()?;
        if schema[..i].iter().any(|w| w.name == v.name) {
            return Err(DatasetError::DuplicateVariable(v.name.clone()));
        }
    }
    Ok(())
}

/// Position of `name` in `schema`.
pub fn index_of(schema: &[VariableSpec], name: &str) -> Option<usize> {
    schema.iter().position(|v| v.name == name)
}

/// Short stable hash of names, kinds and levels, used to tie a model to the
/// schema it was trained on.
pub fn fingerprint(schema: &[VariableSpec]) -> String {
    let mut hasher = Sha256::new();
    for v in schema {
        let kind = match v.kind {
            VariableKind::Binary => "b",
            VariableKind::Ordinal => "o",
            VariableKind::Continuous => "c",
        };
        hasher.update(format!("{}|{}|{:?};", v.name, kind, v.levels).as_bytes());
    }
    let digest = hasher.finalize();
    let mut out = String::with_capacity(16);
    for byte in digest.iter().take(8) {
        let _ = write!(out, "{byte:02x}");
    }
    out
}

/// The eighteen study variables with time budgets kept as separate columns.
pub fn study_schema() -> Vec<VariableSpec> {
    alloc::vec![
        VariableSpec::continuous("AGE", "years"),
        VariableSpec::binary("LAD", "0 = L2; 1 = L3 and above"),
        VariableSpec::ordinal("SIM", 0, 2, "0 = low; 1 = medium; 2 = high fidelity"),
        VariableSpec::binary("TOR_V", "visual TOR: 0 = no; 1 = yes"),
        VariableSpec::binary("TOR_A", "auditory TOR: 0 = no; 1 = yes"),
        VariableSpec::binary("TOR_VT", "vibrotactile TOR: 0 = no; 1 = yes"),
        VariableSpec::binary("TOR_P", "TOR present: 0 = no; 1 = yes"),
        VariableSpec::binary("NDT_V", "visual NDT: 0 = no; 1 = yes"),
        VariableSpec::binary("NDT_A", "auditory NDT: 0 = no; 1 = yes"),
        VariableSpec::binary("NDT_M", "manual NDT: 0 = no; 1 = yes"),
        VariableSpec::binary("NDT_C", "0 = normal; 1 = high cognitive load"),
        VariableSpec::binary("HAND", "0 = hands-free; 1 = handheld"),
        VariableSpec::binary("NDT_P", "NDT present: 0 = no; 1 = yes"),
        VariableSpec::continuous(TBTC, "seconds"),
        VariableSpec::continuous(TBTB, "seconds"),
        VariableSpec::ordinal("URG", 0, 2, "0 = low (>15 s); 1 = medium (8-15 s); 2 = high (<=8 s)"),
        VariableSpec::ordinal("DRE", 1, 3, "1 = low; 2 = medium; 3 = high complexity"),
        VariableSpec::binary("IRU", "other road users: 0 = no; 1 = yes"),
    ]
}

/// The modelling schema: [`study_schema`] with the two time budgets merged
/// into a single [`TIME_BUDGET`] column at the position of `TBTC`.
pub fn merged_schema() -> Vec<VariableSpec> {
    let mut schema = study_schema();
    let at = index_of(&schema, TBTC).expect("study schema has TBTC");
    schema[at] = merged_time_budget();
    schema.retain(|v| v.name != TBTB);
    schema
}

pub(crate) fn merged_time_budget() -> VariableSpec {
    VariableSpec::continuous(TIME_BUDGET, "seconds")
}

/// Names of the variables, in schema order.
pub fn names(schema: &[VariableSpec]) -> Vec<String> {
    schema.iter().map(|v| v.name.to_string()).collect()
}
