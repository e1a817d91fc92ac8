//! Frozen reference values.
//!
//! A golden file is a JSON array of [`GoldenValue`] records. Values are
//! produced by the independent oracle and checked against the main code
//! with the stored tolerance.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GoldenData {
    Scalar(f64),
    Vector(Vec<f64>),
}

impl GoldenData {
    pub fn as_slice(&self) -> &[f64] {
        match self {
            GoldenData::Scalar(x) => std::slice::from_ref(x),
            GoldenData::Vector(v) => v,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoldenValue {
    pub name: String,
    /// Content hash of the lattice parameters the value belongs to.
    pub spec_hash: String,
    pub value: GoldenData,
    /// Maximum absolute deviation accepted.
    pub tolerance: f64,
    /// How the value was obtained, e.g. `"oracle: dense diagonalization"`.
    pub provenance: String,
}

impl GoldenValue {
    pub fn scalar(name: &str, spec_hash: &str, value: f64, tolerance: f64, provenance: &str) -> Self {
        GoldenValue {
            name: name.into(),
            spec_hash: spec_hash.into(),
            value: GoldenData::Scalar(value),
            tolerance,
            provenance: provenance.into(),
        }
    }

    pub fn vector(name: &str, spec_hash: &str, value: Vec<f64>, tolerance: f64, provenance: &str) -> Self {
        GoldenValue {
            name: name.into(),
            spec_hash: spec_hash.into(),
            value: GoldenData::Vector(value),
            tolerance,
            provenance: provenance.into(),
        }
    }

    /// Largest absolute deviation of `actual` from the stored value.
    pub fn deviation(&self, actual: &[f64]) -> Result<f64> {
        let expected = self.value.as_slice();
        if expected.len() != actual.len() {
            return Err(Error::Dimension { expected: expected.len(), got: actual.len() });
        }
        Ok(expected.iter().zip(actual).fold(0.0f64, |m, (e, a)| m.max((e - a).abs())))
    }

    pub fn matches(&self, actual: &[f64]) -> Result<bool> {
        Ok(self.deviation(actual)? <= self.tolerance)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct GoldenSet {
    pub values: Vec<GoldenValue>,
}

impl GoldenSet {
    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&fs::read_to_string(path)?)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let values = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        Ok(GoldenSet { values })
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.values).expect("golden values serialize");
        s.push('\n');
        s
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn get(&self, name: &str) -> Result<&GoldenValue> {
        self.values
            .iter()
            .find(|v| v.name == name)
            .ok_or_else(|| Error::Format(format!("no golden value named {name:?}")))
    }

    pub fn push(&mut self, v: GoldenValue) {
        self.values.retain(|old| old.name != v.name);
        self.values.push(v);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let mut set = GoldenSet::default();
        set.push(GoldenValue::scalar("e0", "abc", -1.5, 1e-10, "analytic"));
        set.push(GoldenValue::vector("pops", "abc", vec![0.5, 0.5], 1e-12, "analytic"));
        let back = GoldenSet::parse(&set.to_json()).unwrap();
        assert_eq!(back, set);
        assert!(back.get("e0").unwrap().matches(&[-1.5 + 1e-11]).unwrap());
        assert!(!back.get("pops").unwrap().matches(&[0.5, 0.6]).unwrap());
        assert!(back.get("missing").is_err());
    }
}
