use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::loewner::SCHEMA_VERSION;

/// One pass/fail decision; `threshold` names an entry of the report parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: String,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub schema_version: u32,
    pub name: String,
    pub parameters: BTreeMap<String, Value>,
    pub records: Vec<Value>,
    pub summary: BTreeMap<String, Value>,
    pub checks: Vec<Check>,
    pub passed: bool,
}

impl ExperimentReport {
    pub fn new(name: &str) -> Self {
        ExperimentReport {
            schema_version: SCHEMA_VERSION,
            name: name.to_string(),
            parameters: BTreeMap::new(),
            records: Vec::new(),
            summary: BTreeMap::new(),
            checks: Vec::new(),
            passed: true,
        }
    }

    pub fn param(&mut self, key: &str, value: impl Serialize) {
        self.parameters.insert(key.to_string(), serde_json::to_value(value).unwrap_or(Value::Null));
    }

    pub fn summarize(&mut self, key: &str, value: impl Serialize) {
        self.summary.insert(key.to_string(), serde_json::to_value(value).unwrap_or(Value::Null));
    }

    pub fn check(&mut self, name: &str, value: f64, threshold: &str, passed: bool) {
        self.passed &= passed;
        self.checks.push(Check {
            name: name.to_string(),
            value,
            threshold: threshold.to_string(),
            passed,
        });
    }

    /// Every check must cite a declared parameter.
    pub fn validate(&self) -> Result<()> {
        match self.checks.iter().find(|c| !self.parameters.contains_key(&c.threshold)) {
            Some(c) => Err(Error::Precondition(format!("threshold {} is not a parameter", c.threshold))),
            None => Ok(()),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}
