//! `summary.json` and CSV artifacts.

use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = "==")]
    Eq,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::Le => "<=",
            Relation::Lt => "<",
            Relation::Ge => ">=",
            Relation::Eq => "==",
        })
    }
}

/// One measured quantity against its threshold, tagged with the acceptance
/// criterion it belongs to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub id: String,
    pub name: String,
    pub value: Option<f64>,
    pub relation: Relation,
    pub threshold: f64,
    pub pass: bool,
}

impl Check {
    pub fn new(id: &str, name: impl Into<String>, value: f64, relation: Relation, threshold: f64) -> Self {
        let pass = value.is_finite()
            && match relation {
                Relation::Le => value <= threshold,
                Relation::Lt => value < threshold,
                Relation::Ge => value >= threshold,
                Relation::Eq => value == threshold,
            };
        Self { id: id.into(), name: name.into(), value: value.is_finite().then_some(value), relation, threshold, pass }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let value = self.value.map_or_else(|| "n/a".to_string(), |v| format!("{v:.6e}"));
        write!(
            f,
            "{} {} {}: {} {} {:.6e}",
            if self.pass { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            value,
            self.relation,
            self.threshold
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub experiment: String,
    pub passed: bool,
    pub checks: Vec<Check>,
    pub outputs: Vec<String>,
    pub info: Map<String, Value>,
}

impl Summary {
    pub fn new(experiment: &str) -> Self {
        Self { experiment: experiment.into(), passed: true, checks: Vec::new(), outputs: Vec::new(), info: Map::new() }
    }

    pub fn check(&mut self, c: Check) {
        self.passed &= c.pass;
        self.checks.push(c);
    }

    pub fn info(&mut self, key: &str, value: impl Into<Value>) {
        self.info.insert(key.into(), value.into());
    }

    /// Checks whose id is `id`.
    pub fn checks_for<'a>(&'a self, id: &'a str) -> impl Iterator<Item = &'a Check> + 'a {
        self.checks.iter().filter(move |c| c.id == id)
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::write(dir.join("summary.json"), serde_json::to_string_pretty(self)? + "\n")?;
        Ok(())
    }
}

/// Writes a numeric table with a header row.
pub fn write_csv<I, R>(dir: &Path, name: &str, header: &[&str], rows: I, summary: &mut Summary) -> Result<()>
where
    I: IntoIterator<Item = R>,
    R: AsRef<[f64]>,
{
    let mut w = csv::Writer::from_path(dir.join(name))?;
    w.write_record(header)?;
    for row in rows {
        w.write_record(row.as_ref().iter().map(|v| v.to_string()))?;
    }
    w.flush()?;
    summary.outputs.push(name.into());
    Ok(())
}
