use std::collections::{HashMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::io::read_json;
use crate::error::{Error, Result};

/// One learning scenario: a base run from scratch, or a transition applied
/// to the final agents of another scenario.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioNode {
    pub id: String,
    pub title: String,
    /// Config file, relative to the plan.
    pub config: String,
    /// Agent count at the end of the scenario.
    pub slices: usize,
    /// Scenario whose agents this one starts from; absent for base runs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub from: Option<String>,
    /// From-scratch scenario with the same final count, for comparison.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub compare_with: Option<String>,
}

/// Dependency map between base and incremental scenarios.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioPlan {
    pub scenarios: Vec<ScenarioNode>,
}

impl ScenarioPlan {
    pub fn load(path: &Path) -> Result<Self> {
        let plan: ScenarioPlan = read_json(path)?;
        plan.validate()?;
        Ok(plan)
    }

    pub fn get(&self, id: &str) -> Option<&ScenarioNode> {
        self.scenarios.iter().find(|s| s.id == id)
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen = HashSet::new();
        for s in &self.scenarios {
            if !seen.insert(s.id.as_str()) {
                return Err(Error::Config(format!("scenario id {:?} repeated", s.id)));
            }
        }
        for s in &self.scenarios {
            if let Some(parent) = &s.from {
                let p = self
                    .get(parent)
                    .ok_or_else(|| Error::Config(format!("{} starts from unknown scenario {parent:?}", s.id)))?;
                if p.slices == s.slices {
                    return Err(Error::Config(format!("{} does not change the slice count", s.id)));
                }
            }
            if let Some(other) = &s.compare_with {
                let o = self
                    .get(other)
                    .ok_or_else(|| Error::Config(format!("{} compares with unknown scenario {other:?}", s.id)))?;
                if o.from.is_some() || o.slices != s.slices {
                    return Err(Error::Config(format!(
                        "{} must compare with a base run of {} slices",
                        s.id, s.slices
                    )));
                }
            }
        }
        self.order().map(|_| ())
    }

    /// Scenario ids with every parent before its children.
    pub fn order(&self) -> Result<Vec<&str>> {
        let index: HashMap<&str, &ScenarioNode> = self.scenarios.iter().map(|s| (s.id.as_str(), s)).collect();
        let mut done: Vec<&str> = Vec::new();
        for s in &self.scenarios {
            let mut chain = vec![s.id.as_str()];
            let mut cur = s;
            while let Some(parent) = cur.from.as_deref() {
                if chain.contains(&parent) {
                    return Err(Error::Config(format!("scenario dependency cycle through {parent:?}")));
                }
                chain.push(parent);
                cur = index
                    .get(parent)
                    .ok_or_else(|| Error::Config(format!("unknown scenario {parent:?}")))?;
            }
            for id in chain.into_iter().rev() {
                if !done.contains(&id) {
                    done.push(id);
                }
            }
        }
        Ok(done)
    }
}
