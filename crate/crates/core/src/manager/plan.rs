use std::collections::HashSet;

use thiserror::Error;

use super::registry::{ConditionError, Options, Registry};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PlanError {
    #[error("unknown analysis `{0}`")]
    UnknownAnalysis(String),
    #[error("analysis `{id}` has no option `{key}`")]
    UnknownOption { id: String, key: String },
    #[error("dependency cycle: {}", .0.join(" -> "))]
    Cycle(Vec<String>),
    #[error("in `{id}`: {source}")]
    Condition { id: String, source: ConditionError },
    #[error("malformed analysis request `{0}`")]
    BadRequest(String),
}

/// A requested analysis with option overrides.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Request {
    pub id: String,
    pub overrides: Vec<(String, String)>,
}

impl Request {
    pub fn new(id: &str) -> Self {
        Request { id: id.to_string(), overrides: Vec::new() }
    }

    /// Parses `id` or `id=key:val;key:val`.
    pub fn parse(text: &str) -> Result<Request, PlanError> {
        let bad = || PlanError::BadRequest(text.to_string());
        let (id, rest) = match text.split_once('=') {
            Some((id, rest)) => (id.trim(), Some(rest)),
            None => (text.trim(), None),
        };
        if id.is_empty() {
            return Err(bad());
        }
        let mut overrides = Vec::new();
        for pair in rest.into_iter().flat_map(|r| r.split(';')).filter(|p| !p.trim().is_empty()) {
            let (k, v) = pair.split_once(':').ok_or_else(bad)?;
            let (k, v) = (k.trim(), v.trim());
            if k.is_empty() || v.is_empty() {
                return Err(bad());
            }
            overrides.push((k.to_string(), v.to_string()));
        }
        Ok(Request { id: id.to_string(), overrides })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlanEntry {
    pub id: String,
    pub options: Options,
}

/// Analyses in execution order, dependencies first.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Plan {
    pub entries: Vec<PlanEntry>,
}

impl Plan {
    pub fn ids(&self) -> Vec<&str> {
        self.entries.iter().map(|e| e.id.as_str()).collect()
    }

    pub fn options(&self, id: &str) -> Option<&Options> {
        self.entries.iter().find(|e| e.id == id).map(|e| &e.options)
    }
}

/// Resolves active dependencies of the requested analyses into a
/// topological order. Only explicitly requested analyses see overrides.
pub fn make_plan(registry: &Registry, requests: &[Request]) -> Result<Plan, PlanError> {
    let mut effective: Vec<(String, Options)> = Vec::new();
    for req in requests {
        let config = registry.get(&req.id).ok_or_else(|| PlanError::UnknownAnalysis(req.id.clone()))?;
        let idx = match effective.iter().position(|(id, _)| *id == req.id) {
            Some(i) => i,
            None => {
                effective.push((req.id.clone(), config.options.clone()));
                effective.len() - 1
            }
        };
        for (k, v) in &req.overrides {
            if !config.options.contains_key(k) {
                return Err(PlanError::UnknownOption { id: req.id.clone(), key: k.clone() });
            }
            effective[idx].1.insert(k.clone(), v.clone());
        }
    }
    let options_of = |id: &str| -> Options {
        effective
            .iter()
            .find(|(e, _)| e == id)
            .map(|(_, o)| o.clone())
            .unwrap_or_else(|| registry.get(id).map(|c| c.options.clone()).unwrap_or_default())
    };

    struct Walk<'a, F: Fn(&str) -> Options> {
        registry: &'a Registry,
        options_of: F,
        stack: Vec<String>,
        done: HashSet<String>,
        plan: Plan,
    }

    impl<F: Fn(&str) -> Options> Walk<'_, F> {
        fn visit(&mut self, id: &str) -> Result<(), PlanError> {
            if let Some(pos) = self.stack.iter().position(|s| s == id) {
                let mut cycle = self.stack[pos..].to_vec();
                cycle.push(id.to_string());
                return Err(PlanError::Cycle(cycle));
            }
            if self.done.contains(id) {
                return Ok(());
            }
            let config = self.registry.get(id).ok_or_else(|| PlanError::UnknownAnalysis(id.to_string()))?;
            let options = (self.options_of)(id);
            self.stack.push(id.to_string());
            for req in &config.requires {
                let active = match &req.condition {
                    None => true,
                    Some(c) => c
                        .evaluate(&options)
                        .map_err(|source| PlanError::Condition { id: id.to_string(), source })?,
                };
                if active {
                    self.visit(&req.id)?;
                }
            }
            self.stack.pop();
            self.done.insert(id.to_string());
            self.plan.entries.push(PlanEntry { id: id.to_string(), options });
            Ok(())
        }
    }

    let mut walk = Walk { registry, options_of, stack: Vec::new(), done: HashSet::new(), plan: Plan::default() };
    for req in requests {
        walk.visit(&req.id)?;
    }
    Ok(walk.plan)
}
