use std::fmt;

use indexmap::IndexMap;
use serde::Deserialize;
use thiserror::Error;

/// Option name to value, in declaration order.
pub type Options = IndexMap<String, String>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RegistryError {
    #[error("registry: {0}")]
    Syntax(String),
    #[error("duplicate analysis id `{0}`")]
    DuplicateId(String),
    #[error("analysis `{analysis}` requires unknown analysis `{required}`")]
    UnknownRequirement { analysis: String, required: String },
    #[error("condition in `{analysis}` uses undeclared option `{key}`")]
    UndeclaredOption { analysis: String, key: String },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("condition refers to unknown option `{0}`")]
pub struct ConditionError(pub String);

/// Conjunction of clauses `key=v1|v2`, written joined by `&`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Condition {
    pub clauses: Vec<(String, Vec<String>)>,
}

impl Condition {
    pub fn parse(text: &str) -> Result<Condition, String> {
        let mut clauses = Vec::new();
        for clause in text.split('&') {
            let (key, values) = clause
                .split_once('=')
                .ok_or_else(|| format!("condition clause `{}` lacks `=`", clause.trim()))?;
            let key = key.trim();
            let values: Vec<String> = values.split('|').map(|v| v.trim().to_string()).collect();
            if key.is_empty() || values.iter().any(String::is_empty) {
                return Err(format!("malformed condition clause `{}`", clause.trim()));
            }
            clauses.push((key.to_string(), values));
        }
        Ok(Condition { clauses })
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.clauses.iter().map(|(k, _)| k.as_str())
    }

    pub fn evaluate(&self, options: &Options) -> Result<bool, ConditionError> {
        for (key, accepted) in &self.clauses {
            let value = options.get(key).ok_or_else(|| ConditionError(key.clone()))?;
            if !accepted.contains(value) {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.clauses.iter().map(|(k, vs)| format!("{k}={}", vs.join("|"))).collect();
        f.write_str(&parts.join("&"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Requirement {
    pub id: String,
    /// The dependency is active only when this holds for the dependent's
    /// effective options.
    pub condition: Option<Condition>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AnalysisConfig {
    pub id: String,
    pub description: String,
    /// Informational only; analyses are looked up by id.
    pub analysis_class: String,
    pub requires: Vec<Requirement>,
    pub options: Options,
}

/// Validated analysis configurations in file order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Registry {
    configs: IndexMap<String, AnalysisConfig>,
}

impl Registry {
    pub fn get(&self, id: &str) -> Option<&AnalysisConfig> {
        self.configs.get(id)
    }

    pub fn iter(&self) -> impl Iterator<Item = &AnalysisConfig> {
        self.configs.values()
    }

    pub fn len(&self) -> usize {
        self.configs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.configs.is_empty()
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEntry {
    #[serde(default)]
    description: String,
    #[serde(default, rename = "analysisClass")]
    analysis_class: String,
    id: String,
    #[serde(default)]
    requires: Vec<String>,
    #[serde(default)]
    options: Option<IndexMap<String, serde_yaml::Value>>,
}

fn syntax(e: serde_yaml::Error) -> RegistryError {
    RegistryError::Syntax(e.to_string())
}

fn scalar(id: &str, key: &str, value: serde_yaml::Value) -> Result<String, RegistryError> {
    use serde_yaml::Value;
    Ok(match value {
        Value::Null => "null".to_string(),
        Value::Bool(b) => b.to_string(),
        Value::Number(n) => n.to_string(),
        Value::String(s) => s,
        _ => {
            return Err(RegistryError::Syntax(format!("option `{key}` of `{id}` must be a scalar")))
        }
    })
}

fn requirement(id: &str, item: &str) -> Result<Requirement, RegistryError> {
    let bad = |message: String| RegistryError::Syntax(format!("in `{id}`: {message}"));
    match item.split_once('(') {
        None => Ok(Requirement { id: item.trim().to_string(), condition: None }),
        Some((dep, rest)) => {
            let cond = rest.trim_end().strip_suffix(')').ok_or_else(|| bad(format!("unclosed condition in `{item}`")))?;
            let condition = Condition::parse(cond).map_err(bad)?;
            Ok(Requirement { id: dep.trim().to_string(), condition: Some(condition) })
        }
    }
}

/// Parses a YAML list of entries, each with `description`, `analysisClass`,
/// `id`, `requires: [ dep, dep(k=v1|v2) ]`, and an `options` map of scalars.
pub fn parse_registry(text: &str) -> Result<Registry, RegistryError> {
    let raw: Option<Vec<RawEntry>> = serde_yaml::from_str(text).map_err(syntax)?;
    let mut registry = Registry::default();
    for entry in raw.unwrap_or_default() {
        if entry.id.trim().is_empty() {
            return Err(RegistryError::Syntax("entry with an empty `id`".into()));
        }
        let options = entry
            .options
            .unwrap_or_default()
            .into_iter()
            .map(|(k, v)| Ok((k.clone(), scalar(&entry.id, &k, v)?)))
            .collect::<Result<Options, RegistryError>>()?;
        let requires =
            entry.requires.iter().map(|r| requirement(&entry.id, r)).collect::<Result<Vec<_>, _>>()?;
        let config = AnalysisConfig {
            id: entry.id.clone(),
            description: entry.description,
            analysis_class: entry.analysis_class,
            requires,
            options,
        };
        if registry.configs.insert(entry.id.clone(), config).is_some() {
            return Err(RegistryError::DuplicateId(entry.id));
        }
    }
    for config in registry.configs.values() {
        for req in &config.requires {
            if !registry.configs.contains_key(&req.id) {
                return Err(RegistryError::UnknownRequirement { analysis: config.id.clone(), required: req.id.clone() });
            }
            for key in req.condition.iter().flat_map(Condition::keys) {
                if !config.options.contains_key(key) {
                    return Err(RegistryError::UndeclaredOption { analysis: config.id.clone(), key: key.to_string() });
                }
            }
        }
    }
    Ok(registry)
}

/// The registry of built-in analyses.
pub const DEFAULT_REGISTRY: &str = "\
- description: throw analysis
  analysisClass: flowscope::cfg::throw_analysis
  id: throw

- description: intraprocedural control-flow graph
  analysisClass: flowscope::cfg::build_cfg
  id: cfg
  requires: [ throw(exception=explicit|all) ]
  options: # default values
    exception: explicit # | null | all
    dump: false # dump .dot files

- description: constant propagation
  analysisClass: flowscope::dataflow::ConstantPropagation
  id: constprop
  requires: [ cfg ]
  options:
    refine: false # narrow values on equality branches
    dump: false

- description: live variables
  analysisClass: flowscope::dataflow::LiveVariables
  id: livevar
  requires: [ cfg ]
  options:
    dump: false

- description: pointer analysis
  analysisClass: flowscope::pta::solve
  id: pta
  requires: []
  options:
    cs: ci # | <k>-call | <k>-obj | <k>-type
    heap: default # heap context length; default is k - 1
    merge-types: none # comma-separated type names
    type-filter: true
    dump: false

- description: taint analysis
  analysisClass: flowscope::plugin::TaintPlugin
  id: taint
  requires: [ pta ]
  options:
    config: null # path to a taint config file
";
