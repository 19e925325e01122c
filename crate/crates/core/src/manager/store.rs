use std::any::Any;
use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::ir::{ClassId, MethodId, Program};

pub type AnyResult = Arc<dyn Any + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Level {
    Program,
    Class,
    Method,
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Level::Program => "program",
            Level::Class => "class",
            Level::Method => "method",
        })
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ResultError {
    #[error("no `{id}` result for {level} {owner}")]
    Missing { id: String, level: Level, owner: String },
    #[error("`{id}` result for {owner} has a different type")]
    WrongType { id: String, owner: String },
}

/// Results attached to one program element, keyed by analysis id.
#[derive(Clone)]
pub struct Results {
    level: Level,
    owner: String,
    map: HashMap<String, AnyResult>,
}

impl Results {
    fn new(level: Level, owner: String) -> Self {
        Results { level, owner, map: HashMap::new() }
    }

    pub fn level(&self) -> Level {
        self.level
    }

    pub fn get_result<T: Any>(&self, id: &str) -> Result<&T, ResultError> {
        let any = self.map.get(id).ok_or_else(|| ResultError::Missing {
            id: id.to_string(),
            level: self.level,
            owner: self.owner.clone(),
        })?;
        any.downcast_ref::<T>()
            .ok_or_else(|| ResultError::WrongType { id: id.to_string(), owner: self.owner.clone() })
    }

    pub fn get_any(&self, id: &str) -> Option<&AnyResult> {
        self.map.get(id)
    }

    pub fn has(&self, id: &str) -> bool {
        self.map.contains_key(id)
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.map.keys().map(String::as_str)
    }

    pub(crate) fn insert(&mut self, id: &str, result: AnyResult) {
        self.map.insert(id.to_string(), result);
    }
}

impl fmt::Debug for Results {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut ids: Vec<_> = self.map.keys().collect();
        ids.sort();
        f.debug_struct("Results").field("level", &self.level).field("owner", &self.owner).field("ids", &ids).finish()
    }
}

/// Analysis results for one program, at program, class, and method level.
#[derive(Debug, Clone)]
pub struct ResultStore {
    program: Results,
    classes: Vec<Results>,
    methods: Vec<Results>,
}

impl ResultStore {
    pub fn new(program: &Program) -> Self {
        ResultStore {
            program: Results::new(Level::Program, "program".into()),
            classes: program.classes().iter().map(|c| Results::new(Level::Class, c.name.clone())).collect(),
            methods: program.methods().iter().map(|m| Results::new(Level::Method, m.sig.to_string())).collect(),
        }
    }

    pub fn program(&self) -> &Results {
        &self.program
    }

    pub fn class(&self, id: ClassId) -> &Results {
        &self.classes[id.index()]
    }

    pub fn method(&self, id: MethodId) -> &Results {
        &self.methods[id.index()]
    }

    pub fn program_mut(&mut self) -> &mut Results {
        &mut self.program
    }

    pub fn class_mut(&mut self, id: ClassId) -> &mut Results {
        &mut self.classes[id.index()]
    }

    pub fn method_mut(&mut self, id: MethodId) -> &mut Results {
        &mut self.methods[id.index()]
    }
}
