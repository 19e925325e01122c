use std::collections::{BTreeSet, VecDeque};

use thiserror::Error;

use super::{builtin, ClassDecl, ClassId, FieldId, FieldRef, MethodId, MethodRef, Program, SemType};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HierarchyError {
    #[error("unknown class `{0}`")]
    UnknownClass(String),
    #[error("field `{0}.{1}` not found")]
    FieldNotFound(String, String),
    #[error("method `{0}.{1}` not found")]
    MethodNotFound(String, String),
    #[error("call to `{0}.{1}` is ambiguous")]
    Ambiguous(String, String),
    #[error("cannot dispatch `{method}` on receiver type `{receiver}`")]
    DispatchFailure { receiver: String, method: String },
}

/// Class-hierarchy queries over one [`Program`]: subtyping, method dispatch,
/// field resolution, and subclass enumeration.
#[derive(Clone, Copy)]
pub struct Hierarchy<'p> {
    program: &'p Program,
}

impl<'p> Hierarchy<'p> {
    pub(super) fn new(program: &'p Program) -> Self {
        Hierarchy { program }
    }

    pub fn program(&self) -> &'p Program {
        self.program
    }

    fn class(&self, name: &str) -> Result<&'p ClassDecl, HierarchyError> {
        self.program
            .class(name)
            .ok_or_else(|| HierarchyError::UnknownClass(name.to_string()))
    }

    /// The class itself followed by its superclasses, nearest first.
    pub fn superclass_chain(&self, name: &str) -> impl Iterator<Item = &'p ClassDecl> + 'p {
        let program = self.program;
        let mut next = program.class(name);
        std::iter::from_fn(move || {
            let cur = next?;
            next = cur.superclass.as_deref().and_then(|s| program.class(s));
            Some(cur)
        })
    }

    fn is_subclass(&self, sub: &str, sup: &str) -> bool {
        if sub == sup || sup == builtin::OBJECT {
            return true;
        }
        let Some(start) = self.program.class_id(sub) else { return false };
        let mut seen = vec![false; self.program.classes().len()];
        let mut queue = VecDeque::from([start]);
        while let Some(id) = queue.pop_front() {
            if std::mem::replace(&mut seen[id.index()], true) {
                continue;
            }
            let c = self.program.class_by_id(id);
            if c.name == sup {
                return true;
            }
            for s in c.superclass.iter().chain(c.interfaces.iter()) {
                if let Some(sid) = self.program.class_id(s) {
                    queue.push_back(sid);
                }
            }
        }
        false
    }

    /// Nominal subtyping with covariant arrays. `null` is below every
    /// reference type.
    pub fn is_subtype(&self, sub: &SemType, sup: &SemType) -> bool {
        match (sub, sup) {
            _ if sub == sup => true,
            (SemType::Null, t) => t.is_reference(),
            (SemType::Class(a), SemType::Class(b)) => self.is_subclass(a, b),
            (SemType::Array(_), SemType::Class(b)) => b == builtin::OBJECT,
            (SemType::Array(a), SemType::Array(b)) => {
                a.is_reference() && b.is_reference() && self.is_subtype(a, b)
            }
            _ => false,
        }
    }

    /// Virtual dispatch: the nearest concrete method matching `method` on the
    /// superclass chain of `receiver`.
    pub fn dispatch(&self, receiver: &str, method: &MethodRef) -> Result<MethodId, HierarchyError> {
        self.superclass_chain(receiver)
            .flat_map(|c| c.methods.iter().copied())
            .find(|m| {
                let sig = &self.program.method(*m).sig;
                !sig.is_abstract && !sig.is_static && sig.same_subsignature(&method.name, &method.params)
            })
            .ok_or_else(|| HierarchyError::DispatchFailure {
                receiver: receiver.to_string(),
                method: method.to_string(),
            })
    }

    /// Direct target of a static or special call: the nearest method with a
    /// body on the superclass chain of the referenced class.
    pub fn resolve_direct(&self, method: &MethodRef) -> Result<MethodId, HierarchyError> {
        self.superclass_chain(&method.class)
            .flat_map(|c| c.methods.iter().copied())
            .find(|m| {
                let decl = self.program.method(*m);
                decl.body.is_some() && decl.sig.same_subsignature(&method.name, &method.params)
            })
            .ok_or_else(|| HierarchyError::MethodNotFound(method.class.clone(), method.name.clone()))
    }

    /// Nearest declaration of `field` on the superclass chain of its class.
    pub fn resolve_field(&self, field: &FieldRef) -> Result<FieldId, HierarchyError> {
        self.class(&field.class)?;
        self.superclass_chain(&field.class)
            .flat_map(|c| c.fields.iter().copied())
            .find(|f| self.program.field(*f).name == field.name)
            .ok_or_else(|| HierarchyError::FieldNotFound(field.class.clone(), field.name.clone()))
    }

    /// Compile-time method lookup for a call with arguments of `arg_types`,
    /// searching the class, its superclasses, then its interfaces.
    pub fn lookup_method(&self, class: &str, name: &str, arg_types: &[SemType]) -> Result<MethodId, HierarchyError> {
        let start = self.class(class)?;
        let mut seen = vec![false; self.program.classes().len()];
        let mut queue = VecDeque::from([start.id]);
        while let Some(id) = queue.pop_front() {
            if std::mem::replace(&mut seen[id.index()], true) {
                continue;
            }
            let c = self.program.class_by_id(id);
            let matches: Vec<MethodId> = c
                .methods
                .iter()
                .copied()
                .filter(|m| {
                    let sig = &self.program.method(*m).sig;
                    sig.name == name
                        && sig.params.len() == arg_types.len()
                        && arg_types.iter().zip(&sig.params).all(|(a, p)| self.is_subtype(a, p))
                })
                .collect();
            match matches.len() {
                0 => {}
                1 => return Ok(matches[0]),
                _ => return Err(HierarchyError::Ambiguous(class.to_string(), name.to_string())),
            }
            for s in c.superclass.iter().chain(c.interfaces.iter()) {
                if let Some(sid) = self.program.class_id(s) {
                    queue.push_back(sid);
                }
            }
        }
        Err(HierarchyError::MethodNotFound(class.to_string(), name.to_string()))
    }

    /// All transitive subclasses and implementors of `class`, excluding itself.
    pub fn subclasses_of(&self, class: &str) -> BTreeSet<ClassId> {
        let mut out = BTreeSet::new();
        let Some(root) = self.program.class_id(class) else { return out };
        let mut stack = vec![root];
        while let Some(id) = stack.pop() {
            for &sub in self.program.direct_subtypes(id) {
                if out.insert(sub) {
                    stack.push(sub);
                }
            }
        }
        out.remove(&root);
        out
    }

    /// Whether `class` can be instantiated.
    pub fn is_concrete(&self, class: &str) -> bool {
        self.program
            .class(class)
            .is_some_and(|c| !c.is_interface && !c.is_abstract)
    }
}
