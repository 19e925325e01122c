use std::collections::{BTreeSet, HashMap};
use std::fmt;

use crate::bitset::ObjectIndexer;
use crate::ir::{MethodId, Program, SemType};

/// A statement position: `index` counts the method's parsed statements
/// first, then any synthesized ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StmtRef {
    pub method: MethodId,
    pub index: usize,
}

impl StmtRef {
    pub fn new(method: MethodId, index: usize) -> Self {
        StmtRef { method, index }
    }

    /// `Class.method@index`.
    pub fn describe(&self, program: &Program) -> String {
        let sig = &program.method(self.method).sig;
        format!("{}.{}@{}", sig.class, sig.name, self.index)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ObjId(pub u32);

impl ObjId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Abstract heap objects, in four categories.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Obj {
    /// One object per allocation site.
    New { site: StmtRef, ty: SemType },
    /// Interned per type and value; never carries a heap context.
    Constant { ty: SemType, value: String },
    /// Stands for every allocation of `ty`; members live in the heap model.
    Merged { ty: SemType },
    /// Synthesized by analyses, e.g. taint.
    Mock { descriptor: String, source: Option<StmtRef>, ty: SemType },
}

impl Obj {
    pub fn ty(&self) -> &SemType {
        match self {
            Obj::New { ty, .. } | Obj::Constant { ty, .. } | Obj::Merged { ty } | Obj::Mock { ty, .. } => ty,
        }
    }

    /// Constant and merged objects are shared by all contexts.
    pub fn is_context_free(&self) -> bool {
        matches!(self, Obj::Constant { .. } | Obj::Merged { .. })
    }

    pub fn is_mock(&self, descriptor: &str) -> bool {
        matches!(self, Obj::Mock { descriptor: d, .. } if d == descriptor)
    }

    /// The class whose code allocated this object, falling back to the
    /// object's own type when there is no allocation site.
    pub fn alloc_type(&self, program: &Program) -> SemType {
        match self {
            Obj::New { site, .. } => SemType::class(program.method(site.method).sig.class.clone()),
            other => other.ty().clone(),
        }
    }

    pub fn describe(&self, program: &Program) -> String {
        match self {
            Obj::New { site, ty } => format!("new {ty}@{}", site.describe(program)),
            Obj::Constant { value, .. } => format!("{value:?}"),
            Obj::Merged { ty } => format!("merged {ty}"),
            Obj::Mock { descriptor, source: Some(s), .. } => format!("{descriptor}@{}", s.describe(program)),
            Obj::Mock { descriptor, source: None, ty } => format!("{descriptor}:{ty}"),
        }
    }
}

impl fmt::Display for ObjId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "o{}", self.0)
    }
}

/// Creates and interns heap objects.
#[derive(Debug, Clone, Default)]
pub struct HeapModel {
    objs: ObjectIndexer<Obj>,
    merge_types: BTreeSet<String>,
    members: HashMap<ObjId, BTreeSet<ObjId>>,
}

impl HeapModel {
    /// Allocations of a type named in `merge_types` collapse into one
    /// merged object per type.
    pub fn new(merge_types: BTreeSet<String>) -> Self {
        HeapModel { merge_types, ..Default::default() }
    }

    fn intern(&mut self, obj: Obj) -> ObjId {
        ObjId(self.objs.index(&obj))
    }

    pub fn get_obj(&mut self, site: StmtRef, ty: &SemType) -> ObjId {
        let id = self.intern(Obj::New { site, ty: ty.clone() });
        match ty.class_name() {
            Some(name) if self.merge_types.contains(name) => self.get_merged_obj(ty, [id]),
            _ => id,
        }
    }

    pub fn get_constant_obj(&mut self, ty: &SemType, value: &str) -> ObjId {
        self.intern(Obj::Constant { ty: ty.clone(), value: value.to_string() })
    }

    pub fn get_merged_obj(&mut self, ty: &SemType, members: impl IntoIterator<Item = ObjId>) -> ObjId {
        let id = self.intern(Obj::Merged { ty: ty.clone() });
        self.members.entry(id).or_default().extend(members);
        id
    }

    pub fn get_mock_obj(&mut self, descriptor: &str, source: Option<StmtRef>, ty: &SemType) -> ObjId {
        assert!(!descriptor.is_empty(), "mock objects need a descriptor");
        self.intern(Obj::Mock { descriptor: descriptor.to_string(), source, ty: ty.clone() })
    }

    pub fn obj(&self, id: ObjId) -> &Obj {
        self.objs.object(id.0)
    }

    /// Origins of a merged object.
    pub fn merged_members(&self, id: ObjId) -> Option<&BTreeSet<ObjId>> {
        self.members.get(&id)
    }

    pub fn len(&self) -> usize {
        self.objs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.objs.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (ObjId, &Obj)> {
        self.objs.iter().map(|(i, o)| (ObjId(i), o))
    }
}
