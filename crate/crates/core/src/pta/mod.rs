//! Andersen-style pointer analysis over a pointer flow graph, with an
//! on-the-fly call graph, pluggable context selectors, and plugin events.

mod context;
mod heap;
mod result;
mod solver;

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::ir::{FieldId, InvokeKind, MethodId, Program, SemType, VarId};
use crate::plugin::{NoPlugin, Plugin};

pub use context::{Context, ContextElem, ContextSelector, Receiver, Selector, Sensitivity};
pub use heap::{HeapModel, Obj, ObjId, StmtRef};
pub use result::{Metrics, PtaResult};
pub use solver::Solver;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PtaError {
    #[error("method `{0}` is not reachable")]
    Unreachable(String),
    #[error("invalid synthesized statement: {0}")]
    InvalidStmt(String),
    #[error("{0}")]
    BadOption(String),
}

macro_rules! id_type {
    ($($(#[$m:meta])* $name:ident),*) => {$(
        $(#[$m])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub struct $name(pub u32);

        impl $name {
            pub fn index(self) -> usize {
                self.0 as usize
            }
        }
    )*};
}

id_type!(ContextId, CsObjId, CsMethodId, PointerId);

/// A heap object qualified by its heap context.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CsObj {
    pub ctx: ContextId,
    pub obj: ObjId,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CsMethod {
    pub ctx: ContextId,
    pub method: MethodId,
}

/// Nodes of the pointer flow graph.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Pointer {
    Var { ctx: ContextId, method: MethodId, var: VarId },
    InstanceField { base: CsObjId, field: FieldId },
    ArrayIndex(CsObjId),
    StaticField(FieldId),
}

/// Objects reaching the target are kept only if their type is a subtype of
/// `filter`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PfgEdge {
    pub source: PointerId,
    pub target: PointerId,
    pub filter: Option<SemType>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CallEdge {
    pub kind: InvokeKind,
    pub caller: CsMethodId,
    pub site: StmtRef,
    pub callee: CsMethodId,
}

/// How many events of each kind the solver delivered.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EventTally {
    pub new_methods: usize,
    pub new_stmts: usize,
    pub new_points_to_sets: usize,
    pub new_call_edges: usize,
}

impl fmt::Display for EventTally {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "methods={} stmts={} points-to={} call-edges={}",
            self.new_methods, self.new_stmts, self.new_points_to_sets, self.new_call_edges
        )
    }
}

#[derive(Debug, Clone)]
pub struct PtaOptions {
    pub selector: Arc<dyn ContextSelector>,
    /// Class names whose allocations collapse into one object per type.
    pub merge_types: BTreeSet<String>,
    /// Filter copies into reference-typed variables by declared type.
    pub type_filter: bool,
    /// Worklist pops before the solver stops with a diagnostic.
    pub max_worklist_pops: usize,
}

impl Default for PtaOptions {
    fn default() -> Self {
        PtaOptions {
            selector: Arc::new(Selector::insensitive()),
            merge_types: BTreeSet::new(),
            type_filter: true,
            max_worklist_pops: 50_000_000,
        }
    }
}

impl PtaOptions {
    pub fn with_selector(selector: impl ContextSelector + 'static) -> Self {
        PtaOptions { selector: Arc::new(selector), ..Default::default() }
    }
}

/// Runs the analysis from the program's entry methods, notifying `plugin`.
pub fn solve(program: Arc<Program>, options: PtaOptions, plugin: &mut dyn Plugin) -> PtaResult {
    let mut solver = Solver::new(program, options);
    solver.run(plugin);
    solver.into_result()
}

/// [`solve`] without plugins.
pub fn solve_plain(program: Arc<Program>, options: PtaOptions) -> PtaResult {
    solve(program, options, &mut NoPlugin)
}
