//! Plugins observe pointer-analysis events and may feed facts back through
//! the solver's API.

mod taint;
mod throw;
mod timer;

use crate::bitset::HybridSet;
use crate::pta::{CallEdge, CsMethodId, PointerId, Solver, StmtRef};

pub use taint::{
    parse_type, resolve_signature, taint_report, TaintConfig, TaintConfigError, TaintFlow, TaintPlugin, Transfer,
    TransferEnd, TAINT_DESCRIPTOR,
};
pub use throw::ThrowPlugin;
pub use timer::TimerPlugin;

/// Every callback defaults to a no-op. Callbacks run on the solver's thread
/// and change analysis state only through [`Solver`] methods.
pub trait Plugin {
    fn on_start(&mut self, _solver: &mut Solver) {}

    fn on_new_method(&mut self, _solver: &mut Solver, _method: CsMethodId) {}

    fn on_new_stmt(&mut self, _solver: &mut Solver, _stmt: StmtRef) {}

    /// `var` is always a context-qualified variable.
    fn on_new_points_to_set(&mut self, _solver: &mut Solver, _var: PointerId, _delta: &HybridSet) {}

    fn on_new_call_edge(&mut self, _solver: &mut Solver, _edge: &CallEdge) {}

    fn on_finish(&mut self, _solver: &mut Solver) {}
}

/// Ignores every event.
#[derive(Debug, Default, Clone, Copy)]
pub struct NoPlugin;

impl Plugin for NoPlugin {}

/// Forwards each event to its plugins in registration order.
#[derive(Default)]
pub struct CompositePlugin<'a> {
    plugins: Vec<&'a mut dyn Plugin>,
}

impl<'a> CompositePlugin<'a> {
    pub fn new() -> Self {
        CompositePlugin { plugins: Vec::new() }
    }

    pub fn add(&mut self, plugin: &'a mut dyn Plugin) -> &mut Self {
        self.plugins.push(plugin);
        self
    }

    pub fn len(&self) -> usize {
        self.plugins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.plugins.is_empty()
    }
}

impl Plugin for CompositePlugin<'_> {
    fn on_start(&mut self, solver: &mut Solver) {
        for p in &mut self.plugins {
            p.on_start(solver);
        }
    }

    fn on_new_method(&mut self, solver: &mut Solver, method: CsMethodId) {
        for p in &mut self.plugins {
            p.on_new_method(solver, method);
        }
    }

    fn on_new_stmt(&mut self, solver: &mut Solver, stmt: StmtRef) {
        for p in &mut self.plugins {
            p.on_new_stmt(solver, stmt);
        }
    }

    fn on_new_points_to_set(&mut self, solver: &mut Solver, var: PointerId, delta: &HybridSet) {
        for p in &mut self.plugins {
            p.on_new_points_to_set(solver, var, delta);
        }
    }

    fn on_new_call_edge(&mut self, solver: &mut Solver, edge: &CallEdge) {
        for p in &mut self.plugins {
            p.on_new_call_edge(solver, edge);
        }
    }

    fn on_finish(&mut self, solver: &mut Solver) {
        for p in &mut self.plugins {
            p.on_finish(solver);
        }
    }
}
