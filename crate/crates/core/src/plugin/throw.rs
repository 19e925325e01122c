use std::collections::BTreeSet;

use super::Plugin;
use crate::bitset::{BitSetOps, HybridSet};
use crate::ir::Stmt;
use crate::pta::{CsObjId, ObjId, Pointer, PointerId, Solver, StmtRef};

/// Moves thrown objects into the catch variable of the innermost matching
/// local handler. Objects with no local handler are recorded as escaping.
#[derive(Debug, Clone, Default)]
pub struct ThrowPlugin {
    escaping: BTreeSet<(StmtRef, ObjId)>,
    caught: BTreeSet<(StmtRef, ObjId)>,
}

impl ThrowPlugin {
    pub fn new() -> Self {
        Self::default()
    }

    /// (throw site, object) pairs that leave their method.
    pub fn escaping(&self) -> &BTreeSet<(StmtRef, ObjId)> {
        &self.escaping
    }

    /// (throw site, object) pairs caught within their method.
    pub fn caught(&self) -> &BTreeSet<(StmtRef, ObjId)> {
        &self.caught
    }
}

impl Plugin for ThrowPlugin {
    fn on_new_points_to_set(&mut self, solver: &mut Solver, var: PointerId, delta: &HybridSet) {
        let Pointer::Var { ctx, method, var } = solver.pointer(var).clone() else { return };
        let program = std::sync::Arc::clone(solver.program());
        let Some(body) = program.body(method) else { return };
        let h = program.hierarchy();
        for &i in &body.relevant_stmts(var).throws {
            let mut handlers: Vec<(usize, usize)> = body
                .exception_table
                .iter()
                .enumerate()
                .filter(|(_, e)| e.covers(i))
                .map(|(k, e)| (e.end - e.start, k))
                .collect();
            handlers.sort();
            for o in delta.iter().map(CsObjId) {
                let obj = solver.cs_obj_data(o).obj;
                let ty = solver.heap().obj(obj).ty().clone();
                let site = StmtRef::new(method, i);
                let handler = handlers
                    .iter()
                    .map(|(_, k)| &body.exception_table[*k])
                    .find(|e| h.is_subtype(&ty, &e.catch_type));
                match handler.map(|e| &body.stmts[e.handler]) {
                    Some(Stmt::Catch { lhs }) => {
                        self.caught.insert((site, obj));
                        let p = solver.var_pointer(ctx, method, *lhs);
                        solver.add_points_to(p, [o]);
                    }
                    _ => {
                        self.escaping.insert((site, obj));
                    }
                }
            }
        }
    }
}
