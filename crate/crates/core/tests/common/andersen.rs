//! Brute-force context-insensitive Andersen analysis: sweep every statement
//! of every reachable method until nothing changes.

use std::collections::{BTreeMap, BTreeSet};

use flowscope::ir::{
    builtin, FieldId, FieldRef, Invoke, InvokeKind, Literal, MethodId, Program, SemType, Stmt, VarId,
};
use flowscope::pta::{Obj, PtaResult, StmtRef};

/// An abstract object named by what created it.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum OKey {
    Site(MethodId, usize),
    Str(String),
}

#[derive(Debug, Default, PartialEq, Eq)]
pub struct Andersen {
    pub pts: BTreeMap<(MethodId, VarId), BTreeSet<OKey>>,
    pub reachable: BTreeSet<MethodId>,
    pub calls: BTreeSet<(StmtRef, MethodId)>,
}

struct State<'p> {
    program: &'p Program,
    types: BTreeMap<OKey, SemType>,
    vars: BTreeMap<(MethodId, VarId), BTreeSet<OKey>>,
    fields: BTreeMap<(OKey, FieldId), BTreeSet<OKey>>,
    arrays: BTreeMap<OKey, BTreeSet<OKey>>,
    statics: BTreeMap<FieldId, BTreeSet<OKey>>,
    reachable: BTreeSet<MethodId>,
    calls: BTreeSet<(StmtRef, MethodId)>,
    changed: bool,
}

fn union(target: &mut BTreeSet<OKey>, src: impl IntoIterator<Item = OKey>) -> bool {
    let before = target.len();
    target.extend(src);
    target.len() != before
}

impl State<'_> {
    fn var(&self, m: MethodId, v: VarId) -> BTreeSet<OKey> {
        self.vars.get(&(m, v)).cloned().unwrap_or_default()
    }

    fn flow_var(&mut self, m: MethodId, v: VarId, objs: BTreeSet<OKey>, filter: Option<&SemType>) {
        let h = self.program.hierarchy();
        let objs: Vec<OKey> = objs.into_iter().filter(|o| filter.is_none_or(|t| h.is_subtype(&self.types[o], t))).collect();
        self.changed |= union(self.vars.entry((m, v)).or_default(), objs);
    }

    fn field_id(&self, f: &FieldRef) -> FieldId {
        self.program.hierarchy().resolve_field(f).expect("corpus fields resolve")
    }

    fn call(&mut self, caller: MethodId, index: usize, inv: &Invoke, callee: MethodId, recv: Option<OKey>) {
        self.changed |= self.calls.insert((StmtRef::new(caller, index), callee));
        self.changed |= self.reachable.insert(callee);
        let Some(body) = self.program.body(callee) else { return };
        for (a, p) in inv.args.iter().zip(&body.params) {
            let objs = self.var(caller, *a);
            self.flow_var(callee, *p, objs, None);
        }
        if let (Some(r), Some(this)) = (recv, body.this_var) {
            self.flow_var(callee, this, [r].into(), None);
        }
        if let Some(res) = inv.result {
            for rv in body.return_vars() {
                let objs = self.var(callee, rv);
                self.flow_var(caller, res, objs, None);
            }
        }
    }

    fn stmt(&mut self, m: MethodId, index: usize, stmt: &Stmt, var_type: impl Fn(VarId) -> SemType) {
        match stmt {
            Stmt::New { lhs, ty, .. } => {
                let key = OKey::Site(m, index);
                self.types.insert(key.clone(), ty.clone());
                self.flow_var(m, *lhs, [key].into(), None);
            }
            Stmt::AssignLiteral { lhs, value: Literal::Str(s) } => {
                let key = OKey::Str(s.clone());
                self.types.insert(key.clone(), SemType::class(builtin::STRING));
                self.flow_var(m, *lhs, [key].into(), None);
            }
            Stmt::Copy { lhs, rhs } => {
                let ty = var_type(*lhs);
                let objs = self.var(m, *rhs);
                self.flow_var(m, *lhs, objs, ty.is_reference().then_some(&ty));
            }
            Stmt::Cast { lhs, ty, rhs } => {
                let objs = self.var(m, *rhs);
                self.flow_var(m, *lhs, objs, Some(ty));
            }
            Stmt::LoadField { lhs, base, field } => {
                let f = self.field_id(field);
                let objs: BTreeSet<OKey> = match base {
                    None => self.statics.get(&f).cloned().unwrap_or_default(),
                    Some(b) => self
                        .var(m, *b)
                        .into_iter()
                        .flat_map(|o| self.fields.get(&(o, f)).cloned().unwrap_or_default())
                        .collect(),
                };
                self.flow_var(m, *lhs, objs, None);
            }
            Stmt::StoreField { base, field, rhs } => {
                let f = self.field_id(field);
                let objs = self.var(m, *rhs);
                match base {
                    None => self.changed |= union(self.statics.entry(f).or_default(), objs),
                    Some(b) => {
                        for o in self.var(m, *b) {
                            self.changed |= union(self.fields.entry((o, f)).or_default(), objs.clone());
                        }
                    }
                }
            }
            Stmt::LoadArray { lhs, base } => {
                let objs: BTreeSet<OKey> = self
                    .var(m, *base)
                    .into_iter()
                    .flat_map(|o| self.arrays.get(&o).cloned().unwrap_or_default())
                    .collect();
                self.flow_var(m, *lhs, objs, None);
            }
            Stmt::StoreArray { base, rhs } => {
                let objs = self.var(m, *rhs);
                for o in self.var(m, *base) {
                    self.changed |= union(self.arrays.entry(o).or_default(), objs.clone());
                }
            }
            Stmt::Invoke(inv) => {
                let h = self.program.hierarchy();
                match (inv.kind, inv.base) {
                    (InvokeKind::Static, _) | (_, None) => {
                        let callee = h.resolve_direct(&inv.method).expect("static target");
                        self.call(m, index, inv, callee, None);
                    }
                    (kind, Some(b)) => {
                        for o in self.var(m, b) {
                            let callee = if kind == InvokeKind::Virtual {
                                let class = self.types[&o].class_name().unwrap_or(builtin::OBJECT).to_string();
                                h.dispatch(&class, &inv.method)
                            } else {
                                h.resolve_direct(&inv.method)
                            };
                            if let Ok(callee) = callee {
                                self.call(m, index, inv, callee, Some(o));
                            }
                        }
                    }
                }
            }
            _ => {}
        }
    }
}

pub fn andersen(program: &Program) -> Andersen {
    let mut s = State {
        program,
        types: BTreeMap::new(),
        vars: BTreeMap::new(),
        fields: BTreeMap::new(),
        arrays: BTreeMap::new(),
        statics: BTreeMap::new(),
        reachable: program.entry_methods().iter().copied().collect(),
        calls: BTreeSet::new(),
        changed: true,
    };
    while s.changed {
        s.changed = false;
        for m in s.reachable.clone() {
            let Some(body) = program.body(m) else { continue };
            for (i, stmt) in body.stmts.iter().enumerate() {
                s.stmt(m, i, stmt, |v| body.var_type(v).clone());
            }
        }
    }
    s.vars.retain(|_, objs| !objs.is_empty());
    Andersen { pts: s.vars, reachable: s.reachable, calls: s.calls }
}

/// The solver's context-insensitive projection, with objects renamed to
/// oracle keys.
pub fn project(r: &PtaResult) -> Andersen {
    let key = |o| match r.obj(o) {
        Obj::New { site, .. } => OKey::Site(site.method, site.index),
        Obj::Constant { value, .. } => OKey::Str(value.clone()),
        other => panic!("unexpected object {other:?}"),
    };
    let pts = r
        .pt_ci_all()
        .into_iter()
        .filter(|(_, objs)| !objs.is_empty())
        .map(|(k, objs)| (k, objs.into_iter().map(key).collect()))
        .collect();
    Andersen { pts, reachable: r.reachable_methods(), calls: r.call_graph_ci() }
}
