use std::collections::hash_map::Entry;
use std::collections::{HashMap, VecDeque};
use std::sync::Arc;

use indexmap::IndexSet;

use super::*;
use crate::bitset::{BitSetOps, HybridSet, ObjectIndexer};
use crate::ir::{builtin, FieldRef, Invoke, Literal, RelevantStmts, Stmt};

enum Event {
    Method(CsMethodId),
    Stmt(StmtRef),
    PointsToSet(PointerId, HybridSet),
    CallEdge(CallEdge),
}

/// Solver state. Plugins receive `&mut Solver` and change the analysis only
/// through its public methods.
pub struct Solver {
    pub(super) program: Arc<Program>,
    pub(super) options: PtaOptions,
    pub(super) heap: HeapModel,
    pub(super) contexts: ObjectIndexer<Context>,
    pub(super) cs_objs: ObjectIndexer<CsObj>,
    pub(super) cs_methods: ObjectIndexer<CsMethod>,
    pub(super) pointers: ObjectIndexer<Pointer>,
    pub(super) pts: Vec<HybridSet>,
    succs: Vec<Vec<(PointerId, Option<SemType>)>>,
    pub(super) pfg_edges: IndexSet<PfgEdge>,
    pub(super) reachable: IndexSet<CsMethodId>,
    method_contexts: HashMap<MethodId, Vec<ContextId>>,
    pub(super) call_edges: IndexSet<CallEdge>,
    callers: HashMap<CsMethodId, Vec<usize>>,
    extra: HashMap<MethodId, Vec<Stmt>>,
    fields: HashMap<FieldRef, Option<FieldId>>,
    worklist: VecDeque<PointerId>,
    pending: HashMap<PointerId, HybridSet>,
    events: VecDeque<Event>,
    pub(super) tally: EventTally,
    pub(super) diagnostics: Vec<String>,
    pub(super) pops: usize,
    stopped: bool,
}

impl Solver {
    pub fn new(program: Arc<Program>, options: PtaOptions) -> Self {
        let mut contexts = ObjectIndexer::new();
        contexts.index(&Context::new());
        Solver {
            heap: HeapModel::new(options.merge_types.clone()),
            program,
            options,
            contexts,
            cs_objs: ObjectIndexer::new(),
            cs_methods: ObjectIndexer::new(),
            pointers: ObjectIndexer::new(),
            pts: Vec::new(),
            succs: Vec::new(),
            pfg_edges: IndexSet::new(),
            reachable: IndexSet::new(),
            method_contexts: HashMap::new(),
            call_edges: IndexSet::new(),
            callers: HashMap::new(),
            extra: HashMap::new(),
            fields: HashMap::new(),
            worklist: VecDeque::new(),
            pending: HashMap::new(),
            events: VecDeque::new(),
            tally: EventTally::default(),
            diagnostics: Vec::new(),
            pops: 0,
            stopped: false,
        }
    }

    /// Solves to a fixpoint from the entry methods.
    pub fn run(&mut self, plugin: &mut dyn Plugin) {
        plugin.on_start(self);
        let empty = self.empty_context();
        for m in self.program.entry_methods().to_vec() {
            self.add_reachable(empty, m);
        }
        self.drain(plugin);
        plugin.on_finish(self);
        self.drain(plugin);
    }

    fn drain(&mut self, plugin: &mut dyn Plugin) {
        loop {
            if let Some(event) = self.events.pop_front() {
                self.dispatch(plugin, event);
                continue;
            }
            if self.stopped {
                break;
            }
            let Some(p) = self.worklist.pop_front() else { break };
            self.pops += 1;
            if self.pops > self.options.max_worklist_pops {
                self.diagnostics.push(format!(
                    "worklist ceiling of {} operations reached; results are incomplete",
                    self.options.max_worklist_pops
                ));
                self.stopped = true;
                continue;
            }
            self.process_pointer(p);
        }
    }

    fn dispatch(&mut self, plugin: &mut dyn Plugin, event: Event) {
        match event {
            Event::Method(m) => {
                self.tally.new_methods += 1;
                plugin.on_new_method(self, m);
            }
            Event::Stmt(s) => {
                self.tally.new_stmts += 1;
                plugin.on_new_stmt(self, s);
            }
            Event::PointsToSet(p, delta) => {
                self.tally.new_points_to_sets += 1;
                plugin.on_new_points_to_set(self, p, &delta);
            }
            Event::CallEdge(e) => {
                self.tally.new_call_edges += 1;
                plugin.on_new_call_edge(self, &e);
            }
        }
    }

    pub fn into_result(self) -> PtaResult {
        PtaResult::from_solver(self)
    }

    // Interning.

    pub fn program(&self) -> &Arc<Program> {
        &self.program
    }

    pub fn heap(&self) -> &HeapModel {
        &self.heap
    }

    pub fn heap_mut(&mut self) -> &mut HeapModel {
        &mut self.heap
    }

    pub fn empty_context(&self) -> ContextId {
        ContextId(0)
    }

    pub fn context_id(&mut self, ctx: &Context) -> ContextId {
        ContextId(self.contexts.index(ctx))
    }

    pub fn context(&self, id: ContextId) -> &Context {
        self.contexts.object(id.0)
    }

    pub fn cs_obj(&mut self, ctx: ContextId, obj: ObjId) -> CsObjId {
        CsObjId(self.cs_objs.index(&CsObj { ctx, obj }))
    }

    pub fn cs_obj_data(&self, id: CsObjId) -> &CsObj {
        self.cs_objs.object(id.0)
    }

    pub fn obj_of(&self, id: CsObjId) -> &Obj {
        self.heap.obj(self.cs_obj_data(id).obj)
    }

    pub fn cs_method(&mut self, ctx: ContextId, method: MethodId) -> CsMethodId {
        CsMethodId(self.cs_methods.index(&CsMethod { ctx, method }))
    }

    pub fn cs_method_data(&self, id: CsMethodId) -> &CsMethod {
        self.cs_methods.object(id.0)
    }

    pub fn pointer_id(&mut self, p: &Pointer) -> PointerId {
        let id = self.pointers.index(p) as usize;
        if id == self.pts.len() {
            self.pts.push(HybridSet::new());
            self.succs.push(Vec::new());
        }
        PointerId(id as u32)
    }

    pub fn var_pointer(&mut self, ctx: ContextId, method: MethodId, var: VarId) -> PointerId {
        self.pointer_id(&Pointer::Var { ctx, method, var })
    }

    pub fn pointer(&self, id: PointerId) -> &Pointer {
        self.pointers.object(id.0)
    }

    // Queries.

    pub fn get_points_to_set(&self, p: PointerId) -> &HybridSet {
        &self.pts[p.index()]
    }

    pub fn points_to(&self, p: PointerId) -> Vec<CsObjId> {
        self.pts[p.index()].iter().map(CsObjId).collect()
    }

    /// Call edges into any context of `method`.
    pub fn get_callers_of(&self, method: MethodId) -> Vec<CallEdge> {
        self.call_edges
            .iter()
            .filter(|e| self.cs_method_data(e.callee).method == method)
            .cloned()
            .collect()
    }

    pub fn is_reachable(&self, m: CsMethodId) -> bool {
        self.reachable.contains(&m)
    }

    /// The statement at `s`, parsed or synthesized.
    pub fn stmt(&self, s: StmtRef) -> Option<&Stmt> {
        let body = self.program.body(s.method)?;
        match body.stmts.get(s.index) {
            Some(stmt) => Some(stmt),
            None => self.extra.get(&s.method)?.get(s.index - body.stmts.len()),
        }
    }

    // Mutation API.

    pub fn add_points_to(&mut self, p: PointerId, objs: impl IntoIterator<Item = CsObjId>) {
        let set: HybridSet = objs.into_iter().map(|o| o.0).collect();
        self.enqueue(p, set);
    }

    pub fn add_call_edge(&mut self, edge: CallEdge) {
        if self.call_edges.contains(&edge) {
            return;
        }
        let (index, _) = self.call_edges.insert_full(edge.clone());
        self.callers.entry(edge.callee).or_default().push(index);
        self.events.push_back(Event::CallEdge(edge.clone()));
        let caller = self.cs_method_data(edge.caller).clone();
        let callee = self.cs_method_data(edge.callee).clone();
        self.add_reachable(callee.ctx, callee.method);

        let Some(Stmt::Invoke(inv)) = self.stmt(edge.site).cloned() else {
            self.diagnostics.push(format!("call edge from non-call site {}", edge.site.describe(&self.program)));
            return;
        };
        let program = Arc::clone(&self.program);
        let Some(body) = program.body(callee.method) else { return };
        for (arg, param) in inv.args.iter().zip(&body.params) {
            let src = self.var_pointer(caller.ctx, caller.method, *arg);
            let tgt = self.var_pointer(callee.ctx, callee.method, *param);
            self.add_edge(src, tgt, None);
        }
        if let Some(result) = inv.result {
            for rv in self.return_vars(callee.method) {
                let src = self.var_pointer(callee.ctx, callee.method, rv);
                let tgt = self.var_pointer(caller.ctx, caller.method, result);
                self.add_edge(src, tgt, None);
            }
        }
    }

    /// Appends synthesized statements to `method`. They take effect in every
    /// context the method is or becomes reachable in.
    pub fn add_stmts(&mut self, method: CsMethodId, stmts: Vec<Stmt>) -> Result<(), PtaError> {
        let m = self.cs_method_data(method).method;
        let program = Arc::clone(&self.program);
        let sig = program.method(m).sig.to_string();
        if !self.is_reachable(method) {
            return Err(PtaError::Unreachable(sig));
        }
        let body = program.body(m).ok_or_else(|| PtaError::Unreachable(sig.clone()))?;
        for s in &stmts {
            let bad = s.uses().into_iter().chain(s.def()).find(|v| v.index() >= body.vars.len());
            if let Some(v) = bad {
                return Err(PtaError::InvalidStmt(format!("variable #{} is not declared in {sig}", v.0)));
            }
            if matches!(s, Stmt::If { .. } | Stmt::Goto { .. } | Stmt::Switch { .. }) {
                return Err(PtaError::InvalidStmt("branches cannot be synthesized".into()));
            }
        }
        let extra = self.extra.entry(m).or_default();
        let start = body.stmts.len() + extra.len();
        extra.extend(stmts.iter().cloned());
        for k in 0..stmts.len() {
            self.events.push_back(Event::Stmt(StmtRef::new(m, start + k)));
        }
        for ctx in self.method_contexts.get(&m).cloned().unwrap_or_default() {
            for (k, s) in stmts.iter().enumerate() {
                self.process_stmt(ctx, m, start + k, s);
            }
        }
        Ok(())
    }

    // Internals.

    fn return_vars(&self, m: MethodId) -> Vec<VarId> {
        let mut out = self.program.body(m).map(|b| b.return_vars()).unwrap_or_default();
        for s in self.extra.get(&m).into_iter().flatten() {
            if let Stmt::Return { value: Some(v) } = s {
                if !out.contains(v) {
                    out.push(*v);
                }
            }
        }
        out
    }

    fn field(&mut self, f: &FieldRef) -> Option<FieldId> {
        if let Some(id) = self.fields.get(f) {
            return *id;
        }
        let id = match self.program.hierarchy().resolve_field(f) {
            Ok(id) => Some(id),
            Err(e) => {
                self.diagnostics.push(e.to_string());
                None
            }
        };
        self.fields.insert(f.clone(), id);
        id
    }

    fn enqueue(&mut self, p: PointerId, set: HybridSet) {
        let delta = set.difference(&self.pts[p.index()]);
        if delta.is_empty() {
            return;
        }
        match self.pending.entry(p) {
            Entry::Occupied(mut e) => {
                e.get_mut().or_into(&delta);
            }
            Entry::Vacant(e) => {
                e.insert(delta);
                self.worklist.push_back(p);
            }
        }
    }

    fn filtered(&self, set: &HybridSet, filter: Option<&SemType>) -> HybridSet {
        match filter {
            None => set.clone(),
            Some(ty) => {
                let h = self.program.hierarchy();
                set.iter().filter(|o| h.is_subtype(self.obj_of(CsObjId(*o)).ty(), ty)).collect()
            }
        }
    }

    fn add_edge(&mut self, source: PointerId, target: PointerId, filter: Option<SemType>) {
        let edge = PfgEdge { source, target, filter: filter.clone() };
        if !self.pfg_edges.insert(edge) {
            return;
        }
        self.succs[source.index()].push((target, filter.clone()));
        if !self.pts[source.index()].is_empty() {
            let flow = self.filtered(&self.pts[source.index()], filter.as_ref());
            self.enqueue(target, flow);
        }
    }

    fn add_reachable(&mut self, ctx: ContextId, m: MethodId) {
        let csm = self.cs_method(ctx, m);
        if !self.reachable.insert(csm) {
            return;
        }
        let contexts = self.method_contexts.entry(m).or_default();
        let first = contexts.is_empty();
        contexts.push(ctx);
        self.events.push_back(Event::Method(csm));
        let program = Arc::clone(&self.program);
        let Some(body) = program.body(m) else { return };
        let extra = self.extra.get(&m).cloned().unwrap_or_default();
        if first {
            for i in 0..body.stmts.len() + extra.len() {
                self.events.push_back(Event::Stmt(StmtRef::new(m, i)));
            }
        }
        for (i, s) in body.stmts.iter().enumerate() {
            self.process_stmt(ctx, m, i, s);
        }
        for (k, s) in extra.iter().enumerate() {
            self.process_stmt(ctx, m, body.stmts.len() + k, s);
        }
    }

    fn process_stmt(&mut self, ctx: ContextId, m: MethodId, index: usize, stmt: &Stmt) {
        let program = Arc::clone(&self.program);
        let body = program.body(m).expect("reachable methods have bodies");
        let site = StmtRef::new(m, index);
        match stmt {
            Stmt::New { lhs, ty, .. } => {
                let obj = self.heap.get_obj(site, ty);
                let hctx = if self.heap.obj(obj).is_context_free() {
                    self.empty_context()
                } else {
                    let c = self.options.selector.select_heap_context(self.context(ctx));
                    self.context_id(&c)
                };
                let o = self.cs_obj(hctx, obj);
                let p = self.var_pointer(ctx, m, *lhs);
                self.add_points_to(p, [o]);
            }
            Stmt::AssignLiteral { lhs, value: Literal::Str(s) } => {
                let obj = self.heap.get_constant_obj(&SemType::class(builtin::STRING), s);
                let o = self.cs_obj(self.empty_context(), obj);
                let p = self.var_pointer(ctx, m, *lhs);
                self.add_points_to(p, [o]);
            }
            Stmt::Copy { lhs, rhs } => {
                let ty = body.var_type(*lhs);
                let filter = (self.options.type_filter && ty.is_reference()).then(|| ty.clone());
                let src = self.var_pointer(ctx, m, *rhs);
                let tgt = self.var_pointer(ctx, m, *lhs);
                self.add_edge(src, tgt, filter);
            }
            Stmt::Cast { lhs, ty, rhs } => {
                let src = self.var_pointer(ctx, m, *rhs);
                let tgt = self.var_pointer(ctx, m, *lhs);
                self.add_edge(src, tgt, Some(ty.clone()));
            }
            Stmt::LoadField { lhs, base: None, field } => {
                if let Some(f) = self.field(field) {
                    let src = self.pointer_id(&Pointer::StaticField(f));
                    let tgt = self.var_pointer(ctx, m, *lhs);
                    self.add_edge(src, tgt, None);
                }
            }
            Stmt::StoreField { base: None, field, rhs } => {
                if let Some(f) = self.field(field) {
                    let src = self.var_pointer(ctx, m, *rhs);
                    let tgt = self.pointer_id(&Pointer::StaticField(f));
                    self.add_edge(src, tgt, None);
                }
            }
            Stmt::LoadField { base: Some(b), .. }
            | Stmt::StoreField { base: Some(b), .. }
            | Stmt::LoadArray { base: b, .. }
            | Stmt::StoreArray { base: b, .. }
            | Stmt::Invoke(Invoke { base: Some(b), .. }) => {
                let p = self.var_pointer(ctx, m, *b);
                for o in self.points_to(p) {
                    self.apply_base_stmt(ctx, m, index, stmt, o);
                }
            }
            Stmt::Invoke(inv) => {
                let callee = match program.hierarchy().resolve_direct(&inv.method) {
                    Ok(c) => c,
                    Err(e) => {
                        self.diagnostics.push(format!("{}: {e}", site.describe(&program)));
                        return;
                    }
                };
                let c = self.options.selector.select_method_context(self.context(ctx), site, callee, None);
                let ct = self.context_id(&c);
                let caller = self.cs_method(ctx, m);
                let callee = self.cs_method(ct, callee);
                self.add_call_edge(CallEdge { kind: inv.kind, caller, site, callee });
            }
            Stmt::Return { value: Some(v) } => {
                let csm = self.cs_method(ctx, m);
                let edges: Vec<CallEdge> = self
                    .callers
                    .get(&csm)
                    .into_iter()
                    .flatten()
                    .map(|i| self.call_edges[*i].clone())
                    .collect();
                for e in edges {
                    if let Some(Stmt::Invoke(Invoke { result: Some(r), .. })) = self.stmt(e.site).cloned() {
                        let caller = self.cs_method_data(e.caller).clone();
                        let src = self.var_pointer(ctx, m, *v);
                        let tgt = self.var_pointer(caller.ctx, caller.method, r);
                        self.add_edge(src, tgt, None);
                    }
                }
            }
            _ => {}
        }
    }

    /// Applies a statement whose base variable points to `o`.
    fn apply_base_stmt(&mut self, ctx: ContextId, m: MethodId, index: usize, stmt: &Stmt, o: CsObjId) {
        match stmt {
            Stmt::LoadField { lhs, field, .. } => {
                if let Some(f) = self.field(field) {
                    let src = self.pointer_id(&Pointer::InstanceField { base: o, field: f });
                    let tgt = self.var_pointer(ctx, m, *lhs);
                    self.add_edge(src, tgt, None);
                }
            }
            Stmt::StoreField { field, rhs, .. } => {
                if let Some(f) = self.field(field) {
                    let src = self.var_pointer(ctx, m, *rhs);
                    let tgt = self.pointer_id(&Pointer::InstanceField { base: o, field: f });
                    self.add_edge(src, tgt, None);
                }
            }
            Stmt::LoadArray { lhs, .. } => {
                let src = self.pointer_id(&Pointer::ArrayIndex(o));
                let tgt = self.var_pointer(ctx, m, *lhs);
                self.add_edge(src, tgt, None);
            }
            Stmt::StoreArray { rhs, .. } => {
                let src = self.var_pointer(ctx, m, *rhs);
                let tgt = self.pointer_id(&Pointer::ArrayIndex(o));
                self.add_edge(src, tgt, None);
            }
            Stmt::Invoke(inv) => self.process_call(ctx, m, index, inv, o),
            _ => {}
        }
    }

    fn process_call(&mut self, ctx: ContextId, m: MethodId, index: usize, inv: &Invoke, recv: CsObjId) {
        let program = Arc::clone(&self.program);
        let h = program.hierarchy();
        let site = StmtRef::new(m, index);
        let recv_data = self.cs_obj_data(recv).clone();
        let obj = self.heap.obj(recv_data.obj).clone();
        let callee = match inv.kind {
            InvokeKind::Virtual => h.dispatch(obj.ty().class_name().unwrap_or(builtin::OBJECT), &inv.method),
            _ => h.resolve_direct(&inv.method),
        };
        let callee = match callee {
            Ok(c) => c,
            Err(e) => {
                self.diagnostics.push(format!("{}: {e}", site.describe(&program)));
                return;
            }
        };
        let alloc_type = obj.alloc_type(&program);
        let receiver = Receiver {
            heap_context: self.context(recv_data.ctx),
            obj: recv_data.obj,
            alloc_type: &alloc_type,
        };
        let c = self.options.selector.select_method_context(self.context(ctx), site, callee, Some(receiver));
        let ct = self.context_id(&c);
        let caller = self.cs_method(ctx, m);
        let callee_cs = self.cs_method(ct, callee);
        self.add_call_edge(CallEdge { kind: inv.kind, caller, site, callee: callee_cs });
        if let Some(this) = program.body(callee).and_then(|b| b.this_var) {
            let p = self.var_pointer(ct, callee, this);
            self.add_points_to(p, [recv]);
        }
    }

    fn process_pointer(&mut self, p: PointerId) {
        let Some(candidate) = self.pending.remove(&p) else { return };
        let delta = candidate.difference(&self.pts[p.index()]);
        if delta.is_empty() {
            return;
        }
        self.pts[p.index()].or_into(&delta);
        let pointer = self.pointer(p).clone();
        if matches!(pointer, Pointer::Var { .. }) {
            self.events.push_back(Event::PointsToSet(p, delta.clone()));
        }
        for (q, filter) in self.succs[p.index()].clone() {
            let flow = self.filtered(&delta, filter.as_ref());
            self.enqueue(q, flow);
        }
        if let Pointer::Var { ctx, method, var } = pointer {
            self.process_base_var(ctx, method, var, &delta);
        }
    }

    fn process_base_var(&mut self, ctx: ContextId, m: MethodId, var: VarId, delta: &HybridSet) {
        let program = Arc::clone(&self.program);
        let Some(body) = program.body(m) else { return };
        let rel = body.relevant_stmts(var);
        let mut sites: Vec<(usize, Stmt)> = rel
            .loads
            .iter()
            .chain(&rel.stores)
            .chain(&rel.array_loads)
            .chain(&rel.array_stores)
            .chain(&rel.invokes)
            .map(|i| (*i, body.stmts[*i].clone()))
            .collect();
        for (k, s) in self.extra.get(&m).into_iter().flatten().enumerate() {
            let mut r = RelevantStmts::default();
            RelevantStmts::record(0, s, var, &mut r);
            let based = !(r.loads.is_empty()
                && r.stores.is_empty()
                && r.array_loads.is_empty()
                && r.array_stores.is_empty()
                && r.invokes.is_empty());
            if based {
                sites.push((body.stmts.len() + k, s.clone()));
            }
        }
        for (i, stmt) in &sites {
            for o in delta.iter() {
                self.apply_base_stmt(ctx, m, *i, stmt, CsObjId(o));
            }
        }
    }

    pub(super) fn finish_parts(self) -> SolverParts {
        SolverParts {
            program: self.program,
            heap: self.heap,
            contexts: self.contexts,
            cs_objs: self.cs_objs,
            cs_methods: self.cs_methods,
            pointers: self.pointers,
            pts: self.pts,
            pfg_edges: self.pfg_edges,
            reachable: self.reachable,
            call_edges: self.call_edges,
            extra: self.extra,
            tally: self.tally,
            diagnostics: self.diagnostics,
            pops: self.pops,
        }
    }
}

pub(super) struct SolverParts {
    pub program: Arc<Program>,
    pub heap: HeapModel,
    pub contexts: ObjectIndexer<Context>,
    pub cs_objs: ObjectIndexer<CsObj>,
    pub cs_methods: ObjectIndexer<CsMethod>,
    pub pointers: ObjectIndexer<Pointer>,
    pub pts: Vec<HybridSet>,
    pub pfg_edges: IndexSet<PfgEdge>,
    pub reachable: IndexSet<CsMethodId>,
    pub call_edges: IndexSet<CallEdge>,
    pub extra: HashMap<MethodId, Vec<Stmt>>,
    pub tally: EventTally,
    pub diagnostics: Vec<String>,
    pub pops: usize,
}
