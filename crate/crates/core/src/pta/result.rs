use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt::Write as _;
use std::sync::Arc;

use indexmap::IndexSet;

use super::solver::{Solver, SolverParts};
use super::*;
use crate::bitset::{BitSetOps, HybridSet, ObjectIndexer};
use crate::ir::Stmt;

/// Counts in the usual pointer-analysis sense: points-to relations over all
/// variables, reachable methods, and call-graph edges, all with contexts
/// erased.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Metrics {
    pub varpt: usize,
    pub reach: usize,
    pub edges: usize,
}

/// The immutable outcome of one solver run.
pub struct PtaResult {
    program: Arc<Program>,
    heap: HeapModel,
    contexts: ObjectIndexer<Context>,
    cs_objs: ObjectIndexer<CsObj>,
    cs_methods: ObjectIndexer<CsMethod>,
    pointers: ObjectIndexer<Pointer>,
    pts: Vec<HybridSet>,
    pfg_edges: IndexSet<PfgEdge>,
    pfg_succs: HashMap<PointerId, Vec<PointerId>>,
    reachable: IndexSet<CsMethodId>,
    call_edges: IndexSet<CallEdge>,
    extra: HashMap<MethodId, Vec<Stmt>>,
    var_pointers: BTreeMap<(MethodId, VarId), Vec<PointerId>>,
    tally: EventTally,
    diagnostics: Vec<String>,
    pops: usize,
}

impl std::fmt::Debug for PtaResult {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PtaResult").field("metrics", &self.metrics()).finish_non_exhaustive()
    }
}

impl PartialEq for PtaResult {
    /// Results are equal when their context-erased views agree.
    fn eq(&self, other: &Self) -> bool {
        self.pt_ci_all() == other.pt_ci_all()
            && self.reachable_methods() == other.reachable_methods()
            && self.call_graph_ci() == other.call_graph_ci()
    }
}

impl PtaResult {
    pub(super) fn from_solver(solver: Solver) -> Self {
        let SolverParts {
            program,
            heap,
            contexts,
            cs_objs,
            cs_methods,
            pointers,
            pts,
            pfg_edges,
            reachable,
            call_edges,
            extra,
            tally,
            diagnostics,
            pops,
        } = solver.finish_parts();
        let mut var_pointers: BTreeMap<(MethodId, VarId), Vec<PointerId>> = BTreeMap::new();
        for (i, p) in pointers.iter() {
            if let Pointer::Var { method, var, .. } = p {
                var_pointers.entry((*method, *var)).or_default().push(PointerId(i));
            }
        }
        let mut pfg_succs: HashMap<PointerId, Vec<PointerId>> = HashMap::new();
        for e in &pfg_edges {
            pfg_succs.entry(e.source).or_default().push(e.target);
        }
        PtaResult {
            program,
            heap,
            contexts,
            cs_objs,
            cs_methods,
            pointers,
            pts,
            pfg_edges,
            pfg_succs,
            reachable,
            call_edges,
            extra,
            var_pointers,
            tally,
            diagnostics,
            pops,
        }
    }

    pub fn program(&self) -> &Arc<Program> {
        &self.program
    }

    pub fn heap(&self) -> &HeapModel {
        &self.heap
    }

    pub fn obj(&self, id: ObjId) -> &Obj {
        self.heap.obj(id)
    }

    pub fn context(&self, id: ContextId) -> &Context {
        self.contexts.object(id.0)
    }

    pub fn cs_obj(&self, id: CsObjId) -> &CsObj {
        self.cs_objs.object(id.0)
    }

    pub fn cs_objs(&self) -> impl Iterator<Item = (CsObjId, &CsObj)> {
        self.cs_objs.iter().map(|(i, o)| (CsObjId(i), o))
    }

    pub fn cs_method(&self, id: CsMethodId) -> &CsMethod {
        self.cs_methods.object(id.0)
    }

    pub fn pointer(&self, id: PointerId) -> &Pointer {
        self.pointers.object(id.0)
    }

    pub fn find_pointer(&self, p: &Pointer) -> Option<PointerId> {
        self.pointers.get_index(p).map(PointerId)
    }

    pub fn pointers(&self) -> impl Iterator<Item = (PointerId, &Pointer)> {
        self.pointers.iter().map(|(i, p)| (PointerId(i), p))
    }

    pub fn points_to(&self, p: PointerId) -> impl Iterator<Item = CsObjId> + '_ {
        self.pts[p.index()].iter().map(CsObjId)
    }

    /// The context-qualified pointers of `var` in `method`.
    pub fn var_pointers(&self, method: MethodId, var: VarId) -> &[PointerId] {
        self.var_pointers.get(&(method, var)).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Objects `var` may point to in any context, heap contexts erased.
    pub fn pt_ci(&self, method: MethodId, var: VarId) -> BTreeSet<ObjId> {
        self.var_pointers(method, var)
            .iter()
            .flat_map(|p| self.points_to(*p))
            .map(|o| self.cs_obj(o).obj)
            .collect()
    }

    /// [`pt_ci`](Self::pt_ci) of every variable with a non-empty set.
    pub fn pt_ci_all(&self) -> BTreeMap<(MethodId, VarId), BTreeSet<ObjId>> {
        self.var_pointers
            .keys()
            .map(|(m, v)| ((*m, *v), self.pt_ci(*m, *v)))
            .filter(|(_, s)| !s.is_empty())
            .collect()
    }

    /// Looks up a variable by class, method name, and variable name.
    pub fn pt_ci_by_name(&self, class: &str, method: &str, var: &str) -> BTreeSet<ObjId> {
        let Some(m) = self.program.find_method_by_name(class, method) else { return BTreeSet::new() };
        let Some(v) = self.program.body(m).and_then(|b| b.var_by_name(var)) else { return BTreeSet::new() };
        self.pt_ci(m, v)
    }

    pub fn reachable_cs_methods(&self) -> impl Iterator<Item = &CsMethod> {
        self.reachable.iter().map(|m| self.cs_method(*m))
    }

    pub fn reachable_methods(&self) -> BTreeSet<MethodId> {
        self.reachable_cs_methods().map(|m| m.method).collect()
    }

    pub fn call_edges(&self) -> impl Iterator<Item = &CallEdge> {
        self.call_edges.iter()
    }

    /// Call edges with contexts erased: (call site, callee).
    pub fn call_graph_ci(&self) -> BTreeSet<(StmtRef, MethodId)> {
        self.call_edges.iter().map(|e| (e.site, self.cs_method(e.callee).method)).collect()
    }

    pub fn pfg_edges(&self) -> impl Iterator<Item = &PfgEdge> {
        self.pfg_edges.iter()
    }

    /// Shortest pointer-flow path from `from` to `to`, both included.
    pub fn pfg_path(&self, from: PointerId, to: PointerId) -> Option<Vec<PointerId>> {
        let mut parent: HashMap<PointerId, PointerId> = HashMap::new();
        let mut queue = VecDeque::from([from]);
        let mut seen = BTreeSet::from([from]);
        while let Some(p) = queue.pop_front() {
            if p == to {
                let mut path = vec![to];
                let mut cur = to;
                while let Some(prev) = parent.get(&cur) {
                    path.push(*prev);
                    cur = *prev;
                }
                path.reverse();
                return Some(path);
            }
            for q in self.pfg_succs.get(&p).into_iter().flatten() {
                if seen.insert(*q) {
                    parent.insert(*q, p);
                    queue.push_back(*q);
                }
            }
        }
        None
    }

    pub fn stmt(&self, s: StmtRef) -> Option<&Stmt> {
        let body = self.program.body(s.method)?;
        match body.stmts.get(s.index) {
            Some(stmt) => Some(stmt),
            None => self.extra.get(&s.method)?.get(s.index - body.stmts.len()),
        }
    }

    pub fn metrics(&self) -> Metrics {
        Metrics {
            varpt: self.pt_ci_all().values().map(BTreeSet::len).sum(),
            reach: self.reachable_methods().len(),
            edges: self.call_graph_ci().len(),
        }
    }

    pub fn tally(&self) -> EventTally {
        self.tally
    }

    pub fn diagnostics(&self) -> &[String] {
        &self.diagnostics
    }

    /// Worklist pops the solver performed.
    pub fn worklist_pops(&self) -> usize {
        self.pops
    }

    pub fn describe_obj(&self, id: ObjId) -> String {
        self.obj(id).describe(&self.program)
    }

    pub fn describe_context(&self, id: ContextId) -> String {
        let parts: Vec<String> = self
            .context(id)
            .iter()
            .map(|e| match e {
                ContextElem::CallSite(s) => s.describe(&self.program),
                ContextElem::Obj(o) => self.describe_obj(*o),
                ContextElem::Type(t) => t.to_string(),
            })
            .collect();
        format!("[{}]", parts.join(", "))
    }

    pub fn describe_pointer(&self, id: PointerId) -> String {
        match self.pointer(id) {
            Pointer::Var { ctx, method, var } => {
                let sig = &self.program.method(*method).sig;
                let name = &self.program.body(*method).expect("body").var(*var).name;
                format!("{}:{}.{}/{}", self.describe_context(*ctx), sig.class, sig.name, name)
            }
            Pointer::InstanceField { base, field } => {
                let o = self.cs_obj(*base);
                format!("{}:{}.{}", self.describe_context(o.ctx), self.describe_obj(o.obj), self.program.field(*field).name)
            }
            Pointer::ArrayIndex(base) => {
                let o = self.cs_obj(*base);
                format!("{}:{}[*]", self.describe_context(o.ctx), self.describe_obj(o.obj))
            }
            Pointer::StaticField(f) => {
                let fd = self.program.field(*f);
                format!("{}.{}", self.program.class_by_id(fd.class).name, fd.name)
            }
        }
    }

    /// Context-insensitive points-to sets, call edges, and metrics as text.
    pub fn dump(&self) -> String {
        let mut out = String::from("# points-to\n");
        for ((m, v), objs) in self.pt_ci_all() {
            let sig = &self.program.method(m).sig;
            let name = &self.program.body(m).expect("body").var(v).name;
            let objs: Vec<String> = objs.iter().map(|o| self.describe_obj(*o)).collect();
            let _ = writeln!(out, "{}.{}/{name} -> {{{}}}", sig.class, sig.name, objs.join(", "));
        }
        out.push_str("# call graph\n");
        for (site, callee) in self.call_graph_ci() {
            let _ = writeln!(out, "{} -> {}", site.describe(&self.program), self.program.method(callee).sig);
        }
        let m = self.metrics();
        let _ = writeln!(out, "# metrics\n#varpt={} #reach={} #edges={}", m.varpt, m.reach, m.edges);
        out
    }
}
