use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;

use thiserror::Error;

use super::Plugin;
use crate::bitset::{BitSetOps, HybridSet};
use crate::ir::{MethodId, Program, SemType, Stmt};
use crate::pta::{CallEdge, CsObjId, ObjId, PointerId, Solver, StmtRef};

pub const TAINT_DESCRIPTOR: &str = "TaintObj";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("taint config line {line}: {message}")]
pub struct TaintConfigError {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TransferEnd {
    Param(usize),
    Base,
    Result,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transfer {
    pub method: MethodId,
    pub from: TransferEnd,
    pub to: TransferEnd,
}

/// Sources, transfers, and sinks, resolved against one program.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TaintConfig {
    pub sources: BTreeSet<MethodId>,
    pub transfers: Vec<Transfer>,
    pub sinks: Vec<(MethodId, usize)>,
}

/// Parses a type as written in signatures: `int`, `boolean`, `C`, `T[]`.
pub fn parse_type(text: &str) -> Option<SemType> {
    let text = text.trim();
    if let Some(elem) = text.strip_suffix("[]") {
        return parse_type(elem).map(SemType::array_of);
    }
    match text {
        "int" => Some(SemType::Int),
        "boolean" => Some(SemType::Boolean),
        "void" => Some(SemType::Void),
        "" => None,
        name if name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '$') => {
            Some(SemType::class(name))
        }
        _ => None,
    }
}

/// Resolves `C.m(T1,T2)` to a method.
pub fn resolve_signature(program: &Program, sig: &str) -> Result<MethodId, String> {
    let (head, rest) = sig.split_once('(').ok_or_else(|| format!("malformed signature `{sig}`"))?;
    let params = rest.strip_suffix(')').ok_or_else(|| format!("malformed signature `{sig}`"))?;
    let (class, name) = head.rsplit_once('.').ok_or_else(|| format!("malformed signature `{sig}`"))?;
    let params: Vec<SemType> = if params.trim().is_empty() {
        Vec::new()
    } else {
        params
            .split(',')
            .map(|p| parse_type(p).ok_or_else(|| format!("bad parameter type `{p}` in `{sig}`")))
            .collect::<Result<_, _>>()?
    };
    program
        .find_method(class.trim(), name.trim(), &params)
        .ok_or_else(|| format!("no method matches `{sig}`"))
}

impl TaintConfig {
    /// Reads the line format
    ///
    /// ```text
    /// source C.m(T) -> result
    /// transfer C.m(T) from:param 0 to:result
    /// sink C.m(T) param:0
    /// ```
    ///
    /// `#` starts a comment.
    pub fn parse(text: &str, program: &Program) -> Result<TaintConfig, TaintConfigError> {
        let mut config = TaintConfig::default();
        for (n, raw) in text.lines().enumerate() {
            let line = n + 1;
            let err = |message: String| TaintConfigError { line, message };
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (kind, rest) = content.split_once(char::is_whitespace).ok_or_else(|| err("missing signature".into()))?;
            let rest = rest.trim();
            let close = rest.find(')').ok_or_else(|| err("missing `)` in signature".into()))?;
            let (sig, tail) = rest.split_at(close + 1);
            let method = resolve_signature(program, sig.trim()).map_err(err)?;
            let arity = program.method(method).sig.params.len();
            let is_static = program.method(method).sig.is_static;
            let tail: Vec<&str> = tail.split_whitespace().collect();
            let end = |spec: &str, allow_param: bool| -> Result<TransferEnd, TaintConfigError> {
                let spec = spec.trim();
                match spec {
                    "base" if !is_static => Ok(TransferEnd::Base),
                    "base" => Err(err("static methods have no base".into())),
                    "result" if !allow_param => Ok(TransferEnd::Result),
                    _ => {
                        let idx = spec
                            .strip_prefix("param")
                            .filter(|_| allow_param)
                            .and_then(|i| i.trim().parse::<usize>().ok())
                            .ok_or_else(|| err(format!("bad transfer end `{spec}`")))?;
                        if idx >= arity {
                            return Err(err(format!("param {idx} out of range for arity {arity}")));
                        }
                        Ok(TransferEnd::Param(idx))
                    }
                }
            };
            match kind {
                "source" => {
                    if tail != ["->", "result"] {
                        return Err(err("expected `-> result` after source signature".into()));
                    }
                    config.sources.insert(method);
                }
                "transfer" => {
                    let joined = tail.join(" ");
                    let from = joined.strip_prefix("from:").ok_or_else(|| err("expected `from:`".into()))?;
                    let (from, to) = from.split_once("to:").ok_or_else(|| err("expected `to:`".into()))?;
                    let from = end(from, true)?;
                    let to = end(to, false)?;
                    config.transfers.push(Transfer { method, from, to });
                }
                "sink" => {
                    let idx = tail
                        .first()
                        .and_then(|t| t.strip_prefix("param:"))
                        .and_then(|i| i.parse::<usize>().ok())
                        .filter(|_| tail.len() == 1)
                        .ok_or_else(|| err("expected `param:N` after sink signature".into()))?;
                    if idx >= arity {
                        return Err(err(format!("param {idx} out of range for arity {arity}")));
                    }
                    config.sinks.push((method, idx));
                }
                other => return Err(err(format!("unknown entry kind `{other}`"))),
            }
        }
        Ok(config)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TaintFlow {
    pub sink: StmtRef,
    pub source: StmtRef,
    pub param: usize,
    pub taint: ObjId,
}

impl TaintFlow {
    pub fn describe(&self, program: &Program) -> String {
        format!(
            "LEAK source={} sink={} param={}",
            self.source.describe(program),
            self.sink.describe(program),
            self.param
        )
    }
}

/// One report line per distinct (source, sink, param), sorted by sink then
/// source.
pub fn taint_report(program: &Program, flows: &[TaintFlow]) -> String {
    let keys: BTreeSet<(StmtRef, StmtRef, usize)> = flows.iter().map(|f| (f.sink, f.source, f.param)).collect();
    let mut out = String::new();
    for (sink, source, param) in keys {
        let flow = TaintFlow { sink, source, param, taint: ObjId(0) };
        let _ = writeln!(out, "{}", flow.describe(program));
    }
    out
}

/// Taint tracking on top of the pointer analysis. Taint is a mock object per
/// source call site; transfers copy it between variables at call sites.
#[derive(Debug, Clone, Default)]
pub struct TaintPlugin {
    config: TaintConfig,
    transfer_vars: HashMap<PointerId, BTreeSet<PointerId>>,
    flows: Vec<TaintFlow>,
    injections: usize,
}

impl TaintPlugin {
    pub fn new(config: TaintConfig) -> Self {
        TaintPlugin { config, ..Default::default() }
    }

    /// Flows found when the solver finished, sorted.
    pub fn flows(&self) -> &[TaintFlow] {
        &self.flows
    }

    /// Recorded (from, to) pointer pairs.
    pub fn transfer_vars(&self) -> impl Iterator<Item = (PointerId, PointerId)> + '_ {
        self.transfer_vars.iter().flat_map(|(f, ts)| ts.iter().map(move |t| (*f, *t)))
    }

    /// Taint objects this plugin handed to `add_points_to` that were new.
    pub fn injections(&self) -> usize {
        self.injections
    }

    fn taint_only(solver: &Solver, set: &HybridSet) -> Vec<CsObjId> {
        set.iter().map(CsObjId).filter(|o| solver.obj_of(*o).is_mock(TAINT_DESCRIPTOR)).collect()
    }

    fn give(&mut self, solver: &mut Solver, to: PointerId, objs: Vec<CsObjId>) {
        let fresh: Vec<CsObjId> =
            objs.into_iter().filter(|o| !solver.get_points_to_set(to).contains(o.0)).collect();
        if !fresh.is_empty() {
            self.injections += fresh.len();
            solver.add_points_to(to, fresh);
        }
    }
}

impl Plugin for TaintPlugin {
    fn on_new_call_edge(&mut self, solver: &mut Solver, edge: &CallEdge) {
        let callee = solver.cs_method_data(edge.callee).method;
        let caller = solver.cs_method_data(edge.caller).clone();
        let Some(Stmt::Invoke(inv)) = solver.stmt(edge.site).cloned() else { return };
        if self.config.sources.contains(&callee) {
            // A discarded result cannot carry taint anywhere.
            if let Some(r) = inv.result {
                let ty = solver.program().method(callee).sig.ret.clone();
                let obj = solver.heap_mut().get_mock_obj(TAINT_DESCRIPTOR, Some(edge.site), &ty);
                let empty = solver.empty_context();
                let o = solver.cs_obj(empty, obj);
                let p = solver.var_pointer(caller.ctx, caller.method, r);
                self.give(solver, p, vec![o]);
            }
        }
        let transfers: Vec<Transfer> = self.config.transfers.iter().filter(|t| t.method == callee).cloned().collect();
        for t in transfers {
            let var = |end: TransferEnd| match end {
                TransferEnd::Param(i) => inv.args.get(i).copied(),
                TransferEnd::Base => inv.base,
                TransferEnd::Result => inv.result,
            };
            let (Some(from), Some(to)) = (var(t.from), var(t.to)) else { continue };
            let from = solver.var_pointer(caller.ctx, caller.method, from);
            let to = solver.var_pointer(caller.ctx, caller.method, to);
            self.transfer_vars.entry(from).or_default().insert(to);
            let taint = Self::taint_only(solver, solver.get_points_to_set(from));
            self.give(solver, to, taint);
        }
    }

    fn on_new_points_to_set(&mut self, solver: &mut Solver, var: PointerId, delta: &HybridSet) {
        let Some(targets) = self.transfer_vars.get(&var).cloned() else { return };
        let taint = Self::taint_only(solver, delta);
        if taint.is_empty() {
            return;
        }
        for to in targets {
            self.give(solver, to, taint.clone());
        }
    }

    fn on_finish(&mut self, solver: &mut Solver) {
        let mut flows = BTreeSet::new();
        for (sink, param) in self.config.sinks.clone() {
            for edge in solver.get_callers_of(sink) {
                let caller = solver.cs_method_data(edge.caller).clone();
                let Some(Stmt::Invoke(inv)) = solver.stmt(edge.site).cloned() else { continue };
                let Some(arg) = inv.args.get(param).copied() else { continue };
                let p = solver.var_pointer(caller.ctx, caller.method, arg);
                for o in Self::taint_only(solver, solver.get_points_to_set(p)) {
                    let obj = solver.cs_obj_data(o).obj;
                    if let crate::pta::Obj::Mock { source: Some(source), .. } = solver.heap().obj(obj) {
                        flows.insert(TaintFlow { sink: edge.site, source: *source, param, taint: obj });
                    }
                }
            }
        }
        self.flows = flows.into_iter().collect();
    }
}
