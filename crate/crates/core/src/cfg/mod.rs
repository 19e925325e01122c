//! Intraprocedural control-flow graphs with categorized edges.

mod throw;

use std::collections::HashSet;
use std::fmt::{self, Write as _};
use std::str::FromStr;

use thiserror::Error;

use crate::ir::{MethodBody, MethodId, Program, SemType, Stmt};

pub use throw::{implicit_exceptions, throw_analysis, ThrowResult};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CfgError {
    #[error("exception mode `{0}` needs a throw analysis result")]
    MissingThrowResult(ExceptionMode),
    #[error("statement {stmt} jumps to missing target {target}")]
    BadTarget { stmt: usize, target: usize },
    #[error("unknown exception mode `{0}` (expected null, explicit or all)")]
    UnknownMode(String),
}

/// Which exceptional control flow the builder adds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum ExceptionMode {
    /// No exception edges; `throw` ends its path.
    Null,
    /// Edges for `throw` statements.
    #[default]
    Explicit,
    /// Explicit edges plus runtime exceptions from the implicit table.
    All,
}

impl fmt::Display for ExceptionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ExceptionMode::Null => "null",
            ExceptionMode::Explicit => "explicit",
            ExceptionMode::All => "all",
        })
    }
}

impl FromStr for ExceptionMode {
    type Err = CfgError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "null" => Ok(ExceptionMode::Null),
            "explicit" => Ok(ExceptionMode::Explicit),
            "all" => Ok(ExceptionMode::All),
            other => Err(CfgError::UnknownMode(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CfgNode {
    Entry,
    Stmt(usize),
    Exit,
}

impl fmt::Display for CfgNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CfgNode::Entry => f.write_str("entry"),
            CfgNode::Stmt(i) => write!(f, "{i}"),
            CfgNode::Exit => f.write_str("exit"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EdgeKind {
    Entry,
    FallThrough,
    Goto,
    IfTrue,
    IfFalse,
    SwitchCase(i32),
    SwitchDefault,
    /// Carries the catch type of the handler it reaches.
    CaughtException(SemType),
    UncaughtException,
    Return,
}

impl EdgeKind {
    pub fn is_exceptional(&self) -> bool {
        matches!(self, EdgeKind::CaughtException(_) | EdgeKind::UncaughtException)
    }
}

impl fmt::Display for EdgeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EdgeKind::Entry => f.write_str("ENTRY"),
            EdgeKind::FallThrough => f.write_str("FALL_THROUGH"),
            EdgeKind::Goto => f.write_str("GOTO"),
            EdgeKind::IfTrue => f.write_str("IF_TRUE"),
            EdgeKind::IfFalse => f.write_str("IF_FALSE"),
            EdgeKind::SwitchCase(v) => write!(f, "SWITCH_CASE({v})"),
            EdgeKind::SwitchDefault => f.write_str("SWITCH_DEFAULT"),
            EdgeKind::CaughtException(t) => write!(f, "CAUGHT_EXCEPTION({t})"),
            EdgeKind::UncaughtException => f.write_str("UNCAUGHT_EXCEPTION"),
            EdgeKind::Return => f.write_str("RETURN"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CfgEdge {
    pub source: CfgNode,
    pub target: CfgNode,
    pub kind: EdgeKind,
}

/// Control-flow graph of one method body. Nodes are numbered `0` (entry),
/// `1..=n` (statements), `n + 1` (exit).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cfg {
    method: MethodId,
    stmt_count: usize,
    mode: ExceptionMode,
    edges: Vec<CfgEdge>,
    out_edges: Vec<Vec<usize>>,
    in_edges: Vec<Vec<usize>>,
}

impl Cfg {
    pub fn method(&self) -> MethodId {
        self.method
    }

    pub fn exception_mode(&self) -> ExceptionMode {
        self.mode
    }

    pub fn node_count(&self) -> usize {
        self.stmt_count + 2
    }

    pub fn entry(&self) -> CfgNode {
        CfgNode::Entry
    }

    pub fn exit(&self) -> CfgNode {
        CfgNode::Exit
    }

    pub fn node_index(&self, node: CfgNode) -> usize {
        match node {
            CfgNode::Entry => 0,
            CfgNode::Stmt(i) => i + 1,
            CfgNode::Exit => self.stmt_count + 1,
        }
    }

    pub fn node_at(&self, index: usize) -> CfgNode {
        match index {
            0 => CfgNode::Entry,
            i if i <= self.stmt_count => CfgNode::Stmt(i - 1),
            _ => CfgNode::Exit,
        }
    }

    /// All nodes in index order.
    pub fn nodes(&self) -> impl Iterator<Item = CfgNode> + '_ {
        (0..self.node_count()).map(|i| self.node_at(i))
    }

    pub fn edges(&self) -> &[CfgEdge] {
        &self.edges
    }

    pub fn out_edges(&self, node: CfgNode) -> impl Iterator<Item = &CfgEdge> + '_ {
        self.out_edges[self.node_index(node)].iter().map(|e| &self.edges[*e])
    }

    pub fn in_edges(&self, node: CfgNode) -> impl Iterator<Item = &CfgEdge> + '_ {
        self.in_edges[self.node_index(node)].iter().map(|e| &self.edges[*e])
    }

    pub fn succs(&self, node: CfgNode) -> impl Iterator<Item = CfgNode> + '_ {
        self.out_edges(node).map(|e| e.target)
    }

    pub fn preds(&self, node: CfgNode) -> impl Iterator<Item = CfgNode> + '_ {
        self.in_edges(node).map(|e| e.source)
    }

    /// Renders the graph in DOT, labelling statements `index: text`.
    pub fn to_dot(&self, program: &Program, body: &MethodBody) -> String {
        let sig = &program.method(self.method).sig;
        let mut out = String::new();
        let _ = writeln!(out, "digraph \"{}\" {{", escape(&sig.to_string()));
        let _ = writeln!(out, "  node [shape=box];");
        for node in self.nodes() {
            let label = match node {
                CfgNode::Stmt(i) => format!("{i}: {}", body.stmt_display(i)),
                other => other.to_string(),
            };
            let _ = writeln!(out, "  n{} [label=\"{}\"];", self.node_index(node), escape(&label));
        }
        for e in &self.edges {
            let _ = writeln!(
                out,
                "  n{} -> n{} [label=\"{}\"];",
                self.node_index(e.source),
                self.node_index(e.target),
                escape(&e.kind.to_string())
            );
        }
        out.push_str("}\n");
        out
    }
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

struct Builder {
    edges: Vec<CfgEdge>,
    seen: HashSet<CfgEdge>,
}

impl Builder {
    fn add(&mut self, source: CfgNode, target: CfgNode, kind: EdgeKind) {
        let e = CfgEdge { source, target, kind };
        if self.seen.insert(e.clone()) {
            self.edges.push(e);
        }
    }
}

/// Builds the CFG of `body`. `throws` must be supplied unless `mode` is
/// [`ExceptionMode::Null`].
pub fn build_cfg(
    program: &Program,
    body: &MethodBody,
    mode: ExceptionMode,
    throws: Option<&ThrowResult>,
) -> Result<Cfg, CfgError> {
    let throws = match (mode, throws) {
        (ExceptionMode::Null, _) => None,
        (_, Some(t)) => Some(t),
        (m, None) => return Err(CfgError::MissingThrowResult(m)),
    };
    let n = body.stmts.len();
    let check = |stmt: usize, target: usize| {
        if target < n {
            Ok(CfgNode::Stmt(target))
        } else {
            Err(CfgError::BadTarget { stmt, target })
        }
    };
    let next = |i: usize| if i + 1 < n { CfgNode::Stmt(i + 1) } else { CfgNode::Exit };

    let mut b = Builder { edges: Vec::new(), seen: HashSet::new() };
    b.add(CfgNode::Entry, if n > 0 { CfgNode::Stmt(0) } else { CfgNode::Exit }, EdgeKind::Entry);

    let hierarchy = program.hierarchy();
    for (i, stmt) in body.stmts.iter().enumerate() {
        let here = CfgNode::Stmt(i);
        match stmt {
            Stmt::Goto { target } => b.add(here, check(i, *target)?, EdgeKind::Goto),
            Stmt::If { target, .. } => {
                b.add(here, check(i, *target)?, EdgeKind::IfTrue);
                b.add(here, next(i), EdgeKind::IfFalse);
            }
            Stmt::Switch { cases, default, .. } => {
                for (value, target) in cases {
                    b.add(here, check(i, *target)?, EdgeKind::SwitchCase(*value));
                }
                b.add(here, check(i, *default)?, EdgeKind::SwitchDefault);
            }
            Stmt::Return { .. } => b.add(here, CfgNode::Exit, EdgeKind::Return),
            Stmt::Throw { .. } => {}
            _ => b.add(here, next(i), EdgeKind::FallThrough),
        }

        let Some(throws) = throws else { continue };
        let mut thrown: Vec<&SemType> = throws.explicit(i).iter().collect();
        if mode == ExceptionMode::All {
            thrown.extend(throws.implicit(i));
        }
        if thrown.is_empty() {
            continue;
        }
        let mut handlers: Vec<(usize, usize)> = body
            .exception_table
            .iter()
            .enumerate()
            .filter(|(_, e)| e.covers(i))
            .map(|(k, e)| (e.end - e.start, k))
            .collect();
        handlers.sort();
        for ty in thrown {
            let caught = handlers.iter().find_map(|(_, k)| {
                let entry = &body.exception_table[*k];
                hierarchy.is_subtype(ty, &entry.catch_type).then_some(entry)
            });
            match caught {
                Some(entry) => b.add(
                    here,
                    check(i, entry.handler)?,
                    EdgeKind::CaughtException(entry.catch_type.clone()),
                ),
                None => b.add(here, CfgNode::Exit, EdgeKind::UncaughtException),
            }
        }
    }

    let node_index = |node: CfgNode| match node {
        CfgNode::Entry => 0,
        CfgNode::Stmt(i) => i + 1,
        CfgNode::Exit => n + 1,
    };
    let mut out_edges = vec![Vec::new(); n + 2];
    let mut in_edges = vec![Vec::new(); n + 2];
    for (k, e) in b.edges.iter().enumerate() {
        out_edges[node_index(e.source)].push(k);
        in_edges[node_index(e.target)].push(k);
    }
    Ok(Cfg { method: body.method, stmt_count: n, mode, edges: b.edges, out_edges, in_edges })
}

#[cfg(test)]
mod tests;
