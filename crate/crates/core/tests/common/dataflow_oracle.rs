//! Round-robin fixpoints for constant propagation and liveness, written
//! against the IR directly.

use std::collections::BTreeSet;

use flowscope::cfg::{Cfg, CfgNode, EdgeKind};
use flowscope::dataflow::{CpValue, Value};
use flowscope::ir::{BinaryOp, Literal, MethodBody, RelOp, SemType, Stmt, UnaryOp, VarId};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum L {
    Bot,
    Int(i32),
    Bool(bool),
    Top,
}

impl L {
    fn join(self, o: L) -> L {
        match (self, o) {
            (L::Bot, x) | (x, L::Bot) => x,
            (a, b) if a == b => a,
            _ => L::Top,
        }
    }

    fn glb(self, o: L) -> L {
        match (self, o) {
            (L::Top, x) | (x, L::Top) => x,
            (a, b) if a == b => a,
            _ => L::Bot,
        }
    }

    pub fn from_cp(v: CpValue) -> L {
        match v {
            CpValue::Undef => L::Bot,
            CpValue::Const(Value::Int(i)) => L::Int(i),
            CpValue::Const(Value::Bool(b)) => L::Bool(b),
            CpValue::Nac => L::Top,
        }
    }
}

pub type CpFacts = Vec<L>;

fn tracked(body: &MethodBody, v: VarId) -> bool {
    matches!(body.var_type(v), SemType::Int | SemType::Boolean)
}

fn binary(op: BinaryOp, a: L, b: L) -> L {
    use BinaryOp::*;
    if a == L::Bot || b == L::Bot {
        return L::Bot;
    }
    if matches!(op, Div | Rem) && b == L::Int(0) {
        return L::Bot;
    }
    match (a, b) {
        (L::Int(x), L::Int(y)) => {
            let x64 = x as i64;
            let y64 = y as i64;
            let wrap = |v: i64| L::Int(v as i32);
            match op {
                Add => wrap(x64 + y64),
                Sub => wrap(x64 - y64),
                Mul => wrap(x64 * y64),
                Div => L::Int(x.wrapping_div(y)),
                Rem => L::Int(x.wrapping_rem(y)),
                And => L::Int(x & y),
                Or => L::Int(x | y),
                Xor => L::Int(x ^ y),
                Shl => L::Int(x.wrapping_shl(y as u32)),
                Shr => L::Int(x.wrapping_shr(y as u32)),
                Eq => L::Bool(x == y),
                Ne => L::Bool(x != y),
                Lt => L::Bool(x < y),
                Le => L::Bool(x <= y),
                Gt => L::Bool(x > y),
                Ge => L::Bool(x >= y),
            }
        }
        (L::Bool(x), L::Bool(y)) => match op {
            And => L::Bool(x && y),
            Or => L::Bool(x || y),
            Xor | Ne => L::Bool(x != y),
            Eq => L::Bool(x == y),
            _ => L::Top,
        },
        _ => L::Top,
    }
}

fn cp_transfer(body: &MethodBody, node: CfgNode, input: &CpFacts) -> CpFacts {
    let mut out = input.clone();
    let CfgNode::Stmt(i) = node else { return out };
    let stmt = &body.stmts[i];
    let Some(d) = stmt.def() else { return out };
    let get = |v: &VarId| input[v.index()];
    out[d.index()] = match stmt {
        Stmt::AssignLiteral { value: Literal::Int(k), .. } => L::Int(*k),
        Stmt::AssignLiteral { value: Literal::Bool(k), .. } => L::Bool(*k),
        Stmt::Copy { rhs, .. } if tracked(body, *rhs) => get(rhs),
        Stmt::Binary { op, op1, op2, .. } => binary(*op, get(op1), get(op2)),
        Stmt::Unary { op, operand, .. } => match (op, get(operand)) {
            (_, L::Bot) => L::Bot,
            (UnaryOp::Neg, L::Int(a)) => L::Int(a.wrapping_neg()),
            (UnaryOp::Not, L::Bool(b)) => L::Bool(!b),
            _ => L::Top,
        },
        _ => L::Top,
    };
    out
}

fn cp_edge(body: &MethodBody, source: CfgNode, kind: &EdgeKind, out: &CpFacts, refine: bool) -> CpFacts {
    let mut f = out.clone();
    if !refine {
        return f;
    }
    if let CfgNode::Stmt(i) = source {
        if let Stmt::If { op, op1, op2, .. } = &body.stmts[i] {
            let equal = matches!((op, kind), (RelOp::Eq, EdgeKind::IfTrue) | (RelOp::Ne, EdgeKind::IfFalse));
            if equal && tracked(body, *op1) && tracked(body, *op2) {
                let g = out[op1.index()].glb(out[op2.index()]);
                f[op1.index()] = g;
                f[op2.index()] = g;
            }
        }
    }
    f
}

/// Facts before and after every CFG node, indexed by node position.
pub struct Facts<F> {
    pub before: Vec<F>,
    pub after: Vec<F>,
    pub sweeps: usize,
}

pub fn constprop(body: &MethodBody, cfg: &Cfg, refine: bool) -> Facts<CpFacts> {
    let n = cfg.node_count();
    let nvars = body.vars.len();
    let mut boundary = vec![L::Bot; nvars];
    for v in body.params.iter().chain(body.this_var.iter()) {
        boundary[v.index()] = L::Top;
    }
    let mut before = vec![vec![L::Bot; nvars]; n];
    let mut after = before.clone();
    let e = cfg.node_index(cfg.entry());
    before[e] = boundary.clone();
    after[e] = boundary;
    let mut sweeps = 0;
    loop {
        sweeps += 1;
        let mut changed = false;
        for i in (0..n).filter(|i| *i != e) {
            let node = cfg.node_at(i);
            let mut input = vec![L::Bot; nvars];
            for edge in cfg.in_edges(node) {
                let f = cp_edge(body, edge.source, &edge.kind, &after[cfg.node_index(edge.source)], refine);
                for (x, y) in input.iter_mut().zip(f) {
                    *x = x.join(y);
                }
            }
            let output = cp_transfer(body, node, &input);
            changed |= input != before[i] || output != after[i];
            before[i] = input;
            after[i] = output;
        }
        if !changed {
            return Facts { before, after, sweeps };
        }
    }
}

pub fn liveness(body: &MethodBody, cfg: &Cfg) -> Facts<BTreeSet<VarId>> {
    let n = cfg.node_count();
    let x = cfg.node_index(cfg.exit());
    let mut before = vec![BTreeSet::new(); n];
    let mut after = before.clone();
    let mut sweeps = 0;
    loop {
        sweeps += 1;
        let mut changed = false;
        for i in (0..n).rev().filter(|i| *i != x) {
            let node = cfg.node_at(i);
            let out: BTreeSet<VarId> = cfg.succs(node).flat_map(|s| before[cfg.node_index(s)].clone()).collect();
            let mut live = out.clone();
            if let CfgNode::Stmt(k) = node {
                let s = &body.stmts[k];
                if let Some(d) = s.def() {
                    live.remove(&d);
                }
                live.extend(s.uses());
            }
            changed |= out != after[i] || live != before[i];
            after[i] = out;
            before[i] = live;
        }
        if !changed {
            return Facts { before, after, sweeps };
        }
    }
}
