use std::collections::BTreeMap;
use std::fmt;

use super::{DataflowAnalysis, Direction};
use crate::cfg::{Cfg, CfgEdge, CfgNode, EdgeKind};
use crate::ir::{BinaryOp, Literal, MethodBody, RelOp, SemType, Stmt, UnaryOp, VarId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Value {
    Int(i32),
    Bool(bool),
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(i) => write!(f, "{i}"),
            Value::Bool(b) => write!(f, "{b}"),
        }
    }
}

/// Lattice `Undef ⊑ Const(c) ⊑ Nac`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CpValue {
    Undef,
    Const(Value),
    Nac,
}

impl CpValue {
    pub fn int(i: i32) -> Self {
        CpValue::Const(Value::Int(i))
    }

    pub fn bool(b: bool) -> Self {
        CpValue::Const(Value::Bool(b))
    }

    pub fn meet(self, other: CpValue) -> CpValue {
        match (self, other) {
            (CpValue::Undef, v) | (v, CpValue::Undef) => v,
            (CpValue::Nac, _) | (_, CpValue::Nac) => CpValue::Nac,
            (CpValue::Const(a), CpValue::Const(b)) if a == b => self,
            _ => CpValue::Nac,
        }
    }

    /// Greatest lower bound. Two distinct constants have no common value.
    fn narrow(self, other: CpValue) -> CpValue {
        match (self, other) {
            (CpValue::Undef, _) | (_, CpValue::Undef) => CpValue::Undef,
            (CpValue::Nac, v) | (v, CpValue::Nac) => v,
            (CpValue::Const(a), CpValue::Const(b)) if a == b => self,
            _ => CpValue::Undef,
        }
    }
}

impl fmt::Display for CpValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CpValue::Undef => f.write_str("UNDEF"),
            CpValue::Const(v) => write!(f, "{v}"),
            CpValue::Nac => f.write_str("NAC"),
        }
    }
}

/// Variable values; a missing key means `Undef`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CpFact(BTreeMap<VarId, CpValue>);

impl CpFact {
    pub fn get(&self, v: VarId) -> CpValue {
        self.0.get(&v).copied().unwrap_or(CpValue::Undef)
    }

    pub fn set(&mut self, v: VarId, value: CpValue) {
        if value == CpValue::Undef {
            self.0.remove(&v);
        } else {
            self.0.insert(v, value);
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (VarId, CpValue)> + '_ {
        self.0.iter().map(|(k, v)| (*k, *v))
    }

    pub fn render(&self, body: &MethodBody) -> String {
        let parts: Vec<String> = self.iter().map(|(v, c)| format!("{}={c}", body.var(v).name)).collect();
        format!("{{{}}}", parts.join(", "))
    }
}

/// Forward constant propagation over `int` and `boolean` variables. With
/// branch refinement on, the taken edge of `if a == b` (and the fall-through
/// edge of `if a != b`) narrows both operands to their common value.
pub struct ConstantPropagation<'a> {
    body: &'a MethodBody,
    refine_branches: bool,
}

impl<'a> ConstantPropagation<'a> {
    pub fn new(body: &'a MethodBody) -> Self {
        ConstantPropagation { body, refine_branches: false }
    }

    pub fn with_branch_refinement(body: &'a MethodBody) -> Self {
        ConstantPropagation { body, refine_branches: true }
    }

    fn tracked(&self, v: VarId) -> bool {
        matches!(self.body.var_type(v), SemType::Int | SemType::Boolean)
    }

    /// Value of the variable defined by `stmt`, given the fact before it.
    pub fn evaluate(&self, stmt: &Stmt, fact: &CpFact) -> CpValue {
        match stmt {
            Stmt::AssignLiteral { value: Literal::Int(i), .. } => CpValue::int(*i),
            Stmt::AssignLiteral { value: Literal::Bool(b), .. } => CpValue::bool(*b),
            Stmt::Copy { rhs, .. } if self.tracked(*rhs) => fact.get(*rhs),
            Stmt::Binary { op, op1, op2, .. } => eval_binary(*op, fact.get(*op1), fact.get(*op2)),
            Stmt::Unary { op, operand, .. } => match (op, fact.get(*operand)) {
                (_, CpValue::Undef) => CpValue::Undef,
                (UnaryOp::Neg, CpValue::Const(Value::Int(a))) => CpValue::int(a.wrapping_neg()),
                (UnaryOp::Not, CpValue::Const(Value::Bool(b))) => CpValue::bool(!b),
                _ => CpValue::Nac,
            },
            _ => CpValue::Nac,
        }
    }
}

fn eval_binary(op: BinaryOp, a: CpValue, b: CpValue) -> CpValue {
    use BinaryOp::*;
    let (a, b) = match (a, b) {
        (CpValue::Undef, _) | (_, CpValue::Undef) => return CpValue::Undef,
        (_, CpValue::Const(Value::Int(0))) if op.is_division() => return CpValue::Undef,
        (CpValue::Const(a), CpValue::Const(b)) => (a, b),
        _ => return CpValue::Nac,
    };
    match (a, b) {
        (Value::Int(x), Value::Int(y)) => match op {
            Add => CpValue::int(x.wrapping_add(y)),
            Sub => CpValue::int(x.wrapping_sub(y)),
            Mul => CpValue::int(x.wrapping_mul(y)),
            Div => CpValue::int(x.wrapping_div(y)),
            Rem => CpValue::int(x.wrapping_rem(y)),
            And => CpValue::int(x & y),
            Or => CpValue::int(x | y),
            Xor => CpValue::int(x ^ y),
            Shl => CpValue::int(x.wrapping_shl(y as u32)),
            Shr => CpValue::int(x.wrapping_shr(y as u32)),
            Eq => CpValue::bool(RelOp::Eq.eval(x, y)),
            Ne => CpValue::bool(RelOp::Ne.eval(x, y)),
            Lt => CpValue::bool(RelOp::Lt.eval(x, y)),
            Le => CpValue::bool(RelOp::Le.eval(x, y)),
            Gt => CpValue::bool(RelOp::Gt.eval(x, y)),
            Ge => CpValue::bool(RelOp::Ge.eval(x, y)),
        },
        (Value::Bool(x), Value::Bool(y)) => match op {
            And => CpValue::bool(x & y),
            Or => CpValue::bool(x | y),
            Xor | Ne => CpValue::bool(x != y),
            Eq => CpValue::bool(x == y),
            _ => CpValue::Nac,
        },
        _ => CpValue::Nac,
    }
}

impl DataflowAnalysis for ConstantPropagation<'_> {
    type Fact = CpFact;

    fn name(&self) -> &str {
        "constprop"
    }

    fn direction(&self) -> Direction {
        Direction::Forward
    }

    fn new_boundary_fact(&self, _cfg: &Cfg) -> CpFact {
        let mut fact = CpFact::default();
        for v in self.body.params.iter().chain(self.body.this_var.iter()) {
            fact.set(*v, CpValue::Nac);
        }
        fact
    }

    fn new_initial_fact(&self) -> CpFact {
        CpFact::default()
    }

    fn meet_into(&self, source: &CpFact, target: &mut CpFact) -> bool {
        let mut changed = false;
        for (v, value) in source.iter() {
            let old = target.get(v);
            let met = old.meet(value);
            if met != old {
                target.set(v, met);
                changed = true;
            }
        }
        changed
    }

    fn transfer_node(&self, node: CfgNode, input: &CpFact, output: &mut CpFact) -> bool {
        let mut fact = input.clone();
        if let CfgNode::Stmt(i) = node {
            let stmt = &self.body.stmts[i];
            if let Some(d) = stmt.def() {
                fact.set(d, self.evaluate(stmt, input));
            }
        }
        if fact != *output {
            *output = fact;
            true
        } else {
            false
        }
    }

    fn needs_edge_transfer(&self) -> bool {
        self.refine_branches
    }

    fn transfer_edge(&self, edge: &CfgEdge, node_out: &CpFact) -> CpFact {
        let CfgNode::Stmt(i) = edge.source else { return node_out.clone() };
        let Stmt::If { op, op1, op2, .. } = &self.body.stmts[i] else { return node_out.clone() };
        let equal_on_edge = matches!(
            (op, &edge.kind),
            (RelOp::Eq, EdgeKind::IfTrue) | (RelOp::Ne, EdgeKind::IfFalse)
        );
        if !equal_on_edge || !self.tracked(*op1) || !self.tracked(*op2) {
            return node_out.clone();
        }
        let mut fact = node_out.clone();
        let common = node_out.get(*op1).narrow(node_out.get(*op2));
        fact.set(*op1, common);
        fact.set(*op2, common);
        fact
    }
}
