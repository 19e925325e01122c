//! Program model for the textual three-address IR.
//!
//! A [`Program`] is produced by [`parse_program`] and is immutable afterwards.
//! Statements are a closed set of concrete variants: every operand a variant
//! has is reachable directly from it, with no catch-all expression type to
//! downcast.

mod hierarchy;
mod lexer;
mod parser;
mod printer;

use std::collections::HashMap;
use std::fmt;

pub use hierarchy::{Hierarchy, HierarchyError};
pub use parser::{parse_program, ParseError};
pub use printer::StmtDisplay;

/// Names of the classes every program gets for free.
pub mod builtin {
    pub const OBJECT: &str = "Object";
    pub const STRING: &str = "String";
    pub const THROWABLE: &str = "Throwable";
    pub const RUNTIME_EXCEPTION: &str = "RuntimeException";
    pub const ARITHMETIC_EXCEPTION: &str = "ArithmeticException";
    pub const INDEX_OUT_OF_BOUNDS: &str = "ArrayIndexOutOfBoundsException";
    pub const CLASS_CAST_EXCEPTION: &str = "ClassCastException";
    pub const NULL_POINTER_EXCEPTION: &str = "NullPointerException";
}

/// Declared type of a variable, field, or expression.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SemType {
    Int,
    Boolean,
    Class(String),
    Array(Box<SemType>),
    Null,
    Void,
}

impl SemType {
    pub fn class(name: impl Into<String>) -> Self {
        SemType::Class(name.into())
    }

    pub fn array_of(elem: SemType) -> Self {
        SemType::Array(Box::new(elem))
    }

    pub fn is_primitive(&self) -> bool {
        matches!(self, SemType::Int | SemType::Boolean)
    }

    pub fn is_reference(&self) -> bool {
        matches!(self, SemType::Class(_) | SemType::Array(_) | SemType::Null)
    }

    pub fn class_name(&self) -> Option<&str> {
        match self {
            SemType::Class(name) => Some(name),
            _ => None,
        }
    }
}

impl fmt::Display for SemType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SemType::Int => f.write_str("int"),
            SemType::Boolean => f.write_str("boolean"),
            SemType::Class(name) => f.write_str(name),
            SemType::Array(elem) => write!(f, "{elem}[]"),
            SemType::Null => f.write_str("null"),
            SemType::Void => f.write_str("void"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ClassId(pub u32);

/// Program-wide method index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MethodId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FieldId(pub u32);

/// Index of a variable within one method body.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarId(pub u32);

impl VarId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl ClassId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl MethodId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl FieldId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldDecl {
    pub class: ClassId,
    pub name: String,
    pub ty: SemType,
    pub is_static: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassDecl {
    pub id: ClassId,
    pub name: String,
    pub superclass: Option<String>,
    pub interfaces: Vec<String>,
    pub is_interface: bool,
    pub is_abstract: bool,
    /// Part of the built-in core rather than user source.
    pub is_builtin: bool,
    pub fields: Vec<FieldId>,
    pub methods: Vec<MethodId>,
}

/// Method signature: the declaring class plus its descriptor and modifiers.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MethodSig {
    pub class: String,
    pub name: String,
    pub params: Vec<SemType>,
    pub ret: SemType,
    pub is_static: bool,
    pub is_abstract: bool,
}

impl MethodSig {
    /// Whether `other` has the same name and parameter types.
    pub fn same_subsignature(&self, name: &str, params: &[SemType]) -> bool {
        self.name == name && self.params == params
    }
}

impl fmt::Display for MethodSig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}(", self.class, self.name)?;
        for (i, p) in self.params.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{p}")?;
        }
        f.write_str(")")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MethodDecl {
    pub id: MethodId,
    pub class: ClassId,
    pub sig: MethodSig,
    pub param_names: Vec<String>,
    pub body: Option<MethodBody>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Var {
    pub name: String,
    pub ty: SemType,
}

/// Symbolic reference to a field as written at a use site.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FieldRef {
    pub class: String,
    pub name: String,
}

/// Symbolic reference to a method as resolved at a call site.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MethodRef {
    pub class: String,
    pub name: String,
    pub params: Vec<SemType>,
    pub ret: SemType,
}

impl fmt::Display for MethodRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}(", self.class, self.name)?;
        for (i, p) in self.params.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{p}")?;
        }
        f.write_str(")")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Literal {
    Int(i32),
    Bool(bool),
    Null,
    Str(String),
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Literal::Int(v) => write!(f, "{v}"),
            Literal::Bool(v) => write!(f, "{v}"),
            Literal::Null => f.write_str("null"),
            Literal::Str(s) => {
                f.write_str("\"")?;
                for c in s.chars() {
                    match c {
                        '"' => f.write_str("\\\"")?,
                        '\\' => f.write_str("\\\\")?,
                        '\n' => f.write_str("\\n")?,
                        c => write!(f, "{c}")?,
                    }
                }
                f.write_str("\"")
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Rem,
    And,
    Or,
    Xor,
    Shl,
    Shr,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl BinaryOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinaryOp::Add => "+",
            BinaryOp::Sub => "-",
            BinaryOp::Mul => "*",
            BinaryOp::Div => "/",
            BinaryOp::Rem => "%",
            BinaryOp::And => "&",
            BinaryOp::Or => "|",
            BinaryOp::Xor => "^",
            BinaryOp::Shl => "<<",
            BinaryOp::Shr => ">>",
            BinaryOp::Eq => "==",
            BinaryOp::Ne => "!=",
            BinaryOp::Lt => "<",
            BinaryOp::Le => "<=",
            BinaryOp::Gt => ">",
            BinaryOp::Ge => ">=",
        }
    }

    pub fn is_comparison(self) -> bool {
        matches!(
            self,
            BinaryOp::Eq | BinaryOp::Ne | BinaryOp::Lt | BinaryOp::Le | BinaryOp::Gt | BinaryOp::Ge
        )
    }

    pub fn is_division(self) -> bool {
        matches!(self, BinaryOp::Div | BinaryOp::Rem)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnaryOp {
    Neg,
    Not,
}

impl UnaryOp {
    pub fn symbol(self) -> &'static str {
        match self {
            UnaryOp::Neg => "-",
            UnaryOp::Not => "!",
        }
    }
}

/// Relational operator of a conditional branch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RelOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl RelOp {
    pub fn symbol(self) -> &'static str {
        match self {
            RelOp::Eq => "==",
            RelOp::Ne => "!=",
            RelOp::Lt => "<",
            RelOp::Le => "<=",
            RelOp::Gt => ">",
            RelOp::Ge => ">=",
        }
    }

    pub fn eval(self, a: i32, b: i32) -> bool {
        match self {
            RelOp::Eq => a == b,
            RelOp::Ne => a != b,
            RelOp::Lt => a < b,
            RelOp::Le => a <= b,
            RelOp::Gt => a > b,
            RelOp::Ge => a >= b,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum InvokeKind {
    Static,
    Virtual,
    Special,
}

impl InvokeKind {
    pub fn keyword(self) -> &'static str {
        match self {
            InvokeKind::Static => "invokestatic",
            InvokeKind::Virtual => "invokevirtual",
            InvokeKind::Special => "invokespecial",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Invoke {
    pub kind: InvokeKind,
    pub result: Option<VarId>,
    /// Receiver; `None` exactly for static calls.
    pub base: Option<VarId>,
    pub method: MethodRef,
    pub args: Vec<VarId>,
}

/// One three-address statement.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Stmt {
    /// `x = new T;` / `x = new T[];`. `alloc` numbers allocation sites program-wide.
    New { lhs: VarId, ty: SemType, alloc: u32 },
    AssignLiteral { lhs: VarId, value: Literal },
    Copy { lhs: VarId, rhs: VarId },
    LoadField { lhs: VarId, base: Option<VarId>, field: FieldRef },
    StoreField { base: Option<VarId>, field: FieldRef, rhs: VarId },
    LoadArray { lhs: VarId, base: VarId },
    StoreArray { base: VarId, rhs: VarId },
    Binary { lhs: VarId, op: BinaryOp, op1: VarId, op2: VarId },
    Unary { lhs: VarId, op: UnaryOp, operand: VarId },
    Cast { lhs: VarId, ty: SemType, rhs: VarId },
    Invoke(Invoke),
    Return { value: Option<VarId> },
    If { op: RelOp, op1: VarId, op2: VarId, target: usize },
    Goto { target: usize },
    Switch { key: VarId, cases: Vec<(i32, usize)>, default: usize },
    Throw { var: VarId },
    Catch { lhs: VarId },
    Nop,
}

impl Stmt {
    /// The variable this statement assigns, if any.
    pub fn def(&self) -> Option<VarId> {
        match self {
            Stmt::New { lhs, .. }
            | Stmt::AssignLiteral { lhs, .. }
            | Stmt::Copy { lhs, .. }
            | Stmt::LoadField { lhs, .. }
            | Stmt::LoadArray { lhs, .. }
            | Stmt::Binary { lhs, .. }
            | Stmt::Unary { lhs, .. }
            | Stmt::Cast { lhs, .. }
            | Stmt::Catch { lhs } => Some(*lhs),
            Stmt::Invoke(inv) => inv.result,
            _ => None,
        }
    }

    /// Variables read by this statement, in operand order.
    pub fn uses(&self) -> Vec<VarId> {
        match self {
            Stmt::New { .. } | Stmt::AssignLiteral { .. } | Stmt::Catch { .. } => vec![],
            Stmt::Goto { .. } | Stmt::Nop => vec![],
            Stmt::Copy { rhs, .. } | Stmt::Cast { rhs, .. } => vec![*rhs],
            Stmt::LoadField { base, .. } => base.iter().copied().collect(),
            Stmt::StoreField { base, rhs, .. } => base.iter().copied().chain([*rhs]).collect(),
            Stmt::LoadArray { base, .. } => vec![*base],
            Stmt::StoreArray { base, rhs } => vec![*base, *rhs],
            Stmt::Binary { op1, op2, .. } => vec![*op1, *op2],
            Stmt::Unary { operand, .. } => vec![*operand],
            Stmt::Invoke(inv) => inv.base.iter().chain(inv.args.iter()).copied().collect(),
            Stmt::Return { value } => value.iter().copied().collect(),
            Stmt::If { op1, op2, .. } => vec![*op1, *op2],
            Stmt::Switch { key, .. } => vec![*key],
            Stmt::Throw { var } => vec![*var],
        }
    }

    /// Whether control never falls through to the next statement.
    pub fn is_unconditional_jump(&self) -> bool {
        matches!(
            self,
            Stmt::Goto { .. } | Stmt::Switch { .. } | Stmt::Return { .. } | Stmt::Throw { .. }
        )
    }
}

/// One row of a method's exception table. The try range is `[start, end)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ExceptionEntry {
    pub start: usize,
    pub end: usize,
    pub handler: usize,
    pub catch_type: SemType,
}

impl ExceptionEntry {
    pub fn covers(&self, index: usize) -> bool {
        self.start <= index && index < self.end
    }
}

/// Statements in which a variable plays a pointer-relevant role.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RelevantStmts {
    /// `x = v.f`
    pub loads: Vec<usize>,
    /// `v.f = x`
    pub stores: Vec<usize>,
    /// `x = v[*]`
    pub array_loads: Vec<usize>,
    /// `v[*] = x`
    pub array_stores: Vec<usize>,
    /// `r = v.m(...)`
    pub invokes: Vec<usize>,
    /// `x = v` and `x = (T) v`
    pub copies_from: Vec<usize>,
    /// `throw v`
    pub throws: Vec<usize>,
}

impl RelevantStmts {
    pub fn is_empty(&self) -> bool {
        self.loads.is_empty()
            && self.stores.is_empty()
            && self.array_loads.is_empty()
            && self.array_stores.is_empty()
            && self.invokes.is_empty()
            && self.copies_from.is_empty()
            && self.throws.is_empty()
    }

    /// Records the role `var` plays in `stmt` at `index`.
    pub fn record(index: usize, stmt: &Stmt, var: VarId, into: &mut RelevantStmts) {
        match stmt {
            Stmt::LoadField { base: Some(b), .. } if *b == var => into.loads.push(index),
            Stmt::StoreField { base: Some(b), .. } if *b == var => into.stores.push(index),
            Stmt::LoadArray { base, .. } if *base == var => into.array_loads.push(index),
            Stmt::StoreArray { base, .. } if *base == var => into.array_stores.push(index),
            Stmt::Invoke(Invoke { base: Some(b), .. }) if *b == var => into.invokes.push(index),
            Stmt::Copy { rhs, .. } | Stmt::Cast { rhs, .. } if *rhs == var => {
                into.copies_from.push(index)
            }
            Stmt::Throw { var: v } if *v == var => into.throws.push(index),
            _ => {}
        }
    }
}

/// The IR of one method.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MethodBody {
    pub method: MethodId,
    pub params: Vec<VarId>,
    pub this_var: Option<VarId>,
    pub vars: Vec<Var>,
    pub stmts: Vec<Stmt>,
    pub exception_table: Vec<ExceptionEntry>,
    relevant: Vec<RelevantStmts>,
}

impl MethodBody {
    pub(crate) fn new(
        method: MethodId,
        params: Vec<VarId>,
        this_var: Option<VarId>,
        vars: Vec<Var>,
        stmts: Vec<Stmt>,
        exception_table: Vec<ExceptionEntry>,
    ) -> Self {
        let mut relevant = vec![RelevantStmts::default(); vars.len()];
        for (index, stmt) in stmts.iter().enumerate() {
            let mut seen = Vec::new();
            for v in stmt.uses() {
                if !seen.contains(&v) {
                    seen.push(v);
                    RelevantStmts::record(index, stmt, v, &mut relevant[v.index()]);
                }
            }
        }
        MethodBody {
            method,
            params,
            this_var,
            vars,
            stmts,
            exception_table,
            relevant,
        }
    }

    pub fn var(&self, v: VarId) -> &Var {
        &self.vars[v.index()]
    }

    pub fn var_type(&self, v: VarId) -> &SemType {
        &self.vars[v.index()].ty
    }

    pub fn var_by_name(&self, name: &str) -> Option<VarId> {
        self.vars
            .iter()
            .position(|v| v.name == name)
            .map(|i| VarId(i as u32))
    }

    pub fn var_ids(&self) -> impl Iterator<Item = VarId> {
        (0..self.vars.len() as u32).map(VarId)
    }

    /// Precomputed statements where `v` is a base, receiver, or copy source.
    pub fn relevant_stmts(&self, v: VarId) -> &RelevantStmts {
        &self.relevant[v.index()]
    }

    /// Variables that appear in `return x` statements.
    pub fn return_vars(&self) -> Vec<VarId> {
        let mut out = Vec::new();
        for s in &self.stmts {
            if let Stmt::Return { value: Some(v) } = s {
                if !out.contains(v) {
                    out.push(*v);
                }
            }
        }
        out
    }

    pub fn stmt_display<'a>(&'a self, index: usize) -> StmtDisplay<'a> {
        StmtDisplay::new(self, &self.stmts[index])
    }
}

/// A parsed, fully resolved program.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Program {
    classes: Vec<ClassDecl>,
    class_index: HashMap<String, ClassId>,
    methods: Vec<MethodDecl>,
    fields: Vec<FieldDecl>,
    entry_methods: Vec<MethodId>,
    /// Direct subtypes (subclasses, subinterfaces, implementors) per class.
    direct_subtypes: Vec<Vec<ClassId>>,
}

impl Program {
    pub fn classes(&self) -> &[ClassDecl] {
        &self.classes
    }

    /// Classes written in the source, excluding the built-in core.
    pub fn user_classes(&self) -> impl Iterator<Item = &ClassDecl> {
        self.classes.iter().filter(|c| !c.is_builtin)
    }

    pub fn class(&self, name: &str) -> Option<&ClassDecl> {
        self.class_index.get(name).map(|id| &self.classes[id.index()])
    }

    pub fn class_id(&self, name: &str) -> Option<ClassId> {
        self.class_index.get(name).copied()
    }

    pub fn class_by_id(&self, id: ClassId) -> &ClassDecl {
        &self.classes[id.index()]
    }

    pub fn methods(&self) -> &[MethodDecl] {
        &self.methods
    }

    pub fn method(&self, id: MethodId) -> &MethodDecl {
        &self.methods[id.index()]
    }

    pub fn body(&self, id: MethodId) -> Option<&MethodBody> {
        self.methods[id.index()].body.as_ref()
    }

    pub fn field(&self, id: FieldId) -> &FieldDecl {
        &self.fields[id.index()]
    }

    pub fn fields(&self) -> &[FieldDecl] {
        &self.fields
    }

    /// Every static method named `main`.
    pub fn entry_methods(&self) -> &[MethodId] {
        &self.entry_methods
    }

    /// Finds a method declared directly in `class` by name and parameter types.
    pub fn find_method(&self, class: &str, name: &str, params: &[SemType]) -> Option<MethodId> {
        let c = self.class(class)?;
        c.methods
            .iter()
            .copied()
            .find(|m| self.method(*m).sig.same_subsignature(name, params))
    }

    /// Finds a method declared directly in `class` by name alone. Ambiguous
    /// overloads yield `None`.
    pub fn find_method_by_name(&self, class: &str, name: &str) -> Option<MethodId> {
        let c = self.class(class)?;
        let mut found = c
            .methods
            .iter()
            .copied()
            .filter(|m| self.method(*m).sig.name == name);
        let first = found.next()?;
        found.next().is_none().then_some(first)
    }

    pub fn hierarchy(&self) -> Hierarchy<'_> {
        Hierarchy::new(self)
    }

    pub(crate) fn direct_subtypes(&self, id: ClassId) -> &[ClassId] {
        &self.direct_subtypes[id.index()]
    }
}

#[cfg(test)]
mod tests;
