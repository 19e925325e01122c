//! Text rendering of statements and whole programs. The program printer emits
//! source that [`parse_program`](super::parse_program) accepts.

use std::collections::BTreeSet;
use std::fmt::{self, Write as _};

use super::*;

/// Renders one statement using its body's variable names. Branch targets are
/// written as `L<index>`.
pub struct StmtDisplay<'a> {
    body: &'a MethodBody,
    stmt: &'a Stmt,
}

impl<'a> StmtDisplay<'a> {
    pub fn new(body: &'a MethodBody, stmt: &'a Stmt) -> Self {
        StmtDisplay { body, stmt }
    }

    fn name(&self, v: VarId) -> &'a str {
        &self.body.vars[v.index()].name
    }

    fn owner(&self, base: Option<VarId>, field: &'a FieldRef) -> &'a str {
        match base {
            Some(b) => self.name(b),
            None => &field.class,
        }
    }
}

impl fmt::Display for StmtDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.stmt {
            Stmt::New { lhs, ty, .. } => match ty {
                SemType::Array(elem) => write!(f, "{} = new {elem}[];", self.name(*lhs)),
                _ => write!(f, "{} = new {ty};", self.name(*lhs)),
            },
            Stmt::AssignLiteral { lhs, value } => write!(f, "{} = {value};", self.name(*lhs)),
            Stmt::Copy { lhs, rhs } => write!(f, "{} = {};", self.name(*lhs), self.name(*rhs)),
            Stmt::LoadField { lhs, base, field } => {
                write!(f, "{} = {}.{};", self.name(*lhs), self.owner(*base, field), field.name)
            }
            Stmt::StoreField { base, field, rhs } => {
                write!(f, "{}.{} = {};", self.owner(*base, field), field.name, self.name(*rhs))
            }
            Stmt::LoadArray { lhs, base } => write!(f, "{} = {}[*];", self.name(*lhs), self.name(*base)),
            Stmt::StoreArray { base, rhs } => write!(f, "{}[*] = {};", self.name(*base), self.name(*rhs)),
            Stmt::Binary { lhs, op, op1, op2 } => write!(
                f,
                "{} = {} {} {};",
                self.name(*lhs),
                self.name(*op1),
                op.symbol(),
                self.name(*op2)
            ),
            Stmt::Unary { lhs, op, operand } => {
                write!(f, "{} = {}{};", self.name(*lhs), op.symbol(), self.name(*operand))
            }
            Stmt::Cast { lhs, ty, rhs } => write!(f, "{} = ({ty}) {};", self.name(*lhs), self.name(*rhs)),
            Stmt::Invoke(inv) => {
                if let Some(r) = inv.result {
                    write!(f, "{} = ", self.name(r))?;
                }
                let target = match inv.base {
                    Some(b) => self.name(b),
                    None => &inv.method.class,
                };
                write!(f, "{} {target}.{}(", inv.kind.keyword(), inv.method.name)?;
                for (i, a) in inv.args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    f.write_str(self.name(*a))?;
                }
                f.write_str(");")
            }
            Stmt::Return { value: Some(v) } => write!(f, "return {};", self.name(*v)),
            Stmt::Return { value: None } => f.write_str("return;"),
            Stmt::If { op, op1, op2, target } => write!(
                f,
                "if {} {} {} goto L{target};",
                self.name(*op1),
                op.symbol(),
                self.name(*op2)
            ),
            Stmt::Goto { target } => write!(f, "goto L{target};"),
            Stmt::Switch { key, cases, default } => {
                write!(f, "switch {} {{", self.name(*key))?;
                for (v, t) in cases {
                    write!(f, " case {v}: L{t};")?;
                }
                write!(f, " default: L{default}; }};")
            }
            Stmt::Throw { var } => write!(f, "throw {};", self.name(*var)),
            Stmt::Catch { lhs } => write!(f, "{} = @catch;", self.name(*lhs)),
            Stmt::Nop => f.write_str("nop;"),
        }
    }
}

fn write_method(out: &mut String, m: &MethodDecl, in_interface: bool) -> fmt::Result {
    out.push_str("  ");
    if m.sig.is_static {
        out.push_str("static ");
    }
    if m.sig.is_abstract && !in_interface {
        out.push_str("abstract ");
    }
    write!(out, "{} {}(", m.sig.ret, m.sig.name)?;
    for (i, (t, n)) in m.sig.params.iter().zip(&m.param_names).enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        write!(out, "{t} {n}")?;
    }
    out.push(')');
    let Some(body) = &m.body else {
        out.push_str(";\n");
        return Ok(());
    };
    out.push_str(" {\n");
    let declared: BTreeSet<VarId> = body.params.iter().chain(body.this_var.iter()).copied().collect();
    for v in body.var_ids().filter(|v| !declared.contains(v)) {
        let var = body.var(v);
        writeln!(out, "    {} {};", var.ty, var.name)?;
    }
    let mut labelled = BTreeSet::new();
    for s in &body.stmts {
        match s {
            Stmt::If { target, .. } | Stmt::Goto { target } => {
                labelled.insert(*target);
            }
            Stmt::Switch { cases, default, .. } => {
                labelled.extend(cases.iter().map(|(_, t)| *t));
                labelled.insert(*default);
            }
            _ => {}
        }
    }
    for e in &body.exception_table {
        labelled.extend([e.start, e.end, e.handler]);
    }
    for (i, s) in body.stmts.iter().enumerate() {
        out.push_str("    ");
        if labelled.contains(&i) {
            write!(out, "L{i}: ")?;
        }
        writeln!(out, "{}", StmtDisplay::new(body, s))?;
    }
    if labelled.contains(&body.stmts.len()) {
        writeln!(out, "    L{}:", body.stmts.len())?;
    }
    for e in &body.exception_table {
        writeln!(out, "    catch ({}, L{}, L{}, L{});", e.catch_type, e.start, e.end, e.handler)?;
    }
    out.push_str("  }\n");
    Ok(())
}

impl fmt::Display for Program {
    /// Prints every user class; the built-in core is implied.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::new();
        for c in self.user_classes() {
            if c.is_interface {
                write!(out, "interface {}", c.name)?;
                if !c.interfaces.is_empty() {
                    write!(out, " extends {}", c.interfaces.join(", "))?;
                }
            } else {
                if c.is_abstract {
                    out.push_str("abstract ");
                }
                write!(out, "class {}", c.name)?;
                if let Some(s) = c.superclass.as_deref().filter(|s| *s != builtin::OBJECT) {
                    write!(out, " extends {s}")?;
                }
                if !c.interfaces.is_empty() {
                    write!(out, " implements {}", c.interfaces.join(", "))?;
                }
            }
            out.push_str(" {\n");
            for fid in &c.fields {
                let fd = self.field(*fid);
                writeln!(out, "  {}{} {};", if fd.is_static { "static " } else { "" }, fd.ty, fd.name)?;
            }
            for mid in &c.methods {
                write_method(&mut out, self.method(*mid), c.is_interface)?;
            }
            out.push_str("}\n\n");
        }
        f.write_str(&out)
    }
}
