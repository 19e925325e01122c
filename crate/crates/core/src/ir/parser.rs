//! Front end: tokens to syntax tree, then name resolution into a [`Program`].

use std::collections::{HashMap, HashSet};

use thiserror::Error;

use super::lexer::{tokenize, Tok, Token};
use super::*;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("syntax error at {line}:{col}: {message}")]
    Syntax { line: usize, col: usize, message: String },
    #[error("unresolved {kind} `{name}` at line {line}")]
    Unresolved { kind: &'static str, name: String, line: usize },
    #[error("inheritance cycle through class `{0}`")]
    InheritanceCycle(String),
    #[error("invalid program at line {line}: {message}")]
    Invalid { line: usize, message: String },
}

const PRELUDE: &str = r#"
class Object { }
class String {
  String concat(String other) { return this; }
}
class Throwable { }
class RuntimeException extends Throwable { }
class ArithmeticException extends RuntimeException { }
class ArrayIndexOutOfBoundsException extends RuntimeException { }
class ClassCastException extends RuntimeException { }
class NullPointerException extends RuntimeException { }
"#;

const KEYWORDS: &[&str] = &[
    "class", "interface", "extends", "implements", "static", "abstract", "new", "return", "if",
    "goto", "switch", "case", "default", "throw", "catch", "invokestatic", "invokevirtual",
    "invokespecial", "true", "false", "null", "nop", "int", "boolean", "void",
];

#[derive(Debug, Clone)]
struct TypeAst {
    base: String,
    dims: usize,
    line: usize,
}

#[derive(Debug)]
struct FieldAst {
    is_static: bool,
    ty: TypeAst,
    name: String,
    line: usize,
}

#[derive(Debug)]
struct MethodAst {
    is_static: bool,
    is_abstract: bool,
    ret: TypeAst,
    name: String,
    params: Vec<(TypeAst, String)>,
    body: Option<BodyAst>,
    line: usize,
}

#[derive(Debug)]
struct ClassAst {
    name: String,
    superclass: Option<String>,
    interfaces: Vec<String>,
    is_interface: bool,
    is_abstract: bool,
    is_builtin: bool,
    fields: Vec<FieldAst>,
    methods: Vec<MethodAst>,
    line: usize,
}

#[derive(Debug, Default)]
struct BodyAst {
    decls: Vec<(TypeAst, String, usize)>,
    stmts: Vec<StmtAst>,
    /// Labels that follow the last statement; they denote the end position.
    trailing_labels: Vec<String>,
    catches: Vec<CatchAst>,
}

#[derive(Debug)]
struct CatchAst {
    ty: TypeAst,
    start: String,
    end: String,
    handler: String,
    line: usize,
}

#[derive(Debug)]
struct StmtAst {
    labels: Vec<String>,
    kind: StmtAstKind,
    line: usize,
}

#[derive(Debug)]
enum StmtAstKind {
    New { lhs: String, ty: TypeAst },
    Literal { lhs: String, value: LitAst },
    Copy { lhs: String, rhs: String },
    LoadField { lhs: String, owner: String, field: String },
    StoreField { owner: String, field: String, rhs: String },
    LoadArray { lhs: String, base: String },
    StoreArray { base: String, rhs: String },
    Binary { lhs: String, op: BinaryOp, a: String, b: String },
    Unary { lhs: String, op: UnaryOp, operand: String },
    Cast { lhs: String, ty: TypeAst, rhs: String },
    Invoke { kind: InvokeKind, result: Option<String>, target: String, name: String, args: Vec<String> },
    Return(Option<String>),
    If { op: RelOp, a: String, b: String, label: String },
    Goto(String),
    Switch { key: String, cases: Vec<(i64, String)>, default: String },
    Throw(String),
    Catch(String),
    Nop,
}

#[derive(Debug)]
enum LitAst {
    Int(i64),
    Bool(bool),
    Null,
    Str(String),
}

struct Cursor {
    toks: Vec<Token>,
    pos: usize,
    last_line: usize,
}

impl Cursor {
    fn new(toks: Vec<Token>) -> Self {
        let last_line = toks.last().map(|t| t.line).unwrap_or(1);
        Cursor { toks, pos: 0, last_line }
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn peek_at(&self, offset: usize) -> Option<&Tok> {
        self.toks.get(self.pos + offset).map(|t| &t.tok)
    }

    fn line(&self) -> usize {
        self.toks.get(self.pos).map(|t| t.line).unwrap_or(self.last_line)
    }

    fn error(&self, message: impl Into<String>) -> ParseError {
        let (line, col) = match self.toks.get(self.pos) {
            Some(t) => (t.line, t.col),
            None => (self.last_line, 0),
        };
        ParseError::Syntax { line, col, message: message.into() }
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|t| t.tok.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn is_punct(&self, p: &str) -> bool {
        matches!(self.peek(), Some(Tok::Punct(q)) if *q == p)
    }

    fn is_punct_at(&self, offset: usize, p: &str) -> bool {
        matches!(self.peek_at(offset), Some(Tok::Punct(q)) if *q == p)
    }

    fn is_word(&self, w: &str) -> bool {
        matches!(self.peek(), Some(Tok::Ident(s)) if s == w)
    }

    fn eat_punct(&mut self, p: &str) -> bool {
        if self.is_punct(p) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn eat_word(&mut self, w: &str) -> bool {
        if self.is_word(w) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_punct(&mut self, p: &str) -> Result<(), ParseError> {
        if self.eat_punct(p) {
            Ok(())
        } else {
            Err(self.error(format!("expected `{p}`, found {}", self.describe())))
        }
    }

    fn expect_word(&mut self, w: &str) -> Result<(), ParseError> {
        if self.eat_word(w) {
            Ok(())
        } else {
            Err(self.error(format!("expected `{w}`, found {}", self.describe())))
        }
    }

    fn describe(&self) -> String {
        match self.peek() {
            None => "end of input".into(),
            Some(Tok::Ident(s)) => format!("`{s}`"),
            Some(Tok::Int(v)) => format!("`{v}`"),
            Some(Tok::Str(s)) => format!("\"{s}\""),
            Some(Tok::Punct(p)) => format!("`{p}`"),
        }
    }

    /// A non-keyword identifier.
    fn name(&mut self) -> Result<String, ParseError> {
        match self.peek() {
            Some(Tok::Ident(s)) if !KEYWORDS.contains(&s.as_str()) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => Err(self.error(format!("expected identifier, found {}", self.describe()))),
        }
    }

    /// A variable operand; `this` is allowed.
    fn operand(&mut self) -> Result<String, ParseError> {
        self.name()
    }

    fn ty(&mut self) -> Result<TypeAst, ParseError> {
        let line = self.line();
        let base = match self.peek() {
            Some(Tok::Ident(s)) if s == "int" || s == "boolean" || s == "void" => {
                let s = s.clone();
                self.pos += 1;
                s
            }
            _ => self.name()?,
        };
        let mut dims = 0;
        while self.is_punct("[") && self.is_punct_at(1, "]") {
            self.pos += 2;
            dims += 1;
        }
        Ok(TypeAst { base, dims, line })
    }

    /// Whether a type name followed by an identifier starts here (a declaration).
    fn looks_like_decl(&self) -> bool {
        let mut i = 0;
        match self.peek_at(i) {
            Some(Tok::Ident(s)) if s == "int" || s == "boolean" => {}
            Some(Tok::Ident(s)) if !KEYWORDS.contains(&s.as_str()) => {}
            _ => return false,
        }
        i += 1;
        while self.is_punct_at(i, "[") && self.is_punct_at(i + 1, "]") {
            i += 2;
        }
        matches!(self.peek_at(i), Some(Tok::Ident(s)) if !KEYWORDS.contains(&s.as_str()))
            && self.is_punct_at(i + 1, ";")
    }
}

fn parse_classes(src: &str, is_builtin: bool) -> Result<Vec<ClassAst>, ParseError> {
    let mut cur = Cursor::new(tokenize(src)?);
    let mut out = Vec::new();
    while cur.peek().is_some() {
        out.push(parse_class(&mut cur, is_builtin)?);
    }
    Ok(out)
}

fn parse_class(cur: &mut Cursor, is_builtin: bool) -> Result<ClassAst, ParseError> {
    let line = cur.line();
    let is_abstract = cur.eat_word("abstract");
    let is_interface = if cur.eat_word("interface") {
        true
    } else if cur.eat_word("class") {
        false
    } else {
        return Err(cur.error(format!("expected `class` or `interface`, found {}", cur.describe())));
    };
    let name = cur.name()?;
    let mut superclass = None;
    let mut interfaces = Vec::new();
    if cur.eat_word("extends") {
        if is_interface {
            interfaces.push(cur.name()?);
            while cur.eat_punct(",") {
                interfaces.push(cur.name()?);
            }
        } else {
            superclass = Some(cur.name()?);
        }
    }
    if !is_interface && cur.eat_word("implements") {
        interfaces.push(cur.name()?);
        while cur.eat_punct(",") {
            interfaces.push(cur.name()?);
        }
    }
    cur.expect_punct("{")?;
    let mut fields = Vec::new();
    let mut methods = Vec::new();
    while !cur.eat_punct("}") {
        if cur.peek().is_none() {
            return Err(cur.error(format!("unterminated body of `{name}`")));
        }
        let member_line = cur.line();
        let mut is_static = false;
        let mut is_abstract_member = is_interface;
        loop {
            if cur.eat_word("static") {
                is_static = true;
            } else if cur.eat_word("abstract") {
                is_abstract_member = true;
            } else {
                break;
            }
        }
        let ty = cur.ty()?;
        let member = cur.name()?;
        if cur.eat_punct(";") {
            if is_interface {
                return Err(ParseError::Invalid {
                    line: member_line,
                    message: format!("interface `{name}` cannot declare field `{member}`"),
                });
            }
            fields.push(FieldAst { is_static, ty, name: member, line: member_line });
            continue;
        }
        cur.expect_punct("(")?;
        let mut params = Vec::new();
        if !cur.eat_punct(")") {
            loop {
                let pty = cur.ty()?;
                let pname = cur.name()?;
                params.push((pty, pname));
                if cur.eat_punct(")") {
                    break;
                }
                cur.expect_punct(",")?;
            }
        }
        let body = if is_abstract_member {
            cur.expect_punct(";")?;
            None
        } else {
            Some(parse_body(cur)?)
        };
        methods.push(MethodAst {
            is_static,
            is_abstract: is_abstract_member,
            ret: ty,
            name: member,
            params,
            body,
            line: member_line,
        });
    }
    Ok(ClassAst {
        name,
        superclass,
        interfaces,
        is_interface,
        is_abstract: is_abstract || is_interface,
        is_builtin,
        fields,
        methods,
        line,
    })
}

fn parse_body(cur: &mut Cursor) -> Result<BodyAst, ParseError> {
    cur.expect_punct("{")?;
    let mut body = BodyAst::default();
    while cur.looks_like_decl() {
        let line = cur.line();
        let ty = cur.ty()?;
        let name = cur.name()?;
        cur.expect_punct(";")?;
        body.decls.push((ty, name, line));
    }
    let mut labels = Vec::new();
    loop {
        if cur.eat_punct("}") {
            body.trailing_labels = labels;
            return Ok(body);
        }
        if cur.peek().is_none() {
            return Err(cur.error("unterminated method body"));
        }
        if cur.is_word("catch") && cur.is_punct_at(1, "(") {
            if !labels.is_empty() {
                return Err(cur.error("label before catch table entry"));
            }
            body.catches.push(parse_catch(cur)?);
            continue;
        }
        if !body.catches.is_empty() {
            return Err(cur.error("statements may not follow the catch table"));
        }
        if matches!(cur.peek(), Some(Tok::Ident(_))) && cur.is_punct_at(1, ":") {
            labels.push(cur.name()?);
            cur.expect_punct(":")?;
            continue;
        }
        if cur.looks_like_decl() {
            return Err(cur.error("declarations must precede statements"));
        }
        let line = cur.line();
        let kind = parse_stmt(cur)?;
        body.stmts.push(StmtAst { labels: std::mem::take(&mut labels), kind, line });
    }
}

fn parse_catch(cur: &mut Cursor) -> Result<CatchAst, ParseError> {
    let line = cur.line();
    cur.expect_word("catch")?;
    cur.expect_punct("(")?;
    let ty = cur.ty()?;
    cur.expect_punct(",")?;
    let start = cur.name()?;
    cur.expect_punct(",")?;
    let end = cur.name()?;
    cur.expect_punct(",")?;
    let handler = cur.name()?;
    cur.expect_punct(")")?;
    cur.expect_punct(";")?;
    Ok(CatchAst { ty, start, end, handler, line })
}

fn parse_invoke(cur: &mut Cursor, result: Option<String>) -> Result<StmtAstKind, ParseError> {
    let kind = if cur.eat_word("invokestatic") {
        InvokeKind::Static
    } else if cur.eat_word("invokevirtual") {
        InvokeKind::Virtual
    } else if cur.eat_word("invokespecial") {
        InvokeKind::Special
    } else {
        return Err(cur.error("expected invoke keyword"));
    };
    let target = cur.operand()?;
    cur.expect_punct(".")?;
    let name = cur.name()?;
    cur.expect_punct("(")?;
    let mut args = Vec::new();
    if !cur.eat_punct(")") {
        loop {
            args.push(cur.operand()?);
            if cur.eat_punct(")") {
                break;
            }
            cur.expect_punct(",")?;
        }
    }
    cur.expect_punct(";")?;
    Ok(StmtAstKind::Invoke { kind, result, target, name, args })
}

fn binary_op(p: &str) -> Option<BinaryOp> {
    Some(match p {
        "+" => BinaryOp::Add,
        "-" => BinaryOp::Sub,
        "*" => BinaryOp::Mul,
        "/" => BinaryOp::Div,
        "%" => BinaryOp::Rem,
        "&" => BinaryOp::And,
        "|" => BinaryOp::Or,
        "^" => BinaryOp::Xor,
        "<<" => BinaryOp::Shl,
        ">>" => BinaryOp::Shr,
        "==" => BinaryOp::Eq,
        "!=" => BinaryOp::Ne,
        "<" => BinaryOp::Lt,
        "<=" => BinaryOp::Le,
        ">" => BinaryOp::Gt,
        ">=" => BinaryOp::Ge,
        _ => return None,
    })
}

fn rel_op(p: &str) -> Option<RelOp> {
    Some(match p {
        "==" => RelOp::Eq,
        "!=" => RelOp::Ne,
        "<" => RelOp::Lt,
        "<=" => RelOp::Le,
        ">" => RelOp::Gt,
        ">=" => RelOp::Ge,
        _ => return None,
    })
}

fn parse_stmt(cur: &mut Cursor) -> Result<StmtAstKind, ParseError> {
    if cur.is_word("invokestatic") || cur.is_word("invokevirtual") || cur.is_word("invokespecial") {
        return parse_invoke(cur, None);
    }
    if cur.eat_word("nop") {
        cur.expect_punct(";")?;
        return Ok(StmtAstKind::Nop);
    }
    if cur.eat_word("return") {
        let value = if cur.eat_punct(";") {
            None
        } else {
            let v = cur.operand()?;
            cur.expect_punct(";")?;
            Some(v)
        };
        return Ok(StmtAstKind::Return(value));
    }
    if cur.eat_word("goto") {
        let label = cur.name()?;
        cur.expect_punct(";")?;
        return Ok(StmtAstKind::Goto(label));
    }
    if cur.eat_word("throw") {
        let v = cur.operand()?;
        cur.expect_punct(";")?;
        return Ok(StmtAstKind::Throw(v));
    }
    if cur.eat_word("if") {
        let a = cur.operand()?;
        let op = match cur.next() {
            Some(Tok::Punct(p)) => rel_op(p),
            _ => None,
        }
        .ok_or_else(|| cur.error("expected relational operator"))?;
        let b = cur.operand()?;
        cur.expect_word("goto")?;
        let label = cur.name()?;
        cur.expect_punct(";")?;
        return Ok(StmtAstKind::If { op, a, b, label });
    }
    if cur.eat_word("switch") {
        let key = cur.operand()?;
        cur.expect_punct("{")?;
        let mut cases = Vec::new();
        let mut default = None;
        while !cur.eat_punct("}") {
            if cur.eat_word("case") {
                let neg = cur.eat_punct("-");
                let value = match cur.next() {
                    Some(Tok::Int(v)) => if neg { -v } else { v },
                    _ => return Err(cur.error("expected integer case value")),
                };
                cur.expect_punct(":")?;
                let label = cur.name()?;
                cur.expect_punct(";")?;
                cases.push((value, label));
            } else if cur.eat_word("default") {
                cur.expect_punct(":")?;
                default = Some(cur.name()?);
                cur.expect_punct(";")?;
            } else {
                return Err(cur.error(format!("expected `case` or `default`, found {}", cur.describe())));
            }
        }
        cur.expect_punct(";")?;
        let default = default.ok_or_else(|| cur.error("switch without default target"))?;
        return Ok(StmtAstKind::Switch { key, cases, default });
    }

    let first = cur.operand()?;
    if cur.eat_punct(".") {
        // y.f = x;  or  C.f = x;
        let field = cur.name()?;
        cur.expect_punct("=")?;
        let rhs = cur.operand()?;
        cur.expect_punct(";")?;
        return Ok(StmtAstKind::StoreField { owner: first, field, rhs });
    }
    if cur.eat_punct("[") {
        cur.expect_punct("*")?;
        cur.expect_punct("]")?;
        cur.expect_punct("=")?;
        let rhs = cur.operand()?;
        cur.expect_punct(";")?;
        return Ok(StmtAstKind::StoreArray { base: first, rhs });
    }
    cur.expect_punct("=")?;
    let lhs = first;

    if cur.is_word("invokestatic") || cur.is_word("invokevirtual") || cur.is_word("invokespecial") {
        return parse_invoke(cur, Some(lhs));
    }
    let kind = if cur.eat_word("new") {
        let ty = cur.ty()?;
        if ty.base == "void" {
            return Err(cur.error("cannot allocate `void`"));
        }
        StmtAstKind::New { lhs, ty }
    } else if cur.eat_punct("@") {
        cur.expect_word("catch")?;
        StmtAstKind::Catch(lhs)
    } else if cur.eat_word("true") {
        StmtAstKind::Literal { lhs, value: LitAst::Bool(true) }
    } else if cur.eat_word("false") {
        StmtAstKind::Literal { lhs, value: LitAst::Bool(false) }
    } else if cur.eat_word("null") {
        StmtAstKind::Literal { lhs, value: LitAst::Null }
    } else if let Some(Tok::Int(v)) = cur.peek().cloned() {
        cur.pos += 1;
        StmtAstKind::Literal { lhs, value: LitAst::Int(v) }
    } else if let Some(Tok::Str(s)) = cur.peek().cloned() {
        cur.pos += 1;
        StmtAstKind::Literal { lhs, value: LitAst::Str(s) }
    } else if cur.is_punct("-") && matches!(cur.peek_at(1), Some(Tok::Int(_))) {
        cur.pos += 1;
        let Some(Tok::Int(v)) = cur.next() else { unreachable!() };
        StmtAstKind::Literal { lhs, value: LitAst::Int(-v) }
    } else if cur.eat_punct("-") {
        StmtAstKind::Unary { lhs, op: UnaryOp::Neg, operand: cur.operand()? }
    } else if cur.eat_punct("!") {
        StmtAstKind::Unary { lhs, op: UnaryOp::Not, operand: cur.operand()? }
    } else if cur.eat_punct("(") {
        let ty = cur.ty()?;
        cur.expect_punct(")")?;
        StmtAstKind::Cast { lhs, ty, rhs: cur.operand()? }
    } else {
        let a = cur.operand()?;
        if cur.eat_punct(".") {
            StmtAstKind::LoadField { lhs, owner: a, field: cur.name()? }
        } else if cur.eat_punct("[") {
            cur.expect_punct("*")?;
            cur.expect_punct("]")?;
            StmtAstKind::LoadArray { lhs, base: a }
        } else if let Some(Tok::Punct(p)) = cur.peek() {
            if let Some(op) = binary_op(p) {
                cur.pos += 1;
                StmtAstKind::Binary { lhs, op, a, b: cur.operand()? }
            } else {
                StmtAstKind::Copy { lhs, rhs: a }
            }
        } else {
            StmtAstKind::Copy { lhs, rhs: a }
        }
    };
    cur.expect_punct(";")?;
    Ok(kind)
}

/// Parses IR source text into a resolved [`Program`].
///
/// The built-in core classes (`Object`, `String`, `Throwable` and the
/// runtime exception types) are always present and may not be redeclared.
pub fn parse_program(text: &str) -> Result<Program, ParseError> {
    let mut asts = parse_classes(PRELUDE, true)?;
    asts.extend(parse_classes(text, false)?);
    Resolver::default().resolve(asts)
}

#[derive(Default)]
struct Resolver {
    class_index: HashMap<String, ClassId>,
}

impl Resolver {
    fn resolve_type(&self, ty: &TypeAst, allow_void: bool) -> Result<SemType, ParseError> {
        let mut t = match ty.base.as_str() {
            "int" => SemType::Int,
            "boolean" => SemType::Boolean,
            "void" => {
                if !allow_void || ty.dims > 0 {
                    return Err(ParseError::Invalid {
                        line: ty.line,
                        message: "`void` is only valid as a return type".into(),
                    });
                }
                SemType::Void
            }
            name => {
                if !self.class_index.contains_key(name) {
                    return Err(ParseError::Unresolved { kind: "type", name: name.into(), line: ty.line });
                }
                SemType::Class(name.into())
            }
        };
        for _ in 0..ty.dims {
            t = SemType::array_of(t);
        }
        Ok(t)
    }

    fn resolve(mut self, asts: Vec<ClassAst>) -> Result<Program, ParseError> {
        for (i, c) in asts.iter().enumerate() {
            if KEYWORDS.contains(&c.name.as_str()) {
                return Err(ParseError::Invalid { line: c.line, message: format!("`{}` is reserved", c.name) });
            }
            if self.class_index.insert(c.name.clone(), ClassId(i as u32)).is_some() {
                return Err(ParseError::Invalid {
                    line: c.line,
                    message: format!("duplicate class `{}`", c.name),
                });
            }
        }

        let mut classes = Vec::with_capacity(asts.len());
        for (i, c) in asts.iter().enumerate() {
            let superclass = match (&c.superclass, c.is_interface, c.name == builtin::OBJECT) {
                (_, true, _) | (None, false, true) => None,
                (None, false, false) => Some(builtin::OBJECT.to_string()),
                (Some(s), false, _) => Some(s.clone()),
            };
            if let Some(s) = &superclass {
                let Some(sid) = self.class_index.get(s) else {
                    return Err(ParseError::Unresolved { kind: "class", name: s.clone(), line: c.line });
                };
                if asts[sid.index()].is_interface {
                    return Err(ParseError::Invalid {
                        line: c.line,
                        message: format!("class `{}` cannot extend interface `{s}`", c.name),
                    });
                }
            }
            for iface in &c.interfaces {
                let Some(iid) = self.class_index.get(iface) else {
                    return Err(ParseError::Unresolved { kind: "interface", name: iface.clone(), line: c.line });
                };
                if !asts[iid.index()].is_interface {
                    return Err(ParseError::Invalid {
                        line: c.line,
                        message: format!("`{iface}` is not an interface"),
                    });
                }
            }
            classes.push(ClassDecl {
                id: ClassId(i as u32),
                name: c.name.clone(),
                superclass,
                interfaces: c.interfaces.clone(),
                is_interface: c.is_interface,
                is_abstract: c.is_abstract,
                is_builtin: c.is_builtin,
                fields: Vec::new(),
                methods: Vec::new(),
            });
        }
        self.check_cycles(&classes)?;

        let mut direct_subtypes = vec![Vec::new(); classes.len()];
        for c in &classes {
            for sup in c.superclass.iter().chain(c.interfaces.iter()) {
                direct_subtypes[self.class_index[sup].index()].push(c.id);
            }
        }

        let mut fields = Vec::new();
        let mut methods = Vec::new();
        for (i, c) in asts.iter().enumerate() {
            let mut seen = HashSet::new();
            for f in &c.fields {
                if !seen.insert(f.name.clone()) {
                    return Err(ParseError::Invalid {
                        line: f.line,
                        message: format!("duplicate field `{}` in `{}`", f.name, c.name),
                    });
                }
                let ty = self.resolve_type(&f.ty, false)?;
                classes[i].fields.push(FieldId(fields.len() as u32));
                fields.push(FieldDecl { class: ClassId(i as u32), name: f.name.clone(), ty, is_static: f.is_static });
            }
            let mut sigs: Vec<(String, Vec<SemType>)> = Vec::new();
            for m in &c.methods {
                let params = m
                    .params
                    .iter()
                    .map(|(t, _)| self.resolve_type(t, false))
                    .collect::<Result<Vec<_>, _>>()?;
                let ret = self.resolve_type(&m.ret, true)?;
                if sigs.iter().any(|(n, p)| *n == m.name && *p == params) {
                    return Err(ParseError::Invalid {
                        line: m.line,
                        message: format!("duplicate method `{}` in `{}`", m.name, c.name),
                    });
                }
                if m.is_abstract && !c.is_abstract {
                    return Err(ParseError::Invalid {
                        line: m.line,
                        message: format!("abstract method `{}` in concrete class `{}`", m.name, c.name),
                    });
                }
                if m.is_abstract && m.is_static {
                    return Err(ParseError::Invalid {
                        line: m.line,
                        message: format!("method `{}` cannot be both static and abstract", m.name),
                    });
                }
                sigs.push((m.name.clone(), params.clone()));
                let id = MethodId(methods.len() as u32);
                classes[i].methods.push(id);
                methods.push(MethodDecl {
                    id,
                    class: ClassId(i as u32),
                    sig: MethodSig {
                        class: c.name.clone(),
                        name: m.name.clone(),
                        params,
                        ret,
                        is_static: m.is_static,
                        is_abstract: m.is_abstract,
                    },
                    param_names: m.params.iter().map(|(_, n)| n.clone()).collect(),
                    body: None,
                });
            }
        }

        let entry_methods = methods
            .iter()
            .filter(|m| m.sig.is_static && m.sig.name == "main" && !classes[m.class.index()].is_builtin)
            .map(|m| m.id)
            .collect();

        let mut program = Program {
            classes,
            class_index: self.class_index.clone(),
            methods,
            fields,
            entry_methods,
            direct_subtypes,
        };

        let mut bodies = Vec::new();
        let mut next_alloc = 0u32;
        let mut method_id = 0u32;
        for c in &asts {
            for m in &c.methods {
                let id = MethodId(method_id);
                method_id += 1;
                if let Some(body) = &m.body {
                    let resolved = BodyResolver::new(&self, &program, id, m, &mut next_alloc)?.resolve(body)?;
                    bodies.push((id, resolved));
                }
            }
        }
        for (id, body) in bodies {
            program.methods[id.index()].body = Some(body);
        }
        Ok(program)
    }

    fn check_cycles(&self, classes: &[ClassDecl]) -> Result<(), ParseError> {
        // 0 = unvisited, 1 = on stack, 2 = done
        fn visit(id: usize, classes: &[ClassDecl], index: &HashMap<String, ClassId>, state: &mut [u8]) -> Result<(), ParseError> {
            match state[id] {
                1 => return Err(ParseError::InheritanceCycle(classes[id].name.clone())),
                2 => return Ok(()),
                _ => {}
            }
            state[id] = 1;
            let c = &classes[id];
            for sup in c.superclass.iter().chain(c.interfaces.iter()) {
                visit(index[sup].index(), classes, index, state)?;
            }
            state[id] = 2;
            Ok(())
        }
        let mut state = vec![0u8; classes.len()];
        for i in 0..classes.len() {
            visit(i, classes, &self.class_index, &mut state)?;
        }
        Ok(())
    }
}

struct BodyResolver<'a> {
    resolver: &'a Resolver,
    program: &'a Program,
    method: MethodId,
    ast: &'a MethodAst,
    vars: Vec<Var>,
    names: HashMap<String, VarId>,
    params: Vec<VarId>,
    this_var: Option<VarId>,
    next_alloc: &'a mut u32,
}

impl<'a> BodyResolver<'a> {
    fn new(
        resolver: &'a Resolver,
        program: &'a Program,
        method: MethodId,
        ast: &'a MethodAst,
        next_alloc: &'a mut u32,
    ) -> Result<Self, ParseError> {
        let mut r = BodyResolver {
            resolver,
            program,
            method,
            ast,
            vars: Vec::new(),
            names: HashMap::new(),
            params: Vec::new(),
            this_var: None,
            next_alloc,
        };
        let decl = program.method(method);
        if !decl.sig.is_static {
            let this = r.declare("this", SemType::Class(decl.sig.class.clone()), ast.line)?;
            r.this_var = Some(this);
        }
        for ((_, name), ty) in ast.params.iter().zip(decl.sig.params.clone()) {
            let v = r.declare(name, ty, ast.line)?;
            r.params.push(v);
        }
        Ok(r)
    }

    fn declare(&mut self, name: &str, ty: SemType, line: usize) -> Result<VarId, ParseError> {
        if self.names.contains_key(name) {
            return Err(ParseError::Invalid { line, message: format!("duplicate variable `{name}`") });
        }
        if self.resolver.class_index.contains_key(name) {
            return Err(ParseError::Invalid {
                line,
                message: format!("variable `{name}` shadows a class name"),
            });
        }
        let id = VarId(self.vars.len() as u32);
        self.vars.push(Var { name: name.into(), ty });
        self.names.insert(name.into(), id);
        Ok(id)
    }

    fn var(&self, name: &str, line: usize) -> Result<VarId, ParseError> {
        self.names
            .get(name)
            .copied()
            .ok_or_else(|| ParseError::Unresolved { kind: "variable", name: name.into(), line })
    }

    fn class_type_of(&self, v: VarId, line: usize) -> Result<String, ParseError> {
        match &self.vars[v.index()].ty {
            SemType::Class(c) => Ok(c.clone()),
            other => Err(ParseError::Invalid {
                line,
                message: format!("`{}` has non-class type `{other}`", self.vars[v.index()].name),
            }),
        }
    }

    fn field_ref(&self, owner: &str, field: &str, line: usize) -> Result<(Option<VarId>, FieldRef), ParseError> {
        let h = self.program.hierarchy();
        let (base, class, want_static) = match self.names.get(owner) {
            Some(&v) => (Some(v), self.class_type_of(v, line)?, false),
            None if self.resolver.class_index.contains_key(owner) => (None, owner.to_string(), true),
            None => return Err(ParseError::Unresolved { kind: "variable", name: owner.into(), line }),
        };
        let fref = FieldRef { class, name: field.into() };
        let fid = h.resolve_field(&fref).map_err(|_| ParseError::Unresolved {
            kind: "field",
            name: format!("{}.{}", fref.class, fref.name),
            line,
        })?;
        if self.program.field(fid).is_static != want_static {
            return Err(ParseError::Invalid {
                line,
                message: format!(
                    "field `{}.{}` is {}static",
                    fref.class,
                    fref.name,
                    if want_static { "not " } else { "" }
                ),
            });
        }
        Ok((base, fref))
    }

    fn literal(&self, lit: &LitAst, line: usize) -> Result<Literal, ParseError> {
        Ok(match lit {
            LitAst::Int(v) => Literal::Int(i32::try_from(*v).map_err(|_| ParseError::Invalid {
                line,
                message: format!("integer literal {v} does not fit in 32 bits"),
            })?),
            LitAst::Bool(b) => Literal::Bool(*b),
            LitAst::Null => Literal::Null,
            LitAst::Str(s) => Literal::Str(s.clone()),
        })
    }

    fn resolve(mut self, body: &BodyAst) -> Result<MethodBody, ParseError> {
        for (ty, name, line) in &body.decls {
            let t = self.resolver.resolve_type(ty, false)?;
            self.declare(name, t, *line)?;
        }
        let mut labels: HashMap<String, usize> = HashMap::new();
        for (i, s) in body.stmts.iter().enumerate() {
            for l in &s.labels {
                if labels.insert(l.clone(), i).is_some() {
                    return Err(ParseError::Invalid { line: s.line, message: format!("duplicate label `{l}`") });
                }
            }
        }
        let end = body.stmts.len();
        for l in &body.trailing_labels {
            if labels.insert(l.clone(), end).is_some() {
                return Err(ParseError::Invalid { line: self.ast.line, message: format!("duplicate label `{l}`") });
            }
        }
        let target = |l: &str, line: usize| -> Result<usize, ParseError> {
            match labels.get(l) {
                Some(&i) if i < end => Ok(i),
                Some(_) => Err(ParseError::Invalid { line, message: format!("label `{l}` does not mark a statement") }),
                None => Err(ParseError::Unresolved { kind: "label", name: l.into(), line }),
            }
        };

        let decl = self.program.method(self.method);
        let ret_ty = decl.sig.ret.clone();
        let mut stmts = Vec::with_capacity(body.stmts.len());
        for s in &body.stmts {
            let line = s.line;
            let stmt = match &s.kind {
                StmtAstKind::New { lhs, ty } => {
                    let ty = self.resolver.resolve_type(ty, false)?;
                    if ty.is_primitive() {
                        return Err(ParseError::Invalid { line, message: format!("cannot allocate primitive `{ty}`") });
                    }
                    let alloc = *self.next_alloc;
                    *self.next_alloc += 1;
                    Stmt::New { lhs: self.var(lhs, line)?, ty, alloc }
                }
                StmtAstKind::Literal { lhs, value } => {
                    Stmt::AssignLiteral { lhs: self.var(lhs, line)?, value: self.literal(value, line)? }
                }
                StmtAstKind::Copy { lhs, rhs } => Stmt::Copy { lhs: self.var(lhs, line)?, rhs: self.var(rhs, line)? },
                StmtAstKind::LoadField { lhs, owner, field } => {
                    let lhs = self.var(lhs, line)?;
                    let (base, field) = self.field_ref(owner, field, line)?;
                    Stmt::LoadField { lhs, base, field }
                }
                StmtAstKind::StoreField { owner, field, rhs } => {
                    let (base, field) = self.field_ref(owner, field, line)?;
                    Stmt::StoreField { base, field, rhs: self.var(rhs, line)? }
                }
                StmtAstKind::LoadArray { lhs, base } => {
                    Stmt::LoadArray { lhs: self.var(lhs, line)?, base: self.var(base, line)? }
                }
                StmtAstKind::StoreArray { base, rhs } => {
                    Stmt::StoreArray { base: self.var(base, line)?, rhs: self.var(rhs, line)? }
                }
                StmtAstKind::Binary { lhs, op, a, b } => Stmt::Binary {
                    lhs: self.var(lhs, line)?,
                    op: *op,
                    op1: self.var(a, line)?,
                    op2: self.var(b, line)?,
                },
                StmtAstKind::Unary { lhs, op, operand } => Stmt::Unary {
                    lhs: self.var(lhs, line)?,
                    op: *op,
                    operand: self.var(operand, line)?,
                },
                StmtAstKind::Cast { lhs, ty, rhs } => Stmt::Cast {
                    lhs: self.var(lhs, line)?,
                    ty: self.resolver.resolve_type(ty, false)?,
                    rhs: self.var(rhs, line)?,
                },
                StmtAstKind::Invoke { kind, result, target, name, args } => {
                    self.resolve_invoke(*kind, result.as_deref(), target, name, args, line)?
                }
                StmtAstKind::Return(v) => {
                    let value = v.as_deref().map(|n| self.var(n, line)).transpose()?;
                    if value.is_some() == (ret_ty == SemType::Void) {
                        return Err(ParseError::Invalid {
                            line,
                            message: format!("return does not match return type `{ret_ty}`"),
                        });
                    }
                    Stmt::Return { value }
                }
                StmtAstKind::If { op, a, b, label } => Stmt::If {
                    op: *op,
                    op1: self.var(a, line)?,
                    op2: self.var(b, line)?,
                    target: target(label, line)?,
                },
                StmtAstKind::Goto(l) => Stmt::Goto { target: target(l, line)? },
                StmtAstKind::Switch { key, cases, default } => {
                    let mut resolved = Vec::new();
                    for (v, l) in cases {
                        let v = i32::try_from(*v).map_err(|_| ParseError::Invalid {
                            line,
                            message: format!("case value {v} does not fit in 32 bits"),
                        })?;
                        if resolved.iter().any(|(c, _)| *c == v) {
                            return Err(ParseError::Invalid { line, message: format!("duplicate case {v}") });
                        }
                        resolved.push((v, target(l, line)?));
                    }
                    Stmt::Switch { key: self.var(key, line)?, cases: resolved, default: target(default, line)? }
                }
                StmtAstKind::Throw(v) => Stmt::Throw { var: self.var(v, line)? },
                StmtAstKind::Catch(v) => Stmt::Catch { lhs: self.var(v, line)? },
                StmtAstKind::Nop => Stmt::Nop,
            };
            stmts.push(stmt);
        }

        let mut exception_table = Vec::new();
        let label_pos = |l: &str, line: usize| -> Result<usize, ParseError> {
            labels.get(l).copied().ok_or_else(|| ParseError::Unresolved { kind: "label", name: l.into(), line })
        };
        for c in &body.catches {
            let catch_type = self.resolver.resolve_type(&c.ty, false)?;
            let throwable = SemType::class(builtin::THROWABLE);
            if !self.program.hierarchy().is_subtype(&catch_type, &throwable) {
                return Err(ParseError::Invalid {
                    line: c.line,
                    message: format!("catch type `{catch_type}` is not throwable"),
                });
            }
            let start = label_pos(&c.start, c.line)?;
            let end = label_pos(&c.end, c.line)?;
            let handler = target(&c.handler, c.line)?;
            if start > end {
                return Err(ParseError::Invalid { line: c.line, message: "empty or inverted try range".into() });
            }
            if !matches!(stmts[handler], Stmt::Catch { .. }) {
                return Err(ParseError::Invalid {
                    line: c.line,
                    message: format!("handler label `{}` must mark an `x = @catch;` statement", c.handler),
                });
            }
            exception_table.push(ExceptionEntry { start, end, handler, catch_type });
        }

        Ok(MethodBody::new(self.method, self.params, self.this_var, self.vars, stmts, exception_table))
    }

    fn resolve_invoke(
        &self,
        kind: InvokeKind,
        result: Option<&str>,
        target: &str,
        name: &str,
        args: &[String],
        line: usize,
    ) -> Result<Stmt, ParseError> {
        let args = args.iter().map(|a| self.var(a, line)).collect::<Result<Vec<_>, _>>()?;
        let arg_types: Vec<SemType> = args.iter().map(|a| self.vars[a.index()].ty.clone()).collect();
        let (base, class) = match kind {
            InvokeKind::Static => {
                if !self.resolver.class_index.contains_key(target) {
                    return Err(ParseError::Unresolved { kind: "class", name: target.into(), line });
                }
                (None, target.to_string())
            }
            InvokeKind::Virtual | InvokeKind::Special => {
                let b = self.var(target, line)?;
                (Some(b), self.class_type_of(b, line)?)
            }
        };
        let h = self.program.hierarchy();
        let mid = h.lookup_method(&class, name, &arg_types).map_err(|e| match e {
            HierarchyError::Ambiguous(..) => ParseError::Invalid { line, message: e.to_string() },
            _ => ParseError::Unresolved { kind: "method", name: format!("{class}.{name}"), line },
        })?;
        let m = self.program.method(mid);
        if m.sig.is_static != (kind == InvokeKind::Static) {
            return Err(ParseError::Invalid {
                line,
                message: format!("`{}` used with {}", m.sig, kind.keyword()),
            });
        }
        let result = result.map(|r| self.var(r, line)).transpose()?;
        if result.is_some() && m.sig.ret == SemType::Void {
            return Err(ParseError::Invalid { line, message: format!("`{}` returns void", m.sig) });
        }
        Ok(Stmt::Invoke(Invoke {
            kind,
            result,
            base,
            method: MethodRef {
                class: m.sig.class.clone(),
                name: m.sig.name.clone(),
                params: m.sig.params.clone(),
                ret: m.sig.ret.clone(),
            },
            args,
        }))
    }
}
