use super::*;

const SHAPES: &str = r#"
interface I { void m(); }
abstract class B {
  int n;
  abstract void m();
  void k() { return; }
}
class C extends B implements I {
  void m() { return; }
}
class D extends B {
  void m() { return; }
}
class E extends C { }
class Leaf { }
"#;

fn class_names(p: &Program, ids: impl IntoIterator<Item = ClassId>) -> Vec<String> {
    let mut v: Vec<String> = ids.into_iter().map(|id| p.class_by_id(id).name.clone()).collect();
    v.sort();
    v
}

fn mref(p: &Program, class: &str, name: &str) -> MethodRef {
    let m = p.method(p.find_method_by_name(class, name).unwrap());
    MethodRef { class: class.into(), name: name.into(), params: m.sig.params.clone(), ret: m.sig.ret.clone() }
}

#[test]
fn minimal_program_has_one_empty_main() {
    let p = parse_program("class Main { static void main() { } }").unwrap();
    assert_eq!(p.user_classes().count(), 1);
    let main = p.class("Main").unwrap();
    assert_eq!(main.methods.len(), 1);
    let body = p.body(main.methods[0]).unwrap();
    assert!(body.stmts.is_empty());
    assert_eq!(p.entry_methods(), &[main.methods[0]]);
}

#[test]
fn binary_statement_exposes_operands_directly() {
    let p = parse_program("class M { static void main() { int x; int y; int z; y = 1; z = 2; x = y + z; } }").unwrap();
    let body = p.body(p.entry_methods()[0]).unwrap();
    let Stmt::Binary { lhs, op, op1, op2 } = &body.stmts[2] else { panic!("not binary") };
    assert_eq!(*op, BinaryOp::Add);
    assert_eq!(body.var(*lhs).name, "x");
    assert_eq!(body.var(*op1).name, "y");
    assert_eq!(body.var(*op2).name, "z");
    assert_eq!(body.var_type(*op1), &SemType::Int);
}

#[test]
fn undeclared_variable_is_reported_with_line() {
    let err = parse_program("class M {\n static void main() {\n int x;\n x = q;\n }\n}").unwrap_err();
    assert_eq!(err, ParseError::Unresolved { kind: "variable", name: "q".into(), line: 4 });
    assert!(err.to_string().contains("`q`"));
}

#[test]
fn syntax_error_carries_position() {
    let err = parse_program("class M { static void main() { int x; x = ; } }").unwrap_err();
    assert!(matches!(err, ParseError::Syntax { line: 1, .. }), "{err:?}");
}

#[test]
fn inheritance_cycle_is_rejected() {
    let err = parse_program("class A extends B { } class B extends A { }").unwrap_err();
    assert!(matches!(err, ParseError::InheritanceCycle(_)));
}

#[test]
fn unresolved_types_fields_and_methods() {
    assert!(matches!(
        parse_program("class A { Missing f; }").unwrap_err(),
        ParseError::Unresolved { kind: "type", .. }
    ));
    assert!(matches!(
        parse_program("class A { static void main() { A a; int x; a = new A; x = a.nope; } }").unwrap_err(),
        ParseError::Unresolved { kind: "field", .. }
    ));
    assert!(matches!(
        parse_program("class A { static void main() { invokestatic A.nope(); } }").unwrap_err(),
        ParseError::Unresolved { kind: "method", .. }
    ));
    assert!(parse_program("class String { }").is_err());
}

#[test]
fn subtype_basics() {
    let p = parse_program(SHAPES).unwrap();
    let h = p.hierarchy();
    let c = SemType::class("C");
    let b = SemType::class("B");
    assert!(h.is_subtype(&c, &c));
    assert!(h.is_subtype(&c, &b));
    assert!(!h.is_subtype(&b, &c));
    assert!(!h.is_subtype(&SemType::Int, &b));
    assert!(h.is_subtype(&SemType::class("E"), &SemType::class("I")));
    assert!(h.is_subtype(&SemType::Null, &b));
    assert!(!h.is_subtype(&SemType::Null, &SemType::Int));
    assert!(h.is_subtype(&SemType::array_of(c.clone()), &SemType::array_of(b.clone())));
    assert!(h.is_subtype(&SemType::array_of(SemType::Int), &SemType::class("Object")));
    assert!(!h.is_subtype(&SemType::array_of(SemType::Int), &SemType::array_of(SemType::class("Object"))));
}

#[test]
fn subtype_is_a_partial_order_on_reference_types() {
    let p = parse_program(SHAPES).unwrap();
    let h = p.hierarchy();
    let mut types: Vec<SemType> = p.classes().iter().map(|c| SemType::class(c.name.clone())).collect();
    types.extend(types.clone().into_iter().map(SemType::array_of));
    types.push(SemType::Null);
    for a in &types {
        assert!(h.is_subtype(a, a));
        for b in &types {
            if a != b && h.is_subtype(a, b) {
                assert!(!h.is_subtype(b, a), "{a} and {b} are mutually subtypes");
            }
            for c in &types {
                if h.is_subtype(a, b) && h.is_subtype(b, c) {
                    assert!(h.is_subtype(a, c), "{a} <= {b} <= {c}");
                }
            }
        }
    }
}

#[test]
fn dispatch_walks_superclass_chain() {
    let p = parse_program(SHAPES).unwrap();
    let h = p.hierarchy();
    let m = mref(&p, "I", "m");
    assert_eq!(h.dispatch("C", &m).unwrap(), p.find_method_by_name("C", "m").unwrap());
    // E declares nothing: same target as its superclass
    assert_eq!(h.dispatch("E", &m).unwrap(), h.dispatch("C", &m).unwrap());
    let k = mref(&p, "B", "k");
    assert_eq!(h.dispatch("D", &k).unwrap(), p.find_method_by_name("B", "k").unwrap());
}

#[test]
fn dispatch_failure_names_receiver() {
    let p = parse_program("interface I { void m(); } class C implements I { }").unwrap();
    let err = p.hierarchy().dispatch("C", &mref(&p, "I", "m")).unwrap_err();
    assert_eq!(err, HierarchyError::DispatchFailure { receiver: "C".into(), method: "I.m()".into() });
}

#[test]
fn field_resolution() {
    let p = parse_program(SHAPES).unwrap();
    let h = p.hierarchy();
    let on_b = h.resolve_field(&FieldRef { class: "B".into(), name: "n".into() }).unwrap();
    let on_c = h.resolve_field(&FieldRef { class: "C".into(), name: "n".into() }).unwrap();
    assert_eq!(on_b, on_c);
    assert_eq!(p.class_by_id(p.field(on_c).class).name, "B");
    assert!(h.resolve_field(&FieldRef { class: "C".into(), name: "zz".into() }).is_err());
}

#[test]
fn subclasses_are_transitive_and_exclude_self() {
    let p = parse_program(SHAPES).unwrap();
    let h = p.hierarchy();
    assert!(h.subclasses_of("Leaf").is_empty());
    assert_eq!(class_names(&p, h.subclasses_of("B")), ["C", "D", "E"]);
    assert_eq!(class_names(&p, h.subclasses_of("I")), ["C", "E"]);
}

#[test]
fn relevant_statements_per_variable() {
    let p = parse_program(
        r#"
class A {
  A f; A g;
  A m(A a) { return a; }
  static void main() {
    A v; A x; A y; A r; A u;
    y = new A;
    v = new A;
    x = v.f;
    v.g = y;
    r = invokevirtual v.m(y);
  }
}"#,
    )
    .unwrap();
    let body = p.body(p.entry_methods()[0]).unwrap();
    let v = body.var_by_name("v").unwrap();
    let rel = body.relevant_stmts(v);
    assert_eq!(rel.loads, vec![2]);
    assert_eq!(rel.stores, vec![3]);
    assert_eq!(rel.invokes, vec![4]);
    assert!(body.relevant_stmts(body.var_by_name("u").unwrap()).is_empty());
    // y is only a stored value and an argument, never a base
    let y = body.relevant_stmts(body.var_by_name("y").unwrap());
    assert!(y.loads.is_empty() && y.stores.is_empty() && y.invokes.is_empty());
}

#[test]
fn every_variant_parses_and_round_trips() {
    let src = r#"
interface Shape extends Marker { int area(); }
interface Marker { }
abstract class Base implements Shape {
  static Base cache;
  Base next;
  abstract int area();
}
class Sq extends Base {
  int side;
  int area() { int a; a = this.side; a = a * a; return a; }
}
class MyError extends Throwable { }
class Main {
  static void main() {
    Sq s; Base b; Base[] arr; int i; int j; boolean t; String str; Object o; MyError e; Throwable c;
    s = new Sq;
    arr = new Base[];
    arr[*] = s;
    b = arr[*];
    Base.cache = b;
    b = Base.cache;
    b.next = s;
    b = b.next;
    o = null;
    str = "hi \"there\"";
    i = -3;
    j = - i;
    t = true;
    t = ! t;
    i = i % j;
    i = invokevirtual b.area();
    s = (Sq) b;
    invokestatic Main.helper(i);
  L1: if i >= j goto L2;
    switch i { case 1: L1; case -5: L2; default: L3; };
  L2: goto L3;
  L3: nop;
  T0: e = new MyError;
    throw e;
  T1: c = @catch;
    return;
    catch (MyError, T0, T1, T1);
  }
  static void helper(int k) { return; }
}
"#;
    let p = parse_program(src).unwrap();
    let printed = p.to_string();
    let again = parse_program(&printed).unwrap_or_else(|e| panic!("{e}\n{printed}"));
    assert_eq!(p, again);
    assert_eq!(printed, again.to_string());
    let main = p.body(p.entry_methods()[0]).unwrap();
    assert_eq!(main.exception_table.len(), 1);
    assert_eq!(main.exception_table[0].catch_type, SemType::class("MyError"));
}

#[test]
fn parse_is_deterministic() {
    let a = parse_program(SHAPES).unwrap();
    let b = parse_program(SHAPES).unwrap();
    assert_eq!(a, b);
}

#[test]
fn handler_must_be_catch_statement() {
    let err = parse_program(
        "class M { static void main() { int x; A: x = 1; B: x = 2; catch (Throwable, A, B, B); } }",
    )
    .unwrap_err();
    assert!(matches!(err, ParseError::Invalid { .. }), "{err:?}");
}
