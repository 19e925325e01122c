use super::*;
use crate::ir::parse_program;

fn build(src: &str, mode: ExceptionMode) -> (Program, Cfg) {
    let p = parse_program(src).unwrap();
    let body = p.body(p.entry_methods()[0]).unwrap();
    let throws = throw_analysis(body);
    let cfg = build_cfg(&p, body, mode, Some(&throws)).unwrap();
    (p, cfg)
}

fn kinds(cfg: &Cfg, node: CfgNode) -> Vec<EdgeKind> {
    cfg.out_edges(node).map(|e| e.kind.clone()).collect()
}

const TRY_CATCH: &str = r#"
class MyError extends Throwable { }
class Other extends Throwable { }
class M {
  static void main() {
    MyError e; Throwable c; int a; int b; int q;
    a = 1; b = 0;
  T0: e = new MyError;
    q = a / b;
    throw e;
  T1: c = @catch;
    return;
    catch (MyError, T0, T1, T1);
  }
}
"#;

#[test]
fn straight_line_chain() {
    let (_, cfg) = build("class M { static void main() { int x; x = 1; x = 2; return; } }", ExceptionMode::Explicit);
    assert_eq!(cfg.node_count(), 5);
    assert_eq!(kinds(&cfg, CfgNode::Entry), vec![EdgeKind::Entry]);
    assert_eq!(cfg.succs(CfgNode::Stmt(0)).collect::<Vec<_>>(), vec![CfgNode::Stmt(1)]);
    assert_eq!(kinds(&cfg, CfgNode::Stmt(1)), vec![EdgeKind::FallThrough]);
    assert_eq!(kinds(&cfg, CfgNode::Stmt(2)), vec![EdgeKind::Return]);
    assert_eq!(cfg.in_edges(CfgNode::Entry).count(), 0);
    assert_eq!(cfg.out_edges(CfgNode::Exit).count(), 0);
}

#[test]
fn empty_body_links_entry_to_exit() {
    let (_, cfg) = build("class M { static void main() { } }", ExceptionMode::Null);
    assert_eq!(cfg.edges().len(), 1);
    assert_eq!(cfg.edges()[0].target, CfgNode::Exit);
}

#[test]
fn if_has_one_true_and_one_false_edge() {
    let src = "class M { static void main() { int x; int y; x = 1; y = 2; if x > y goto L; x = 3; L: return; } }";
    let (_, cfg) = build(src, ExceptionMode::Explicit);
    let edges: Vec<_> = cfg.out_edges(CfgNode::Stmt(2)).cloned().collect();
    assert_eq!(edges.len(), 2);
    assert!(edges.contains(&CfgEdge { source: CfgNode::Stmt(2), target: CfgNode::Stmt(4), kind: EdgeKind::IfTrue }));
    assert!(edges.contains(&CfgEdge { source: CfgNode::Stmt(2), target: CfgNode::Stmt(3), kind: EdgeKind::IfFalse }));
}

#[test]
fn switch_edges_carry_case_values() {
    let src = "class M { static void main() { int x; x = 5; switch x { case 1: A; case 5: B; default: C; }; A: nop; B: nop; C: return; } }";
    let (_, cfg) = build(src, ExceptionMode::Explicit);
    let mut k = kinds(&cfg, CfgNode::Stmt(1));
    k.sort();
    assert_eq!(k, vec![EdgeKind::SwitchCase(1), EdgeKind::SwitchCase(5), EdgeKind::SwitchDefault]);
}

#[test]
fn thrown_type_reaches_matching_handler() {
    let (_, cfg) = build(TRY_CATCH, ExceptionMode::Explicit);
    let throw_edges = kinds(&cfg, CfgNode::Stmt(4));
    assert_eq!(throw_edges, vec![EdgeKind::CaughtException(SemType::class("MyError"))]);
    assert_eq!(cfg.succs(CfgNode::Stmt(4)).collect::<Vec<_>>(), vec![CfgNode::Stmt(5)]);
    // Division raises nothing outside `all`.
    assert_eq!(kinds(&cfg, CfgNode::Stmt(3)), vec![EdgeKind::FallThrough]);
}

#[test]
fn null_mode_leaves_throw_without_successors() {
    let (_, cfg) = build(TRY_CATCH, ExceptionMode::Null);
    assert_eq!(cfg.out_edges(CfgNode::Stmt(4)).count(), 0);
    assert!(cfg.edges().iter().all(|e| !e.kind.is_exceptional()));
}

#[test]
fn all_mode_adds_uncaught_runtime_exceptions() {
    let (_, cfg) = build(TRY_CATCH, ExceptionMode::All);
    let k = kinds(&cfg, CfgNode::Stmt(3));
    assert!(k.contains(&EdgeKind::UncaughtException));
    assert!(k.contains(&EdgeKind::FallThrough));
}

#[test]
fn innermost_handler_wins() {
    let src = r#"
class MyError extends Throwable { }
class M {
  static void main() {
    MyError e; Throwable c; MyError d;
  A: e = new MyError;
  B: throw e;
  H1: c = @catch;
    return;
  H2: d = @catch;
    return;
    catch (Throwable, A, H1, H1);
    catch (MyError, B, H1, H2);
  }
}
"#;
    let (_, cfg) = build(src, ExceptionMode::Explicit);
    assert_eq!(cfg.succs(CfgNode::Stmt(1)).collect::<Vec<_>>(), vec![CfgNode::Stmt(4)]);
}

#[test]
fn unmatched_type_is_uncaught() {
    let src = r#"
class MyError extends Throwable { }
class Other extends Throwable { }
class M {
  static void main() {
    Other e; MyError c;
  A: e = new Other;
    throw e;
  H: c = @catch;
    return;
    catch (MyError, A, H, H);
  }
}
"#;
    let (_, cfg) = build(src, ExceptionMode::Explicit);
    assert_eq!(kinds(&cfg, CfgNode::Stmt(1)), vec![EdgeKind::UncaughtException]);
    assert_eq!(cfg.succs(CfgNode::Stmt(1)).collect::<Vec<_>>(), vec![CfgNode::Exit]);
}

#[test]
fn modes_are_monotone() {
    let edges = |m| build(TRY_CATCH, m).1.edges().iter().cloned().collect::<HashSet<_>>();
    let (n, e, a) = (edges(ExceptionMode::Null), edges(ExceptionMode::Explicit), edges(ExceptionMode::All));
    assert!(n.is_subset(&e) && e.is_subset(&a));
    assert!(n.len() < e.len() && e.len() < a.len());
}

#[test]
fn missing_throw_result_is_an_error() {
    let p = parse_program(TRY_CATCH).unwrap();
    let body = p.body(p.entry_methods()[0]).unwrap();
    assert_eq!(
        build_cfg(&p, body, ExceptionMode::Explicit, None),
        Err(CfgError::MissingThrowResult(ExceptionMode::Explicit))
    );
    assert!(build_cfg(&p, body, ExceptionMode::Null, None).is_ok());
}

#[test]
fn throw_analysis_uses_declared_types() {
    let p = parse_program(TRY_CATCH).unwrap();
    let t = throw_analysis(p.body(p.entry_methods()[0]).unwrap());
    assert_eq!(t.explicit(4).iter().collect::<Vec<_>>(), vec![&SemType::class("MyError")]);
    assert!(t.explicit(3).is_empty());
    assert!(t.implicit(3).contains(&SemType::class("ArithmeticException")));
    assert!(t.implicit(0).is_empty());
}

#[test]
fn mode_parses_from_text() {
    assert_eq!("all".parse::<ExceptionMode>(), Ok(ExceptionMode::All));
    assert!("some".parse::<ExceptionMode>().is_err());
}

#[test]
fn dot_labels_nodes_and_edges() {
    let (p, cfg) = build(TRY_CATCH, ExceptionMode::Explicit);
    let dot = cfg.to_dot(&p, p.body(cfg.method()).unwrap());
    assert!(dot.starts_with("digraph"));
    assert!(dot.contains("label=\"4: throw e;\""));
    assert!(dot.contains("CAUGHT_EXCEPTION(MyError)"));
}
