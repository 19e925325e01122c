//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

mod common;

use std::collections::BTreeSet;
use std::sync::Arc;
use std::time::{Duration, Instant};

use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};

use common::andersen::{andersen, project};
use common::corpus::{self, CORPUS};
use common::dataflow_oracle::{self, L};
use flowscope::bitset::{BitSetOps, HybridSet, RegularBitSet, SparseBitSet};
use flowscope::cfg::{build_cfg, throw_analysis, Cfg, EdgeKind, ExceptionMode};
use flowscope::dataflow::{self, ConstantPropagation, CpFact, CpValue, DataflowResult, LiveVariables};
use flowscope::ir::{MethodBody, MethodId, Program, SemType};
use flowscope::manager::{
    cli_main_with, execute, make_plan, parse_registry, Catalog, Request, ResultError, DEFAULT_REGISTRY, EXIT_CONFIG,
    EXIT_OK,
};
use flowscope::plugin::{TaintConfig, TaintPlugin};
use flowscope::pta::{self, Obj, Pointer, PtaOptions, PtaResult, Selector, StmtRef};

type Check = Result<String, String>;
type Criterion = fn() -> Check;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(start: Instant, limit: Duration, what: &str) -> Result<(), String> {
    let took = start.elapsed();
    ensure(took < limit, || format!("{what} took {took:?}, limit {limit:?}"))
}

fn user_bodies(p: &Program) -> impl Iterator<Item = (MethodId, &MethodBody)> {
    p.user_classes().flat_map(|c| c.methods.iter().copied()).filter_map(|m| p.body(m).map(|b| (m, b)))
}

fn cfg_for(p: &Program, body: &MethodBody, mode: ExceptionMode) -> Cfg {
    build_cfg(p, body, mode, Some(&throw_analysis(body))).unwrap()
}

fn main_var(p: &Program, name: &str) -> (MethodId, flowscope::ir::VarId) {
    let m = p.entry_methods()[0];
    (m, p.body(m).unwrap().var_by_name(name).unwrap())
}

// 1

fn sparse_page_accounting() -> Check {
    let start = Instant::now();
    let mut s = SparseBitSet::new();
    for i in [20, 100, 3990, 3993] {
        s.set(i);
    }
    ensure(s.leaf_pages() == 2, || format!("leaf pages {}", s.leaf_pages()))?;
    let one_level = s.allocated_bits_one_level();
    ensure(one_level == 1024, || format!("one-level allocated bits {one_level}"))?;
    let mut r = RegularBitSet::new();
    r.set(4095);
    ensure(r.allocated_bits() == 4096, || format!("regular allocated bits {}", r.allocated_bits()))?;
    within(start, Duration::from_secs(1), "accounting")?;
    Ok(format!("2 leaves, one-level 1024 bits, regular 4096 bits (two-level: {} bits)", s.allocated_bits()))
}

// 2

#[derive(Debug, Clone)]
enum Op {
    Set(u32),
    Clear(u32),
    Contains(u32),
    Or(Vec<u32>),
    And(Vec<u32>),
    AndNot(Vec<u32>),
}

fn index() -> impl Strategy<Value = u32> {
    prop_oneof![0u32..64, 0u32..1024, 0u32..=65_535]
}

fn op() -> impl Strategy<Value = Op> {
    let other = || prop::collection::vec(index(), 0..24);
    prop_oneof![
        4 => index().prop_map(Op::Set),
        2 => index().prop_map(Op::Clear),
        1 => index().prop_map(Op::Contains),
        1 => other().prop_map(Op::Or),
        1 => other().prop_map(Op::And),
        1 => other().prop_map(Op::AndNot),
    ]
}

fn replay<S: BitSetOps>(ops: &[Op]) -> Result<(), TestCaseError> {
    let mut set = S::default();
    let mut model = BTreeSet::new();
    let build = |xs: &[u32]| {
        let mut s = S::default();
        xs.iter().for_each(|x| {
            s.set(*x);
        });
        s
    };
    for op in ops {
        let (got, want) = match op {
            Op::Set(i) => (set.set(*i), model.insert(*i)),
            Op::Clear(i) => (set.clear(*i), model.remove(i)),
            Op::Contains(i) => (set.contains(*i), model.contains(i)),
            Op::Or(xs) => {
                let before = model.len();
                model.extend(xs.iter().copied());
                (set.or_into(&build(xs)), model.len() != before)
            }
            Op::And(xs) => {
                let keep: BTreeSet<u32> = xs.iter().copied().collect();
                let before = model.len();
                model.retain(|x| keep.contains(x));
                (set.and_into(&build(xs)), model.len() != before)
            }
            Op::AndNot(xs) => {
                let before = model.len();
                xs.iter().for_each(|x| {
                    model.remove(x);
                });
                (set.and_not(&build(xs)), model.len() != before)
            }
        };
        prop_assert_eq!(got, want, "changed flag of {:?}", op);
        prop_assert_eq!(set.cardinality(), model.len());
        prop_assert_eq!(set.is_empty(), model.is_empty());
        prop_assert!(set.iter().eq(model.iter().copied()), "iteration after {:?}", op);
    }
    for i in model.iter() {
        prop_assert!(set.contains(*i));
    }
    Ok(())
}

fn bitset_oracle() -> Check {
    let start = Instant::now();
    let cases = 10_000;
    let mut runner = TestRunner::new(Config { cases, failure_persistence: None, ..Config::default() });
    runner
        .run(&prop::collection::vec(op(), 0..=200), |ops| {
            replay::<SparseBitSet>(&ops)?;
            replay::<RegularBitSet>(&ops)?;
            replay::<HybridSet>(&ops)
        })
        .map_err(|e| e.to_string())?;
    within(start, Duration::from_secs(30), "bit-set oracle")?;
    Ok(format!("{cases} sequences x 3 set types in {:.1?}", start.elapsed()))
}

// 3

fn ci_oracle() -> Check {
    let start = Instant::now();
    for (name, src) in CORPUS {
        let p = common::program(src);
        let got = project(&pta::solve_plain(Arc::clone(&p), PtaOptions::default()));
        let want = andersen(&p);
        ensure(got.pts == want.pts, || format!("{name}: points-to differs\n solver {:?}\n oracle {:?}", got.pts, want.pts))?;
        ensure(got.reachable == want.reachable, || format!("{name}: reachable methods differ"))?;
        ensure(got.calls == want.calls, || format!("{name}: call edges differ {:?} vs {:?}", got.calls, want.calls))?;
    }
    within(start, Duration::from_secs(10), "CI oracle")?;
    Ok(format!("{} programs equal the brute-force fixpoint", CORPUS.len()))
}

// 4

fn field_flow() -> Check {
    let p = common::program(corpus::FIELD_FLOW);
    let r = pta::solve_plain(Arc::clone(&p), PtaOptions::default());
    let (m, x) = main_var(&p, "x");
    let o2 = r
        .heap()
        .iter()
        .find(|(_, o)| matches!(o, Obj::New { site, .. } if site.index == 1))
        .map(|(id, _)| id)
        .ok_or("no allocation at b = new B")?;
    ensure(r.pt_ci(m, x).contains(&o2), || "o2 does not reach x".into())?;
    let o1 = r
        .cs_objs()
        .find(|(_, o)| matches!(r.obj(o.obj), Obj::New { site, .. } if site.index == 0))
        .map(|(id, _)| id)
        .ok_or("no o1")?;
    let field = p
        .hierarchy()
        .resolve_field(&flowscope::ir::FieldRef { class: "T".into(), name: "f".into() })
        .map_err(|e| e.to_string())?;
    let o1f = r.find_pointer(&Pointer::InstanceField { base: o1, field }).ok_or("no o1.f pointer")?;
    let (_, b) = main_var(&p, "b");
    let (pb, px) = (r.var_pointers(m, b)[0], r.var_pointers(m, x)[0]);
    let path = r.pfg_path(pb, px).ok_or("no PFG path from b to x")?;
    ensure(path == vec![pb, o1f, px], || format!("path {path:?}"))?;
    Ok("o2 in pt(x); PFG path b -> o1.f -> x".into())
}

// 5

fn context_precision() -> Check {
    let p = common::program(corpus::IDENTITY);
    let sizes = |r: &PtaResult| {
        let (m, r1) = main_var(&p, "r1");
        let (_, r2) = main_var(&p, "r2");
        (r.pt_ci(m, r1).len(), r.pt_ci(m, r2).len())
    };
    let ci = pta::solve_plain(Arc::clone(&p), PtaOptions::default());
    ensure(sizes(&ci) == (2, 2), || format!("CI sizes {:?}", sizes(&ci)))?;
    for selector_name in ["1-call", "2-call", "1-obj", "2-obj"] {
        let sel: Selector = selector_name.parse().map_err(|e| format!("{e}"))?;
        let r = pta::solve_plain(Arc::clone(&p), PtaOptions::with_selector(sel));
        ensure(sizes(&r) == (1, 1), || format!("{selector_name} sizes {:?}", sizes(&r)))?;
    }
    for (name, src) in CORPUS {
        let p = common::program(src);
        let ci = pta::solve_plain(Arc::clone(&p), PtaOptions::default());
        for selector_name in ["1-call", "2-call", "1-obj", "2-obj", "1-type", "2-type"] {
            let sel: Selector = selector_name.parse().map_err(|e| format!("{e}"))?;
            let r = pta::solve_plain(Arc::clone(&p), PtaOptions::with_selector(sel));
            for ((m, v), objs) in r.pt_ci_all() {
                ensure(objs.is_subset(&ci.pt_ci(m, v)), || format!("{name} {selector_name}: not a subset of CI"))?;
            }
            ensure(r.reachable_methods().is_subset(&ci.reachable_methods()), || format!("{name} {selector_name}: reachability"))?;
            ensure(r.call_graph_ci().is_subset(&ci.call_graph_ci()), || format!("{name} {selector_name}: call graph"))?;
        }
    }
    Ok("CI 2/2; 1-call, 2-call, 1-obj, 2-obj 1/1; erased results within CI on the corpus".into())
}

// 6

fn taint_end_to_end() -> Check {
    let start = Instant::now();
    let p = common::program(corpus::LEAK);
    let run = |config: &str| -> Result<TaintPlugin, String> {
        let mut plugin = TaintPlugin::new(TaintConfig::parse(config, &p).map_err(|e| e.to_string())?);
        pta::solve(Arc::clone(&p), PtaOptions::default(), &mut plugin);
        Ok(plugin)
    };
    let full = run(corpus::LEAK_CONFIG)?;
    let main = p.entry_methods()[0];
    let flows = full.flows();
    ensure(flows.len() == 1, || format!("{} flows", flows.len()))?;
    let f = &flows[0];
    ensure(f.source == StmtRef::new(main, 3) && f.sink == StmtRef::new(main, 5) && f.param == 0, || {
        format!("flow {}", f.describe(&p))
    })?;
    let no_transfer: String = corpus::LEAK_CONFIG.lines().filter(|l| !l.starts_with("transfer")).collect::<Vec<_>>().join("\n");
    let none = run(&no_transfer)?;
    ensure(none.flows().is_empty(), || format!("{} flows without transfer", none.flows().len()))?;
    within(start, Duration::from_secs(1), "taint")?;
    Ok(format!("one flow ({}); none without the transfer", f.describe(&p)))
}

// 7

fn dataflow_oracle() -> Check {
    let mut bodies = 0;
    for (name, src) in CORPUS {
        let p = common::program(src);
        for (m, body) in user_bodies(&p) {
            let label = format!("{name}:{}", p.method(m).sig);
            let cfg = cfg_for(&p, body, ExceptionMode::Explicit);
            for refine in [false, true] {
                let a = if refine { ConstantPropagation::with_branch_refinement(body) } else { ConstantPropagation::new(body) };
                let got = dataflow::solve(&a, &cfg).map_err(|e| e.to_string())?;
                let want = dataflow_oracle::constprop(body, &cfg, refine);
                for node in cfg.nodes() {
                    let i = cfg.node_index(node);
                    for v in body.var_ids() {
                        let (gi, go) = (L::from_cp(got.in_fact(node).get(v)), L::from_cp(got.out_fact(node).get(v)));
                        ensure(gi == want.before[i][v.index()] && go == want.after[i][v.index()], || {
                            format!("{label}: constprop (refine={refine}) differs at {node:?} for {}", body.var(v).name)
                        })?;
                    }
                }
                let left = dataflow::verify_fixpoint(&a, &cfg, &got);
                ensure(left == 0, || format!("{label}: constprop post-pass changed {left} nodes"))?;
            }
            let lv = LiveVariables::new(body);
            let got = dataflow::solve(&lv, &cfg).map_err(|e| e.to_string())?;
            let want = dataflow_oracle::liveness(body, &cfg);
            for node in cfg.nodes() {
                let i = cfg.node_index(node);
                ensure(*got.in_fact(node) == want.before[i] && *got.out_fact(node) == want.after[i], || {
                    format!("{label}: liveness differs at {node:?}")
                })?;
            }
            let left = dataflow::verify_fixpoint(&lv, &cfg, &got);
            ensure(left == 0, || format!("{label}: liveness post-pass changed {left} nodes"))?;
            bodies += 1;
        }
    }
    let p = common::program(corpus::BRANCH);
    let body = p.body(p.entry_methods()[0]).unwrap();
    let cfg = cfg_for(&p, body, ExceptionMode::Explicit);
    let r: DataflowResult<CpFact> = dataflow::solve(&ConstantPropagation::new(body), &cfg).map_err(|e| e.to_string())?;
    let x = body.var_by_name("x").unwrap();
    ensure(r.before(6).get(x) == CpValue::Nac, || format!("join of 1 and 2 gave {:?}", r.before(6).get(x)))?;
    Ok(format!("{bodies} method bodies match the round-robin oracle; 1 join 2 = NAC"))
}

// 8

fn count_kind(cfg: &Cfg, kind: &EdgeKind) -> usize {
    cfg.edges().iter().filter(|e| e.kind == *kind).count()
}

fn cfg_categories() -> Check {
    let main_cfg = |src: &str, mode| {
        let p = common::program(src);
        let body = p.body(p.entry_methods()[0]).unwrap().clone();
        cfg_for(&p, &body, mode)
    };
    let branch = main_cfg(corpus::BRANCH, ExceptionMode::Explicit);
    ensure(count_kind(&branch, &EdgeKind::IfTrue) == 1 && count_kind(&branch, &EdgeKind::IfFalse) == 1, || {
        "branch edges".into()
    })?;
    let switch = main_cfg(corpus::SWITCH, ExceptionMode::Explicit);
    let node = switch
        .nodes()
        .find(|n| switch.out_edges(*n).any(|e| e.kind == EdgeKind::SwitchDefault))
        .ok_or("no switch node")?;
    let kinds: BTreeSet<EdgeKind> = switch.out_edges(node).map(|e| e.kind.clone()).collect();
    let want: BTreeSet<EdgeKind> = [EdgeKind::SwitchCase(1), EdgeKind::SwitchCase(5), EdgeKind::SwitchDefault].into();
    ensure(kinds == want, || format!("switch kinds {kinds:?}"))?;
    let caught = EdgeKind::CaughtException(SemType::class("MyError"));
    let explicit = main_cfg(corpus::TRY_CATCH, ExceptionMode::Explicit);
    let null = main_cfg(corpus::TRY_CATCH, ExceptionMode::Null);
    ensure(count_kind(&explicit, &caught) >= 1, || "no CAUGHT_EXCEPTION(MyError) in explicit mode".into())?;
    ensure(count_kind(&null, &caught) == 0, || "CAUGHT_EXCEPTION in null mode".into())?;
    for (name, src) in CORPUS {
        let p = common::program(src);
        for (_, body) in user_bodies(&p) {
            let edges = |mode| -> BTreeSet<_> { cfg_for(&p, body, mode).edges().iter().cloned().collect() };
            let (n, e, a) = (edges(ExceptionMode::Null), edges(ExceptionMode::Explicit), edges(ExceptionMode::All));
            ensure(n.is_subset(&e) && e.is_subset(&a), || format!("{name}: mode edges not nested"))?;
        }
    }
    Ok("IF_TRUE/IF_FALSE once each; SWITCH_CASE(1), SWITCH_CASE(5), SWITCH_DEFAULT; caught edge only when exceptions are modelled; modes nested".into())
}

// 9

fn run_cli(args: &[&str]) -> (i32, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = cli_main_with(std::iter::once("analyzer").chain(args.iter().copied()), &mut out, &mut err);
    (code, String::from_utf8_lossy(&out).into_owned(), String::from_utf8_lossy(&err).into_owned())
}

fn dependency_behaviour() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let src = dir.path().join("branch.ir");
    std::fs::write(&src, corpus::BRANCH).map_err(|e| e.to_string())?;
    let out_dir = dir.path().join("out");
    let (src, out_dir) = (src.to_str().unwrap(), out_dir.to_str().unwrap());

    let (code, out, err) = run_cli(&["--out", out_dir, "-a", "cfg", src]);
    ensure(code == EXIT_OK && out.starts_with("plan: throw, cfg\n"), || format!("-a cfg: {code} {out:?} {err:?}"))?;
    let (code, out, err) = run_cli(&["--out", out_dir, "-a", "cfg=exception:null", src]);
    ensure(code == EXIT_OK && out.starts_with("plan: cfg\n"), || format!("-a cfg=exception:null: {code} {out:?} {err:?}"))?;

    let registry = dir.path().join("cyclic.yml");
    std::fs::write(
        &registry,
        "- description: first\n  analysisClass: x.First\n  id: first\n  requires: [ second ]\n\
         - description: second\n  analysisClass: x.Second\n  id: second\n  requires: [ first ]\n",
    )
    .map_err(|e| e.to_string())?;
    let (code, _, err) = run_cli(&["--config", registry.to_str().unwrap(), "--out", out_dir, "-a", "first", src]);
    ensure(code == EXIT_CONFIG, || format!("cyclic registry exit code {code}"))?;
    ensure(err.contains("first -> second -> first"), || format!("cycle not named: {err:?}"))?;
    Ok(format!("plans [throw, cfg] and [cfg]; cycle exits {EXIT_CONFIG}: {}", err.trim()))
}

// 10

fn result_store() -> Check {
    let registry = parse_registry(DEFAULT_REGISTRY).map_err(|e| e.to_string())?;
    let plan = make_plan(&registry, &[Request::new("constprop")]).map_err(|e| e.to_string())?;
    ensure(plan.ids() == ["throw", "cfg", "constprop"], || format!("plan {:?}", plan.ids()))?;
    let catalog = Catalog::builtin();
    let mut bodies = 0;
    for (name, src) in CORPUS {
        let p = common::program(src);
        let first = execute(&catalog, &plan, &p, None);
        let second = execute(&catalog, &plan, &p, None);
        ensure(first.error.is_none() && second.error.is_none(), || format!("{name}: {:?}", first.error))?;
        for (m, _) in user_bodies(&p) {
            let (a, b) = (first.store.method(m), second.store.method(m));
            let cfg = a.get_result::<Cfg>("cfg").map_err(|e| format!("{name}: {e}"))?;
            let cp = a.get_result::<DataflowResult<CpFact>>("constprop").map_err(|e| format!("{name}: {e}"))?;
            ensure(cfg.node_count() == p.body(m).unwrap().stmts.len() + 2, || "cfg size".into())?;
            ensure(matches!(a.get_result::<Cfg>("livevar"), Err(ResultError::Missing { .. })), || {
                format!("{name}: unran id did not report a missing result")
            })?;
            ensure(b.get_result::<Cfg>("cfg").ok() == Some(cfg), || format!("{name}: cfg differs on re-execution"))?;
            ensure(b.get_result::<DataflowResult<CpFact>>("constprop").ok() == Some(cp), || {
                format!("{name}: constprop differs on re-execution")
            })?;
            bodies += 1;
        }
    }
    Ok(format!("{bodies} bodies answer cfg and constprop; livevar missing; re-execution equal"))
}

fn main() {
    let criteria: [(&str, Criterion); 10] = [
        ("sparse bit-set page accounting", sparse_page_accounting),
        ("bit-set oracle equivalence", bitset_oracle),
        ("CI pointer-analysis oracle equivalence", ci_oracle),
        ("field flow through an alias", field_flow),
        ("context-sensitivity precision", context_precision),
        ("taint end to end", taint_end_to_end),
        ("dataflow fixpoint and oracle", dataflow_oracle),
        ("CFG edge categories", cfg_categories),
        ("conditional dependencies and cycles", dependency_behaviour),
        ("result-store uniformity", result_store),
    ];
    let mut failed = 0;
    for (n, (name, check)) in criteria.iter().enumerate() {
        match std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into())) {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", n + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {why}", n + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
