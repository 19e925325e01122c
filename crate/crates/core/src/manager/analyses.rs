use std::collections::{BTreeSet, HashMap};
use std::fs;
use std::path::Path;
use std::sync::Arc;

use super::registry::Options;
use super::store::{AnyResult, ResultStore};
use crate::cfg::{build_cfg, throw_analysis, Cfg, ExceptionMode, ThrowResult};
use crate::dataflow::{self, ConstantPropagation, CpFact, LiveVariables};
use crate::ir::{ClassDecl, MethodBody, MethodDecl, Program};
use crate::plugin::{taint_report, TaintConfig, TaintFlow, TaintPlugin};
use crate::pta::{self, PtaOptions, PtaResult, Selector};

/// What an analysis needs while it runs.
pub struct AnalysisContext<'a> {
    pub program: &'a Arc<Program>,
    pub store: &'a ResultStore,
    /// Effective options of the running analysis.
    pub options: &'a Options,
    /// Effective options of every planned analysis, by id.
    pub plan_options: &'a HashMap<String, Options>,
    /// Directory for dump files, if dumping is possible.
    pub out_dir: Option<&'a Path>,
}

impl AnalysisContext<'_> {
    pub fn option(&self, key: &str) -> Result<&str, String> {
        self.options.get(key).map(String::as_str).ok_or_else(|| format!("missing option `{key}`"))
    }

    pub fn flag(&self, key: &str) -> Result<bool, String> {
        parse_bool(key, self.option(key)?)
    }

    /// Writes `contents` to `name` under the output directory, when there is one.
    pub fn write_dump(&self, name: &str, contents: &str) -> Result<(), String> {
        match self.out_dir {
            Some(dir) => fs::write(dir.join(name), contents).map_err(|e| format!("cannot write {name}: {e}")),
            None => Ok(()),
        }
    }
}

fn parse_bool(key: &str, value: &str) -> Result<bool, String> {
    match value {
        "true" => Ok(true),
        "false" => Ok(false),
        other => Err(format!("option `{key}` expects true or false, got `{other}`")),
    }
}

pub trait MethodAnalysis: Send + Sync {
    fn analyze(&self, ctx: &AnalysisContext<'_>, method: &MethodDecl, body: &MethodBody) -> Result<AnyResult, String>;

    /// No state is shared between methods, so bodies may run in parallel.
    fn stateless(&self) -> bool {
        false
    }

    /// Restrict to methods reachable in an existing `pta` result.
    fn reachable_only(&self) -> bool {
        false
    }
}

pub trait ClassAnalysis: Send + Sync {
    fn analyze(&self, ctx: &AnalysisContext<'_>, class: &ClassDecl) -> Result<AnyResult, String>;
}

pub trait ProgramAnalysis: Send + Sync {
    fn analyze(&self, ctx: &AnalysisContext<'_>) -> Result<AnyResult, String>;
}

pub enum Analysis {
    Method(Box<dyn MethodAnalysis>),
    Class(Box<dyn ClassAnalysis>),
    Program(Box<dyn ProgramAnalysis>),
}

pub type Factory = Box<dyn Fn() -> Analysis + Send + Sync>;

/// Maps analysis ids to implementations.
pub struct Catalog {
    factories: HashMap<String, Factory>,
}

impl Catalog {
    pub fn empty() -> Self {
        Catalog { factories: HashMap::new() }
    }

    /// The built-in analyses: throw, cfg, constprop, livevar, pta, taint.
    pub fn builtin() -> Self {
        let mut c = Catalog::empty();
        c.register("throw", || Analysis::Method(Box::new(ThrowAnalysis)));
        c.register("cfg", || Analysis::Method(Box::new(CfgAnalysis)));
        c.register("constprop", || Analysis::Method(Box::new(ConstPropAnalysis)));
        c.register("livevar", || Analysis::Method(Box::new(LiveVarAnalysis)));
        c.register("pta", || Analysis::Program(Box::new(PtaAnalysis)));
        c.register("taint", || Analysis::Program(Box::new(TaintAnalysis)));
        c
    }

    pub fn register(&mut self, id: &str, factory: impl Fn() -> Analysis + Send + Sync + 'static) {
        self.factories.insert(id.to_string(), Box::new(factory));
    }

    pub fn create(&self, id: &str) -> Option<Analysis> {
        self.factories.get(id).map(|f| f())
    }
}

impl Default for Catalog {
    fn default() -> Self {
        Catalog::builtin()
    }
}

fn dump_name(program: &Program, method: &MethodDecl, suffix: &str) -> String {
    format!("{}.{}.{suffix}", program.class_by_id(method.class).name, method.sig.name)
}

struct ThrowAnalysis;

impl MethodAnalysis for ThrowAnalysis {
    fn analyze(&self, _: &AnalysisContext<'_>, _: &MethodDecl, body: &MethodBody) -> Result<AnyResult, String> {
        Ok(Arc::new(throw_analysis(body)))
    }

    fn stateless(&self) -> bool {
        true
    }
}

struct CfgAnalysis;

impl MethodAnalysis for CfgAnalysis {
    fn analyze(&self, ctx: &AnalysisContext<'_>, method: &MethodDecl, body: &MethodBody) -> Result<AnyResult, String> {
        let mode: ExceptionMode = ctx.option("exception")?.parse().map_err(|e| format!("{e}"))?;
        let throws = match ctx.store.method(method.id).get_result::<ThrowResult>("throw") {
            Ok(t) => Some(t),
            Err(_) if mode == ExceptionMode::Null => None,
            Err(e) => return Err(e.to_string()),
        };
        let cfg = build_cfg(ctx.program, body, mode, throws).map_err(|e| e.to_string())?;
        if ctx.flag("dump")? {
            ctx.write_dump(&dump_name(ctx.program, method, "dot"), &cfg.to_dot(ctx.program, body))?;
        }
        Ok(Arc::new(cfg))
    }

    fn stateless(&self) -> bool {
        true
    }
}

struct ConstPropAnalysis;

impl MethodAnalysis for ConstPropAnalysis {
    fn analyze(&self, ctx: &AnalysisContext<'_>, method: &MethodDecl, body: &MethodBody) -> Result<AnyResult, String> {
        let cfg = ctx.store.method(method.id).get_result::<Cfg>("cfg").map_err(|e| e.to_string())?;
        let analysis = if ctx.flag("refine")? {
            ConstantPropagation::with_branch_refinement(body)
        } else {
            ConstantPropagation::new(body)
        };
        let result = dataflow::solve(&analysis, cfg).map_err(|e| e.to_string())?;
        if ctx.flag("dump")? {
            let text = dataflow::dump_result(body, &result, |f: &CpFact| f.render(body));
            ctx.write_dump(&dump_name(ctx.program, method, "constprop.txt"), &text)?;
        }
        Ok(Arc::new(result))
    }

    fn stateless(&self) -> bool {
        true
    }
}

struct LiveVarAnalysis;

impl MethodAnalysis for LiveVarAnalysis {
    fn analyze(&self, ctx: &AnalysisContext<'_>, method: &MethodDecl, body: &MethodBody) -> Result<AnyResult, String> {
        let cfg = ctx.store.method(method.id).get_result::<Cfg>("cfg").map_err(|e| e.to_string())?;
        let result = dataflow::solve(&LiveVariables::new(body), cfg).map_err(|e| e.to_string())?;
        if ctx.flag("dump")? {
            let text = dataflow::dump_result(body, &result, |f| LiveVariables::render(body, f));
            ctx.write_dump(&dump_name(ctx.program, method, "livevar.txt"), &text)?;
        }
        Ok(Arc::new(result))
    }

    fn stateless(&self) -> bool {
        true
    }
}

/// Builds solver options from the `pta` option map.
pub fn pta_options(options: &Options) -> Result<PtaOptions, String> {
    let get = |key: &str| options.get(key).map(String::as_str).ok_or_else(|| format!("missing option `{key}`"));
    let mut selector: Selector = get("cs")?.parse().map_err(|e| format!("{e}"))?;
    match get("heap")? {
        "default" => {}
        k => {
            let k = k.parse().map_err(|_| format!("option `heap` expects a number, got `{k}`"))?;
            selector = selector.with_heap(k);
        }
    }
    let merge_types: BTreeSet<String> = match get("merge-types")? {
        "none" => BTreeSet::new(),
        list => list.split(',').map(|t| t.trim().to_string()).filter(|t| !t.is_empty()).collect(),
    };
    Ok(PtaOptions {
        selector: Arc::new(selector),
        merge_types,
        type_filter: parse_bool("type-filter", get("type-filter")?)?,
        ..PtaOptions::default()
    })
}

struct PtaAnalysis;

impl ProgramAnalysis for PtaAnalysis {
    fn analyze(&self, ctx: &AnalysisContext<'_>) -> Result<AnyResult, String> {
        let result = pta::solve_plain(Arc::clone(ctx.program), pta_options(ctx.options)?);
        if ctx.flag("dump")? {
            ctx.write_dump("pta.txt", &result.dump())?;
        }
        Ok(Arc::new(result))
    }
}

/// Taint flows found by re-solving the pointer analysis with the taint plugin.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaintResult {
    pub flows: Vec<TaintFlow>,
    pub report: String,
}

struct TaintAnalysis;

impl ProgramAnalysis for TaintAnalysis {
    fn analyze(&self, ctx: &AnalysisContext<'_>) -> Result<AnyResult, String> {
        // the prerequisite result only confirms the ordering; the plugin has
        // to observe the solve, so it runs again with the same options
        ctx.store.program().get_result::<PtaResult>("pta").map_err(|e| e.to_string())?;
        let path = ctx.option("config")?;
        if path == "null" {
            return Err("taint needs a `config` option".into());
        }
        let text = fs::read_to_string(path).map_err(|e| format!("cannot read {path}: {e}"))?;
        let config = TaintConfig::parse(&text, ctx.program).map_err(|e| e.to_string())?;
        let pta_opts = ctx.plan_options.get("pta").ok_or("no pta options in plan")?;
        let mut plugin = TaintPlugin::new(config);
        pta::solve(Arc::clone(ctx.program), pta_options(pta_opts)?, &mut plugin);
        let flows = plugin.flows().to_vec();
        let report = taint_report(ctx.program, &flows);
        ctx.write_dump("taint.txt", &report)?;
        Ok(Arc::new(TaintResult { flows, report }))
    }
}
