use std::collections::{BTreeSet, HashMap};
use std::path::Path;
use std::sync::Arc;

use rayon::prelude::*;
use thiserror::Error;

use super::analyses::{Analysis, AnalysisContext, Catalog, MethodAnalysis};
use super::plan::Plan;
use super::registry::Options;
use super::store::{AnyResult, ResultStore};
use crate::ir::{MethodId, Program};
use crate::pta::PtaResult;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExecError {
    #[error("no implementation registered for analysis `{0}`")]
    NoImplementation(String),
    #[error("analysis `{id}` failed on {target}: {message}")]
    Failed { id: String, target: String, message: String },
}

/// The store after running a plan. On failure it holds everything that
/// completed before the failing analysis.
#[derive(Debug)]
pub struct Execution {
    pub store: ResultStore,
    pub error: Option<ExecError>,
}

fn target_methods(program: &Program, store: &ResultStore, analysis: &dyn MethodAnalysis) -> Vec<MethodId> {
    let reachable: Option<BTreeSet<MethodId>> = analysis
        .reachable_only()
        .then(|| store.program().get_result::<PtaResult>("pta").ok().map(PtaResult::reachable_methods))
        .flatten();
    program
        .methods()
        .iter()
        .filter(|m| m.body.is_some() && !program.class_by_id(m.class).is_builtin)
        .filter(|m| reachable.as_ref().is_none_or(|r| r.contains(&m.id)))
        .map(|m| m.id)
        .collect()
}

fn run_methods(
    program: &Arc<Program>,
    ctx: &AnalysisContext<'_>,
    analysis: &dyn MethodAnalysis,
) -> Vec<(MethodId, Result<AnyResult, String>)> {
    let targets = target_methods(program, ctx.store, analysis);
    let run = |m: &MethodId| {
        let decl = program.method(*m);
        (*m, analysis.analyze(ctx, decl, decl.body.as_ref().expect("body")))
    };
    if analysis.stateless() {
        targets.par_iter().map(run).collect()
    } else {
        targets.iter().map(run).collect()
    }
}

/// Runs each planned analysis in order, storing results at the level the
/// analysis works on. Stops at the first failure.
pub fn execute(catalog: &Catalog, plan: &Plan, program: &Arc<Program>, out_dir: Option<&Path>) -> Execution {
    let mut store = ResultStore::new(program);
    let plan_options: HashMap<String, Options> =
        plan.entries.iter().map(|e| (e.id.clone(), e.options.clone())).collect();

    for entry in &plan.entries {
        let id = entry.id.as_str();
        let Some(analysis) = catalog.create(id) else {
            return Execution { store, error: Some(ExecError::NoImplementation(id.to_string())) };
        };
        let fail = |target: String, message: String| ExecError::Failed { id: id.to_string(), target, message };
        let ctx = AnalysisContext {
            program,
            store: &store,
            options: &entry.options,
            plan_options: &plan_options,
            out_dir,
        };
        match analysis {
            Analysis::Program(a) => {
                let result = a.analyze(&ctx);
                match result {
                    Ok(r) => store.program_mut().insert(id, r),
                    Err(m) => return Execution { store, error: Some(fail("the program".into(), m)) },
                }
            }
            Analysis::Class(a) => {
                let results: Vec<_> = program.user_classes().map(|c| (c.id, a.analyze(&ctx, c))).collect();
                let mut error = None;
                for (c, r) in results {
                    match r {
                        Ok(r) => store.class_mut(c).insert(id, r),
                        Err(m) => {
                            error.get_or_insert_with(|| fail(program.class_by_id(c).name.clone(), m));
                        }
                    }
                }
                if error.is_some() {
                    return Execution { store, error };
                }
            }
            Analysis::Method(a) => {
                let results = run_methods(program, &ctx, a.as_ref());
                let mut error = None;
                for (m, r) in results {
                    match r {
                        Ok(r) => store.method_mut(m).insert(id, r),
                        Err(msg) => {
                            error.get_or_insert_with(|| fail(program.method(m).sig.to_string(), msg));
                        }
                    }
                }
                if error.is_some() {
                    return Execution { store, error };
                }
            }
        }
    }
    Execution { store, error: None }
}
