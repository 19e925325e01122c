//! Analysis registry, planning, execution, and result storage.

mod analyses;
mod cli;
mod execute;
mod plan;
mod registry;
mod store;

pub use analyses::{
    pta_options, Analysis, AnalysisContext, Catalog, ClassAnalysis, Factory, MethodAnalysis, ProgramAnalysis,
    TaintResult,
};
pub use cli::{cli_main, cli_main_with, EXIT_ANALYSIS, EXIT_CONFIG, EXIT_INPUT, EXIT_OK};
pub use execute::{execute, ExecError, Execution};
pub use plan::{make_plan, Plan, PlanEntry, PlanError, Request};
pub use registry::{
    parse_registry, AnalysisConfig, Condition, ConditionError, Options, Registry, RegistryError, Requirement,
    DEFAULT_REGISTRY,
};
pub use store::{AnyResult, Level, ResultError, ResultStore, Results};
