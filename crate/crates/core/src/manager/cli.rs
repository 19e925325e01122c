use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::sync::Arc;

use clap::Parser;

use super::analyses::{Catalog, TaintResult};
use super::execute::execute;
use super::plan::{make_plan, Request};
use super::registry::{parse_registry, DEFAULT_REGISTRY};
use crate::ir::parse_program;

pub const EXIT_OK: i32 = 0;
/// Bad arguments, unreadable input, or a program that does not parse.
pub const EXIT_INPUT: i32 = 1;
/// Invalid registry or plan.
pub const EXIT_CONFIG: i32 = 2;
/// An analysis failed while running.
pub const EXIT_ANALYSIS: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "analyzer", about = "Run configured analyses over a program")]
struct Cli {
    /// Analysis registry; the built-in one is used when absent.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Directory for dumps and reports.
    #[arg(long, default_value = "output")]
    out: PathBuf,
    /// Analysis to run, as `id` or `id=key:value;key:value`.
    #[arg(short = 'a', long = "analysis", required = true)]
    analyses: Vec<String>,
    /// Only print the plan.
    #[arg(long)]
    plan_only: bool,
    /// Program source files, concatenated in order.
    #[arg(required = true)]
    programs: Vec<PathBuf>,
}

/// Runs the command line with stdout and stderr.
pub fn cli_main<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    cli_main_with(args, &mut std::io::stdout(), &mut std::io::stderr())
}

pub fn cli_main_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{e}");
                return EXIT_INPUT;
            }
            let _ = write!(out, "{e}");
            return EXIT_OK;
        }
    };
    match run(&cli, out) {
        Ok(()) => EXIT_OK,
        Err((code, message)) => {
            let _ = writeln!(err, "error: {message}");
            code
        }
    }
}

fn run(cli: &Cli, out: &mut dyn Write) -> Result<(), (i32, String)> {
    let registry_text = match &cli.config {
        Some(path) => fs::read_to_string(path).map_err(|e| (EXIT_INPUT, format!("{}: {e}", path.display())))?,
        None => DEFAULT_REGISTRY.to_string(),
    };
    let registry = parse_registry(&registry_text).map_err(|e| (EXIT_CONFIG, e.to_string()))?;
    let requests = cli
        .analyses
        .iter()
        .map(|a| Request::parse(a))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| (EXIT_CONFIG, e.to_string()))?;
    let plan = make_plan(&registry, &requests).map_err(|e| (EXIT_CONFIG, e.to_string()))?;
    let _ = writeln!(out, "plan: {}", plan.ids().join(", "));
    if cli.plan_only {
        return Ok(());
    }

    let mut source = String::new();
    for path in &cli.programs {
        let text = fs::read_to_string(path).map_err(|e| (EXIT_INPUT, format!("{}: {e}", path.display())))?;
        source.push_str(&text);
        source.push('\n');
    }
    let program = Arc::new(parse_program(&source).map_err(|e| (EXIT_INPUT, e.to_string()))?);
    fs::create_dir_all(&cli.out).map_err(|e| (EXIT_INPUT, format!("{}: {e}", cli.out.display())))?;

    let execution = execute(&Catalog::builtin(), &plan, &program, Some(&cli.out));
    if let Some(e) = execution.error {
        return Err((EXIT_ANALYSIS, e.to_string()));
    }
    if let Ok(taint) = execution.store.program().get_result::<TaintResult>("taint") {
        let _ = write!(out, "{}", taint.report);
    }
    Ok(())
}
