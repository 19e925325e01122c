#![allow(dead_code)]

pub mod andersen;
pub mod corpus;
pub mod dataflow_oracle;

use std::sync::Arc;

use flowscope::ir::{parse_program, Program};

pub fn program(src: &str) -> Arc<Program> {
    Arc::new(parse_program(src).unwrap_or_else(|e| panic!("{e}")))
}
