//! A static-analysis framework for a small Java-like language in
//! three-address form.
//!
//! The pieces build on each other: [`ir`] parses programs and answers
//! class-hierarchy queries, [`cfg`] and [`dataflow`] provide intraprocedural
//! analyses, [`bitset`] and [`pta`] implement a context-sensitive
//! Andersen-style pointer analysis, [`plugin`] hosts analyses that ride on
//! the pointer-analysis solver (taint among them), and [`manager`] plans and
//! runs configured analyses and stores their results.

pub mod ir;
pub mod bitset;
pub mod cfg;
pub mod dataflow;
pub mod pta;
pub mod plugin;
pub mod manager;
