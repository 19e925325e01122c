//! A generic worklist solver for intraprocedural dataflow problems, plus the
//! constant-propagation and live-variable clients.

mod constprop;
mod livevar;

use std::collections::{HashSet, VecDeque};
use std::fmt::{Debug, Write as _};

use thiserror::Error;

use crate::cfg::{Cfg, CfgEdge, CfgNode};
use crate::ir::MethodBody;

pub use constprop::{ConstantPropagation, CpFact, CpValue, Value};
pub use livevar::{LiveFact, LiveVariables};

/// Pops allowed per CFG node before the solver gives up.
pub const DEFAULT_ITERATION_FACTOR: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Backward,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DataflowError {
    #[error("analysis `{analysis}` did not converge after {iterations} iterations")]
    Diverged { analysis: String, iterations: usize },
}

/// The contract every dataflow analysis implements. The analysis owns fact
/// creation and decides whether a transfer changed anything.
///
/// For backward analyses `transfer_node` receives the fact after the node and
/// writes the fact before it.
pub trait DataflowAnalysis {
    type Fact: Clone + PartialEq + Debug;

    fn name(&self) -> &str;

    fn direction(&self) -> Direction;

    /// Fact at entry (forward) or exit (backward).
    fn new_boundary_fact(&self, cfg: &Cfg) -> Self::Fact;

    fn new_initial_fact(&self) -> Self::Fact;

    /// Meets `source` into `target`, returning whether `target` changed.
    fn meet_into(&self, source: &Self::Fact, target: &mut Self::Fact) -> bool;

    /// Applies the node's transfer function, returning whether `output` changed.
    fn transfer_node(&self, node: CfgNode, input: &Self::Fact, output: &mut Self::Fact) -> bool;

    fn needs_edge_transfer(&self) -> bool {
        false
    }

    fn transfer_edge(&self, _edge: &CfgEdge, node_out: &Self::Fact) -> Self::Fact {
        node_out.clone()
    }
}

/// Facts before (`in`) and after (`out`) every node in program order,
/// regardless of analysis direction.
#[derive(Debug, Clone, PartialEq)]
pub struct DataflowResult<F> {
    in_facts: Vec<F>,
    out_facts: Vec<F>,
    iterations: usize,
}

impl<F> DataflowResult<F> {
    fn index(&self, node: CfgNode) -> usize {
        match node {
            CfgNode::Entry => 0,
            CfgNode::Stmt(i) => i + 1,
            CfgNode::Exit => self.in_facts.len() - 1,
        }
    }

    pub fn in_fact(&self, node: CfgNode) -> &F {
        &self.in_facts[self.index(node)]
    }

    pub fn out_fact(&self, node: CfgNode) -> &F {
        &self.out_facts[self.index(node)]
    }

    /// Fact before statement `i`.
    pub fn before(&self, i: usize) -> &F {
        &self.in_facts[i + 1]
    }

    /// Fact after statement `i`.
    pub fn after(&self, i: usize) -> &F {
        &self.out_facts[i + 1]
    }

    /// Number of worklist pops the solver performed.
    pub fn iterations(&self) -> usize {
        self.iterations
    }

    pub fn from_parts(in_facts: Vec<F>, out_facts: Vec<F>) -> Self {
        assert_eq!(in_facts.len(), out_facts.len());
        DataflowResult { in_facts, out_facts, iterations: 0 }
    }

    /// Compares facts only, ignoring solver statistics.
    pub fn same_facts(&self, other: &Self) -> bool
    where
        F: PartialEq,
    {
        self.in_facts == other.in_facts && self.out_facts == other.out_facts
    }
}

pub fn solve<A: DataflowAnalysis>(analysis: &A, cfg: &Cfg) -> Result<DataflowResult<A::Fact>, DataflowError> {
    solve_with_limit(analysis, cfg, DEFAULT_ITERATION_FACTOR.saturating_mul(cfg.node_count()))
}

/// Worklist solver with a FIFO queue. Fails with [`DataflowError::Diverged`]
/// after `max_iterations` pops.
pub fn solve_with_limit<A: DataflowAnalysis>(
    analysis: &A,
    cfg: &Cfg,
    max_iterations: usize,
) -> Result<DataflowResult<A::Fact>, DataflowError> {
    let n = cfg.node_count();
    let forward = analysis.direction() == Direction::Forward;
    let boundary = if forward { cfg.entry() } else { cfg.exit() };
    // `pre` is the side facts flow into, `post` the side the transfer writes.
    let mut pre: Vec<A::Fact> = (0..n).map(|_| analysis.new_initial_fact()).collect();
    let mut post = pre.clone();
    let b = cfg.node_index(boundary);
    pre[b] = analysis.new_boundary_fact(cfg);
    post[b] = pre[b].clone();

    let order: Vec<usize> = if forward { (0..n).collect() } else { (0..n).rev().collect() };
    let mut queue: VecDeque<usize> = order.into_iter().filter(|i| *i != b).collect();
    let mut queued: HashSet<usize> = queue.iter().copied().collect();
    let mut iterations = 0;

    while let Some(i) = queue.pop_front() {
        queued.remove(&i);
        iterations += 1;
        if iterations > max_iterations {
            return Err(DataflowError::Diverged { analysis: analysis.name().to_string(), iterations: max_iterations });
        }
        let node = cfg.node_at(i);
        let mut fact = std::mem::replace(&mut pre[i], analysis.new_initial_fact());
        let incoming: Vec<&CfgEdge> =
            if forward { cfg.in_edges(node).collect() } else { cfg.out_edges(node).collect() };
        for edge in incoming {
            let other = cfg.node_index(if forward { edge.source } else { edge.target });
            if analysis.needs_edge_transfer() {
                let f = analysis.transfer_edge(edge, &post[other]);
                analysis.meet_into(&f, &mut fact);
            } else {
                analysis.meet_into(&post[other], &mut fact);
            }
        }
        pre[i] = fact;
        if analysis.transfer_node(node, &pre[i], &mut post[i]) {
            let next: Vec<CfgNode> = if forward { cfg.succs(node).collect() } else { cfg.preds(node).collect() };
            for s in next {
                let j = cfg.node_index(s);
                if j != b && queued.insert(j) {
                    queue.push_back(j);
                }
            }
        }
    }

    let (in_facts, out_facts) = if forward { (pre, post) } else { (post, pre) };
    Ok(DataflowResult { in_facts, out_facts, iterations })
}

/// Runs one more meet and transfer pass over every node and counts the nodes
/// whose facts would change. Zero means `result` is a fixpoint.
pub fn verify_fixpoint<A: DataflowAnalysis>(analysis: &A, cfg: &Cfg, result: &DataflowResult<A::Fact>) -> usize {
    let forward = analysis.direction() == Direction::Forward;
    let boundary = if forward { cfg.entry() } else { cfg.exit() };
    let mut changes = 0;
    for node in cfg.nodes().filter(|n| *n != boundary) {
        let (mut pre, mut post) = if forward {
            (result.in_fact(node).clone(), result.out_fact(node).clone())
        } else {
            (result.out_fact(node).clone(), result.in_fact(node).clone())
        };
        let mut changed = false;
        let incoming: Vec<&CfgEdge> =
            if forward { cfg.in_edges(node).collect() } else { cfg.out_edges(node).collect() };
        for edge in incoming {
            let other = if forward { edge.source } else { edge.target };
            let f = if forward { result.out_fact(other) } else { result.in_fact(other) };
            let f = if analysis.needs_edge_transfer() { analysis.transfer_edge(edge, f) } else { f.clone() };
            changed |= analysis.meet_into(&f, &mut pre);
        }
        changed |= analysis.transfer_node(node, &pre, &mut post);
        if changed {
            changes += 1;
        }
    }
    changes
}

/// One line per statement: `index | stmt-text | IN: ... | OUT: ...`.
pub fn dump_result<F>(body: &MethodBody, result: &DataflowResult<F>, render: impl Fn(&F) -> String) -> String {
    let mut out = String::new();
    for i in 0..body.stmts.len() {
        let _ = writeln!(
            out,
            "{i} | {} | IN: {} | OUT: {}",
            body.stmt_display(i),
            render(result.before(i)),
            render(result.after(i))
        );
    }
    out
}
