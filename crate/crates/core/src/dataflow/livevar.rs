use std::collections::BTreeSet;

use super::{DataflowAnalysis, Direction};
use crate::cfg::{Cfg, CfgNode};
use crate::ir::{MethodBody, VarId};

pub type LiveFact = BTreeSet<VarId>;

/// Backward may-analysis of variables read before their next definition.
pub struct LiveVariables<'a> {
    body: &'a MethodBody,
}

impl<'a> LiveVariables<'a> {
    pub fn new(body: &'a MethodBody) -> Self {
        LiveVariables { body }
    }

    pub fn render(body: &MethodBody, fact: &LiveFact) -> String {
        let names: Vec<&str> = fact.iter().map(|v| body.var(*v).name.as_str()).collect();
        format!("[{}]", names.join(", "))
    }
}

impl DataflowAnalysis for LiveVariables<'_> {
    type Fact = LiveFact;

    fn name(&self) -> &str {
        "livevar"
    }

    fn direction(&self) -> Direction {
        Direction::Backward
    }

    fn new_boundary_fact(&self, _cfg: &Cfg) -> LiveFact {
        LiveFact::new()
    }

    fn new_initial_fact(&self) -> LiveFact {
        LiveFact::new()
    }

    fn meet_into(&self, source: &LiveFact, target: &mut LiveFact) -> bool {
        let before = target.len();
        target.extend(source.iter().copied());
        target.len() != before
    }

    fn transfer_node(&self, node: CfgNode, input: &LiveFact, output: &mut LiveFact) -> bool {
        let mut live = input.clone();
        if let CfgNode::Stmt(i) = node {
            let stmt = &self.body.stmts[i];
            if let Some(d) = stmt.def() {
                live.remove(&d);
            }
            live.extend(stmt.uses());
        }
        if live != *output {
            *output = live;
            true
        } else {
            false
        }
    }
}
