use std::time::{Duration, Instant};

use super::Plugin;
use crate::bitset::HybridSet;
use crate::pta::{CallEdge, CsMethodId, EventTally, PointerId, Solver, StmtRef};

/// Counts callbacks and measures wall-clock time from start to finish.
#[derive(Debug, Clone, Default)]
pub struct TimerPlugin {
    started: Option<Instant>,
    elapsed: Duration,
    counts: EventTally,
}

impl TimerPlugin {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn counts(&self) -> EventTally {
        self.counts
    }

    pub fn elapsed(&self) -> Duration {
        self.elapsed
    }

    pub fn summary(&self) -> String {
        format!("pta finished in {:.3}s ({})", self.elapsed.as_secs_f64(), self.counts)
    }
}

impl Plugin for TimerPlugin {
    fn on_start(&mut self, _solver: &mut Solver) {
        self.started = Some(Instant::now());
    }

    fn on_new_method(&mut self, _solver: &mut Solver, _method: CsMethodId) {
        self.counts.new_methods += 1;
    }

    fn on_new_stmt(&mut self, _solver: &mut Solver, _stmt: StmtRef) {
        self.counts.new_stmts += 1;
    }

    fn on_new_points_to_set(&mut self, _solver: &mut Solver, _var: PointerId, _delta: &HybridSet) {
        self.counts.new_points_to_sets += 1;
    }

    fn on_new_call_edge(&mut self, _solver: &mut Solver, _edge: &CallEdge) {
        self.counts.new_call_edges += 1;
    }

    fn on_finish(&mut self, _solver: &mut Solver) {
        if let Some(start) = self.started {
            self.elapsed = start.elapsed();
        }
    }
}
