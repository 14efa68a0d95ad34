//! Hybrid trajectories: smooth arcs separated by impact events.

use crate::state::PhaseState;

/// One smooth arc of the hybrid flow, stored on the accepted time grid.
#[derive(Clone, Debug)]
pub struct TrajectoryArc {
    pub times: Vec<f64>,
    pub states: Vec<PhaseState>,
}

impl TrajectoryArc {
    pub fn start_time(&self) -> f64 {
        self.times[0]
    }

    pub fn end_time(&self) -> f64 {
        *self.times.last().unwrap()
    }

    pub fn last_state(&self) -> &PhaseState {
        self.states.last().unwrap()
    }
}

/// A recorded impact: `state_post = Delta(state_pre)` at time `t`.
///
/// The trajectory value at the event time is `state_post`; the
/// pre-impact limit is kept as `state_pre`.
#[derive(Clone, Debug)]
pub struct ImpactEvent {
    pub t: f64,
    pub component_id: usize,
    pub state_pre: PhaseState,
    pub state_post: PhaseState,
}

/// Why the simulation stopped.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub enum Termination {
    /// Reached `t_max`.
    TimeLimit,
    /// Two impacts closer than the minimum inter-impact time, or the
    /// impact count limit was hit.
    ZenoGuard,
}

/// Result of a hybrid simulation.
///
/// Arcs and events interleave: arc `k` ends at `events[k].state_pre`
/// and arc `k + 1` begins at `events[k].state_post`.
#[derive(Clone, Debug)]
pub struct HybridTrajectory {
    pub arcs: Vec<TrajectoryArc>,
    pub events: Vec<ImpactEvent>,
    pub termination: Termination,
}

impl HybridTrajectory {
    pub fn final_state(&self) -> &PhaseState {
        self.arcs.last().unwrap().last_state()
    }

    pub fn final_time(&self) -> f64 {
        self.arcs.last().unwrap().end_time()
    }

    pub fn n_events(&self) -> usize {
        self.events.len()
    }
}
