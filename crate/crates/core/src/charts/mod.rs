//! Action-angle coordinate charts.
//!
//! A chart is an invertible transform between canonical coordinates
//! and `(angles, actions)` on a neighborhood of a regular level set.
//! In chart coordinates the smooth dynamics are linear: actions stay
//! constant and angles advance at the constant frequencies
//! `Omega(actions)`.

mod disk;
mod pendulum;

pub use disk::{
    disk_backward, disk_chart, disk_forward, disk_impact_in_chart, disk_wall_membership,
};
pub use pendulum::{
    pendulum_action, pendulum_backward, pendulum_forward, pendulum_frequency,
    pendulum_impact_in_chart, pendulum_kappa_from_action, pendulum_libration_chart, PendulumPoint,
};

use std::sync::Arc;

use crate::error::Result;
use crate::observable::PredicateFn;
use crate::state::PhaseState;
use crate::symplectic::PhaseMap;

/// A chart point: angle coordinates first, action coordinates second.
#[derive(Clone, Debug, PartialEq)]
pub struct ChartPoint {
    pub angles: Vec<f64>,
    pub actions: Vec<f64>,
}

type ForwardFn = Arc<dyn Fn(&PhaseState) -> Result<ChartPoint> + Send + Sync>;
type BackwardFn = Arc<dyn Fn(&ChartPoint) -> Result<PhaseState> + Send + Sync>;
type ActionMapFn = Arc<dyn Fn(&[f64]) -> Result<Vec<f64>> + Send + Sync>;
type PeriodFn = Arc<dyn Fn(&[f64]) -> Vec<Option<f64>> + Send + Sync>;

/// An invertible action-angle transform with its validity domain.
#[derive(Clone)]
pub struct ActionAngleChart {
    dim: usize,
    forward: ForwardFn,
    backward: BackwardFn,
    domain: PredicateFn,
    frequencies: ActionMapFn,
    angle_periods: PeriodFn,
}

impl ActionAngleChart {
    pub fn new(
        dim: usize,
        forward: impl Fn(&PhaseState) -> Result<ChartPoint> + Send + Sync + 'static,
        backward: impl Fn(&ChartPoint) -> Result<PhaseState> + Send + Sync + 'static,
        domain: impl Fn(&PhaseState) -> bool + Send + Sync + 'static,
        frequencies: impl Fn(&[f64]) -> Result<Vec<f64>> + Send + Sync + 'static,
        angle_periods: impl Fn(&[f64]) -> Vec<Option<f64>> + Send + Sync + 'static,
    ) -> Self {
        Self {
            dim,
            forward: Arc::new(forward),
            backward: Arc::new(backward),
            domain: Arc::new(domain),
            frequencies: Arc::new(frequencies),
            angle_periods: Arc::new(angle_periods),
        }
    }

    /// Degrees of freedom `n`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn forward(&self, x: &PhaseState) -> Result<ChartPoint> {
        (self.forward)(x)
    }

    pub fn backward(&self, pt: &ChartPoint) -> Result<PhaseState> {
        (self.backward)(pt)
    }

    pub fn in_domain(&self, x: &PhaseState) -> bool {
        (self.domain)(x)
    }

    /// Angular frequencies `Omega(actions)` of the angle coordinates.
    pub fn frequencies(&self, actions: &[f64]) -> Result<Vec<f64>> {
        (self.frequencies)(actions)
    }

    /// Effective period of each angle coordinate as stored, given the
    /// actions; used for seam-aware differencing and unwrapping.
    pub fn angle_periods(&self, actions: &[f64]) -> Vec<Option<f64>> {
        (self.angle_periods)(actions)
    }

    /// The forward transform as a differentiable phase-space map
    /// `x -> [angles, actions]`, with period metadata for the angle
    /// outputs.
    pub fn forward_map(&self) -> PhaseMap {
        let fwd = self.forward.clone();
        let fwd_for_periods = self.forward.clone();
        let periods = self.angle_periods.clone();
        let n = self.dim;
        PhaseMap::new(2 * n, move |x: &PhaseState| {
            let pt = fwd(x)?;
            let mut out = pt.angles;
            out.extend_from_slice(&pt.actions);
            Ok(out)
        })
        .with_output_periods(move |x: &PhaseState| {
            let pt = fwd_for_periods(x)?;
            let mut out = periods(&pt.actions);
            out.extend(std::iter::repeat(None).take(n));
            Ok(out)
        })
    }
}

/// Unwrap a periodic sequence in place: each entry is shifted by a
/// multiple of `period` to minimize the jump from its predecessor.
pub fn unwrap_sequence(values: &mut [f64], period: f64) {
    for i in 1..values.len() {
        let delta = values[i] - values[i - 1];
        values[i] -= (delta / period).round() * period;
    }
}

/// Least-squares line fit `y ~ a t + b`; returns `(a, b, max |resid|)`.
pub fn linear_fit(ts: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = ts.len() as f64;
    let tm = ts.iter().sum::<f64>() / n;
    let ym = ys.iter().sum::<f64>() / n;
    let mut stt = 0.0;
    let mut sty = 0.0;
    for (t, y) in ts.iter().zip(ys) {
        stt += (t - tm) * (t - tm);
        sty += (t - tm) * (y - ym);
    }
    let slope = if stt > 0.0 { sty / stt } else { 0.0 };
    let intercept = ym - slope * tm;
    let max_resid = ts
        .iter()
        .zip(ys)
        .map(|(t, y)| (y - slope * t - intercept).abs())
        .fold(0.0_f64, f64::max);
    (slope, intercept, max_resid)
}
