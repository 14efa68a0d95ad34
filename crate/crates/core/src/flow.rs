//! Time integration of the continuous dynamics and execution of the
//! full hybrid flow.
//!
//! Impact events are localized by bisection on the integration time,
//! re-integrating from the start of the bracketing step rather than
//! interpolating, so the located pre-impact state lies on a true
//! numerical trajectory. Zeno behavior is excluded by a minimum
//! inter-impact time and an impact-count cap.

use crate::error::{Error, Result};
use crate::state::PhaseState;
use crate::symplectic::{gradient, hamiltonian_vector_field};
use crate::system::{Approach, GuardedImpact, HybridSystem, DEFAULT_GUARD_TOL};
use crate::trajectory::{HybridTrajectory, ImpactEvent, Termination, TrajectoryArc};

/// Integration scheme for the smooth arcs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub enum Scheme {
    /// Second-order symplectic scheme; requires a separable
    /// Hamiltonian.
    StormerVerlet,
    /// Classic fourth-order Runge-Kutta; accepts any Hamiltonian.
    Rk4,
}

/// Configuration of the hybrid integrator.
#[derive(Clone, Copy, Debug)]
pub struct IntegratorConfig {
    pub scheme: Scheme,
    /// Step size of the time grid.
    pub step: f64,
    pub t_max: f64,
    /// Width of the time bracket to which events are refined.
    pub event_tol: f64,
    /// Minimum admissible time between impacts (Zeno guard).
    pub min_event_separation: f64,
    /// Impact-count cap (Zeno guard).
    pub max_impacts: usize,
    /// Guard membership tolerance.
    pub guard_tol: f64,
}

impl IntegratorConfig {
    pub fn new(scheme: Scheme, step: f64, t_max: f64) -> Result<Self> {
        let cfg = Self {
            scheme,
            step,
            t_max,
            event_tol: 1e-10,
            min_event_separation: 1e-6,
            max_impacts: 1_000_000,
            guard_tol: DEFAULT_GUARD_TOL,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_event_tol(mut self, event_tol: f64) -> Result<Self> {
        self.event_tol = event_tol;
        self.validate()?;
        Ok(self)
    }

    pub fn with_min_event_separation(mut self, sep: f64) -> Result<Self> {
        self.min_event_separation = sep;
        self.validate()?;
        Ok(self)
    }

    pub fn with_max_impacts(mut self, max_impacts: usize) -> Self {
        self.max_impacts = max_impacts;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(Error::InvalidConfig {
                what: format!("step h = {} must be positive", self.step),
            });
        }
        if !(self.t_max >= 0.0 && self.t_max.is_finite()) {
            return Err(Error::InvalidConfig {
                what: format!("t_max = {} must be non-negative", self.t_max),
            });
        }
        if !(self.event_tol > 0.0 && self.event_tol < self.step) {
            return Err(Error::InvalidConfig {
                what: "event_tol must satisfy 0 < event_tol < h".into(),
            });
        }
        if self.min_event_separation <= self.event_tol {
            return Err(Error::InvalidConfig {
                what: "min_event_separation must exceed event_tol".into(),
            });
        }
        Ok(())
    }
}

/// One step of the selected scheme applied to the Hamiltonian vector
/// field of the system.
pub fn step(system: &HybridSystem, scheme: Scheme, x: &PhaseState, h: f64) -> Result<PhaseState> {
    match scheme {
        Scheme::StormerVerlet => step_stormer_verlet(system, x, h),
        Scheme::Rk4 => step_rk4(system, x, h),
    }
}

fn step_stormer_verlet(system: &HybridSystem, x: &PhaseState, h: f64) -> Result<PhaseState> {
    if !system.is_separable() {
        return Err(Error::NonSeparable);
    }
    let n = x.dim();
    let kinds = x.kinds().to_vec();
    let ham = system.hamiltonian();

    // For separable H, dH/dq is independent of p and dH/dp of q, so
    // mixed evaluation points are exact.
    let g0 = gradient(ham, x, None)?;
    let mut half = x.packed();
    for i in 0..n {
        half[n + i] -= 0.5 * h * g0[i];
    }
    let x_half = PhaseState::from_packed(&half, &kinds)?;

    let g_half = gradient(ham, &x_half, None)?;
    let mut moved = x_half.packed();
    for i in 0..n {
        moved[i] += h * g_half[n + i];
    }
    let x_moved = PhaseState::from_packed(&moved, &kinds)?;

    let g1 = gradient(ham, &x_moved, None)?;
    let mut out = x_moved.packed();
    for i in 0..n {
        out[n + i] -= 0.5 * h * g1[i];
    }
    PhaseState::from_packed(&out, &kinds)
}

fn step_rk4(system: &HybridSystem, x: &PhaseState, h: f64) -> Result<PhaseState> {
    let kinds = x.kinds().to_vec();
    let ham = system.hamiltonian();
    let z0 = x.packed();

    let add = |z: &[f64], k: &[f64], c: f64| -> Result<PhaseState> {
        let v: Vec<f64> = z.iter().zip(k).map(|(a, b)| a + c * b).collect();
        PhaseState::from_packed(&v, &kinds)
    };

    let k1 = hamiltonian_vector_field(ham, x)?;
    let k2 = hamiltonian_vector_field(ham, &add(&z0, &k1, 0.5 * h)?)?;
    let k3 = hamiltonian_vector_field(ham, &add(&z0, &k2, 0.5 * h)?)?;
    let k4 = hamiltonian_vector_field(ham, &add(&z0, &k3, h)?)?;

    let out: Vec<f64> = (0..z0.len())
        .map(|i| z0[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect();
    PhaseState::from_packed(&out, &kinds)
}

fn crossed(approach: Approach, g_start: f64, g: f64) -> bool {
    match approach {
        Approach::FromPositive => g_start > 0.0 && g <= 0.0,
        Approach::FromNegative => g_start < 0.0 && g >= 0.0,
        Approach::Either => (g_start > 0.0 && g <= 0.0) || (g_start < 0.0 && g >= 0.0),
    }
}

/// Locate the guard crossing of `component` inside the step from
/// `(x_a, t_a)` to `(x_b, t_b = t_a + h)`.
///
/// Returns the refined `(t*, x*)` when the guard changes sign in the
/// declared approach direction and the crossing state is admissible;
/// `None` when there is no sign change or admissibility fails at the
/// located state.
pub fn locate_event(
    system: &HybridSystem,
    component: &GuardedImpact,
    x_a: &PhaseState,
    t_a: f64,
    x_b: &PhaseState,
    t_b: f64,
    cfg: &IntegratorConfig,
) -> Result<Option<(f64, PhaseState)>> {
    let g_a = component.guard_value(x_a)?;
    let g_b = component.guard_value(x_b)?;
    if !crossed(component.approach(), g_a, g_b) {
        return Ok(None);
    }
    let h = t_b - t_a;
    let mut lo = 0.0_f64;
    let mut hi = h;
    let mut x_hi = x_b.clone();
    let mut iters = 0;
    while hi - lo > cfg.event_tol && iters < 200 {
        let mid = 0.5 * (lo + hi);
        let x_mid = step(system, cfg.scheme, x_a, mid)?;
        if crossed(component.approach(), g_a, component.guard_value(&x_mid)?) {
            hi = mid;
            x_hi = x_mid;
        } else {
            lo = mid;
        }
        iters += 1;
    }
    // A few extra halvings if the guard value at the bracket end is
    // still outside the membership tolerance (steep guards).
    while component.guard_value(&x_hi)?.abs() > cfg.guard_tol && iters < 300 {
        let mid = 0.5 * (lo + hi);
        let x_mid = step(system, cfg.scheme, x_a, mid)?;
        if crossed(component.approach(), g_a, component.guard_value(&x_mid)?) {
            hi = mid;
            x_hi = x_mid;
        } else {
            lo = mid;
        }
        iters += 1;
    }
    if !component.admissible(&x_hi) {
        return Ok(None);
    }
    Ok(Some((t_a + hi, x_hi)))
}

/// Run the hybrid flow from `x0`, alternating smooth arcs and impacts.
///
/// If `x0` lies on an admissible component the impact is applied
/// first, so the trajectory value at the start is the post-impact
/// state. Zeno terminations are reported in the trajectory, not
/// thrown; non-finite states are an error.
pub fn simulate(
    system: &HybridSystem,
    x0: &PhaseState,
    cfg: &IntegratorConfig,
) -> Result<HybridTrajectory> {
    cfg.validate()?;
    let mut arcs: Vec<TrajectoryArc> = Vec::new();
    let mut events: Vec<ImpactEvent> = Vec::new();

    let mut arc_times = vec![0.0];
    let mut arc_states = vec![x0.clone()];
    let mut last_event_t = f64::NEG_INFINITY;

    // Impact-first convention when starting on the surface.
    if let Some(comp) = on_admissible_surface(system, x0, cfg.guard_tol)? {
        let post = apply_impact(system, comp, x0)?;
        events.push(ImpactEvent {
            t: 0.0,
            component_id: comp,
            state_pre: x0.clone(),
            state_post: post.clone(),
        });
        arcs.push(TrajectoryArc {
            times: arc_times,
            states: arc_states,
        });
        arc_times = vec![0.0];
        arc_states = vec![post];
        last_event_t = 0.0;
    }

    let mut arc_start_t = arc_times[0];
    let mut steps_in_arc = 0_usize;
    let mut zeno = false;

    'outer: loop {
        let t = arc_start_t + steps_in_arc as f64 * cfg.step;
        if t >= cfg.t_max - 1e-15 * cfg.t_max.max(1.0) {
            break;
        }
        let h = cfg.step.min(cfg.t_max - t);
        let x = arc_states.last().unwrap().clone();
        let x_next = step(system, cfg.scheme, &x, h).map_err(|e| match e {
            Error::NonFinite { .. } => Error::IntegrationBlowUp { t },
            other => other,
        })?;
        let t_next = if h < cfg.step {
            cfg.t_max
        } else {
            arc_start_t + (steps_in_arc + 1) as f64 * cfg.step
        };

        // Earliest admissible crossing among the components wins.
        let mut best: Option<(f64, PhaseState, usize)> = None;
        for comp in system.components() {
            if let Some((t_star, x_star)) =
                locate_event(system, comp, &x, t, &x_next, t_next, cfg)?
            {
                match &best {
                    Some((t_best, _, _)) => {
                        if (t_star - t_best).abs() < cfg.event_tol {
                            return Err(Error::SimultaneousImpacts { t: t_star });
                        }
                        if t_star < *t_best {
                            best = Some((t_star, x_star, comp.component_id()));
                        }
                    }
                    None => best = Some((t_star, x_star, comp.component_id())),
                }
            }
        }

        match best {
            Some((t_star, x_pre, component_id)) => {
                // Zeno guards: too close to the previous impact, or too
                // many impacts. The offending impact is not recorded;
                // the final arc ends at its pre-impact state.
                if t_star - last_event_t < cfg.min_event_separation
                    || events.len() >= cfg.max_impacts
                {
                    arc_times.push(t_star);
                    arc_states.push(x_pre);
                    zeno = true;
                    break 'outer;
                }
                let post = apply_impact(system, component_id, &x_pre)?;
                arc_times.push(t_star);
                arc_states.push(x_pre.clone());
                arcs.push(TrajectoryArc {
                    times: std::mem::take(&mut arc_times),
                    states: std::mem::take(&mut arc_states),
                });
                events.push(ImpactEvent {
                    t: t_star,
                    component_id,
                    state_pre: x_pre,
                    state_post: post.clone(),
                });
                arc_times = vec![t_star];
                arc_states = vec![post];
                arc_start_t = t_star;
                steps_in_arc = 0;
                last_event_t = t_star;
            }
            None => {
                arc_times.push(t_next);
                arc_states.push(x_next);
                steps_in_arc += 1;
            }
        }
    }

    arcs.push(TrajectoryArc {
        times: arc_times,
        states: arc_states,
    });
    Ok(HybridTrajectory {
        arcs,
        events,
        termination: if zeno {
            Termination::ZenoGuard
        } else {
            Termination::TimeLimit
        },
    })
}

fn on_admissible_surface(
    system: &HybridSystem,
    x: &PhaseState,
    guard_tol: f64,
) -> Result<Option<usize>> {
    let mut found = None;
    for comp in system.components() {
        if comp.on_surface(x, guard_tol)? {
            if found.is_some() {
                return Err(Error::SimultaneousImpacts { t: 0.0 });
            }
            found = Some(comp.component_id());
        }
    }
    Ok(found)
}

fn apply_impact(
    system: &HybridSystem,
    component_id: usize,
    x_pre: &PhaseState,
) -> Result<PhaseState> {
    let post = system.component(component_id)?.apply(x_pre)?;
    // Standing assumption Delta(S) and S disjoint, checked at runtime.
    for comp in system.components() {
        if comp.on_surface(&post, DEFAULT_GUARD_TOL)? {
            return Err(Error::ImpactSurfaceNotLeft {
                component_id: comp.component_id(),
            });
        }
    }
    Ok(post)
}
