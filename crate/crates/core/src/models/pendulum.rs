//! Pendulum mounted on the floor, hitting it at the horizontal.
//!
//! Configuration angle `theta` with momentum `p`, Hamiltonian
//! `H = p^2 / (2 m l^2) + m g l (1 - cos theta)`. The switching
//! surface is `{cos theta = 0, p >= 0}` as given, which contains both
//! horizontal positions; the impact map is `(theta, p) -> (theta,
//! -e p)`.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::Rng;

use crate::charts::pendulum_libration_chart;
use crate::error::{Error, Result};
use crate::observable::Observable;
use crate::state::{CoordKind, PhaseState};
use crate::system::{Approach, GuardedImpact, HybridSystem};
use crate::verify::sampling::SurfaceSampler;

use super::ModelBundle;

/// Parameters of the pendulum model.
#[derive(Clone, Copy, Debug)]
pub struct PendulumParams {
    pub mass: f64,
    pub gravity: f64,
    pub length: f64,
    /// Restitution coefficient in `[0, 1]`.
    pub restitution: f64,
}

impl Default for PendulumParams {
    fn default() -> Self {
        Self {
            mass: 1.0,
            gravity: 1.0,
            length: 1.0,
            restitution: 1.0,
        }
    }
}

impl PendulumParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("m", self.mass),
            ("g", self.gravity),
            ("l", self.length),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter {
                    what: format!("pendulum parameter {name} = {v} must be positive"),
                });
            }
        }
        if !(0.0..=1.0).contains(&self.restitution) {
            return Err(Error::InvalidParameter {
                what: format!("restitution e = {} outside [0, 1]", self.restitution),
            });
        }
        Ok(())
    }

    pub fn is_normalized(&self) -> bool {
        self.mass == 1.0 && self.gravity == 1.0 && self.length == 1.0
    }
}

/// Build the pendulum system; the candidate integral set is `(H)`.
pub fn build_pendulum(params: PendulumParams) -> Result<ModelBundle> {
    params.validate()?;
    let p = params;
    let ml2 = p.mass * p.length * p.length;
    let mgl = p.mass * p.gravity * p.length;

    let hamiltonian = Observable::new("H", move |x: &PhaseState| {
        x.p()[0] * x.p()[0] / (2.0 * ml2) + mgl * (1.0 - x.q()[0].cos())
    })
    .with_gradient(move |x: &PhaseState| vec![mgl * x.q()[0].sin(), x.p()[0] / ml2]);

    let guard = Observable::new("cos(theta)", |x: &PhaseState| x.q()[0].cos())
        .with_gradient(|x: &PhaseState| vec![-x.q()[0].sin(), 0.0]);
    let e = p.restitution;
    let component = GuardedImpact::new(
        0,
        guard,
        Approach::Either,
        |x| x.p()[0] >= 0.0,
        move |x| {
            PhaseState::new(
                x.q().to_vec(),
                vec![-e * x.p()[0]],
                x.kinds().to_vec(),
            )
        },
    );

    let system = HybridSystem::new(
        hamiltonian.clone(),
        vec![component],
        BTreeMap::from([
            ("m".into(), p.mass),
            ("g".into(), p.gravity),
            ("l".into(), p.length),
            ("e".into(), p.restitution),
        ]),
        vec![CoordKind::Angular],
        true,
    )?;

    let integrals = crate::symplectic::IntegralSet::new(vec![hamiltonian]);

    // Closed-form draw on C, and the collision partner that toggles
    // between the two horizontal positions (both keep cos theta = 0
    // and the energy, but are distinct points of the component).
    let draw: crate::verify::sampling::DrawFn = Arc::new(move |rng, _half_width| {
        let theta = if rng.gen_bool(0.5) {
            std::f64::consts::FRAC_PI_2
        } else {
            1.5 * std::f64::consts::PI
        };
        let momentum = rng.gen_range(0.05..1.35);
        PhaseState::new(vec![theta], vec![momentum], vec![CoordKind::Angular])
    });
    let partner: crate::verify::sampling::PartnerFn = Arc::new(|x0, f, _rng| {
        let mirrored = PhaseState::new(
            vec![crate::state::normalize_angle(x0.q()[0] + std::f64::consts::PI)],
            x0.p().to_vec(),
            x0.kinds().to_vec(),
        )
        .ok()?;
        let same = (f.eval(&mirrored).ok()? - f.eval(x0).ok()?).abs() < 1e-12;
        same.then_some(mirrored)
    });
    let surface_samplers = vec![SurfaceSampler {
        component_id: 0,
        extra_constraints: Vec::new(),
        draw: Some(draw),
        collision_partner: Some(partner),
    }];

    let chart = if p.is_normalized() {
        Some(pendulum_libration_chart())
    } else {
        None
    };

    Ok(ModelBundle {
        system,
        integrals,
        chart,
        surface_samplers,
        coord_names: vec!["theta".into()],
        momentum_names: vec!["p".into()],
    })
}
