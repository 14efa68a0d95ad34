//! Homogeneous disk in a planar harmonic potential, rolling without
//! sliding when it hits one of two rough walls.
//!
//! Configuration `(x, y, theta)` with momenta `(p_x, p_y, p_theta)`;
//! the walls sit at `y = 0` and `y = h`, so the disk center makes
//! contact at heights `R` and `h - R`. The impact transfers momentum
//! between translation and rotation through the rolling condition and
//! scales the normal momentum by the restitution coefficient:
//!
//! ```text
//! p_x+     = (R^2 p_x + k^2 R p_theta) / (k^2 + R^2)
//! p_y+     = -e p_y
//! p_theta+ = (R p_x + k^2 p_theta) / (k^2 + R^2)
//! ```
//!
//! The exact switching surface carries the rolling condition
//! `p_theta = k^2 p_x / R` and is therefore codimension 2; generic
//! trajectories do not hit it exactly. The simulator's guarded
//! components trigger on the position guard alone (with the physical
//! approach direction); the rolling condition is kept as an extra
//! constraint of the surface samplers, which is where the conserved
//! impact identities are claimed.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::Rng;

use crate::charts::disk_chart;
use crate::error::{Error, Result};
use crate::observable::Observable;
use crate::state::{CoordKind, PhaseState};
use crate::system::{Approach, GuardedImpact, HybridSystem};
use crate::verify::sampling::SurfaceSampler;

use super::ModelBundle;

/// Parameters of the disk model.
#[derive(Clone, Copy, Debug)]
pub struct DiskParams {
    pub mass: f64,
    pub radius: f64,
    /// Radius of gyration.
    pub gyration: f64,
    /// Frequency of the harmonic potential.
    pub frequency: f64,
    /// Wall separation; must exceed twice the radius so the two
    /// contact heights `R` and `h - R` are distinct and ordered.
    pub wall_gap: f64,
    /// Restitution coefficient in `[0, 1]`.
    pub restitution: f64,
}

impl Default for DiskParams {
    fn default() -> Self {
        Self {
            mass: 1.0,
            radius: 1.0,
            gyration: 1.0,
            frequency: 1.0,
            wall_gap: 4.0,
            restitution: 1.0,
        }
    }
}

impl DiskParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("m", self.mass),
            ("R", self.radius),
            ("k", self.gyration),
            ("omega", self.frequency),
            ("h", self.wall_gap),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter {
                    what: format!("disk parameter {name} = {v} must be positive"),
                });
            }
        }
        if self.wall_gap <= 2.0 * self.radius {
            return Err(Error::InvalidParameter {
                what: format!(
                    "wall separation h = {} must exceed 2R = {} so the contact heights are \
                     distinct and ordered",
                    self.wall_gap,
                    2.0 * self.radius
                ),
            });
        }
        if !(0.0..=1.0).contains(&self.restitution) {
            return Err(Error::InvalidParameter {
                what: format!("restitution e = {} outside [0, 1]", self.restitution),
            });
        }
        Ok(())
    }

    /// Whether the parameters match the normalization the closed-form
    /// chart assumes.
    pub fn is_normalized(&self) -> bool {
        self.mass == 1.0 && self.radius == 1.0 && self.gyration == 1.0 && self.frequency == 1.0
    }

    /// Contact height of the wall hit by the given component.
    pub fn wall_height(&self, component_id: usize) -> Result<f64> {
        match component_id {
            0 => Ok(self.radius),
            1 => Ok(self.wall_gap - self.radius),
            _ => Err(Error::UnknownComponent { component_id }),
        }
    }
}

/// The impact map in canonical coordinates.
pub fn disk_impact_map(params: &DiskParams, x: &PhaseState) -> Result<PhaseState> {
    let (r, k2) = (params.radius, params.gyration * params.gyration);
    let denom = k2 + r * r;
    let (px, py, pth) = (x.p()[0], x.p()[1], x.p()[2]);
    PhaseState::new(
        x.q().to_vec(),
        vec![
            (r * r * px + k2 * r * pth) / denom,
            -params.restitution * py,
            (r * px + k2 * pth) / denom,
        ],
        x.kinds().to_vec(),
    )
}

fn kinds() -> Vec<CoordKind> {
    vec![CoordKind::Linear, CoordKind::Linear, CoordKind::Angular]
}

/// Build the disk system with its integral set, surface samplers and
/// (for normalized parameters) chart.
pub fn build_disk(params: DiskParams) -> Result<ModelBundle> {
    params.validate()?;
    let p = params;

    let hamiltonian = {
        let (m, k2, w2) = (p.mass, p.gyration * p.gyration, p.frequency * p.frequency);
        Observable::new("H", move |x: &PhaseState| {
            (x.p()[0] * x.p()[0] + x.p()[1] * x.p()[1]) / (2.0 * m)
                + x.p()[2] * x.p()[2] / (2.0 * m * k2)
                + 0.5 * w2 * (x.q()[0] * x.q()[0] + x.q()[1] * x.q()[1])
        })
        .with_gradient(move |x: &PhaseState| {
            vec![
                w2 * x.q()[0],
                w2 * x.q()[1],
                0.0,
                x.p()[0] / m,
                x.p()[1] / m,
                x.p()[2] / (m * k2),
            ]
        })
    };

    let mut components = Vec::new();
    for component_id in [0_usize, 1] {
        let a = p.wall_height(component_id)?;
        let guard = Observable::new(format!("y - {a}"), move |x: &PhaseState| x.q()[1] - a)
            .with_gradient(|_| vec![0.0, 1.0, 0.0, 0.0, 0.0, 0.0]);
        // physical contact moves toward the wall
        let (approach, admissible): (Approach, fn(&PhaseState) -> bool) = if component_id == 0 {
            (Approach::FromPositive, |x| x.p()[1] < 0.0)
        } else {
            (Approach::FromNegative, |x| x.p()[1] > 0.0)
        };
        components.push(GuardedImpact::new(
            component_id,
            guard,
            approach,
            admissible,
            move |x| disk_impact_map(&p, x),
        ));
    }

    let system = HybridSystem::new(
        hamiltonian,
        components,
        BTreeMap::from([
            ("m".into(), p.mass),
            ("R".into(), p.radius),
            ("k".into(), p.gyration),
            ("omega".into(), p.frequency),
            ("h".into(), p.wall_gap),
            ("e".into(), p.restitution),
        ]),
        kinds(),
        true,
    )?;

    let integrals = crate::symplectic::IntegralSet::new(vec![
        Observable::new("f1", |x: &PhaseState| {
            0.5 * (x.p()[0] * x.p()[0] + x.q()[0] * x.q()[0])
        })
        .with_gradient(|x: &PhaseState| vec![x.q()[0], 0.0, 0.0, x.p()[0], 0.0, 0.0]),
        Observable::new("f2", |x: &PhaseState| {
            0.5 * (x.p()[1] * x.p()[1] + x.q()[1] * x.q()[1])
        })
        .with_gradient(|x: &PhaseState| vec![0.0, x.q()[1], 0.0, 0.0, x.p()[1], 0.0]),
        Observable::new("f3", |x: &PhaseState| 0.5 * x.p()[2] * x.p()[2])
            .with_gradient(|x: &PhaseState| vec![0.0, 0.0, 0.0, 0.0, 0.0, x.p()[2]]),
    ]);

    let surface_samplers = [0_usize, 1]
        .into_iter()
        .map(|component_id| {
            let a = p.wall_height(component_id).expect("validated id");
            let ratio = p.gyration * p.gyration / p.radius;
            let rolling = Observable::new("p_theta - k^2 p_x / R", move |x: &PhaseState| {
                x.p()[2] - ratio * x.p()[0]
            })
            .with_gradient(move |_| vec![0.0, 0.0, 0.0, -ratio, 0.0, 1.0]);
            SurfaceSampler {
                component_id,
                extra_constraints: vec![rolling],
                draw: Some(Arc::new(move |rng, half_width| {
                    exact_surface_draw(&p, component_id, a, rng, half_width)
                })),
                collision_partner: None,
            }
        })
        .collect();

    let chart = if p.is_normalized() {
        Some(disk_chart(true))
    } else {
        None
    };

    Ok(ModelBundle {
        system,
        integrals,
        chart,
        surface_samplers,
        coord_names: vec!["x".into(), "y".into(), "theta".into()],
        momentum_names: vec!["p_x".into(), "p_y".into(), "p_theta".into()],
    })
}

/// Closed-form draw on the exact surface: free coordinates sampled in
/// the box, `y` at the contact height, `p_y` with the approach sign,
/// `p_theta` from the rolling condition.
fn exact_surface_draw(
    params: &DiskParams,
    component_id: usize,
    a: f64,
    rng: &mut rand_chacha::ChaCha8Rng,
    half_width: f64,
) -> Result<PhaseState> {
    let x = rng.gen_range(-half_width..half_width);
    let theta = rng.gen_range(0.0..std::f64::consts::TAU);
    let px = rng.gen_range(-half_width..half_width);
    let normal = rng.gen_range(0.05 * half_width..half_width);
    let py = if component_id == 0 { -normal } else { normal };
    let pth = params.gyration * params.gyration * px / params.radius;
    PhaseState::new(vec![x, a, theta], vec![px, py, pth], kinds())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn params_validated() {
        let mut p = DiskParams::default();
        p.wall_gap = 1.5;
        assert!(p.validate().is_err());
        p.wall_gap = 4.0;
        p.restitution = 1.2;
        assert!(p.validate().is_err());
        p.restitution = 0.0;
        assert!(p.validate().is_ok());
    }

    #[test]
    fn impact_map_reference_point() {
        // R = k = 1, e = 0.5: (1, -2, 1) -> (1, 1, 1)
        let p = DiskParams {
            restitution: 0.5,
            ..DiskParams::default()
        };
        let x = PhaseState::new(vec![0.0, 1.0, 0.0], vec![1.0, -2.0, 1.0], kinds()).unwrap();
        let post = disk_impact_map(&p, &x).unwrap();
        assert_eq!(post.p(), &[1.0, 1.0, 1.0]);
        assert_eq!(post.q(), x.q());
    }

    #[test]
    fn grazing_impact_keeps_zero_normal_momentum() {
        let p = DiskParams {
            restitution: 0.7,
            ..DiskParams::default()
        };
        let x = PhaseState::new(vec![0.0, 1.0, 0.0], vec![0.4, 0.0, 0.1], kinds()).unwrap();
        let post = disk_impact_map(&p, &x).unwrap();
        assert_eq!(post.p()[1], 0.0);
    }

    #[test]
    fn chart_only_for_normalized_parameters() {
        let normalized = build_disk(DiskParams::default()).unwrap();
        assert!(normalized.chart().is_ok());
        let scaled = build_disk(DiskParams {
            mass: 2.0,
            ..DiskParams::default()
        })
        .unwrap();
        assert!(scaled.chart().is_err());
    }
}
