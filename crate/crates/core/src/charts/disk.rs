//! Action-angle chart of the rolling disk in a planar harmonic
//! potential, in normalized units (mass, radius, gyration radius and
//! potential frequency all 1).
//!
//! Actions: `f1 = (p_x^2 + x^2)/2`, `f2 = (p_y^2 + y^2)/2`,
//! `f3 = p_theta^2 / 2`. Angles: `phi1 = angle(x, p_x)`,
//! `phi2 = angle(y, p_y)` with the two-argument angle in `[0, 2pi)`,
//! and the line coordinate `phi3 = theta / p_theta`. Each pair
//! `(phi_i, f_i)` is canonical, so the chart is Darboux for the
//! canonical two-form; the Hamiltonian reads `f1 + f2 + f3` and every
//! angle advances at unit frequency.
//!
//! The level sets are `S^1 x S^1 x R`: `phi3` is not an angle, but
//! because `theta` is stored in `[0, 2pi)` the stored `phi3` lives in
//! a window of length `2pi / |p_theta|`, which is the period metadata
//! the chart reports for it.

use std::f64::consts::TAU;

use super::{ActionAngleChart, ChartPoint};
use crate::error::{Error, Result};
use crate::state::{CoordKind, PhaseState};

/// Two-argument angle of the canonical pair `(pos, mom)` in
/// `[0, 2pi)`; agrees with `arctan(pos / mom)` on the `mom > 0`
/// half-plane and extends it continuously around the circle.
fn plane_angle(pos: f64, mom: f64) -> f64 {
    crate::state::normalize_angle(pos.atan2(mom))
}

fn check_dim(x: &PhaseState) -> Result<()> {
    if x.dim() != 3 {
        return Err(Error::ChartDomain {
            what: format!("disk chart needs 3 degrees of freedom, got {}", x.dim()),
        });
    }
    Ok(())
}

/// Forward disk chart: `x -> (phi, f)`.
pub fn disk_forward(x: &PhaseState) -> Result<([f64; 3], [f64; 3])> {
    check_dim(x)?;
    let (qx, qy, th) = (x.q()[0], x.q()[1], x.q()[2]);
    let (px, py, pth) = (x.p()[0], x.p()[1], x.p()[2]);
    if pth == 0.0 {
        return Err(Error::ChartDomain {
            what: "p_theta = 0 (f3 level is singular)".into(),
        });
    }
    if qx == 0.0 && px == 0.0 {
        return Err(Error::ChartDomain {
            what: "(x, p_x) = (0, 0)".into(),
        });
    }
    if qy == 0.0 && py == 0.0 {
        return Err(Error::ChartDomain {
            what: "(y, p_y) = (0, 0)".into(),
        });
    }
    let f = [
        0.5 * (px * px + qx * qx),
        0.5 * (py * py + qy * qy),
        0.5 * pth * pth,
    ];
    let phi = [plane_angle(qx, px), plane_angle(qy, py), th / pth];
    Ok((phi, f))
}

/// Inverse disk chart. The sign of `p_theta` is not recoverable from
/// `f3` alone and is passed as the chart branch.
pub fn disk_backward(phi: &[f64; 3], f: &[f64; 3], ptheta_positive: bool) -> Result<PhaseState> {
    for (i, fi) in f.iter().enumerate() {
        if !(fi.is_finite() && *fi > 0.0) {
            return Err(Error::ChartDomain {
                what: format!("action f{} = {} must be positive", i + 1, fi),
            });
        }
    }
    let pth = if ptheta_positive {
        (2.0 * f[2]).sqrt()
    } else {
        -(2.0 * f[2]).sqrt()
    };
    let q = vec![
        (2.0 * f[0]).sqrt() * phi[0].sin(),
        (2.0 * f[1]).sqrt() * phi[1].sin(),
        phi[2] * pth,
    ];
    let p = vec![
        (2.0 * f[0]).sqrt() * phi[0].cos(),
        (2.0 * f[1]).sqrt() * phi[1].cos(),
        pth,
    ];
    PhaseState::new(
        q,
        p,
        vec![CoordKind::Linear, CoordKind::Linear, CoordKind::Angular],
    )
}

/// Residuals of the impact-surface equations at a chart point for the
/// wall at height `a`: the wall condition `2 f2 sin^2 phi2 - a^2` and
/// the rolling condition `f3 - f1 cos^2 phi1` (normalized units).
pub fn disk_wall_membership(phi: &[f64; 3], f: &[f64; 3], a: f64) -> (f64, f64) {
    let wall = 2.0 * f[1] * phi[1].sin() * phi[1].sin() - a * a;
    let rolling = f[2] - f[0] * phi[0].cos() * phi[0].cos();
    (wall, rolling)
}

/// Impact map conjugated into chart coordinates for the wall at
/// height `a`.
///
/// Defined by conjugation through canonical coordinates
/// (`backward -> impact -> forward`), which resolves the branch of the
/// closed-form relation `phi2+ = -arctan(tan phi2- / e)`; the
/// closed forms are consistency checks on it. The input must satisfy
/// the impact-surface equations at `membership_tol`.
pub fn disk_impact_in_chart(
    phi: &[f64; 3],
    f: &[f64; 3],
    a: f64,
    e: f64,
    ptheta_positive: bool,
    membership_tol: f64,
) -> Result<([f64; 3], [f64; 3])> {
    let (wall, rolling) = disk_wall_membership(phi, f, a);
    if wall.abs() > membership_tol || rolling.abs() > membership_tol {
        return Err(Error::NotOnSurface {
            what: format!(
                "chart point violates the impact-surface equations: wall residual {wall:e}, \
                 rolling residual {rolling:e}"
            ),
        });
    }
    let x = disk_backward(phi, f, ptheta_positive)?;
    let post = impact_map_normalized(&x, e)?;
    disk_forward(&post)
}

/// The disk impact map in canonical coordinates, normalized units:
/// `p_x+ = p_theta+ = (p_x + p_theta)/2`, `p_y+ = -e p_y`.
fn impact_map_normalized(x: &PhaseState, e: f64) -> Result<PhaseState> {
    let mean = 0.5 * (x.p()[0] + x.p()[2]);
    PhaseState::new(
        x.q().to_vec(),
        vec![mean, -e * x.p()[1], mean],
        x.kinds().to_vec(),
    )
}

/// The full chart object for one `p_theta` sign branch.
pub fn disk_chart(ptheta_positive: bool) -> ActionAngleChart {
    ActionAngleChart::new(
        3,
        |x| {
            let (phi, f) = disk_forward(x)?;
            Ok(ChartPoint {
                angles: phi.to_vec(),
                actions: f.to_vec(),
            })
        },
        move |pt| {
            let phi: [f64; 3] = pt.angles.as_slice().try_into().map_err(|_| {
                Error::ChartDomain {
                    what: "disk chart point needs 3 angles".into(),
                }
            })?;
            let f: [f64; 3] = pt.actions.as_slice().try_into().map_err(|_| {
                Error::ChartDomain {
                    what: "disk chart point needs 3 actions".into(),
                }
            })?;
            disk_backward(&phi, &f, ptheta_positive)
        },
        move |x| {
            x.dim() == 3
                && (if ptheta_positive {
                    x.p()[2] > 0.0
                } else {
                    x.p()[2] < 0.0
                })
                && (x.q()[0] != 0.0 || x.p()[0] != 0.0)
                && (x.q()[1] != 0.0 || x.p()[1] != 0.0)
        },
        |_actions| Ok(vec![1.0, 1.0, 1.0]),
        |actions| {
            let pth = (2.0 * actions[2].max(0.0)).sqrt();
            let phi3_period = if pth > 0.0 { Some(TAU / pth) } else { None };
            vec![Some(TAU), Some(TAU), phi3_period]
        },
    )
}
