//! Action-angle chart of the pendulum in the libration regime, in
//! normalized units (mass, gravity, length all 1).
//!
//! With `H = p^2/2 + 1 - cos(theta)` and `kappa = H/2 in (0, 1)`, the
//! canonical coordinates as functions of `(kappa, zeta)` are
//!
//! ```text
//! theta = 2 arcsin( sqrt(kappa) sn(2 K(kappa) zeta / pi | kappa) )
//! p     = 2 sqrt(kappa)         cn(2 K(kappa) zeta / pi | kappa)
//! ```
//!
//! and the action is `J = (8/pi) [E(kappa) - (1 - kappa) K(kappa)]`.
//! The Darboux pair is `(zeta, J)`, not `(zeta, kappa)`; the angle
//! advances at frequency `pi / (2 K(kappa))`. The separatrix
//! `kappa = 1` and the rotation regime beyond it are outside the
//! chart.

use std::f64::consts::{PI, TAU};

use super::{ActionAngleChart, ChartPoint};
use crate::elliptic::{complete_e, complete_k, incomplete_f, jacobi_sn_cn_dn};
use crate::error::{Error, Result};
use crate::state::{CoordKind, PhaseState};

/// Chart coordinates of a libration state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PendulumPoint {
    /// Half energy, `kappa = H/2`.
    pub kappa: f64,
    /// Angle coordinate in `[0, 2pi)`.
    pub zeta: f64,
    /// Action coordinate `J(kappa)`.
    pub action: f64,
}

fn pendulum_energy(theta: f64, p: f64) -> f64 {
    0.5 * p * p + 1.0 - theta.cos()
}

fn check_kappa(kappa: f64) -> Result<()> {
    if !(kappa.is_finite() && kappa > 0.0 && kappa < 1.0) {
        return Err(Error::ChartDomain {
            what: format!("kappa = {kappa} outside the libration range (0, 1)"),
        });
    }
    Ok(())
}

/// Libration action `J(kappa) = (8/pi)[E(kappa) - (1-kappa)K(kappa)]`.
pub fn pendulum_action(kappa: f64) -> Result<f64> {
    check_kappa(kappa)?;
    let e = complete_e(kappa)?;
    let k = complete_k(kappa)?;
    Ok(8.0 / PI * (e - (1.0 - kappa) * k))
}

/// Angular frequency of the libration angle, `pi / (2 K(kappa))`.
pub fn pendulum_frequency(kappa: f64) -> Result<f64> {
    check_kappa(kappa)?;
    Ok(PI / (2.0 * complete_k(kappa)?))
}

/// Invert `J(kappa)` by Newton iteration; `dJ/dkappa = 4 K / pi`.
pub fn pendulum_kappa_from_action(action: f64) -> Result<f64> {
    let j_max = 8.0 / PI;
    if !(action.is_finite() && action > 0.0 && action < j_max) {
        return Err(Error::ChartDomain {
            what: format!("action J = {action} outside (0, 8/pi)"),
        });
    }
    let mut kappa = 0.5_f64;
    for _ in 0..100 {
        let j = pendulum_action(kappa)?;
        let djdk = 4.0 * complete_k(kappa)? / PI;
        let next = (kappa - (j - action) / djdk).clamp(1e-300, 1.0 - 1e-16);
        if (next - kappa).abs() <= 1e-16 * kappa.max(1e-3) {
            kappa = next;
            break;
        }
        kappa = next;
    }
    Ok(kappa)
}

/// Forward chart: canonical `(theta, p)` to `(kappa, zeta, J)`.
///
/// The elliptic argument `u` solves `sn(u | kappa) = sin(theta/2) /
/// sqrt(kappa)` with the branch fixed so that `cn(u | kappa)` carries
/// the sign of `p`; `zeta = pi u / (2 K)` normalized to `[0, 2pi)`.
pub fn pendulum_forward(x: &PhaseState) -> Result<PendulumPoint> {
    if x.dim() != 1 {
        return Err(Error::ChartDomain {
            what: format!("pendulum chart needs 1 degree of freedom, got {}", x.dim()),
        });
    }
    // symmetric representative in (-pi, pi]
    let theta = if x.q()[0] > PI {
        x.q()[0] - TAU
    } else {
        x.q()[0]
    };
    let p = x.p()[0];
    let kappa = 0.5 * pendulum_energy(theta, p);
    check_kappa(kappa)?;

    let mut s = (0.5 * theta).sin() / kappa.sqrt();
    if s.abs() > 1.0 {
        if s.abs() > 1.0 + 1e-9 {
            return Err(Error::ChartDomain {
                what: format!(
                    "|sin(theta/2)| exceeds sqrt(kappa) by {:e}: angle beyond the turning point",
                    s.abs() - 1.0
                ),
            });
        }
        s = s.clamp(-1.0, 1.0);
    }
    let big_k = complete_k(kappa)?;
    let u0 = incomplete_f(s.asin(), kappa)?;
    // cn > 0 on (-K, K); flip to 2K - u0 when p < 0
    let u = if p >= 0.0 {
        u0.rem_euclid(4.0 * big_k)
    } else {
        2.0 * big_k - u0
    };
    let zeta = crate::state::normalize_angle(PI * u / (2.0 * big_k));
    Ok(PendulumPoint {
        kappa,
        zeta,
        action: pendulum_action(kappa)?,
    })
}

/// Inverse chart: `(kappa, zeta)` to canonical `(theta, p)`.
pub fn pendulum_backward(kappa: f64, zeta: f64) -> Result<PhaseState> {
    check_kappa(kappa)?;
    let big_k = complete_k(kappa)?;
    let u = 2.0 * big_k * zeta / PI;
    let (sn, cn, _) = jacobi_sn_cn_dn(u, kappa)?;
    let theta = 2.0 * (kappa.sqrt() * sn).clamp(-1.0, 1.0).asin();
    let p = 2.0 * kappa.sqrt() * cn;
    PhaseState::new(vec![theta], vec![p], vec![CoordKind::Angular])
}

/// Impact map in chart coordinates.
///
/// For `e = 1` the impact preserves `kappa` and maps the elliptic
/// argument to the unique solution of `sn` unchanged, `cn` negated:
/// `u+ = 2K - u-  (mod 4K)`, i.e. `zeta+ = pi - zeta-  (mod 2pi)`.
/// For general `e` the map is conjugated through canonical
/// coordinates: `backward -> (theta, -e p) -> forward`. This is the
/// formula extension of the impact; it represents the hybrid jump
/// only for points in the chart image of the switching surface.
pub fn pendulum_impact_in_chart(kappa: f64, zeta: f64, e: f64) -> Result<(f64, f64)> {
    check_kappa(kappa)?;
    if e == 1.0 {
        let big_k = complete_k(kappa)?;
        let u = 2.0 * big_k * zeta / PI;
        let u_post = (2.0 * big_k - u).rem_euclid(4.0 * big_k);
        let zeta_post = crate::state::normalize_angle(PI * u_post / (2.0 * big_k));
        return Ok((kappa, zeta_post));
    }
    let x = pendulum_backward(kappa, zeta)?;
    let post = PhaseState::new(
        x.q().to_vec(),
        vec![-e * x.p()[0]],
        vec![CoordKind::Angular],
    )?;
    let kappa_post = 0.5 * pendulum_energy(post.q()[0], post.p()[0]);
    check_kappa(kappa_post).map_err(|_| Error::ChartDomain {
        what: format!("post-impact kappa = {kappa_post} leaves the libration regime"),
    })?;
    let pt = pendulum_forward(&post)?;
    Ok((pt.kappa, pt.zeta))
}

/// The full chart object, with `J` as the action coordinate.
pub fn pendulum_libration_chart() -> ActionAngleChart {
    ActionAngleChart::new(
        1,
        |x| {
            let pt = pendulum_forward(x)?;
            Ok(ChartPoint {
                angles: vec![pt.zeta],
                actions: vec![pt.action],
            })
        },
        |pt| {
            let kappa = pendulum_kappa_from_action(pt.actions[0])?;
            pendulum_backward(kappa, pt.angles[0])
        },
        |x| {
            if x.dim() != 1 {
                return false;
            }
            let theta = x.q()[0];
            let kappa = 0.5 * pendulum_energy(theta, x.p()[0]);
            kappa > 0.0 && kappa < 1.0
        },
        |actions| {
            let kappa = pendulum_kappa_from_action(actions[0])?;
            Ok(vec![pendulum_frequency(kappa)?])
        },
        |_actions| vec![Some(TAU)],
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn pend_state(theta: f64, p: f64) -> PhaseState {
        PhaseState::new(vec![theta], vec![p], vec![CoordKind::Angular]).unwrap()
    }

    #[test]
    fn bottom_state_has_zero_angle() {
        // (theta, p) = (0, 1): kappa = 0.25, zeta = 0
        let pt = pendulum_forward(&pend_state(0.0, 1.0)).unwrap();
        assert!((pt.kappa - 0.25).abs() < 1e-15);
        assert_eq!(pt.zeta, 0.0);
        let expect =
            8.0 / PI * (complete_e(0.25).unwrap() - 0.75 * complete_k(0.25).unwrap());
        assert!((pt.action - expect).abs() < 1e-15);
    }

    #[test]
    fn turning_point_has_quarter_angle() {
        for kappa in [0.3_f64, 0.75] {
            let theta = 2.0 * kappa.sqrt().asin();
            let pt = pendulum_forward(&pend_state(theta, 0.0)).unwrap();
            assert!((pt.zeta - FRAC_PI_2).abs() < 1e-10, "zeta = {}", pt.zeta);
        }
    }

    #[test]
    fn action_vanishes_at_low_energy() {
        assert!(pendulum_action(1e-12).unwrap() < 1e-10);
    }

    #[test]
    fn backward_at_zero_and_half_period() {
        for kappa in [0.25_f64, 0.8] {
            let x0 = pendulum_backward(kappa, 0.0).unwrap();
            assert_eq!(x0.q()[0], 0.0);
            assert!((x0.p()[0] - 2.0 * kappa.sqrt()).abs() < 1e-15);

            let x_half = pendulum_backward(kappa, PI).unwrap();
            assert!(x_half.q()[0].abs() < 1e-12 || (x_half.q()[0] - TAU).abs() < 1e-12);
            assert!((x_half.p()[0] + 2.0 * kappa.sqrt()).abs() < 1e-12);
        }
    }

    #[test]
    fn kappa_range_is_enforced() {
        assert!(pendulum_backward(1.0, 0.3).is_err());
        assert!(pendulum_backward(0.0, 0.3).is_err());
        assert!(pendulum_forward(&pend_state(0.0, 2.1)).is_err()); // kappa > 1
        assert!(pendulum_forward(&pend_state(0.0, 0.0)).is_err()); // kappa = 0
    }

    #[test]
    fn action_inversion_round_trip() {
        for kappa in [0.05, 0.25, 0.5, 0.9, 0.999] {
            let j = pendulum_action(kappa).unwrap();
            let back = pendulum_kappa_from_action(j).unwrap();
            assert!((back - kappa).abs() < 1e-12, "kappa {kappa} -> {back}");
        }
    }

    #[test]
    fn elastic_impact_in_chart_is_zeta_reflection() {
        for (kappa, zeta) in [(0.6, 0.4), (0.9, 2.0), (0.75, 5.5)] {
            let (k_post, z_post) = pendulum_impact_in_chart(kappa, zeta, 1.0).unwrap();
            assert_eq!(k_post, kappa);
            let expect = crate::state::normalize_angle(PI - zeta);
            assert!((z_post - expect).abs() < 1e-10, "zeta {zeta} -> {z_post}");
        }
    }

    #[test]
    fn inelastic_impact_dissipates() {
        // on the switching surface theta = pi/2 the potential term is
        // 1, so kappa+ = e^2 (kappa- - 1/2) + 1/2 < kappa-
        let kappa = 0.75;
        let p = (4.0 * kappa - 2.0_f64).sqrt();
        let pt = pendulum_forward(&pend_state(FRAC_PI_2, p)).unwrap();
        let (k_post, _) = pendulum_impact_in_chart(pt.kappa, pt.zeta, 0.5).unwrap();
        assert!((k_post - (0.25 * (kappa - 0.5) + 0.5)).abs() < 1e-12);
        assert!(k_post < kappa);
    }
}
