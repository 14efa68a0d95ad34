//! Impact identities of the built-in models on their exact switching
//! surfaces, and the empirical disjointness of post-impact states from
//! the surface.

use std::f64::consts::TAU;

use hhsim::models::{build_disk, build_pendulum, DiskParams, PendulumParams};
use hhsim::state::{CoordKind, PhaseState};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn disk_state(q: [f64; 3], p: [f64; 3]) -> PhaseState {
    PhaseState::new(
        q.to_vec(),
        p.to_vec(),
        vec![CoordKind::Linear, CoordKind::Linear, CoordKind::Angular],
    )
    .unwrap()
}

fn pend_state(theta: f64, p: f64) -> PhaseState {
    PhaseState::new(vec![theta], vec![p], vec![CoordKind::Angular]).unwrap()
}

/// Point on the exact disk surface: contact height, approach-direction
/// normal momentum, rolling condition.
fn exact_surface_point(
    rng: &mut ChaCha8Rng,
    params: &DiskParams,
    component_id: usize,
) -> PhaseState {
    let a = params.wall_height(component_id).unwrap();
    let px = rng.gen_range(-1.5..1.5);
    let normal: f64 = rng.gen_range(0.05..1.5);
    let py = if component_id == 0 { -normal } else { normal };
    let pth = params.gyration * params.gyration * px / params.radius;
    disk_state(
        [rng.gen_range(-1.5..1.5), a, rng.gen_range(0.0..TAU)],
        [px, py, pth],
    )
}

#[test]
fn disk_impact_identities_on_exact_surface() {
    // f1 and f3 preserved; f2 follows the restitution relation
    let mut rng = ChaCha8Rng::seed_from_u64(61);
    for e in [0.0, 0.5, 1.0] {
        let model = build_disk(DiskParams {
            restitution: e,
            ..DiskParams::default()
        })
        .unwrap();
        for component_id in [0, 1] {
            let comp = &model.system.components()[component_id];
            let a = if component_id == 0 { 1.0 } else { 3.0 };
            for _ in 0..1000 {
                let x = exact_surface_point(
                    &mut rng,
                    &DiskParams {
                        restitution: e,
                        ..DiskParams::default()
                    },
                    component_id,
                );
                let post = comp.apply(&x).unwrap();
                let f = model.integrals.label(&x).unwrap();
                let f_post = model.integrals.label(&post).unwrap();
                assert!((f_post[0] - f[0]).abs() < 1e-12, "f1 moved");
                assert!((f_post[2] - f[2]).abs() < 1e-12, "f3 moved");
                let f2_expect = e * e * f[1] + 0.5 * (1.0 - e * e) * a * a;
                assert!(
                    (f_post[1] - f2_expect).abs() < 1e-12,
                    "f2: {} vs {f2_expect}",
                    f_post[1]
                );
            }
        }
    }
}

#[test]
fn off_rolling_impacts_do_not_preserve_f1() {
    // a concrete contact violating the rolling condition
    let model = build_disk(DiskParams::default()).unwrap();
    let comp = &model.system.components()[0];
    let x = disk_state([0.3, 1.0, 0.5], [1.0, -0.8, -0.4]); // p_theta != p_x
    let post = comp.apply(&x).unwrap();
    let f1_pre = model.integrals.get(0).eval(&x).unwrap();
    let f1_post = model.integrals.get(0).eval(&post).unwrap();
    assert!(
        (f1_post - f1_pre).abs() > 1e-3,
        "f1 unexpectedly preserved off the rolling locus"
    );
}

#[test]
fn disk_impact_identities_fail_for_generic_momenta() {
    // statistical version of the counterexample: almost every random
    // (non-rolling) contact moves f1
    let mut rng = ChaCha8Rng::seed_from_u64(67);
    let model = build_disk(DiskParams::default()).unwrap();
    let comp = &model.system.components()[0];
    let mut moved = 0;
    for _ in 0..100 {
        let x = disk_state(
            [rng.gen_range(-1.5..1.5), 1.0, rng.gen_range(0.0..TAU)],
            [
                rng.gen_range(-1.5..1.5),
                -rng.gen_range(0.05..1.5),
                rng.gen_range(-1.5..1.5),
            ],
        );
        let post = comp.apply(&x).unwrap();
        let d = (model.integrals.get(0).eval(&post).unwrap()
            - model.integrals.get(0).eval(&x).unwrap())
        .abs();
        if d > 1e-9 {
            moved += 1;
        }
    }
    assert!(moved > 95, "only {moved} of 100 generic contacts moved f1");
}

#[test]
fn pendulum_energy_jump_is_exact_on_the_surface() {
    // H(Delta x) - H(x) = (e^2 - 1) p^2 / 2 on cos(theta) = 0
    let mut rng = ChaCha8Rng::seed_from_u64(71);
    for e in [0.0, 0.3, 0.5, 1.0] {
        let model = build_pendulum(PendulumParams {
            restitution: e,
            ..PendulumParams::default()
        })
        .unwrap();
        let comp = &model.system.components()[0];
        let h = model.system.hamiltonian();
        for _ in 0..1000 {
            let theta = if rng.gen_bool(0.5) {
                std::f64::consts::FRAC_PI_2
            } else {
                1.5 * std::f64::consts::PI
            };
            let p = rng.gen_range(0.0..2.0);
            let x = pend_state(theta, p);
            let post = comp.apply(&x).unwrap();
            let jump = h.eval(&post).unwrap() - h.eval(&x).unwrap();
            let expect = 0.5 * (e * e - 1.0) * p * p;
            assert!((jump - expect).abs() < 1e-12, "e={e}: {jump} vs {expect}");
        }
    }
}

#[test]
fn elastic_pendulum_preserves_energy_on_surface_samples() {
    let mut rng = ChaCha8Rng::seed_from_u64(73);
    let model = build_pendulum(PendulumParams::default()).unwrap();
    let comp = &model.system.components()[0];
    let h = model.system.hamiltonian();
    for _ in 0..1000 {
        let theta = if rng.gen_bool(0.5) {
            std::f64::consts::FRAC_PI_2
        } else {
            1.5 * std::f64::consts::PI
        };
        let x = pend_state(theta, rng.gen_range(0.0..2.0));
        let post = comp.apply(&x).unwrap();
        assert!((h.eval(&post).unwrap() - h.eval(&x).unwrap()).abs() < 1e-12);
    }
}

#[test]
fn post_impact_states_leave_the_surface_empirically() {
    // Delta(S) cap S = empty over 10^4 random admissible guard points
    // per component of each built-in model (restitution away from the
    // plastic limit, which is the documented degenerate case)
    let mut rng = ChaCha8Rng::seed_from_u64(79);
    let guard_tol = 1e-9;

    for e in [0.5, 1.0] {
        let disk = build_disk(DiskParams {
            restitution: e,
            ..DiskParams::default()
        })
        .unwrap();
        for component_id in [0, 1] {
            let comp = &disk.system.components()[component_id];
            for _ in 0..10_000 {
                let x = exact_surface_point(
                    &mut rng,
                    &DiskParams {
                        restitution: e,
                        ..DiskParams::default()
                    },
                    component_id,
                );
                let post = comp.apply(&x).unwrap();
                let back_on_s = disk
                    .system
                    .components()
                    .iter()
                    .any(|c| c.on_surface(&post, guard_tol).unwrap());
                assert!(!back_on_s, "disk e={e} component {component_id}");
            }
        }

        let pend = build_pendulum(PendulumParams {
            restitution: e,
            ..PendulumParams::default()
        })
        .unwrap();
        let comp = &pend.system.components()[0];
        for _ in 0..10_000 {
            let theta = if rng.gen_bool(0.5) {
                std::f64::consts::FRAC_PI_2
            } else {
                1.5 * std::f64::consts::PI
            };
            // strictly positive momentum: p = 0 is the degenerate
            // fixed point rejected at runtime by the simulator
            let x = pend_state(theta, rng.gen_range(1e-3..2.0));
            let post = comp.apply(&x).unwrap();
            assert!(!comp.on_surface(&post, guard_tol).unwrap(), "pendulum e={e}");
        }
    }
}

#[test]
fn model_names_build_with_overrides() {
    use std::collections::BTreeMap;
    let mut params = BTreeMap::new();
    params.insert("e".to_string(), 0.5);
    let disk = hhsim::models::build_by_name("disk", &params).unwrap();
    assert_eq!(disk.system.parameter("e"), Some(0.5));
    let pend = hhsim::models::build_by_name("pendulum", &params).unwrap();
    assert_eq!(pend.system.parameter("e"), Some(0.5));
    assert!(hhsim::models::build_by_name("rotor", &params).is_err());
}
