//! Chart round trips, the Darboux property, conjugated impact maps
//! and the commuting squares against the canonical-coordinate route.

use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};

use hhsim::charts::{
    disk_backward, disk_forward, disk_impact_in_chart, disk_wall_membership, linear_fit,
    pendulum_action, pendulum_backward, pendulum_forward, pendulum_frequency,
    pendulum_impact_in_chart, unwrap_sequence,
};
use hhsim::elliptic::complete_k;
use hhsim::flow::{simulate, IntegratorConfig, Scheme};
use hhsim::models::{build_disk, build_pendulum, DiskParams, PendulumParams};
use hhsim::state::{CoordKind, PhaseState};
use hhsim::symplectic::check_symplectic_jacobian;
use hhsim::system::HybridSystem;
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

/// Random disk state away from the singular leaves.
fn random_disk_domain_state(rng: &mut ChaCha8Rng) -> PhaseState {
    loop {
        let x = disk_state(
            [
                rng.gen_range(-1.5..1.5),
                rng.gen_range(-1.5..1.5),
                rng.gen_range(0.0..TAU),
            ],
            [
                rng.gen_range(-1.5..1.5),
                rng.gen_range(-1.5..1.5),
                rng.gen_range(-1.5..1.5),
            ],
        );
        let r1 = (x.q()[0].powi(2) + x.p()[0].powi(2)).sqrt();
        let r2 = (x.q()[1].powi(2) + x.p()[1].powi(2)).sqrt();
        if r1 > 0.15 && r2 > 0.15 && x.p()[2].abs() > 0.15 {
            return x;
        }
    }
}

/// Random point on the exact disk impact surface (rolling included),
/// bounded away from chart singularities.
fn random_disk_surface_state(rng: &mut ChaCha8Rng, wall: f64, lower: bool) -> PhaseState {
    let px = {
        let mag = rng.gen_range(0.2..1.5);
        if rng.gen_bool(0.5) {
            mag
        } else {
            -mag
        }
    };
    let normal = rng.gen_range(0.2..1.5);
    let py = if lower { -normal } else { normal };
    disk_state(
        [rng.gen_range(-1.5..1.5), wall, rng.gen_range(0.0..TAU)],
        [px, py, px],
    )
}

fn random_pendulum_domain_state(rng: &mut ChaCha8Rng) -> PhaseState {
    loop {
        let theta: f64 = rng.gen_range(-2.0..2.0);
        let p: f64 = rng.gen_range(-1.35..1.35);
        if p.abs() < 0.1 {
            continue;
        }
        let kappa = 0.5 * (0.5 * p * p + 1.0 - theta.cos());
        if (0.05..0.95).contains(&kappa) {
            return pend_state(theta, p);
        }
    }
}

#[test]
fn disk_round_trip_on_random_domain_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..1000 {
        let x = random_disk_domain_state(&mut rng);
        let (phi, f) = disk_forward(&x).unwrap();
        let back = disk_backward(&phi, &f, x.p()[2] > 0.0).unwrap();
        let dist = x.distance(&back);
        assert!(dist < 1e-10, "round trip moved by {dist}");
    }
}

#[test]
fn pendulum_round_trip_on_kappa_zeta_grid() {
    // grid offset from the fold points zeta = pi/2, 3pi/2 (p = 0),
    // where recovering zeta through asin near +-1 inherently loses
    // half the digits; the state-space round trip at the folds is
    // covered elsewhere
    for i in 1..10 {
        let kappa = i as f64 / 10.0;
        for j in 0..16 {
            let zeta = (j as f64 + 0.5) * TAU / 16.0;
            let x = pendulum_backward(kappa, zeta).unwrap();
            let pt = pendulum_forward(&x).unwrap();
            assert!(
                (pt.kappa - kappa).abs() < 1e-9,
                "kappa {kappa} zeta {zeta}: {}",
                pt.kappa
            );
            let mut dz = pt.zeta - zeta;
            dz -= (dz / TAU).round() * TAU;
            assert!(dz.abs() < 1e-9, "kappa {kappa} zeta {zeta}: dz {dz}");
        }
    }
}

#[test]
fn both_charts_are_darboux_on_domain_samples() {
    let mut rng = ChaCha8Rng::seed_from_u64(37);
    let disk = build_disk(DiskParams::default()).unwrap();
    let disk_map = disk.chart().unwrap().forward_map();
    for _ in 0..100 {
        let x = random_disk_domain_state(&mut rng);
        // the bundled chart is the positive branch
        let x = if x.p()[2] > 0.0 {
            x
        } else {
            let mut p = x.p().to_vec();
            p[2] = -p[2];
            PhaseState::new(x.q().to_vec(), p, x.kinds().to_vec()).unwrap()
        };
        let rep = check_symplectic_jacobian(&disk_map, &x, 1e-6).unwrap();
        assert!(rep.pass, "disk residual {} at {x:?}", rep.max_residual);
    }

    let pend = build_pendulum(PendulumParams::default()).unwrap();
    let pend_map = pend.chart().unwrap().forward_map();
    for _ in 0..100 {
        let x = random_pendulum_domain_state(&mut rng);
        let rep = check_symplectic_jacobian(&pend_map, &x, 1e-6).unwrap();
        assert!(rep.pass, "pendulum residual {} at {x:?}", rep.max_residual);
    }
}

#[test]
fn disk_commuting_square_on_surface_samples() {
    // chart o Delta = Delta_chart o chart on sampled surface points
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let disk = build_disk(DiskParams {
        restitution: 0.5,
        ..DiskParams::default()
    })
    .unwrap();
    for lower in [true, false] {
        let wall = if lower { 1.0 } else { 3.0 };
        let comp = &disk.system.components()[usize::from(!lower)];
        for _ in 0..500 {
            let x = random_disk_surface_state(&mut rng, wall, lower);
            let (phi, f) = disk_forward(&x).unwrap();
            // membership residuals of the derived surface equations
            let (wall_resid, roll_resid) = disk_wall_membership(&phi, &f, wall);
            assert!(wall_resid.abs() < 1e-9, "wall residual {wall_resid}");
            assert!(roll_resid.abs() < 1e-9, "rolling residual {roll_resid}");

            let (phi_chart, f_chart) =
                disk_impact_in_chart(&phi, &f, wall, 0.5, x.p()[2] > 0.0, 1e-9).unwrap();
            let post = comp.apply(&x).unwrap();
            let (phi_canon, f_canon) = disk_forward(&post).unwrap();
            for i in 0..3 {
                assert!(
                    (f_chart[i] - f_canon[i]).abs() < 1e-9,
                    "f{} mismatch",
                    i + 1
                );
                let mut dphi = phi_chart[i] - phi_canon[i];
                if i < 2 {
                    dphi -= (dphi / TAU).round() * TAU;
                }
                assert!(dphi.abs() < 1e-9, "phi{} mismatch {dphi}", i + 1);
            }
        }
    }
}

#[test]
fn disk_impact_closed_forms_hold_in_chart() {
    let mut rng = ChaCha8Rng::seed_from_u64(43);
    for _ in 0..300 {
        let e = rng.gen_range(0.05..1.0);
        let x = random_disk_surface_state(&mut rng, 1.0, true);
        let (phi, f) = disk_forward(&x).unwrap();
        let (phi_post, f_post) =
            disk_impact_in_chart(&phi, &f, 1.0, e, x.p()[2] > 0.0, 1e-9).unwrap();
        // actions: f1, f3 invariant; f2 affine in the restitution
        assert!((f_post[0] - f[0]).abs() < 1e-12);
        assert!((f_post[2] - f[2]).abs() < 1e-12);
        let f2_expect = e * e * f[1] + 0.5 * (1.0 - e * e);
        assert!((f_post[1] - f2_expect).abs() < 1e-12);
        // angles: phi1, phi3 invariant; phi2 follows the arctan rule
        // on the branch fixed by y+ = y- = a and the flipped normal
        assert!((phi_post[0] - phi[0]).abs() < 1e-12);
        assert!((phi_post[2] - phi[2]).abs() < 1e-12);
        let expect_tan = -(phi[1].tan() / e).atan();
        let mut d = phi_post[1] - expect_tan;
        d -= (d / PI).round() * PI;
        assert!(d.abs() < 1e-9, "phi2 branch off by {d}");
        // branch resolution: position unchanged, normal momentum sign flipped
        let y_post = (2.0 * f_post[1]).sqrt() * phi_post[1].sin();
        let py_pre = (2.0 * f[1]).sqrt() * phi[1].cos();
        let py_post = (2.0 * f_post[1]).sqrt() * phi_post[1].cos();
        assert!((y_post - 1.0).abs() < 1e-9);
        assert!(py_pre < 0.0 && py_post >= 0.0);
    }
}

#[test]
fn pendulum_commuting_square_on_switching_surface() {
    let mut rng = ChaCha8Rng::seed_from_u64(47);
    let elastic = build_pendulum(PendulumParams::default()).unwrap();
    let lossy = build_pendulum(PendulumParams {
        restitution: 0.5,
        ..PendulumParams::default()
    })
    .unwrap();
    for (model, e) in [(&elastic, 1.0), (&lossy, 0.5)] {
        let comp = &model.system.components()[0];
        for _ in 0..300 {
            let theta = if rng.gen_bool(0.5) {
                std::f64::consts::FRAC_PI_2
            } else {
                1.5 * PI
            };
            let p = rng.gen_range(0.05..1.3);
            let x = pend_state(theta, p);
            let pre = pendulum_forward(&x).unwrap();
            let (k_chart, z_chart) = pendulum_impact_in_chart(pre.kappa, pre.zeta, e).unwrap();
            let post = comp.apply(&x).unwrap();
            let pt = pendulum_forward(&post).unwrap();
            assert!((k_chart - pt.kappa).abs() < 1e-9, "kappa mismatch");
            let mut dz = z_chart - pt.zeta;
            dz -= (dz / TAU).round() * TAU;
            assert!(dz.abs() < 1e-9, "zeta mismatch {dz}");
        }
    }
}

#[test]
fn elastic_impact_preserves_action_exactly() {
    let mut rng = ChaCha8Rng::seed_from_u64(53);
    let model = build_pendulum(PendulumParams::default()).unwrap();
    let comp = &model.system.components()[0];
    for _ in 0..200 {
        let theta = if rng.gen_bool(0.5) {
            std::f64::consts::FRAC_PI_2
        } else {
            1.5 * PI
        };
        let x = pend_state(theta, rng.gen_range(0.05..1.3));
        let pre = pendulum_forward(&x).unwrap();
        let post = pendulum_forward(&comp.apply(&x).unwrap()).unwrap();
        // p enters the energy only through p^2: J is bitwise equal
        assert_eq!(pre.action, post.action);
    }
}

#[test]
fn low_energy_impact_approaches_the_trig_reflection() {
    let kappa = 1e-3;
    for zeta in [0.3, 1.0, 2.5, 4.0] {
        let (k_post, z_post) = pendulum_impact_in_chart(kappa, zeta, 1.0).unwrap();
        assert_eq!(k_post, kappa);
        let mut d = z_post - (PI - zeta);
        d -= (d / TAU).round() * TAU;
        assert!(d.abs() < 10.0 * kappa, "zeta {zeta}: residual {d}");
    }
}

#[test]
fn inelastic_impact_strictly_dissipates_kappa() {
    let kappa = 0.8_f64;
    let p = (4.0 * kappa - 2.0).sqrt();
    let pre = pendulum_forward(&pend_state(std::f64::consts::FRAC_PI_2, p)).unwrap();
    let (k_post, _) = pendulum_impact_in_chart(pre.kappa, pre.zeta, 0.5).unwrap();
    assert!(k_post < kappa);
}

#[test]
fn actions_constant_and_angles_affine_along_smooth_arcs() {
    // disk, no wall contact within the horizon
    let disk = build_disk(DiskParams {
        wall_gap: 40.0,
        ..DiskParams::default()
    })
    .unwrap();
    let chart = disk.chart().unwrap();
    let x0 = disk_state([0.4, 0.3, 1.0], [0.2, 0.3, 0.7]);
    let cfg = IntegratorConfig::new(Scheme::Rk4, 1e-3, 5.0).unwrap();
    let traj = simulate(&disk.system, &x0, &cfg).unwrap();
    let arc = &traj.arcs[0];

    let mut angle_cols: Vec<Vec<f64>> = vec![Vec::new(); 3];
    let mut action_cols: Vec<Vec<f64>> = vec![Vec::new(); 3];
    for s in &arc.states {
        let pt = chart.forward(s).unwrap();
        for i in 0..3 {
            angle_cols[i].push(pt.angles[i]);
            action_cols[i].push(pt.actions[i]);
        }
    }
    let periods = chart.angle_periods(&action_cols.iter().map(|c| c[0]).collect::<Vec<_>>());
    for i in 0..3 {
        let a0 = action_cols[i][0];
        for v in &action_cols[i] {
            assert!((v - a0).abs() / a0.abs().max(1e-12) < 1e-8, "action {i} drifted");
        }
        if let Some(p) = periods[i] {
            unwrap_sequence(&mut angle_cols[i], p);
        }
        let (slope, _, resid) = linear_fit(&arc.times, &angle_cols[i]);
        assert!(resid < 1e-6, "angle {i} residual {resid}");
        // unit frequencies for the normalized disk
        assert!((slope - 1.0).abs() < 1e-6, "angle {i} slope {slope}");
    }
}

#[test]
fn pendulum_angle_frequency_matches_elliptic_formula() {
    // fitted dzeta/dt vs pi/(2K(kappa)), relative 1e-5
    let model = build_pendulum(PendulumParams::default()).unwrap();
    let free = HybridSystem::new(
        model.system.hamiltonian().clone(),
        vec![],
        BTreeMap::new(),
        vec![CoordKind::Angular],
        true,
    )
    .unwrap();
    for kappa in [0.1_f64, 0.4, 0.8] {
        let x0 = pend_state(0.0, 2.0 * kappa.sqrt());
        let cfg = IntegratorConfig::new(Scheme::Rk4, 1e-3, 10.0).unwrap();
        let traj = simulate(&free, &x0, &cfg).unwrap();
        let arc = &traj.arcs[0];
        let mut zetas = Vec::with_capacity(arc.states.len());
        for s in &arc.states {
            zetas.push(pendulum_forward(s).unwrap().zeta);
        }
        unwrap_sequence(&mut zetas, TAU);
        let (slope, _, _) = linear_fit(&arc.times, &zetas);
        let expect = pendulum_frequency(kappa).unwrap();
        let rel = (slope - expect).abs() / expect;
        assert!(rel < 1e-5, "kappa {kappa}: slope {slope} vs {expect}");
        // and the frequency formula itself against K
        assert!((expect - PI / (2.0 * complete_k(kappa).unwrap())).abs() < 1e-15);
    }
}

#[test]
fn pendulum_action_chart_round_trip_through_action_inverse() {
    let model = build_pendulum(PendulumParams::default()).unwrap();
    let chart = model.chart().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(59);
    for _ in 0..200 {
        let x = random_pendulum_domain_state(&mut rng);
        let pt = chart.forward(&x).unwrap();
        let back = chart.backward(&pt).unwrap();
        assert!(x.distance(&back) < 1e-9, "moved by {}", x.distance(&back));
    }
    // frozen action value at kappa = 0.25 (cross-checked against
    // mpmath 1.3)
    assert!((pendulum_action(0.25).unwrap() - 0.517_315_809_222_683_3).abs() < 1e-14);
}
