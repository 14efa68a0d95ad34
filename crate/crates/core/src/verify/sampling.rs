//! Deterministic samplers for the certification engine.
//!
//! Points on an impact-surface component are drawn either by a
//! closed-form draw supplied by the model or by Gauss-Newton
//! projection of random box points onto the constraint set (guard
//! plus any extra surface constraints, e.g. the disk's rolling
//! condition). Collision pairs for the discrete-relation binning test
//! are produced by walking along the intersection of the surface with
//! a level set of the tested observable and re-projecting.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::observable::Observable;
use crate::state::{CoordKind, PhaseState};
use crate::symplectic::gradient;
use crate::system::{GuardedImpact, HybridSystem};

pub type DrawFn = Arc<dyn Fn(&mut ChaCha8Rng, f64) -> Result<PhaseState> + Send + Sync>;
pub type PartnerFn =
    Arc<dyn Fn(&PhaseState, &Observable, &mut ChaCha8Rng) -> Option<PhaseState> + Send + Sync>;

/// How to draw points on one impact-surface component.
#[derive(Clone)]
pub struct SurfaceSampler {
    pub component_id: usize,
    /// Constraints beyond the guard that cut out the exact surface
    /// (empty when the guard alone defines it).
    pub extra_constraints: Vec<Observable>,
    /// Closed-form draw, when the model provides one; the second
    /// argument is the box half-width for the free coordinates.
    pub draw: Option<DrawFn>,
    /// Closed-form collision partner: a distinct surface point with
    /// the same value of the given observable.
    pub collision_partner: Option<PartnerFn>,
}

impl SurfaceSampler {
    pub fn projection_only(component_id: usize, extra_constraints: Vec<Observable>) -> Self {
        Self {
            component_id,
            extra_constraints,
            draw: None,
            collision_partner: None,
        }
    }
}

/// Uniform draw in the sampling box: linear coordinates and momenta in
/// `(-w, w)`, angular coordinates over the full circle.
pub fn random_state(rng: &mut ChaCha8Rng, kinds: &[CoordKind], half_width: f64) -> PhaseState {
    let q: Vec<f64> = kinds
        .iter()
        .map(|k| match k {
            CoordKind::Linear => rng.gen_range(-half_width..half_width),
            CoordKind::Angular => rng.gen_range(0.0..std::f64::consts::TAU),
        })
        .collect();
    let p: Vec<f64> = kinds
        .iter()
        .map(|_| rng.gen_range(-half_width..half_width))
        .collect();
    PhaseState::new(q, p, kinds.to_vec()).expect("finite box draw")
}

/// Gauss-Newton projection of `x0` onto the joint zero set of the
/// constraints, to residual `tol` in the max norm.
pub fn project_to_constraints(
    x0: &PhaseState,
    constraints: &[&Observable],
    tol: f64,
    max_iters: usize,
) -> Option<PhaseState> {
    let mut x = x0.clone();
    let m = constraints.len();
    let dim = 2 * x.dim();
    for _ in 0..max_iters {
        let residual: Vec<f64> = constraints
            .iter()
            .map(|c| c.eval(&x))
            .collect::<Result<_>>()
            .ok()?;
        if residual.iter().all(|r| r.abs() <= tol) {
            return Some(x);
        }
        let mut jac = DMatrix::zeros(m, dim);
        for (r, c) in constraints.iter().enumerate() {
            let g = gradient(c, &x, None).ok()?;
            for (col, v) in g.iter().enumerate() {
                jac[(r, col)] = *v;
            }
        }
        let rhs = DVector::from_vec(residual);
        // minimum-norm step: delta = J^T (J J^T)^{-1} c
        let jjt = &jac * jac.transpose();
        let lambda = jjt.svd(true, true).solve(&rhs, 1e-13).ok()?;
        let delta = jac.transpose() * lambda;
        let step_norm = delta.norm();
        let scale = if step_norm > 1.0 { 1.0 / step_norm } else { 1.0 };
        let packed = x.packed();
        let moved: Vec<f64> = packed
            .iter()
            .zip(delta.iter())
            .map(|(v, d)| v - scale * d)
            .collect();
        x = PhaseState::from_packed(&moved, x.kinds()).ok()?;
    }
    None
}

fn component_constraints<'a>(
    component: &'a GuardedImpact,
    sampler: &'a SurfaceSampler,
) -> Vec<&'a Observable> {
    let mut cons: Vec<&Observable> = vec![component.guard()];
    cons.extend(sampler.extra_constraints.iter());
    cons
}

/// Draw one admissible point on the component's exact surface.
pub fn draw_surface_point(
    system: &HybridSystem,
    sampler: &SurfaceSampler,
    rng: &mut ChaCha8Rng,
    half_width: f64,
    tol: f64,
) -> Result<PhaseState> {
    let component = system.component(sampler.component_id)?;
    for _ in 0..200 {
        let candidate = match &sampler.draw {
            Some(draw) => draw(rng, half_width)?,
            None => {
                let start = random_state(rng, system.coord_kinds(), half_width);
                let cons = component_constraints(component, sampler);
                match project_to_constraints(&start, &cons, tol, 100) {
                    Some(x) => x,
                    None => continue,
                }
            }
        };
        if component.on_surface(&candidate, tol.max(crate::system::DEFAULT_GUARD_TOL))? {
            return Ok(candidate);
        }
    }
    Err(Error::Sampling {
        what: format!(
            "could not draw an admissible point on component {}",
            sampler.component_id
        ),
    })
}

/// Produce a surface point distinct from `x0` with the same value of
/// `f`, for the collision-pair binning test.
///
/// Tries the model's closed-form partner first, then a generic walk:
/// step along the null space of the constraint Jacobian (surface
/// constraints plus the `f` level) and re-project.
pub fn collision_partner(
    system: &HybridSystem,
    sampler: &SurfaceSampler,
    f: &Observable,
    x0: &PhaseState,
    rng: &mut ChaCha8Rng,
    tol: f64,
) -> Result<Option<PhaseState>> {
    let component = system.component(sampler.component_id)?;
    let f0 = f.eval(x0)?;
    let min_separation = 1e-3;

    if let Some(partner) = &sampler.collision_partner {
        for _ in 0..20 {
            if let Some(x) = partner(x0, f, rng) {
                let same_level = (f.eval(&x)? - f0).abs() <= tol;
                let on_s = component.on_surface(&x, tol.max(crate::system::DEFAULT_GUARD_TOL))?;
                if same_level && on_s && x.distance(x0) > min_separation {
                    return Ok(Some(x));
                }
            }
        }
    }

    let level = f.shifted_by(f0);
    let mut constraints = component_constraints(component, sampler);
    constraints.push(&level);

    let dim = 2 * x0.dim();
    let jac = {
        let mut j = DMatrix::zeros(constraints.len(), dim);
        for (r, c) in constraints.iter().enumerate() {
            let g = gradient(c, x0, None)?;
            for (col, v) in g.iter().enumerate() {
                j[(r, col)] = *v;
            }
        }
        j
    };
    let jtj = jac.transpose() * &jac;
    let eig = jtj.symmetric_eigen();
    let max_eig = eig.eigenvalues.iter().cloned().fold(0.0_f64, f64::max);
    let mut tangent_dirs: Vec<DVector<f64>> = Vec::new();
    for (i, &ev) in eig.eigenvalues.iter().enumerate() {
        if ev <= 1e-16 * max_eig.max(1.0) {
            tangent_dirs.push(eig.eigenvectors.column(i).into_owned());
        }
    }
    if tangent_dirs.is_empty() {
        return Ok(None);
    }

    for _ in 0..40 {
        let mut dir = DVector::zeros(dim);
        for v in &tangent_dirs {
            dir += v * rng.gen_range(-1.0..1.0);
        }
        if dir.norm() < 1e-12 {
            continue;
        }
        dir /= dir.norm();
        let step = rng.gen_range(0.2..0.8);
        let packed = x0.packed();
        let moved: Vec<f64> = packed
            .iter()
            .zip(dir.iter())
            .map(|(v, d)| v + step * d)
            .collect();
        let Ok(start) = PhaseState::from_packed(&moved, x0.kinds()) else {
            continue;
        };
        if let Some(x) = project_to_constraints(&start, &constraints, tol, 100) {
            let on_s = component.on_surface(&x, tol.max(crate::system::DEFAULT_GUARD_TOL))?;
            if on_s && x.distance(x0) > min_separation {
                return Ok(Some(x));
            }
        }
    }
    Ok(None)
}

/// Sample points of the intersection of the component's surface with
/// the level set `F = level`.
pub fn sample_surface_level_set(
    system: &HybridSystem,
    sampler: &SurfaceSampler,
    integrals: &crate::symplectic::IntegralSet,
    level: &[f64],
    rng: &mut ChaCha8Rng,
    half_width: f64,
    tol: f64,
    count: usize,
) -> Result<Vec<PhaseState>> {
    let component = system.component(sampler.component_id)?;
    let shifted: Vec<Observable> = integrals
        .iter()
        .zip(level)
        .map(|(f, c)| f.shifted_by(*c))
        .collect();
    let mut constraints = component_constraints(component, sampler);
    constraints.extend(shifted.iter());

    let mut out = Vec::with_capacity(count);
    let mut attempts = 0;
    while out.len() < count && attempts < 400 * count {
        attempts += 1;
        let start = random_state(rng, system.coord_kinds(), half_width);
        if let Some(x) = project_to_constraints(&start, &constraints, tol, 150) {
            if component.on_surface(&x, tol.max(crate::system::DEFAULT_GUARD_TOL))? {
                out.push(x);
            }
        }
    }
    if out.is_empty() {
        return Err(Error::Sampling {
            what: format!(
                "level set does not intersect component {} within the sampling box",
                sampler.component_id
            ),
        });
    }
    Ok(out)
}
