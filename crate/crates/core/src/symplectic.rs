//! Canonical symplectic calculus.
//!
//! All checks work in packed coordinates `[q, p]` with the canonical
//! two-form `omega(u, v) = sum_i (u_q_i v_p_i - u_p_i v_q_i)`, i.e.
//! `omega = dq^i wedge dp_i`. Gradients of observables are analytic
//! when supplied and fall back to 4th-order central finite
//! differences; angular coordinates are differenced respecting
//! periodicity.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::observable::Observable;
use crate::state::PhaseState;

/// Default singular-value threshold for numerical rank decisions.
pub const DEFAULT_SV_TOL: f64 = 1e-8;

/// Finite-difference step for a coordinate value, balancing truncation
/// and rounding for the 4th-order stencil.
pub fn default_fd_step(coord: f64) -> f64 {
    f64::EPSILON.powf(0.2) * coord.abs().max(1.0)
}

/// Gradient of `f` at `x` in packed layout `[df/dq, df/dp]`.
///
/// Uses the analytic gradient when the observable carries one,
/// otherwise 4th-order central differences with step `step` (or the
/// default per-coordinate step when `None`).
pub fn gradient(f: &Observable, x: &PhaseState, step: Option<f64>) -> Result<Vec<f64>> {
    if let Some(g) = f.analytic_gradient(x) {
        return g;
    }
    let packed = x.packed();
    let mut grad = vec![0.0; packed.len()];
    for (slot, &value) in packed.iter().enumerate() {
        let h = step.unwrap_or_else(|| default_fd_step(value));
        let fp1 = f.eval(&x.shifted(slot, h))?;
        let fm1 = f.eval(&x.shifted(slot, -h))?;
        let fp2 = f.eval(&x.shifted(slot, 2.0 * h))?;
        let fm2 = f.eval(&x.shifted(slot, -2.0 * h))?;
        grad[slot] = (8.0 * (fp1 - fm1) - (fp2 - fm2)) / (12.0 * h);
    }
    Ok(grad)
}

/// Hamiltonian vector field `X_H = (dH/dp, -dH/dq)` in packed layout
/// `[qdot, pdot]`.
pub fn hamiltonian_vector_field(h_obs: &Observable, x: &PhaseState) -> Result<Vec<f64>> {
    let g = gradient(h_obs, x, None)?;
    let n = x.dim();
    let mut field = vec![0.0; 2 * n];
    for i in 0..n {
        field[i] = g[n + i];
        field[n + i] = -g[i];
    }
    Ok(field)
}

/// Canonical Poisson bracket `{f, g}` at `x`.
pub fn poisson_bracket(f: &Observable, g: &Observable, x: &PhaseState) -> Result<f64> {
    let gf = gradient(f, x, None)?;
    let gg = gradient(g, x, None)?;
    let n = x.dim();
    let mut sum = 0.0;
    for i in 0..n {
        sum += gf[i] * gg[n + i] - gf[n + i] * gg[i];
    }
    Ok(sum)
}

/// Canonical two-form applied to two packed tangent vectors.
pub fn omega_pairing(u: &[f64], v: &[f64], n: usize) -> f64 {
    let mut s = 0.0;
    for i in 0..n {
        s += u[i] * v[n + i] - u[n + i] * v[i];
    }
    s
}

/// The candidate integral map `F = (f_1, ..., f_n)`.
#[derive(Clone, Debug)]
pub struct IntegralSet {
    integrals: Vec<Observable>,
}

impl IntegralSet {
    pub fn new(integrals: Vec<Observable>) -> Self {
        Self { integrals }
    }

    pub fn len(&self) -> usize {
        self.integrals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.integrals.is_empty()
    }

    pub fn get(&self, i: usize) -> &Observable {
        &self.integrals[i]
    }

    pub fn iter(&self) -> impl Iterator<Item = &Observable> {
        self.integrals.iter()
    }

    /// Evaluate all integrals: the level label `Lambda` of `x`.
    pub fn label(&self, x: &PhaseState) -> Result<Vec<f64>> {
        self.integrals.iter().map(|f| f.eval(x)).collect()
    }

    /// The `n x 2n` Jacobian of `F` at `x` (rows are gradients).
    pub fn jacobian(&self, x: &PhaseState) -> Result<DMatrix<f64>> {
        let rows = self.len();
        let cols = 2 * x.dim();
        let mut j = DMatrix::zeros(rows, cols);
        for (r, f) in self.integrals.iter().enumerate() {
            let g = gradient(f, x, None)?;
            for (c, v) in g.iter().enumerate() {
                j[(r, c)] = *v;
            }
        }
        Ok(j)
    }
}

/// Outcome of a residual-style check.
#[derive(Clone, Debug, Serialize)]
pub struct CheckReport {
    pub pass: bool,
    pub max_residual: f64,
    pub tol: f64,
    pub samples: usize,
}

impl CheckReport {
    pub fn from_residual(max_residual: f64, tol: f64, samples: usize) -> Self {
        Self {
            pass: max_residual < tol,
            max_residual,
            tol,
            samples,
        }
    }
}

/// Involution check: `max |{f_i, f_j}|` over pairs and samples.
///
/// A single integral passes vacuously; an empty sample set is an
/// error.
pub fn check_involution(
    integrals: &IntegralSet,
    samples: &[PhaseState],
    tol: f64,
) -> Result<CheckReport> {
    if samples.is_empty() {
        return Err(Error::Sampling {
            what: "involution check needs a nonempty sample set".into(),
        });
    }
    let mut max = 0.0_f64;
    for x in samples {
        for i in 0..integrals.len() {
            for j in (i + 1)..integrals.len() {
                let b = poisson_bracket(integrals.get(i), integrals.get(j), x)?;
                max = max.max(b.abs());
            }
        }
    }
    Ok(CheckReport::from_residual(max, tol, samples.len()))
}

/// Numerical rank of the Jacobian of `F` at `x`: the count of singular
/// values above `tol_sv` times the largest one.
pub fn rank_of_df(integrals: &IntegralSet, x: &PhaseState, tol_sv: f64) -> Result<usize> {
    let j = integrals.jacobian(x)?;
    let svals = j.singular_values();
    let max_sv = svals.iter().cloned().fold(0.0_f64, f64::max);
    if max_sv == 0.0 {
        return Ok(0);
    }
    Ok(svals.iter().filter(|&&s| s > tol_sv * max_sv).count())
}

/// Orthonormal basis of the null space of the Jacobian of `F` at `x`,
/// i.e. of the tangent space of the level set through `x`.
///
/// Computed from the symmetric eigenproblem of `J^T J`; the smallest
/// `2n - rank` eigenvectors span the null space.
pub fn level_set_tangent_basis(
    integrals: &IntegralSet,
    x: &PhaseState,
    tol_sv: f64,
) -> Result<Vec<Vec<f64>>> {
    let j = integrals.jacobian(x)?;
    let cols = j.ncols();
    let rank = {
        let svals = j.singular_values();
        let max_sv = svals.iter().cloned().fold(0.0_f64, f64::max);
        if max_sv == 0.0 {
            0
        } else {
            svals.iter().filter(|&&s| s > tol_sv * max_sv).count()
        }
    };
    let jtj = j.transpose() * &j;
    let eig = jtj.symmetric_eigen();
    let mut order: Vec<usize> = (0..cols).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let basis = order[..cols - rank]
        .iter()
        .map(|&k| eig.eigenvectors.column(k).iter().cloned().collect())
        .collect();
    Ok(basis)
}

/// Lagrangian test for the level set of `F` through `x`.
///
/// Requires `rank dF = n`; returns the largest `|omega(v_a, v_b)|`
/// over pairs from an orthonormal tangent basis of the level set.
pub fn check_lagrangian_level_set(
    integrals: &IntegralSet,
    x: &PhaseState,
    tol: f64,
) -> Result<CheckReport> {
    let n = x.dim();
    let rank = rank_of_df(integrals, x, DEFAULT_SV_TOL)?;
    if rank != n {
        return Err(Error::RankDeficient {
            expected: n,
            got: rank,
        });
    }
    let basis = level_set_tangent_basis(integrals, x, DEFAULT_SV_TOL)?;
    let mut max = 0.0_f64;
    for a in 0..basis.len() {
        for b in (a + 1)..basis.len() {
            max = max.max(omega_pairing(&basis[a], &basis[b], n).abs());
        }
    }
    Ok(CheckReport::from_residual(max, tol, basis.len()))
}

/// A differentiable map of phase space into `R^k`, with optional
/// period metadata so angle-valued outputs can be differenced across
/// their seam.
#[derive(Clone)]
pub struct PhaseMap {
    pub dim_out: usize,
    pub eval: Arc<dyn Fn(&PhaseState) -> Result<Vec<f64>> + Send + Sync>,
    /// Per-output period at a base point (`None` for genuinely linear
    /// outputs).
    pub output_periods: Option<Arc<dyn Fn(&PhaseState) -> Result<Vec<Option<f64>>> + Send + Sync>>,
}

impl PhaseMap {
    pub fn new(
        dim_out: usize,
        eval: impl Fn(&PhaseState) -> Result<Vec<f64>> + Send + Sync + 'static,
    ) -> Self {
        Self {
            dim_out,
            eval: Arc::new(eval),
            output_periods: None,
        }
    }

    pub fn with_output_periods(
        mut self,
        periods: impl Fn(&PhaseState) -> Result<Vec<Option<f64>>> + Send + Sync + 'static,
    ) -> Self {
        self.output_periods = Some(Arc::new(periods));
        self
    }

    pub fn eval(&self, x: &PhaseState) -> Result<Vec<f64>> {
        let v = (self.eval)(x)?;
        if v.len() != self.dim_out {
            return Err(Error::LengthMismatch {
                q_len: v.len(),
                p_len: self.dim_out,
            });
        }
        Ok(v)
    }
}

fn wrap_minimal(delta: f64, period: Option<f64>) -> f64 {
    match period {
        Some(p) if p.is_finite() && p > 0.0 => delta - (delta / p).round() * p,
        _ => delta,
    }
}

/// Jacobian of a [`PhaseMap`] by 4th-order central differences.
///
/// Output differences are taken relative to the base value with the
/// minimal-image rule, so angle-valued outputs differentiate cleanly
/// across their `[0, period)` seam.
pub fn numerical_jacobian(map: &PhaseMap, x: &PhaseState) -> Result<DMatrix<f64>> {
    let base = map.eval(x)?;
    let periods = match &map.output_periods {
        Some(f) => f(x)?,
        None => vec![None; map.dim_out],
    };
    if periods.len() != map.dim_out {
        return Err(Error::LengthMismatch {
            q_len: periods.len(),
            p_len: map.dim_out,
        });
    }
    let packed = x.packed();
    let mut jac = DMatrix::zeros(map.dim_out, packed.len());
    for (slot, &value) in packed.iter().enumerate() {
        let h = default_fd_step(value);
        let vp1 = map.eval(&x.shifted(slot, h))?;
        let vm1 = map.eval(&x.shifted(slot, -h))?;
        let vp2 = map.eval(&x.shifted(slot, 2.0 * h))?;
        let vm2 = map.eval(&x.shifted(slot, -2.0 * h))?;
        for r in 0..map.dim_out {
            let d = |v: &Vec<f64>| wrap_minimal(v[r] - base[r], periods[r]);
            jac[(r, slot)] = (8.0 * (d(&vp1) - d(&vm1)) - (d(&vp2) - d(&vm2))) / (12.0 * h);
        }
    }
    Ok(jac)
}

/// Darboux test: `max |(J^T Omega J - Omega)_ij|` for the Jacobian `J`
/// of `map` at `x`, with the canonical `Omega` in packed layout.
///
/// The map must be a (local) diffeomorphism of phase space, i.e.
/// `dim_out = 2n`.
pub fn check_symplectic_jacobian(map: &PhaseMap, x: &PhaseState, tol: f64) -> Result<CheckReport> {
    let n = x.dim();
    if map.dim_out != 2 * n {
        return Err(Error::LengthMismatch {
            q_len: map.dim_out,
            p_len: 2 * n,
        });
    }
    let j = numerical_jacobian(map, x)?;
    let mut omega = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        omega[(i, n + i)] = 1.0;
        omega[(n + i, i)] = -1.0;
    }
    let resid = j.transpose() * &omega * &j - &omega;
    let max = resid.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    Ok(CheckReport::from_residual(max, tol, 1))
}

/// Convenience: solve the dense least-squares system `A x = b` via SVD.
pub fn svd_solve(a: &DMatrix<f64>, b: &DVector<f64>) -> Option<DVector<f64>> {
    a.clone().svd(true, true).solve(b, 1e-13).ok()
}
