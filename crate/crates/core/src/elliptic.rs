//! Complete and incomplete elliptic integrals and Jacobi elliptic
//! functions.
//!
//! # Parameter convention
//!
//! Everything in this module uses the **parameter** `m`, not the
//! modulus `k` (they are related by `m = k^2`). That is,
//!
//! ```text
//! K(m) = integral_0^{pi/2} dt / sqrt(1 - m sin^2 t)
//! E(m) = integral_0^{pi/2} sqrt(1 - m sin^2 t) dt
//! F(phi | m) = integral_0^phi dt / sqrt(1 - m sin^2 t)
//! sn(u | m), cn(u | m), dn(u | m)
//! ```
//!
//! matching Mathematica's `EllipticK[m]` and `JacobiSN[u, m]` and
//! SciPy's `ellipk`/`ellipj`. Libraries based on the modulus (e.g.
//! Numerical Recipes) need `k = sqrt(m)` instead; mixing the two
//! conventions is a classic source of silently wrong results.
//!
//! The admissible range is `0 <= m < 1`. The boundary `m = 1` is
//! rejected: `K` diverges there (for the pendulum this is the
//! separatrix between libration and rotation).
//!
//! `K` and `E` use the arithmetic-geometric mean, `F` the Carlson
//! symmetric form `R_F`, and `sn`/`cn`/`dn` the ascending Landen
//! (AGM) scale with backward recursion of amplitudes. All converge to
//! machine precision.

use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};

/// Validated elliptic parameter `m` in `[0, 1)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EllipticParam(f64);

impl EllipticParam {
    pub fn new(m: f64) -> Result<Self> {
        check_param(m)?;
        Ok(Self(m))
    }

    pub fn get(self) -> f64 {
        self.0
    }

    pub fn complete_k(self) -> f64 {
        complete_k(self.0).expect("validated parameter")
    }

    pub fn complete_e(self) -> f64 {
        complete_e(self.0).expect("validated parameter")
    }
}

fn check_param(m: f64) -> Result<()> {
    if !(0.0..1.0).contains(&m) || !m.is_finite() {
        return Err(Error::EllipticParam { m });
    }
    Ok(())
}

/// Complete elliptic integral of the first kind `K(m)`.
pub fn complete_k(m: f64) -> Result<f64> {
    check_param(m)?;
    let mut a = 1.0_f64;
    let mut b = (1.0 - m).sqrt();
    for _ in 0..64 {
        if (a - b).abs() <= f64::EPSILON * a {
            break;
        }
        let an = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = an;
    }
    Ok(FRAC_PI_2 / a)
}

/// Complete elliptic integral of the second kind `E(m)`.
pub fn complete_e(m: f64) -> Result<f64> {
    check_param(m)?;
    let mut a = 1.0_f64;
    let mut b = (1.0 - m).sqrt();
    // E = K (1 - sum_{j>=0} 2^{j-1} c_j^2) with c_0^2 = m
    let mut sum = 0.5 * m;
    let mut weight = 1.0;
    for _ in 0..64 {
        let c = 0.5 * (a - b);
        if c.abs() <= f64::EPSILON {
            break;
        }
        let an = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = an;
        // c here is c_{j+1}, weight 2^j
        sum += weight * c * c;
        weight *= 2.0;
    }
    Ok(FRAC_PI_2 / a * (1.0 - sum))
}

/// Carlson symmetric integral `R_F(x, y, z)` by the duplication
/// theorem, for non-negative arguments with at most one zero.
fn carlson_rf(x: f64, y: f64, z: f64) -> f64 {
    const ERRTOL: f64 = 1e-4; // relative error ~ ERRTOL^6
    let (mut x, mut y, mut z) = (x, y, z);
    let mut mu;
    let (dx, dy, dz) = loop {
        let sx = x.sqrt();
        let sy = y.sqrt();
        let sz = z.sqrt();
        let lam = sx * (sy + sz) + sy * sz;
        x = 0.25 * (x + lam);
        y = 0.25 * (y + lam);
        z = 0.25 * (z + lam);
        mu = (x + y + z) / 3.0;
        let dx = (mu - x) / mu;
        let dy = (mu - y) / mu;
        let dz = (mu - z) / mu;
        if dx.abs().max(dy.abs()).max(dz.abs()) < ERRTOL {
            break (dx, dy, dz);
        }
    };
    let e2 = dx * dy - dz * dz;
    let e3 = dx * dy * dz;
    (1.0 + (e2 / 24.0 - 0.1 - 3.0 * e3 / 44.0) * e2 + e3 / 14.0) / mu.sqrt()
}

/// Incomplete elliptic integral of the first kind `F(phi | m)` for
/// `|phi| <= pi/2`; `F(pi/2 | m) = K(m)`.
pub fn incomplete_f(phi: f64, m: f64) -> Result<f64> {
    check_param(m)?;
    if !phi.is_finite() || phi.abs() > FRAC_PI_2 + 1e-12 {
        return Err(Error::Amplitude { phi });
    }
    if phi == 0.0 {
        return Ok(0.0);
    }
    let phi_c = phi.clamp(-FRAC_PI_2, FRAC_PI_2);
    let s = phi_c.sin();
    let c = phi_c.cos();
    Ok(s * carlson_rf(c * c, 1.0 - m * s * s, 1.0))
}

/// Jacobi elliptic functions `(sn, cn, dn)(u | m)` for real `u`.
///
/// Ascending AGM with backward recursion of the amplitude; at the
/// quarter period, `sn(K(m) | m) = 1` and `cn(K(m) | m) = 0`.
pub fn jacobi_sn_cn_dn(u: f64, m: f64) -> Result<(f64, f64, f64)> {
    check_param(m)?;
    if !u.is_finite() {
        return Err(Error::NonFinite {
            context: "jacobi argument u".into(),
        });
    }
    if m == 0.0 {
        return Ok((u.sin(), u.cos(), 1.0));
    }
    // AGM scale a_j, with ratio c_j / a_j saved for the backward pass
    let mut ratios = [0.0_f64; 64];
    let mut a = 1.0_f64;
    let mut b = (1.0 - m).sqrt();
    let mut depth = 0;
    for j in 0..64 {
        let c = 0.5 * (a - b);
        let an = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = an;
        ratios[j] = c / a;
        depth = j + 1;
        if c.abs() <= f64::EPSILON * a {
            break;
        }
    }
    // phi_N = 2^N a_N u, then phi_{j-1} = (phi_j + asin(r_j sin phi_j)) / 2
    let mut phi = (1u64 << depth) as f64 * a * u;
    for j in (0..depth).rev() {
        let arg = (ratios[j] * phi.sin()).clamp(-1.0, 1.0);
        phi = 0.5 * (phi + arg.asin());
    }
    let sn = phi.sin();
    let cn = phi.cos();
    let dn = (1.0 - m * sn * sn).sqrt();
    Ok((sn, cn, dn))
}
