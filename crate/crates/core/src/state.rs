//! Points of a 2n-dimensional canonical phase space.
//!
//! A [`PhaseState`] stores configuration `q`, momenta `p` and, per
//! configuration coordinate, whether it lives on a line or on a circle.
//! Angular coordinates are always kept normalized to `[0, 2pi)`; the
//! single normalization point here avoids branch bugs in the
//! `arctan`-based charts downstream.

use std::f64::consts::TAU;

use crate::error::{Error, Result};

/// Geometry of one configuration coordinate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub enum CoordKind {
    /// Coordinate on the real line.
    Linear,
    /// Coordinate on a circle, stored in `[0, 2pi)`.
    Angular,
}

/// Normalize an angle to `[0, 2pi)`.
pub fn normalize_angle(x: f64) -> f64 {
    let r = x.rem_euclid(TAU);
    // rem_euclid of a tiny negative value can round up to exactly 2pi
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// A point `(q, p)` in canonical phase space.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseState {
    q: Vec<f64>,
    p: Vec<f64>,
    kinds: Vec<CoordKind>,
}

impl PhaseState {
    /// Build a state from configuration, momenta and coordinate kinds.
    ///
    /// Angular entries of `q` are normalized to `[0, 2pi)`. Fails on
    /// length mismatch, empty vectors or non-finite entries.
    pub fn new(q: Vec<f64>, p: Vec<f64>, kinds: Vec<CoordKind>) -> Result<Self> {
        if q.len() != p.len() || q.len() != kinds.len() {
            return Err(Error::LengthMismatch {
                q_len: q.len(),
                p_len: p.len(),
            });
        }
        if q.is_empty() {
            return Err(Error::EmptyState);
        }
        if q.iter().chain(p.iter()).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                context: "phase state entries".into(),
            });
        }
        let q = q
            .into_iter()
            .zip(kinds.iter())
            .map(|(v, k)| match k {
                CoordKind::Linear => v,
                CoordKind::Angular => normalize_angle(v),
            })
            .collect();
        Ok(Self { q, p, kinds })
    }

    /// Number of degrees of freedom `n`.
    pub fn dim(&self) -> usize {
        self.q.len()
    }

    pub fn q(&self) -> &[f64] {
        &self.q
    }

    pub fn p(&self) -> &[f64] {
        &self.p
    }

    pub fn kinds(&self) -> &[CoordKind] {
        &self.kinds
    }

    /// Packed coordinates `[q_1..q_n, p_1..p_n]`.
    pub fn packed(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(2 * self.dim());
        v.extend_from_slice(&self.q);
        v.extend_from_slice(&self.p);
        v
    }

    /// Rebuild a state from packed coordinates.
    pub fn from_packed(vals: &[f64], kinds: &[CoordKind]) -> Result<Self> {
        let n = kinds.len();
        if vals.len() != 2 * n {
            return Err(Error::LengthMismatch {
                q_len: vals.len(),
                p_len: 2 * n,
            });
        }
        Self::new(vals[..n].to_vec(), vals[n..].to_vec(), kinds.to_vec())
    }

    /// Copy of the state with packed coordinate `slot` shifted by `delta`.
    ///
    /// Angular configuration slots are renormalized; used by the
    /// finite-difference stencils.
    pub fn shifted(&self, slot: usize, delta: f64) -> Self {
        let n = self.dim();
        let mut out = self.clone();
        if slot < n {
            out.q[slot] += delta;
            if out.kinds[slot] == CoordKind::Angular {
                out.q[slot] = normalize_angle(out.q[slot]);
            }
        } else {
            out.p[slot - n] += delta;
        }
        out
    }

    /// Euclidean distance with the minimal image convention on angular
    /// coordinates.
    pub fn distance(&self, other: &PhaseState) -> f64 {
        let mut s = 0.0;
        for i in 0..self.dim() {
            let mut dq = self.q[i] - other.q[i];
            if self.kinds[i] == CoordKind::Angular {
                dq -= (dq / TAU).round() * TAU;
            }
            let dp = self.p[i] - other.p[i];
            s += dq * dq + dp * dp;
        }
        s.sqrt()
    }
}
