//! Built-in hybrid Hamiltonian systems.

mod disk;
mod pendulum;

pub use disk::{build_disk, DiskParams};
pub use pendulum::{build_pendulum, PendulumParams};

use std::collections::BTreeMap;

use crate::charts::ActionAngleChart;
use crate::error::{Error, Result};
use crate::symplectic::IntegralSet;
use crate::system::HybridSystem;
use crate::verify::sampling::SurfaceSampler;

/// Everything a model provides: the hybrid system, its candidate
/// integral set, surface samplers for certification, and (for the
/// normalized parameter values) a closed-form action-angle chart.
pub struct ModelBundle {
    pub system: HybridSystem,
    pub integrals: IntegralSet,
    chart: Option<ActionAngleChart>,
    pub surface_samplers: Vec<SurfaceSampler>,
    pub coord_names: Vec<String>,
    pub momentum_names: Vec<String>,
}

impl ModelBundle {
    /// The action-angle chart; errors when the model was built with
    /// parameters outside the normalization the chart formulas assume.
    pub fn chart(&self) -> Result<&ActionAngleChart> {
        self.chart.as_ref().ok_or_else(|| Error::ChartDomain {
            what: "no closed-form chart for non-normalized model parameters".into(),
        })
    }

    pub fn has_chart(&self) -> bool {
        self.chart.is_some()
    }
}

/// Build a model by CLI name with parameter overrides.
///
/// Known names: `disk` (parameters `m`, `R`, `k`, `omega`, `h`, `e`)
/// and `pendulum` (parameters `m`, `g`, `l`, `e`).
pub fn build_by_name(name: &str, params: &BTreeMap<String, f64>) -> Result<ModelBundle> {
    let get = |key: &str, default: f64| params.get(key).copied().unwrap_or(default);
    match name {
        "disk" => build_disk(DiskParams {
            mass: get("m", 1.0),
            radius: get("R", 1.0),
            gyration: get("k", 1.0),
            frequency: get("omega", 1.0),
            wall_gap: get("h", 4.0),
            restitution: get("e", 1.0),
        }),
        "pendulum" => build_pendulum(PendulumParams {
            mass: get("m", 1.0),
            gravity: get("g", 1.0),
            length: get("l", 1.0),
            restitution: get("e", 1.0),
        }),
        other => Err(Error::InvalidParameter {
            what: format!("unknown model `{other}` (expected `disk` or `pendulum`)"),
        }),
    }
}
