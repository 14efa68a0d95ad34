//! Hybrid Hamiltonian systems: smooth flow plus guarded impact
//! components.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::observable::{Observable, PredicateFn};
use crate::state::{CoordKind, PhaseState};

/// Guard membership tolerance in model units; event localization
/// refines crossings to this scale.
pub const DEFAULT_GUARD_TOL: f64 = 1e-9;

/// Side from which a trajectory must cross the guard's zero level set
/// for the impact to fire.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub enum Approach {
    /// Guard decreasing through zero.
    FromPositive,
    /// Guard increasing through zero.
    FromNegative,
    /// Any sign change.
    Either,
}

pub type ImpactFn = Arc<dyn Fn(&PhaseState) -> Result<PhaseState> + Send + Sync>;

/// One connected component of the impact surface together with its
/// impact map.
///
/// The zero level set of `guard`, restricted by `admissible`, is the
/// component; `impact` maps pre-impact states to post-impact states.
#[derive(Clone)]
pub struct GuardedImpact {
    component_id: usize,
    guard: Observable,
    approach: Approach,
    admissible: PredicateFn,
    impact: ImpactFn,
}

impl GuardedImpact {
    pub fn new(
        component_id: usize,
        guard: Observable,
        approach: Approach,
        admissible: impl Fn(&PhaseState) -> bool + Send + Sync + 'static,
        impact: impl Fn(&PhaseState) -> Result<PhaseState> + Send + Sync + 'static,
    ) -> Self {
        Self {
            component_id,
            guard,
            approach,
            admissible: Arc::new(admissible),
            impact: Arc::new(impact),
        }
    }

    pub fn component_id(&self) -> usize {
        self.component_id
    }

    pub fn guard(&self) -> &Observable {
        &self.guard
    }

    pub fn guard_value(&self, x: &PhaseState) -> Result<f64> {
        self.guard.eval(x)
    }

    pub fn approach(&self) -> Approach {
        self.approach
    }

    pub fn admissible(&self, x: &PhaseState) -> bool {
        (self.admissible)(x)
    }

    /// Whether `x` lies on this component: guard within `tol` and
    /// admissible.
    pub fn on_surface(&self, x: &PhaseState, tol: f64) -> Result<bool> {
        Ok(self.guard_value(x)?.abs() <= tol && self.admissible(x))
    }

    /// Apply the impact map.
    pub fn apply(&self, x: &PhaseState) -> Result<PhaseState> {
        (self.impact)(x)
    }
}

impl std::fmt::Debug for GuardedImpact {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GuardedImpact")
            .field("component_id", &self.component_id)
            .field("approach", &self.approach)
            .finish()
    }
}

/// A hybrid Hamiltonian system: Hamiltonian, impact components and
/// named model parameters.
#[derive(Clone, Debug)]
pub struct HybridSystem {
    hamiltonian: Observable,
    components: Vec<GuardedImpact>,
    parameters: BTreeMap<String, f64>,
    coord_kinds: Vec<CoordKind>,
    /// Declared by the model: `H = T(p) + V(q)`; required by the
    /// Stormer-Verlet scheme.
    separable: bool,
}

impl HybridSystem {
    pub fn new(
        hamiltonian: Observable,
        components: Vec<GuardedImpact>,
        parameters: BTreeMap<String, f64>,
        coord_kinds: Vec<CoordKind>,
        separable: bool,
    ) -> Result<Self> {
        if coord_kinds.is_empty() {
            return Err(Error::EmptyState);
        }
        for (i, a) in components.iter().enumerate() {
            for b in components.iter().skip(i + 1) {
                if a.component_id() == b.component_id() {
                    return Err(Error::InvalidParameter {
                        what: format!("duplicate component id {}", a.component_id()),
                    });
                }
            }
        }
        Ok(Self {
            hamiltonian,
            components,
            parameters,
            coord_kinds,
            separable,
        })
    }

    pub fn dim(&self) -> usize {
        self.coord_kinds.len()
    }

    pub fn coord_kinds(&self) -> &[CoordKind] {
        &self.coord_kinds
    }

    pub fn hamiltonian(&self) -> &Observable {
        &self.hamiltonian
    }

    pub fn components(&self) -> &[GuardedImpact] {
        &self.components
    }

    pub fn component(&self, component_id: usize) -> Result<&GuardedImpact> {
        self.components
            .iter()
            .find(|c| c.component_id() == component_id)
            .ok_or(Error::UnknownComponent { component_id })
    }

    pub fn parameters(&self) -> &BTreeMap<String, f64> {
        &self.parameters
    }

    pub fn parameter(&self, name: &str) -> Option<f64> {
        self.parameters.get(name).copied()
    }

    pub fn is_separable(&self) -> bool {
        self.separable
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicate_component_ids_rejected() {
        let h = Observable::new("H", |x: &PhaseState| x.p()[0] * x.p()[0] / 2.0);
        let mk = || {
            GuardedImpact::new(
                0,
                Observable::new("g", |x: &PhaseState| x.q()[0]),
                Approach::Either,
                |_| true,
                |x| Ok(x.clone()),
            )
        };
        let r = HybridSystem::new(
            h,
            vec![mk(), mk()],
            BTreeMap::new(),
            vec![CoordKind::Linear],
            true,
        );
        assert!(r.is_err());
    }
}
