//! Scalar fields on phase space.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::state::PhaseState;

pub type ScalarFn = Arc<dyn Fn(&PhaseState) -> f64 + Send + Sync>;
pub type VectorFn = Arc<dyn Fn(&PhaseState) -> Vec<f64> + Send + Sync>;
pub type PredicateFn = Arc<dyn Fn(&PhaseState) -> bool + Send + Sync>;

/// A named scalar field, optionally with an analytic gradient and a
/// domain predicate.
///
/// When the gradient is absent, downstream code falls back to central
/// finite differences (see [`crate::symplectic::gradient`]). The
/// gradient convention is the packed layout `[df/dq, df/dp]`.
#[derive(Clone)]
pub struct Observable {
    name: String,
    eval: ScalarFn,
    grad: Option<VectorFn>,
    domain: Option<PredicateFn>,
}

impl std::fmt::Debug for Observable {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Observable")
            .field("name", &self.name)
            .field("analytic_grad", &self.grad.is_some())
            .finish()
    }
}

impl Observable {
    pub fn new(
        name: impl Into<String>,
        eval: impl Fn(&PhaseState) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            eval: Arc::new(eval),
            grad: None,
            domain: None,
        }
    }

    pub fn with_gradient(
        mut self,
        grad: impl Fn(&PhaseState) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        self.grad = Some(Arc::new(grad));
        self
    }

    pub fn with_domain(
        mut self,
        domain: impl Fn(&PhaseState) -> bool + Send + Sync + 'static,
    ) -> Self {
        self.domain = Some(Arc::new(domain));
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn has_analytic_gradient(&self) -> bool {
        self.grad.is_some()
    }

    /// Evaluate, enforcing the domain predicate and finiteness.
    pub fn eval(&self, x: &PhaseState) -> Result<f64> {
        if let Some(d) = &self.domain {
            if !d(x) {
                return Err(Error::OutsideDomain {
                    name: self.name.clone(),
                });
            }
        }
        let v = (self.eval)(x);
        if !v.is_finite() {
            return Err(Error::NonFinite {
                context: format!("observable `{}`", self.name),
            });
        }
        Ok(v)
    }

    /// Analytic gradient, if one was supplied.
    pub fn analytic_gradient(&self, x: &PhaseState) -> Option<Result<Vec<f64>>> {
        let g = self.grad.as_ref()?;
        if let Some(d) = &self.domain {
            if !d(x) {
                return Some(Err(Error::OutsideDomain {
                    name: self.name.clone(),
                }));
            }
        }
        let v = g(x);
        if v.len() != 2 * x.dim() {
            return Some(Err(Error::LengthMismatch {
                q_len: v.len(),
                p_len: 2 * x.dim(),
            }));
        }
        Some(Ok(v))
    }

    /// The coordinate function `q_i`.
    pub fn coordinate_q(i: usize) -> Self {
        Observable::new(format!("q{}", i + 1), move |x| x.q()[i]).with_gradient(move |x| {
            let mut g = vec![0.0; 2 * x.dim()];
            g[i] = 1.0;
            g
        })
    }

    /// The momentum function `p_i`.
    pub fn coordinate_p(i: usize) -> Self {
        Observable::new(format!("p{}", i + 1), move |x| x.p()[i]).with_gradient(move |x| {
            let mut g = vec![0.0; 2 * x.dim()];
            g[x.dim() + i] = 1.0;
            g
        })
    }

    pub fn constant(c: f64) -> Self {
        Observable::new(format!("const({c})"), move |_| c)
            .with_gradient(|x| vec![0.0; 2 * x.dim()])
    }

    /// `self - c`, sharing the gradient; used by the level-set samplers.
    pub fn shifted_by(&self, c: f64) -> Self {
        let eval = self.eval.clone();
        let mut out = Observable {
            name: format!("{} - {c}", self.name),
            eval: Arc::new(move |x| eval(x) - c),
            grad: self.grad.clone(),
            domain: self.domain.clone(),
        };
        out.name.truncate(64);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::CoordKind;

    fn state(q: &[f64], p: &[f64]) -> PhaseState {
        PhaseState::new(q.to_vec(), p.to_vec(), vec![CoordKind::Linear; q.len()]).unwrap()
    }

    #[test]
    fn domain_violation_is_error() {
        let f = Observable::new("inv", |x: &PhaseState| 1.0 / x.q()[0])
            .with_domain(|x| x.q()[0] != 0.0);
        assert!(f.eval(&state(&[2.0], &[0.0])).is_ok());
        assert!(matches!(
            f.eval(&state(&[0.0], &[0.0])),
            Err(Error::OutsideDomain { .. })
        ));
    }

    #[test]
    fn non_finite_value_is_error() {
        let f = Observable::new("bad", |_: &PhaseState| f64::INFINITY);
        assert!(f.eval(&state(&[0.0], &[0.0])).is_err());
    }
}
