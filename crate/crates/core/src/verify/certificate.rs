//! Certificate data model and its human-readable rendering.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::symplectic::CheckReport;

use super::SamplingConfig;

/// Least-squares affine fit `post ~ slope * pre + intercept` of a
/// discrete impact relation.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct AffineFit {
    pub slope: f64,
    pub intercept: f64,
    pub max_residual: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum DiscreteOutcome {
    Pass,
    Fail,
    /// Not enough collision pairs to test any bin.
    Inconclusive,
}

/// Result of the binning test for "post value determined by pre
/// value" on one component.
#[derive(Clone, Debug, Serialize)]
pub struct DiscreteRelationReport {
    pub outcome: DiscreteOutcome,
    pub bin_width: f64,
    /// Bins holding at least two samples.
    pub bins_tested: usize,
    pub max_in_bin_spread: f64,
    /// Empirical map pre -> post, one representative per bin.
    pub relation: Vec<(f64, f64)>,
    pub affine_fit: Option<AffineFit>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum IntegralVerdict {
    HybridConstant,
    GeneralizedHybridConstant,
    Inconclusive,
    Fails { reason: String },
}

#[derive(Clone, Debug, Serialize)]
pub struct ComponentRelationReport {
    pub component_id: usize,
    /// Preservation check `|f(Delta x) - f(x)|`.
    pub hybrid: CheckReport,
    pub discrete: DiscreteRelationReport,
}

#[derive(Clone, Debug, Serialize)]
pub struct IntegralReport {
    pub name: String,
    /// `max |{H, f}|` over the free-phase-space samples.
    pub flow_invariance: CheckReport,
    pub components: Vec<ComponentRelationReport>,
    pub verdict: IntegralVerdict,
}

#[derive(Clone, Debug, Serialize)]
pub struct IndependenceReport {
    pub full_rank_fraction: f64,
    pub threshold: f64,
    pub draws: usize,
    pub expected_rank: usize,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct TransportReport {
    pub component_id: usize,
    pub level: Vec<f64>,
    pub level_post: Vec<f64>,
    pub max_spread: f64,
    pub tol: f64,
    pub samples: usize,
    pub pass: bool,
}

/// Complete-integrability certificate: the aggregated verdicts of the
/// involution, independence, constant-of-motion, Lagrangian and
/// level-set-transport checks.
#[derive(Clone, Debug, Serialize)]
pub struct Certificate {
    pub degrees_of_freedom: usize,
    pub parameters: BTreeMap<String, f64>,
    pub sampling: SamplingConfig,
    pub involution: CheckReport,
    pub independence: IndependenceReport,
    pub integrals: Vec<IntegralReport>,
    pub lagrangian: CheckReport,
    pub transport: Vec<TransportReport>,
    pub notes: Vec<String>,
    pub overall_pass: bool,
}

impl Certificate {
    /// Human-readable report.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let pf = |b: bool| if b { "PASS" } else { "FAIL" };
        out.push_str("hybrid integrability certificate\n");
        out.push_str("================================\n");
        out.push_str(&format!(
            "degrees of freedom: {}\n",
            self.degrees_of_freedom
        ));
        let params: Vec<String> = self
            .parameters
            .iter()
            .map(|(k, v)| format!("{k} = {v}"))
            .collect();
        out.push_str(&format!("parameters: {}\n", params.join(", ")));
        out.push_str(&format!("seed: {}\n", self.sampling.seed));
        out.push_str(&format!("overall: {}\n\n", pf(self.overall_pass)));

        out.push_str(&format!(
            "involution    max |{{f_i, f_j}}| = {:.3e}  (tol {:.1e}, {} samples)  {}\n",
            self.involution.max_residual,
            self.involution.tol,
            self.involution.samples,
            pf(self.involution.pass)
        ));
        out.push_str(&format!(
            "independence  full-rank fraction = {:.4}  (threshold {:.2}, {} draws)  {}\n",
            self.independence.full_rank_fraction,
            self.independence.threshold,
            self.independence.draws,
            pf(self.independence.pass)
        ));
        out.push_str(&format!(
            "lagrangian    max |omega(v_a, v_b)| = {:.3e}  (tol {:.1e}, {} states)  {}\n\n",
            self.lagrangian.max_residual,
            self.lagrangian.tol,
            self.lagrangian.samples,
            pf(self.lagrangian.pass)
        ));

        for rep in &self.integrals {
            let verdict = match &rep.verdict {
                IntegralVerdict::HybridConstant => "hybrid constant of the motion".to_string(),
                IntegralVerdict::GeneralizedHybridConstant => {
                    "generalized hybrid constant of the motion".to_string()
                }
                IntegralVerdict::Inconclusive => "inconclusive".to_string(),
                IntegralVerdict::Fails { reason } => format!("FAILS ({reason})"),
            };
            out.push_str(&format!("integral {}: {}\n", rep.name, verdict));
            out.push_str(&format!(
                "  flow invariance  max |{{H, f}}| = {:.3e}  (tol {:.1e})  {}\n",
                rep.flow_invariance.max_residual,
                rep.flow_invariance.tol,
                pf(rep.flow_invariance.pass)
            ));
            for comp in &rep.components {
                let fit = match &comp.discrete.affine_fit {
                    Some(f) => format!(
                        "post ~ {:.12} * pre + {:.12} (resid {:.2e})",
                        f.slope, f.intercept, f.max_residual
                    ),
                    None => "-".to_string(),
                };
                out.push_str(&format!(
                    "  component {}  |f o Delta - f| = {:.3e} [{}]  bins {} spread {:.3e} [{:?}]\n",
                    comp.component_id,
                    comp.hybrid.max_residual,
                    pf(comp.hybrid.pass),
                    comp.discrete.bins_tested,
                    comp.discrete.max_in_bin_spread,
                    comp.discrete.outcome
                ));
                out.push_str(&format!("    fitted relation: {fit}\n"));
            }
        }
        out.push('\n');

        for t in &self.transport {
            let fmt_level = |l: &[f64]| {
                let parts: Vec<String> = l.iter().map(|v| format!("{v:.12}")).collect();
                format!("({})", parts.join(", "))
            };
            out.push_str(&format!(
                "transport component {}: {} -> {}  spread {:.3e} (tol {:.1e}, {} samples)  {}\n",
                t.component_id,
                fmt_level(&t.level),
                fmt_level(&t.level_post),
                t.max_spread,
                t.tol,
                t.samples,
                pf(t.pass)
            ));
        }
        out.push('\n');

        for n in &self.notes {
            out.push_str(&format!("note: {n}\n"));
        }
        out
    }
}
