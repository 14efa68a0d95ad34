//! Certification engine: decides, numerically, whether observables
//! are hybrid constants or generalized hybrid constants of the
//! motion, and assembles a complete-integrability certificate.
//!
//! A hybrid constant is preserved by both the smooth flow and the
//! impact map. A generalized hybrid constant is flow-invariant and
//! its post-impact value is uniquely determined by its pre-impact
//! value on each surface component; the discrete condition is tested
//! by binning sampled pre-values and checking that each bin's
//! post-values agree. The samplers deliberately generate collision
//! pairs (distinct surface points with equal pre-value) so the bins
//! actually constrain the relation.
//!
//! All sampling is driven by a seeded generator; a fixed seed yields
//! an identical certificate.

pub mod certificate;
pub mod sampling;

pub use certificate::{
    AffineFit, Certificate, ComponentRelationReport, DiscreteOutcome, DiscreteRelationReport,
    IndependenceReport, IntegralReport, IntegralVerdict, TransportReport,
};
pub use sampling::SurfaceSampler;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::charts::linear_fit;
use crate::error::{Error, Result};
use crate::observable::Observable;
use crate::state::PhaseState;
use crate::symplectic::{
    check_involution, check_lagrangian_level_set, poisson_bracket, rank_of_df, CheckReport,
    IntegralSet,
};
use crate::system::{HybridSystem, DEFAULT_GUARD_TOL};
use crate::trajectory::HybridTrajectory;

/// Sizes, box and tolerances of the certification sampling; recorded
/// verbatim in the certificate so its scope is explicit.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct SamplingConfig {
    pub seed: u64,
    /// Free-phase-space samples for bracket checks.
    pub n_bracket_samples: usize,
    /// Uniform draws for the almost-everywhere rank test.
    pub n_rank_draws: usize,
    /// Surface samples per component.
    pub n_surface_samples: usize,
    /// Collision pairs per integral and component.
    pub n_collision_pairs: usize,
    /// Regular states for the Lagrangian check.
    pub n_lagrangian_samples: usize,
    /// Samples per component for the level-set transport check.
    pub n_transport_samples: usize,
    /// Half-width of the uniform sampling box (angles cover the full
    /// circle).
    pub box_half_width: f64,
    /// Tolerance for bracket-style checks (involution, flow
    /// invariance).
    pub tol_bracket: f64,
    /// Bin width and pass tolerance of the discrete relation test.
    pub tol_discrete: f64,
    pub tol_lagrangian: f64,
    pub tol_transport: f64,
    /// Relative singular-value threshold of the rank decision.
    pub sv_tol: f64,
    /// Fraction of full-rank draws required by the almost-everywhere
    /// independence test.
    pub min_full_rank_fraction: f64,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            n_bracket_samples: 100,
            n_rank_draws: 1000,
            n_surface_samples: 60,
            n_collision_pairs: 40,
            n_lagrangian_samples: 100,
            n_transport_samples: 40,
            box_half_width: 1.5,
            tol_bracket: 1e-10,
            tol_discrete: 1e-9,
            tol_lagrangian: 1e-8,
            tol_transport: 1e-9,
            sv_tol: 1e-8,
            min_full_rank_fraction: 0.99,
        }
    }
}

impl SamplingConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }
}

/// Flow-invariance check: `max |{H, f}|` over the samples.
pub fn check_flow_invariance(
    system: &HybridSystem,
    f: &Observable,
    samples: &[PhaseState],
    tol: f64,
) -> Result<CheckReport> {
    if samples.is_empty() {
        return Err(Error::Sampling {
            what: "flow-invariance check needs a nonempty sample set".into(),
        });
    }
    let mut max = 0.0_f64;
    for x in samples {
        max = max.max(poisson_bracket(system.hamiltonian(), f, x)?.abs());
    }
    Ok(CheckReport::from_residual(max, tol, samples.len()))
}

fn require_on_surface(
    system: &HybridSystem,
    component_id: usize,
    samples: &[PhaseState],
) -> Result<()> {
    let comp = system.component(component_id)?;
    for (i, x) in samples.iter().enumerate() {
        if !comp.on_surface(x, DEFAULT_GUARD_TOL)? {
            return Err(Error::NotOnSurface {
                what: format!(
                    "sample {i} is not on component {component_id} (guard {:.3e}, admissible {})",
                    comp.guard_value(x)?,
                    comp.admissible(x)
                ),
            });
        }
    }
    Ok(())
}

/// Preservation under the impact map: `max |f(Delta x) - f(x)|` over
/// surface samples.
pub fn check_hybrid_constant(
    system: &HybridSystem,
    component_id: usize,
    f: &Observable,
    surface_samples: &[PhaseState],
    tol: f64,
) -> Result<CheckReport> {
    require_on_surface(system, component_id, surface_samples)?;
    let comp = system.component(component_id)?;
    let mut max = 0.0_f64;
    for x in surface_samples {
        let post = comp.apply(x)?;
        max = max.max((f.eval(&post)? - f.eval(x)?).abs());
    }
    Ok(CheckReport::from_residual(max, tol, surface_samples.len()))
}

/// Binning test: is the post-impact value of `f` uniquely determined
/// by its pre-impact value on this component?
///
/// Samples are grouped into bins of width `tol` by pre-value; the
/// test requires at least one bin with two or more samples (the
/// collision pairs) and passes when every tested bin's post-values
/// spread by less than `tol`. The empirical map and its affine fit
/// are reported alongside.
pub fn check_generalized_hybrid_constant(
    system: &HybridSystem,
    component_id: usize,
    f: &Observable,
    surface_samples: &[PhaseState],
    tol: f64,
) -> Result<DiscreteRelationReport> {
    require_on_surface(system, component_id, surface_samples)?;
    let comp = system.component(component_id)?;
    let mut pairs: Vec<(f64, f64)> = Vec::with_capacity(surface_samples.len());
    for x in surface_samples {
        pairs.push((f.eval(x)?, f.eval(&comp.apply(x)?)?));
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut relation = Vec::new();
    let mut bins_tested = 0;
    let mut max_spread = 0.0_f64;
    let mut i = 0;
    while i < pairs.len() {
        let anchor = pairs[i].0;
        let mut j = i + 1;
        while j < pairs.len() && pairs[j].0 - anchor <= tol {
            j += 1;
        }
        let bin = &pairs[i..j];
        if bin.len() >= 2 {
            bins_tested += 1;
            let lo = bin.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
            let hi = bin.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
            max_spread = max_spread.max(hi - lo);
        }
        relation.push(bin[0]);
        i = j;
    }

    let affine_fit = if relation.len() >= 2 {
        let pres: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let posts: Vec<f64> = pairs.iter().map(|p| p.1).collect();
        let (slope, intercept, max_residual) = linear_fit(&pres, &posts);
        Some(AffineFit {
            slope,
            intercept,
            max_residual,
        })
    } else {
        None
    };

    let outcome = if bins_tested == 0 {
        DiscreteOutcome::Inconclusive
    } else if max_spread < tol {
        DiscreteOutcome::Pass
    } else {
        DiscreteOutcome::Fail
    };
    Ok(DiscreteRelationReport {
        outcome,
        bin_width: tol,
        bins_tested,
        max_in_bin_spread: max_spread,
        relation,
        affine_fit,
    })
}

/// Level-set transport: does the impact map send `M_Lambda` (cap the
/// component) into a single level set `M_Lambda'`?
pub fn check_level_set_transport(
    system: &HybridSystem,
    integrals: &IntegralSet,
    component_id: usize,
    level: &[f64],
    surface_samples: &[PhaseState],
    tol: f64,
) -> Result<TransportReport> {
    if surface_samples.is_empty() {
        return Err(Error::Sampling {
            what: "level-set transport check has an empty sample set (inconclusive)".into(),
        });
    }
    require_on_surface(system, component_id, surface_samples)?;
    // samples must actually lie in M_Lambda
    for x in surface_samples {
        let lab = integrals.label(x)?;
        for (i, (have, want)) in lab.iter().zip(level).enumerate() {
            if (have - want).abs() > 1e-7 {
                return Err(Error::NotOnSurface {
                    what: format!(
                        "sample is not in the level set: f{} = {have}, expected {want}",
                        i + 1
                    ),
                });
            }
        }
    }
    let comp = system.component(component_id)?;
    let posts: Vec<Vec<f64>> = surface_samples
        .iter()
        .map(|x| integrals.label(&comp.apply(x)?))
        .collect::<Result<_>>()?;
    let n = integrals.len();
    let mut level_post = vec![0.0; n];
    for post in &posts {
        for (acc, v) in level_post.iter_mut().zip(post) {
            *acc += v / posts.len() as f64;
        }
    }
    let mut max_spread = 0.0_f64;
    for post in &posts {
        for (mean, v) in level_post.iter().zip(post) {
            max_spread = max_spread.max((v - mean).abs());
        }
    }
    Ok(TransportReport {
        component_id,
        level: level.to_vec(),
        level_post,
        max_spread,
        tol,
        samples: surface_samples.len(),
        pass: max_spread < tol,
    })
}

/// Assemble the surface sample set for one component: base draws plus
/// collision pairs for `f`.
fn surface_samples_with_pairs(
    system: &HybridSystem,
    sampler: &SurfaceSampler,
    f: &Observable,
    rng: &mut ChaCha8Rng,
    cfg: &SamplingConfig,
) -> Result<(Vec<PhaseState>, usize)> {
    let mut samples = Vec::new();
    for _ in 0..cfg.n_surface_samples {
        samples.push(sampling::draw_surface_point(
            system,
            sampler,
            rng,
            cfg.box_half_width,
            1e-12,
        )?);
    }
    let mut pairs = 0;
    for _ in 0..cfg.n_collision_pairs {
        let base = sampling::draw_surface_point(system, sampler, rng, cfg.box_half_width, 1e-12)?;
        if let Some(partner) =
            sampling::collision_partner(system, sampler, f, &base, rng, 1e-12)?
        {
            samples.push(base);
            samples.push(partner);
            pairs += 1;
        }
    }
    Ok((samples, pairs))
}

/// Run the full certification: involution, almost-everywhere
/// independence, per-integral flow invariance and discrete relation
/// checks on every component, Lagrangian level sets, and level-set
/// transport.
pub fn certify(
    system: &HybridSystem,
    integrals: &IntegralSet,
    samplers: &[SurfaceSampler],
    cfg: &SamplingConfig,
) -> Result<Certificate> {
    let n = system.dim();
    if integrals.len() != n {
        return Err(Error::InvalidParameter {
            what: format!(
                "integral set has {} entries, system has {} degrees of freedom",
                integrals.len(),
                n
            ),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let kinds = system.coord_kinds();

    let free_samples: Vec<PhaseState> = (0..cfg.n_bracket_samples)
        .map(|_| sampling::random_state(&mut rng, kinds, cfg.box_half_width))
        .collect();

    let involution = check_involution(integrals, &free_samples, cfg.tol_bracket)?;

    let mut full_rank = 0usize;
    for _ in 0..cfg.n_rank_draws {
        let x = sampling::random_state(&mut rng, kinds, cfg.box_half_width);
        if rank_of_df(integrals, &x, cfg.sv_tol)? == n {
            full_rank += 1;
        }
    }
    let fraction = full_rank as f64 / cfg.n_rank_draws as f64;
    let independence = IndependenceReport {
        full_rank_fraction: fraction,
        threshold: cfg.min_full_rank_fraction,
        draws: cfg.n_rank_draws,
        expected_rank: n,
        pass: fraction >= cfg.min_full_rank_fraction,
    };

    // Lagrangian check on regular (full-rank) samples.
    let mut lagrangian_max = 0.0_f64;
    let mut lagrangian_states = 0usize;
    let mut attempts = 0usize;
    while lagrangian_states < cfg.n_lagrangian_samples && attempts < 20 * cfg.n_lagrangian_samples
    {
        attempts += 1;
        let x = sampling::random_state(&mut rng, kinds, cfg.box_half_width);
        if rank_of_df(integrals, &x, cfg.sv_tol)? != n {
            continue;
        }
        let rep = check_lagrangian_level_set(integrals, &x, cfg.tol_lagrangian)?;
        lagrangian_max = lagrangian_max.max(rep.max_residual);
        lagrangian_states += 1;
    }
    let lagrangian = CheckReport::from_residual(lagrangian_max, cfg.tol_lagrangian, lagrangian_states);

    let mut integral_reports = Vec::new();
    for f in integrals.iter() {
        let flow_invariance = check_flow_invariance(system, f, &free_samples, cfg.tol_bracket)?;
        let mut components = Vec::new();
        let mut all_hybrid = true;
        let mut all_discrete_pass = true;
        let mut any_inconclusive = false;
        for sampler in samplers {
            let (samples, _pairs) =
                surface_samples_with_pairs(system, sampler, f, &mut rng, cfg)?;
            let hybrid = check_hybrid_constant(
                system,
                sampler.component_id,
                f,
                &samples,
                cfg.tol_discrete,
            )?;
            let discrete = check_generalized_hybrid_constant(
                system,
                sampler.component_id,
                f,
                &samples,
                cfg.tol_discrete,
            )?;
            all_hybrid &= hybrid.pass;
            match discrete.outcome {
                DiscreteOutcome::Pass => {}
                DiscreteOutcome::Fail => all_discrete_pass = false,
                DiscreteOutcome::Inconclusive => any_inconclusive = true,
            }
            components.push(ComponentRelationReport {
                component_id: sampler.component_id,
                hybrid,
                discrete,
            });
        }
        let verdict = if !flow_invariance.pass {
            IntegralVerdict::Fails {
                reason: "not invariant under the continuous flow".into(),
            }
        } else if all_hybrid {
            IntegralVerdict::HybridConstant
        } else if any_inconclusive {
            IntegralVerdict::Inconclusive
        } else if all_discrete_pass {
            IntegralVerdict::GeneralizedHybridConstant
        } else {
            IntegralVerdict::Fails {
                reason: "post-impact value is not determined by the pre-impact value".into(),
            }
        };
        integral_reports.push(IntegralReport {
            name: f.name().to_string(),
            flow_invariance,
            components,
            verdict,
        });
    }

    let mut transport = Vec::new();
    for sampler in samplers {
        let base =
            sampling::draw_surface_point(system, sampler, &mut rng, cfg.box_half_width, 1e-12)?;
        let level = integrals.label(&base)?;
        let mut samples = sampling::sample_surface_level_set(
            system,
            sampler,
            integrals,
            &level,
            &mut rng,
            cfg.box_half_width,
            1e-12,
            cfg.n_transport_samples,
        )?;
        samples.push(base);
        transport.push(check_level_set_transport(
            system,
            integrals,
            sampler.component_id,
            &level,
            &samples,
            cfg.tol_transport,
        )?);
    }

    let integrals_pass = integral_reports.iter().all(|r| {
        matches!(
            r.verdict,
            IntegralVerdict::HybridConstant | IntegralVerdict::GeneralizedHybridConstant
        )
    });
    let overall_pass = involution.pass
        && independence.pass
        && lagrangian.pass
        && integrals_pass
        && transport.iter().all(|t| t.pass);

    Ok(Certificate {
        degrees_of_freedom: n,
        parameters: system.parameters().clone(),
        sampling: *cfg,
        involution,
        independence,
        integrals: integral_reports,
        lagrangian,
        transport,
        notes: vec![
            "level-set topology (torus identification of compact components) is not checked"
                .into(),
            "all quantifiers are verified on the sampled values recorded above, not symbolically"
                .into(),
        ],
        overall_pass,
    })
}

/// Cross-check of one simulated trajectory against the certified
/// relations.
#[derive(Clone, Debug, Serialize)]
pub struct TrajectoryCrossCheck {
    pub integral: String,
    pub impacts_checked: usize,
    /// Impacts whose pre-state violates the exact-surface constraints
    /// (e.g. the disk's rolling condition); the certified relations
    /// are not claimed there.
    pub impacts_out_of_hypothesis: usize,
    pub max_relation_residual: f64,
    /// Largest drift of the integral along smooth arcs, relative.
    pub max_arc_drift: f64,
    pub pass: bool,
}

/// Check that along `traj` each certified integral is constant on
/// arcs and follows its fitted discrete relation across impacts.
///
/// Impacts violating a sampler's extra surface constraints by more
/// than `hypothesis_tol` are counted as out-of-hypothesis rather than
/// failures.
pub fn cross_check_trajectory(
    system: &HybridSystem,
    integrals: &IntegralSet,
    samplers: &[SurfaceSampler],
    cert: &Certificate,
    traj: &HybridTrajectory,
    tol: f64,
    hypothesis_tol: f64,
) -> Result<Vec<TrajectoryCrossCheck>> {
    let _ = system;
    let mut out = Vec::new();
    for (idx, f) in integrals.iter().enumerate() {
        let report = &cert.integrals[idx];
        let mut max_arc_drift = 0.0_f64;
        for arc in &traj.arcs {
            let f0 = f.eval(&arc.states[0])?;
            let scale = f0.abs().max(1.0);
            for x in &arc.states {
                max_arc_drift = max_arc_drift.max((f.eval(x)? - f0).abs() / scale);
            }
        }
        let mut impacts_checked = 0;
        let mut out_of_hypothesis = 0;
        let mut max_resid = 0.0_f64;
        for ev in &traj.events {
            let sampler = samplers
                .iter()
                .find(|s| s.component_id == ev.component_id)
                .ok_or(Error::UnknownComponent {
                    component_id: ev.component_id,
                })?;
            let hypothesis_ok = sampler
                .extra_constraints
                .iter()
                .map(|c| c.eval(&ev.state_pre))
                .collect::<Result<Vec<f64>>>()?
                .iter()
                .all(|r| r.abs() <= hypothesis_tol);
            if !hypothesis_ok {
                out_of_hypothesis += 1;
                continue;
            }
            let comp_rep = report
                .components
                .iter()
                .find(|c| c.component_id == ev.component_id);
            let (slope, intercept) = match comp_rep.and_then(|c| c.discrete.affine_fit) {
                Some(fit) => (fit.slope, fit.intercept),
                None => (1.0, 0.0),
            };
            let pre = f.eval(&ev.state_pre)?;
            let post = f.eval(&ev.state_post)?;
            max_resid = max_resid.max((post - (slope * pre + intercept)).abs());
            impacts_checked += 1;
        }
        out.push(TrajectoryCrossCheck {
            integral: f.name().to_string(),
            impacts_checked,
            impacts_out_of_hypothesis: out_of_hypothesis,
            max_relation_residual: max_resid,
            max_arc_drift,
            pass: max_resid < tol && max_arc_drift < tol,
        });
    }
    Ok(out)
}
