use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("length mismatch: q has {q_len} entries, p has {p_len}")]
    LengthMismatch { q_len: usize, p_len: usize },

    #[error("phase space must have dimension n >= 1")]
    EmptyState,

    #[error("non-finite value in {context}")]
    NonFinite { context: String },

    #[error("observable `{name}` evaluated outside its domain")]
    OutsideDomain { name: String },

    #[error("invalid parameter: {what}")]
    InvalidParameter { what: String },

    #[error("elliptic parameter m = {m} outside [0, 1)")]
    EllipticParam { m: f64 },

    #[error("amplitude phi = {phi} outside [-pi/2, pi/2]")]
    Amplitude { phi: f64 },

    #[error("invalid integrator config: {what}")]
    InvalidConfig { what: String },

    #[error("stormer_verlet requires a separable Hamiltonian H = T(p) + V(q)")]
    NonSeparable,

    #[error("integration produced a non-finite state at t = {t}")]
    IntegrationBlowUp { t: f64 },

    #[error("two impact components cross within event_tol at t = {t}")]
    SimultaneousImpacts { t: f64 },

    #[error(
        "post-impact state of component {component_id} lies on the impact surface again \
         (Delta(S) and S must be disjoint)"
    )]
    ImpactSurfaceNotLeft { component_id: usize },

    #[error("state is not on the impact surface: {what}")]
    NotOnSurface { what: String },

    #[error("chart domain violation: {what}")]
    ChartDomain { what: String },

    #[error("rank deficiency: expected {expected}, got {got}")]
    RankDeficient { expected: usize, got: usize },

    #[error("unknown component id {component_id}")]
    UnknownComponent { component_id: usize },

    #[error("sampling failed: {what}")]
    Sampling { what: String },
}

pub type Result<T> = std::result::Result<T, Error>;
