use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("a junction needs at least one particle")]
    NoParticles,
    #[error("M = {m} is not on the ladder of a J = {j} basis")]
    OffLadder { m: f64, j: f64 },
    #[error("basis mismatch: N = {left} vs N = {right}")]
    BasisMismatch { left: usize, right: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("state is not normalized (norm² = {norm_sqr})")]
    NotNormalized { norm_sqr: f64 },
    #[error("coupling T must be nonzero")]
    ZeroCoupling,
    #[error("requested {k} eigenpairs from a {dim}-dimensional operator")]
    LevelCount { k: usize, dim: usize },
    #[error("eigensolver failed to converge")]
    NoConvergence,
    #[error("schedule times must be strictly increasing")]
    NonIncreasingTime,
    #[error("a schedule needs at least two breakpoints")]
    TooFewBreakpoints,
    #[error("time step must be positive and finite, got {0}")]
    InvalidStep(f64),
    #[error("time step {dt} exceeds the schedule duration {duration}")]
    StepTooLong { dt: f64, duration: f64 },
    #[error("time step {0} is already at reference resolution")]
    ReferenceResolution(f64),
    #[error("non-finite parameter: {0}")]
    NonFinite(&'static str),
    #[error("the protocol requires a negative charging energy, got E_C = {0}")]
    NonNegativeCharging(f64),
    #[error("coupling_max = {coupling_max} is below 10·|E_C| = {bound}")]
    WeakCoupling { coupling_max: f64, bound: f64 },
    #[error("detection imbalance |δ| = {delta} must stay below |E_C|/2 = {bound} to avoid the bifurcation")]
    BifurcationBound { delta: f64, bound: f64 },
    #[error("invalid grid: {0}")]
    InvalidGrid(&'static str),
    #[error("shot count must be at least 1")]
    NoShots,
    #[error("f0 count {counts} exceeds shot count {shots}")]
    CountsExceedShots { counts: u64, shots: u64 },
}

impl Error {
    /// True for failures of the numerics themselves rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::NoConvergence)
    }
}
