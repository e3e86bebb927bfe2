use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),

    #[error("steady-state residual {residual:e} exceeds tolerance for every phase choice")]
    InconsistentSteadyState { residual: f64 },

    #[error("no polarization threshold: the four-wave-mixing coefficient is zero")]
    NoPolarizationThreshold,

    #[error("trajectory did not settle by t = {t_max} (|da/dt| = {derivative:e})")]
    NotSettled { t_max: f64, derivative: f64 },

    #[error("settled amplitude matches no steady-state solution")]
    NoMatchingState,

    #[error(
        "spectral matrix is singular at omega = {omega} (delta = {delta}, E2 = {pump_e2}, \
         I1 = {i1}, condition ~ {condition:e}); approach the bifurcation at a finite offset"
    )]
    NearBifurcation {
        omega: f64,
        delta: f64,
        pump_e2: f64,
        i1: f64,
        condition: f64,
    },

    #[error("closed form has a vanishing denominator here; evaluate as a limit")]
    LimitRequired,

    #[error("closed form only holds for the liquid coefficients A = 1/4, B = 3/2")]
    NotLiquid,

    #[error("imaginary residue {residue:e} in a quantity that must be real")]
    NumericalConsistency { residue: f64 },

    #[error("operating point is not linearly stable")]
    UnstableState,

    #[error("diffusion block has vanishing diagonal but nonzero coupling")]
    DegenerateBlock,

    #[error("non-finite sample in trajectory {trajectory} at step {step}")]
    NonFinite { trajectory: usize, step: usize },

    #[error("{diverged} of {total} trajectories diverged")]
    UnreliableRegime { diverged: usize, total: usize },

    #[error("only {segments} spectral segments available, need at least 8")]
    InsufficientData { segments: usize },

    #[error("frequency grid must be finite and strictly increasing")]
    InvalidGrid,

    #[error("invalid simulation config: {0}")]
    InvalidConfig(&'static str),
}
