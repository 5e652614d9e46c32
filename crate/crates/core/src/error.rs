use thiserror::Error;

/// Crate-wide error type. Variants mirror the failure modes of the kernel,
/// Hamiltonian, solver and spectrum layers.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("kernel evaluated on its singular diagonal x = y")]
    Singularity,
    #[error("point ({0}, {1}) is on or outside the domain boundary")]
    OutOfDomain(f64, f64),
    #[error("image series did not reach the requested tail bound")]
    SeriesNotConverged,
    #[error("mesh too coarse for the requested evaluation: {0}")]
    MeshTooCoarse(String),
    #[error("configuration points closer than the separation floor")]
    PointsTooClose,
    #[error("critical-point search did not converge within the iteration cap")]
    NoConvergence,
    #[error("critical-point iterate left the domain or violated the separation floor")]
    LeftDomain,
    #[error("rho too large for the configuration: tau_k * rho = {0:.3e} exceeds separation/10")]
    RhoTooLarge(f64),
    #[error("evaluation point within 0.1 of a peak")]
    TooCloseToPeak,
    #[error("invalid mesh resolution: {0}")]
    ResolutionInvalid(String),
    #[error("Newton iteration diverged (residual growth after maximal damping)")]
    NewtonDiverged,
    #[error("Newton Jacobian is numerically singular")]
    JacobianSingular,
    #[error("continuation failed at rho = {0}")]
    ContinuationBroken(f64),
    #[error("field value |u| > 700 would overflow exp")]
    ExponentOverflow,
    #[error("eigenvalue solver failed: {0}")]
    EigSolverFailure(String),
    #[error("cannot normalize an identically zero field")]
    ZeroField,
    #[error("spectrum truncated: largest computed eigenvalue {0} does not certify the count")]
    SpectrumTruncated(f64),
    #[error("profile has too few samples for a fit")]
    InsufficientSamples,
    #[error("eigenvalue series violates the asserted regime inequality: {0}")]
    RegimeMismatch(String),
    #[error("need at least 3 descending rho values")]
    InsufficientData,
    #[error("missing profile fits for the far-field comparison")]
    MissingFits,
    #[error("quadrature failure: {0}")]
    QuadratureFailure(String),
    #[error("ball not admissible: {0}")]
    BallNotAdmissible(String),
    #[error("incomplete runs: {0}")]
    IncompleteRuns(String),
}

pub type Result<T> = std::result::Result<T, Error>;
