//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Raw gradient magnitude below threshold: the query sits on a medial
    /// locus or a primitive center where the distance field is not smooth.
    #[error("gradient undefined (query on a medial locus or primitive center)")]
    GradientUndefined,

    #[error("bounds are degenerate (some extent <= 0)")]
    BoundsDegenerate,

    /// The along-spoke identity |phi(foot + t n)| = t fails at the starting
    /// radius: the input field is not an exact distance field.
    #[error("spoke march failed: |phi| deviates from t by {deviation:.3e} at the spoke start")]
    SpokeMarchFailed { deviation: f64 },

    #[error("medial query on the surface (|phi| <= tol)")]
    QueryOnSurface,

    /// Orthogonality residual requested inside the exclusion band around the
    /// surface or the medial locus.
    #[error("query inside the exclusion band around the surface or medial locus")]
    ExcludedRegion,

    #[error("sample batch is empty")]
    EmptyBatch,

    #[error("training loss became non-finite at step {step}")]
    DivergedLoss { step: usize },

    #[error("interior rejection sampling starved (acceptance below 0.1%)")]
    RejectionStarved,

    #[error("requested {want} proxy spheres but only {have} candidates exist")]
    NotEnoughCandidates { have: usize, want: usize },

    #[error("proxy set is empty")]
    EmptyProxy,

    #[error("2D scenes have no perspective render; use the field visualization")]
    Dim2NotRenderable,

    #[error("invalid scene: {0}")]
    InvalidScene(String),

    #[error("malformed file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
