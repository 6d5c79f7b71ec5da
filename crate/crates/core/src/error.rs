use alloc::string::String;
use alloc::vec::Vec;

/// Everything that can go wrong below the CLI layer.
///
/// `Inconsistent`, `CheckFailed` and `CaseViolation` signal that the input
/// group violates a structural hypothesis (or was enumerated too shallowly);
/// drivers map them to a distinct exit code.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("matrix determinant is zero within tolerance")]
    DegenerateMatrix,
    #[error("map has no square root branch of the requested kind")]
    NoSquareRoot,
    #[error("generator labels must be unique and non-empty: {0}")]
    BadLabel(String),
    #[error("unknown generator label {0}")]
    UnknownLabel(String),
    #[error("adjunction target must not be the identity")]
    IdentityAdjunction,
    #[error("group has no non-identity words to enumerate")]
    EmptyGroup,
    #[error("depth {0} exceeds the enumeration cap {1}")]
    DepthCap(u32, u32),
    #[error("boundary circle sample has {got} points, need at least {need}")]
    InsufficientSample { got: usize, need: usize },
    #[error("could not order the boundary sample into a simple closed curve")]
    OrderingFailed,
    #[error("raster region {0} is below the tracking threshold")]
    UntrackedRegion(usize),
    #[error("algebraic and numeric bump sets disagree: hausdorff {hausdorff:.3e} exceeds {allowed:.3e}")]
    Inconsistent { hausdorff: f64, allowed: f64 },
    #[error("no fuchsian model is attached to or derivable for component {0}")]
    NoFuchsianModel(usize),
    #[error("circle subset too sparse to bound a hull")]
    TooSparse,
    #[error("curve check failed: {check:?}")]
    CheckFailed { check: CheckId },
    #[error("no matching boundary curve in the paired component")]
    UnmatchedCurve,
    #[error("class count {m} does not divide component count {n}")]
    CaseViolation { n: usize, m: usize },
    #[error("bumping collection mixes cardinality classes: {0}")]
    MixedBump(String),
    #[error("boundary sample does not enclose a region at this resolution")]
    DegenerateCurve,
    #[error("no grid path between sampled interior points")]
    Disconnected,
    #[error("domain raster has no interior cells")]
    EmptyDomain,
    #[error("{0}")]
    Invalid(String),
}

/// Which of the three boundary-curve checks rejected the input.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckId {
    Simple,
    NonAccumulating,
    CuspFree,
}

pub type Result<T> = core::result::Result<T, Error>;

impl Error {
    /// Hypothesis violations get their own exit code in the CLI.
    pub fn is_structural(&self) -> bool {
        matches!(
            self,
            Error::Inconsistent { .. } | Error::CheckFailed { .. } | Error::CaseViolation { .. }
        )
    }

    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }
}

/// Collects non-fatal findings (sampling gaps, skipped pieces) so reports
/// can surface them without aborting a run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Notes {
    pub entries: Vec<String>,
}

impl Notes {
    pub fn push(&mut self, s: impl Into<String>) {
        self.entries.push(s.into());
    }
}
