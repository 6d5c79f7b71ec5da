//! Numeric tolerances shared across the pipeline.
//!
//! Every comparison against zero or between floating point quantities in
//! this crate goes through one of these constants, so a report can state
//! exactly which thresholds produced it.  The defaults are deliberately
//! spread over several orders of magnitude: determinant and trace checks
//! sit near machine precision, point identity is looser because limit
//! points are harvested from iterated products, and the bumping tolerance
//! is coarser still because it compares two independently computed point
//! clouds.

/// Determinant deviation allowed after normalization.
pub const TOL_DET: f64 = 1e-9;

/// Trace comparisons: parabolic boundary `|tr^2 - 4| <= TOL_TR` and the
/// real-trace test `|Im tr| <= TOL_TR`.
pub const TOL_TR: f64 = 1e-8;

/// Chordal distance below which two sphere points are the same point.
pub const TOL_PT: f64 = 1e-6;

/// Chordal proximity for bumping: a point of one boundary circle counts as
/// shared when it lies within this distance of the other circle.
pub const TOL_BUMP: f64 = 5e-3;

/// Density threshold for classifying a bump sample as the full boundary
/// circle: no gap larger than this may remain.
pub const TOL_GAP: f64 = 10.0 * TOL_BUMP;

/// Hausdorff tolerance for the stabilizer membership surrogate.  It must
/// dominate the sampling gaps of the boundary circles, which the pruning
/// radius keeps near 1e-4.
pub const TOL_STAB: f64 = 5e-3;

/// Angular gap on the model circle below which two angles are one point.
pub const TOL_ANG: f64 = 1e-4;

/// Minimum angular separation between distinct geodesics in an orbit
/// before the orbit counts as accumulating.
pub const TOL_ACC: f64 = 1e-4;

/// Minimum circular gap (radians) that produces a hull boundary geodesic.
pub const GAP_EPS: f64 = 1e-3;

/// Default pruning radius for the word enumeration.
pub const PRUNE_EPS: f64 = 1e-4;

/// Default and maximum enumeration depths.
pub const DEFAULT_DEPTH: u32 = 12;
pub const MAX_DEPTH: u32 = 20;

/// Fewest boundary circle points accepted by the Hausdorff surrogate.
pub const MIN_QUASICIRCLE_POINTS: usize = 16;

/// Tunable tolerance bundle threaded through the pipeline.  `Default`
/// reproduces the constants above.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub det: f64,
    pub tr: f64,
    pub pt: f64,
    pub bump: f64,
    pub gap: f64,
    pub stab: f64,
    pub ang: f64,
    pub acc: f64,
    pub gap_eps: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            det: TOL_DET,
            tr: TOL_TR,
            pt: TOL_PT,
            bump: TOL_BUMP,
            gap: TOL_GAP,
            stab: TOL_STAB,
            ang: TOL_ANG,
            acc: TOL_ACC,
            gap_eps: GAP_EPS,
        }
    }
}

impl Tolerances {
    /// All members must be strictly positive for the pipeline to run.
    pub fn validate(&self) -> bool {
        self.det > 0.0
            && self.tr > 0.0
            && self.pt > 0.0
            && self.bump > 0.0
            && self.gap > 0.0
            && self.stab > 0.0
            && self.ang > 0.0
            && self.acc > 0.0
            && self.gap_eps > 0.0
    }
}
