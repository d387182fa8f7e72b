//! Central tolerance and threshold constants.
//!
//! Every pass/fail threshold used by the checks and the acceptance suite is
//! defined here. Values that the harness config may override carry the same
//! name (lower-cased) in the `tolerances` config key.

/// Relative agreement of closed-form and direct metric determinants.
pub const DET_REL: f64 = 1e-12;

/// `g * g_inv = I` entrywise, evaluated where gamma exceeds [`INVERSE_MIN_GAMMA`].
pub const INVERSE_ABS: f64 = 1e-10;
pub const INVERSE_MIN_GAMMA: f64 = 0.1;

/// Frame duality and orthonormality, where gamma exceeds [`FRAME_MIN_GAMMA`].
pub const FRAME_ABS: f64 = 1e-10;
pub const FRAME_MIN_GAMMA: f64 = 1e-6;

/// `gamma^2 = |z1| + |z2|` under the covering map.
pub const GAMMA_COVER_ABS: f64 = 1e-14;

/// Allowed deviation of fitted log-log growth exponents from +1 / -1.
pub const SLOPE_TOL: f64 = 0.05;

/// Coordinate <-> frame representation round trip.
pub const ROUNDTRIP_ABS: f64 = 1e-10;

/// Discrete mass of the mollifier kernel.
pub const MOLLIFIER_MASS: f64 = 1e-12;

/// Spectral multiplier with exponent zero against the weighted L2 quadrature.
pub const FRACTIONAL_IDENTITY: f64 = 1e-10;

/// Unweighted order-one multiplier against the finite-difference H1 norm.
pub const FRACTIONAL_H1_REL: f64 = 0.02;

/// Unweighted multiplier of a Gaussian against its Fourier-side integral.
pub const FRACTIONAL_GAUSSIAN_REL: f64 = 0.01;

/// Observed order of the adjoint pairing residual under h -> h/2.
pub const ADJOINT_MIN_ORDER: f64 = 1.0;

/// Maximum ratio between the largest and smallest dyadic-annulus maxima in
/// the structure-equation checks.
pub const ANNULUS_SPREAD: f64 = 4.0;

/// Minimum number of dyadic annuli in a structure-equation check.
pub const MIN_ANNULI: usize = 6;

/// Relative drift of a sweep's max ratio between the two resolutions.
pub const REFINEMENT_DRIFT: f64 = 0.25;

/// Allowed step-to-step increase of the per-radius max ratio as the support
/// shrinks.
pub const TREND_VIOLATION: f64 = 0.25;

/// Friedrichs study: tolerated per-step increase and required overall decay.
pub const FRIEDRICHS_STEP: f64 = 0.10;
pub const FRIEDRICHS_FINAL_OVER_INITIAL: f64 = 0.01;

/// Homogeneity of norms under scalar multiplication.
pub const HOMOGENEITY_REL: f64 = 1e-12;

/// Eigenvalue cutoff (relative to the largest) in the pointwise commutator
/// expansion.
pub const EXPANSION_CUTOFF: f64 = 1e-12;

/// `dbar dbar u` on smooth non-dyadic data, relative to `max|u| / h^2`.
pub const DBAR_SQUARED_SMOOTH: f64 = 1e-12;
