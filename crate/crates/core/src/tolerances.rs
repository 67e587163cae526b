//! Central numeric tolerances.
//!
//! Every tolerance that a test or a verification routine relies on lives
//! here, with the reasoning pinned next to the value.  Call sites must not
//! invent ad-hoc constants.

/// Acceptable Wronskian defect `|C S' - S C' - 1|` for solver output.
///
/// The fixed-step RK4 integrator at the default step count keeps the defect
/// below 1e-10 for smooth bounded potentials on unit-scale edges; 1e-8 leaves
/// headroom for high `lambda` (oscillatory) runs up to `lambda ~ 500`.
pub const WRONSKIAN_TOL: f64 = 1e-8;

/// Wronskian gate applied to caller-supplied bases before building a
/// vertex-condition matrix.  Looser than [`WRONSKIAN_TOL`] because callers
/// may hand in bases from coarser integrations.
pub const MATRIX_WRONSKIAN_TOL: f64 = 1e-6;

/// Sup-norm threshold for the evenness check `q(x) = q(a - x)` on the
/// 1024-point symmetric grid.
pub const EVENNESS_TOL: f64 = 1e-10;

/// Floor for relative-error denominators: `|x - y| / max(|x|, |y|, FLOOR)`.
pub const REL_ERR_FLOOR: f64 = 1e-12;

/// Relative agreement required between the vertex-condition determinant and
/// its closed form on random Wronskian-consistent data.  Both routes are
/// exact in exact arithmetic; 1e-9 absorbs elimination roundoff at moderate
/// growth factors.
pub const DET_VS_CLOSED_REL_TOL: f64 = 1e-9;

/// Relative agreement required when the general closed form is reduced to
/// the identical-even-potential dispersion relation.
pub const REDUCTION_REL_TOL: f64 = 1e-8;

/// Absolute agreement of the three algebraic forms of the triple-cosine
/// quantity (squared modulus, cosine sum, half-angle product).
pub const TRIPLE_COS_TOL: f64 = 1e-12;

/// Bisection width for band edges in `lambda`.
pub const BAND_EDGE_LAMBDA_TOL: f64 = 1e-10;

/// Bisection width for point-spectrum roots in `lambda`.  Tighter than band
/// edges so that flat-band residuals evaluated at the root stay far below
/// [`FLAT_BAND_RESIDUAL_TOL`].
pub const POINT_ROOT_LAMBDA_TOL: f64 = 1e-12;

/// Required smallness of the full reduced-relation residual at a flat-band
/// eigenvalue, for every quasimomentum.
pub const FLAT_BAND_RESIDUAL_TOL: f64 = 1e-10;

/// Endpoint accuracy of computed zero-potential bands against the analytic
/// band formulas.
pub const Q0_BAND_ENDPOINT_TOL: f64 = 1e-6;

/// Residual bound for the half-interval basis identities on even potentials.
pub const HILL_IDENTITY_TOL: f64 = 1e-8;

/// Default magnitude bound for random consistent bases.
pub const DEFAULT_MAGNITUDE_BOUND: f64 = 2.0;

/// Acceptance threshold for a tangential dispersion root: at a candidate
/// extremum of `phi` the band polynomial must be this close to zero to count
/// as a root.  True tangencies evaluate at ~1e-13; near-misses (open gaps)
/// sit orders of magnitude higher.
pub const TANGENT_ROOT_ACCEPT_TOL: f64 = 1e-7;

/// Merge radius when deduplicating dispersion roots found via different
/// factors of the reduced relation.
pub const ROOT_DEDUPE_TOL: f64 = 1e-9;

/// Indicator violations smaller than this never open a gap: a scan sample
/// with `phi` beyond a band boundary by less than the solver's own accuracy
/// is a tangential contact (for example the `phi = -1` dips of the free
/// Hill discriminant), not a crossing.
pub const TANGENT_GAP_PHI_TOL: f64 = 1e-9;

/// Match radius between a refined `phi` extremum value and a dispersion
/// target `sp`: within it, the extremum is a double root of
/// `phi(lambda) = sp`.
pub const TANGENCY_MATCH_TOL: f64 = 1e-9;
