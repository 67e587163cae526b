//! Band spectra of periodic quantum graphs on Archimedean tilings.
//!
//! A periodic quantum graph carries the Schrodinger operator `-y'' + q y` on
//! every edge of a 2D-periodic metric graph, with continuity and Kirchhoff
//! (zero flux sum) conditions at the vertices.  Floquet-Bloch reduction at
//! quasimomentum `Theta = (theta1, theta2)` turns the spectral problem into a
//! finite linear system on the period cell: `lambda` lies in the spectrum of
//! the reduced operator exactly when the determinant of that system vanishes.
//!
//! The crate is organised bottom-up:
//!
//! * [`potentials`] - the edge potential `q` on `[0, a]` and its evenness
//!   check `q(x) = q(a - x)`.
//! * [`hill`] - the cosine-like / sine-like fundamental pair `(C, S)` of the
//!   edge operator and the Hill discriminant half `phi(lambda) = S'(a)`.
//! * [`chardet`] - vertex-condition matrices and their closed-form
//!   determinants for the four tilings that admit one (triangular, elongated
//!   triangular, truncated square, trihexagonal), plus the randomized
//!   determinant-vs-closed-form oracle.
//! * [`dispersion`] - reduced dispersion relations for identical even edge
//!   potentials, band membership of `phi`, and witness quasimomenta.
//! * [`spectrum`] - absolutely continuous bands, flat-band point spectrum,
//!   fixed-`Theta` band functions, and the union cross-check between the two
//!   spectral routes.
//!
//! Two independent routes to the same spectrum exist on purpose: the
//! determinant route (matrix + elimination) and the closed-form route
//! (reduced dispersion relations).  Keeping both honest against each other is
//! the main correctness instrument of the crate; see `tests/acceptance.rs`.

pub mod chardet;
pub mod dispersion;
pub mod hill;
pub mod potentials;
pub mod spectrum;
pub mod tolerances;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A coordinate left the edge domain `[0, a]`.
    #[error("position {x} outside the edge domain [0, {a}]")]
    Domain { x: f64, a: f64 },

    /// A potential description violates its structural invariants.
    #[error("invalid potential: {0}")]
    InvalidPotential(String),

    /// A numeric routine failed to converge or produced non-finite values.
    #[error("numeric failure: {0}")]
    Numeric(String),

    /// Wrong number of edge bases for a tiling.
    #[error("{tiling} needs {expected} edge bases, got {got}")]
    Arity {
        tiling: &'static str,
        expected: usize,
        got: usize,
    },

    /// Supplied data is internally inconsistent (e.g. Wronskian violation).
    #[error("inconsistent input: {0}")]
    Consistency(String),

    /// The requested combination is not provided by this crate.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// A documented precondition does not hold for the supplied input.
    #[error("precondition violated: {0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, Error>;
