use core::fmt;

/// Errors reported by the library.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An argument is outside its admissible range or not finite.
    InvalidInput(&'static str),
    /// A refinement loop stopped before reaching its tolerance.
    NonConvergence {
        /// Last change between successive refinements.
        estimate: f64,
    },
    /// A series or integral diverges for the requested arguments.
    Divergent(&'static str),
    /// The grid cannot resolve the requested bandwidth.
    UnresolvedBandwidth {
        /// Requested maximal degree.
        lmax: usize,
        /// Grid size in cos θ.
        n_theta: usize,
        /// Grid size in φ.
        n_phi: usize,
    },
    /// Sample count does not match the grid layout.
    ShapeMismatch {
        /// Expected length.
        expected: usize,
        /// Received length.
        found: usize,
    },
    /// Operator input has the wrong field type.
    TypeMismatch(&'static str),
    /// A nonlocal operator was requested without kernel tables.
    MissingTables,
}

/// Convenience alias.
pub type Result<T> = core::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidInput(what) => write!(f, "invalid input: {what}"),
            Error::NonConvergence { estimate } => {
                write!(f, "refinement did not converge (estimate {estimate:e})")
            }
            Error::Divergent(what) => write!(f, "divergent: {what}"),
            Error::UnresolvedBandwidth { lmax, n_theta, n_phi } => write!(
                f,
                "grid {n_theta}x{n_phi} cannot resolve lmax = {lmax} \
                 (need n_theta >= lmax+1 and n_phi >= 2 lmax+1)"
            ),
            Error::ShapeMismatch { expected, found } => {
                write!(f, "expected {expected} samples, found {found}")
            }
            Error::TypeMismatch(what) => write!(f, "type mismatch: {what}"),
            Error::MissingTables => write!(f, "nonlocal operator requires kernel tables"),
        }
    }
}

impl core::error::Error for Error {}
