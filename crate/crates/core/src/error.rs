use thiserror::Error;

use crate::algebraic::LatticePoint;

pub type Result<T> = std::result::Result<T, SpectraError>;

/// Every failure the library can report. Variants are grouped by the exit
/// code the command-line frontend maps them to.
#[derive(Debug, Error)]
pub enum SpectraError {
    // --- input errors ---
    #[error("cannot parse polynomial `{0}`")]
    Parse(String),
    #[error("polynomial is not monic (leading coefficient {0})")]
    NotMonic(i64),
    #[error("constant coefficient must be +1 or -1, got {0}")]
    BadConstantTerm(i64),
    #[error("polynomial has degree {0}; degree at least 2 is required")]
    DegreeTooSmall(usize),
    #[error("polynomial factors over the rationals: {0}")]
    Reducible(String),
    #[error("no real root in the open interval (1, 2)")]
    NoRootInRange,
    #[error("root of modulus {modulus} lies within {tol:e} of the unit circle")]
    NonHyperbolic { modulus: f64, tol: f64 },
    #[error("operation requires a Pisot number")]
    NotPisot,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("digit word contains {0}; digits must lie in {{-1, 0, 1}}")]
    BadDigit(i64),

    // --- size guards (also input errors: the request is too large) ---
    #[error("patch exceeds the cap of {cap} points")]
    PatchTooLarge { cap: usize },
    #[error("depth {depth} exceeds the cap for this operation")]
    DepthTooLarge { depth: usize },
    #[error("brute-force enumeration of length {0} is too large")]
    TooLarge(usize),
    #[error("lattice coordinate overflowed 64-bit range")]
    IntegerOverflow,

    // --- convergence ---
    #[error("iteration did not converge: {0}")]
    ConvergenceFailure(String),
    #[error("maximality at the origin fails at step {n}, index {index}")]
    AssumptionViolated { n: usize, index: usize },

    // --- verdict / search outcomes ---
    #[error("point {0} lies within the tolerance band of a box boundary")]
    BoundaryAmbiguous(LatticePoint),
    #[error("no connector word of length at most {cap} from index {from}")]
    SearchExhausted { from: usize, cap: usize },
    #[error("no null word starting with a nonzero digit was found")]
    NullWordNotFound,
    #[error("measure vanishes at the requested translate (index {0})")]
    ZeroMass(usize),
    #[error("contracting coordinate {0} is outside the window")]
    OutOfWindow(f64),

    // --- internal invariant breaches ---
    #[error("odometer left the window at y = {0}")]
    WindowEscape(f64),
    #[error("sampled contraction ratio {0} is not below 1")]
    NoContraction(f64),

    // --- plumbing ---
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("malformed file: {0}")]
    Format(String),
}

impl SpectraError {
    /// Short machine-readable tag used in error JSON.
    pub fn kind(&self) -> &'static str {
        use SpectraError::*;
        match self {
            Parse(_) => "parse",
            NotMonic(_) => "not_monic",
            BadConstantTerm(_) => "bad_constant_term",
            DegreeTooSmall(_) => "degree_too_small",
            Reducible(_) => "reducible",
            NoRootInRange => "no_root_in_range",
            NonHyperbolic { .. } => "non_hyperbolic",
            NotPisot => "not_pisot",
            InvalidArgument(_) => "invalid_argument",
            BadDigit(_) => "bad_digit",
            PatchTooLarge { .. } => "patch_too_large",
            DepthTooLarge { .. } => "depth_too_large",
            TooLarge(_) => "too_large",
            IntegerOverflow => "integer_overflow",
            ConvergenceFailure(_) => "convergence_failure",
            AssumptionViolated { .. } => "assumption_violated",
            BoundaryAmbiguous(_) => "boundary_ambiguous",
            SearchExhausted { .. } => "search_exhausted",
            NullWordNotFound => "null_word_not_found",
            ZeroMass(_) => "zero_mass",
            OutOfWindow(_) => "out_of_window",
            WindowEscape(_) => "window_escape",
            NoContraction(_) => "no_contraction",
            Io(_) => "io",
            Json(_) => "json",
            Csv(_) => "csv",
            Format(_) => "format",
        }
    }

    /// Process exit status: 2 for bad input, 3 for convergence problems,
    /// 1 for anything that indicates a bug or an environment failure.
    pub fn exit_code(&self) -> i32 {
        use SpectraError::*;
        match self {
            Parse(_)
            | NotMonic(_)
            | BadConstantTerm(_)
            | DegreeTooSmall(_)
            | Reducible(_)
            | NoRootInRange
            | NonHyperbolic { .. }
            | NotPisot
            | InvalidArgument(_)
            | BadDigit(_)
            | PatchTooLarge { .. }
            | DepthTooLarge { .. }
            | TooLarge(_)
            | IntegerOverflow
            | OutOfWindow(_)
            | Io(_)
            | Format(_) => 2,
            ConvergenceFailure(_) | AssumptionViolated { .. } | SearchExhausted { .. } => 3,
            _ => 1,
        }
    }
}
