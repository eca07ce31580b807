use std::fmt;

/// Errors produced by factorization, approximation and certificate pipelines.
///
/// Grid points are reported as flat row-major indices into the domain grid
/// (last axis fastest); `None` means the value in question was a plain scalar.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Two operands live on different domains (or one has none where required).
    DomainMismatch,
    /// A domain failed a structural invariant (empty box, resolution < 2, ...).
    InvalidDomain(String),
    /// Matrix or factor index out of range.
    IndexOutOfRange { index: usize, bound: usize },
    /// Elementary factor with i == j or a zero-based/one-based mixup.
    BadFactorIndices { i: usize, j: usize },
    /// Operation applied to an element kind it does not accept.
    KindMismatch(String),
    /// Element is not invertible (zero scalar, or zero at the named grid point).
    NotAUnit { point: Option<usize> },
    /// Element required to be strictly positive is not, at the named point.
    NotPositive { point: Option<usize> },
    /// Determinant deviates from one beyond tolerance.
    DetNotOne {
        deviation: f64,
        point: Option<usize>,
    },
    /// Near-identity entry bound |a_ij| < limit violated.
    BoundViolated {
        row: usize,
        col: usize,
        point: Option<usize>,
        value: f64,
        limit: f64,
    },
    /// A factor list was required to be nonempty.
    EmptyFactorList,
    /// Polynomial fitting hit the degree cap before meeting the bound.
    DegreeCapReached {
        max_degree: u32,
        worst_point: usize,
        achieved: f64,
        required: f64,
    },
    /// Least-squares system was singular at the given degree.
    ApproxSingular { degree: u32 },
    /// Separation inputs intersect.
    SetsOverlap,
    /// A required set argument was empty.
    EmptySet(&'static str),
    /// The given subsets fail to cover the active grid.
    NotACover { point: usize },
    /// No one-step shrinkage of the cover exists at this resolution.
    NoShrink { point: usize },
    /// No pivot choice keeps magnitude >= floor at the named stage/point.
    PivotBelowFloor {
        stage: usize,
        point: usize,
        value: f64,
        floor: f64,
    },
    /// Zero pivot encountered (scalar elimination).
    Singular { stage: usize, point: Option<usize> },
    /// A time value was required to lie on the t-grid and does not.
    OffTimeGrid { value: f64 },
    /// A time function escaped [0, 1] at the named point.
    TimeOutOfRange { what: &'static str, point: usize },
    /// Telescoped patch product disagrees with the homotopy at the named point.
    TelescopeMismatch { point: usize, deviation: f64 },
    /// Operation requires a full box domain but got a masked one.
    MaskedDomain,
    /// A stated precondition does not hold.
    Precondition {
        what: &'static str,
        point: Option<usize>,
    },
    /// A final re-multiplication / assertion check failed.
    VerificationFailed {
        what: &'static str,
        point: Option<usize>,
        deviation: f64,
        tol: f64,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn at(p: &Option<usize>) -> String {
            match p {
                Some(i) => format!(" at grid point {i}"),
                None => String::new(),
            }
        }
        match self {
            Error::DomainMismatch => write!(f, "operands live on different domains"),
            Error::InvalidDomain(msg) => write!(f, "invalid domain: {msg}"),
            Error::IndexOutOfRange { index, bound } => {
                write!(f, "index {index} out of range (bound {bound})")
            }
            Error::BadFactorIndices { i, j } => {
                write!(f, "invalid elementary factor indices ({i}, {j})")
            }
            Error::KindMismatch(msg) => write!(f, "element kind mismatch: {msg}"),
            Error::NotAUnit { point } => write!(f, "element is not a unit{}", at(point)),
            Error::NotPositive { point } => {
                write!(f, "element is not strictly positive{}", at(point))
            }
            Error::DetNotOne { deviation, point } => {
                write!(f, "determinant deviates from one by {deviation:e}{}", at(point))
            }
            Error::BoundViolated { row, col, point, value, limit } => write!(
                f,
                "entry ({row}, {col}) violates |a| < {limit}: |{value}|{}",
                at(point)
            ),
            Error::EmptyFactorList => write!(f, "factor list must be nonempty"),
            Error::DegreeCapReached { max_degree, worst_point, achieved, required } => write!(
                f,
                "degree cap {max_degree} reached: residual {achieved:e} >= {required:e} at grid point {worst_point}"
            ),
            Error::ApproxSingular { degree } => {
                write!(f, "least-squares system singular at degree {degree}")
            }
            Error::SetsOverlap => write!(f, "sets to separate must be disjoint"),
            Error::EmptySet(name) => write!(f, "set '{name}' must be nonempty"),
            Error::NotACover { point } => {
                write!(f, "subsets do not cover the grid: point {point} uncovered")
            }
            Error::NoShrink { point } => write!(
                f,
                "no one-step shrinkage exists at this resolution: point {point} uncoverable"
            ),
            Error::PivotBelowFloor { stage, point, value, floor } => write!(
                f,
                "stage {stage}: no pivot >= {floor} at grid point {point} (best {value:e})"
            ),
            Error::Singular { stage, point } => {
                write!(f, "zero pivot at stage {stage}{}", at(point))
            }
            Error::OffTimeGrid { value } => {
                write!(f, "time value {value} does not lie on the t-grid")
            }
            Error::TimeOutOfRange { what, point } => {
                write!(f, "{what} escapes [0, 1] at grid point {point}")
            }
            Error::TelescopeMismatch { point, deviation } => write!(
                f,
                "telescoped product disagrees with the homotopy at product-grid point {point} (deviation {deviation:e})"
            ),
            Error::MaskedDomain => write!(f, "operation requires a full box domain (no mask)"),
            Error::Precondition { what, point } => {
                write!(f, "precondition violated: {what}{}", at(point))
            }
            Error::VerificationFailed { what, point, deviation, tol } => write!(
                f,
                "verification failed: {what} deviates by {deviation:e} (tol {tol:e}){}",
                at(point)
            ),
        }
    }
}

impl std::error::Error for Error {}

impl Error {
    /// True for errors raised by re-multiplication / assertion checks, as
    /// opposed to precondition or contract violations.
    pub fn is_verification(&self) -> bool {
        matches!(
            self,
            Error::VerificationFailed { .. } | Error::TelescopeMismatch { .. }
        )
    }
}
