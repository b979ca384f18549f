use thiserror::Error;

/// Failures raised anywhere in the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("antenna {index} at x = {x} m lies outside the waveguide [0, {length}]")]
    OutOfWaveguide { index: usize, x: f64, length: f64 },
    #[error("antenna {index} is {distance} m from the user, below the 1e-9 m floor")]
    DegenerateDistance { index: usize, distance: f64 },
    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("parameter `{name}` = {value} is outside its admissible range")]
    ParamOutOfRange { name: &'static str, value: f64 },
    #[error("ground node {index} has non-zero height {z}")]
    NotOnGround { index: usize, z: f64 },
    #[error("jamming term P_J_max * A_J is zero; the warden statistic is deterministic under H0")]
    DegenerateJamming,
    #[error("probability {value} at index {index} is outside [0, 1]")]
    ProbOutOfRange { index: usize, value: f64 },
    #[error("index {index} exceeds the admissible maximum {max}")]
    IndexOutOfRange { index: usize, max: usize },
    #[error("the warden set is empty")]
    EmptyWardenSet,
    #[error("wardens have different normalized slopes 1/(P_J_max A_J)")]
    HeterogeneousSlope,
    #[error("wardens have different noise powers")]
    HeterogeneousNoise,
    #[error("finite-difference gradient is non-finite in variable {variable}")]
    NonFiniteGradient { variable: usize },
    #[error("{count} antennas with spacing {spacing} m do not fit on a {length} m waveguide")]
    InfeasibleGeometry { count: usize, spacing: f64, length: f64 },
    #[error("no power split satisfies the covertness constraint")]
    NoFeasiblePower,
    #[error("line search stalled")]
    LineSearchStall,
    #[error("no grid point satisfies the covertness constraint")]
    NoFeasibleGridPoint,
    #[error("rejection sampling accepted {accepted} of {draws} draws before the budget ran out")]
    RejectionBudgetExceeded { accepted: usize, draws: usize },
    #[error("{0} wardens exceed the enumeration limit of 20")]
    TooManyWardens(usize),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// True for errors meaning the scenario itself admits no valid design.
    pub fn is_infeasibility(&self) -> bool {
        matches!(
            self,
            Error::InfeasibleGeometry { .. }
                | Error::NoFeasiblePower
                | Error::NoFeasibleGridPoint
                | Error::RejectionBudgetExceeded { .. }
        )
    }
}
